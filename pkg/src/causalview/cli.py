"""Command-line interface.

Exit codes: 0 when everything checks out, 1 when a numerical check fails or
a conversion needs a full-rank marginal that is missing, 2 for invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

from . import scenario_file
from .matcore import DEFAULT_TOL, DomainError, RankDeficientError
from .multiparty import (
    TripartiteCausalScenario,
    TripartiteSpacelikeScenario,
    from_spacelike_tri,
    joint_tri_causal,
    joint_tri_causal_oracle,
    joint_tri_spacelike,
    to_spacelike_tri,
)
from .nosignal import DEFAULT_NS_TOL, check_nosignalling
from .randgen import RngSpec, random_povm
from .scenario import (
    CausalScenario,
    JointDistribution,
    SpacelikeScenario,
    equivalence_report,
    from_spacelike,
    joint_causal,
    joint_causal_oracle,
    joint_spacelike,
    polarizer_scenario,
    to_spacelike,
)
from .scenario_file import ScenarioFileError
from .suite import run_suite

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def format_table(dist: JointDistribution, title: str) -> str:
    table = dist.clamped()
    rows = [["", *dist.col_labels, "p(A)"]]
    for label, row in zip(dist.row_labels, table):
        rows.append([label, *map(_fmt, row), _fmt(row.sum())])
    rows.append(["p(B)", *map(_fmt, table.sum(axis=0)), _fmt(table.sum())])
    widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
    lines = [title]
    for r in rows:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(r, widths)))
    return "\n".join(lines)


def format_table3(dist, title: str) -> str:
    lines = [title]
    for k, c in enumerate(dist.labels_c):
        slab = dist.clamped()[:, :, k]
        rows = [[f"c={c}", *dist.labels_b]]
        rows += [[a, *map(_fmt, row)] for a, row in zip(dist.labels_a, slab)]
        widths = [max(len(r[m]) for r in rows) for m in range(len(rows[0]))]
        lines += ["  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in rows]
    lines.append(f"total {_fmt(dist.table.sum())}")
    return "\n".join(lines)


def _dist_dict(dist) -> dict:
    if isinstance(dist, JointDistribution):
        return {
            "row_labels": list(dist.row_labels),
            "col_labels": list(dist.col_labels),
            "table": dist.table.tolist(),
        }
    return {
        "labels": [list(dist.labels_a), list(dist.labels_b), list(dist.labels_c)],
        "table": dist.table.tolist(),
    }


def _emit(args, human: str, machine: dict) -> None:
    if args.format == "machine":
        print(json.dumps(machine))
    else:
        print(human)


def _load(path: str):
    try:
        return scenario_file.read_scenario(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _views(s, view: str) -> dict:
    """Joint distributions for the requested observer views."""
    if isinstance(s, CausalScenario):
        native, other = "causal", "spacelike"
        tables = {
            "causal": lambda: joint_causal(s),
            "spacelike": lambda: joint_spacelike(to_spacelike(s)),
        }
    elif isinstance(s, SpacelikeScenario):
        native, other = "spacelike", "causal"
        tables = {
            "spacelike": lambda: joint_spacelike(s),
            "causal": lambda: joint_causal(from_spacelike(s)),
        }
    elif isinstance(s, TripartiteCausalScenario):
        native, other = "causal", "spacelike"
        tables = {
            "causal": lambda: joint_tri_causal(s),
            "spacelike": lambda: joint_tri_spacelike(to_spacelike_tri(s)),
        }
    else:
        native, other = "spacelike", "causal"
        tables = {
            "spacelike": lambda: joint_tri_spacelike(s),
            "causal": lambda: joint_tri_causal(from_spacelike_tri(s)),
        }
    wanted = {"auto": [native], "both": [native, other]}.get(view, [view])
    return {name: tables[name]() for name in wanted}


def cmd_table(args) -> int:
    s = _load(args.file)
    try:
        dists = _views(s, args.view)
    except RankDeficientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    fmt = format_table if isinstance(s, (CausalScenario, SpacelikeScenario)) else format_table3
    human = [fmt(d, f"[{name} view]") for name, d in dists.items()]
    machine = {name: _dist_dict(d) for name, d in dists.items()}
    if len(dists) == 2:
        a, b = dists.values()
        gap = a.max_gap(b)
        human.append(f"max gap between views: {gap:.3e}")
        machine["max_gap"] = gap
    _emit(args, "\n\n".join(human), machine)
    return EXIT_OK


def cmd_convert(args) -> int:
    s = _load(args.file)
    try:
        if args.direction == "to-spacelike":
            if isinstance(s, CausalScenario):
                out = to_spacelike(s)
            elif isinstance(s, TripartiteCausalScenario):
                out = to_spacelike_tri(s)
            else:
                raise UsageError(f"to-spacelike needs a causal file, got {_kind(s)}")
        else:
            if isinstance(s, SpacelikeScenario):
                out = from_spacelike(s)
            elif isinstance(s, TripartiteSpacelikeScenario):
                out = from_spacelike_tri(s)
            else:
                raise UsageError(f"to-causal needs a spacelike file, got {_kind(s)}")
    except RankDeficientError as exc:
        print(f"error: cannot read this state causally: {exc}", file=sys.stderr)
        return EXIT_FAILED
    scenario_file.write_scenario(out, args.output)
    _emit(
        args,
        f"wrote {_kind(out)} scenario to {args.output}",
        {"kind": _kind(out), "output": args.output},
    )
    return EXIT_OK


def _kind(s) -> str:
    return scenario_file.scenario_to_dict(s)["kind"]


def cmd_verify(args) -> int:
    s = _load(args.file)
    if isinstance(s, CausalScenario):
        rep = equivalence_report(s)
        gaps = {
            "equivalence_gap": rep.max_abs_gap,
            "oracle_gap": rep.dist_causal.max_gap(joint_causal_oracle(s)),
        }
    elif isinstance(s, TripartiteCausalScenario):
        causal = joint_tri_causal(s)
        gaps = {
            "equivalence_gap": causal.max_gap(joint_tri_spacelike(to_spacelike_tri(s))),
            "oracle_gap": causal.max_gap(joint_tri_causal_oracle(s)),
        }
    else:
        raise UsageError(f"verify needs a causal or tripartite_causal file, got {_kind(s)}")
    passed = all(g < args.tol for g in gaps.values())
    human = "\n".join(f"{k}: {v:.3e}" for k, v in gaps.items())
    human += f"\n{'PASS' if passed else 'FAIL'} (tol {args.tol:g})"
    _emit(args, human, {**gaps, "tol": args.tol, "passed": passed})
    return EXIT_OK if passed else EXIT_FAILED


def cmd_nosignal(args) -> int:
    s = _load(args.file)
    if not isinstance(s, SpacelikeScenario):
        raise UsageError(f"nosignal needs a spacelike file, got {_kind(s)}")
    if args.extra_povms < 0:
        raise UsageError("--extra-povms must be nonnegative")
    povms_a, povms_b = [s.povm_a_prime], [s.povm_b_prime]
    for side, povms, dim in (("A", povms_a, s.shape.dim_a), ("B", povms_b, s.shape.dim_b)):
        g = RngSpec(args.seed, 0 if side == "A" else 1).generator()
        povms += [random_povm(dim, int(g.integers(2, 6)), g) for _ in range(args.extra_povms)]
    if len(povms_a) < 2:
        raise UsageError("need --extra-povms >= 1 to compare alternative measurements")
    rep = check_nosignalling(s.tau, s.shape, povms_a, povms_b, args.tol)
    human = (
        f"A -> B marginal shift: {rep.direction_a_to_b:.3e}\n"
        f"B -> A marginal shift: {rep.direction_b_to_a:.3e}\n"
        f"POVM pairs tested: {rep.povm_pairs_tested}\n"
        f"{'PASS' if rep.passed else 'FAIL'} (tol {rep.tol:g})"
    )
    machine = {
        "direction_a_to_b": rep.direction_a_to_b,
        "direction_b_to_a": rep.direction_b_to_a,
        "povm_pairs_tested": rep.povm_pairs_tested,
        "tol": rep.tol,
        "passed": rep.passed,
    }
    _emit(args, human, machine)
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_demo_polarizer(args) -> int:
    if not 0.0 < args.p < 1.0:
        raise UsageError(f"--p must lie strictly between 0 and 1, got {args.p}")
    s = polarizer_scenario(args.alpha, args.beta, args.p)
    rep = equivalence_report(s)
    analytic = args.p * math.sin(args.beta - args.alpha) ** 2
    p1 = rep.dist_causal.prob("a_r", "b_t")
    p2 = rep.dist_spacelike.prob("a_r", "b_t")
    human = "\n\n".join(
        [
            f"polarizers at alpha={args.alpha:g}, beta={args.beta:g} rad, p={args.p:g}",
            format_table(rep.dist_causal, "[observer 1: mirror, A prepares for B]"),
            format_table(rep.dist_spacelike, "[observer 2: shared entangled source]"),
            f"p(a_r, b_t): observer 1 {_fmt(p1)}, observer 2 {_fmt(p2)}, "
            f"p*sin^2(beta-alpha) {_fmt(analytic)}\n"
            f"max gap between views: {rep.max_abs_gap:.3e}",
        ]
    )
    machine = {
        "causal": _dist_dict(rep.dist_causal),
        "spacelike": _dist_dict(rep.dist_spacelike),
        "p_ar_bt_causal": p1,
        "p_ar_bt_spacelike": p2,
        "p_ar_bt_analytic": analytic,
        "max_gap": rep.max_abs_gap,
    }
    _emit(args, human, machine)
    return EXIT_OK


def _parse_dims(text: str) -> tuple:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not dims or min(dims) < 2:
        raise argparse.ArgumentTypeError("dimensions must be at least 2")
    return dims


def cmd_suite(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    summary = run_suite(args.trials, args.dims, args.seed, args.tol, args.tripartite, args.workers)
    d = summary.as_dict()
    human = "\n".join(f"{k}: {v:.3e}" if isinstance(v, float) else f"{k}: {v}" for k, v in d.items())
    human += f"\n{'PASS' if summary.passed else 'FAIL'}"
    _emit(args, human, d)
    return EXIT_OK if summary.passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format", choices=("human", "machine"), default="human",
        help="'machine' prints one JSON object instead of text",
    )
    parser = argparse.ArgumentParser(
        prog="causalview",
        description="Compare causal and spacelike observer views of quantum experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table", parents=[common], help="print joint probability tables")
    p.add_argument("file")
    p.add_argument("--view", choices=("auto", "causal", "spacelike", "both"), default="auto")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("convert", parents=[common], help="rewrite a scenario in the other view")
    p.add_argument("file")
    p.add_argument("--direction", choices=("to-spacelike", "to-causal"), required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("verify", parents=[common], help="check that both views agree")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("nosignal", parents=[common], help="no-signalling check on a shared state")
    p.add_argument("file")
    p.add_argument("--extra-povms", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=DEFAULT_NS_TOL)
    p.set_defaults(func=cmd_nosignal)

    demo = sub.add_parser("demo", help="worked examples")
    demo_sub = demo.add_subparsers(dest="demo", required=True)
    p = demo_sub.add_parser("polarizer", parents=[common], help="two polarizers and a mirror")
    p.add_argument("--alpha", type=float, default=0.0, help="angle of polarizer A (radians)")
    p.add_argument("--beta", type=float, default=math.pi / 4, help="angle of polarizer B (radians)")
    p.add_argument("--p", type=float, default=0.5, help="weight of the reflected preparation")
    p.set_defaults(func=cmd_demo_polarizer)

    p = sub.add_parser("suite", parents=[common], help="randomized verification suite")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--dims", type=_parse_dims, default=(2, 3, 4))
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--tripartite", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioFileError as exc:
        print(f"invalid scenario file {args.file}: {exc}", file=sys.stderr)
    except (UsageError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
