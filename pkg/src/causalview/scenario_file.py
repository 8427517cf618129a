"""JSON scenario documents.

A document is an object with a ``kind`` (``causal``, ``spacelike``,
``tripartite_causal`` or ``tripartite_spacelike``), a ``dims`` object with
keys ``a``, ``b`` and, for three parties, ``c``, and named matrix blocks.
Complex numbers are ``[re, im]`` pairs and matrices are lists of rows::

    {
      "kind": "causal",
      "dims": {"a": 2, "b": 2},
      "rho": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]],
      "kraus": [ <d_b x d_a matrix>, ... ],
      "povm_a": {"labels": ["0", "1"], "effects": [ <matrix>, ... ]},
      "povm_b": {"labels": ["0", "1"], "effects": [ <matrix>, ... ]}
    }

Causal kinds carry ``rho`` and ``kraus`` (for ``tripartite_causal`` the state
lives on C and the channel maps C into A (x) B); spacelike kinds carry
``tau`` (in A (x) B (x) C order for three parties). Every block is validated
on read and errors name the offending field.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Union

import numpy as np

from .matcore import BipartiteShape, DomainError, ShapeError
from .multiparty import TripartiteCausalScenario, TripartiteSpacelikeScenario
from .qobjects import DensityMatrix, KrausChannel, Povm
from .scenario import CausalScenario, SpacelikeScenario

KINDS = ("causal", "spacelike", "tripartite_causal", "tripartite_spacelike")

AnyScenario = Union[
    CausalScenario, SpacelikeScenario, TripartiteCausalScenario, TripartiteSpacelikeScenario
]


class ScenarioFileError(ValueError):
    """Invalid scenario document; ``field`` locates the problem."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(obj, field: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ScenarioFileError(field, "expected a non-empty list of rows")
    width = len(obj[0])
    out = np.empty((len(obj), width), dtype=complex)
    for i, row in enumerate(obj):
        if len(row) != width:
            raise ScenarioFileError(f"{field}[{i}]", f"row has {len(row)} entries, expected {width}")
        for j, z in enumerate(row):
            if (
                not isinstance(z, list)
                or len(z) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in z)
            ):
                raise ScenarioFileError(f"{field}[{i}][{j}]", "expected an [re, im] number pair")
            out[i, j] = complex(z[0], z[1])
    if not np.all(np.isfinite(out)):
        raise ScenarioFileError(field, "entries must be finite")
    return out


def _require(doc: dict, key: str):
    if key not in doc:
        raise ScenarioFileError(key, "missing block")
    return doc[key]


def _build(field: str, factory, *args):
    try:
        return factory(*args)
    except (DomainError, ShapeError) as exc:
        raise ScenarioFileError(field, str(exc)) from None


def _decode_povm(obj, field: str, dim: int) -> Povm:
    if not isinstance(obj, dict):
        raise ScenarioFileError(field, "expected an object with 'effects' and optional 'labels'")
    effects_obj = obj.get("effects")
    if not isinstance(effects_obj, list) or not effects_obj:
        raise ScenarioFileError(f"{field}.effects", "expected a non-empty list of matrices")
    effects = tuple(decode_matrix(e, f"{field}.effects[{k}]") for k, e in enumerate(effects_obj))
    labels = obj.get("labels")
    if labels is not None and (
        not isinstance(labels, list) or not all(isinstance(x, (str, int)) for x in labels)
    ):
        raise ScenarioFileError(f"{field}.labels", "expected a list of strings")
    povm = _build(field, Povm, effects, tuple(labels) if labels is not None else None)
    if povm.dim != dim:
        raise ScenarioFileError(field, f"effects are {povm.dim}-dimensional, dims say {dim}")
    return povm


def _decode_dims(doc: dict, keys: tuple) -> dict:
    dims = _require(doc, "dims")
    if not isinstance(dims, dict):
        raise ScenarioFileError("dims", "expected an object")
    out = {}
    for k in keys:
        v = dims.get(k)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ScenarioFileError(f"dims.{k}", "expected a positive integer")
        out[k] = v
    return out


def _decode_state(doc: dict, key: str, dim: int) -> DensityMatrix:
    m = decode_matrix(_require(doc, key), key)
    if m.shape != (dim, dim):
        raise ScenarioFileError(key, f"matrix is {m.shape[0]}x{m.shape[1]}, dims give {dim}x{dim}")
    return _build(key, DensityMatrix, m)


def _decode_channel(doc: dict, d_in: int, d_out: int) -> KrausChannel:
    ops_obj = _require(doc, "kraus")
    if not isinstance(ops_obj, list) or not ops_obj:
        raise ScenarioFileError("kraus", "expected a non-empty list of matrices")
    ops = []
    for m, k in enumerate(ops_obj):
        op = decode_matrix(k, f"kraus[{m}]")
        if op.shape != (d_out, d_in):
            raise ScenarioFileError(
                f"kraus[{m}]", f"operator is {op.shape[0]}x{op.shape[1]}, expected {d_out}x{d_in}"
            )
        ops.append(op)
    return _build("kraus", KrausChannel, tuple(ops))


def scenario_from_dict(doc) -> AnyScenario:
    if not isinstance(doc, dict):
        raise ScenarioFileError("<root>", "expected a JSON object")
    kind = _require(doc, "kind")
    if kind not in KINDS:
        raise ScenarioFileError("kind", f"unknown kind {kind!r}; expected one of {KINDS}")
    if kind == "causal":
        d = _decode_dims(doc, ("a", "b"))
        return _build(
            "rho",
            CausalScenario,
            _decode_state(doc, "rho", d["a"]),
            _decode_channel(doc, d["a"], d["b"]),
            _decode_povm(_require(doc, "povm_a"), "povm_a", d["a"]),
            _decode_povm(_require(doc, "povm_b"), "povm_b", d["b"]),
        )
    if kind == "spacelike":
        d = _decode_dims(doc, ("a", "b"))
        return _build(
            "tau",
            SpacelikeScenario,
            _decode_state(doc, "tau", d["a"] * d["b"]),
            _decode_povm(_require(doc, "povm_a"), "povm_a", d["a"]),
            _decode_povm(_require(doc, "povm_b"), "povm_b", d["b"]),
            BipartiteShape(d["a"], d["b"]),
        )
    d = _decode_dims(doc, ("a", "b", "c"))
    povm_a = _decode_povm(_require(doc, "povm_a"), "povm_a", d["a"])
    povm_b = _decode_povm(_require(doc, "povm_b"), "povm_b", d["b"])
    povm_c = _decode_povm(_require(doc, "povm_c"), "povm_c", d["c"])
    if kind == "tripartite_causal":
        return _build(
            "rho",
            TripartiteCausalScenario,
            _decode_state(doc, "rho", d["c"]),
            _decode_channel(doc, d["c"], d["a"] * d["b"]),
            povm_a,
            povm_b,
            povm_c,
        )
    return _build(
        "tau",
        TripartiteSpacelikeScenario,
        _decode_state(doc, "tau", d["a"] * d["b"] * d["c"]),
        povm_a,
        povm_b,
        povm_c,
    )


def _encode_povm(p: Povm) -> dict:
    return {"labels": list(p.labels), "effects": [encode_matrix(e) for e in p.effects]}


def scenario_to_dict(s: AnyScenario) -> dict:
    if isinstance(s, CausalScenario):
        return {
            "kind": "causal",
            "dims": {"a": s.shape.dim_a, "b": s.shape.dim_b},
            "rho": encode_matrix(s.rho.mat),
            "kraus": [encode_matrix(k) for k in s.channel.kraus_ops],
            "povm_a": _encode_povm(s.povm_a),
            "povm_b": _encode_povm(s.povm_b),
        }
    if isinstance(s, SpacelikeScenario):
        return {
            "kind": "spacelike",
            "dims": {"a": s.shape.dim_a, "b": s.shape.dim_b},
            "tau": encode_matrix(s.tau.mat),
            "povm_a": _encode_povm(s.povm_a_prime),
            "povm_b": _encode_povm(s.povm_b_prime),
        }
    if isinstance(s, TripartiteCausalScenario):
        d_a, d_b, d_c = s.dims
        return {
            "kind": "tripartite_causal",
            "dims": {"a": d_a, "b": d_b, "c": d_c},
            "rho": encode_matrix(s.rho_c.mat),
            "kraus": [encode_matrix(k) for k in s.channel.kraus_ops],
            "povm_a": _encode_povm(s.povm_a),
            "povm_b": _encode_povm(s.povm_b),
            "povm_c": _encode_povm(s.povm_c),
        }
    if isinstance(s, TripartiteSpacelikeScenario):
        d_a, d_b, d_c = s.dims
        return {
            "kind": "tripartite_spacelike",
            "dims": {"a": d_a, "b": d_b, "c": d_c},
            "tau": encode_matrix(s.tau_abc.mat),
            "povm_a": _encode_povm(s.povm_a),
            "povm_b": _encode_povm(s.povm_b),
            "povm_c": _encode_povm(s.povm_c_prime),
        }
    raise TypeError(f"not a scenario: {type(s).__name__}")


def loads(text: str) -> AnyScenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFileError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    return scenario_from_dict(doc)


_PAIR = re.compile(r"\[\s*([^\[\],\s]+),\s*([^\[\],\s]+)\s*\]")


def dumps(s: AnyScenario) -> str:
    # json writes floats with repr(), the shortest string that round-trips exactly
    text = json.dumps(scenario_to_dict(s), indent=1)
    return _PAIR.sub(r"[\1, \2]", text)


def read_scenario(path) -> AnyScenario:
    return loads(Path(path).read_text())


def write_scenario(s: AnyScenario, path) -> None:
    Path(path).write_text(dumps(s) + "\n")
