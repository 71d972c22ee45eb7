"""Scenario files: schema, parsing, dumping, and materialization of the
vectors and sequences they declare.

A scenario is a YAML mapping::

    name: example
    seed: 0                      # optional, default 0
    operator: {kind: ..., params: {...}, truncation_order: N}
    operators: {J3: {...}}       # optional extra named operators
    vectors: {f: {rule: basis, index: 1}}
    sequences: {c: {rule: geometric, ratio: 1/2, length: 40}}
    experiments:
      - kind: injectivity_decision
        name: case1              # optional
        params: {operator: default, f: f, g: g, L: 64}
        tolerances: {tol: 1.0e-10}

Vector rules: ``basis`` (index), ``explicit`` (values), ``harmonic``
(length; sum of e_k/(k+1)), ``random`` (seed, optional ``integer: true``),
``ones``.  Sequence rules: ``explicit`` (values, infinite_tail),
``geometric`` (ratio, length, scale), ``inverse_factorial`` (offset,
length), ``moments`` (lambdas, length), ``odd_harmonic`` (length),
``random`` (seed, length).
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from .errors import ScenarioError
from .operators import OperatorSpec, build_truncation, parse_number
from .sequences import CoefficientSequence

SCHEMA_VERSION = 1

# experiment kind -> parameter keys holding references: value is the
# namespace ("operators", "vectors", "sequences")
EXPERIMENT_KINDS = {
    "intertwining": {"operator": "operators", "f": "vectors"},
    "kernel_range": {"operator": "operators", "f": "vectors"},
    "dependence": {"operator": "operators", "f": "vectors"},
    "injectivity_decision": {"operator": "operators", "f": "vectors", "g": "vectors"},
    "rationality": {"sequence": "sequences"},
    "hs_norm": {"sequence": "sequences"},
    "growth": {"operator": "operators"},
    "local_growth": {"operator": "operators", "x": "vectors", "y": "vectors"},
    "krylov_rank": {"operator": "operators", "x": "vectors"},
    "combination_cyclicity": {"operator": "operators", "x": "vectors", "alpha": "sequences"},
    "dss_noncyclicity": {"sequence": "sequences"},
    "volterra": {},
    "square_lattice": {},
}

VECTOR_RULES = ("basis", "explicit", "harmonic", "random", "ones")
SEQUENCE_RULES = ("explicit", "geometric", "inverse_factorial", "moments", "odd_harmonic",
                  "random")


@dataclass
class Experiment:
    kind: str
    name: str
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "name": self.name}
        if self.params:
            d["params"] = copy.deepcopy(self.params)
        if self.tolerances:
            d["tolerances"] = dict(self.tolerances)
        return d


@dataclass
class Scenario:
    name: str
    operator: OperatorSpec | None
    operators: dict = field(default_factory=dict)
    vectors: dict = field(default_factory=dict)
    sequences: dict = field(default_factory=dict)
    experiments: list = field(default_factory=list)
    seed: int = 0
    description: str = ""

    def to_dict(self) -> dict:
        d = {"name": self.name, "seed": self.seed}
        if self.description:
            d["description"] = self.description
        if self.operator is not None:
            d["operator"] = self.operator.to_dict()
        if self.operators:
            d["operators"] = {k: v.to_dict() for k, v in self.operators.items()}
        if self.vectors:
            d["vectors"] = copy.deepcopy(self.vectors)
        if self.sequences:
            d["sequences"] = copy.deepcopy(self.sequences)
        d["experiments"] = [e.to_dict() for e in self.experiments]
        return d

    def __eq__(self, other):
        return isinstance(other, Scenario) and self.to_dict() == other.to_dict()

    def operator_spec(self, ref: str | None) -> OperatorSpec:
        if ref in (None, "default"):
            if self.operator is None:
                raise ScenarioError("no default operator declared")
            return self.operator
        return self.operators[ref]


def _spec(d, where: str) -> OperatorSpec:
    if not isinstance(d, dict) or "kind" not in d:
        raise ScenarioError(f"{where}: operator needs a 'kind'")
    try:
        return OperatorSpec.from_dict(d)
    except (ValueError, KeyError, TypeError) as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def from_dict(d) -> Scenario:
    if not isinstance(d, dict):
        raise ScenarioError("scenario must be a mapping")
    unknown = set(d) - {"name", "seed", "description", "operator", "operators", "vectors",
                        "sequences", "experiments"}
    if unknown:
        raise ScenarioError(f"unknown top-level keys: {sorted(unknown)}")
    if "name" not in d:
        raise ScenarioError("scenario needs a name")
    op = _spec(d["operator"], "operator") if d.get("operator") is not None else None
    ops = {k: _spec(v, f"operators.{k}") for k, v in (d.get("operators") or {}).items()}
    vecs = dict(d.get("vectors") or {})
    seqs = dict(d.get("sequences") or {})
    for k, v in vecs.items():
        if not isinstance(v, dict) or v.get("rule") not in VECTOR_RULES:
            raise ScenarioError(f"vectors.{k}: rule must be one of {VECTOR_RULES}")
    for k, v in seqs.items():
        if not isinstance(v, dict) or v.get("rule") not in SEQUENCE_RULES:
            raise ScenarioError(f"sequences.{k}: rule must be one of {SEQUENCE_RULES}")
    exps = []
    names = set()
    for i, e in enumerate(d.get("experiments") or []):
        if not isinstance(e, dict) or "kind" not in e:
            raise ScenarioError(f"experiments[{i}]: needs a 'kind'")
        kind = e["kind"]
        if kind not in EXPERIMENT_KINDS:
            raise ScenarioError(f"experiments[{i}]: unknown experiment kind {kind!r}")
        name = str(e.get("name", f"{kind}_{i}"))
        if name in names:
            raise ScenarioError(f"duplicate experiment name {name!r}")
        names.add(name)
        params = dict(e.get("params") or {})
        tols = dict(e.get("tolerances") or {})
        for tk, tv in tols.items():
            try:
                val = float(tv)
            except (TypeError, ValueError):
                val = math.nan
            if isinstance(tv, bool) or not val > 0:
                raise ScenarioError(f"{name}: tolerance {tk} must be a positive number")
        spaces = {"operators": ops, "vectors": vecs, "sequences": seqs}
        for key, space in EXPERIMENT_KINDS[kind].items():
            ref = params.get(key)
            if ref is None:
                if key == "operator" and op is None:
                    raise ScenarioError(f"{name}: no operator given and no default declared")
                continue
            if key == "operator" and ref == "default":
                if op is None:
                    raise ScenarioError(f"{name}: no default operator declared")
                continue
            if ref not in spaces[space]:
                raise ScenarioError(f"{name}: unresolved reference {key}={ref!r}")
        exps.append(Experiment(kind, name, params, tols))
    return Scenario(str(d["name"]), op, ops, vecs, seqs, exps, int(d.get("seed", 0)),
                    str(d.get("description", "")))


def parse(text: str) -> Scenario:
    try:
        d = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"invalid YAML: {exc}") from exc
    return from_dict(d)


def load(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    return parse(text)


def dump(scn: Scenario) -> str:
    return yaml.safe_dump(scn.to_dict(), sort_keys=False, default_flow_style=None)


def shipped_dir() -> Path:
    return Path(__file__).resolve().parent / "scenarios"


def list_shipped() -> list:
    return sorted(p.stem for p in shipped_dir().glob("*.yaml"))


def shipped_path(name: str) -> Path:
    p = shipped_dir() / f"{name}.yaml"
    if not p.exists():
        raise ScenarioError(f"no shipped scenario {name!r}")
    return p


# materialization

def materialize_vector(rule: dict, N: int):
    """Vector of length N from a rule; exact (Fraction) unless random/float."""
    kind = rule["rule"]
    if kind == "basis":
        k = int(rule["index"])
        if not 0 <= k < N:
            raise ScenarioError(f"basis index {k} out of range for N = {N}")
        v = np.full(N, Fraction(0), dtype=object)
        v[k] = Fraction(1)
        return v
    if kind == "ones":
        return np.full(N, Fraction(1), dtype=object)
    if kind == "harmonic":
        length = int(rule.get("length", N))
        v = np.full(N, Fraction(0), dtype=object)
        for k in range(min(length, N)):
            v[k] = Fraction(1, k + 1)
        return v
    if kind == "explicit":
        vals = [parse_number(x) for x in rule["values"]]
        if len(vals) != N:
            raise ScenarioError(f"explicit vector has length {len(vals)}, operator has {N}")
        if all(isinstance(x, Fraction) for x in vals):
            return np.array(vals, dtype=object)
        return np.array([complex(x) if isinstance(x, complex) else float(x) for x in vals])
    if kind == "random":
        rng = np.random.default_rng(int(rule.get("seed", 0)))
        if rule.get("integer", False):
            lo, hi = rule.get("range", [-5, 5])
            ints = rng.integers(int(lo), int(hi) + 1, size=N)
            return np.array([Fraction(int(i)) for i in ints], dtype=object)
        return rng.standard_normal(N)
    raise ScenarioError(f"unknown vector rule {kind!r}")  # pragma: no cover


def materialize_sequence(rule: dict) -> CoefficientSequence:
    kind = rule["rule"]
    if kind == "explicit":
        return CoefficientSequence.of(rule["values"],
                                      infinite_tail=bool(rule.get("infinite_tail", False)))
    L = int(rule["length"])
    if kind == "geometric":
        q = parse_number(rule["ratio"])
        a = parse_number(rule.get("scale", 1))
        return CoefficientSequence.of([a * q ** n for n in range(L)], infinite_tail=True)
    if kind == "inverse_factorial":
        off = int(rule.get("offset", 0))
        return CoefficientSequence.of([Fraction(1, math.factorial(n + off)) for n in range(L)],
                                      infinite_tail=True)
    if kind == "moments":
        from .cyclic import moment_sequence
        return moment_sequence([parse_number(v) for v in rule["lambdas"]], L)
    if kind == "odd_harmonic":
        vals = [Fraction(0) if n % 2 == 0 else Fraction(1, n // 2 + 1) for n in range(L)]
        return CoefficientSequence.of(vals, infinite_tail=True)
    if kind == "random":
        rng = np.random.default_rng(int(rule.get("seed", 0)))
        return CoefficientSequence.of(rng.standard_normal(L).tolist())
    raise ScenarioError(f"unknown sequence rule {kind!r}")  # pragma: no cover


def build_operator(scn: Scenario, ref: str | None):
    spec = scn.operator_spec(ref)
    try:
        return build_truncation(spec)
    except (ValueError, KeyError, TypeError) as exc:
        raise ScenarioError(f"operator {ref or 'default'}: {exc}") from exc
