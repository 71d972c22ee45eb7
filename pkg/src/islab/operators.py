"""Concrete truncated operators: construction, powers, norms of powers.

Every operator family is realized as an N x N matrix on span{e_0..e_{N-1}}.
Shift-like families carry a finite *horizon*: the largest power for which
the truncation is trusted, because the truncated shift is nilpotent while
the true shift is not.  Families whose truncation is exact carry
``math.inf``.

When all parameters are rational, an exact realization (object array of
``Fraction``) is carried alongside the float matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np

from ._exact import as_fraction, is_exact_vector, to_fraction_array
from .errors import HorizonError, PreconditionError

KINDS = (
    "weighted_shift",
    "adjoint_shift",
    "jordan_block",
    "diagonal",
    "volterra",
    "dense",
    "polynomial_of",
)

_SHIFT_KINDS = ("weighted_shift", "adjoint_shift")


def parse_number(v):
    """Scenario-level scalar: ints and ``"p/q"`` strings become Fractions.

    Floats stay floats, strings containing ``j`` become complex, and a
    two-element list ``[re, im]`` is read as a complex number.
    """
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(v, (Fraction, int, np.integer)):
        return Fraction(int(v)) if not isinstance(v, Fraction) else v
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            raise ValueError(f"non-finite parameter {v!r}")
        return float(v)
    if isinstance(v, (complex, np.complexfloating)):
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"non-finite parameter {v!r}")
        return complex(v)
    if isinstance(v, str):
        s = v.strip()
        if "j" in s:
            return parse_number(complex(s))
        if "/" in s:
            return Fraction(s)
        try:
            return Fraction(int(s))
        except ValueError:
            return parse_number(float(s))
    if isinstance(v, (list, tuple)) and len(v) == 2:
        re, im = (complex(parse_number(u)).real for u in v)
        return complex(re, im) if im != 0 else parse_number(v[0])
    raise TypeError(f"cannot read {v!r} as a number")


def _all_rational(values) -> bool:
    return all(isinstance(v, Fraction) for v in values)


@dataclass(frozen=True)
class WeightSequence:
    """Positive weights beta_n with beta_0 = 1; the shift weights are
    w_n = beta_{n+1} / beta_n."""

    beta: tuple

    def __post_init__(self):
        if not self.beta:
            raise ValueError("beta must be non-empty")
        if self.beta[0] != 1:
            raise ValueError("beta_0 must equal 1")
        for b in self.beta:
            if not (b > 0) or not math.isfinite(float(b)):
                raise ValueError("beta entries must be positive and finite")

    @classmethod
    def unit(cls, length: int) -> "WeightSequence":
        return cls(tuple(Fraction(1) for _ in range(length)))

    @classmethod
    def from_weights(cls, weights: Sequence) -> "WeightSequence":
        beta = [Fraction(1)]
        for w in weights:
            beta.append(beta[-1] * w)
        return cls(tuple(beta))

    @property
    def weights(self) -> tuple:
        return tuple(self.beta[n + 1] / self.beta[n] for n in range(len(self.beta) - 1))

    @property
    def is_unit(self) -> bool:
        return all(b == 1 for b in self.beta)

    def __len__(self):
        return len(self.beta)

    def as_float(self) -> np.ndarray:
        return np.array([float(b) for b in self.beta])


@dataclass(frozen=True)
class OperatorSpec:
    """Symbolic description of one operator family plus its truncation order.

    ``params`` by kind:

    - weighted_shift / adjoint_shift: ``weights`` is ``"inverse_index"``
      (w_n = 1/(n+1)), ``"unit"``, ``{"constant": w}`` or an explicit list;
      optional ``horizon``.
    - jordan_block: ``size``, ``eigenvalue`` (upper bidiagonal).
    - diagonal: ``entries``.
    - volterra: ``scheme`` is ``"midpoint"`` or ``"exact_basis"``.
    - dense: ``entries`` as a nested list.
    - polynomial_of: ``base`` (an OperatorSpec or mapping) and ``coeffs``.

    ``truncation_order`` may be omitted when the kind fixes the size.
    """

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    truncation_order: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unsupported operator kind {self.kind!r}")
        n = self.order
        if n < 2:
            raise ValueError("truncation_order must be >= 2")

    @property
    def order(self) -> int:
        p = self.params
        if self.kind == "jordan_block":
            return int(p["size"])
        if self.kind == "diagonal":
            return len(p["entries"])
        if self.kind == "dense":
            return len(p["entries"])
        if self.kind == "polynomial_of":
            return _as_spec(p["base"]).order
        if self.truncation_order is None:
            raise ValueError(f"{self.kind} requires truncation_order")
        return int(self.truncation_order)

    def to_dict(self) -> dict:
        params = dict(self.params)
        if self.kind == "polynomial_of":
            params["base"] = _as_spec(params["base"]).to_dict()
        d = {"kind": self.kind, "params": params}
        if self.truncation_order is not None:
            d["truncation_order"] = self.truncation_order
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "OperatorSpec":
        params = dict(d.get("params", {}))
        if d["kind"] == "polynomial_of":
            params["base"] = _as_spec(params["base"])
        return cls(d["kind"], params, d.get("truncation_order"))


def _as_spec(s) -> OperatorSpec:
    return s if isinstance(s, OperatorSpec) else OperatorSpec.from_dict(s)


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """Matrix realization of an operator with its validity horizon.

    ``shift_like`` is ``"forward"`` for weighted shifts (and the exact-basis
    Volterra map), ``"backward"`` for adjoint shifts, otherwise None.  For a
    forward shift the image of a vector stays faithful until it reaches the
    last retained index; a backward shift maps the retained span into
    itself, so vector powers are exact for every n.
    """

    entries: np.ndarray
    horizon: float
    spec: OperatorSpec | None = None
    exact: np.ndarray | None = None
    shift_like: str | None = None
    tail_bound: float = 0.0

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def _exact_rows(self):
        if self.exact is None:
            return None
        return [[(j, v) for j, v in enumerate(row) if v != 0] for row in self.exact]

    @cached_property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))

    def max_power(self, x=None) -> float:
        """Largest n for which A^n (applied to ``x`` if given) is trusted."""
        if x is None or self.shift_like is None:
            return self.horizon
        if self.shift_like == "backward":
            return math.inf
        support = np.nonzero(np.asarray(x, dtype=object) != 0)[0]
        if support.size == 0:
            return math.inf
        return max(self.horizon, self.N - 1 - int(support[-1]))

    def matvec(self, x, exact: bool = False):
        if exact:
            return np.array([sum((v * x[j] for j, v in row), Fraction(0))
                             for row in self._exact_rows], dtype=object)
        return self.entries @ x


def _shift_weights(p, N):
    w = p.get("weights", "unit")
    if w == "inverse_index":
        return [Fraction(1, n + 1) for n in range(N - 1)]
    if w == "unit":
        return [Fraction(1)] * (N - 1)
    if isinstance(w, Mapping) and "constant" in w:
        return [parse_number(w["constant"])] * (N - 1)
    vals = [parse_number(v) for v in w]
    if len(vals) < N - 1:
        raise ValueError(f"need {N - 1} weights, got {len(vals)}")
    return vals[: N - 1]


def build_truncation(spec: OperatorSpec) -> TruncatedOperator:
    """Realize ``spec`` as an N x N matrix with its horizon."""
    N = spec.order
    p = spec.params
    kind = spec.kind
    shift_like = None
    if kind in _SHIFT_KINDS:
        w = _shift_weights(p, N)
        if any(abs(complex(v)) == 0 for v in w):
            raise ValueError("shift weights must be nonzero")
        vals = w
        horizon = int(p.get("horizon", N // 2))
        if not 1 <= horizon <= N:
            raise ValueError("horizon must lie in [1, N]")
        if kind == "weighted_shift":
            pos = [(n + 1, n) for n in range(N - 1)]
            shift_like = "forward"
        else:
            pos = [(n, n + 1) for n in range(N - 1)]
            vals = [v.conjugate() if isinstance(v, complex) else v for v in w]
            shift_like = "backward"
        cells = {ij: v for ij, v in zip(pos, vals)}
    elif kind == "jordan_block":
        lam = parse_number(p.get("eigenvalue", 0))
        cells = {(i, i): lam for i in range(N)}
        cells.update({(i, i + 1): Fraction(1) for i in range(N - 1)})
        horizon = math.inf
    elif kind == "diagonal":
        cells = {(i, i): parse_number(v) for i, v in enumerate(p["entries"])}
        horizon = math.inf
    elif kind == "dense":
        rows = p["entries"]
        if any(len(r) != N for r in rows):
            raise ValueError("dense entries must be square")
        cells = {(i, j): parse_number(v) for i, r in enumerate(rows) for j, v in enumerate(r)}
        horizon = math.inf
    elif kind == "volterra":
        scheme = p.get("scheme", "midpoint")
        if scheme == "midpoint":
            h = Fraction(1, N)
            cells = {(i, j): h for i in range(N) for j in range(i)}
            cells.update({(i, i): h / 2 for i in range(N)})
            horizon = math.inf
        elif scheme == "exact_basis":
            # t^k/k! -> t^(k+1)/(k+1)!: the unweighted forward shift
            cells = {(n + 1, n): Fraction(1) for n in range(N - 1)}
            horizon = int(p.get("horizon", N // 2))
            shift_like = "forward"
        else:
            raise ValueError(f"unknown volterra scheme {scheme!r}")
    elif kind == "polynomial_of":
        base = build_truncation(_as_spec(p["base"]))
        op = polynomial_of(base, [parse_number(c) for c in p["coeffs"]])
        return TruncatedOperator(op.entries, op.horizon, spec, op.exact, op.shift_like,
                                 op.tail_bound)
    else:  # pragma: no cover
        raise ValueError(f"unsupported operator kind {kind!r}")
    return _from_cells(N, cells, horizon, spec, shift_like)


def _from_cells(N, cells, horizon, spec, shift_like):
    values = list(cells.values())
    complex_vals = any(isinstance(v, complex) for v in values)
    dense = np.zeros((N, N), dtype=complex if complex_vals else float)
    for (i, j), v in cells.items():
        dense[i, j] = complex(v) if complex_vals else float(v)
    if not np.all(np.isfinite(dense)):
        raise ValueError("non-finite operator entries")
    exact = None
    if _all_rational(values):
        exact = np.full((N, N), Fraction(0), dtype=object)
        for (i, j), v in cells.items():
            exact[i, j] = v
    return TruncatedOperator(dense, horizon, spec, exact, shift_like)


def from_matrix(a, horizon=math.inf, exact=None) -> TruncatedOperator:
    """Wrap an explicit matrix (no spec) as an exact-horizon operator."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("operator matrix must be square")
    if exact is not None:
        exact = to_fraction_array(exact)
    dtype = complex if np.iscomplexobj(a) else float
    return TruncatedOperator(np.array(a, dtype=dtype), horizon, None, exact)


def _check_power(op: TruncatedOperator, n: int, x=None):
    if n < 0:
        raise ValueError("power must be non-negative")
    limit = op.max_power(x)
    if n > limit:
        raise HorizonError(f"power {n} exceeds truncation horizon {limit}")


def _use_exact(op, x, exact):
    if exact is None:
        return op.exact is not None and is_exact_vector(x)
    if exact and op.exact is None:
        raise ValueError("operator has no exact realization")
    return bool(exact)


def apply_power(op: TruncatedOperator, n: int, x, exact: bool | None = None):
    """Return A^n x.  Exact arithmetic is used when both the operator and
    ``x`` are exactly representable (or when ``exact=True``)."""
    if len(x) != op.N:
        raise ValueError(f"vector length {len(x)} != operator size {op.N}")
    _check_power(op, n, x)
    if _use_exact(op, x, exact):
        y = to_fraction_array(x)
        for _ in range(n):
            y = op.matvec(y, exact=True)
        return y
    y = np.asarray(x, dtype=complex if np.iscomplexobj(op.entries) or np.iscomplexobj(x)
                   else float)
    for _ in range(n):
        y = op.entries @ y
    return y


def krylov_vectors(op: TruncatedOperator, x, count: int, exact: bool | None = None):
    """The list [x, Ax, ..., A^(count-1) x] (checked against the horizon)."""
    _check_power(op, count - 1, x)
    use_exact = _use_exact(op, x, exact)
    y = to_fraction_array(x) if use_exact else np.asarray(
        x, dtype=complex if np.iscomplexobj(op.entries) or np.iscomplexobj(x) else float)
    out = [y]
    for _ in range(count - 1):
        y = op.matvec(y, exact=True) if use_exact else op.entries @ y
        out.append(y)
    return out


def matrix_power(op: TruncatedOperator, n: int, exact: bool = False):
    _check_power(op, n)
    if exact:
        if op.exact is None:
            raise ValueError("operator has no exact realization")
        p = np.array([[Fraction(int(i == j)) for j in range(op.N)] for i in range(op.N)],
                     dtype=object)
        for _ in range(n):
            p = p @ op.exact
        return p
    return np.linalg.matrix_power(op.entries, n)


def power_norms(op: TruncatedOperator, n_max: int) -> np.ndarray:
    """||A^n|| (largest singular value) for n = 1..n_max."""
    _check_power(op, n_max)
    out = np.empty(n_max)
    p = np.eye(op.N, dtype=op.entries.dtype)
    for n in range(1, n_max + 1):
        p = p @ op.entries
        out[n - 1] = np.linalg.norm(p, 2)
    return out


def spectral_radius_estimate(op: TruncatedOperator, n_max: int = 32) -> float:
    """Gelfand estimate ||A^n_max||^(1/n_max)."""
    if n_max < 8:
        raise ValueError("n_max must be >= 8")
    norms = power_norms(op, n_max)
    return float(norms[-1] ** (1.0 / n_max))


def dyadic_radius_estimates(op: TruncatedOperator, j_max: int | None = None) -> dict:
    """{2^j: ||A^(2^j)||^(1/2^j)} for every dyadic power within the horizon."""
    limit = op.horizon if j_max is None else 2 ** j_max
    if not math.isfinite(limit):
        limit = 2 ** 6
    n_max = int(2 ** int(math.floor(math.log2(limit))))
    norms = power_norms(op, n_max)
    out = {}
    n = 1
    while n <= n_max:
        out[n] = float(norms[n - 1] ** (1.0 / n))
        n *= 2
    return out


def polynomial_of(op: TruncatedOperator, coeffs, tol: float = 1e-12) -> TruncatedOperator:
    """The matrix sum_k coeffs[k] A^k.

    ``coeffs`` is a CoefficientSequence or a plain sequence.  When it is the
    prefix of an infinite series (``infinite_tail``), the spectral radius
    estimate must be < 1; a geometric tail bound is recorded and must not
    exceed ``tol``.
    """
    from .sequences import CoefficientSequence

    seq = coeffs if isinstance(coeffs, CoefficientSequence) else CoefficientSequence.of(coeffs)
    deg = len(seq) - 1
    while deg > 0 and seq.values[deg] == 0:
        deg -= 1
    if deg > op.horizon:
        raise HorizonError(f"degree {deg} exceeds truncation horizon {op.horizon}")
    tail = 0.0
    if seq.infinite_tail:
        n_est = int(min(32, op.horizon if math.isfinite(op.horizon) else 32))
        if n_est < 8:
            raise PreconditionError("horizon too small to check convergence of the tail")
        q = spectral_radius_estimate(op, n_est)
        if q >= 1:
            raise PreconditionError(
                f"spectral radius estimate {q:.4g} >= 1: series may diverge")
        amax = max(abs(complex(v)) for v in seq.values)
        L = len(seq)
        tail = amax * q ** L / (1 - q)
        if tail > tol:
            raise PreconditionError(f"tail bound {tail:.3g} exceeds tolerance {tol:.3g}")
    vals = seq.values
    exact = None
    if seq.exact and op.exact is not None:
        exact = np.full((op.N, op.N), Fraction(0), dtype=object)
        for k in range(deg, -1, -1):
            exact = exact @ op.exact
            for i in range(op.N):
                exact[i, i] += vals[k]
    cplx = np.iscomplexobj(op.entries) or any(isinstance(v, complex) for v in vals)
    m = np.zeros((op.N, op.N), dtype=complex if cplx else float)
    eye = np.eye(op.N)
    for k in range(deg, -1, -1):
        m = m @ op.entries + (complex(vals[k]) if cplx else float(vals[k])) * eye
    if deg == 0:
        horizon = math.inf
    elif math.isfinite(op.horizon):
        horizon = int(op.horizon // deg)
    else:
        horizon = math.inf
    return TruncatedOperator(m, horizon, None, exact, None, tail)


def contract(op: TruncatedOperator) -> TruncatedOperator:
    """A / (||A|| + 1): same invariant subspaces, spectral radius < 1."""
    s = 1.0 / (op.norm + 1.0)
    spec = None
    if op.spec is not None:
        spec = OperatorSpec("polynomial_of", {"base": op.spec, "coeffs": [0, s]})
    return TruncatedOperator(op.entries * s, op.horizon, spec, None, op.shift_like)


def adjoint(op: TruncatedOperator) -> TruncatedOperator:
    exact = None if op.exact is None else op.exact.T.copy()
    like = {"forward": "backward", "backward": "forward"}.get(op.shift_like)
    return TruncatedOperator(op.entries.conj().T.copy(), op.horizon, None, exact, like)


def basis_vector(N: int, k: int, exact: bool = True):
    if exact:
        v = np.full(N, Fraction(0), dtype=object)
        v[k] = Fraction(1)
        return v
    v = np.zeros(N)
    v[k] = 1.0
    return v


def as_float_vector(x) -> np.ndarray:
    arr = np.asarray(x, dtype=object).reshape(-1)
    if any(isinstance(v, (complex, np.complexfloating)) for v in arr):
        return np.array([complex(v) for v in arr])
    return np.array([float(v) for v in arr])


__all__ = [
    "KINDS", "OperatorSpec", "TruncatedOperator", "WeightSequence", "adjoint",
    "apply_power", "as_float_vector", "as_fraction", "basis_vector", "build_truncation",
    "contract", "dyadic_radius_estimates", "from_matrix", "krylov_vectors", "matrix_power",
    "parse_number", "polynomial_of", "power_norms", "spectral_radius_estimate",
]
