"""Krylov cyclicity tests, the Volterra showcase, and the rationality bridge
to non-cyclicity for the backward shift."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _exact
from .errors import HorizonError, HypothesisWarning
from .hankel import (
    RationalityVerdict,
    rank_profile,
    rationality_oracle_exact,
    symbol_coefficients,
)
from .linalg import numerical_rank
from .operators import (
    OperatorSpec,
    TruncatedOperator,
    _use_exact,
    adjoint,
    as_float_vector,
    build_truncation,
    dyadic_radius_estimates,
    from_matrix,
    krylov_vectors,
    polynomial_of,
    spectral_radius_estimate,
)
from .sequences import CoefficientSequence
from .shift_rep import build_K, dependence_detect


@dataclass(frozen=True, eq=False)
class KrylovPanel:
    """Normalized Krylov columns x, Ax/||Ax||, ... up to the first exact zero.

    ``horizon_limited`` is set when the panel stopped early because the
    truncation, not the operator, ran out (a forward shift pushing the
    vector off the retained basis, or the power horizon).  ``log_norms``
    holds log10 ||A^k x||, which stays finite where the raw norms underflow.
    """

    columns: np.ndarray
    log_norms: np.ndarray
    rank: int
    horizon_limited: bool
    exact: bool
    tol: float | None

    @property
    def raw_norms(self) -> np.ndarray:
        return 10.0 ** self.log_norms


def _log10_norm_exact(v) -> float:
    sq = sum((a * a for a in v), Fraction(0))
    return 0.5 * (math.log10(sq.numerator) - math.log10(sq.denominator))


def krylov_panel(A: TruncatedOperator, x, m: int, tol: float = 1e-10,
                 exact: bool | None = None) -> KrylovPanel:
    """Krylov panel of at most ``min(m, N)`` columns (see KrylovPanel)."""
    if not np.any(np.asarray(x, dtype=object) != 0):
        raise ValueError("x must be nonzero")
    use_exact = _use_exact(A, x, exact)
    # the panel is ranked on the truncated matrix itself; powers past the
    # trusted horizon are flagged rather than refused
    count = int(min(m, A.N))
    limited = count - 1 > A.max_power(x)
    if use_exact:
        kept = []
        v = _exact.to_fraction_array(x)
        for _ in range(count):
            if not np.any(v != 0):
                limited = limited or A.shift_like == "forward"
                break
            kept.append(v)
            v = A.matvec(v, exact=True)
        logs = np.array([_log10_norm_exact(v) for v in kept])
        cols = []
        for v, lg in zip(kept, logs):
            fv = as_float_vector(v)
            cols.append(fv / np.linalg.norm(fv) if np.linalg.norm(fv) > 0 else fv * 0)
        rank = _exact.rank(np.array([list(v) for v in kept], dtype=object))
        return KrylovPanel(np.column_stack(cols), logs, rank, limited, True, None)
    v = as_float_vector(x)
    if np.iscomplexobj(A.entries):
        v = v.astype(complex)
    nv = np.linalg.norm(v)
    cols, logs = [v / nv], [math.log10(nv)]
    for _ in range(count - 1):
        w = A.entries @ cols[-1]
        nw = np.linalg.norm(w)
        if nw == 0:
            limited = limited or A.shift_like == "forward"
            break
        cols.append(w / nw)
        logs.append(logs[-1] + math.log10(nw))
    mat = np.column_stack(cols)
    return KrylovPanel(mat, np.array(logs), numerical_rank(mat, tol), limited, False, tol)


def panel_verdict(panel: KrylovPanel, N: int) -> str:
    """Full rank is ``cyclic_at_truncation``.  A deficient float rank may be
    aliasing of fast-decaying columns, so only exact panels are called
    ``not_cyclic_at_truncation``."""
    if panel.rank == N:
        return "cyclic_at_truncation"
    return "not_cyclic_at_truncation" if panel.exact else "float_rank_deficient"


def krylov_rank(A: TruncatedOperator, x, m: int, tol: float = 1e-10,
                exact: bool | None = None) -> int:
    """Rank of the column-normalized Krylov panel (exact when possible).

    A rank equal to N means x is cyclic at this truncation.
    """
    return krylov_panel(A, x, m, tol, exact).rank


@dataclass(frozen=True, eq=False)
class CyclicityResult:
    rank: int
    verdict: str
    identity_residual: float
    hypotheses: dict = field(default_factory=dict)
    warnings: tuple = ()


def _combination(A, x, alpha: CoefficientSequence):
    """y = sum_k alpha_k A^k x; through polynomial_of when the degree fits
    the matrix horizon, else term by term on x."""
    use_exact = alpha.exact and _use_exact(A, x, None)
    if len(alpha) - 1 <= A.horizon:
        P = polynomial_of(A, alpha)
        if use_exact and P.exact is not None:
            return P.matvec(_exact.to_fraction_array(x), exact=True), "polynomial_of"
        return P.entries @ as_float_vector(x), "polynomial_of"
    vecs = krylov_vectors(A, x, len(alpha), exact=use_exact)
    if use_exact:
        y = np.full(A.N, Fraction(0), dtype=object)
        for a, v in zip(alpha.values, vecs):
            y = y + a * v
        return y, "krylov_sum"
    vals = alpha.as_array()
    return sum(a * as_float_vector(v) for a, v in zip(vals, vecs)), "krylov_sum"


def combination_cyclicity(A: TruncatedOperator, x, alpha, m: int | None = None,
                          tol: float = 1e-10, radius: float | None = None) -> CyclicityResult:
    """Krylov rank of y = sum alpha_k A^k x with desk-scale hypothesis proxies.

    Failed hypothesis proxies are collected as warnings, never raised.
    """
    alpha = alpha if isinstance(alpha, CoefficientSequence) else CoefficientSequence.of(alpha)
    N = A.N
    m = N if m is None else m
    notes = []
    hyp = {}
    if radius is None:
        try:
            est = dyadic_radius_estimates(A)
            vals = list(est.values())
            radius = vals[-1]
            hyp["radius_trend"] = vals
            hyp["radius_decreasing"] = bool(len(vals) >= 2 and vals[-1] < vals[0])
        except HorizonError:
            radius = math.nan
    hyp["radius_estimate"] = radius
    if not (radius < 1 and hyp.get("radius_decreasing", True)):
        notes.append("spectral radius proxy does not show quasinilpotent decay")
    n_dep = int(min(N - 1, A.max_power(x)))
    dep = dependence_detect(A, x, n_dep, tol) if n_dep >= 1 else None
    hyp["dependence_found"] = dep is not None
    if dep is not None:
        notes.append("Krylov vectors of x are dependent: point-spectrum proxy fails")
    shifts = []
    for j in range(4):
        vecs = krylov_vectors(A, x, j + 1, exact=_use_exact(A, x, None))
        xj = vecs[-1]
        if not np.any(xj != 0):
            shifts.append(0)
            continue
        shifts.append(krylov_rank(A, xj, N, tol))
    hyp["krylov_rank_of_powers"] = shifts
    full = [N - j if A.shift_like == "forward" else N for j in range(4)]
    hyp["krylov_rank_expected"] = full
    if any(s < f for s, f in zip(shifts, full)):
        notes.append("some A^j x is not cyclic at this truncation")
    for msg in notes:
        warnings.warn(msg, HypothesisWarning, stacklevel=2)

    y, route = _combination(A, x, alpha)
    hyp["combination_route"] = route
    K = build_K(A, x, M=len(alpha), check_summability=False)
    yf = as_float_vector(y)
    ky = K.columns @ alpha.as_array()
    denom = np.linalg.norm(alpha.as_array()) * max(K.norm, 1e-300)
    ident = float(np.linalg.norm(yf - ky) / denom)
    if not np.any(np.asarray(y, dtype=object) != 0):
        return CyclicityResult(0, "zero_combination", ident, hyp, tuple(notes))
    panel = krylov_panel(A, y, m, tol)
    hyp["combination_horizon_limited"] = panel.horizon_limited
    return CyclicityResult(panel.rank, panel_verdict(panel, N), ident, hyp, tuple(notes))


@dataclass(frozen=True, eq=False)
class DSSVerdict:
    verdict: str
    rationality: RationalityVerdict
    certificate: tuple | None = None


def dss_noncyclicity(f: CoefficientSequence, d_max: int | None = None,
                     N_max: int | None = None, tol: float = 1e-10) -> DSSVerdict:
    """``non_cyclic`` for the backward shift when the Taylor coefficients of
    f are certified rational; otherwise ``no_evidence`` (up to the order
    tested).  Needs decay_hint < 1 (holomorphic beyond the closed disk)."""
    if not f.decay_hint < 1:
        warnings.warn(f"decay hint {f.decay_hint:.3g} >= 1: the dichotomy does not apply",
                      HypothesisWarning, stacklevel=2)
    if f.exact:
        if d_max is None:
            d_max = (len(f) - 2) // 2
        rv = rationality_oracle_exact(f, d_max)
    else:
        if N_max is None:
            N_max = (len(f) + 1) // 2
        rv = rank_profile(f, N_max, tol)
    if rv.verdict == "zero":
        return DSSVerdict("non_cyclic", rv, None)
    if rv.verdict == "rational":
        return DSSVerdict("non_cyclic", rv, rv.certificate)
    return DSSVerdict("no_evidence", rv, None)


def volterra_scenario(N: int, mode: str = "exact_basis", samples: int = 3,
                      seed: int = 0, tol: float = 1e-10) -> dict:
    """Volterra cyclicity experiment as a report fragment (plain dict)."""
    if mode == "midpoint" and N > 256:
        raise ValueError("midpoint mode supports N <= 256")
    if mode == "exact_basis" and N > 24:
        raise ValueError("exact_basis mode supports N <= 24")
    if mode not in ("midpoint", "exact_basis"):
        raise ValueError(f"unknown mode {mode!r}")
    V = build_truncation(OperatorSpec("volterra", {"scheme": mode}, N))
    out = {"N": N, "mode": mode}
    if mode == "midpoint":
        out["radius_estimate"] = spectral_radius_estimate(V, 32)
        out["radius_source"] = "midpoint"
        x = np.ones(N)
        alpha = CoefficientSequence.of([1.0 / math.factorial(k) for k in range(N)])
    else:
        companion = build_truncation(OperatorSpec("volterra", {"scheme": "midpoint"}, N))
        out["radius_estimate"] = spectral_radius_estimate(companion, 32)
        out["radius_source"] = "midpoint companion"
        x = np.full(N, Fraction(0), dtype=object)
        x[0] = Fraction(1)
        alpha = CoefficientSequence.of([Fraction(1, math.factorial(k)) for k in range(N)])
    panel = krylov_panel(V, x, N, tol)
    out["krylov_rank"] = panel.rank
    out["krylov_log10_norms"] = panel.log_norms.tolist()
    out["exact"] = panel.exact
    powers = []
    vecs = krylov_vectors(V, x, 5, exact=panel.exact)
    for m in range(1, 5):
        p = krylov_panel(V, vecs[m], N, tol)
        powers.append({"m": m, "rank": p.rank, "horizon_limited": p.horizon_limited})
    out["power_ranks"] = powers
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", HypothesisWarning)
        comb = combination_cyclicity(V, x, alpha, N, tol, radius=out["radius_estimate"])
    out["combination"] = {"rank": comb.rank, "verdict": comb.verdict,
                          "identity_residual": comb.identity_residual,
                          "hypothesis_proxy": list(comb.warnings) or "passed"}
    rng = np.random.default_rng(seed)
    sampled = []
    for _ in range(samples):
        a = rng.standard_normal(N)
        if panel.exact:
            a = [Fraction(int(round(v * 1000)), 1000) or Fraction(1) for v in a]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", HypothesisWarning)
            r = combination_cyclicity(V, x, a, N, tol, radius=out["radius_estimate"])
        sampled.append({"rank": r.rank, "verdict": r.verdict})
    out["random_alpha"] = sampled
    if mode == "exact_basis":
        top = np.full(N, Fraction(0), dtype=object)
        top[N - 1] = Fraction(1)
        edge = krylov_panel(V, top, N, tol)
        out["edge_case"] = {"rank": edge.rank, "horizon_limited": edge.horizon_limited}
    return out


def moment_sequence(lambdas, L: int) -> CoefficientSequence:
    """c_{2k} = 0, c_{2k+1} = sum_i lambda_i^-k, exact when the lambdas are."""
    lam = [Fraction(v) if isinstance(v, (int, Fraction)) else float(v) for v in lambdas]
    vals = []
    for n in range(L):
        if n % 2 == 0:
            vals.append(Fraction(0) if all(isinstance(v, Fraction) for v in lam) else 0.0)
        else:
            k = n // 2
            vals.append(sum((v ** -k for v in lam), Fraction(0)
                            if all(isinstance(v, Fraction) for v in lam) else 0.0))
    return CoefficientSequence.of(vals, infinite_tail=True)


def square_lattice_operator(lambdas):
    """(T, x, y) with M = span of even basis vectors invariant under T^2,
    y orthogonal to M, and <T^(2k) x, T* y> = sum_i lambda_i^-k.

    T is block diagonal with blocks [[0, 1/lambda_i], [1, 0]].
    """
    d = len(lambdas)
    lam = [Fraction(v) for v in lambdas]
    n = 2 * d
    rows = [["0"] * n for _ in range(n)]
    x = np.full(n, Fraction(0), dtype=object)
    y = np.full(n, Fraction(0), dtype=object)
    for i, l in enumerate(lam):
        rows[2 * i][2 * i + 1] = str(1 / l)
        rows[2 * i + 1][2 * i] = "1"
        x[2 * i] = Fraction(1)
        y[2 * i + 1] = Fraction(1)
    T = build_truncation(OperatorSpec("dense", {"entries": rows}))
    return T, x, y


def assemble_square_lattice(even, odd) -> CoefficientSequence:
    """Interleave c_{2k} = even[k] and c_{2k+1} = odd[k]."""
    vals = []
    for e, o in zip(even, odd):
        vals.extend([e, o])
    return CoefficientSequence.of(vals, infinite_tail=True)


def square_lattice_probe(T: TruncatedOperator, x, y, L: int, d_max: int | None = None,
                         N_max: int | None = None, tol: float = 1e-10) -> RationalityVerdict:
    """Assemble sum <T^k x, y> z^k from <T^(2k) x, y> and <T^(2k) x, T* y>
    and run the rationality oracle (exact when the inputs allow)."""
    K = (L + 1) // 2
    Ts = adjoint(T)
    T2 = from_matrix(T.entries @ T.entries, exact=None if T.exact is None else T.exact @ T.exact)
    ty = krylov_vectors(Ts, y, 2, exact=_use_exact(Ts, y, None))[1]
    even = symbol_coefficients(T2, x, y, K)
    odd = symbol_coefficients(T2, x, ty, K)
    c = assemble_square_lattice(even.values, odd.values)
    c = CoefficientSequence(c.values[:L], c.arithmetic, None, True)
    float_v = rank_profile(c.to_float() if c.exact else c,
                           N_max or min(12, (L + 1) // 2), tol)
    even_max = float(max(abs(complex(v)) for v in even.values))
    if c.exact:
        rv = rationality_oracle_exact(c, d_max if d_max is not None else (L - 2) // 2)
        ev = dict(rv.evidence)
        ev.update({"float_ranks": float_v.evidence.get("ranks"),
                   "float_stabilized_rank": float_v.stabilized_rank,
                   "even_coefficient_max": even_max})
        return RationalityVerdict(rv.verdict, rv.stabilized_rank, rv.certificate,
                                  rv.orders_tested, rv.recurrence, rv.arithmetic, rv.tol, ev)
    ev = dict(float_v.evidence)
    ev["even_coefficient_max"] = even_max
    return RationalityVerdict(float_v.verdict, float_v.stabilized_rank, float_v.certificate,
                              float_v.orders_tested, float_v.recurrence, float_v.arithmetic,
                              float_v.tol, ev)
