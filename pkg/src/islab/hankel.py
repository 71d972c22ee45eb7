"""Hankel matrices of symbol coefficients c_n = <A^n f, g> and the
rationality / injectivity decisions built on them.

Two routes decide whether nu = sum c_n z^n is rational:

* ``rank_profile`` - float SVD ranks of H_2..H_Nmax after anti-diagonal
  scaling, declaring "rational" when the rank is deficient and constant over
  the last four orders;
* ``rationality_oracle_exact`` - exact search for the shortest linear
  recurrence sum_j b_j c_{l+j} = 0 over the rationals.

A recurrence of order r is returned monic (b_r = 1).  Its reversal
q(z) = sum_i b_{r-i} z^i is the denominator of nu, and r is the rank of the
infinite Hankel matrix.  For a polynomial nu, q has trailing zeros and its
true degree is lower than r.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _exact
from .errors import HypothesisWarning, PreconditionError
from .linalg import householder_to_e0
from .operators import (
    TruncatedOperator,
    _use_exact,
    as_float_vector,
    contract as contract_op,
    from_matrix,
    krylov_vectors,
    spectral_radius_estimate,
)
from .sequences import CoefficientSequence, estimate_decay
from .shift_rep import SubspaceWitness, build_K, compose_with_inner

VERDICTS = ("rational", "non_rational_up_to_order", "zero")
STABILIZATION_WINDOW = 4


@dataclass(frozen=True, eq=False)
class HankelMatrix:
    entries: np.ndarray
    source: CoefficientSequence

    @property
    def order(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class RationalityVerdict:
    """Outcome of a rationality test on a coefficient prefix.

    ``certificate`` is (numerator, denominator) as ascending coefficient
    tuples of nu = p / q.  ``recurrence`` is the monic b with
    sum_j b_j c_{l+j} = 0; its order equals ``stabilized_rank``.
    """

    verdict: str
    stabilized_rank: int | None = None
    certificate: tuple | None = None
    orders_tested: int = 0
    recurrence: tuple | None = None
    arithmetic: str = "float"
    tol: float | None = None
    evidence: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == "rational":
            if self.certificate is None or self.recurrence is None:
                raise ValueError("a rational verdict needs a certificate")
            if len(self.recurrence) - 1 != self.stabilized_rank:
                raise ValueError("recurrence order must equal the stabilized rank")
            if len(self.certificate[1]) - 1 > self.stabilized_rank:
                raise ValueError("denominator degree exceeds the stabilized rank")

    @property
    def denominator(self):
        return None if self.certificate is None else self.certificate[1]

    @property
    def numerator(self):
        return None if self.certificate is None else self.certificate[0]


def symbol_coefficients(A: TruncatedOperator, f, g, L: int, start: int = 0,
                        exact: bool | None = None) -> CoefficientSequence:
    """c_n = <A^(n+start) f, g> for n < L (inner product linear in the
    first slot)."""
    if len(f) != A.N or len(g) != A.N:
        raise ValueError("vector length does not match operator size")
    use_exact = _use_exact(A, f, exact) and _exact.is_exact_vector(g)
    vecs = krylov_vectors(A, f, start + L, exact=use_exact)[start:]
    if use_exact:
        gx = _exact.to_fraction_array(g)
        vals = tuple(sum((a * b for a, b in zip(v, gx)), Fraction(0)) for v in vecs)
        return CoefficientSequence(vals, "exact_rational", estimate_decay(vals))
    gv = as_float_vector(g)
    vals = [np.vdot(gv, as_float_vector(v)) for v in vecs]
    if all(np.imag(v) == 0 for v in vals):
        vals = [float(np.real(v)) for v in vals]
    else:
        vals = [complex(v) for v in vals]
    return CoefficientSequence(tuple(vals), "float", estimate_decay(vals))


def _hankel_entries(values, order: int, exact: bool):
    idx = np.add.outer(np.arange(order), np.arange(order))
    arr = np.array(values, dtype=object if exact else None)
    return arr[idx]


def hankel_matrix(c: CoefficientSequence, N_H: int) -> HankelMatrix:
    """H[i, j] = c_{i+j}, i, j < N_H."""
    if 2 * N_H - 1 > len(c):
        raise ValueError(f"order {N_H} needs {2 * N_H - 1} coefficients, have {len(c)}")
    vals = c.values if c.exact else c.as_array()
    return HankelMatrix(_hankel_entries(vals, N_H, c.exact), c)


def _abs_sq_exact(v) -> Fraction:
    if isinstance(v, Fraction):
        return v * v
    z = complex(v)
    return Fraction(z.real) ** 2 + Fraction(z.imag) ** 2


def hs_norm_check(c: CoefficientSequence, N_H: int):
    """(||H_N||_F^2, sum_n m(n) |c_n|^2) with m(n) = min(n+1, 2N-1-n, N).

    Both sums are accumulated in exact rational arithmetic so they agree
    exactly; they are returned as floats.
    """
    H = hankel_matrix(c, N_H)
    frob = sum((_abs_sq_exact(v) for v in H.entries.reshape(-1)), Fraction(0))
    weighted = Fraction(0)
    for n in range(2 * N_H - 1):
        m = min(n + 1, 2 * N_H - 1 - n, N_H)
        weighted += m * _abs_sq_exact(c.values[n])
    return float(frob), float(weighted)


def _scale_factor(vals, N: int) -> float:
    """s with |c_{2N-2}| / |c_0| = s^(2N-2), or 1 if either end is zero."""
    a0, a1 = abs(vals[0]), abs(vals[2 * N - 2])
    if a0 == 0 or a1 == 0:
        return 1.0
    return float((a1 / a0) ** (1.0 / (2 * N - 2)))


def _scaled_hankel(vals: np.ndarray, N: int):
    s = _scale_factor(vals, N)
    idx = np.add.outer(np.arange(N), np.arange(N))
    return vals[idx] / s ** idx, s


def _certificate_from_recurrence(b, vals):
    """(numerator, denominator) of nu from a monic order-r recurrence."""
    r = len(b) - 1
    q = list(b[::-1])
    while len(q) > 1 and q[-1] == 0:
        q.pop()
    p = []
    for n in range(r):
        p.append(sum((q[i] * vals[n - i] for i in range(min(n, len(q) - 1) + 1)),
                     type(q[0])(0) if isinstance(q[0], Fraction) else 0.0))
    while p and p[-1] == 0:
        p.pop()
    return tuple(p) if p else (type(q[0])(0),), tuple(q)


def _float_recurrence(vals: np.ndarray, r: int, s: float, upto: int):
    """Least-squares monic recurrence of order r on the scaled prefix."""
    n = np.arange(upto)
    ct = vals[:upto] / s ** n
    rows = upto - r
    M = np.array([[ct[l + j] for j in range(r)] for l in range(rows)])
    rhs = -ct[r:r + rows]
    bt, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    bt = np.append(bt, 1.0)
    b = bt * s ** (r - np.arange(r + 1))
    b = b / b[-1]
    if np.iscomplexobj(b) and np.all(np.abs(b.imag) <= 1e-15 * np.max(np.abs(b))):
        b = b.real
    clean = np.where(np.abs(b) <= 1e-13 * np.max(np.abs(b)), 0.0, b)
    return tuple(clean.tolist())


def rank_profile(c: CoefficientSequence, N_max: int, tol: float = 1e-10,
                 window: int = STABILIZATION_WINDOW) -> RationalityVerdict:
    """Numerical ranks of the scaled H_N for N = 2..N_max.

    Rational when the last ``window`` ranks agree and are deficient
    (rank < N).  A float certificate is then fitted by least squares.
    """
    if 2 * N_max - 1 > len(c):
        raise ValueError(f"N_max = {N_max} needs {2 * N_max - 1} coefficients")
    vals = c.as_array()
    if np.all(vals[: 2 * N_max - 1] == 0):
        return RationalityVerdict("zero", 0, None, N_max, None, "float", tol,
                                  {"ranks": {}})
    ranks, ratios, scales = {}, {}, {}
    for N in range(2, N_max + 1):
        H, s = _scaled_hankel(vals, N)
        sig = np.linalg.svd(H, compute_uv=False)
        r = int(np.sum(sig > tol * sig[0])) if sig[0] > 0 else 0
        ranks[N] = r
        ratios[N] = (sig / sig[0]).tolist() if sig[0] > 0 else sig.tolist()
        scales[N] = s
    evidence = {"ranks": ranks, "sigma_ratios": ratios, "scales": scales}
    tail = [ranks[N] for N in range(max(2, N_max - window + 1), N_max + 1)]
    stable = (len(tail) == window and len(set(tail)) == 1
              and all(ranks[N] < N for N in range(N_max - window + 1, N_max + 1)))
    if not stable:
        return RationalityVerdict("non_rational_up_to_order", None, None, N_max, None,
                                  "float", tol, evidence)
    r = tail[-1]
    s = scales[N_max]
    b = _float_recurrence(vals, r, s, 2 * N_max - 1)
    cert = _certificate_from_recurrence(b, vals)
    return RationalityVerdict("rational", r, cert, N_max, b, "float", tol, evidence)


def rationality_oracle_exact(c: CoefficientSequence, d_max: int) -> RationalityVerdict:
    """Shortest exact recurrence of order <= d_max holding on the whole
    prefix.  On failure the leading Hankel determinants det H_1..H_{d_max+1}
    are returned as evidence."""
    if not c.exact:
        raise ValueError("exact oracle needs an exact_rational sequence")
    L = len(c)
    if L < 2 * d_max + 2:
        raise ValueError(f"d_max = {d_max} needs a prefix of at least {2 * d_max + 2}")
    vals = c.values
    if all(v == 0 for v in vals):
        return RationalityVerdict("zero", 0, None, d_max, None, "exact_rational", None, {})
    for q in range(1, d_max + 1):
        rows = L - q
        mat = [[vals[l + j] for j in range(q)] for l in range(rows)]
        rhs = [-vals[l + q] for l in range(rows)]
        x = _exact.solve(mat, rhs)
        if x is not None:
            b = tuple(x) + (Fraction(1),)
            cert = _certificate_from_recurrence(b, vals)
            return RationalityVerdict("rational", q, cert, d_max, b, "exact_rational", None,
                                      {"equations": rows})
    dets = [_exact.det(_hankel_entries(vals, n, True)) for n in range(1, d_max + 2)]
    return RationalityVerdict(
        "non_rational_up_to_order", None, None, d_max, None, "exact_rational", None,
        {"hankel_determinants": dets, "all_nonzero": all(d != 0 for d in dets)})


def recurrence_residuals(b, c: CoefficientSequence) -> np.ndarray:
    """Relative residuals |sum_j b_j c_{l+j}| / sum_j |b_j c_{l+j}| for every
    l with l + deg b < len(c) (zero where the denominator vanishes)."""
    r = len(b) - 1
    out = []
    for l in range(len(c) - r):
        terms = [b[j] * c.values[l + j] for j in range(r + 1)]
        if c.exact and all(isinstance(t, Fraction) for t in terms):
            tot = sum(terms, Fraction(0))
            den = sum((abs(t) for t in terms), Fraction(0))
            out.append(0.0 if tot == 0 else float(abs(tot) / den))
        else:
            tot = abs(sum(complex(t) for t in terms))
            den = sum(abs(complex(t)) for t in terms)
            out.append(0.0 if den == 0 else tot / den)
    return np.array(out)


def kernel_generator(H: HankelMatrix, tol: float = 1e-10, verify_tol: float = 1e-10):
    """Minimal-degree monic b in the numerical kernel of H, verified as a
    recurrence on the whole source sequence; None if H is numerically
    injective."""
    c = H.source
    N = H.order
    if c.exact:
        for q in range(1, N):
            basis = _exact.nullspace(H.entries[:, : q + 1])
            cand = [v for v in basis if v[q] != 0]
            if not cand:
                continue
            b = tuple(v / cand[0][q] for v in cand[0])
            if np.all(recurrence_residuals(b, c) == 0):
                return CoefficientSequence(b, "exact_rational", None)
        return None
    vals = c.as_array()
    Hs, s = _scaled_hankel(vals, N)
    smax = np.linalg.svd(Hs, compute_uv=False)[0]
    if smax == 0:
        return None
    for q in range(1, N):
        sig = np.linalg.svd(Hs[:, : q + 1], compute_uv=False)
        if sig[-1] > tol * smax:
            continue
        b = _float_recurrence(vals, q, s, len(vals))
        if np.all(recurrence_residuals(b, c) <= verify_tol):
            return CoefficientSequence.of(b)
    return None


@dataclass(frozen=True, eq=False)
class InjectivityResult:
    """Pipeline outcome: ``verdict`` is ``case1_orthogonal``,
    ``case2_kernel`` or ``no_evidence``."""

    verdict: str
    coefficients: CoefficientSequence
    rationality: RationalityVerdict | None = None
    witness: SubspaceWitness | None = None
    evidence: dict = field(default_factory=dict)


def _radius_check(A: TruncatedOperator) -> float:
    n = 32 if not math.isfinite(A.horizon) else int(min(32, A.horizon))
    if n < 8:
        raise PreconditionError("horizon too small for a spectral radius estimate")
    return spectral_radius_estimate(A, n)


def orthogonality_residuals(A: TruncatedOperator, f, w, L: int) -> np.ndarray:
    """|<A^n f, w>| / ||A^n f|| for n < L (0 where A^n f = 0)."""
    wv = as_float_vector(w)
    out = []
    for v in krylov_vectors(A, f, L, exact=False):
        v = as_float_vector(v)
        nv = np.linalg.norm(v)
        out.append(0.0 if nv == 0 else float(abs(np.vdot(wv, v)) / nv))
    return np.array(out)


def injectivity_decision(A: TruncatedOperator, f, g, L: int | None = None,
                         N_max: int | None = None, d_max: int | None = None,
                         tol: float = 1e-10, witness_tol: float = 1e-8,
                         contract: bool = False) -> InjectivityResult:
    """Decide whether H_psi, psi = sum <A^n f, g> z^-n, has a kernel, and
    turn a kernel into an invariant-subspace witness.

    Case 1 (psi = 0) gives an orthogonality witness g _|_ span{A^n f}.
    Otherwise a rational certificate supplies b with H_psi b = 0; after the
    unitary reduction g -> e_0, K_f T_b has zero first row and yields a
    range_defect witness (or, when b(A) f = 0, a kernel_vector witness).
    """
    if contract:
        A = contract_op(A)
    rho = _radius_check(A)
    if rho >= 1:
        raise PreconditionError(
            f"spectral radius estimate {rho:.4g} >= 1; rescale with contract=True")
    limit = A.max_power(f)
    if L is None:
        L = int(min(64, limit + 1))
    c = symbol_coefficients(A, f, g, L)
    gv = as_float_vector(g)
    ghat = gv / np.linalg.norm(gv)
    evidence = {"spectral_radius_estimate": rho, "L": L}

    orth = orthogonality_residuals(A, f, ghat, L)
    if c.is_zero() or float(np.max(orth)) <= witness_tol:
        w = SubspaceWitness(
            "orthogonality", (ghat,), tuple(orth.tolist()), witness_tol,
            "g is orthogonal to span{A^n f}, a nontrivial invariant subspace (Case 1)",
            {"L": L})
        return InjectivityResult("case1_orthogonal", c, None, w, evidence)

    if N_max is None:
        N_max = int(min(12, (L + 1) // 2))
    float_verdict = rank_profile(c.to_float() if c.exact else c, N_max, tol)
    evidence["float_ranks"] = float_verdict.evidence.get("ranks")
    verdict = float_verdict
    if c.exact:
        if d_max is None:
            d_max = int(min(12, (L - 2) // 2))
        verdict = rationality_oracle_exact(c, d_max)
        if float_verdict.verdict == "rational" and verdict.verdict == "rational":
            evidence["oracle_agreement"] = (float_verdict.stabilized_rank
                                            == verdict.stabilized_rank)
    if verdict.verdict != "rational":
        return InjectivityResult("no_evidence", c, verdict, None, evidence)

    b = verdict.recurrence
    r = len(b) - 1
    bf = np.array([complex(v) for v in b])
    if np.all(bf.imag == 0):
        bf = bf.real
    # unitary reduction g -> e_0
    U = householder_to_e0(gv)
    Ar = from_matrix(U.conj().T @ A.entries @ U, horizon=limit)
    fr = U.conj().T @ as_float_vector(f)
    K = build_K(Ar, fr, M=L - r)
    alpha = np.conj(build_K(Ar, fr, M=L, check_summability=False).columns[0])
    tb_alpha = np.array([sum(np.conj(bf[j]) * alpha[l + j] for j in range(r + 1))
                         for l in range(L - r)])
    scale = np.array([sum(abs(bf[j]) * abs(alpha[l + j]) for j in range(r + 1))
                      for l in range(L - r)])
    evidence["toeplitz_alpha_residual"] = float(
        np.max(np.where(scale > 0, np.abs(tb_alpha) / np.where(scale > 0, scale, 1), 0)))
    KG = compose_with_inner(K, CoefficientSequence.of(bf.tolist()))
    col_norms = np.linalg.norm(KG.columns, axis=0)
    evidence["b"] = b
    if np.max(col_norms) <= witness_tol * max(K.norm, 1e-300) * np.linalg.norm(bf):
        vecs = [as_float_vector(v) for v in krylov_vectors(A, f, r + 1, exact=False)]
        acc = np.linalg.norm(sum(bf[j] * vecs[j] for j in range(r + 1)))
        den = sum(abs(bf[j]) * np.linalg.norm(vecs[j]) for j in range(r + 1))
        res = float(acc / den) if den > 0 else 0.0
        bn = bf / np.linalg.norm(bf)
        w = SubspaceWitness(
            "kernel_vector", (bn,), (res,), witness_tol,
            "b lies in ker K_f: sum b_n A^n f = 0, so A has an eigenvalue",
            {"b": b})
        return InjectivityResult("case2_kernel", c, verdict, w, evidence)
    row0 = np.where(col_norms > 0, np.abs(KG.columns[0]) / np.where(col_norms > 0, col_norms, 1),
                    0.0)
    evidence["rotated_first_row_residual"] = float(np.max(row0))
    h = sum(bf[j] * as_float_vector(v)
            for j, v in enumerate(krylov_vectors(A, f, r + 1, exact=False)))
    res = orthogonality_residuals(A, h, ghat, L - r)
    try:
        w = SubspaceWitness(
            "range_defect", (ghat,), tuple(res.tolist()), witness_tol,
            "K_f T_b has zero first row after g -> e_0, so g is orthogonal to "
            "span{A^n b(A) f} (Case 2)",
            {"b": b, "columns": L - r})
    except ValueError as exc:
        evidence["witness_error"] = str(exc)
        return InjectivityResult("no_evidence", c, verdict, None, evidence)
    return InjectivityResult("case2_kernel", c, verdict, w, evidence)


def eventually_geometric_check(c: CoefficientSequence, k: int = 0, tol: float = 1e-12):
    """alpha with c_n = alpha c_{n+1} for every n >= k in the prefix, or None.

    An all-zero tail returns 0.
    """
    if len(c) < k + 4:
        raise ValueError(f"need at least {k + 4} coefficients")
    vals = c.values
    tail = vals[k:]
    if c.exact:
        if all(v == 0 for v in tail):
            return Fraction(0)
        if tail[1] == 0:
            return None
        alpha = tail[0] / tail[1]
        return alpha if all(vals[n] == alpha * vals[n + 1]
                            for n in range(k, len(vals) - 1)) else None
    arr = c.as_array()[k:]
    big = np.max(np.abs(arr))
    if big == 0:
        return 0.0
    if arr[1] == 0:
        return None
    alpha = arr[0] / arr[1]
    err = np.abs(arr[:-1] - alpha * arr[1:])
    ok = np.all(err <= tol * np.maximum(np.abs(arr[:-1]), np.abs(alpha * arr[1:])) + 0.0)
    if not ok:
        return None
    return complex(alpha) if np.iscomplexobj(arr) else float(alpha)


def constant_modulus_check(c: CoefficientSequence, grid: int = 256, tol: float = 1e-10):
    """The constant |psi(e^{i theta})| if it is constant to ``tol`` on a
    uniform grid, else None."""
    if c.infinite_tail and not c.decay_hint < 1:
        warnings.warn(f"decay hint {c.decay_hint:.3g} >= 1: boundary series may diverge",
                      HypothesisWarning, stacklevel=2)
    vals = c.as_array()
    theta = 2 * np.pi * np.arange(grid) / grid
    n = np.arange(len(vals))
    mod = np.abs(np.exp(-1j * np.outer(theta, n)) @ vals)
    if mod.max() - mod.min() <= tol:
        return float(mod.mean())
    return None
