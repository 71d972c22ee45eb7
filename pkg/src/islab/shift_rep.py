"""Shift representation operators K_f and the subspace evidence they carry.

K_f is the N x M matrix whose n-th column is A^n f / beta_n.  It intertwines
A with the weighted shift S_beta (A K_f = K_f S_beta), so its kernel and the
orthogonal complement of its range are the places to look for invariant
subspaces of A.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import HorizonError, PreconditionError
from .linalg import left_null, lower_toeplitz, right_null
from .operators import (
    TruncatedOperator,
    WeightSequence,
    _use_exact,
    as_float_vector,
    krylov_vectors,
    power_norms,
)
from .sequences import CoefficientSequence

WITNESS_KINDS = ("kernel_vector", "range_defect", "orthogonality", "eigenvalue")


@dataclass(frozen=True, eq=False)
class SubspaceWitness:
    """Finite-scale evidence for an invariant subspace.

    ``residuals`` are relative residuals, each at most ``tol``.  ``data`` holds
    whatever an independent checker needs to recompute them.
    """

    kind: str
    vectors: tuple
    residuals: tuple
    tol: float
    claim: str
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in WITNESS_KINDS:
            raise ValueError(f"unknown witness kind {self.kind!r}")
        bad = [r for r in self.residuals if not r <= self.tol]
        if bad:
            raise ValueError(f"witness residual {max(bad):.3g} exceeds tolerance {self.tol:.3g}")


@dataclass(frozen=True, eq=False)
class ShiftRepMatrix:
    """K_f truncated to M columns, with its provenance (A, f, beta)."""

    columns: np.ndarray
    A: TruncatedOperator
    f: np.ndarray
    beta: WeightSequence
    tail_bound: float
    exact_columns: np.ndarray | None = None

    @property
    def M(self) -> int:
        return self.columns.shape[1]

    @property
    def N(self) -> int:
        return self.columns.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.columns, 2))


def _summability_tail(A: TruncatedOperator, beta: WeightSequence, M: int, fnorm: float):
    """Geometric extrapolation of sqrt(sum_{n>=M} (||A^n||/beta_n)^2) * ||f||.

    Raises PreconditionError when the computed prefix of ||A^n||/beta_n is
    not decaying geometrically."""
    nm = int(min(M - 1, A.horizon))
    if nm < 2:
        return math.nan
    a = np.concatenate([[1.0], power_norms(A, nm)]) / beta.as_float()[: nm + 1]
    if a[nm] == 0:
        return 0.0
    mid = nm // 2
    if a[mid] == 0:
        return 0.0
    rho = (a[nm] / a[mid]) ** (1.0 / (nm - mid))
    if not rho < 1:
        raise PreconditionError(
            f"{{||A^n||/beta_n}} is not square-summable on the computed range "
            f"(decay ratio {rho:.4g})")
    steps = M - nm
    return float(fnorm * a[nm] * rho ** steps / math.sqrt(1 - rho ** 2))


def build_K(A: TruncatedOperator, f, beta: WeightSequence | None = None,
            M: int | None = None, check_summability: bool = True) -> ShiftRepMatrix:
    """Columns A^n f / beta_n for n < M.

    ``M`` defaults to the largest column count the horizon allows (capped at
    N).  With ``check_summability`` the prefix of ||A^n|| / beta_n must decay
    geometrically; the extrapolated ell^2 mass of the discarded columns is
    stored as ``tail_bound``.
    """
    f = np.asarray(f, dtype=object if _use_exact(A, f, None) else None)
    if not np.any(f != 0):
        raise ValueError("f must be nonzero")
    limit = A.max_power(f)
    if M is None:
        M = int(min(A.N, limit + 1))
    if M - 1 > limit:
        raise HorizonError(f"{M} columns need power {M - 1} > horizon {limit}")
    if beta is None:
        beta = WeightSequence.unit(M)
    if len(beta) < M:
        raise ValueError("beta is shorter than the column count")
    use_exact = _use_exact(A, f, None) and all(isinstance(b, Fraction) for b in beta.beta[:M])
    vecs = krylov_vectors(A, f, M, exact=use_exact)
    exact_cols = None
    if use_exact:
        exact_cols = np.empty((A.N, M), dtype=object)
        for n, v in enumerate(vecs):
            exact_cols[:, n] = v / beta.beta[n]
        cols = np.array(exact_cols.tolist(), dtype=float)
    else:
        cols = np.column_stack(vecs) / beta.as_float()[None, :M]
    fnorm = float(np.linalg.norm(as_float_vector(f)))
    tail = _summability_tail(A, beta, M, fnorm) if check_summability else math.nan
    return ShiftRepMatrix(cols, A, f, beta, tail, exact_cols)


def intertwining_residual(K, A: TruncatedOperator | None = None,
                          beta: WeightSequence | None = None) -> float:
    """max_n ||A K e_n - K S_beta e_n|| over n = 0..M-2.

    The last column is excluded: K S_beta e_{M-1} needs the column M, which
    the truncation does not hold.
    """
    if isinstance(K, ShiftRepMatrix):
        A = K.A if A is None else A
        beta = K.beta if beta is None else beta
        mat = K.columns
    else:
        mat = np.asarray(K)
    if A is None:
        raise ValueError("operator required for a raw matrix")
    N, M = mat.shape
    if A.N != N:
        raise ValueError(f"dimension mismatch: A is {A.N}x{A.N}, K has {N} rows")
    if M < 2:
        return 0.0
    if beta is None:
        beta = WeightSequence.unit(M)
    w = np.array([float(x) for x in beta.weights[: M - 1]])
    r = A.entries @ mat[:, : M - 1] - mat[:, 1:] * w[None, :]
    return float(np.max(np.linalg.norm(r, axis=0)))


def kernel_vectors(K, tol: float = 1e-8) -> list:
    """Orthonormal basis of the numerical kernel (right singular vectors with
    sigma <= tol * sigma_max).  Empty means numerically injective."""
    mat = K.columns if isinstance(K, ShiftRepMatrix) else np.asarray(K)
    basis, _ = right_null(mat, tol)
    return [basis[:, i] for i in range(basis.shape[1])]


def singular_profile(K) -> np.ndarray:
    mat = K.columns if isinstance(K, ShiftRepMatrix) else np.asarray(K)
    return np.linalg.svd(mat, compute_uv=False)


def range_defect(K, tol: float = 1e-8):
    """Dimension of the orthogonal complement of the numerical column space
    and, if positive, a range_defect witness spanning it."""
    mat = K.columns if isinstance(K, ShiftRepMatrix) else np.asarray(K)
    basis, s = left_null(mat, tol)
    dim = basis.shape[1]
    if dim == 0:
        return 0, None
    scale = s[0] if s.size and s[0] > 0 else 1.0
    vecs = tuple(basis[:, i] for i in range(dim))
    res = tuple(float(np.linalg.norm(mat.conj().T @ v) / scale) for v in vecs)
    w = SubspaceWitness(
        "range_defect", vecs, res, tol,
        "closure of ran K is not the whole space, so it is a nontrivial "
        "invariant subspace of A",
        {"sigma": s.tolist()})
    return dim, w


def dependence_detect(A: TruncatedOperator, f, n_max: int, tol: float = 1e-10):
    """Smallest-degree unit vector c with ||sum_n c_n A^n f|| <= tol.

    Panels [f, ..., A^k f] are tested for k = 1..n_max; the first whose
    smallest singular value is <= tol yields c (padded to length n_max + 1,
    phase fixed so the top coefficient is positive real).  None if the
    Krylov vectors stay independent.
    """
    vecs = [as_float_vector(v) for v in krylov_vectors(A, f, n_max + 1, exact=False)]
    P = np.column_stack(vecs)
    if np.linalg.norm(P[:, 0]) <= tol:
        c = np.zeros(n_max + 1)
        c[0] = 1.0
        return CoefficientSequence.of(c.tolist())
    for k in range(1, n_max + 1):
        _, s, vh = np.linalg.svd(P[:, : k + 1])
        smin = s[-1] if s.size == k + 1 else 0.0
        if smin <= tol:
            c = vh[-1].conj()
            if abs(c[-1]) > 0:
                c = c * (abs(c[-1]) / c[-1])
            full = np.zeros(n_max + 1, dtype=c.dtype)
            full[: k + 1] = c
            if np.iscomplexobj(full) and np.all(full.imag == 0):
                full = full.real
            return CoefficientSequence.of(full.tolist())
    return None


def relation_residual(A: TruncatedOperator, f, c) -> float:
    """||sum_n c_n A^n f||."""
    vals = c.as_array() if isinstance(c, CoefficientSequence) else np.asarray(c)
    vecs = krylov_vectors(A, f, len(vals), exact=False)
    acc = sum(v * as_float_vector(x) for v, x in zip(vals, vecs))
    return float(np.linalg.norm(acc))


def eigenvalue_witness(A: TruncatedOperator, f, c, tol: float = 1e-8):
    """Eigenvectors q(A) f from a relation p(A) f = 0, where p = (z - lam) q.

    Returns a witness of kind eigenvalue or None if no root yields a nonzero
    vector within tolerance.
    """
    vals = c.as_array() if isinstance(c, CoefficientSequence) else np.asarray(c)
    d = len(vals) - 1
    while d > 0 and vals[d] == 0:
        d -= 1
    if d == 0:
        return None
    coeffs = vals[: d + 1]
    roots = np.roots(coeffs[::-1])
    scale = max(1.0, A.norm)
    vecs = [as_float_vector(x) for x in krylov_vectors(A, f, d, exact=False)]
    for lam in sorted(roots, key=lambda z: (abs(z), z.real, z.imag)):
        # synthetic division of p by (z - lam), highest degree first
        q = np.zeros(d, dtype=complex)
        acc = 0.0
        for k in range(d, 0, -1):
            acc = coeffs[k] + acc * lam
            q[k - 1] = acc
        v = sum(q[k] * vecs[k] for k in range(d))
        nv = np.linalg.norm(v)
        if nv == 0:
            continue
        v = v / nv
        res = float(np.linalg.norm(A.entries @ v - lam * v) / scale)
        if res <= tol:
            lam_out = complex(lam)
            if abs(lam_out.imag) <= 1e-14 * max(1.0, abs(lam_out)):
                lam_out = lam_out.real
                if np.all(np.abs(v.imag) <= 1e-14):
                    v = v.real
            return SubspaceWitness(
                "eigenvalue", (v,), (res,), tol,
                "A has an eigenvalue: A v = lambda v with v in the cyclic span of f",
                {"eigenvalue": lam_out})
    return None


def compose_with_inner(K: ShiftRepMatrix, phi) -> ShiftRepMatrix:
    """K T_phi for a polynomial phi, computed on M + deg(phi) columns so no
    truncation edge leaks into the first M columns.

    By the intertwining relation the result is K_{phi(A) f}.
    """
    seq = phi if isinstance(phi, CoefficientSequence) else CoefficientSequence.of(phi)
    if seq.infinite_tail:
        raise ValueError("phi must be finitely supported")
    if not K.beta.is_unit:
        raise ValueError("composition with analytic Toeplitz needs beta = 1")
    vals = list(seq.values)
    deg = len(vals) - 1
    while deg > 0 and vals[deg] == 0:
        deg -= 1
    vals = vals[: deg + 1]
    M = K.M
    budget = K.A.max_power(K.f) + 1
    if M + deg > budget:
        raise HorizonError(f"deg phi + M = {M + deg} exceeds the column budget {budget}")
    ext = build_K(K.A, K.f, WeightSequence.unit(M + deg), M + deg, check_summability=False)
    exact_cols = None
    if ext.exact_columns is not None and seq.exact:
        t = lower_toeplitz(vals, M + deg, dtype=object)
        exact_cols = (ext.exact_columns @ t)[:, :M]
        cols = np.array(exact_cols.tolist(), dtype=float)
    else:
        fv = [complex(v) if isinstance(v, complex) else float(v) for v in vals]
        t = lower_toeplitz(fv, M + deg, dtype=complex if any(isinstance(v, complex) for v in fv)
                           else float)
        cols = (ext.columns @ t)[:, :M]
    f_new = exact_cols[:, 0].copy() if exact_cols is not None else cols[:, 0].copy()
    l1 = float(sum(abs(complex(v)) for v in vals))
    tail = K.tail_bound * l1 if math.isfinite(K.tail_bound) else math.nan
    return ShiftRepMatrix(cols, K.A, f_new, K.beta, tail, exact_cols)
