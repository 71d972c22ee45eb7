"""Asymmetric growth ||A^n + lambda A^-n||, its polynomial exponent, and the
nilpotency conclusions it forces when sigma(A) = {1}.

Negative powers come from a single LU factorization and repeated solves;
operators with condition number above ``COND_CAP`` are refused.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.stats

from .errors import PreconditionError
from .operators import TruncatedOperator, as_float_vector

COND_CAP = 1e12


@dataclass
class GrowthReport:
    lam: complex
    n: np.ndarray
    norms: np.ndarray
    fitted_r: float | None = None
    r_interval: tuple | None = None
    bound_constant_M: float | None = None
    nilpotency_order: int | None = None
    condition_flags: dict = field(default_factory=dict)

    def table(self):
        order = np.argsort(self.n)
        return [(int(self.n[i]), float(self.norms[i])) for i in order]


class _Powers:
    """A^n and A^-n for requested n, built incrementally from one LU."""

    def __init__(self, a: np.ndarray, cond_cap: float = COND_CAP):
        self.a = a
        self.cond = float(np.linalg.cond(a))
        if not np.isfinite(self.cond) or self.cond > cond_cap:
            raise PreconditionError(
                f"operator is singular or ill-conditioned (cond = {self.cond:.3g})")
        self.lu = scipy.linalg.lu_factor(a)

    def sweep(self, ns):
        """Yield (n, A^n) for the sorted distinct integers in ``ns`` (any sign)."""
        ns = sorted(set(int(n) for n in ns))
        eye = np.eye(self.a.shape[0], dtype=self.a.dtype)
        pos = [n for n in ns if n >= 0]
        neg = sorted((-n for n in ns if n < 0))
        out = {}
        p, k = eye.copy(), 0
        for n in pos:
            while k < n:
                p = p @ self.a
                k += 1
            out[n] = p.copy()
        p, k = eye.copy(), 0
        for m in neg:
            while k < m:
                p = scipy.linalg.lu_solve(self.lu, p)
                k += 1
            out[-m] = p.copy()
        return out


def _as_matrix(A):
    return A.entries if isinstance(A, TruncatedOperator) else np.asarray(A)


def asymmetric_growth(A, lam: complex, n_list, cond_cap: float = COND_CAP) -> GrowthReport:
    """||A^n + lam A^-n|| for each n in ``n_list``."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    a = _as_matrix(A)
    if isinstance(lam, complex) or np.iscomplexobj(a):
        a = a.astype(complex)
    pw = _Powers(a, cond_cap)
    ns = np.array(sorted(set(int(n) for n in n_list)))
    if np.any(ns < 1):
        raise ValueError("n_list must contain positive integers")
    mats = pw.sweep(list(ns) + [-n for n in ns])
    norms = np.array([np.linalg.norm(mats[n] + lam * mats[-n], 2) for n in ns])
    return GrowthReport(lam, ns, norms, condition_flags={"cond": pw.cond,
                                                         "cond_cap": cond_cap})


def _is_dyadic(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def growth_exponent_fit(report: GrowthReport, confidence: float = 0.95) -> float:
    """Slope of log norm against log n over the final half of the dyadic
    samples; the confidence interval is stored on the report."""
    mask = np.array([_is_dyadic(int(n)) for n in report.n])
    n = report.n[mask].astype(float)
    y = report.norms[mask]
    if n.size < 8:
        raise ValueError(f"need >= 8 dyadic samples, have {n.size}")
    if np.all(y == y[0]):
        report.fitted_r = 0.0
        report.r_interval = (0.0, 0.0)
        return 0.0
    half = n.size // 2
    x, ly = np.log(n[half:]), np.log(y[half:])
    fit = scipy.stats.linregress(x, ly)
    dof = x.size - 2
    t = scipy.stats.t.ppf(0.5 + confidence / 2, dof) if dof > 0 else math.inf
    width = t * fit.stderr
    report.fitted_r = float(fit.slope)
    report.r_interval = (float(fit.slope - width), float(fit.slope + width))
    return report.fitted_r


def difference_bound_check(A, r: int, n_list, cond_cap: float = COND_CAP):
    """(M, pass) with M = max_n ||A^n (I - A^2)|| / |n|^(r+2).

    ``pass`` holds when the maximum is not attained at the extreme negative
    or extreme positive n, i.e. the ratio is not still growing at the edge.
    All ratios zero counts as a pass with M = 0.
    """
    a = _as_matrix(A)
    pw = _Powers(a.astype(complex) if np.iscomplexobj(a) else a, cond_cap)
    ns = sorted(set(int(n) for n in n_list if int(n) != 0))
    if not ns:
        raise ValueError("n_list must contain nonzero integers")
    mats = pw.sweep(ns)
    d = np.eye(a.shape[0]) - a @ a
    ratios = np.array([np.linalg.norm(mats[n] @ d, 2) / abs(n) ** (r + 2) for n in ns])
    M = float(ratios.max())
    if M == 0:
        return 0.0, True
    arg = int(np.argmax(ratios))
    edges = {0, len(ns) - 1}
    return M, arg not in edges


def nilpotency_check(A, r: int, tol: float = 1e-10):
    """Smallest m <= r + 4 with ||(A - I)^m|| <= tol * max(1, ||A - I||)^m."""
    a = _as_matrix(A)
    e = a - np.eye(a.shape[0])
    base = max(1.0, float(np.linalg.norm(e, 2)))
    p = np.eye(a.shape[0], dtype=e.dtype)
    for m in range(1, r + 5):
        p = p @ e
        if np.linalg.norm(p, 2) <= tol * base ** m:
            return m
    return None


def local_growth(A, x, lam: complex, n_list, adjoint: tuple | None = None,
                 cond_cap: float = COND_CAP):
    """||(A^-n + lam A^n) x|| over ``n_list``.

    With ``adjoint=(y, mu)`` also returns the sweep for (A*, y, mu).
    """
    a = _as_matrix(A)
    if isinstance(lam, complex) or np.iscomplexobj(a):
        a = a.astype(complex)
    ns = sorted(set(int(n) for n in n_list))
    pw = _Powers(a, cond_cap)
    mats = pw.sweep(ns + [-n for n in ns])
    xv = as_float_vector(x)
    out = np.array([np.linalg.norm((mats[-n] + lam * mats[n]) @ xv) for n in ns])
    if adjoint is None:
        return out
    y, mu = adjoint
    ah = a.conj().T
    pa = _Powers(ah if not isinstance(mu, complex) else ah.astype(complex), cond_cap)
    ma = pa.sweep(ns + [-n for n in ns])
    yv = as_float_vector(y)
    out_adj = np.array([np.linalg.norm((ma[-n] + mu * ma[n]) @ yv) for n in ns])
    return out, out_adj


def lambda_scaling_residual(A, lam: complex, n_list, cond_cap: float = COND_CAP) -> float:
    """Max relative gap between ||A^-n + A^n / lam|| and ||A^n + lam A^-n|| / |lam|."""
    a = _as_matrix(A).astype(complex)
    pw = _Powers(a, cond_cap)
    ns = sorted(set(int(n) for n in n_list))
    mats = pw.sweep(ns + [-n for n in ns])
    worst = 0.0
    for n in ns:
        lhs = np.linalg.norm(mats[-n] + mats[n] / lam, 2)
        rhs = np.linalg.norm(mats[n] + lam * mats[-n], 2) / abs(lam)
        worst = max(worst, abs(lhs - rhs) / max(rhs, 1e-300))
    return float(worst)


def adjoint_residual(A, lam: complex, n_list, cond_cap: float = COND_CAP) -> float:
    """Max relative gap between the sweeps for (A, lam) and (A*, conj(lam))."""
    a = _as_matrix(A).astype(complex)
    ns = sorted(set(int(n) for n in n_list))
    fwd = asymmetric_growth(a, complex(lam), ns, cond_cap).norms
    back = asymmetric_growth(a.conj().T, complex(np.conj(lam)), ns, cond_cap).norms
    return float(np.max(np.abs(fwd - back) / np.maximum(fwd, 1e-300)))
