"""SVD-based rank and null space helpers plus structured matrices."""
from __future__ import annotations

import numpy as np


def numerical_rank(a, tol: float) -> int:
    """Number of singular values above ``tol * sigma_max``."""
    s = np.linalg.svd(np.asarray(a), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def right_null(a, tol: float):
    """Orthonormal basis (columns) of the numerical right kernel and the
    full singular value profile."""
    a = np.asarray(a)
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    r = 0 if s.size == 0 or s[0] == 0 else int(np.sum(s > tol * s[0]))
    return vh[r:].conj().T, s


def left_null(a, tol: float):
    a = np.asarray(a)
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    r = 0 if s.size == 0 or s[0] == 0 else int(np.sum(s > tol * s[0]))
    return u[:, r:], s


def lower_toeplitz(coeffs, size: int, dtype=None):
    """Matrix of multiplication by sum_k coeffs[k] z^k on the first ``size``
    Taylor coefficients (the analytic Toeplitz matrix T_phi)."""
    c = list(coeffs)
    obj = dtype is object
    t = np.zeros((size, size), dtype=object if obj else (dtype or np.result_type(
        *[np.asarray(v).dtype for v in c] or [float])))
    if obj:
        t[:] = 0
    for k, v in enumerate(c[:size]):
        for j in range(size - k):
            t[j + k, j] = v
    return t


def householder_to_e0(g):
    """Unitary U with U e_0 = g / ||g||: a Householder reflection times a
    unimodular phase (Hermitian when g is real)."""
    g = np.asarray(g, dtype=complex)
    u0 = g / np.linalg.norm(g)
    n = u0.size
    e0 = np.zeros(n, dtype=complex)
    e0[0] = 1.0
    # phase so the reflection maps e_0 exactly onto u0
    phase = 1.0 if u0[0] == 0 else u0[0] / abs(u0[0])
    v = e0 * phase - u0
    nv = np.linalg.norm(v)
    if nv < 1e-15:
        return np.eye(n, dtype=complex) * phase
    v /= nv
    h = np.eye(n, dtype=complex) - 2.0 * np.outer(v, v.conj())
    # h maps phase*e0 -> u0; rescale column action so that U e0 = u0
    return h * phase
