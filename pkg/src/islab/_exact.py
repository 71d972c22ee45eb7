"""Row reduction over the rationals.

Matrices are numpy object arrays (or nested lists) of ``Fraction``.
"""
from fractions import Fraction

import numpy as np


def to_fraction_array(a):
    arr = np.asarray(a, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    flat_in, flat_out = arr.reshape(-1), out.reshape(-1)
    for i, v in enumerate(flat_in):
        flat_out[i] = as_fraction(v)
    return out


def as_fraction(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v.strip())
    if isinstance(v, (float, np.floating)):
        if not np.isfinite(v):
            raise ValueError(f"non-finite value {v!r}")
        return Fraction(float(v))
    if isinstance(v, (complex, np.complexfloating)):
        if v.imag != 0:
            raise TypeError("complex values have no exact rational form")
        return as_fraction(v.real)
    raise TypeError(f"cannot represent {type(v).__name__} exactly")


def is_exact_vector(x) -> bool:
    """True when every entry is an int or Fraction (not a float)."""
    arr = np.asarray(x, dtype=object).reshape(-1)
    return all(isinstance(v, (Fraction, int, np.integer)) and not isinstance(v, bool)
               for v in arr)


def _echelon(rows):
    """Reduced row echelon form in place; returns pivot columns."""
    m = len(rows)
    n = len(rows[0]) if m else 0
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(m):
            if i != r and rows[i][col] != 0:
                fac = rows[i][col]
                rows[i] = [a - fac * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break
    return pivots


def rank(mat) -> int:
    rows = [list(map(as_fraction, row)) for row in np.asarray(mat, dtype=object)]
    if not rows or not rows[0]:
        return 0
    return len(_echelon(rows))


def det(mat) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    rows = [list(map(as_fraction, row)) for row in np.asarray(mat, dtype=object)]
    n = len(rows)
    result = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if rows[i][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            result = -result
        p = rows[col][col]
        result *= p
        for i in range(col + 1, n):
            if rows[i][col] != 0:
                fac = rows[i][col] / p
                rows[i] = [a - fac * b for a, b in zip(rows[i], rows[col])]
    return result


def nullspace(mat):
    """Basis of the right kernel, one list of Fractions per vector."""
    rows = [list(map(as_fraction, row)) for row in np.asarray(mat, dtype=object)]
    n = len(rows[0])
    pivots = _echelon(rows)
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for fj in free:
        v = [Fraction(0)] * n
        v[fj] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -rows[r][fj]
        basis.append(v)
    return basis


def solve(mat, rhs):
    """One exact solution of ``mat @ x = rhs`` or None if inconsistent."""
    a = np.asarray(mat, dtype=object)
    m, n = a.shape
    rows = [list(map(as_fraction, a[i])) + [as_fraction(rhs[i])] for i in range(m)]
    pivots = _echelon(rows)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for r, pc in enumerate(pivots):
        x[pc] = rows[r][n]
    return x
