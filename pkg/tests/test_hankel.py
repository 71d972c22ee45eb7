import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from islab import _exact
from islab.cyclic import moment_sequence
from islab.errors import PreconditionError
from islab.hankel import (
    RationalityVerdict,
    constant_modulus_check,
    eventually_geometric_check,
    hankel_matrix,
    hs_norm_check,
    injectivity_decision,
    kernel_generator,
    rank_profile,
    rationality_oracle_exact,
    recurrence_residuals,
    symbol_coefficients,
)
from islab.operators import OperatorSpec, basis_vector, build_truncation
from islab.sequences import CoefficientSequence

seq = CoefficientSequence.of


def shift(N):
    return build_truncation(OperatorSpec("weighted_shift", {"weights": "inverse_index"}, N))


def harmonic(N, L):
    g = np.full(N, F(0), dtype=object)
    for k in range(L):
        g[k] = F(1, k + 1)
    return g


def poly_mul(a, b):
    out = [F(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def series_of(num, den, L):
    """Taylor coefficients of num/den (den[0] = 1) by long division."""
    c = []
    for n in range(L):
        acc = num[n] if n < len(num) else F(0)
        for i in range(1, min(n, len(den) - 1) + 1):
            acc -= den[i] * c[n - i]
        c.append(acc)
    return c


# symbol coefficients

def test_symbol_coefficients_examples():
    A = shift(128)
    c = symbol_coefficients(A, basis_vector(128, 1), basis_vector(128, 0), 64)
    assert c.is_zero()
    Z = build_truncation(OperatorSpec("diagonal", {"entries": [0, 0, 0]}))
    c = symbol_coefficients(Z, basis_vector(3, 0), basis_vector(3, 0), 4)
    assert c.values == (1, 0, 0, 0)
    c = symbol_coefficients(A, basis_vector(128, 0), harmonic(128, 64), 64)
    assert c.exact
    assert c.values == tuple(F(1, math.factorial(n + 1)) for n in range(64))


# Hankel structure

def test_hankel_matrix_examples():
    H = hankel_matrix(seq([1, 0, 0, 0, 0]), 3)
    assert H.entries[0, 0] == 1 and sum(H.entries.reshape(-1)) == 1
    H = hankel_matrix(seq([1.0] * 7), 4)
    assert np.linalg.matrix_rank(H.entries.astype(float)) == 1
    H = hankel_matrix(seq([2.0 ** -n for n in range(7)]), 4)
    assert np.linalg.matrix_rank(H.entries.astype(float)) == 1


@given(st.lists(st.fractions(max_denominator=20), min_size=9, max_size=9))
def test_hankel_structure(vals):
    c = seq(vals)
    H = hankel_matrix(c, 5).entries
    for i in range(5):
        for j in range(5):
            assert H[i, j] == vals[i + j]
    # column j is the first column moved up j places
    for j in range(5):
        assert list(H[:, j]) == vals[j:j + 5]


# Hilbert-Schmidt

def test_hs_examples():
    assert hs_norm_check(seq([1, 0, 0, 0, 0]), 3) == (1.0, 1.0)
    assert hs_norm_check(seq([1, 1, 1]), 2) == (4.0, 4.0)


@given(st.lists(st.fractions(max_denominator=30), min_size=11, max_size=11))
def test_hs_norm_identity_exact(vals):
    a, b = hs_norm_check(seq(vals), 6)
    assert a == b
    ref = float(sum(F(min(n + 1, 11 - n, 6)) * v * v for n, v in enumerate(vals)))
    assert a == ref


def test_inverse_factorial_partial_sums_below_two():
    total = F(0)
    for n in range(60):
        total += F(n + 1, math.factorial(n + 1) ** 2)
        assert total < 2


# float rank profile

def test_rank_profile_geometric():
    v = rank_profile(seq([2.0 ** -n for n in range(30)]), 12)
    assert v.verdict == "rational" and v.stabilized_rank == 1
    assert np.allclose(v.denominator, [1, -0.5])


def test_rank_profile_odd_lattice_d1():
    c = seq([0.0 if n % 2 == 0 else 4.0 ** -(n // 2) for n in range(30)])
    v = rank_profile(c, 8)
    assert v.verdict == "rational" and v.stabilized_rank == 2
    # brute-force ranks of H_2..H_8 without any scaling
    for N in range(2, 9):
        H = np.array([[c[i + j] for j in range(N)] for i in range(N)])
        assert v.evidence["ranks"][N] == np.linalg.matrix_rank(H, tol=1e-10)


def test_rank_profile_zero_and_errors():
    assert rank_profile(seq([0.0] * 9), 4).verdict == "zero"
    with pytest.raises(ValueError):
        rank_profile(seq([1.0] * 5), 4)


def test_rank_profile_inverse_factorial_not_rational():
    c = seq([1 / math.factorial(n + 1) for n in range(23)])
    assert rank_profile(c, 12).verdict == "non_rational_up_to_order"


# exact oracle

def test_exact_oracle_inverse_factorial():
    c = seq([F(1, math.factorial(n + 1)) for n in range(14)])
    v = rationality_oracle_exact(c, 5)
    assert v.verdict == "non_rational_up_to_order"
    assert v.evidence["all_nonzero"]
    # independent determinant check of the leading sections
    for n in range(1, 7):
        H = [[c[i + j] for j in range(n)] for i in range(n)]
        assert _exact.det(H) != 0
        assert v.evidence["hankel_determinants"][n - 1] == _exact.det(H)


def test_exact_oracle_geometric_and_polynomial():
    v = rationality_oracle_exact(seq([F(1, 2 ** n) for n in range(20)]), 5)
    assert v.verdict == "rational" and v.denominator == (1, F(-1, 2))
    assert v.numerator == (1,)
    J = build_truncation(OperatorSpec("jordan_block", {"size": 3, "eigenvalue": 0}))
    c = symbol_coefficients(J, np.array([F(1), F(2), F(3)], dtype=object),
                            np.array([F(1), F(-1), F(2)], dtype=object), 16)
    v = rationality_oracle_exact(c, 6)
    assert v.verdict == "rational" and len(v.denominator) == 1


def test_exact_oracle_needs_prefix():
    with pytest.raises(ValueError):
        rationality_oracle_exact(seq([F(1)] * 5), 3)
    with pytest.raises(ValueError):
        rationality_oracle_exact(seq([1.0] * 20), 3)


@given(st.integers(1, 4), st.data())
def test_kronecker_random_rational(d, data):
    # random denominator with nonzero constant and top coefficient
    den = [F(1)] + [data.draw(st.fractions(-2, 2, max_denominator=5)) for _ in range(d - 1)]
    den.append(data.draw(st.fractions(F(1, 5), 2, max_denominator=5)))
    num = [data.draw(st.fractions(-2, 2, max_denominator=5)) for _ in range(d)]
    num[0] = F(1)
    c = series_of(num, den, 2 * d + 12)
    v = rationality_oracle_exact(seq(c), d + 4)
    assert v.verdict == "rational"
    assert v.stabilized_rank <= d
    assert np.all(recurrence_residuals(v.recurrence, seq(c)) == 0)
    # the certificate reproduces the series
    rebuilt = series_of(list(v.numerator), list(v.denominator), len(c))
    assert rebuilt == c


def test_moments_certificates():
    for lambdas in ([4], [4, 9], [4, 9, 16]):
        c = moment_sequence(lambdas, 40)
        v = rationality_oracle_exact(c, 8)
        den = [F(1)]
        for l in lambdas:
            den = poly_mul(den, [F(1), F(0), F(-1, l)])
        assert list(v.denominator) == den
        # numerator z * sum_i prod_{j != i} (1 - z^2/lambda_j)
        num = [F(0)] * (2 * len(lambdas))
        for i in range(len(lambdas)):
            p = [F(0), F(1)]
            for j, l in enumerate(lambdas):
                if j != i:
                    p = poly_mul(p, [F(1), F(0), F(-1, l)])
            for k, x in enumerate(p):
                num[k] += x
        while num and num[-1] == 0:
            num.pop()
        assert list(v.numerator) == num
        fv = rank_profile(c.to_float(), 12)
        assert fv.stabilized_rank == v.stabilized_rank == 2 * len(lambdas)


def test_verdict_invariants():
    with pytest.raises(ValueError):
        RationalityVerdict("rational", 1, None)
    with pytest.raises(ValueError):
        RationalityVerdict("rational", 2, ((1,), (1, 0)), 5, (0, 1))
    with pytest.raises(ValueError):
        RationalityVerdict("maybe")


# kernel generator

def test_kernel_generator_examples():
    c = moment_sequence([4], 20)
    b = kernel_generator(hankel_matrix(c, 5))
    assert b.values == (F(-1, 4), 0, 1)
    b = kernel_generator(hankel_matrix(seq([1.0] * 15), 5))
    assert np.allclose(b.as_array(), [-1, 1])
    c = seq([1 / math.factorial(n + 1) for n in range(11)])
    assert kernel_generator(hankel_matrix(c, 5)) is None


@given(st.integers(0, 10_000))
def test_kernel_generator_verified_recurrence(seed):
    rng = np.random.default_rng(seed)
    roots = rng.uniform(0.2, 0.9, 2) * rng.choice([-1, 1], 2)
    wts = rng.uniform(0.5, 2, 2)
    c = seq([float(np.sum(wts * roots ** n)) for n in range(21)])
    b = kernel_generator(hankel_matrix(c, 6), tol=1e-9)
    if b is not None:
        assert np.all(recurrence_residuals(b.values, c) <= 1e-10)


# geometric / modulus checks

def test_eventually_geometric_examples():
    assert eventually_geometric_check(seq([F(1, 3 ** n) for n in range(10)])) == 3
    vals = [F(7)] + [F(1, 2 ** n) for n in range(9)]
    assert eventually_geometric_check(seq(vals), k=1) == 2
    assert eventually_geometric_check(seq(vals), k=0) is None
    assert eventually_geometric_check(seq([F(1, math.factorial(n + 1)) for n in range(10)])) is None


def test_constant_modulus_examples():
    assert constant_modulus_check(seq([1.0, 0, 0, 0])) == pytest.approx(1.0)
    assert constant_modulus_check(seq([0, 0.5, 0, 0])) == pytest.approx(0.5)
    assert constant_modulus_check(seq([1.0, 0.5])) is None


# injectivity pipeline

def test_injectivity_case1():
    A = shift(128)
    r = injectivity_decision(A, basis_vector(128, 1), basis_vector(128, 0), L=64)
    assert r.verdict == "case1_orthogonal" and r.witness.kind == "orthogonality"
    assert max(r.witness.residuals) == 0


def test_injectivity_no_evidence_harmonic():
    A = shift(128)
    r = injectivity_decision(A, basis_vector(128, 0), harmonic(128, 64), L=64, d_max=5)
    assert r.verdict == "no_evidence" and r.witness is None
    assert r.rationality.evidence["all_nonzero"]


def test_injectivity_nilpotent_kernel_exact():
    J = build_truncation(OperatorSpec("jordan_block", {"size": 3, "eigenvalue": 0}))
    f = np.array([F(2), F(-1), F(3)], dtype=object)
    g = np.array([F(1), F(4), F(-2)], dtype=object)
    r = injectivity_decision(J, f, g, L=16, d_max=6)
    assert r.verdict == "case2_kernel" and r.witness is not None
    b = r.rationality.recurrence
    assert b == (0, 0, 0, 1)  # minimal polynomial z^3
    H = hankel_matrix(r.coefficients, 8).entries
    prod = H[:, :4] @ np.array(b, dtype=object)
    assert all(x == 0 for x in prod)


def test_injectivity_case2_range_defect():
    B = build_truncation(OperatorSpec("adjoint_shift", {"weights": {"constant": "1/2"}}, 32))
    f = np.full(32, F(1), dtype=object)
    r = injectivity_decision(B, f, basis_vector(32, 0), L=32, d_max=8)
    assert r.verdict == "case2_kernel" and r.witness.kind == "range_defect"
    assert r.evidence["rotated_first_row_residual"] <= 1e-12


def test_injectivity_requires_contraction():
    D = build_truncation(OperatorSpec("diagonal", {"entries": [2, 3]}))
    with pytest.raises(PreconditionError):
        injectivity_decision(D, np.array([1.0, 1.0]), np.array([1.0, 0.0]), L=10)
    r = injectivity_decision(D, np.array([1.0, 1.0]), np.array([1.0, 1.0]), L=20,
                             contract=True)
    assert r.verdict == "case2_kernel"
