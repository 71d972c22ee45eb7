import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from islab.errors import HorizonError, PreconditionError
from islab.linalg import lower_toeplitz
from islab.operators import OperatorSpec, WeightSequence, basis_vector, build_truncation, from_matrix, polynomial_of
from islab.shift_rep import (
    SubspaceWitness,
    build_K,
    compose_with_inner,
    dependence_detect,
    eigenvalue_witness,
    intertwining_residual,
    kernel_vectors,
    range_defect,
    relation_residual,
    singular_profile,
)


def shift(N):
    return build_truncation(OperatorSpec("weighted_shift", {"weights": "inverse_index"}, N))


def zero(N):
    return build_truncation(OperatorSpec("diagonal", {"entries": [0] * N}))


def nil_J():
    # J e_0 = 0, J e_1 = e_0
    return build_truncation(OperatorSpec("jordan_block", {"size": 4, "eigenvalue": 0}))


def test_build_K_zero_operator():
    K = build_K(zero(4), basis_vector(4, 0), M=4, check_summability=False)
    ref = np.zeros((4, 4))
    ref[0, 0] = 1
    assert np.array_equal(K.columns, ref)
    assert intertwining_residual(K) == 0.0


def test_build_K_weighted_shift_columns():
    A = shift(32)
    K = build_K(A, basis_vector(32, 0), M=16)
    for n in range(16):
        ref = basis_vector(32, n) * F(1, math.factorial(n))
        assert list(K.exact_columns[:, n]) == list(ref)
    assert K.tail_bound < 1e-10


def test_build_K_nilpotent_columns():
    K = build_K(nil_J(), basis_vector(4, 1), M=4, check_summability=False)
    assert np.array_equal(K.columns[:, 0], [0, 1, 0, 0])
    assert np.array_equal(K.columns[:, 1], [1, 0, 0, 0])
    assert not K.columns[:, 2:].any()


def test_build_K_refuses_horizon_and_divergence():
    with pytest.raises(HorizonError):
        build_K(shift(16), np.ones(16), M=12)
    unit = build_truncation(OperatorSpec("diagonal", {"entries": [1, 1, 1]}))
    with pytest.raises(PreconditionError):
        build_K(unit, np.ones(3), M=3)


def test_intertwining_perturbation_detected():
    A = shift(16)
    K = build_K(A, basis_vector(16, 0), M=8)
    mat = K.columns.copy()
    mat[3, 2] += 1.0
    assert intertwining_residual(mat, A) >= 0.5


@given(st.integers(0, 10_000), st.integers(4, 20))
def test_intertwining_random_weighted_beta(seed, N):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.1, 0.9, N - 1)
    A = build_truncation(OperatorSpec("weighted_shift", {"weights": w.tolist(),
                                                         "horizon": N - 1}, N))
    f = np.zeros(N)
    f[0] = 1.0
    beta = WeightSequence(tuple([1.0] + list(np.cumprod(rng.uniform(0.5, 2.0, N - 1)))))
    K = build_K(A, f, beta, M=N, check_summability=False)
    assert intertwining_residual(K) <= 1e-10 * max(1.0, K.norm)


@given(st.integers(0, 10_000))
def test_bimodule_closure(seed):
    rng = np.random.default_rng(seed)
    N = 10
    A = from_matrix(rng.standard_normal((N, N)) / (2 * math.sqrt(N)))
    K = build_K(A, rng.standard_normal(N), M=12)
    p = rng.standard_normal(3)
    q = rng.standard_normal(3)
    T = polynomial_of(A, p.tolist()).entries
    R = lower_toeplitz(q.tolist(), 12, float)
    TKR = T @ K.columns @ R
    res = intertwining_residual(TKR[:, :10], A)
    scale = np.linalg.norm(T, 2) * K.norm * np.linalg.norm(R, 2)
    assert res <= 1e-8 * scale


@given(st.integers(0, 10_000))
def test_correspondence_one_to_one(seed):
    rng = np.random.default_rng(seed)
    A = from_matrix(rng.standard_normal((6, 6)) / 6)
    f, g = rng.standard_normal(6), rng.standard_normal(6)
    Kf, Kg = build_K(A, f, M=6), build_K(A, g, M=6)
    assert np.array_equal(Kf.columns[:, 0], f)
    assert not np.array_equal(Kf.columns, Kg.columns)


def test_kernel_vectors_examples():
    K = build_K(zero(4), basis_vector(4, 0), M=4, check_summability=False)
    ker = kernel_vectors(K)
    span = np.array(ker).T
    assert span.shape == (4, 3)
    # kernel is span{e_1, e_2, e_3}
    assert np.allclose(span[0], 0)
    assert kernel_vectors(build_K(shift(32), basis_vector(32, 0), M=12)) == []
    K = build_K(nil_J(), basis_vector(4, 1), M=4, check_summability=False)
    ker = np.array(kernel_vectors(K)).T
    e2 = np.array([0, 0, 1.0, 0])
    assert np.linalg.norm(ker @ (ker.T @ e2) - e2) < 1e-12


def test_range_defect_examples():
    K = build_K(zero(4), basis_vector(4, 0), M=4, check_summability=False)
    dim, w = range_defect(K)
    assert dim == 3
    basis = np.array(w.vectors).T
    assert np.allclose(basis[0], 0)
    mat = np.zeros((3, 3))
    mat[1:, 1:] = [[1, 2], [3, 5]]
    dim, w = range_defect(mat)
    assert dim == 1 and abs(abs(w.vectors[0][0]) - 1) < 1e-12
    dim, w = range_defect(np.array([[1.0, 2.0], [3.0, 5.0]]))
    assert dim == 0 and w is None


def test_witness_rejects_large_residual():
    with pytest.raises(ValueError):
        SubspaceWitness("orthogonality", (np.ones(2),), (1e-3,), 1e-8, "bad")
    with pytest.raises(ValueError):
        SubspaceWitness("mystery", (), (), 1.0, "bad")


def test_dependence_examples():
    J = build_truncation(OperatorSpec("jordan_block", {"size": 3, "eigenvalue": 0}))
    f = np.array([1.0, 2.0, 3.0])
    c = dependence_detect(J, f, 4)
    assert np.allclose(c.as_array(), [0, 0, 0, 1, 0])
    assert relation_residual(J, f, c) == 0
    assert dependence_detect(shift(32), basis_vector(32, 0), 8) is None
    D = build_truncation(OperatorSpec("diagonal", {"entries": ["1/2", "1/3"]}))
    c = dependence_detect(D, np.array([1.0, 0.0]), 3).as_array()
    assert np.allclose(c[:2] / c[1], [-0.5, 1]) and np.allclose(c[2:], 0)


def test_eigenvalue_witness_from_relation():
    D = build_truncation(OperatorSpec("diagonal", {"entries": ["1/2", "1/3", "1/5"]}))
    f = np.array([1.0, 1.0, 0.0])
    c = dependence_detect(D, f, 3)
    w = eigenvalue_witness(D, f, c)
    lam = w.data["eigenvalue"]
    assert min(abs(lam - 1 / 2), abs(lam - 1 / 3)) < 1e-10
    v = w.vectors[0]
    assert np.linalg.norm(D.entries @ v - lam * v) < 1e-10


@given(st.integers(0, 10_000))
def test_kernel_dependence_consistency(seed):
    rng = np.random.default_rng(seed)
    N = 5
    k = int(rng.integers(1, N))
    # an operator whose Krylov space of f has dimension k
    Q, _ = np.linalg.qr(rng.standard_normal((N, N)))
    d = np.diag(np.concatenate([rng.uniform(0.1, 0.8, k), np.zeros(N - k)]))
    A = from_matrix(Q @ d @ Q.T)
    f = Q[:, :k] @ rng.uniform(0.5, 1.5, k)
    K = build_K(A, f, M=N, check_summability=False)
    has_ker = bool(kernel_vectors(K, 1e-9))
    dep = dependence_detect(A, f, N - 1, 1e-9 * K.norm)
    assert has_ker == (dep is not None)


def test_compose_with_inner_examples():
    A = shift(32)
    K = build_K(A, basis_vector(32, 0), M=8)
    same = compose_with_inner(K, [1])
    assert np.array_equal(same.columns, K.columns)
    z = compose_with_inner(K, [0, 1])
    ext = build_K(A, basis_vector(32, 0), M=9, check_summability=False)
    assert np.array_equal(z.columns, ext.columns[:, 1:9])
    K0 = build_K(zero(4), basis_vector(4, 0), M=3, check_summability=False)
    assert not compose_with_inner(K0, [0, 1]).columns.any()


def test_compose_equals_K_of_phi_A_f():
    A = shift(32)
    f = basis_vector(32, 0)
    K = build_K(A, f, M=8)
    phi = [F(1), F(-2), F(3)]
    KG = compose_with_inner(K, phi)
    pf = polynomial_of(A, phi).matvec(f, exact=True)
    direct = build_K(A, pf, M=8, check_summability=False)
    assert np.allclose(KG.columns, direct.columns, atol=1e-15)


def test_singular_profile_of_orthogonal_columns():
    s = singular_profile(build_K(shift(32), basis_vector(32, 0), M=6))
    assert np.allclose(sorted(s, reverse=True), [1 / math.factorial(n) for n in range(6)])
