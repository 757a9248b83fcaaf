from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kleinforms.matrix import (
    Mat,
    MatrixError,
    all_vectors,
    anti_identity,
    diag_of_conjugation,
    hankel,
    identity,
    in_h_family,
    is_alternating_gram,
    is_lower_hankel,
    is_upper_toeplitz,
    lh_coset_reduce,
    lh_from_coeffs,
    lh_index,
    parse_matrix_lines,
    split_symmetric_hollow,
    tau_transpose,
    to_text,
    toeplitz,
    ut_from_coeffs,
)

from conftest import GF2, GF4


def rand_mat(F, rng, r, c=None):
    return Mat.wrap(F, rng.integers(0, F.order, size=(r, r if c is None else c)))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_anti_identity_times_toeplitz_is_hankel(n):
    for F in (GF2, GF4):
        J = anti_identity(F, n)
        for i in range(1, n + 1):
            for x in range(1, F.order):
                assert J @ toeplitz(F, n, n, i, x) == hankel(F, n, n, n + i, x)


def test_toeplitz_hankel_shapes():
    assert toeplitz(GF2, 2, 3, 2, 1).tolist() == [[0, 1, 0], [0, 0, 1]]
    assert hankel(GF2, 2, 2, 3, 1).tolist() == [[0, 1], [1, 0]]
    assert hankel(GF2, 2, 2, 9, 1).is_zero()


def test_upper_toeplitz_commute(rng):
    for F in (GF2, GF4):
        for n in range(1, 7):
            for _ in range(20):
                X = ut_from_coeffs(F, n, rng.integers(0, F.order, n).tolist())
                Y = ut_from_coeffs(F, n, rng.integers(0, F.order, n).tolist())
                assert X @ Y == Y @ X
                assert is_upper_toeplitz(X @ Y)


@pytest.mark.parametrize("F", [GF2, GF4], ids=["q2", "q4"])
def test_lower_hankel_rank(F):
    # a lower Hankel matrix with leading index l has rank n + 1 - l
    for n in range(1, 6 if F is GF2 else 4):
        for coeffs in all_vectors(F, n):
            A = lh_from_coeffs(F, n, coeffs.tolist())
            assert is_lower_hankel(A)
            assert A.rank() == n + 1 - lh_index(A)


def test_diag_of_conjugation_matches_product(rng):
    for trial in range(10_000):
        F = GF2 if trial % 2 else GF4
        n = int(rng.integers(1, 7))
        c = int(rng.integers(1, 7))
        A = rand_mat(F, rng, n)
        A = A + A.T + Mat.wrap(F, np.diag(rng.integers(0, F.order, n)))
        X = rand_mat(F, rng, n, c)
        assert diag_of_conjugation(A, X) == (X.T @ A @ X).diagonal()


def test_diag_of_conjugation_rejects_asymmetric():
    with pytest.raises(MatrixError):
        diag_of_conjugation(Mat(GF2, [[0, 1], [0, 0]]), identity(GF2, 2))


@pytest.mark.parametrize("F", [GF2, GF4], ids=["q2", "q4"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_lh_coset_reduce_exhaustive(F, n):
    uts = [ut_from_coeffs(F, n, c.tolist()) for c in all_vectors(F, n)]
    units = [B for B in uts if B.is_invertible()]
    for coeffs in all_vectors(F, n):
        A = lh_from_coeffs(F, n, coeffs.tolist())
        if A.is_zero():
            continue
        r = lh_index(A)
        for s in range(0, (n + 1 - r) // 2 + 1):
            vanish = r + 2 * s == n + 1
            C, B = lh_coset_reduce(A, s, allow_vanishing=vanish)
            assert A @ B @ B == C
            assert in_h_family(C, r + 2 * s)
            if s == 0:
                # the reduced form is the unique family member in A's square class
                hits = [U for U in units if in_h_family(A @ U @ U, r)]
                assert {(A @ U @ U).key() for U in hits} == {C.key()}


def test_lh_coset_reduce_bounds():
    A = lh_from_coeffs(GF2, 3, [0, 1, 0])
    with pytest.raises(MatrixError):
        lh_coset_reduce(A, 1)
    C, _ = lh_coset_reduce(A, 1, allow_vanishing=True)
    assert C.is_zero()
    with pytest.raises(MatrixError):
        lh_coset_reduce(lh_from_coeffs(GF2, 3, [0, 0, 0]), 0)


@given(st.integers(1, 6), st.integers(0, 2**31))
def test_split_symmetric_hollow(n, seed):
    rng = np.random.default_rng(seed)
    for F in (GF2, GF4):
        U = np.triu(rng.integers(0, F.order, (n, n)), 1)
        D = Mat.wrap(F, U ^ U.T)
        Z = split_symmetric_hollow(D)
        assert Z + Z.T == D
    with pytest.raises(MatrixError):
        split_symmetric_hollow(identity(GF2, 2))


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31))
def test_tau_transpose(r, c, seed):
    rng = np.random.default_rng(seed)
    A = rand_mat(GF4, rng, r, c)
    assert tau_transpose(tau_transpose(A)) == A
    X = ut_from_coeffs(GF4, r, rng.integers(0, 4, r).tolist())
    # upper Toeplitz matrices are fixed by the anti-transpose
    assert tau_transpose(X) == X


def test_arithmetic_and_inverse(rng):
    for F in (GF2, GF4):
        for _ in range(50):
            A = rand_mat(F, rng, 4)
            if A.is_invertible():
                assert A @ A.inverse() == identity(F, 4)
            assert A + A == Mat.wrap(F, np.zeros((4, 4), dtype=np.int64))
            assert all((A @ v).is_zero() for v in A.nullspace())
            assert A.rank() + len(A.nullspace()) == 4


def test_alternating_predicate():
    assert is_alternating_gram(Mat(GF2, [[0, 1], [1, 0]]))
    assert not is_alternating_gram(Mat(GF2, [[1, 1], [1, 0]]))


def test_text_round_trip(rng):
    A = rand_mat(GF4, rng, 3, 2)
    lines = to_text(A).splitlines()
    assert parse_matrix_lines(GF4, lines[0], lines[1:]) == A
    with pytest.raises(MatrixError):
        parse_matrix_lines(GF4, "matrix 2 2", ["1 0"])
    with pytest.raises(Exception):
        Mat(GF2, [[2]])


def test_exhaustive_h_family_membership_small():
    # brute force: family members for r=1, n=3 are H_4 + H_5 X^2
    n, r = 3, 1
    members = set()
    for xs in product(range(2), repeat=n):
        X = ut_from_coeffs(GF2, n, list(xs))
        C = hankel(GF2, n, n, n + r, 1) + hankel(GF2, n, n, n + r + 1, 1) @ X @ X
        members.add(C.key())
    for coeffs in all_vectors(GF2, n):
        C = lh_from_coeffs(GF2, n, coeffs.tolist())
        assert in_h_family(C, r) == (C.key() in members)
