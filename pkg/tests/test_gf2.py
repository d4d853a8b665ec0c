import numpy as np
import pytest

from gbmem.gf2 import (
    BitMatrix,
    hstack,
    inverse,
    matvec,
    mul,
    nullspace,
    quotient_basis,
    rank,
    rref,
)


# Independent oracle: plain integer Gaussian elimination mod 2.
def dense_rank(arr):
    a = np.array(arr, dtype=np.uint8) % 2
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if a[i, c]:
                piv = i
                break
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
    return r


def test_rank_identity_and_zero():
    assert rank(BitMatrix.identity(3)) == 3
    assert rank(BitMatrix.zeros(4, 7)) == 0


def test_pack_roundtrip_wide():
    rng = np.random.default_rng(7)
    arr = rng.integers(0, 2, size=(5, 130), dtype=np.uint8)
    assert np.array_equal(BitMatrix.from_dense(arr).to_dense(), arr)


def test_rank_matches_dense_oracle_random():
    rng = np.random.default_rng(11)
    for rows, cols in [(8, 8), (12, 30), (30, 12), (17, 70), (1, 1)]:
        for _ in range(10):
            arr = rng.integers(0, 2, size=(rows, cols), dtype=np.uint8)
            M = BitMatrix.from_dense(arr)
            assert rank(M) == dense_rank(arr)
            # rank is transpose-invariant
            assert rank(M.transpose()) == dense_rank(arr)


def test_rref_idempotent_and_rank_preserving():
    rng = np.random.default_rng(3)
    arr = rng.integers(0, 2, size=(10, 24), dtype=np.uint8)
    M = BitMatrix.from_dense(arr)
    R1, piv1 = rref(M)
    R2, piv2 = rref(R1)
    assert R1 == R2 and piv1 == piv2
    assert len(piv1) == dense_rank(arr)


def test_nullspace_annihilates_and_has_right_dimension():
    rng = np.random.default_rng(5)
    for rows, cols in [(6, 10), (10, 6), (9, 9)]:
        arr = rng.integers(0, 2, size=(rows, cols), dtype=np.uint8)
        M = BitMatrix.from_dense(arr)
        N = nullspace(M)
        assert N.rows == cols - dense_rank(arr)
        dense = N.to_dense()
        for i in range(N.rows):
            assert not matvec(M, dense[i]).any()
        # basis rows are independent
        assert rank(N) == N.rows


def test_nullspace_trivial_cases():
    assert nullspace(BitMatrix.identity(4)).rows == 0
    assert nullspace(BitMatrix.zeros(2, 3)).rows == 3


def test_quotient_basis_identity_case():
    N = BitMatrix.identity(2)
    R = BitMatrix.from_dense([[1, 0]])
    Q = quotient_basis(N, R)
    assert Q.rows == 1
    # the representative spans the missing coset: reducing against R must
    # leave the second coordinate set
    assert Q.to_dense()[0, 1] == 1


def test_quotient_basis_dimension_random():
    rng = np.random.default_rng(19)
    for _ in range(10):
        full = rng.integers(0, 2, size=(12, 20), dtype=np.uint8)
        N = BitMatrix.from_dense(full)
        sub = full[rng.choice(12, size=5, replace=False)]
        R = BitMatrix.from_dense(sub)
        Q = quotient_basis(N, R)
        assert Q.rows == dense_rank(full) - dense_rank(sub)
        # every selected row is independent of rowspace(R)
        stacked = BitMatrix.from_dense(np.concatenate([sub, Q.to_dense()]))
        assert rank(stacked) == dense_rank(sub) + Q.rows


def test_quotient_basis_rejects_non_subspace():
    N = BitMatrix.from_dense([[1, 0, 0]])
    R = BitMatrix.from_dense([[0, 1, 0]])
    with pytest.raises(ValueError):
        quotient_basis(N, R)


def test_mul_matches_dense():
    rng = np.random.default_rng(23)
    A = rng.integers(0, 2, size=(7, 13), dtype=np.uint8)
    B = rng.integers(0, 2, size=(13, 9), dtype=np.uint8)
    C = mul(BitMatrix.from_dense(A), BitMatrix.from_dense(B))
    assert np.array_equal(C.to_dense(), (A.astype(int) @ B.astype(int)) % 2)


def test_inverse_roundtrip():
    rng = np.random.default_rng(29)
    while True:
        arr = rng.integers(0, 2, size=(6, 6), dtype=np.uint8)
        if dense_rank(arr) == 6:
            break
    M = BitMatrix.from_dense(arr)
    Minv = inverse(M)
    assert mul(M, Minv) == BitMatrix.identity(6)
    assert mul(Minv, M) == BitMatrix.identity(6)


def test_inverse_rejects_singular():
    with pytest.raises(ValueError):
        inverse(BitMatrix.zeros(3, 3))


def test_hstack_and_weights():
    A = BitMatrix.from_dense([[1, 0], [1, 1]])
    B = BitMatrix.from_dense([[0, 1], [1, 1]])
    H = hstack(A, B)
    assert np.array_equal(H.to_dense(), [[1, 0, 0, 1], [1, 1, 1, 1]])
    assert list(H.weights()) == [2, 4]
