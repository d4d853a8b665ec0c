"""Kernel backends: agreement, contracts, and GF(2) elimination properties."""

import numpy as np
import pytest

from gbmem import _kernels
from gbmem._kernels import pyfallback

try:
    from gbmem._kernels import _core
    BACKENDS = [pyfallback, _core]
    HAVE_CORE = True
except ImportError:
    BACKENDS = [pyfallback]
    HAVE_CORE = False


def backend_id(mod):
    return mod.__name__.rsplit(".", 1)[-1]


def csr_from_dense(H):
    m, n = H.shape
    row_ptr = np.zeros(m + 1, dtype=np.int64)
    cols = []
    for i in range(m):
        nz = np.nonzero(H[i])[0]
        cols.append(nz)
        row_ptr[i + 1] = row_ptr[i] + nz.size
    col_idx = (np.concatenate(cols) if cols else
               np.zeros(0)).astype(np.int32)
    counts = np.bincount(col_idx, minlength=n)
    col_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    check_of_edge = np.repeat(np.arange(m), np.diff(row_ptr))
    edge_rm = np.lexsort((check_of_edge, col_idx)).astype(np.int64)
    return row_ptr, col_idx, col_ptr, edge_rm


def random_ldpc(rng, m, n, colw):
    H = np.zeros((m, n), np.uint8)
    for j in range(n):
        rows = rng.choice(m, size=min(colw, m), replace=False)
        H[rows, j] = 1
    for i in range(m):
        if H[i].sum() == 0:
            H[i, rng.integers(n)] = 1
    return H


def run_bp(mod, H, llr, syn, max_iters=60, ms_scale=1.0):
    n = H.shape[1]
    row_ptr, col_idx, col_ptr, edge_rm = csr_from_dense(H)
    post = np.empty(n)
    hard = np.empty(n, np.uint8)
    conv, iters = mod.bp_min_sum(row_ptr, col_idx, col_ptr, edge_rm,
                                 llr.astype(np.float64),
                                 syn.astype(np.uint8),
                                 max_iters, ms_scale, post, hard)
    return conv, iters, post, hard


def test_backend_selected():
    assert _kernels.backend_name in ("compiled", "python")
    if HAVE_CORE:
        assert _kernels.backend_name == "compiled"


@pytest.mark.parametrize("mod", BACKENDS, ids=backend_id)
class TestScatterXor:
    def test_matches_explicit_loop(self, mod):
        rng = np.random.default_rng(3)
        buf = np.zeros((40, 2), np.uint64)
        rows = rng.integers(0, 2 ** 63, (9, 2), dtype=np.uint64)
        shot = rng.integers(0, 40, 120).astype(np.int64)
        mech = rng.integers(0, 9, 120).astype(np.int64)
        ref = buf.copy()
        for s, r in zip(shot, mech):
            ref[s] ^= rows[r]
        mod.scatter_xor(buf, shot, rows, mech)
        assert np.array_equal(buf, ref)

    def test_double_fire_cancels(self, mod):
        buf = np.zeros((3, 1), np.uint64)
        rows = np.array([[0b1011]], np.uint64)
        idx = np.array([1, 1], np.int64)
        mech = np.array([0, 0], np.int64)
        mod.scatter_xor(buf, idx, rows, mech)
        assert buf.sum() == 0

    def test_empty_noop(self, mod):
        buf = np.ones((2, 1), np.uint64)
        mod.scatter_xor(buf, np.zeros(0, np.int64),
                        np.zeros((1, 1), np.uint64), np.zeros(0, np.int64))
        assert np.array_equal(buf, np.ones((2, 1), np.uint64))


@pytest.mark.parametrize("mod", BACKENDS, ids=backend_id)
class TestBpMinSum:
    def test_zero_syndrome_converges_at_iteration_zero(self, mod):
        H = np.array([[1, 1, 0], [0, 1, 1]], np.uint8)
        llr = np.full(3, 4.0)
        conv, iters, post, hard = run_bp(mod, H, llr, np.zeros(2))
        assert conv and iters == 0
        assert hard.sum() == 0
        assert np.array_equal(post, llr)

    def test_repetition_code_single_error(self, mod):
        # parity chain: flipping bit j fires checks j-1 and j
        n = 9
        H = np.zeros((n - 1, n), np.uint8)
        for i in range(n - 1):
            H[i, i] = H[i, i + 1] = 1
        llr = np.full(n, 6.0)
        for j in range(n):
            e = np.zeros(n, np.uint8)
            e[j] = 1
            syn = H @ e % 2
            conv, iters, post, hard = run_bp(mod, H, llr, syn)
            assert conv
            assert np.array_equal(hard, e)

    def test_degree_one_check_pins_variable(self, mod):
        H = np.array([[1]], np.uint8)
        conv, iters, post, hard = run_bp(mod, H, np.array([5.0]),
                                         np.array([1]))
        assert conv and hard[0] == 1
        assert post[0] < 0

    def test_non_convergence_reports_max_iters(self, mod):
        # a single check over two equally plausible bits cannot settle on
        # a satisfying assignment within zero-information min-sum ties
        H = np.array([[1, 1, 1]], np.uint8)
        llr = np.array([2.0, 2.0, 2.0])
        conv, iters, post, hard = run_bp(mod, H, llr, np.array([1]),
                                         max_iters=7)
        if not conv:
            assert iters == 7

    def test_ms_scale_damps_magnitudes(self, mod):
        rng = np.random.default_rng(11)
        H = random_ldpc(rng, 12, 24, 3)
        llr = rng.uniform(1.0, 5.0, 24)
        syn = rng.integers(0, 2, 12)
        _, _, post_full, _ = run_bp(mod, H, llr, syn, max_iters=1)
        _, _, post_half, _ = run_bp(mod, H, llr, syn, max_iters=1,
                                    ms_scale=0.5)
        full_dev = np.abs(post_full - llr)
        half_dev = np.abs(post_half - llr)
        assert np.all(half_dev <= full_dev + 1e-12)
        assert np.allclose(half_dev, 0.5 * full_dev)

    def test_rejects_empty_rows(self, mod):
        H = np.array([[1, 1], [0, 0]], np.uint8)
        row_ptr = np.array([0, 2, 2], np.int64)
        col_idx = np.array([0, 1], np.int32)
        col_ptr = np.array([0, 1, 2], np.int64)
        edge_rm = np.array([0, 1], np.int64)
        with pytest.raises(ValueError):
            mod.bp_min_sum(row_ptr, col_idx, col_ptr, edge_rm,
                           np.full(2, 2.0), np.zeros(2, np.uint8),
                           5, 1.0, np.empty(2), np.empty(2, np.uint8))


@pytest.mark.parametrize("mod", BACKENDS, ids=backend_id)
class TestGf2RrefPacked:
    @staticmethod
    def pack(H, extra_words=1):
        m, n = H.shape
        wh = (n + 63) // 64
        mat = np.zeros((m, wh + extra_words), np.uint64)
        for i in range(m):
            for j in np.nonzero(H[i])[0]:
                mat[i, j >> 6] |= np.uint64(1) << np.uint64(j & 63)
        return mat

    @staticmethod
    def unpack(mat, n):
        bits = np.unpackbits(mat.view(np.uint8), axis=1, bitorder="little")
        return bits[:, :n]

    def test_rank_matches_dense_elimination(self, mod):
        rng = np.random.default_rng(5)
        for _ in range(25):
            m, n = rng.integers(2, 20), rng.integers(2, 40)
            H = rng.integers(0, 2, (m, n)).astype(np.uint8)
            mat = self.pack(H)
            order = np.arange(n, dtype=np.int64)
            rank, pivots = mod.gf2_rref_packed(mat, order)
            # dense elimination oracle
            D = H.copy().astype(np.uint8)
            r = 0
            for c in range(n):
                rows = np.nonzero(D[r:, c])[0]
                if rows.size == 0:
                    continue
                D[[r, r + rows[0]]] = D[[r + rows[0], r]]
                for other in range(m):
                    if other != r and D[other, c]:
                        D[other] ^= D[r]
                r += 1
                if r == m:
                    break
            assert rank == r
            assert len(pivots) == rank

    def test_full_reduction_structure(self, mod):
        rng = np.random.default_rng(8)
        H = rng.integers(0, 2, (10, 30)).astype(np.uint8)
        mat = self.pack(H)
        order = rng.permutation(30).astype(np.int64)
        rank, pivots = mod.gf2_rref_packed(mat, order)
        bits = self.unpack(mat, 30)
        for r, c in enumerate(pivots):
            col = bits[:, c]
            assert col[r] == 1 and col.sum() == 1
        # rows beyond the rank are fully cleared over the candidates
        assert not bits[rank:, :].any()

    def test_syndrome_column_rides_along(self, mod):
        # solve H e = s by elimination with the syndrome in the last word
        rng = np.random.default_rng(13)
        for _ in range(20):
            m, n = 8, 16
            H = random_ldpc(rng, m, n, 3)
            e_true = (rng.random(n) < 0.3).astype(np.uint8)
            s = H @ e_true % 2
            mat = self.pack(H)
            mat[:, -1] = s.astype(np.uint64)
            order = rng.permutation(n).astype(np.int64)
            rank, pivots = mod.gf2_rref_packed(mat, order)
            s_after = (mat[:, -1] & np.uint64(1)).astype(np.uint8)
            assert not s_after[rank:].any()  # consistent system
            e = np.zeros(n, np.uint8)
            e[pivots] = s_after[:rank]
            assert np.array_equal(H @ e % 2, s)

    def test_column_priority_respected(self, mod):
        # the first column in the order that is nonzero must be a pivot
        H = np.array([[1, 1, 0], [0, 1, 1]], np.uint8)
        mat = self.pack(H)
        order = np.array([2, 0, 1], np.int64)
        rank, pivots = mod.gf2_rref_packed(mat, order)
        assert rank == 2
        assert pivots[0] == 2

    def test_excluded_columns_never_pivot(self, mod):
        H = np.array([[1, 1, 1]], np.uint8)
        mat = self.pack(H)
        order = np.array([1], np.int64)
        rank, pivots = mod.gf2_rref_packed(mat, order)
        assert rank == 1 and list(pivots) == [1]


@pytest.mark.skipif(not HAVE_CORE, reason="compiled kernels not built")
class TestBackendAgreement:
    def test_bp_bit_identical(self):
        rng = np.random.default_rng(17)
        for _ in range(60):
            m, n = rng.integers(3, 25), rng.integers(4, 50)
            H = random_ldpc(rng, m, n, 3)
            llr = rng.uniform(0.5, 8.0, n)
            syn = rng.integers(0, 2, m)
            r1 = run_bp(pyfallback, H, llr, syn, ms_scale=0.8)
            r2 = run_bp(_core, H, llr, syn, ms_scale=0.8)
            assert r1[0] == r2[0] and r1[1] == r2[1]
            assert np.array_equal(r1[2], r2[2])
            assert np.array_equal(r1[3], r2[3])

    def test_rref_identical(self):
        rng = np.random.default_rng(19)
        for _ in range(40):
            rows = rng.integers(2, 30)
            nbits = rng.integers(2, 90)
            W = (nbits + 63) // 64 + 1
            mat = rng.integers(0, 2 ** 63, (rows, W), dtype=np.uint64)
            order = rng.permutation(nbits).astype(np.int64)
            m1, m2 = mat.copy(), mat.copy()
            k1, p1 = pyfallback.gf2_rref_packed(m1, order)
            k2, p2 = _core.gf2_rref_packed(m2, order)
            assert k1 == k2
            assert np.array_equal(p1, p2)
            assert np.array_equal(m1, m2)

    def test_scatter_identical(self):
        rng = np.random.default_rng(23)
        buf1 = np.zeros((64, 4), np.uint64)
        buf2 = buf1.copy()
        rows = rng.integers(0, 2 ** 63, (12, 4), dtype=np.uint64)
        shot = rng.integers(0, 64, 400).astype(np.int64)
        mech = rng.integers(0, 12, 400).astype(np.int64)
        pyfallback.scatter_xor(buf1, shot, rows, mech)
        _core.scatter_xor(buf2, shot, rows, mech)
        assert np.array_equal(buf1, buf2)
