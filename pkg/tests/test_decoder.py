"""BP-OSD decoder tests.

The exhaustive-minimum checks run against small frozen instances where
n - rank(H) <= 2; there the combination sweep enumerates the whole
solution coset, so equality with brute force over all bit patterns is
structural, not statistical.  Weights are compared with the exact same
float expression the decoder uses (lam @ e), making the equality exact
in floating point rather than approximate.
"""

import numpy as np
import pytest

from gbmem import circuits, codes, decoder, detectors, scheduler
from gbmem.decoder import BpOsd, DecoderConfig, bp_decode, decode_split, osd_postprocess


def dense_rank(M):
    D = np.array(M, dtype=np.uint8) % 2
    m, n = D.shape
    r = 0
    for c in range(n):
        rows = np.nonzero(D[r:, c])[0]
        if rows.size == 0:
            continue
        D[[r, r + rows[0]]] = D[[r + rows[0], r]]
        for o in range(m):
            if o != r and D[o, c]:
                D[o] ^= D[r]
        r += 1
        if r == m:
            break
    return r


def frozen_instance(seed=42, m=10, n=12, density=0.35):
    """Random full-row-rank H with no empty rows or columns."""
    rng = np.random.default_rng(seed)
    while True:
        H = (rng.random((m, n)) < density).astype(np.uint8)
        if H.sum(0).all() and H.sum(1).all() and dense_rank(H) == m:
            priors = rng.uniform(0.01, 0.4, n)
            return H, priors, rng


def all_patterns(n):
    return ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1).astype(np.uint8)


class TestConfig:
    def test_defaults(self):
        cfg = DecoderConfig()
        assert cfg.max_iters == 10000
        assert cfg.osd_order == 10
        assert cfg.osd_method == "combination-sweep"

    @pytest.mark.parametrize("kw", [
        {"max_iters": 0},
        {"ms_scale": 0.0},
        {"ms_scale": 1.5},
        {"bp_method": "sum-product"},
        {"osd_method": "exhaustive"},
        {"osd_order": -1},
    ])
    def test_rejects_bad_values(self, kw):
        with pytest.raises(ValueError):
            DecoderConfig(**kw)


class TestConstruction:
    def test_prior_bounds(self):
        H = np.eye(3, dtype=np.uint8)
        with pytest.raises(ValueError):
            BpOsd(H, [0.1, 0.0, 0.1])
        with pytest.raises(ValueError):
            BpOsd(H, [0.1, 0.6, 0.1])

    def test_zero_column_rejected(self):
        H = np.array([[1, 0], [1, 0]], dtype=np.uint8)
        with pytest.raises(ValueError):
            BpOsd(H, [0.1, 0.1])

    def test_length_mismatch(self):
        H = np.eye(3, dtype=np.uint8)
        with pytest.raises(ValueError):
            BpOsd(H, [0.1, 0.1])

    def test_rank_zero_matrix_allowed(self):
        # all-zero H stays constructible so a nonzero syndrome can be
        # reported unsatisfiable instead of crashing
        dec = BpOsd(np.zeros((2, 3), dtype=np.uint8), [0.1] * 3)
        res = dec.decode([1, 0])
        assert res.unsatisfiable
        assert not res.correction.any()
        res0 = dec.decode([0, 0])
        assert res0.converged and not res0.unsatisfiable


class TestBpPaths:
    def test_zero_syndrome_trivial(self):
        H, priors, _ = frozen_instance()
        dec = BpOsd(H, priors)
        res = dec.decode(np.zeros(10, dtype=np.uint8))
        assert res.converged
        assert res.iterations == 0
        assert not res.used_osd
        assert not res.correction.any()
        assert res.soft_weight == 0.0

    def test_single_variable_pinned(self):
        # one mechanism, one check: the syndrome forces the answer
        dec = BpOsd(np.array([[1]], dtype=np.uint8), [0.05])
        res = dec.decode([1])
        assert res.converged and res.correction.tolist() == [1]
        res = dec.decode([0])
        assert res.correction.tolist() == [0]

    def test_code_capacity_weight_one_exact(self):
        # every single-qubit X error on the [[72,12,6]] code is decoded
        # back to itself by plain BP (syndrome weight >= 1, d = 6)
        spec, _ = codes.catalog()["gb72_12_6"]
        code = codes.build_code(spec)
        dec = BpOsd.from_code_capacity(code, "X", 0.01,
                                       config=DecoderConfig(max_iters=50))
        Hz = code.Gz.to_dense()
        for q in range(code.n):
            e = np.zeros(code.n, dtype=np.uint8)
            e[q] = 1
            syn = Hz @ e % 2
            res = dec.decode(syn)
            assert res.converged, f"BP did not converge on qubit {q}"
            assert not res.used_osd
            assert np.array_equal(res.correction, e)

    def test_weight_two_no_logical_failure(self):
        spec, _ = codes.catalog()["gb72_12_6"]
        code = codes.build_code(spec)
        Lz = code.logicals_z.to_dense()
        Hz = code.Gz.to_dense()
        dec = BpOsd.from_code_capacity(code, "X", 0.01)
        rng = np.random.default_rng(7)
        for _ in range(120):
            q = rng.choice(code.n, size=2, replace=False)
            e = np.zeros(code.n, dtype=np.uint8)
            e[q] = 1
            res = dec.decode(Hz @ e % 2)
            assert np.array_equal(Hz @ res.correction % 2, Hz @ e % 2)
            assert np.array_equal(res.predicted_observables, Lz @ e % 2)

    def test_nonconvergence_reported(self):
        # a cycle of even checks with an odd syndrome pattern that plain
        # min-sum cannot settle: force max_iters tiny on a random instance
        H, priors, rng = frozen_instance(seed=5)
        dec = BpOsd(H, priors, config=DecoderConfig(max_iters=1))
        hit = False
        for _ in range(50):
            s = rng.integers(0, 2, 10).astype(np.uint8)
            bp = dec.bp(s)
            if not bp.converged:
                assert bp.iterations == 1
                hit = True
        assert hit


class TestOsd:
    def test_order_zero_is_pivot_solve(self):
        # lambda = 0 must return exactly the rank-profile solution of the
        # reliability-sorted system, with every free position left at zero
        from gbmem._kernels import gf2_rref_packed

        H, priors, rng = frozen_instance(seed=11)
        dec0 = BpOsd(H, priors, config=DecoderConfig(osd_order=0))
        lam = np.log((1 - priors) / priors)
        for _ in range(30):
            s = rng.integers(0, 2, 10).astype(np.uint8)
            bp = dec0.bp(s)
            res = dec0.postprocess(s, bp.soft)

            order = np.argsort(np.abs(bp.soft), kind="stable")
            n = H.shape[1]
            words = (n + 64) // 64
            packed = np.zeros((10, words), dtype=np.uint64)
            for i in range(10):
                for j in range(n):
                    if H[i, j]:
                        packed[i, j // 64] |= np.uint64(1) << np.uint64(j % 64)
                if s[i]:
                    packed[i, n // 64] |= np.uint64(1) << np.uint64(n % 64)
            rank, pivots = gf2_rref_packed(packed, order.astype(np.int64))
            expect = np.zeros(n, dtype=np.uint8)
            for r in range(rank):
                bit = (packed[r, n // 64] >> np.uint64(n % 64)) & np.uint64(1)
                expect[pivots[r]] = np.uint8(bit)
            assert np.array_equal(res.correction, expect)
            assert res.soft_weight == float(lam @ expect.astype(np.float64))

    def test_sweep_never_worse_than_order_zero(self):
        H, priors, rng = frozen_instance(seed=23)
        dec0 = BpOsd(H, priors, config=DecoderConfig(osd_order=0))
        dec10 = BpOsd(H, priors, config=DecoderConfig(osd_order=10))
        for _ in range(60):
            s = rng.integers(0, 2, 10).astype(np.uint8)
            soft = dec0.bp(s).soft
            w0 = dec0.postprocess(s, soft).soft_weight
            w10 = dec10.postprocess(s, soft).soft_weight
            assert w10 <= w0 + 1e-12

    def test_exhaustive_minimum_100_syndromes(self):
        # coset dimension n - rank = 2: the sweep covers every consistent
        # pattern, so the returned weight must equal the global minimum
        # exactly (same float expression on both sides)
        H, priors, rng = frozen_instance(seed=42)
        dec = BpOsd(H, priors, config=DecoderConfig(max_iters=20))
        lam = np.log((1 - priors) / priors)
        pats = all_patterns(12)
        syns = pats @ H.T % 2
        for _ in range(100):
            s = rng.integers(0, 2, 10).astype(np.uint8)
            bp = dec.bp(s)
            res = dec.postprocess(s, bp.soft)
            assert not res.unsatisfiable
            assert np.array_equal(H @ res.correction % 2, s)
            consistent = pats[(syns == s).all(axis=1)]
            brute = min(float(lam @ e.astype(np.float64)) for e in consistent)
            assert res.soft_weight == brute

    def test_deterministic_across_instances(self):
        # uniform priors create weight ties; the packed-bits tie-break
        # must make two fresh decoders agree bit for bit
        H, _, rng = frozen_instance(seed=3)
        priors = np.full(12, 0.1)
        a = BpOsd(H, priors)
        b = BpOsd(H, priors)
        for _ in range(40):
            s = rng.integers(0, 2, 10).astype(np.uint8)
            soft = a.bp(s).soft
            ra = a.postprocess(s, soft)
            rb = b.postprocess(s, soft)
            assert np.array_equal(ra.correction, rb.correction)
            assert ra.soft_weight == rb.soft_weight

    def test_unsatisfiable_flagged_not_raised(self):
        dec = BpOsd(np.array([[1, 1], [1, 1]], dtype=np.uint8), [0.1, 0.1])
        res = dec.decode([1, 0])
        assert res.unsatisfiable
        assert not res.converged
        assert not res.correction.any()


class TestModuleFunctions:
    def test_bp_decode_wrapper(self):
        H = np.array([[1]], dtype=np.uint8)
        res = bp_decode(H, [0.05], [1])
        assert res.hard.tolist() == [1]
        assert res.converged

    def test_osd_postprocess_wrapper(self):
        H, priors, _ = frozen_instance(seed=9)
        s = np.zeros(10, dtype=np.uint8)
        s[0] = 1
        soft = np.log((1 - priors) / priors)
        res = osd_postprocess(H, priors, s, soft)
        assert res.used_osd
        assert np.array_equal(H @ res.correction % 2, s)


@pytest.fixture(scope="module")
def small_model():
    spec, _ = codes.catalog()["gb72_12_6"]
    code = codes.build_code(spec)
    sched = scheduler.schedule_round(spec)
    circ = circuits.build_memory_circuit(
        code, sched, circuits.NoiseParams(p=1e-3), rounds=2)
    return code, detectors.build_detector_model(circ, code)


class TestSplitDecoder:
    def test_zero_syndrome(self, small_model):
        _, model = small_model
        res = decode_split(model, np.zeros(model.n_detectors, dtype=np.uint8))
        assert res.converged
        assert not res.correction.any()
        assert not res.predicted_observables.any()

    def test_single_mechanism_roundtrip(self, small_model):
        # fire one mechanism per view: its detector footprint must decode
        # to a correction with the same observable effect, and the other
        # view must stay identically zero
        _, model = small_model
        cfg = DecoderConfig(max_iters=200)
        splitter = decoder.SplitDecoder(model, cfg)
        rng = np.random.default_rng(19)
        for name in ("X", "Z"):
            sub = model.sub[name]
            other = model.sub["Z" if name == "X" else "X"]
            for mech in rng.choice(sub.n_mechanisms, size=8, replace=False):
                dets = sub.row_idx[sub.col_ptr[mech]:sub.col_ptr[mech + 1]]
                syn = np.zeros(model.n_detectors, dtype=np.uint8)
                syn[dets + sub.det_offset] = 1
                res = splitter.decode(syn)
                assert not res.unsatisfiable
                # decoded observable flip matches the injected mechanism
                k = model.n_observables
                expect = np.zeros(k, dtype=np.uint8)
                for b in range(k):
                    if sub.obs_words[mech, b // 64] >> np.uint64(b % 64) & np.uint64(1):
                        expect[b] = 1
                assert np.array_equal(res.predicted_observables, expect)
                # correction confined to the fired view
                lo = 0 if sub.det_offset <= other.det_offset else other.n_mechanisms
                span = res.correction[lo:lo + sub.n_mechanisms]
                rest = np.delete(res.correction,
                                 np.arange(lo, lo + sub.n_mechanisms))
                assert span.any()
                assert not rest.any()
