"""Belief-propagation decoding with ordered-statistics post-processing.

A decoding problem is a sparse GF(2) parity-check matrix whose columns are
independent error mechanisms with prior probabilities and whose rows are
parity checks (detectors).  Decoding runs flooding min-sum BP first; when
the hard decision fails to satisfy the syndrome, ordered-statistics
post-processing (OSD) re-solves the system exactly:

  - columns are processed in order of increasing confidence |L| of the BP
    soft output, so Gaussian elimination places the pivot (solved) set on
    the most error-prone positions and the free positions - the most
    reliable ones - are fixed to zero in the base solution;
  - the combination sweep then evaluates all single flips of free
    positions, plus all pairs among the `osd_order` least-confident free
    positions (order 0 skips the sweep entirely and keeps the base
    solution);
  - candidates are ranked by their prior log-likelihood weight
    sum(log((1-p_j)/p_j) for j in the pattern), i.e. by channel
    likelihood; ties break to the lexicographically smallest pattern.

Every step is deterministic, and the OSD output always satisfies
H @ e = syndrome; a syndrome outside the column span is reported with the
`unsatisfiable` flag instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .codes import CssCode
from .detectors import DetectorModel, SubProblem

_ONE = np.uint64(1)


@dataclass(frozen=True)
class DecoderConfig:
    """Knobs for BP and the OSD sweep; defaults match common practice."""

    max_iters: int = 10000
    bp_method: str = "min-sum"
    ms_scale: float = 1.0
    osd_method: str = "combination-sweep"
    osd_order: int = 10

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0.0 < self.ms_scale <= 1.0:
            raise ValueError("ms_scale must satisfy 0 < scale <= 1")
        if self.osd_order < 0:
            raise ValueError("osd_order must be nonnegative")
        if self.bp_method != "min-sum":
            raise ValueError(f"unknown bp_method {self.bp_method!r}")
        if self.osd_method != "combination-sweep":
            raise ValueError(f"unknown osd_method {self.osd_method!r}")


@dataclass
class BpResult:
    """Soft and hard output of belief propagation alone."""

    soft: np.ndarray
    hard: np.ndarray
    converged: bool
    iterations: int


@dataclass
class DecodeResult:
    correction: np.ndarray
    converged: bool
    used_osd: bool
    predicted_observables: np.ndarray
    iterations: int = 0
    soft_weight: float = 0.0
    unsatisfiable: bool = False


def _pack_bit_rows(dense: np.ndarray, n_bits: int) -> np.ndarray:
    """Pack rows of a dense 0/1 array into little-endian uint64 words."""
    rows = dense.shape[0]
    w = max(1, (n_bits + 63) // 64)
    padded = np.zeros((rows, w * 64), dtype=np.uint8)
    if n_bits:
        padded[:, :n_bits] = dense
    return np.packbits(padded, axis=1,
                       bitorder="little").view(np.uint64).copy()


class BpOsd:
    """A BP-OSD decoder bound to one parity-check problem.

    Construction precomputes the sparse edge structure and the packed
    elimination template, so `decode` can run in a hot loop.
    """

    def __init__(self, H, priors, observables=None,
                 config: DecoderConfig | None = None):
        H = np.asarray(H, dtype=np.uint8)
        if H.ndim != 2:
            raise ValueError("H must be a 2-d matrix")
        if H.size and H.max() > 1:
            raise ValueError("H must be over GF(2)")
        m, n = H.shape
        row_ptr = np.zeros(m + 1, dtype=np.int64)
        cols = []
        for i in range(m):
            nz = np.nonzero(H[i])[0]
            cols.append(nz)
            row_ptr[i + 1] = row_ptr[i] + nz.size
        col_idx = (np.concatenate(cols) if cols
                   else np.zeros(0)).astype(np.int32)
        obs_words = None
        n_obs = 0
        if observables is not None:
            obs = np.asarray(observables, dtype=np.uint8)
            if obs.ndim != 2 or obs.shape[1] != n:
                raise ValueError("observables must be (k, n_mechanisms)")
            n_obs = obs.shape[0]
            obs_words = _pack_bit_rows(obs.T, n_obs)
        self._init_arrays(m, n, row_ptr, col_idx,
                          np.asarray(priors, dtype=np.float64),
                          obs_words, n_obs, config)

    @classmethod
    def from_subproblem(cls, sub: SubProblem, n_observables: int,
                        config: DecoderConfig | None = None) -> "BpOsd":
        """Bind to one CSS view of a detector model."""
        self = cls.__new__(cls)
        self._init_arrays(sub.n_detectors, sub.n_mechanisms,
                          sub.row_ptr.astype(np.int64),
                          sub.col_idx.astype(np.int32),
                          sub.priors.astype(np.float64),
                          sub.obs_words, n_observables, config)
        return self

    @classmethod
    def from_code_capacity(cls, code: CssCode, error_type: str, p: float,
                           config: DecoderConfig | None = None) -> "BpOsd":
        """Single-type data-error problem for a CSS code.

        X errors flip the checks of Gz and are graded against the Z
        logical operators; Z errors mirror that with Gx and the X
        logicals.
        """
        if error_type == "X":
            H = code.Gz.to_dense()
            obs = code.logicals_z.to_dense()
        elif error_type == "Z":
            H = code.Gx.to_dense()
            obs = code.logicals_x.to_dense()
        else:
            raise ValueError(f"unknown error type {error_type!r}")
        priors = np.full(H.shape[1], p)
        return cls(H, priors, observables=obs, config=config)

    def _init_arrays(self, m, n, row_ptr, col_idx, priors,
                     obs_words, n_observables, config):
        self.cfg = config if config is not None else DecoderConfig()
        self.m = int(m)
        self.n = int(n)
        if priors.shape != (self.n,):
            raise ValueError("need one prior per mechanism")
        if self.n and not ((priors > 0.0) & (priors <= 0.5)).all():
            raise ValueError("priors must lie in (0, 0.5]")
        self.priors = priors
        self.prior_llr = (np.log((1.0 - priors) / priors) if self.n
                          else np.zeros(0))
        self.row_ptr = row_ptr
        self.col_idx = col_idx
        counts = np.bincount(col_idx, minlength=self.n) if self.n else \
            np.zeros(0, dtype=np.int64)
        # an all-zero H (rank 0) is kept decodable so a nonzero syndrome
        # can be flagged unsatisfiable; a zero column in an otherwise
        # nonzero H is a modeling error
        self._no_edges = col_idx.size == 0
        if self.n and col_idx.size and counts.min() == 0:
            raise ValueError("every mechanism must touch at least one check")
        self.col_ptr = np.concatenate(
            [[0], np.cumsum(counts)]).astype(np.int64)
        deg = np.diff(row_ptr)
        rows_of_edge = np.repeat(np.arange(self.m), deg)
        self.edge_rm = np.lexsort(
            (rows_of_edge, col_idx)).astype(np.int64)
        # checks with no mechanisms cannot run BP; they are skipped there
        # and their syndrome bits must stay zero
        self._active = np.flatnonzero(deg > 0)
        self._inactive = np.flatnonzero(deg == 0)
        self._all_active = self._active.size == self.m
        self._bp_row_ptr = (row_ptr if self._all_active else
                            np.concatenate(
                                [[0], np.cumsum(deg[self._active])]
                            ).astype(np.int64))
        wh = max(1, (self.n + 63) // 64)
        packed = np.zeros((self.m, wh + 1), dtype=np.uint64)
        if col_idx.size:
            np.bitwise_or.at(
                packed,
                (rows_of_edge, (col_idx >> 6).astype(np.int64)),
                _ONE << (col_idx.astype(np.uint64) & np.uint64(63)))
        self._packed = packed
        self.obs_words = obs_words
        self.n_observables = int(n_observables)

    # -- belief propagation ------------------------------------------------

    def bp(self, syndrome) -> BpResult:
        """Run min-sum BP only; soft output is the posterior LLR vector."""
        syn = self._as_syndrome(syndrome)
        post = self.prior_llr.astype(np.float64)
        hard = (post < 0).astype(np.uint8)
        if self.n == 0 or self._no_edges or not syn.any():
            return BpResult(post, hard, bool(not syn.any()), 0)
        if not self._all_active and syn[self._inactive].any():
            return BpResult(post, hard, False, 0)
        bp_syn = syn if self._all_active else syn[self._active]
        post = np.empty(self.n)
        hard = np.empty(self.n, np.uint8)
        conv, iters = _kernels.bp_min_sum(
            self._bp_row_ptr, self.col_idx, self.col_ptr, self.edge_rm,
            self.prior_llr, bp_syn, self.cfg.max_iters, self.cfg.ms_scale,
            post, hard)
        return BpResult(post, hard, bool(conv), int(iters))

    # -- ordered statistics ------------------------------------------------

    def postprocess(self, syndrome, soft) -> DecodeResult:
        """OSD on a given soft output (used when BP did not converge)."""
        syn = self._as_syndrome(syndrome)
        correction, weight, unsat = self._osd(
            syn, np.asarray(soft, dtype=np.float64))
        return self._result(correction, syn, converged=False,
                            used_osd=True, iterations=0,
                            soft_weight=weight, unsatisfiable=unsat)

    def _osd(self, syn, soft):
        n = self.n
        zeros = np.zeros(n, dtype=np.uint8)
        if n == 0:
            return zeros, 0.0, bool(syn.any())
        mat = self._packed.copy()
        mat[:, -1] = syn.astype(np.uint64)
        order = np.argsort(np.abs(soft), kind="stable").astype(np.int64)
        rank, pivots = _kernels.gf2_rref_packed(mat, order)
        s_after = (mat[:, -1] & _ONE).astype(np.uint8)
        if s_after[rank:].any():
            return zeros, 0.0, True
        pivbits = s_after[:rank]
        lam = self.prior_llr

        e0 = zeros.copy()
        e0[pivots] = pivbits
        is_piv = np.zeros(n, dtype=bool)
        is_piv[pivots] = True
        nonpiv = order[~is_piv[order]]

        if self.cfg.osd_order == 0 or nonpiv.size == 0:
            return e0, self._weight(e0), False

        bits = np.unpackbits(mat[:rank].view(np.uint8), axis=1,
                             bitorder="little")[:, :n]
        B = bits[:, nonpiv].astype(np.float64)
        lam_piv = lam[pivots]
        base = float(lam_piv @ pivbits)
        signed = lam_piv * (1.0 - 2.0 * pivbits)
        weights = [base]
        w1 = lam[nonpiv] + base + signed @ B
        weights.extend(w1.tolist())
        L = min(self.cfg.osd_order, nonpiv.size)
        pair_list = [(i, j) for i in range(L) for j in range(i + 1, L)]
        Bu8 = bits[:, nonpiv]
        for i, j in pair_list:
            pb = pivbits ^ Bu8[:, i] ^ Bu8[:, j]
            weights.append(float(lam[nonpiv[i]] + lam[nonpiv[j]] +
                                 lam_piv @ pb))
        weights = np.asarray(weights)
        cutoff = weights.min() + 1e-9 * (1.0 + abs(weights.min()))
        best = None
        for idx in np.flatnonzero(weights <= cutoff):
            e = self._materialize(int(idx), e0, pivots, pivbits, nonpiv,
                                  Bu8, pair_list)
            key = (self._weight(e), np.packbits(e).tobytes())
            if best is None or key < best[0]:
                best = (key, e)
        e, weight = best[1], best[0][0]
        return e, weight, False

    def _materialize(self, idx, e0, pivots, pivbits, nonpiv, Bu8,
                     pair_list):
        if idx == 0:
            return e0.copy()
        e = np.zeros(self.n, dtype=np.uint8)
        if idx <= nonpiv.size:
            j = idx - 1
            e[nonpiv[j]] = 1
            e[pivots] = pivbits ^ Bu8[:, j]
        else:
            i, j = pair_list[idx - 1 - nonpiv.size]
            e[nonpiv[i]] = 1
            e[nonpiv[j]] = 1
            e[pivots] = pivbits ^ Bu8[:, i] ^ Bu8[:, j]
        return e

    def _weight(self, e):
        """Canonical prior-likelihood weight of a correction pattern."""
        return float(self.prior_llr @ e.astype(np.float64))

    # -- full pipeline -----------------------------------------------------

    def decode(self, syndrome) -> DecodeResult:
        syn = self._as_syndrome(syndrome)
        if self.n == 0 or not syn.any():
            zero = np.zeros(self.n, dtype=np.uint8)
            unsat = bool(syn.any())
            return self._result(zero, syn, converged=not unsat,
                                used_osd=False, iterations=0,
                                soft_weight=0.0, unsatisfiable=unsat)
        bp = self.bp(syndrome)
        if bp.converged:
            e = bp.hard.copy()
            return self._result(e, syn, converged=True, used_osd=False,
                                iterations=bp.iterations,
                                soft_weight=self._weight(e),
                                unsatisfiable=False)
        correction, weight, unsat = self._osd(syn, bp.soft)
        return self._result(correction, syn, converged=False,
                            used_osd=True, iterations=bp.iterations,
                            soft_weight=weight, unsatisfiable=unsat)

    def _result(self, correction, syn, **kw):
        if not kw["unsatisfiable"]:
            self._check_solution(correction, syn)
        return DecodeResult(correction=correction,
                            predicted_observables=self._observables(
                                correction), **kw)

    def _as_syndrome(self, syndrome):
        syn = np.asarray(syndrome)
        if syn.shape != (self.m,):
            raise ValueError(f"syndrome must have length {self.m}")
        return syn.astype(np.uint8)

    def _check_solution(self, e, syn):
        ok = np.zeros(self.m, dtype=np.uint8)
        if self.col_idx.size:
            fired = e[self.col_idx].astype(np.uint8)
            seg = np.flatnonzero(np.diff(self.row_ptr) > 0)
            ok[seg] = np.bitwise_xor.reduceat(
                fired, self.row_ptr[seg])
        if not np.array_equal(ok, syn):
            raise RuntimeError(
                "internal error: correction does not satisfy the syndrome")

    def _observables(self, correction):
        k = self.n_observables
        out = np.zeros(k, dtype=np.uint8)
        if k == 0 or self.obs_words is None:
            return out
        mask = correction.astype(bool)
        if not mask.any():
            return out
        words = np.bitwise_xor.reduce(self.obs_words[mask], axis=0)
        bits = np.unpackbits(words.view(np.uint8), bitorder="little")
        return bits[:k].astype(np.uint8)


def bp_decode(H, priors, syndrome,
              config: DecoderConfig | None = None) -> BpResult:
    """Min-sum BP on a dense check matrix; returns soft + hard output."""
    return BpOsd(H, priors, config=config).bp(syndrome)


def osd_postprocess(H, priors, syndrome, soft,
                    config: DecoderConfig | None = None) -> DecodeResult:
    """OSD on a dense check matrix given an existing soft output."""
    return BpOsd(H, priors, config=config).postprocess(syndrome, soft)


class SplitDecoder:
    """Independent BP-OSD on each CSS view of a detector model.

    The full detector syndrome is sliced per view; predicted observables
    are the XOR of both views' contributions.  Corrections concatenate in
    detector order (X view first).
    """

    def __init__(self, model: DetectorModel,
                 config: DecoderConfig | None = None):
        self.model = model
        self.order = sorted(model.sub, key=lambda ct:
                            model.sub[ct].det_offset)
        self.parts = {}
        for ct in self.order:
            sub = model.sub[ct]
            if sub.n_detectors == 0 or sub.n_mechanisms == 0:
                self.parts[ct] = None
            else:
                self.parts[ct] = BpOsd.from_subproblem(
                    sub, model.n_observables, config)

    def decode(self, syndrome) -> DecodeResult:
        syn = np.asarray(syndrome)
        if syn.shape != (self.model.n_detectors,):
            raise ValueError(
                f"syndrome must have length {self.model.n_detectors}")
        syn = syn.astype(np.uint8)
        corrections = []
        obs = np.zeros(self.model.n_observables, dtype=np.uint8)
        converged = True
        used_osd = False
        unsat = False
        iterations = 0
        weight = 0.0
        for ct in self.order:
            sub = self.model.sub[ct]
            local = syn[sub.det_offset:sub.det_offset + sub.n_detectors]
            part = self.parts[ct]
            if part is None:
                corrections.append(np.zeros(sub.n_mechanisms,
                                            dtype=np.uint8))
                if local.any():
                    unsat = True
                    converged = False
                continue
            res = part.decode(local)
            corrections.append(res.correction)
            obs ^= res.predicted_observables
            converged &= res.converged
            used_osd |= res.used_osd
            unsat |= res.unsatisfiable
            iterations = max(iterations, res.iterations)
            weight += res.soft_weight
        return DecodeResult(
            correction=(np.concatenate(corrections) if corrections
                        else np.zeros(0, dtype=np.uint8)),
            converged=converged, used_osd=used_osd,
            predicted_observables=obs, iterations=iterations,
            soft_weight=weight, unsatisfiable=unsat)


def decode_split(model: DetectorModel, syndrome,
                 config: DecoderConfig | None = None) -> DecodeResult:
    """One-shot split decode; build a SplitDecoder for repeated use."""
    return SplitDecoder(model, config).decode(syndrome)
