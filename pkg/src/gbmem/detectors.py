"""Detector error models for noisy Clifford memory circuits.

A detector is an XOR of measurement outcomes that is deterministic (0)
in the noiseless circuit.  For the check type aligned with the memory
basis (Z checks in a Z-basis experiment), outcomes are anchored at both
ends: slot 0 compares the first round against the initial product
state, slots 1..rounds-1 compare consecutive rounds, and slot `rounds`
compares the last round against the check value recomputed from the
final transversal data readout.  The other check type starts in a
random eigenvalue, so only its consecutive-round slots 1..rounds-1
exist.  Observables are the basis-type logical operators evaluated on
the final data readout.

Each elementary error (one Pauli of one ERR instruction) maps to the
set of detectors and observables it flips, computed by propagating a
symbolic flip backward through the circuit.  Errors with identical
signatures are merged as independent XOR contributions,
p = p1 + p2 - 2 p1 p2.  The model splits into two CSS subproblems: the
X view holds X-check detectors, the Z view Z-check detectors, and the
observables ride with the view aligned to the memory basis (only the
dual Pauli component can flip a basis-type logical).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import CssCode
from .circuits import NoisyCircuit


def _words(bits: int) -> int:
    return max(1, (bits + 63) // 64)


def _to_words(value: int, n_words: int) -> np.ndarray:
    return np.frombuffer(value.to_bytes(n_words * 8, "little"), dtype="<u8")


@dataclass(frozen=True)
class OutcomeMap:
    """How measurement indices combine into detectors and observables.

    det_of_meas[i] is a bitset over n_detectors + n_observables bits
    (observables in the high bits) listing every output that flips when
    measurement i flips.  det_meta rows are (type 0=X/1=Z, check, slot).
    """

    n_detectors: int
    n_observables: int
    det_of_meas: tuple[int, ...]
    det_meta: np.ndarray
    n_x_detectors: int


def outcome_map(circ: NoisyCircuit, code: CssCode) -> OutcomeMap:
    if circ.n_data != code.n:
        raise ValueError("circuit and code disagree on data qubit count")
    aligned = circ.basis
    by_label = {lab: i for i, lab in enumerate(circ.meas_labels)}
    data_meas = [by_label[("data", q)] for q in range(code.n)]
    g_aligned = (code.Gz if aligned == "Z" else code.Gx).to_dense()
    logicals = (code.logicals_z if aligned == "Z" else
                code.logicals_x).to_dense()

    detectors: list[list[int]] = []
    meta: list[tuple[int, int, int]] = []
    for ti, ct in enumerate(("X", "Z")):
        slots = range(0, circ.rounds + 1) if ct == aligned \
            else range(1, circ.rounds)
        for t in slots:
            for j in range(circ.checks_per_type):
                members = []
                if t > 0:
                    members.append(by_label[("check", ct, j, t - 1)])
                if t < circ.rounds:
                    members.append(by_label[("check", ct, j, t)])
                else:
                    members.extend(data_meas[q]
                                   for q in np.nonzero(g_aligned[j])[0])
                detectors.append(members)
                meta.append((ti, j, t))

    n_det = len(detectors)
    n_obs = logicals.shape[0]
    outputs = [0] * circ.n_measurements
    for di, members in enumerate(detectors):
        for i in members:
            outputs[i] ^= 1 << di
    for oi in range(n_obs):
        for q in np.nonzero(logicals[oi])[0]:
            outputs[data_meas[q]] ^= 1 << (n_det + oi)

    n_x = sum(1 for t, _, _ in meta if t == 0)
    return OutcomeMap(n_detectors=n_det, n_observables=n_obs,
                      det_of_meas=tuple(outputs),
                      det_meta=np.array(meta, dtype=np.int64).reshape(-1, 3),
                      n_x_detectors=n_x)


# -- backward signature propagation -------------------------------------

_CLIFFORD_OPS = {"H", "CZ", "CNOT", "R", "M", "ERR1", "ERR2", "IDLE"}


def _error_signatures(circ: NoisyCircuit, omap: OutcomeMap):
    """Yield (signature bitset, probability) for every elementary error.

    Walks the circuit backward keeping, per qubit, the output set an X
    (resp. Z) flip at the current point would toggle.
    """
    meas_start = []
    count = 0
    for ins in circ.instructions:
        meas_start.append(count)
        if ins.op == "M":
            count += len(ins.qubits)
    if count != circ.n_measurements:
        raise ValueError("measurement label count does not match circuit")

    sig_x = [0] * circ.n_qubits
    sig_z = [0] * circ.n_qubits
    out = []
    for t in range(len(circ.instructions) - 1, -1, -1):
        ins = circ.instructions[t]
        if ins.op not in _CLIFFORD_OPS:
            raise ValueError(f"non-Clifford instruction {ins.op!r}")
        qs = ins.qubits
        if ins.op == "M":
            for i, q in enumerate(qs):
                sig_x[q] ^= omap.det_of_meas[meas_start[t] + i]
        elif ins.op == "R":
            for q in qs:
                sig_x[q] = 0
                sig_z[q] = 0
        elif ins.op == "H":
            for q in qs:
                sig_x[q], sig_z[q] = sig_z[q], sig_x[q]
        elif ins.op == "CZ":
            for i in range(0, len(qs), 2):
                a, b = qs[i], qs[i + 1]
                sig_x[a] ^= sig_z[b]
                sig_x[b] ^= sig_z[a]
        elif ins.op == "CNOT":
            for i in range(0, len(qs), 2):
                c, tq = qs[i], qs[i + 1]
                sig_x[c] ^= sig_x[tq]
                sig_z[tq] ^= sig_z[c]
        elif ins.op in ("ERR1", "IDLE"):
            px, py, pz = ins.probs
            for q in qs:
                if px:
                    out.append((sig_x[q], px))
                if py:
                    out.append((sig_x[q] ^ sig_z[q], py))
                if pz:
                    out.append((sig_z[q], pz))
        else:  # ERR2
            for i in range(0, len(qs), 2):
                a, b = qs[i], qs[i + 1]
                comp_a = (0, sig_x[a], sig_x[a] ^ sig_z[a], sig_z[a])
                comp_b = (0, sig_x[b], sig_x[b] ^ sig_z[b], sig_z[b])
                k = 0
                for ia in range(4):
                    for ib in range(4):
                        if ia == 0 and ib == 0:
                            continue
                        p = ins.probs[k]
                        k += 1
                        if p:
                            out.append((comp_a[ia] ^ comp_b[ib], p))
    return out


def _merge(items) -> dict[int, float]:
    """XOR-merge same-signature independent errors, dropping no-ops."""
    merged: dict[int, float] = {}
    for sig, p in items:
        if sig == 0 or p == 0.0:
            continue
        prev = merged.get(sig)
        merged[sig] = p if prev is None else prev + p - 2.0 * prev * p
    return {s: p for s, p in merged.items() if p > 0.0}


# -- model assembly ------------------------------------------------------


@dataclass(frozen=True)
class SubProblem:
    """One CSS decoding view: a parity-check matrix over mechanisms.

    H is stored both row-compressed (detector -> mechanisms) and
    column-compressed (mechanism -> detectors); local detector row i is
    global detector det_offset + i.
    """

    check_type: str
    det_offset: int
    n_detectors: int
    priors: np.ndarray
    row_ptr: np.ndarray
    col_idx: np.ndarray
    col_ptr: np.ndarray
    row_idx: np.ndarray
    obs_words: np.ndarray

    @property
    def n_mechanisms(self) -> int:
        return len(self.priors)


@dataclass(frozen=True)
class DetectorModel:
    """Independent error mechanisms with packed detector/observable bits."""

    n_detectors: int
    n_observables: int
    probs: np.ndarray
    det_words: np.ndarray
    obs_words: np.ndarray
    det_meta: np.ndarray
    sub: dict
    undetectable: tuple[tuple[float, int], ...]

    @property
    def n_mechanisms(self) -> int:
        return len(self.probs)

    def mechanism(self, i: int) -> tuple[float, tuple[int, ...],
                                         tuple[int, ...]]:
        dets = _unpack_row(self.det_words[i], self.n_detectors)
        obs = _unpack_row(self.obs_words[i], self.n_observables)
        return float(self.probs[i]), dets, obs


def _unpack_row(words: np.ndarray, n_bits: int) -> tuple[int, ...]:
    bits = np.unpackbits(words.view(np.uint8), bitorder="little")[:n_bits]
    return tuple(int(i) for i in np.nonzero(bits)[0])


def _pack_rows(values: list[int], n_bits: int) -> np.ndarray:
    w = _words(n_bits)
    if not values:
        return np.zeros((0, w), dtype=np.uint64)
    return np.vstack([_to_words(v, w) for v in values])


def _build_subproblem(check_type, det_offset, n_det, view_items,
                      n_obs) -> SubProblem:
    merged = _merge(view_items)
    m = len(merged)
    priors = np.fromiter(merged.values(), dtype=np.float64, count=m)
    det_mask = (1 << n_det) - 1
    det_local = [s & det_mask for s in merged]
    obs_words = _pack_rows([s >> n_det for s in merged], max(1, n_obs))

    rows_per_col = [np.flatnonzero(np.unpackbits(
        _to_words(v, _words(max(1, n_det))).view(np.uint8),
        bitorder="little")[:n_det]).astype(np.int32) for v in det_local]
    col_ptr = np.zeros(m + 1, dtype=np.int64)
    for i, r in enumerate(rows_per_col):
        col_ptr[i + 1] = col_ptr[i] + len(r)
    row_idx = (np.concatenate(rows_per_col) if m else
               np.zeros(0, dtype=np.int32)).astype(np.int32)

    cols_per_row: list[list[int]] = [[] for _ in range(n_det)]
    for c, rows in enumerate(rows_per_col):
        for r in rows:
            cols_per_row[r].append(c)
    row_ptr = np.zeros(n_det + 1, dtype=np.int64)
    for i, cols in enumerate(cols_per_row):
        row_ptr[i + 1] = row_ptr[i] + len(cols)
    col_idx = np.array([c for cols in cols_per_row for c in cols],
                       dtype=np.int32)

    return SubProblem(check_type=check_type, det_offset=det_offset,
                      n_detectors=n_det, priors=priors, row_ptr=row_ptr,
                      col_idx=col_idx, col_ptr=col_ptr, row_idx=row_idx,
                      obs_words=obs_words)


def build_detector_model(circ: NoisyCircuit, code: CssCode) -> DetectorModel:
    """Propagate every elementary error to its detector/observable set."""
    omap = outcome_map(circ, code)
    merged = _merge(_error_signatures(circ, omap))

    n_det, n_obs = omap.n_detectors, omap.n_observables
    det_mask = (1 << n_det) - 1
    probs = np.fromiter(merged.values(), dtype=np.float64, count=len(merged))
    det_words = _pack_rows([s & det_mask for s in merged], max(1, n_det))
    obs_words = _pack_rows([s >> n_det for s in merged], max(1, n_obs))

    n_x = omap.n_x_detectors
    x_mask = (1 << n_x) - 1
    aligned = circ.basis  # observables ride with the basis-aligned view
    views = {"X": [], "Z": []}
    undetectable = []
    for sig, p in merged.items():
        det = sig & det_mask
        obs = sig >> n_det
        x_part = det & x_mask
        z_part = det >> n_x
        if x_part:
            x_obs = obs if aligned == "X" else 0
            views["X"].append((x_part | (x_obs << n_x), p))
        if z_part:
            z_obs = obs if aligned == "Z" else 0
            views["Z"].append((z_part | (z_obs << (n_det - n_x)), p))
        if obs and not (x_part if aligned == "X" else z_part):
            undetectable.append((p, obs))

    sub = {
        "X": _build_subproblem("X", 0, n_x, views["X"], n_obs),
        "Z": _build_subproblem("Z", n_x, n_det - n_x, views["Z"], n_obs),
    }
    return DetectorModel(n_detectors=n_det, n_observables=n_obs,
                         probs=probs, det_words=det_words,
                         obs_words=obs_words, det_meta=omap.det_meta,
                         sub=sub, undetectable=tuple(undetectable))
