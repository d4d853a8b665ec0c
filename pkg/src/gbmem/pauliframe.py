"""Forward Pauli-frame simulation of noisy Clifford circuits.

Tracks, per shot, the X and Z frame of every qubit through the circuit,
sampling each listed error Pauli independently with its probability
(the same semantics the detector model uses, so the two routes agree
exactly).  Measurement outcomes are frame-relative: a set X frame bit
at a measurement flips every detector and observable that measurement
feeds.  Reference (noiseless) outcomes cancel inside detectors by
construction, so detectors and observables come out directly.

This is the slow, obviously-correct route used to validate the detector
model; the production sampler works on the extracted model instead.
"""

from __future__ import annotations

import numpy as np

from .circuits import NoisyCircuit, TWO_QUBIT_PAULIS
from .detectors import OutcomeMap, _words, _to_words


def sample_circuit(circ: NoisyCircuit, omap: OutcomeMap, shots: int,
                   seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Simulate `shots` runs; returns bool arrays (shots, n_detectors)
    and (shots, n_observables)."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    nq = circ.n_qubits
    n_out = omap.n_detectors + omap.n_observables
    w = _words(n_out)
    fx = np.zeros((shots, nq), dtype=bool)
    fz = np.zeros((shots, nq), dtype=bool)
    out = np.zeros((shots, w), dtype=np.uint64)
    meas_rows = np.vstack([_to_words(v, w) for v in omap.det_of_meas]) \
        if omap.det_of_meas else np.zeros((0, w), dtype=np.uint64)

    meas_i = 0
    for ins in circ.instructions:
        qs = np.asarray(ins.qubits, dtype=np.int64)
        if ins.op == "H":
            tmp = fx[:, qs].copy()
            fx[:, qs] = fz[:, qs]
            fz[:, qs] = tmp
        elif ins.op == "CZ":
            a, b = qs[0::2], qs[1::2]
            fz[:, a] ^= fx[:, b]
            fz[:, b] ^= fx[:, a]
        elif ins.op == "CNOT":
            c, t = qs[0::2], qs[1::2]
            fx[:, t] ^= fx[:, c]
            fz[:, c] ^= fz[:, t]
        elif ins.op == "R":
            fx[:, qs] = False
            fz[:, qs] = False
        elif ins.op == "M":
            for q in qs:
                flipped = fx[:, q]
                out[flipped] ^= meas_rows[meas_i]
                meas_i += 1
        elif ins.op in ("ERR1", "IDLE"):
            px, py, pz = ins.probs
            shape = (shots, len(qs))
            if px:
                fx[:, qs] ^= rng.random(shape) < px
            if py:
                hit = rng.random(shape) < py
                fx[:, qs] ^= hit
                fz[:, qs] ^= hit
            if pz:
                fz[:, qs] ^= rng.random(shape) < pz
        elif ins.op == "ERR2":
            a, b = qs[0::2], qs[1::2]
            shape = (shots, len(a))
            for (pa, pb), p in zip(TWO_QUBIT_PAULIS, ins.probs):
                if not p:
                    continue
                hit = rng.random(shape) < p
                if pa in ("X", "Y"):
                    fx[:, a] ^= hit
                if pa in ("Y", "Z"):
                    fz[:, a] ^= hit
                if pb in ("X", "Y"):
                    fx[:, b] ^= hit
                if pb in ("Y", "Z"):
                    fz[:, b] ^= hit
        else:
            raise ValueError(f"unknown instruction {ins.op!r}")

    bits = np.unpackbits(out.view(np.uint8), axis=1,
                         bitorder="little")[:, :n_out].astype(bool)
    return bits[:, :omap.n_detectors], bits[:, omap.n_detectors:]


def enumerate_error_signatures(circ: NoisyCircuit, omap: OutcomeMap):
    """Propagate every possible elementary error one at a time, forward.

    Yields (signature bitset over detectors+observables, probability)
    in circuit order.  Independent of the detector-model construction;
    used to cross-check it.
    """
    meas_index = []
    count = 0
    for ins in circ.instructions:
        meas_index.append(count)
        if ins.op == "M":
            count += len(ins.qubits)

    def propagate(start: int, x0: dict[int, int], z0: dict[int, int]) -> int:
        # sparse frames: qubit -> 0/1
        fx = dict(x0)
        fz = dict(z0)
        sig = 0
        mi = meas_index[start] if start < len(circ.instructions) else count
        for t in range(start, len(circ.instructions)):
            ins = circ.instructions[t]
            qs = ins.qubits
            if ins.op == "H":
                for q in qs:
                    if q in fx or q in fz:
                        fx[q], fz[q] = fz.get(q, 0), fx.get(q, 0)
            elif ins.op == "CZ":
                for i in range(0, len(qs), 2):
                    a, b = qs[i], qs[i + 1]
                    if fx.get(b):
                        fz[a] = fz.get(a, 0) ^ 1
                    if fx.get(a):
                        fz[b] = fz.get(b, 0) ^ 1
            elif ins.op == "CNOT":
                for i in range(0, len(qs), 2):
                    c, tq = qs[i], qs[i + 1]
                    if fx.get(c):
                        fx[tq] = fx.get(tq, 0) ^ 1
                    if fz.get(tq):
                        fz[c] = fz.get(c, 0) ^ 1
            elif ins.op == "R":
                for q in qs:
                    fx.pop(q, None)
                    fz.pop(q, None)
            elif ins.op == "M":
                for i, q in enumerate(qs):
                    if fx.get(q):
                        sig ^= omap.det_of_meas[mi + i]
                mi += len(qs)
            # ERR/IDLE: noiseless during propagation
        return sig

    for t, ins in enumerate(circ.instructions):
        qs = ins.qubits
        if ins.op in ("ERR1", "IDLE"):
            px, py, pz = ins.probs
            for q in qs:
                for p, x, z in ((px, 1, 0), (py, 1, 1), (pz, 0, 1)):
                    if p:
                        yield propagate(t + 1, {q: x} if x else {},
                                        {q: z} if z else {}), p
        elif ins.op == "ERR2":
            for i in range(0, len(qs), 2):
                a, b = qs[i], qs[i + 1]
                for (pa, pb), p in zip(TWO_QUBIT_PAULIS, ins.probs):
                    if not p:
                        continue
                    fx = {}
                    fz = {}
                    if pa in ("X", "Y"):
                        fx[a] = 1
                    if pa in ("Y", "Z"):
                        fz[a] = 1
                    if pb in ("X", "Y"):
                        fx[b] = 1
                    if pb in ("Y", "Z"):
                        fz[b] = 1
                    yield propagate(t + 1, fx, fz), p
