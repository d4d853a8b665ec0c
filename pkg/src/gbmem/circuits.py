"""Noisy parity-check circuits compiled for a CZ-native machine.

A memory experiment is: reset all data in the chosen basis, run `rounds`
scheduled check rounds, then measure all data transversally.  Each round
follows the movement schedule: the X half sandwiches every data qubit
between Hadamards so the pulsed CZ gates act as check-to-data CNOTs; the
Z half needs no data rotations (CZ is already diagonal).  Check qubits
are prepared in |+> and read out through a final Hadamard in both
halves.  Hadamard pairs that would cancel back to back on the same
qubit between pulses are not emitted; single-qubit noise attaches only
to gates actually applied.

Error channels are explicit instructions: ERR1 carries (pX, pY, pZ) and
ERR2 carries the 15 probabilities of the nontrivial two-qubit Paulis in
(IX, IY, IZ, XI, XX, ..., ZZ) order.  Each listed Pauli fires
independently with its probability (so channels compose by XOR), which
makes detector-model sampling and direct Pauli-frame simulation agree
exactly rather than to O(p^2).  Reset and measurement flips are X
errors attached after R and before M.  Idle decoherence is applied to
every atom after each grid move, twirled to Pauli probabilities from a
single coherence time.

Qubit numbering: data 0..n-1 (block A then B in column-major subgrid
order), X checks n..n+lm-1, Z checks n+lm..n+2lm-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .codes import CssCode
from .layout import layout as build_layout
from . import scheduler as scheduler_mod


@dataclass(frozen=True)
class NoiseParams:
    """Physical error rate, coherence time, and memory-experiment basis."""

    p: float
    t_coherence_s: float = 10.0
    basis: str = "Z"

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must be in [0, 1]")
        if self.t_coherence_s <= 0:
            raise ValueError("coherence time must be positive")
        if self.basis not in ("Z", "X"):
            raise ValueError("basis must be 'Z' or 'X'")


@dataclass(frozen=True)
class Instr:
    """One circuit instruction.

    qubits are flat; CZ/CNOT/ERR2 read them as consecutive pairs.  probs
    holds (pX, pY, pZ) for ERR1/IDLE and 15 values for ERR2.  IDLE is an
    ERR1 whose probabilities came from a timed wait.
    """

    op: str
    qubits: tuple[int, ...]
    probs: tuple[float, ...] = ()
    duration_us: float = 0.0


#: two-qubit Pauli order used by ERR2 probability vectors
TWO_QUBIT_PAULIS = tuple((a, b) for a in "IXYZ" for b in "IXYZ")[1:]


@dataclass(frozen=True)
class NoisyCircuit:
    """Flat instruction stream plus the measurement labeling.

    meas_labels[i] describes measurement index i: ("check", "X"|"Z",
    check index, round) or ("data", qubit).
    """

    n_qubits: int
    instructions: tuple[Instr, ...]
    meas_labels: tuple[tuple, ...]
    n_data: int
    checks_per_type: int
    rounds: int
    basis: str
    code_name: str | None = None

    @property
    def n_measurements(self) -> int:
        return len(self.meas_labels)

    def check_qubit(self, check_type: str, j: int) -> int:
        base = self.n_data + (0 if check_type == "X" else self.checks_per_type)
        return base + j


def idle_channel(duration_us: float,
                 t_coherence_s: float) -> tuple[float, float, float]:
    """Pauli twirl of amplitude+phase damping with T1 = T2 = t_coherence."""
    if duration_us < 0:
        raise ValueError("duration cannot be negative")
    if t_coherence_s <= 0:
        raise ValueError("coherence time must be positive")
    decay = -math.expm1(-duration_us / (t_coherence_s * 1e6))
    p_x = decay / 4.0
    return (p_x, p_x, p_x)


def _err2_probs(p: float) -> tuple[float, ...]:
    return (p / 15.0,) * 15


def build_memory_circuit(code: CssCode, sched, noise: NoiseParams,
                         rounds: int) -> NoisyCircuit:
    """Compile a `rounds`-round memory experiment from a verified schedule.

    p = 0 disables every channel, idle decoherence included, producing
    the noiseless reference circuit.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if code.spec is None:
        raise ValueError("code must carry its polynomial spec")
    lmap = build_layout(code.spec, variant=sched.variant)
    rep = scheduler_mod.verify_schedule(sched, code, lmap)
    if not rep.ok:
        raise ValueError(f"schedule failed verification: {rep.message}")

    n = code.n
    lm = n // 2
    nq = 2 * n
    data = tuple(range(n))
    anc = {"X": tuple(range(n, n + lm)), "Z": tuple(range(n + lm, 2 * n))}
    all_q = tuple(range(nq))
    p = noise.p
    p3 = (p / 3.0, p / 3.0, p / 3.0)
    flip = (p, 0.0, 0.0)

    ins: list[Instr] = []
    labels: list[tuple] = []

    def err1(qubits, probs):
        if any(probs):
            ins.append(Instr("ERR1", tuple(qubits), probs))

    def hadamard(qubits):
        ins.append(Instr("H", tuple(qubits)))
        err1(qubits, p3)

    def reset(qubits):
        ins.append(Instr("R", tuple(qubits)))
        err1(qubits, flip)

    def measure(qubits, label_of):
        err1(qubits, flip)
        ins.append(Instr("M", tuple(qubits)))
        labels.extend(label_of(q) for q in qubits)

    reset(data)
    if noise.basis == "X":
        hadamard(data)

    for r in range(rounds):
        group = None
        for step, t in zip(sched.steps, sched.per_step_times_us):
            if isinstance(step, scheduler_mod.Transfer):
                if step.to == "AOD":
                    group = step.group
                    reset(anc[group])
                    hadamard(anc[group])
                    if group == "X":
                        hadamard(data)
                else:
                    if group == "X":
                        hadamard(data)
                    hadamard(anc[group])
                    measure(anc[group],
                            lambda q, g=group: ("check", g, q - anc[g][0], r))
                    group = None
            elif isinstance(step, scheduler_mod.Move):
                if p > 0:
                    probs = idle_channel(t, noise.t_coherence_s)
                    if any(probs):
                        ins.append(Instr("IDLE", all_q, probs,
                                         duration_us=t))
            elif isinstance(step, scheduler_mod.Pulse):
                pairs = []
                for j, dqb in step.pairs:
                    pairs.extend((anc[group][j], dqb))
                ins.append(Instr("CZ", tuple(pairs)))
                if p > 0:
                    ins.append(Instr("ERR2", tuple(pairs), _err2_probs(p)))

    if noise.basis == "X":
        hadamard(data)
    measure(data, lambda q: ("data", q))

    return NoisyCircuit(n_qubits=nq, instructions=tuple(ins),
                        meas_labels=tuple(labels), n_data=n,
                        checks_per_type=lm, rounds=rounds, basis=noise.basis,
                        code_name=code.name or code.spec.name)


def circuit_to_text(circ: NoisyCircuit) -> str:
    """Line-based export: H/CZ/CNOT/R/M one target set per line, errors
    as ERR1/ERR2 probability lines (IDLE exports as its ERR1 twirl)."""
    out = []
    for ins in circ.instructions:
        if ins.op in ("H", "R", "M"):
            out.extend(f"{ins.op} {q}" for q in ins.qubits)
        elif ins.op in ("CZ", "CNOT"):
            qs = ins.qubits
            out.extend(f"{ins.op} {qs[i]} {qs[i + 1]}"
                       for i in range(0, len(qs), 2))
        elif ins.op in ("ERR1", "IDLE"):
            probs = " ".join(repr(v) for v in ins.probs)
            out.extend(f"ERR1 {q} {probs}" for q in ins.qubits)
        elif ins.op == "ERR2":
            qs = ins.qubits
            probs = " ".join(repr(v) for v in ins.probs)
            out.extend(f"ERR2 {qs[i]} {qs[i + 1]} {probs}"
                       for i in range(0, len(qs), 2))
        else:
            raise ValueError(f"unknown instruction {ins.op!r}")
    return "\n".join(out) + "\n"
