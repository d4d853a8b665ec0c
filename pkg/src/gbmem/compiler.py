"""Clifford+T compilation onto the hierarchical and baseline architectures.

The scheduler advances in units of one surface-code logical cycle (a
step).  Multi-cycle operations occupy their resources for
ceil(duration / step) steps, which converts the heterogeneous per-code
cycle times into a single wall clock.  Single-qubit Cliffords are frame
updates: zero steps, no resources.

Resource model per step: each surface slot holds at most one logical
qubit; each LD/ST ancilla (one per memory block) moves at most one qubit
at a time, so two qubits can never load or store from the same block
simultaneously; lattice-surgery CNOTs claim the contiguous routing
corridor segment between their operands' columns; T injection claims the
single corridor port next to the factory; transversal mode has no
corridor but serializes all CNOT and T gates through one movement token.

Spacetime attribution follows the breakdown rule: a step's compute space
is charged to the load/store bucket when no compute operation is
executing and at least one is waiting on loads or stores, and to the
factory bucket when the only blockers are empty T-state queues.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .arch import ArchConfig, ProgramCounts, footprint, select_resources

_ONE_QUBIT = ("X", "Y", "Z", "H", "S", "T")
_CLIFFORD = ("X", "Y", "Z", "H", "S", "CNOT")


@dataclass(frozen=True)
class Op:
    name: str
    qubits: tuple

    def __post_init__(self):
        if self.name not in _ONE_QUBIT and self.name != "CNOT":
            raise ValueError(f"unsupported gate {self.name!r}")
        n = 2 if self.name == "CNOT" else 1
        if len(self.qubits) != n:
            raise ValueError(f"{self.name} takes {n} operand(s)")
        if self.name == "CNOT" and self.qubits[0] == self.qubits[1]:
            raise ValueError("CNOT operands must be distinct")


@dataclass(frozen=True)
class Program:
    n_qubits: int
    ops: tuple
    n_rz: int = 0
    eps_rz: float = 0.0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        for op in self.ops:
            if any(not 0 <= q < self.n_qubits for q in op.qubits):
                raise ValueError(f"{op} references a qubit out of range")

    @property
    def n_t(self) -> int:
        return sum(1 for op in self.ops if op.name == "T")


def parse_program(text: str) -> Program:
    """Line format: `qubits N` header, then `cnot a b`, `t a`, `h a`, ...;
    optional `meta n_rz V` / `meta eps_rz V`; `#` comments."""
    n_qubits = None
    ops = []
    meta = {"n_rz": 0, "eps_rz": 0.0}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0].lower()
        try:
            if head == "qubits":
                n_qubits = int(parts[1])
            elif head == "meta":
                key = parts[1].lower()
                if key not in meta:
                    raise ValueError(f"unknown meta key {key!r}")
                meta[key] = float(parts[2]) if key == "eps_rz" \
                    else int(parts[2])
            else:
                ops.append(Op(head.upper(), tuple(int(x) for x in parts[1:])))
        except (IndexError, ValueError) as e:
            raise ValueError(f"line {lineno}: {e}") from None
    if n_qubits is None:
        raise ValueError("missing `qubits N` header")
    return Program(n_qubits=n_qubits, ops=tuple(ops),
                   n_rz=meta["n_rz"], eps_rz=meta["eps_rz"])


def program_to_text(prog: Program) -> str:
    lines = [f"qubits {prog.n_qubits}"]
    if prog.n_rz:
        lines.append(f"meta n_rz {prog.n_rz}")
    if prog.eps_rz:
        lines.append(f"meta eps_rz {prog.eps_rz!r}")
    lines += [" ".join([op.name.lower(), *map(str, op.qubits)])
              for op in prog.ops]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ProgramProfile:
    serialization: float
    t_consumption: float


def profile(prog: Program) -> ProgramProfile:
    """Mean inactive/active ratio over dependency levels, and T/Clifford."""
    clock = [0] * prog.n_qubits
    active: dict = {}
    for op in prog.ops:
        lvl = max(clock[q] for q in op.qubits)
        for q in op.qubits:
            clock[q] = lvl + 1
        active.setdefault(lvl, set()).update(op.qubits)
    if active:
        ratios = [(prog.n_qubits - len(s)) / len(s) for s in active.values()]
        serialization = sum(ratios) / len(ratios)
    else:
        serialization = 0.0
    n_t = prog.n_t
    n_cliff = sum(1 for op in prog.ops if op.name in _CLIFFORD)
    t_consumption = n_t / n_cliff if n_cliff else (math.inf if n_t else 0.0)
    return ProgramProfile(serialization=serialization,
                          t_consumption=t_consumption)


# -- qubit-to-block mapping ------------------------------------------------


def map_qubits(prog: Program, n_blocks: int, block_capacity: int) -> np.ndarray:
    """Chaitin-style interference coloring of qubits onto memory blocks.

    Edges are weighted by CNOT multiplicity; the mapper maximizes the
    weight of edges whose endpoints land in different blocks (serialized
    loads punish same-block CNOT pairs).  Simplify removes the lowest
    weighted-degree node first, so select colors the hottest nodes first;
    each selection takes the feasible block minimizing the weight of
    conflicting edges, ties broken by block then qubit index.
    """
    if n_blocks < 1 or block_capacity < 1:
        raise ValueError("need n_blocks >= 1 and block_capacity >= 1")
    if prog.n_qubits > n_blocks * block_capacity:
        raise ValueError(
            f"{prog.n_qubits} qubits exceed {n_blocks} blocks x "
            f"{block_capacity} capacity")

    weight: dict = {}
    for op in prog.ops:
        if op.name == "CNOT":
            a, b = sorted(op.qubits)
            weight[(a, b)] = weight.get((a, b), 0) + 1
    adj: list = [dict() for _ in range(prog.n_qubits)]
    for (a, b), w in weight.items():
        adj[a][b] = w
        adj[b][a] = w

    deg = [sum(adj[q].values()) for q in range(prog.n_qubits)]
    alive = [True] * prog.n_qubits
    stack = []
    for _ in range(prog.n_qubits):
        q = min((q for q in range(prog.n_qubits) if alive[q]),
                key=lambda q: (deg[q], q))
        alive[q] = False
        stack.append(q)
        for nb, w in adj[q].items():
            if alive[nb]:
                deg[nb] -= w

    assignment = np.full(prog.n_qubits, -1, dtype=np.int64)
    load = [0] * n_blocks
    for q in reversed(stack):
        penalty = [0] * n_blocks
        for nb, w in adj[q].items():
            if assignment[nb] >= 0:
                penalty[assignment[nb]] += w
        block = min((b for b in range(n_blocks) if load[b] < block_capacity),
                    key=lambda b: (penalty[b], b))
        assignment[q] = block
        load[block] += 1
    return assignment


# -- scheduling -------------------------------------------------------------

# per-step classification for spacetime attribution
_CLS_COMPUTE, _CLS_LDST, _CLS_FACTORY = 0, 1, 2


@dataclass(frozen=True)
class CostReport:
    space_qubits: int
    time_seconds: float
    spacetime_qubit_seconds: float
    breakdown: dict


@dataclass(frozen=True)
class CompiledProgram:
    arch: ArchConfig
    n_cycles: int
    n_ldst: int
    n_t: int
    events: tuple
    step_class: np.ndarray
    step_seconds: float
    assignment: np.ndarray | None
    baseline: bool
    program: Program

    @property
    def time_seconds(self) -> float:
        return self.n_cycles * self.step_seconds

    @property
    def cost(self) -> CostReport:
        return cost_report(self)

    @property
    def timeline(self) -> list:
        """Per-cycle event lists; blocked cycles carry a Stall marker."""
        out: list = [[] for _ in range(self.n_cycles)]
        for ev in self.events:
            out[ev["t"]].append(ev)
        causes = {_CLS_LDST: "ldst", _CLS_FACTORY: "factory"}
        for t, cls in enumerate(self.step_class):
            if cls in causes:
                out[t].append({"t": t, "op": "STALL", "cause": causes[cls]})
        return out

    def counts(self) -> ProgramCounts:
        return ProgramCounts(n_cycles=self.n_cycles, n_ldst=self.n_ldst,
                             n_t=self.n_t, n_rz=self.program.n_rz,
                             eps_rz=self.program.eps_rz)

    def timeline_json(self) -> str:
        classes = ("compute", "ldst", "factory")
        return json.dumps({
            "n_cycles": self.n_cycles,
            "step_seconds": self.step_seconds,
            "baseline": self.baseline,
            "n_ldst": self.n_ldst,
            "n_t": self.n_t,
            "step_class": [classes[c] for c in self.step_class],
            "events": list(self.events),
        }, indent=1)


class _Machine:
    """Mutable scheduling state for one compilation run."""

    FREE, LOADING, OCCUPIED, STORING = 0, 1, 2, 3

    def __init__(self, prog: Program, cfg: ArchConfig,
                 assignment: np.ndarray | None):
        self.prog = prog
        self.cfg = cfg
        self.baseline = assignment is None
        table = cfg.gate_table
        step = cfg.surface_cycle_s

        def steps_of(op_name):
            cycles, kind = table.cycles(op_name)
            dur = cycles * (cfg.ldst_cycle_s if kind == "ldst" else step)
            return max(0, math.ceil(dur / step - 1e-9))

        self.dur = {name: steps_of(name)
                    for name in ("CNOT", "T", "LOAD", "STORE")}
        self.step_seconds = step

        n = prog.n_qubits
        if self.baseline:
            if cfg.n_surface < n:
                raise ValueError("baseline needs one surface slot per qubit")
            self.slot_of = list(range(n))
            self.state = [self.OCCUPIED] * n
        else:
            self.assignment = assignment
            self.slot_of = [-1] * n
            self.state = [0] * n  # qubit state: 0 = in memory
        # slot bookkeeping
        self.slot_state = [self.OCCUPIED if self.baseline and s < n
                           else self.FREE for s in range(cfg.n_surface)]
        self.slot_qubit = [s if self.baseline and s < n else -1
                           for s in range(cfg.n_surface)]
        self.slot_done = [0] * cfg.n_surface
        self.anc_free = [0] * cfg.n_blocks
        self.corridor = [0] * (cfg.n_surface + 1)  # last = factory port
        self.serial_free = 0
        self.qubit_busy = [0] * n
        self.consumed_t = 0

        # dependency bookkeeping
        self.ops = prog.ops
        self.preds = [0] * len(prog.ops)
        self.succs: list = [[] for _ in prog.ops]
        last: dict = {}
        self.by_qubit: list = [[] for _ in range(n)]
        for i, op in enumerate(prog.ops):
            for q in op.qubits:
                if q in last:
                    self.preds[i] += 1
                    self.succs[last[q]].append(i)
                last[q] = i
                self.by_qubit[q].append(i)
        self.done = [False] * len(prog.ops)
        self.started = [False] * len(prog.ops)
        self.finish = [0] * len(prog.ops)
        self.ready = sorted(i for i in range(len(prog.ops))
                            if self.preds[i] == 0)
        self.qptr = [0] * n  # first unfinished op per qubit
        self.remaining = len(prog.ops)
        self.n_ldst = 0
        self.n_t = 0
        self.events: list = []
        self.step_class: list = []

    # -- helpers --

    def activation(self, q: int) -> float:
        """Index of the earliest unfinished op touching q (inf if none)."""
        lst = self.by_qubit[q]
        while self.qptr[q] < len(lst) and self.done[lst[self.qptr[q]]]:
            self.qptr[q] += 1
        return lst[self.qptr[q]] if self.qptr[q] < len(lst) else math.inf

    def resident(self, q: int) -> bool:
        s = self.slot_of[q]
        return s >= 0 and self.slot_state[s] == self.OCCUPIED

    def _complete(self, i: int):
        self.done[i] = True
        self.remaining -= 1
        for j in self.succs[i]:
            self.preds[j] -= 1
            if self.preds[j] == 0:
                self.ready.append(j)
        self.ready.sort()

    def _free_group_slot(self, block: int):
        for s in self.cfg.groups[block]:
            if self.slot_state[s] == self.FREE:
                return s
        return None

    def _start_load(self, q: int, t: int):
        b = self.assignment[q]
        s = self._free_group_slot(b)
        self.slot_state[s] = self.LOADING
        self.slot_qubit[s] = q
        self.slot_done[s] = t + self.dur["LOAD"]
        self.slot_of[q] = s
        self.anc_free[b] = t + self.dur["LOAD"]
        self.n_ldst += 1
        self.events.append({"t": t, "op": "LOAD", "qubit": int(q),
                            "block": int(b), "slot": int(s),
                            "steps": self.dur["LOAD"]})

    def _start_store(self, q: int, t: int):
        b = self.assignment[q]
        s = self.slot_of[q]
        self.slot_state[s] = self.STORING
        self.slot_done[s] = t + self.dur["STORE"]
        self.anc_free[b] = t + self.dur["STORE"]
        self.slot_of[q] = -1
        self.n_ldst += 1
        self.events.append({"t": t, "op": "STORE", "qubit": int(q),
                            "block": int(b), "slot": int(s),
                            "steps": self.dur["STORE"]})

    def _can_load(self, q: int, t: int) -> bool:
        b = self.assignment[q]
        return self.anc_free[b] <= t and self._free_group_slot(b) is not None

    def _loading_or_storing(self) -> bool:
        return any(st in (self.LOADING, self.STORING)
                   for st in self.slot_state)

    # -- main loop --

    def run(self) -> CompiledProgram:
        cfg = self.cfg
        surgery = cfg.cnot_mode == "lattice-surgery"
        cps = cfg.t_factory.cycles_per_state
        t = 0
        stall_guard = 0
        guard_limit = (max(self.dur.values()) + cps) * 4 + 16
        while self.remaining:
            # retire finished loads/stores
            for s in range(cfg.n_surface):
                if self.slot_state[s] == self.LOADING \
                        and self.slot_done[s] <= t:
                    self.slot_state[s] = self.OCCUPIED
                elif self.slot_state[s] == self.STORING \
                        and self.slot_done[s] <= t:
                    self.slot_state[s] = self.FREE
                    self.slot_qubit[s] = -1
            # retire finished compute ops
            for i in list(self.ready):
                if self.started[i] and self.finish[i] <= t:
                    self.ready.remove(i)
                    self._complete(i)
            if not self.remaining:
                break

            progress = False
            # zero-cost Cliffords are frame updates: execute on readiness
            moved = True
            while moved:
                moved = False
                for i in list(self.ready):
                    op = self.ops[i]
                    if op.name != "CNOT" and op.name != "T" \
                            and not self.started[i]:
                        self.ready.remove(i)
                        self.events.append({"t": t, "op": op.name,
                                            "qubit": int(op.qubits[0]),
                                            "steps": 0})
                        self._complete(i)
                        progress = moved = True

            blocked_ldst = False
            blocked_t = False
            executing = any(self.started[i] and self.finish[i] > t
                            for i in self.ready)

            # launch compute ops in program order
            for i in list(self.ready):
                if self.started[i]:
                    continue
                op = self.ops[i]
                if not all(self.resident(q) for q in op.qubits):
                    blocked_ldst = True
                    continue
                if any(self.qubit_busy[q] > t for q in op.qubits):
                    continue
                if op.name == "CNOT":
                    dur = self.dur["CNOT"]
                    if surgery:
                        sa, sb = (self.slot_of[q] for q in op.qubits)
                        lo, hi = min(sa, sb), max(sa, sb)
                        if any(self.corridor[x] > t
                               for x in range(lo, hi + 1)):
                            continue
                        for x in range(lo, hi + 1):
                            self.corridor[x] = t + dur
                    else:
                        if self.serial_free > t:
                            continue
                        self.serial_free = t + dur
                    self.events.append(
                        {"t": t, "op": "CNOT",
                         "qubits": [int(q) for q in op.qubits],
                         "steps": dur})
                else:  # T
                    if (t // cps) - self.consumed_t < 1:
                        blocked_t = True
                        continue
                    dur = self.dur["T"]
                    if surgery:
                        port = cfg.n_surface
                        if self.corridor[port] > t:
                            continue
                        self.corridor[port] = t + dur
                    else:
                        if self.serial_free > t:
                            continue
                        self.serial_free = t + dur
                    self.consumed_t += 1
                    self.n_t += 1
                    self.events.append({"t": t, "op": "T",
                                        "qubit": int(op.qubits[0]),
                                        "steps": dur})
                for q in op.qubits:
                    self.qubit_busy[q] = t + dur
                self.started[i] = True
                self.finish[i] = t + dur
                executing = True
                progress = True

            if not self.baseline:
                # demand loads for ready ops, program order
                for i in self.ready:
                    if self.started[i]:
                        continue
                    for q in self.ops[i].qubits:
                        if self.slot_of[q] == -1:
                            if self._can_load(q, t):
                                self._start_load(q, t)
                                progress = True
                            else:
                                blocked_ldst = True
                # prefetch: per block, load the qubit that activates
                # earliest; among equal urgency prefer a CNOT support whose
                # partner is already resident
                for b in range(cfg.n_blocks):
                    if self.anc_free[b] > t:
                        continue
                    cands = []
                    for q in range(self.prog.n_qubits):
                        if self.assignment[q] != b or self.slot_of[q] != -1:
                            continue
                        act = self.activation(q)
                        if act == math.inf:
                            continue
                        op = self.ops[act]
                        partner_in = (op.name == "CNOT" and any(
                            self.resident(x) for x in op.qubits if x != q))
                        cands.append((act, 0 if partner_in else 1, q))
                    if not cands:
                        continue
                    act_q, _, q = min(cands)
                    if self._free_group_slot(b) is not None:
                        self._start_load(q, t)
                        progress = True
                        continue
                    # No slot: store the resident qubit whose next use lies
                    # furthest in the future, provided the loader's next use
                    # comes strictly sooner.  Qubits with no pending ops sort
                    # last (inf) so they are evicted first.
                    evict = None
                    for s in cfg.groups[b]:
                        if self.slot_state[s] != self.OCCUPIED:
                            continue
                        r = self.slot_qubit[s]
                        if self.qubit_busy[r] > t:
                            continue
                        act_r = self.activation(r)
                        if act_r > act_q and (evict is None
                                              or act_r > evict[0]):
                            evict = (act_r, r)
                    if evict is not None:
                        self._start_store(evict[1], t)
                        progress = True

            in_flight = self._loading_or_storing()
            if executing:
                self.step_class.append(_CLS_COMPUTE)
            elif blocked_ldst or in_flight:
                self.step_class.append(_CLS_LDST)
            elif blocked_t:
                self.step_class.append(_CLS_FACTORY)
            else:
                self.step_class.append(_CLS_COMPUTE)

            if progress or executing or in_flight or blocked_t:
                stall_guard = 0
            else:
                stall_guard += 1
                if stall_guard > guard_limit:
                    pend = [f"{self.ops[i].name}{self.ops[i].qubits}"
                            for i in self.ready if not self.started[i]]
                    raise RuntimeError(
                        "scheduler deadlock; blocked ops: "
                        + ", ".join(pend[:8]))
            t += 1

        return CompiledProgram(
            arch=cfg, n_cycles=t, n_ldst=self.n_ldst, n_t=self.n_t,
            events=tuple(self.events),
            step_class=np.array(self.step_class, dtype=np.int8),
            step_seconds=self.step_seconds,
            assignment=None if self.baseline else self.assignment,
            baseline=self.baseline, program=self.prog)


def schedule(prog: Program, assignment, cfg: ArchConfig) -> CompiledProgram:
    """Compile onto the hierarchical machine with the given block map."""
    if not cfg.hierarchical:
        raise ValueError("hierarchical scheduling needs n_blocks >= 1")
    assignment = np.asarray(assignment, dtype=np.int64)
    if len(assignment) != prog.n_qubits:
        raise ValueError("assignment length must equal n_qubits")
    if assignment.size and (assignment.min() < 0
                            or assignment.max() >= cfg.n_blocks):
        raise ValueError("assignment references a block out of range")
    cap = cfg.memory_k
    counts = np.bincount(assignment, minlength=cfg.n_blocks)
    if (counts > cap).any():
        raise ValueError(f"assignment exceeds block capacity k={cap}")
    return _Machine(prog, cfg, assignment).run()


def compile_baseline(prog: Program, cfg: ArchConfig) -> CompiledProgram:
    """Compile onto the surface-only baseline: every qubit resident."""
    base = replace(cfg, n_blocks=0, ldst_groups=None,
                   n_surface=max(cfg.n_surface, prog.n_qubits))
    return _Machine(prog, base, None).run()


def cost_report(cp: CompiledProgram, arch: ArchConfig | None = None
                ) -> CostReport:
    """Spacetime volume (qubit-seconds) with per-component attribution.

    Hardware is present for the whole run, so space is the footprint
    total and each component's base volume is its qubits x wall time;
    the compute patches' share is reassigned per step class.  The total
    is defined as the sum of the breakdown, making completeness exact.
    """
    cfg = cp.arch if arch is None else arch
    fp = footprint(cfg)
    mem_q = cfg.n_blocks * 2 * cfg.memory_n
    ldst_q = cfg.n_blocks * 2 * cfg.effective_ldst_d ** 2
    comp_q = (cfg.n_surface + cfg.routing_patches) * 2 * cfg.surface_d ** 2
    fac_q = cfg.t_factory.qubit_cost
    step = cp.step_seconds
    wall = cp.n_cycles * step

    n_ldst_steps = int((cp.step_class == _CLS_LDST).sum())
    n_fac_steps = int((cp.step_class == _CLS_FACTORY).sum())
    n_comp_steps = cp.n_cycles - n_ldst_steps - n_fac_steps

    breakdown = {
        "memory": mem_q * wall,
        "ldst": ldst_q * wall + comp_q * n_ldst_steps * step,
        "compute": comp_q * n_comp_steps * step,
        "factory": fac_q * wall + comp_q * n_fac_steps * step,
    }
    return CostReport(
        space_qubits=fp.total_qubits,
        time_seconds=wall,
        spacetime_qubit_seconds=sum(breakdown.values()),
        breakdown=breakdown)


def compile_hierarchical(prog: Program, cfg: ArchConfig) -> CompiledProgram:
    """map_qubits + schedule with the config's block count and capacity."""
    assignment = map_qubits(prog, cfg.n_blocks, cfg.memory_k)
    return schedule(prog, assignment, cfg)


def sweep(prog: Program, cfg: ArchConfig, axis: str, values) -> list:
    """Recompile per point; rows of (value, space, time, spacetime, ...).

    target_fidelity reselects surface distance and factory per point
    (memory geometry stays fixed so the block mapping is comparable).
    """
    rows = []
    for v in values:
        if axis == "ldst_multiplier":
            point = replace(cfg, ldst_round_ms=cfg.ldst_round_ms * v)
        elif axis == "n_surface":
            point = replace(cfg, n_surface=int(v), ldst_groups=None,
                            n_routing=None)
        elif axis == "n_blocks":
            point = replace(cfg, n_blocks=int(v), ldst_groups=None)
        elif axis == "cnot_mode":
            point = replace(cfg, cnot_mode=v, n_routing=None)
        elif axis == "target_fidelity":
            probe = compile_hierarchical(prog, cfg)
            sel = select_resources(probe.counts(), float(v),
                                   cfg.n_blocks, cfg.n_surface)
            point = replace(cfg, surface_d=int(sel.surface_d), ldst_d=None,
                            t_factory=sel.factory)
        else:
            raise ValueError(f"unknown sweep axis {axis!r}")
        cp = compile_hierarchical(prog, point)
        rep = cost_report(cp)
        rows.append({
            "axis": axis, "value": v,
            "surface_d": point.surface_d,
            "space_qubits": rep.space_qubits,
            "time_s": rep.time_seconds,
            "spacetime_qubit_s": rep.spacetime_qubit_seconds,
            **{f"{k}_qubit_s": val for k, val in rep.breakdown.items()},
        })
    return rows
