"""Hierarchical-architecture resource model.

Physical layout, timing, footprint, fidelity, T-state supply, and
resource selection for a machine with qLDPC memory blocks, a surface-code
compute row, LD/ST teleportation ancillae, and a magic-state factory.
The same config describes the surface-code-only baseline by setting
n_blocks = 0.

Geometry conventions (all areas are computed in um^2 and reported in
mm^2): a distance-d surface patch occupies (2d x 2d) grid sites; a memory
block of a code with panel dimensions (l, m) occupies (2m x 2l) sites
times a buffer factor for the check-qubit excursion space; one grid site
is spacing_um on a side.  Qubit counts: surface patch 2d^2, memory block
2n (data + checks), LD/ST ancilla 2d^2.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import codes as codes_mod
from . import scheduler as scheduler_mod


@dataclass(frozen=True)
class FactorySpec:
    """Magic-state factory: a surface-code block producing T states."""

    name: str
    qubit_cost: int
    cycles_per_state: int
    output_error: float

    def __post_init__(self):
        if self.qubit_cost <= 0 or self.cycles_per_state <= 0:
            raise ValueError("factory qubit_cost and cycles_per_state "
                             "must be positive")
        if not 0.0 <= self.output_error <= 1.0:
            raise ValueError("output_error must be a probability")


# Placeholder 15-to-1 factory parameters: configuration values standing in
# for an external factory catalog, not results derived here.  Acceptance
# tests supply their own FactorySpec.
DEFAULT_FACTORY = FactorySpec(name="15-to-1", qubit_cost=2662,
                              cycles_per_state=6, output_error=1e-7)


@dataclass(frozen=True)
class GateCostTable:
    """Logical-cycle counts per operation and the code type that bills them.

    Single-qubit Cliffords are frame updates: zero cycles, no resources.
    """

    cnot_cycles: int = 2
    t_cycles: int = 2
    load_cycles: int = 2
    store_cycles: int = 1
    clifford1_cycles: int = 0

    def cycles(self, op: str) -> tuple:
        """(cycle count, billing code type) for an operation name."""
        if op == "CNOT":
            return self.cnot_cycles, "surface"
        if op == "T":
            return self.t_cycles, "surface"
        if op == "LOAD":
            return self.load_cycles, "ldst"
        if op == "STORE":
            return self.store_cycles, "ldst"
        if op in ("X", "Y", "Z", "H", "S"):
            return self.clifford1_cycles, "surface"
        raise ValueError(f"unknown operation {op!r}")


def gate_costs(cnot_mode: str) -> GateCostTable:
    if cnot_mode == "lattice-surgery":
        return GateCostTable(cnot_cycles=2)
    if cnot_mode == "transversal":
        return GateCostTable(cnot_cycles=1)
    raise ValueError("cnot_mode must be 'lattice-surgery' or 'transversal'")


def default_ldst_groups(n_blocks: int, n_surface: int) -> tuple:
    """Assign surface slots to LD/ST ancillae, contiguously.

    Each ancilla serves exactly one memory block and at least one surface
    code.  When slots allow, every ancilla takes two surface codes and
    the last takes the remainder (the 2,2,...,1 pattern at 2B-1 slots);
    with fewer slots the split is near-even.
    """
    if n_blocks == 0:
        return ()
    if n_surface < n_blocks:
        raise ValueError("need at least one surface slot per memory block")
    if n_surface >= 2 * n_blocks - 1:
        bounds = [2 * i for i in range(n_blocks)] + [n_surface]
    else:
        bounds = [i * n_surface // n_blocks for i in range(n_blocks)] \
            + [n_surface]
    return tuple(tuple(range(bounds[i], bounds[i + 1]))
                 for i in range(n_blocks))


@dataclass(frozen=True)
class ArchConfig:
    """Machine description; n_blocks = 0 is the surface-only baseline."""

    n_blocks: int
    n_surface: int
    surface_d: int
    memory_name: str = "gb144_12_12"
    memory_n: int = 144
    memory_k: int = 12
    memory_l: int = 12
    memory_m: int = 6
    memory_d: int = 12
    cnot_mode: str = "lattice-surgery"
    n_routing: int | None = None
    ldst_d: int | None = None
    t_factory: FactorySpec = DEFAULT_FACTORY
    surface_round_ms: float = 1.0
    ldst_round_ms: float = 2.5
    memory_round_ms: float = 2.45837897365034
    spacing_um: float = 5.0
    buffer_factor: float = 2.0
    ldst_groups: tuple | None = None

    def __post_init__(self):
        if self.n_blocks < 0 or self.n_surface < 1 or self.surface_d < 1:
            raise ValueError("need n_blocks >= 0, n_surface >= 1, "
                             "surface_d >= 1")
        if self.cnot_mode not in ("lattice-surgery", "transversal"):
            raise ValueError("cnot_mode must be 'lattice-surgery' or "
                             "'transversal'")
        if self.buffer_factor < 1.0:
            raise ValueError("buffer_factor must be >= 1")
        for t in (self.surface_round_ms, self.ldst_round_ms,
                  self.memory_round_ms, self.spacing_um):
            if t <= 0:
                raise ValueError("times and spacing must be positive")
        groups = self.groups
        if self.n_blocks:
            if len(groups) != self.n_blocks:
                raise ValueError("need exactly one LD/ST ancilla group per "
                                 "memory block")
            seen: set = set()
            for g in groups:
                if len(g) < 1:
                    raise ValueError("each LD/ST ancilla must serve at "
                                     "least one surface code")
                if any(not 0 <= s < self.n_surface for s in g):
                    raise ValueError("LD/ST group references a surface slot "
                                     "out of range")
                if seen & set(g):
                    raise ValueError("LD/ST groups must not share surface "
                                     "slots")
                seen |= set(g)

    @property
    def hierarchical(self) -> bool:
        return self.n_blocks > 0

    @property
    def groups(self) -> tuple:
        if self.ldst_groups is not None:
            return self.ldst_groups
        return default_ldst_groups(self.n_blocks, self.n_surface)

    @property
    def routing_patches(self) -> int:
        # lattice surgery routes through a corridor row mirroring the data
        # row; transversal CNOTs move atoms instead and need no corridor
        if self.n_routing is not None:
            return self.n_routing
        return self.n_surface if self.cnot_mode == "lattice-surgery" else 0

    @property
    def effective_ldst_d(self) -> int:
        return self.surface_d if self.ldst_d is None else self.ldst_d

    # logical cycle = d rounds of checks, for every code type
    @property
    def surface_cycle_s(self) -> float:
        return self.surface_d * self.surface_round_ms * 1e-3

    @property
    def ldst_cycle_s(self) -> float:
        return self.effective_ldst_d * self.ldst_round_ms * 1e-3

    @property
    def memory_cycle_s(self) -> float:
        return self.memory_d * self.memory_round_ms * 1e-3

    @property
    def gate_table(self) -> GateCostTable:
        return gate_costs(self.cnot_mode)


def arch_from_catalog(name: str, **overrides) -> ArchConfig:
    """Build a config whose memory block fields come from a catalog code."""
    spec, d = codes_mod.catalog()[name]
    code = codes_mod.build_code(spec)
    fields = dict(memory_name=name, memory_n=code.n, memory_k=code.k,
                  memory_l=spec.l, memory_m=spec.m, memory_d=d)
    if "memory_round_ms" not in overrides:
        sched = scheduler_mod.schedule_round(spec)
        fields["memory_round_ms"] = sched.round_time_us / 1000.0
    fields.update(overrides)
    return ArchConfig(**fields)


@dataclass(frozen=True)
class Footprint:
    memory_mm2: float
    compute_mm2: float
    ldst_mm2: float
    factory_mm2: float
    total_qubits: int

    @property
    def total_mm2(self) -> float:
        return (self.memory_mm2 + self.compute_mm2 + self.ldst_mm2
                + self.factory_mm2)


def footprint(cfg: ArchConfig) -> Footprint:
    """Areas (mm^2) and physical qubit counts per the geometry model."""
    s = cfg.spacing_um
    patch_um2 = (2 * cfg.surface_d * s) ** 2
    block_um2 = (2 * cfg.memory_m * s) * (2 * cfg.memory_l * s) \
        * cfg.buffer_factor
    ldst_qubits = 2 * cfg.effective_ldst_d ** 2
    patches = cfg.n_surface + cfg.routing_patches

    memory_um2 = cfg.n_blocks * block_um2
    compute_um2 = patches * patch_um2
    ldst_um2 = cfg.n_blocks * ldst_qubits * s * s
    factory_um2 = cfg.t_factory.qubit_cost * s * s

    total_qubits = (cfg.n_blocks * 2 * cfg.memory_n
                    + patches * 2 * cfg.surface_d ** 2
                    + cfg.n_blocks * ldst_qubits
                    + cfg.t_factory.qubit_cost)
    return Footprint(memory_mm2=memory_um2 / 1e6,
                     compute_mm2=compute_um2 / 1e6,
                     ldst_mm2=ldst_um2 / 1e6,
                     factory_mm2=factory_um2 / 1e6,
                     total_qubits=total_qubits)


@dataclass(frozen=True)
class FidelityModel:
    """Inputs to the five-factor program-fidelity product."""

    eps_mem: float = 0.0
    eps_ldst: float = 0.0
    eps_surface: float = 0.0
    eps_rz: float = 0.0
    eps_t: float = 0.0
    n_blocks: int = 0
    n_ldst: int = 0
    n_surface: int = 0
    n_cycles: int = 0
    n_rz: int = 0
    n_t: int = 0

    def __post_init__(self):
        for e in (self.eps_mem, self.eps_ldst, self.eps_surface,
                  self.eps_rz, self.eps_t):
            if not 0.0 <= e <= 1.0:
                raise ValueError("error rates must lie in [0, 1]")
        for c in (self.n_blocks, self.n_ldst, self.n_surface,
                  self.n_cycles, self.n_rz, self.n_t):
            if c < 0:
                raise ValueError("counts must be >= 0")


def program_fidelity(fm: FidelityModel) -> float:
    """(1-e_mem)^(blocks*cycles) (1-e_ldst)^(blocks*ldst)
    (1-e_surface)^(surface*cycles) (1-e_rz)^rz (1-e_t)^t"""
    return ((1.0 - fm.eps_mem) ** (fm.n_blocks * fm.n_cycles)
            * (1.0 - fm.eps_ldst) ** (fm.n_blocks * fm.n_ldst)
            * (1.0 - fm.eps_surface) ** (fm.n_surface * fm.n_cycles)
            * (1.0 - fm.eps_rz) ** fm.n_rz
            * (1.0 - fm.eps_t) ** fm.n_t)


# -- calibration and resource selection ----------------------------------


class CalibrationTable:
    """Per-cycle logical error rates keyed by (name, physical p).

    Memory entries carry the block length n, surface entries the distance
    d, so selection can iterate smallest-first deterministically.
    """

    def __init__(self):
        self._eps: dict = {}
        self._size: dict = {}
        self._kind: dict = {}

    def add(self, name: str, kind: str, size: int, p: float,
            eps_per_cycle: float) -> None:
        if kind not in ("memory", "surface"):
            raise ValueError("kind must be 'memory' or 'surface'")
        if not 0.0 <= eps_per_cycle <= 1.0:
            raise ValueError("eps_per_cycle must be a probability")
        self._eps[(name, p)] = eps_per_cycle
        self._size[name] = size
        self._kind[name] = kind

    def eps(self, name: str, p: float) -> float:
        return self._eps[(name, p)]

    def entries(self, kind: str, p: float) -> list:
        """[(size, name, eps)] for one kind at one p, smallest size first."""
        rows = [(self._size[n], n, e) for (n, q), e in self._eps.items()
                if q == p and self._kind[n] == kind]
        rows.sort()
        return rows


def default_calibration() -> CalibrationTable:
    """Ships the fixed conservative memory entry plus a placeholder
    surface-code curve (configuration stand-ins, not simulated values;
    runs recorded from the sampler should be added on top)."""
    cal = CalibrationTable()
    cal.add("gb288_12_18", "memory", 288, 1e-3, 1e-9)
    for d in range(3, 31, 2):
        cal.add(f"surface_d{d}", "surface", d, 1e-3,
                min(0.5, 0.1 * 0.1 ** ((d + 1) // 2)))
    return cal


@dataclass(frozen=True)
class ProgramCounts:
    """Profile counts that feed the fidelity model."""

    n_cycles: int
    n_ldst: int
    n_t: int
    n_rz: int = 0
    eps_rz: float = 0.0


@dataclass(frozen=True)
class ResourceSelection:
    surface_d: int
    memory_name: str
    factory: FactorySpec
    fidelity: float
    feasible: bool


def select_resources(counts: ProgramCounts, target_fidelity: float,
                     n_blocks: int, n_surface: int,
                     calibration: CalibrationTable | None = None,
                     p: float = 1e-3,
                     factories: tuple = (DEFAULT_FACTORY,)) -> ResourceSelection:
    """Smallest resources whose program fidelity meets the target.

    Deterministic order: surface distance ascending, then factory by
    qubit cost, then memory entry by block length.  The LD/ST ancilla is
    billed at the surface entry's rate (same distance).  An infeasible
    target returns the best achievable combination, flagged.
    """
    cal = calibration if calibration is not None else default_calibration()
    surface_rows = cal.entries("surface", p)
    memory_rows = cal.entries("memory", p)
    if not surface_rows or not memory_rows:
        raise ValueError("calibration table needs at least one surface and "
                         "one memory entry at this p")
    best = None
    for _, sname, seps in surface_rows:
        d = cal._size[sname]
        for fac in sorted(factories, key=lambda f: (f.qubit_cost, f.name)):
            for _, mname, meps in memory_rows:
                fm = FidelityModel(
                    eps_mem=meps, eps_ldst=seps, eps_surface=seps,
                    eps_rz=counts.eps_rz, eps_t=fac.output_error,
                    n_blocks=n_blocks, n_ldst=counts.n_ldst,
                    n_surface=n_surface, n_cycles=counts.n_cycles,
                    n_rz=counts.n_rz, n_t=counts.n_t)
                f = program_fidelity(fm)
                sel = ResourceSelection(surface_d=d, memory_name=mname,
                                        factory=fac, fidelity=f,
                                        feasible=f >= target_fidelity)
                if sel.feasible:
                    return sel
                if best is None or f > best.fidelity:
                    best = sel
    return best


def t_supply(factory: FactorySpec, demand) -> list:
    """Per-cycle stall lengths for a T-demand sequence.

    The factory finishes one state every cycles_per_state logical cycles
    into an unbounded queue.  demand[i] states are consumed in program
    cycle i; if the queue lacks them, the consuming cycle stalls until
    production catches up, pushing all later cycles back.  Returns the
    stall length (in cycles) charged to each demand cycle.
    """
    cps = factory.cycles_per_state
    wall = 0
    consumed = 0
    stalls = []
    for count in demand:
        if count < 0:
            raise ValueError("demand must be non-negative")
        wall += 1
        if count:
            consumed += count
            ready_wall = consumed * cps
            wait = max(0, ready_wall - wall)
        else:
            wait = 0
        stalls.append(wait)
        wall += wait
    return stalls


# -- config file ----------------------------------------------------------


def load_arch_config(path) -> ArchConfig:
    """Read an INI-style architecture file.

    Sections [memory], [compute], [ldst], [factory], [timing]; keys use
    the same `key = value` lines as code-spec files.  Unspecified keys
    fall back to the dataclass defaults.  memory/code may name a catalog
    entry or point to a spec file; memory_round_ms = auto derives the
    round time from the movement scheduler.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    text = Path(path).read_text()
    cp.read_string(text)

    kw: dict = {}
    mem = cp["memory"] if cp.has_section("memory") else {}
    code_ref = mem.get("code", "gb144_12_12")
    if "/" in code_ref or code_ref.endswith(".txt"):
        spec, d = codes_mod.load_spec(code_ref)
        if d is None:
            raise ValueError("spec file must declare d for architecture use")
        built = codes_mod.build_code(spec)
        kw.update(memory_name=spec.name or Path(code_ref).stem,
                  memory_n=built.n, memory_k=built.k,
                  memory_l=spec.l, memory_m=spec.m, memory_d=int(d))
        mem_spec = spec
    else:
        spec, d = codes_mod.catalog()[code_ref]
        built = codes_mod.build_code(spec)
        kw.update(memory_name=code_ref, memory_n=built.n, memory_k=built.k,
                  memory_l=spec.l, memory_m=spec.m, memory_d=int(d))
        mem_spec = spec
    kw["n_blocks"] = int(mem.get("n_blocks", 1))
    if "buffer_factor" in mem:
        kw["buffer_factor"] = float(mem["buffer_factor"])

    comp = cp["compute"] if cp.has_section("compute") else {}
    kw["n_surface"] = int(comp.get("n_surface", 4))
    kw["surface_d"] = int(comp.get("surface_d", 11))
    if "cnot_mode" in comp:
        kw["cnot_mode"] = comp["cnot_mode"]
    if "n_routing" in comp:
        kw["n_routing"] = int(comp["n_routing"])

    ldst = cp["ldst"] if cp.has_section("ldst") else {}
    if "d" in ldst:
        kw["ldst_d"] = int(ldst["d"])
    if "groups" in ldst:
        kw["ldst_groups"] = tuple(
            tuple(int(x) for x in grp.split(",") if x.strip() != "")
            for grp in ldst["groups"].split(";"))

    fac = cp["factory"] if cp.has_section("factory") else {}
    if fac:
        kw["t_factory"] = FactorySpec(
            name=fac.get("name", "custom"),
            qubit_cost=int(fac.get("qubit_cost", DEFAULT_FACTORY.qubit_cost)),
            cycles_per_state=int(fac.get(
                "cycles_per_state", DEFAULT_FACTORY.cycles_per_state)),
            output_error=float(fac.get(
                "output_error", DEFAULT_FACTORY.output_error)))

    timing = cp["timing"] if cp.has_section("timing") else {}
    if "surface_round_ms" in timing:
        kw["surface_round_ms"] = float(timing["surface_round_ms"])
    if "ldst_round_ms" in timing:
        kw["ldst_round_ms"] = float(timing["ldst_round_ms"])
    mr = timing.get("memory_round_ms", "auto")
    if mr == "auto":
        sched = scheduler_mod.schedule_round(mem_spec)
        kw["memory_round_ms"] = sched.round_time_us / 1000.0
    else:
        kw["memory_round_ms"] = float(mr)

    return ArchConfig(**kw)
