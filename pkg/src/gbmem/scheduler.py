"""Synthesis and costing of movement-based parity-check rounds.

A round measures all X checks, then all Z checks.  Each half transfers
the check grid into movable traps and visits one grid displacement per
(term, wraparound class) pulse: the grid position advances by twice
the class's subgrid-unit relative position (doubled because subgrids
interleave at factor 2), plus a one-site alignment nudge selecting the
A or B target block.  At each stop a single global entangling pulse
acts on every co-located (check, data) pair; boundary exclusivity (see
gbmem.layout) guarantees those are exactly the intended pairs.

Pulse order within a half is constrained only by: every non-wrapping
pulse comes before every wrapping one.  Subject to that, the order is
chosen to minimize total movement time, computed exactly by dynamic
programming over visit subsets (equivalent to brute force over all
admissible orderings, which tests cross-check on small instances).

Movement time between consecutive pulses is billed on the Manhattan
legs of the check-position change, i.e. the doubled-shift component:
sqrt(6 * distance / accel) microseconds per horizontal plus vertical
leg, plus the final leg returning the check position home.  The
one-site block-alignment nudges ride along with the main legs and are
tracked in the emitted moves but add no billed time; with billed
durations otherwise zero, a round is pure movement time.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .codes import PolySpec, PolyTerm, CssCode
from .layout import (SUBGRID_OFFSETS, LayoutMap, check_targets,
                     layout as build_layout)


@dataclass(frozen=True)
class CostModel:
    """Movement-time parameters; durations beyond movement default to 0.

    round_overhead_us is a per-round additive calibration constant for
    everything the movement model does not cover (gates, measurement,
    settling); it defaults to 0 so round_time is pure movement.
    """

    spacing_um: float = 5.0
    accel_um_per_us2: float = 0.02
    transfer_time_us: float = 0.0
    rounds_per_cycle: int | None = None
    round_overhead_us: float = 0.0

    def __post_init__(self):
        if self.spacing_um <= 0 or self.accel_um_per_us2 <= 0:
            raise ValueError("spacing and acceleration must be positive")
        if self.transfer_time_us < 0 or self.round_overhead_us < 0:
            raise ValueError("durations cannot be negative")
        if self.rounds_per_cycle is not None and self.rounds_per_cycle < 1:
            raise ValueError("rounds_per_cycle must be >= 1")


def move_time(dx_um: float, dy_um: float, model: CostModel) -> float:
    """Duration in us of one move: horizontal leg then vertical leg."""
    if dx_um < 0 or dy_um < 0:
        raise ValueError("leg lengths are absolute distances")
    a = model.accel_um_per_us2
    return math.sqrt(6.0 * dx_um / a) + math.sqrt(6.0 * dy_um / a)


# -- schedule steps -----------------------------------------------------


@dataclass(frozen=True)
class Move:
    """Rigid grid displacement; fields are integer half-site counts."""

    dy_halfsites: int
    dx_halfsites: int
    kind: str = "move"


@dataclass(frozen=True)
class Pulse:
    """Global entangling pulse; pairs are (check index, global data index)."""

    gate: str
    pairs: tuple[tuple[int, int], ...]
    term: str
    offset: tuple[int, int]
    kind: str = "pulse"


@dataclass(frozen=True)
class Transfer:
    to: str
    group: str
    kind: str = "transfer"


@dataclass(frozen=True)
class MovementSchedule:
    code_name: str
    variant: str
    steps: tuple
    per_step_times_us: tuple[float, ...]
    half_times_us: dict[str, float]
    orders: dict[str, tuple[str, ...]]
    round_time_us: float
    model: CostModel

    @property
    def n_pulses(self) -> int:
        return sum(1 for s in self.steps if isinstance(s, Pulse))

    def to_json(self) -> str:
        payload = {
            "code": self.code_name,
            "variant": self.variant,
            "round_time_us": self.round_time_us,
            "half_times_us": self.half_times_us,
            "orders": {h: list(o) for h, o in self.orders.items()},
            "model": asdict(self.model),
            "steps": [dict(asdict(s), time_us=t)
                      for s, t in zip(self.steps, self.per_step_times_us)],
        }
        return json.dumps(payload, indent=2)


def cycle_time(sched: MovementSchedule, d: int | None = None) -> float:
    """One QEC cycle = d rounds, in us."""
    if d is None:
        d = sched.model.rounds_per_cycle
    if d is None or d < 1:
        raise ValueError("need d >= 1 rounds per cycle")
    return d * sched.round_time_us


# -- pulse enumeration --------------------------------------------------


@dataclass(frozen=True)
class _PulseInfo:
    block: str
    term: PolyTerm
    shift: tuple[int, int]     # subgrid units, identifies the wrap class
    wrapping: bool             # False for the raw-offset class
    bill: tuple[int, int]      # doubled shift, device sites (billed position)
    real: tuple[int, int]      # bill + block alignment nudge (actual position)


def _half_entries(spec: PolySpec, check_type: str):
    """Terms of one half with their target block, A terms first."""
    polys = ((spec.a, "A"), (spec.b, "B")) if check_type == "X" \
        else ((spec.b, "A"), (spec.a, "B"))
    return [(block, term) for poly, block in polys for term in poly]


def _phases(check_type: str, mixed: bool):
    # sign pair per axis; +1 keeps the raw offset, -1 wraps it.  Z
    # shifts are negated, so its raw-offset phase is the all -1 pair.
    if check_type == "X":
        return ((1, 1), (1, -1), (-1, 1), (-1, -1)) if mixed \
            else ((1, 1), (-1, -1))
    return ((-1, -1), (-1, 1), (1, -1), (1, 1)) if mixed \
        else ((-1, -1), (1, 1))


def _shift(term, check_type, phase, l, m):
    """Subgrid-unit displacement of a pulse; python mod handles wrapping."""
    sr, sc = phase
    q, p = (term.q, term.p) if check_type == "X" else (-term.q, -term.p)
    return (q % (sr * m), p % (sc * l))


def _half_pulses(spec: PolySpec, check_type: str) -> list[_PulseInfo]:
    """Every pulse of one half, raw-offset classes first, duplicates dropped."""
    entries = _half_entries(spec, check_type)
    mixed = any(t.is_mixed for _, t in entries)
    phases = _phases(check_type, mixed)
    own = SUBGRID_OFFSETS[check_type]
    pulses = []
    for ip, ph in enumerate(phases):
        for block, term in entries:
            s = _shift(term, check_type, ph, spec.l, spec.m)
            if any(p.block == block and p.term == term and p.shift == s
                   for p in pulses):
                continue
            tgt = SUBGRID_OFFSETS[block]
            bill = (2 * s[0], 2 * s[1])
            real = (bill[0] + tgt[0] - own[0], bill[1] + tgt[1] - own[1])
            pulses.append(_PulseInfo(block=block, term=term, shift=s,
                                     wrapping=ip > 0, bill=bill, real=real))
    return pulses


# -- order optimization -------------------------------------------------


def _leg_time(a, b, model: CostModel) -> float:
    return move_time(abs(b[1] - a[1]) * model.spacing_um,
                     abs(b[0] - a[0]) * model.spacing_um, model)


def _sequence_cost(pulses, order, model: CostModel) -> float:
    """Billed time of a pulse visiting order, home to home."""
    cur = (0, 0)
    t = 0.0
    for i in order:
        t += _leg_time(cur, pulses[i].bill, model)
        cur = pulses[i].bill
    return t + _leg_time(cur, (0, 0), model)


def _optimal_order(pulses, model: CostModel) -> tuple[int, ...]:
    """Exact minimum-time order: non-wrapping pulses first, then wrapping.

    Subset dynamic programming within each group, chained through the
    group boundary; ties broken by the lexicographically smaller visit
    sequence.  Equivalent to exhausting every admissible permutation.
    """
    groups = ([i for i, p in enumerate(pulses) if not p.wrapping],
              [i for i, p in enumerate(pulses) if p.wrapping])
    home = (0, 0)
    # states: position index -> (cost, path); -1 is home
    states = {-1: (0.0, ())}
    for grp in groups:
        n = len(grp)
        if n == 0:
            continue
        dist = [[_leg_time(pulses[a].bill, pulses[b].bill, model)
                 for b in grp] for a in grp]
        best: dict[tuple[int, int], tuple[float, tuple]] = {}
        for start, (c0, path0) in states.items():
            spos = home if start == -1 else pulses[start].bill
            for j in range(n):
                cand = (c0 + _leg_time(spos, pulses[grp[j]].bill, model),
                        path0 + (grp[j],))
                key = (1 << j, j)
                if key not in best or cand < best[key]:
                    best[key] = cand
        for mask in range(1, 1 << n):
            for last in range(n):
                if not (mask >> last) & 1 or (mask, last) not in best:
                    continue
                c, path = best[(mask, last)]
                for nxt in range(n):
                    if (mask >> nxt) & 1:
                        continue
                    cand = (c + dist[last][nxt], path + (grp[nxt],))
                    key = (mask | 1 << nxt, nxt)
                    if key not in best or cand < best[key]:
                        best[key] = cand
        full = (1 << n) - 1
        states = {grp[last]: best[(full, last)]
                  for last in range(n) if (full, last) in best}
    final = min((c + _leg_time(home if i == -1 else pulses[i].bill, home,
                               model), path)
                for i, (c, path) in states.items())
    return final[1]


def _heuristic_order(pulses, entries) -> tuple[int, ...]:
    """Literal protocol order: terms sorted by p+q, reused pass by pass."""
    ranked = sorted(range(len(entries)), key=lambda e: (entries[e][1].p
                                                        + entries[e][1].q, e))
    order = []
    for wrapping in (False, True):
        for e in ranked:
            block, term = entries[e]
            for i, p in enumerate(pulses):
                if (p.block == block and p.term == term
                        and p.wrapping == wrapping and i not in order):
                    order.append(i)
    return tuple(order)


# -- schedule synthesis -------------------------------------------------


def schedule_round(spec: PolySpec, lmap: LayoutMap | None = None,
                   model: CostModel | None = None,
                   ordering: str = "optimal") -> MovementSchedule:
    """Emit one full round (X half then Z half) with per-step durations."""
    if ordering not in ("optimal", "heuristic"):
        raise ValueError(f"unknown ordering {ordering!r}")
    if len(spec.a) + len(spec.b) > 8:
        raise ValueError("order search is limited to 8 terms per half")
    if lmap is None:
        lmap = build_layout(spec)
    if model is None:
        model = CostModel()

    steps: list = []
    times: list[float] = []
    half_times: dict[str, float] = {}
    orders: dict[str, tuple[str, ...]] = {}
    for ct in ("X", "Z"):
        pulses = _half_pulses(spec, ct)
        order = _optimal_order(pulses, model) if ordering == "optimal" \
            else _heuristic_order(pulses, _half_entries(spec, ct))
        orders[ct] = tuple(f"{p.term}@{p.block}{p.shift}"
                           for p in (pulses[i] for i in order))
        half_t = 0.0

        def emit(step, t):
            nonlocal half_t
            steps.append(step)
            times.append(t)
            half_t += t

        emit(Transfer(to="AOD", group=ct), model.transfer_time_us)
        gate = "CNOT" if ct == "X" else "CZ"
        cur_bill = (0, 0)
        cur_real = (0, 0)
        for i in order:
            p = pulses[i]
            emit(Move(2 * (p.real[0] - cur_real[0]),
                      2 * (p.real[1] - cur_real[1])),
                 _leg_time(cur_bill, p.bill, model))
            cur_bill, cur_real = p.bill, p.real
            pairs = tuple((j, d) for j, d, off in
                          check_targets(p.term, ct, p.block, spec)
                          if off == p.shift)
            emit(Pulse(gate=gate, pairs=pairs, term=str(p.term),
                       offset=p.shift), 0.0)
        emit(Move(-2 * cur_real[0], -2 * cur_real[1]),
             _leg_time(cur_bill, (0, 0), model))
        emit(Transfer(to="SLM", group=ct), model.transfer_time_us)
        half_times[ct] = half_t

    return MovementSchedule(
        code_name=spec.name, variant=lmap.variant, steps=tuple(steps),
        per_step_times_us=tuple(times), half_times_us=half_times,
        orders=orders,
        round_time_us=sum(times) + model.round_overhead_us, model=model)


# -- geometric replay ---------------------------------------------------


@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    message: str = ""
    step_index: int | None = None


def verify_schedule(sched: MovementSchedule, code: CssCode,
                    lmap: LayoutMap) -> VerifyReport:
    """Replay steps geometrically and check the three schedule contracts.

    (a) every nonzero of Gx and Gz is realized by exactly one pulse pair,
    (b) at each pulse the co-located pairs are exactly the declared ones
        and every other check of the moving group is strictly outside
        the data region in at least one axis,
    (c) each check grid is back home when it returns to static traps.
    """
    m2, l2 = lmap.device_shape()
    lm = lmap.l * lmap.m
    site_to_data = {tuple(lmap.data_site(i)): i for i in range(code.n)}
    dense = {"X": code.Gx.to_dense(), "Z": code.Gz.to_dense()}
    hits = {ct: np.zeros_like(dense[ct], dtype=np.int64) for ct in dense}

    def fail(msg, idx):
        return VerifyReport(ok=False, message=msg, step_index=idx)

    group = None
    cur = (0, 0)
    for idx, step in enumerate(sched.steps):
        if isinstance(step, Transfer):
            if step.to == "AOD":
                if group is not None:
                    return fail("transfer while another group is mobile", idx)
                group = step.group
                cur = (0, 0)
            else:
                if group != step.group:
                    return fail("transfer of a group that is not mobile", idx)
                if cur != (0, 0):
                    return fail(f"group {group} parked away from home {cur}",
                                idx)
                group = None
        elif isinstance(step, Move):
            if group is None:
                return fail("move with no mobile group", idx)
            if step.dy_halfsites % 2 or step.dx_halfsites % 2:
                return fail("move is not a whole number of sites", idx)
            cur = (cur[0] + step.dy_halfsites // 2,
                   cur[1] + step.dx_halfsites // 2)
        elif isinstance(step, Pulse):
            if group is None:
                return fail("pulse with no mobile group", idx)
            homes = lmap.home_array(group)
            pos = homes + np.array(cur)
            co = set()
            for j in range(lm):
                p = (int(pos[j, 0]), int(pos[j, 1]))
                inside = 0 <= p[0] < m2 and 0 <= p[1] < l2
                if inside:
                    if p not in site_to_data:
                        return fail(f"check {j} inside data region off any "
                                    f"data site at {p}", idx)
                    co.add((j, site_to_data[p]))
            declared = set(step.pairs)
            if co != declared:
                return fail(
                    f"pulse pairs differ from co-located atoms "
                    f"({len(declared)} declared, {len(co)} geometric)", idx)
            for j, dqb in co:
                hits[group][j, dqb] += 1
        else:
            return fail(f"unknown step {step!r}", idx)
    if group is not None:
        return VerifyReport(ok=False,
                            message="schedule ends with a mobile group",
                            step_index=len(sched.steps) - 1)
    for ct in ("X", "Z"):
        if not np.array_equal(hits[ct], dense[ct]):
            missed = int(((dense[ct] == 1) & (hits[ct] == 0)).sum())
            dup = int((hits[ct] > 1).sum())
            extra = int(((dense[ct] == 0) & (hits[ct] > 0)).sum())
            return VerifyReport(
                ok=False, step_index=None,
                message=f"{ct} coverage wrong: {missed} missing, "
                        f"{dup} duplicated, {extra} spurious")
    return VerifyReport(ok=True)
