"""Geometric layout of a generalized-bicycle code on a 2D atom grid.

The four qubit groups (A data, B data, X checks, Z checks) each form an
m x l grid; qubit i of a group sits at subgrid position
(i mod m, floor(i/m)).  The groups are interleaved at factor 2, so one
subgrid step equals two device sites and group g is shifted by
SUBGRID_OFFSETS[g] device sites:

        col:  0   1   2   3
    row 0:    A   X   A   X        X checks right of their A column,
    row 1:    Z   B   Z   B        Z checks below, B on the diagonal.

Device sites are 5 um apart by default.  Site indices may go negative:
the data region is surrounded by empty buffer space wide enough for the
largest periodic excursion (2m sites vertically, 2l horizontally).

Because the check matrices are built from cyclic shifts, the data qubit
targeted by a check is always at a fixed subgrid offset from the check,
up to periodic wraparound.  A term x^p y^q therefore produces at most
four distinct relative positions, (q, p), (q, p-l), (q-m, p) and
(q-m, p-l), and displacing *all* checks of one type by a single such
offset brings exactly the checks of the matching wraparound class next
to their data while every other check leaves the data region in at
least one axis.  That exclusivity is what makes globally pulsed
entangling gates act on the right pairs, and it is checked bit-for-bit
against the parity-check matrices in the tests.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .codes import PolySpec, PolyTerm

# Subgrid offsets in device sites (row, col) at interleave factor 2.
SUBGRID_OFFSETS: dict[str, tuple[int, int]] = {
    "A": (0, 0),
    "B": (1, 1),
    "X": (0, 1),
    "Z": (1, 0),
}

GROUPS = ("A", "B", "X", "Z")
DATA_GROUPS = ("A", "B")
CHECK_GROUPS = ("X", "Z")

DEFAULT_SPACING_UM = 5.0


class GridPos(NamedTuple):
    """Device site indices (row, col); negative values lie in buffer space."""

    row: int
    col: int


@dataclass(frozen=True)
class LayoutMap:
    """Placement of every atom of a code on the device grid.

    positions is keyed by (group, index) with group in {A, B, X, Z} and
    index in [0, l*m).  In the collision-free variant the check groups
    are physically parked half a site down-right of their grid position
    (lane_offset_sites = 0.5) so that moving checks travel between data
    rows and columns; grid arithmetic is unchanged because the offset
    is constant.
    """

    spec: PolySpec
    variant: str
    spacing_um: float
    subgrid_offsets: dict[str, tuple[int, int]]
    positions: dict[tuple[str, int], GridPos]
    lane_offset_sites: float = 0.0
    _homes: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def l(self) -> int:
        return self.spec.l

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def n(self) -> int:
        return self.spec.n

    def device_shape(self) -> tuple[int, int]:
        """Data-region extent in sites: (2m, 2l)."""
        return (2 * self.m, 2 * self.l)

    def buffer_sites(self) -> tuple[int, int]:
        """Margin reserved on each side for periodic excursions."""
        return (2 * self.m, 2 * self.l)

    def home_array(self, group: str) -> np.ndarray:
        """(l*m, 2) int array of home sites for one group, index order."""
        if group not in self._homes:
            lm = self.l * self.m
            arr = np.empty((lm, 2), dtype=np.int64)
            for i in range(lm):
                arr[i] = self.positions[(group, i)]
            self._homes[group] = arr
        return self._homes[group]

    def data_site(self, qubit: int) -> GridPos:
        """Home of global data qubit index (A block first, then B)."""
        lm = self.l * self.m
        if qubit < lm:
            return self.positions[("A", qubit)]
        return self.positions[("B", qubit - lm)]

    def site_um(self, group: str, index: int) -> tuple[float, float]:
        """Physical coordinates in micrometers, lane offset included."""
        pos = self.positions[(group, index)]
        off = self.lane_offset_sites if group in CHECK_GROUPS else 0.0
        return ((pos.row + off) * self.spacing_um, (pos.col + off) * self.spacing_um)


def subgrid_position(index: int, m: int) -> tuple[int, int]:
    """Subgrid (row, col) of qubit `index` within its group."""
    return (index % m, index // m)


def layout(spec: PolySpec, variant: str = "standard",
           spacing_um: float = DEFAULT_SPACING_UM) -> LayoutMap:
    """Place all 2n atoms of a code; variant is standard | collision-free."""
    if variant not in ("standard", "collision-free"):
        raise ValueError(f"unknown layout variant {variant!r}")
    positions: dict[tuple[str, int], GridPos] = {}
    for group in GROUPS:
        dr, dc = SUBGRID_OFFSETS[group]
        for i in range(spec.l * spec.m):
            r, c = subgrid_position(i, spec.m)
            positions[(group, i)] = GridPos(2 * r + dr, 2 * c + dc)
    lane = 0.5 if variant == "collision-free" else 0.0
    lm = LayoutMap(spec=spec, variant=variant, spacing_um=spacing_um,
                   subgrid_offsets=dict(SUBGRID_OFFSETS), positions=positions,
                   lane_offset_sites=lane)
    # the four offset parity classes cannot collide, but keep the check
    # so a future variant cannot silently stack atoms
    if len(set(positions.values())) != len(positions):
        raise RuntimeError("layout produced overlapping positions")
    return lm


def relative_positions(term: PolyTerm, l: int, m: int) -> set[tuple[int, int]]:
    """Distinct (row, col) subgrid offsets from a check to its data.

    A term x^p y^q yields (q, p) for checks that do not wrap, with q
    replaced by q-m under vertical wraparound and p by p-l under
    horizontal wraparound.  Offsets whose wrapped variant never occurs
    (p = 0 or q = 0) are not duplicated.
    """
    rows = (term.q,) if term.q == 0 else (term.q, term.q - m)
    cols = (term.p,) if term.p == 0 else (term.p, term.p - l)
    return {(qq, pp) for qq in rows for pp in cols}


def check_targets(term: PolyTerm, check_type: str, block: str,
                  spec: PolySpec) -> list[tuple[int, int, tuple[int, int]]]:
    """Pairs (check index, global data index, offset) realized by a term.

    X checks reach data at subgrid offset +(q, p) (mod wraparound); Z
    checks at the mirrored -(q, p).  Data indices are global: block B
    adds l*m.  The union over all terms of a (block A for X, block B
    for Z) and b (the other block) reproduces Gx and Gz exactly.
    """
    if check_type not in CHECK_GROUPS:
        raise ValueError(f"check_type must be X or Z, got {check_type!r}")
    if block not in DATA_GROUPS:
        raise ValueError(f"block must be A or B, got {block!r}")
    l, m = spec.l, spec.m
    sign = 1 if check_type == "X" else -1
    base = 0 if block == "A" else l * m
    out = []
    for j in range(l * m):
        r, c = subgrid_position(j, m)
        dr = r + sign * term.q
        dc = c + sign * term.p
        off = (sign * term.q - m * (dr // m), sign * term.p - l * (dc // l))
        data = (dc % l) * m + (dr % m)
        out.append((j, base + data, off))
    return out


def dump_csv(lmap: LayoutMap, fh) -> None:
    """Write (qubit_id, group, row, col) rows for external plotting.

    qubit_id is the global data index for A/B and the check index for
    X/Z; row/col are grid sites (collision-free lane offsets are a
    constant +0.5 site on checks and are not baked into the grid).
    """
    w = csv.writer(fh)
    w.writerow(["qubit_id", "group", "row_sites", "col_sites"])
    lm = lmap.l * lmap.m
    for group in GROUPS:
        for i in range(lm):
            pos = lmap.positions[(group, i)]
            qid = i + lm if group == "B" else i
            w.writerow([qid, group, pos.row, pos.col])
