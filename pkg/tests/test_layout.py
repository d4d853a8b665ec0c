"""Geometry tests: interleaved subgrids, periodic offsets, exclusivity."""

import io

import numpy as np
import pytest

from gbmem import codes, layout
from gbmem.codes import PolySpec, PolyTerm


def _spec_l5_m4():
    # small example used for the worked geometry cases
    return PolySpec(l=5, m=4,
                    a=(PolyTerm(0, 0), PolyTerm(0, 2), PolyTerm(2, 0)),
                    b=(PolyTerm(0, 1), PolyTerm(0, 2), PolyTerm(3, 0)),
                    name="demo54")


def test_subgrid_position_example():
    assert layout.subgrid_position(7, 4) == (3, 1)
    assert layout.subgrid_position(0, 4) == (0, 0)


def test_device_sites_follow_subgrid_offsets():
    lmap = layout.layout(_spec_l5_m4())
    assert lmap.positions[("A", 7)] == layout.GridPos(6, 2)
    assert lmap.positions[("B", 7)] == layout.GridPos(7, 3)
    assert lmap.positions[("X", 7)] == layout.GridPos(6, 3)
    assert lmap.positions[("Z", 7)] == layout.GridPos(7, 2)
    for group in layout.GROUPS:
        assert lmap.positions[(group, 0)] == layout.GridPos(*layout.SUBGRID_OFFSETS[group])


def test_layout_positions_distinct_and_in_region():
    spec = _spec_l5_m4()
    lmap = layout.layout(spec)
    seen = set(lmap.positions.values())
    assert len(seen) == 4 * spec.l * spec.m
    rows, cols = zip(*seen)
    assert min(rows) == 0 and max(rows) == 2 * spec.m - 1
    assert min(cols) == 0 and max(cols) == 2 * spec.l - 1
    assert lmap.device_shape() == (2 * spec.m, 2 * spec.l)


def test_one_dimensional_code_layout():
    spec = codes.catalog()["gb72_8_10"][0]
    assert spec.m == 1
    lmap = layout.layout(spec)
    homes = lmap.home_array("A")
    assert set(homes[:, 0]) == {0}
    assert list(homes[:, 1]) == [2 * c for c in range(36)]
    assert set(lmap.home_array("Z")[:, 0]) == {1}


def test_relative_positions_pure_x_term():
    assert layout.relative_positions(PolyTerm(2, 0), 5, 4) == {(0, 2), (0, -3)}


def test_relative_positions_identity_term():
    assert layout.relative_positions(PolyTerm(0, 0), 5, 4) == {(0, 0)}


def test_relative_positions_mixed_term():
    got = layout.relative_positions(PolyTerm(1, 1), 12, 4)
    assert got == {(1, 1), (1, -11), (-3, 1), (-3, -11)}


def test_relative_positions_pure_y_term():
    assert layout.relative_positions(PolyTerm(0, 1), 15, 3) == {(1, 0), (-2, 0)}


def test_check_targets_horizontal_periodicity_split():
    spec = _spec_l5_m4()
    targets = layout.check_targets(PolyTerm(2, 0), "X", "A", spec)
    for j, data, off in targets:
        col = j // spec.m
        assert off == ((0, -3) if col >= 3 else (0, 2))
        assert data == ((col + 2) % 5) * 4 + (j % 4)


def test_check_targets_identity_term_pairs_same_index():
    spec = _spec_l5_m4()
    for ct in ("X", "Z"):
        for block, base in (("A", 0), ("B", 20)):
            for j, data, off in layout.check_targets(PolyTerm(0, 0), ct, block, spec):
                assert data == base + j and off == (0, 0)


def test_check_targets_validates_arguments():
    spec = _spec_l5_m4()
    with pytest.raises(ValueError):
        layout.check_targets(PolyTerm(0, 0), "Y", "A", spec)
    with pytest.raises(ValueError):
        layout.check_targets(PolyTerm(0, 0), "X", "C", spec)


@pytest.mark.parametrize("name", sorted(codes.catalog()))
def test_targets_reproduce_check_matrices(name):
    spec = codes.catalog()[name][0]
    code = codes.build_code(spec)
    lm = spec.l * spec.m
    for ct, mat, polys in (("X", code.Gx, (("A", spec.a), ("B", spec.b))),
                           ("Z", code.Gz, (("A", spec.b), ("B", spec.a)))):
        dense = np.zeros((lm, 2 * lm), dtype=np.uint8)
        for block, poly in polys:
            for term in poly:
                for j, data, _ in layout.check_targets(term, ct, block, spec):
                    assert dense[j, data] == 0, "duplicate target"
                    dense[j, data] = 1
        assert np.array_equal(dense, mat.to_dense())


@pytest.mark.parametrize("name", sorted(codes.catalog()))
def test_target_offsets_match_relative_positions(name):
    spec = codes.catalog()[name][0]
    for poly in (spec.a, spec.b):
        for term in poly:
            family = layout.relative_positions(term, spec.l, spec.m)
            for ct, sgn in (("X", 1), ("Z", -1)):
                offs = {off for _, _, off in
                        layout.check_targets(term, ct, "A", spec)}
                assert offs == {(sgn * q, sgn * p) for q, p in family}


@pytest.mark.parametrize("name", sorted(codes.catalog()))
def test_boundary_exclusivity(name):
    """Displacing all checks by one offset isolates exactly its wrap class.

    Checks of the matching class land one site from their data; every
    other check exits the data region in at least one axis, so a global
    pulse cannot touch a wrong pair.
    """
    spec = codes.catalog()[name][0]
    lmap = layout.layout(spec)
    m2, l2 = lmap.device_shape()
    for ct in ("X", "Z"):
        homes = lmap.home_array(ct)
        polys = (spec.a, spec.b) if ct == "X" else (spec.b, spec.a)
        for block, poly in zip(("A", "B"), polys):
            for term in poly:
                targets = layout.check_targets(term, ct, block, spec)
                for family_off in {off for _, _, off in targets}:
                    disp = homes + 2 * np.array(family_off)
                    inside = ((disp[:, 0] >= 0) & (disp[:, 0] < m2)
                              & (disp[:, 1] >= 0) & (disp[:, 1] < l2))
                    klass = np.array([off == family_off for _, _, off in targets])
                    assert np.array_equal(inside, klass)
                    for (j, data, off), pos in zip(targets, disp):
                        dpos = np.array(lmap.data_site(data))
                        if off == family_off:
                            assert np.abs(pos - dpos).sum() == 1
                        else:
                            assert (pos[0] < 0 or pos[0] >= m2
                                    or pos[1] < 0 or pos[1] >= l2)


def test_collision_free_variant_shifts_check_lanes():
    spec = _spec_l5_m4()
    std = layout.layout(spec)
    cf = layout.layout(spec, variant="collision-free")
    assert cf.lane_offset_sites == 0.5
    assert cf.positions == std.positions
    assert cf.site_um("A", 3) == std.site_um("A", 3)
    xr, xc = cf.site_um("X", 0)
    assert (xr, xc) == (2.5, 7.5)
    with pytest.raises(ValueError):
        layout.layout(spec, variant="diagonal")


def test_csv_dump_shape_and_header():
    spec = _spec_l5_m4()
    lmap = layout.layout(spec)
    buf = io.StringIO()
    layout.dump_csv(lmap, buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "qubit_id,group,row_sites,col_sites"
    assert len(lines) == 1 + 4 * spec.l * spec.m
    assert "27,B,7,3" in lines
