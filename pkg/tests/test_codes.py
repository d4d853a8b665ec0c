import numpy as np
import pytest
from oracles import dense_rank, exhaustive_css_distance

from gbmem import gf2
from gbmem.codes import (
    PolySpec,
    PolyTerm,
    SpecParseError,
    build_code,
    build_surface_code,
    catalog,
    cyclic_power,
    estimate_distance,
    parse_poly,
    parse_spec_text,
    poly_to_string,
)

# (name, n, k, weight) straight from the six-code selection table
TABLE = [
    ("gb72_12_6", 72, 12, 6),
    ("gb90_8_10", 90, 8, 6),
    ("gb144_12_12", 144, 12, 6),
    ("gb128_16_8", 128, 16, 8),
    ("gb72_8_10", 72, 8, 8),
    ("gb96_10_12", 96, 10, 8),
]


def test_cyclic_power_matches_printed_matrices():
    s3 = cyclic_power(3, 1).to_dense()
    assert np.array_equal(s3, [[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    s3sq = cyclic_power(3, 2).to_dense()
    assert np.array_equal(s3sq, [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    assert np.array_equal(cyclic_power(3, 0).to_dense(), np.eye(3, dtype=np.uint8))


def test_cyclic_power_rejects_out_of_range():
    with pytest.raises(ValueError):
        cyclic_power(3, 3)
    with pytest.raises(ValueError):
        cyclic_power(3, -1)


@pytest.mark.parametrize("name,n,k,weight", TABLE)
def test_table_codes_parameters(name, n, k, weight):
    spec, d = catalog()[name]
    code = build_code(spec, d_claimed=d)
    assert code.n == n
    assert code.k == k
    assert all(w == weight for w in code.Gx.weights())
    assert all(w == weight for w in code.Gz.weights())
    assert gf2.mul(code.Gx, code.Gz.transpose()).is_zero()
    assert code.logicals_x.rows == k and code.logicals_z.rows == k


def test_k_matches_dense_rank_oracle():
    spec, _ = catalog()["gb72_12_6"]
    code = build_code(spec)
    gx = code.Gx.to_dense()
    gz = code.Gz.to_dense()
    assert dense_rank(gx) == 30
    assert dense_rank(gz) == 30
    assert code.k == 72 - 30 - 30


def test_logicals_commute_and_pair():
    for name in ("gb72_12_6", "gb96_10_12"):
        spec, _ = catalog()[name]
        code = build_code(spec)
        lx, lz = code.logicals_x, code.logicals_z
        # X logicals commute with Z checks and vice versa
        assert gf2.mul(code.Gz, lx.transpose()).is_zero()
        assert gf2.mul(code.Gx, lz.transpose()).is_zero()
        # symplectic pairing is the identity
        assert gf2.mul(lx, lz.transpose()) == gf2.BitMatrix.identity(code.k)
        # logicals sit outside the stabilizer rowspaces
        gx = code.Gx.to_dense()
        stacked = np.concatenate([gx, lx.to_dense()])
        assert dense_rank(stacked) == dense_rank(gx) + code.k


def test_fully_constrained_code_has_k_zero():
    spec = PolySpec(l=1, m=1, a=(PolyTerm(0, 0),), b=(PolyTerm(0, 0),))
    code = build_code(spec)
    assert code.n == 2 and code.k == 0
    assert estimate_distance(code) is None


def test_m_equals_one_reduction_still_valid():
    spec, d = catalog()["gb72_8_10"]
    assert spec.m == 1
    code = build_code(spec, d_claimed=d)
    assert code.k == 8
    assert all(w == 8 for w in code.Gx.weights())


def test_toy_code_distance_exact_vs_oracle():
    spec = PolySpec(l=3, m=3, a=parse_poly("1 + x + y"), b=parse_poly("1 + x^2 + y^2"))
    code = build_code(spec)
    assert code.n == 18
    d_lib = estimate_distance(code)
    d_oracle = exhaustive_css_distance(code.Gx.to_dense(), code.Gz.to_dense(), code.n)
    assert d_lib == d_oracle


def test_72_12_6_distance_bound_reaches_claimed():
    spec, d = catalog()["gb72_12_6"]
    code = build_code(spec, d_claimed=d)
    assert estimate_distance(code, effort=200, seed=1) <= 6


def test_surface_code_small():
    code = build_surface_code(3)
    assert (code.n, code.k) == (9, 1)
    assert gf2.mul(code.Gx, code.Gz.transpose()).is_zero()
    assert estimate_distance(code) == 3


def test_surface_code_d5_distance_exhaustive():
    code = build_surface_code(5)
    assert (code.n, code.k) == (25, 1)
    assert estimate_distance(code) == 5


def test_surface_code_d11_parameters():
    code = build_surface_code(11)
    assert (code.n, code.k) == (121, 1)
    # twelve independent copies give the paper's comparison block count
    assert 12 * code.n == 1452


def test_surface_code_rejects_even_d():
    with pytest.raises(ValueError):
        build_surface_code(4)


def test_parse_poly_forms():
    assert parse_poly("1") == (PolyTerm(0, 0),)
    assert parse_poly("x") == (PolyTerm(1, 0),)
    assert parse_poly("x^3") == (PolyTerm(3, 0),)
    assert parse_poly("y^2") == (PolyTerm(0, 2),)
    assert parse_poly("x*y") == (PolyTerm(1, 1),)
    assert parse_poly("x^9*y^2") == (PolyTerm(9, 2),)
    assert parse_poly("y + y^2 + x^3") == (PolyTerm(0, 1), PolyTerm(0, 2), PolyTerm(3, 0))


def test_parse_poly_rejects_garbage():
    for bad in ("z", "x^", "x**y", "x^2 y", ""):
        with pytest.raises(ValueError):
            parse_poly(bad)


def test_poly_roundtrip():
    for _, (spec, _) in catalog().items():
        assert parse_poly(poly_to_string(spec.a)) == spec.a
        assert parse_poly(poly_to_string(spec.b)) == spec.b


def test_parse_spec_text():
    spec, d = parse_spec_text(
        """
        # the [72,12,6] code
        l = 6
        m = 6
        a = y + y^2 + x^3
        b = y^3 + x + x^2
        d = 6
        """
    )
    assert (spec.l, spec.m) == (6, 6)
    assert d == 6
    code = build_code(spec)
    assert (code.n, code.k) == (72, 12)


def test_parse_spec_reports_line_numbers():
    with pytest.raises(SpecParseError) as exc:
        parse_spec_text("l = 6\nm = 6\na = y + zoo\nb = x")
    assert exc.value.line == 3


def test_spec_validation():
    with pytest.raises(ValueError):
        PolySpec(l=3, m=3, a=(PolyTerm(3, 0),), b=(PolyTerm(0, 0),))
    with pytest.raises(ValueError):
        PolySpec(l=3, m=3, a=(PolyTerm(1, 0), PolyTerm(1, 0)), b=(PolyTerm(0, 0),))
