"""Generalized-bicycle CSS codes from two-variable polynomial specs.

A code is given by cycle lengths (l, m) and polynomials a(x, y), b(x, y)
whose terms x^p y^q stand for the permutation S_l^p (x) S_m^q, where S_l
is the cyclic shift on l elements.  The check matrices are

    Gx = (A | B),      Gz = (B^T | A^T),

with A = a(S_l, S_m) and B = b(S_l, S_m).  Columns 0..lm-1 are the A-block
data qubits, lm..2lm-1 the B-block; within a block, qubit i sits at grid
position (i mod m, i // m).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .gf2 import BitMatrix

__all__ = [
    "PolyTerm",
    "PolySpec",
    "CssCode",
    "SpecParseError",
    "cyclic_power",
    "build_code",
    "estimate_distance",
    "build_surface_code",
    "parse_poly",
    "poly_to_string",
    "load_spec",
    "parse_spec_text",
    "catalog",
]


@dataclass(frozen=True)
class PolyTerm:
    """One monomial x^p y^q."""

    p: int
    q: int

    def is_mixed(self) -> bool:
        return self.p > 0 and self.q > 0

    def __str__(self) -> str:
        if self.p == 0 and self.q == 0:
            return "1"
        parts = []
        if self.p:
            parts.append("x" if self.p == 1 else f"x^{self.p}")
        if self.q:
            parts.append("y" if self.q == 1 else f"y^{self.q}")
        return "*".join(parts)


@dataclass(frozen=True)
class PolySpec:
    """Parameters (l, m, a, b) of a generalized-bicycle code."""

    l: int
    m: int
    a: tuple[PolyTerm, ...]
    b: tuple[PolyTerm, ...]
    name: str | None = None

    def __post_init__(self):
        if self.l < 1 or self.m < 1:
            raise ValueError("l and m must be >= 1")
        if not self.a or not self.b:
            raise ValueError("polynomials a and b must be non-empty")
        for poly, label in ((self.a, "a"), (self.b, "b")):
            seen = set()
            for t in poly:
                if not (0 <= t.p < self.l):
                    raise ValueError(f"{label}: exponent of x must satisfy 0 <= p < l, got {t.p}")
                if not (0 <= t.q < self.m):
                    raise ValueError(f"{label}: exponent of y must satisfy 0 <= q < m, got {t.q}")
                if (t.p, t.q) in seen:
                    raise ValueError(f"{label}: duplicate term {t}")
                seen.add((t.p, t.q))

    @property
    def n(self) -> int:
        return 2 * self.l * self.m

    @property
    def weight(self) -> int:
        return len(self.a) + len(self.b)

    def has_mixed_terms(self) -> bool:
        return any(t.is_mixed() for t in self.a + self.b)


@dataclass(frozen=True)
class CssCode:
    """A CSS code with checks, logical bases, and optional claimed distance."""

    n: int
    k: int
    Gx: BitMatrix
    Gz: BitMatrix
    logicals_x: BitMatrix
    logicals_z: BitMatrix
    d_claimed: int | None = None
    spec: PolySpec | None = None
    name: str | None = None


def cyclic_power(l: int, p: int) -> BitMatrix:
    """The l x l cyclic shift matrix S_l^p, entry (i, (i+p) mod l) = 1."""
    if not 0 <= p < l:
        raise ValueError(f"exponent must satisfy 0 <= p < l, got p={p}, l={l}")
    dense = np.zeros((l, l), dtype=np.uint8)
    dense[np.arange(l), (np.arange(l) + p) % l] = 1
    return BitMatrix.from_dense(dense)


def _poly_matrix(terms: tuple[PolyTerm, ...], l: int, m: int) -> np.ndarray:
    acc = np.zeros((l * m, l * m), dtype=np.uint8)
    for t in terms:
        acc ^= np.kron(cyclic_power(l, t.p).to_dense(), cyclic_power(m, t.q).to_dense())
    return acc


def build_code(
    spec: PolySpec,
    d_claimed: int | None = None,
    name: str | None = None,
) -> CssCode:
    """Construct the generalized-bicycle code for `spec`.

    Raises RuntimeError if the CSS commutation check Gx Gz^T = 0 fails,
    which would indicate an internal bug of the construction itself.
    """
    A = _poly_matrix(spec.a, spec.l, spec.m)
    B = _poly_matrix(spec.b, spec.l, spec.m)
    Gx = BitMatrix.from_dense(np.concatenate([A, B], axis=1))
    Gz = BitMatrix.from_dense(np.concatenate([B.T, A.T], axis=1))
    prod = gf2.mul(Gx, Gz.transpose())
    if not prod.is_zero():
        raise RuntimeError("CSS commutation Gx*Gz^T = 0 failed; construction bug")
    n = spec.n
    rx = gf2.rank(Gx)
    rz = gf2.rank(Gz)
    k = n - rx - rz
    lx = gf2.quotient_basis(gf2.nullspace(Gz), Gx)
    lz = gf2.quotient_basis(gf2.nullspace(Gx), Gz)
    lx, _ = gf2.rref(lx)
    lz, _ = gf2.rref(lz)
    lx = lx.take_rows(range(k))
    lz = lz.take_rows(range(k))
    if k:
        # symplectic pairing: make Lx @ Lz^T the identity so that logical
        # observable j means the same operator pair in every run
        M = gf2.mul(lx, lz.transpose())
        U = gf2.inverse(M).transpose()
        lz = gf2.mul(U, lz)
        if gf2.mul(lx, lz.transpose()) != BitMatrix.identity(k):
            raise RuntimeError("symplectic pairing failed; construction bug")
    return CssCode(
        n=n,
        k=k,
        Gx=Gx,
        Gz=Gz,
        logicals_x=lx,
        logicals_z=lz,
        d_claimed=d_claimed,
        spec=spec,
        name=name or spec.name,
    )


# -- distance estimation ----------------------------------------------


def _rows_as_ints(M: BitMatrix) -> list[int]:
    out = []
    dense = M.to_dense()
    for i in range(M.rows):
        acc = 0
        for j in np.nonzero(dense[i])[0]:
            acc |= 1 << int(j)
        out.append(acc)
    return out


def _min_weight_exact(stab: list[int], logs: list[int]) -> int:
    span = [0]
    for g in stab:
        span.extend([s ^ g for s in span])
    best = None
    for mask in range(1, 1 << len(logs)):
        v = 0
        mm = mask
        idx = 0
        while mm:
            if mm & 1:
                v ^= logs[idx]
            mm >>= 1
            idx += 1
        w = min((v ^ s).bit_count() for s in span)
        best = w if best is None else min(best, w)
    return best


def _min_weight_sampled(stab: list[int], logs: list[int], effort: int, rng) -> int:
    best = None
    n_logs = len(logs)
    for _ in range(effort):
        mask = int(rng.integers(1, 1 << n_logs))
        v = 0
        for idx in range(n_logs):
            if (mask >> idx) & 1:
                v ^= logs[idx]
        # greedy descent over stabilizer rows, then over row pairs
        improved = True
        while improved:
            improved = False
            w = v.bit_count()
            for g in stab:
                if (v ^ g).bit_count() < w:
                    v ^= g
                    w = v.bit_count()
                    improved = True
            if not improved:
                for i in range(len(stab)):
                    for j in range(i + 1, len(stab)):
                        g = stab[i] ^ stab[j]
                        if (v ^ g).bit_count() < w:
                            v ^= g
                            w = v.bit_count()
                            improved = True
                            break
                    if improved:
                        break
        w = v.bit_count()
        best = w if best is None else min(best, w)
    return best


def estimate_distance(code: CssCode, effort: int = 300, seed: int = 0) -> int | None:
    """Upper bound on the code distance; exact by exhaustion when n <= 30.

    Searches both logical types and returns the lightest representative
    weight found.  Returns None when the code has no logicals (k = 0).
    The claimed distance is metadata only; callers should compare the
    bound against it and flag anything lighter.
    """
    if code.k == 0:
        return None
    rng = np.random.default_rng(seed)
    best = code.n
    for stab_m, logs_m in ((code.Gx, code.logicals_x), (code.Gz, code.logicals_z)):
        red, piv = gf2.rref(stab_m)
        stab = _rows_as_ints(red.take_rows(range(len(piv))))
        logs = _rows_as_ints(logs_m)
        if code.n <= 30:
            w = _min_weight_exact(stab, logs)
        else:
            w = _min_weight_sampled(stab, logs, effort, rng)
        best = min(best, w)
    return best


# -- rotated surface code ----------------------------------------------


def build_surface_code(d: int) -> CssCode:
    """Rotated surface code on a d x d data grid (d odd), n = d^2, k = 1."""
    if d < 3 or d % 2 == 0:
        raise ValueError("d must be odd and >= 3")
    n = d * d

    def data_at(r, c):
        return r * d + c

    x_checks: list[list[int]] = []
    z_checks: list[list[int]] = []
    for r in range(d + 1):
        for c in range(d + 1):
            support = [
                data_at(rr, cc)
                for rr, cc in ((r - 1, c - 1), (r - 1, c), (r, c - 1), (r, c))
                if 0 <= rr < d and 0 <= cc < d
            ]
            if len(support) == 1:
                continue
            is_x = (r + c) % 2 == 0
            if len(support) == 2:
                # weight-2 boundary cells: X checks live on top/bottom,
                # Z checks on left/right; drop the rest
                on_top_bottom = r == 0 or r == d
                if is_x and not on_top_bottom:
                    continue
                if not is_x and on_top_bottom:
                    continue
            (x_checks if is_x else z_checks).append(support)

    def to_matrix(checks):
        dense = np.zeros((len(checks), n), dtype=np.uint8)
        for i, sup in enumerate(checks):
            dense[i, sup] = 1
        return BitMatrix.from_dense(dense)

    Gx = to_matrix(x_checks)
    Gz = to_matrix(z_checks)
    if not gf2.mul(Gx, Gz.transpose()).is_zero():
        raise RuntimeError("surface code CSS commutation failed; construction bug")
    k = n - gf2.rank(Gx) - gf2.rank(Gz)
    lx = gf2.quotient_basis(gf2.nullspace(Gz), Gx)
    lz = gf2.quotient_basis(gf2.nullspace(Gx), Gz)
    lx, _ = gf2.rref(lx)
    lz, _ = gf2.rref(lz)
    lx = lx.take_rows(range(k))
    lz = lz.take_rows(range(k))
    if k:
        M = gf2.mul(lx, lz.transpose())
        U = gf2.inverse(M).transpose()
        lz = gf2.mul(U, lz)
    return CssCode(
        n=n,
        k=k,
        Gx=Gx,
        Gz=Gz,
        logicals_x=lx,
        logicals_z=lz,
        d_claimed=d,
        name=f"surface_d{d}",
    )


# -- polynomial / spec-file parsing ------------------------------------


class SpecParseError(ValueError):
    """Spec file rejected; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


_TERM_RE = re.compile(
    r"^(?:1|x(?:\^(?P<p1>\d+))?|y(?:\^(?P<q1>\d+))?|"
    r"x(?:\^(?P<p2>\d+))?\s*\*\s*y(?:\^(?P<q2>\d+))?)$"
)


def parse_poly(text: str) -> tuple[PolyTerm, ...]:
    """Parse a polynomial like `y + y^2 + x^3` or `1 + x^2*y`."""
    terms = []
    for raw in text.split("+"):
        tok = raw.strip()
        if not tok:
            raise ValueError(f"empty term in polynomial {text!r}")
        m = _TERM_RE.match(tok)
        if m is None:
            raise ValueError(f"cannot parse term {tok!r}")
        p = q = 0
        if tok != "1":
            if m.group("p2") is not None or "*" in tok:
                p = int(m.group("p2")) if m.group("p2") else (1 if tok.startswith("x") else 0)
                q = int(m.group("q2")) if m.group("q2") else 1
            elif tok.startswith("x"):
                p = int(m.group("p1")) if m.group("p1") else 1
            else:
                q = int(m.group("q1")) if m.group("q1") else 1
        terms.append(PolyTerm(p, q))
    return tuple(terms)


def poly_to_string(terms: tuple[PolyTerm, ...]) -> str:
    return " + ".join(str(t) for t in terms)


def parse_spec_text(text: str, name: str | None = None) -> tuple[PolySpec, int | None]:
    """Parse the key/value code-spec format; returns (spec, claimed d)."""
    values: dict[str, str] = {}
    lines_of: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecParseError(f"expected `key = value`, got {line!r}", lineno)
        key, _, val = line.partition("=")
        key = key.strip().lower()
        if key in values:
            raise SpecParseError(f"duplicate key {key!r}", lineno)
        values[key] = val.strip()
        lines_of[key] = lineno
    for required in ("l", "m", "a", "b"):
        if required not in values:
            raise SpecParseError(f"missing key {required!r}", len(text.splitlines()) or 1)

    def intval(key):
        try:
            return int(values[key])
        except ValueError:
            raise SpecParseError(f"key {key!r} must be an integer", lines_of[key]) from None

    l, m = intval("l"), intval("m")
    try:
        a = parse_poly(values["a"])
    except ValueError as e:
        raise SpecParseError(str(e), lines_of["a"]) from None
    try:
        b = parse_poly(values["b"])
    except ValueError as e:
        raise SpecParseError(str(e), lines_of["b"]) from None
    d = None
    if "d" in values:
        d = intval("d")
    specname = values.get("name", name)
    try:
        spec = PolySpec(l=l, m=m, a=a, b=b, name=specname)
    except ValueError as e:
        raise SpecParseError(str(e), lines_of["l"]) from None
    return spec, d


def load_spec(path) -> tuple[PolySpec, int | None]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec_text(fh.read())


# -- built-in codes ----------------------------------------------------

def _spec(name, l, m, a, b):
    return PolySpec(l=l, m=m, a=parse_poly(a), b=parse_poly(b), name=name)


_CATALOG: dict[str, tuple[PolySpec, int]] = {
    "gb72_12_6": (_spec("gb72_12_6", 6, 6, "y + y^2 + x^3", "y^3 + x + x^2"), 6),
    "gb90_8_10": (_spec("gb90_8_10", 15, 3, "y + y^2 + x^9", "1 + x^2 + x^7"), 10),
    "gb144_12_12": (_spec("gb144_12_12", 12, 6, "y + y^2 + x^3", "y^3 + x + x^2"), 12),
    "gb128_16_8": (_spec("gb128_16_8", 8, 8, "y + y^2 + y^5 + x^6", "y^2 + x^2 + x^3 + x^7"), 8),
    "gb72_8_10": (_spec("gb72_8_10", 36, 1, "1 + x^9 + x^28 + x^31", "1 + x + x^21 + x^34"), 10),
    "gb96_10_12": (_spec("gb96_10_12", 12, 4, "1 + y + x*y + x^9", "1 + x^2 + x^7 + x^9*y^2"), 12),
}


def catalog() -> dict[str, tuple[PolySpec, int]]:
    """Built-in code specs: name -> (PolySpec, claimed distance)."""
    return dict(_CATALOG)
