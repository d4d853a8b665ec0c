"""Dense GF(2) linear algebra on bit-packed matrices.

Rows are packed into 64-bit words, little-endian within each word, so
column c lives at bit (c % 64) of word (c // 64).  Everything the code
builder and decoder need reduces to rank / reduced-row-echelon /
nullspace / quotient computations, all implemented by in-place Gaussian
elimination with deterministic lowest-index pivoting.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "BitMatrix",
    "rank",
    "rref",
    "nullspace",
    "quotient_basis",
    "mul",
    "matvec",
    "hstack",
    "inverse",
]

_WORD = 64


class BitMatrix:
    """A rows x cols matrix over GF(2), bit-packed row-major.

    Treated as immutable by the public API: operations return new
    matrices and never modify their arguments.  Bits beyond `cols` in
    the last word of each row are kept zero.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: np.ndarray):
        if rows < 0 or cols < 0:
            raise ValueError("negative dimensions")
        words = (cols + _WORD - 1) // _WORD
        if data.shape != (rows, max(words, 0)):
            raise ValueError(f"data shape {data.shape} does not match {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.data = data

    # -- construction -------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        words = (cols + _WORD - 1) // _WORD
        return cls(rows, cols, np.zeros((rows, words), dtype=np.uint64))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        out = cls.zeros(n, n)
        for i in range(n):
            out.data[i, i // _WORD] |= np.uint64(1) << np.uint64(i % _WORD)
        return out

    @classmethod
    def from_dense(cls, arr) -> "BitMatrix":
        """Pack a 2D 0/1 array (any integer dtype) into a BitMatrix."""
        arr = np.asarray(arr, dtype=np.uint8) & 1
        if arr.ndim != 2:
            raise ValueError("expected a 2D array")
        rows, cols = arr.shape
        words = (cols + _WORD - 1) // _WORD
        padded = np.zeros((rows, words * _WORD), dtype=np.uint8)
        padded[:, :cols] = arr
        packed = np.packbits(padded, axis=1, bitorder="little")
        data = packed.view(np.uint64).reshape(rows, words) if words else packed.reshape(rows, 0).view(np.uint64)
        return cls(rows, cols, np.ascontiguousarray(data))

    def to_dense(self) -> np.ndarray:
        if self.cols == 0 or self.rows == 0:
            return np.zeros((self.rows, self.cols), dtype=np.uint8)
        as_bytes = self.data.view(np.uint8).reshape(self.rows, -1)
        bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
        return bits[:, : self.cols].copy()

    def copy(self) -> "BitMatrix":
        return BitMatrix(self.rows, self.cols, self.data.copy())

    # -- element access ------------------------------------------------

    def get(self, i: int, j: int) -> int:
        return int((self.data[i, j // _WORD] >> np.uint64(j % _WORD)) & np.uint64(1))

    def row_weight(self, i: int) -> int:
        return int(np.bitwise_count(self.data[i]).sum())

    def weights(self) -> np.ndarray:
        """Per-row Hamming weights."""
        if self.data.shape[1] == 0:
            return np.zeros(self.rows, dtype=np.int64)
        return np.bitwise_count(self.data).sum(axis=1).astype(np.int64)

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense().T)

    def take_rows(self, idx) -> "BitMatrix":
        return BitMatrix(len(idx), self.cols, self.data[np.asarray(idx, dtype=np.intp)].copy())

    def is_zero(self) -> bool:
        return not self.data.any()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        raise TypeError("BitMatrix is not hashable")

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


def _eliminate(data: np.ndarray, rows: int, cols: int) -> list[int]:
    """In-place Gauss-Jordan reduction; returns pivot column indices."""
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        w, b = divmod(c, _WORD)
        shift = np.uint64(b)
        colbits = (data[r:, w] >> shift) & np.uint64(1)
        nz = np.nonzero(colbits)[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            data[[r, piv]] = data[[piv, r]]
        hits = np.nonzero((data[:, w] >> shift) & np.uint64(1))[0]
        hits = hits[hits != r]
        if hits.size:
            data[hits] ^= data[r]
        pivots.append(c)
        r += 1
    return pivots


def rref(M: BitMatrix) -> tuple[BitMatrix, tuple[int, ...]]:
    """Reduced row echelon form and pivot columns (lowest-index pivots)."""
    data = M.data.copy()
    pivots = _eliminate(data, M.rows, M.cols)
    return BitMatrix(M.rows, M.cols, data), tuple(pivots)


def rank(M: BitMatrix) -> int:
    data = M.data.copy()
    return len(_eliminate(data, M.rows, M.cols))


def nullspace(M: BitMatrix) -> BitMatrix:
    """Basis of the right kernel {v : M v = 0}; row count = cols - rank."""
    R, pivots = rref(M)
    pivset = set(pivots)
    free = [c for c in range(M.cols) if c not in pivset]
    out = BitMatrix.zeros(len(free), M.cols)
    for row_idx, f in enumerate(free):
        out.data[row_idx, f // _WORD] |= np.uint64(1) << np.uint64(f % _WORD)
        fw, fb = divmod(f, _WORD)
        for i, pc in enumerate(pivots):
            if (R.data[i, fw] >> np.uint64(fb)) & np.uint64(1):
                out.data[row_idx, pc // _WORD] |= np.uint64(1) << np.uint64(pc % _WORD)
    return out


def _reduce_row(row: np.ndarray, basis: np.ndarray, basis_pivots: list[int]) -> np.ndarray:
    """Reduce one packed row against rows of `basis` with known pivot columns."""
    row = row.copy()
    for i, c in enumerate(basis_pivots):
        w, b = divmod(c, _WORD)
        if (row[w] >> np.uint64(b)) & np.uint64(1):
            row ^= basis[i]
    return row


def quotient_basis(N: BitMatrix, R: BitMatrix) -> BitMatrix:
    """Rows of N spanning rowspace(N) / rowspace(R).

    Requires rowspace(R) to be contained in rowspace(N).  Returns
    original (unreduced) rows of N, selected in order, that are
    independent of rowspace(R); the count is rank(N) - rank(R).
    """
    if N.cols != R.cols:
        raise ValueError("column count mismatch")
    refN, pivN = rref(N)
    for i in range(R.rows):
        if _reduce_row(R.data[i], refN.data, list(pivN)).any():
            raise ValueError("rowspace(R) is not contained in rowspace(N)")
    # Grow an elimination basis seeded with rref(R); N rows that still
    # have a nonzero residual are the quotient representatives.
    refR, pivR = rref(R)
    basis = [refR.data[i].copy() for i in range(len(pivR))]
    basis_pivots = list(pivR)
    selected: list[int] = []
    for i in range(N.rows):
        resid = _reduce_row(N.data[i], np.array(basis) if basis else np.zeros((0, N.data.shape[1]), np.uint64), basis_pivots)
        if resid.any():
            selected.append(i)
            # register the residual with its leading column as new pivot
            lead = -1
            for w in range(resid.shape[0]):
                if resid[w]:
                    lead = w * _WORD + int(resid[w] & (~resid[w] + np.uint64(1))).bit_length() - 1
                    break
            # keep basis rows reduced against each other is unnecessary
            # for membership testing; insertion order keeps pivots valid
            pos = 0
            while pos < len(basis_pivots) and basis_pivots[pos] < lead:
                pos += 1
            basis.insert(pos, resid)
            basis_pivots.insert(pos, lead)
            # re-reduce existing basis rows so pivot columns stay unique
            for bi in range(len(basis)):
                if bi == pos:
                    continue
                w, b = divmod(lead, _WORD)
                if (basis[bi][w] >> np.uint64(b)) & np.uint64(1):
                    basis[bi] = basis[bi] ^ resid
    return N.take_rows(selected)


def mul(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    """Matrix product over GF(2)."""
    if A.cols != B.rows:
        raise ValueError("shape mismatch")
    BT = B.transpose()
    out = BitMatrix.zeros(A.rows, B.cols)
    for i in range(A.rows):
        if not A.data[i].any():
            continue
        acc = np.bitwise_and(BT.data, A.data[i])
        bits = (np.bitwise_count(acc).sum(axis=1) & 1).astype(np.uint8)
        out.data[i] = BitMatrix.from_dense(bits[None, :]).data[0]
    return out


def matvec(M: BitMatrix, v: np.ndarray) -> np.ndarray:
    """M @ v over GF(2); v is a dense 0/1 vector of length cols."""
    vp = BitMatrix.from_dense(np.asarray(v, dtype=np.uint8)[None, :]).data[0]
    acc = np.bitwise_and(M.data, vp)
    return (np.bitwise_count(acc).sum(axis=1) & 1).astype(np.uint8)


def hstack(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    if A.rows != B.rows:
        raise ValueError("row count mismatch")
    da, db = A.to_dense(), B.to_dense()
    return BitMatrix.from_dense(np.concatenate([da, db], axis=1))


def inverse(M: BitMatrix) -> BitMatrix:
    """Inverse of a square matrix; raises ValueError if singular."""
    if M.rows != M.cols:
        raise ValueError("not square")
    aug = hstack(M, BitMatrix.identity(M.rows))
    R, pivots = rref(aug)
    if list(pivots[: M.rows]) != list(range(M.rows)):
        raise ValueError("singular matrix")
    dense = R.to_dense()
    return BitMatrix.from_dense(dense[:, M.rows :])
