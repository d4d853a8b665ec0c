"""Pure-numpy implementations of the hot kernels.

Same contracts as the compiled versions in _core.pyx; this module is
selected automatically when the extension is not built.  The vector forms
trade memory for speed but keep the arithmetic order of the loop versions
(posterior sums accumulate in edge order through the unbuffered ufunc,
min/xor reductions are order-free), so both backends produce bit-identical
results.

Shared conventions:
  - parity checks are rows, error mechanisms are columns;
  - row-major edge e has variable col_idx[e], rows delimited by row_ptr;
  - column-major slot s maps to row-major edge edge_rm[s], columns
    delimited by col_ptr;
  - packed bit rows are uint64 words, bit j of row r at
    mat[r, j >> 6] >> (j & 63).
"""

import numpy as np

# Cap on check-to-variable message magnitude.  A degree-1 check has no
# "other" edges, so its excluded min is +inf; the cap keeps posteriors
# finite without affecting any realistic message (prior LLRs stay below
# ~700 for any representable probability).  Kept moderate so that sums
# involving clamped messages retain fine absolute resolution and the two
# backends agree to tight tolerance despite different summation trees.
MESSAGE_CLAMP = 1e6


def scatter_xor(buf, shot_idx, rows, mech_idx):
    """XOR packed rows into packed shot buffers.

    For each k: buf[shot_idx[k], :] ^= rows[mech_idx[k], :].  Uses the
    unbuffered ufunc so repeated shot indices accumulate correctly.
    """
    if shot_idx.shape[0] == 0:
        return
    np.bitwise_xor.at(buf, shot_idx, rows[mech_idx])


def _parity(bits_per_edge, row_starts):
    return np.bitwise_xor.reduceat(bits_per_edge.astype(np.uint8), row_starts)


def bp_min_sum(row_ptr, col_idx, col_ptr, edge_rm, llr, syndrome,
               max_iters, ms_scale, posterior, hard):
    """Flooding min-sum belief propagation on a sparse GF(2) check matrix.

    Writes the final log-likelihood ratios into `posterior` and the hard
    decisions (posterior < 0) into `hard`.  Returns (converged, iters)
    where converged means the hard decision satisfies the syndrome; the
    all-zero decision is tested before the first iteration, so a zero
    syndrome converges at iteration 0.

    Every check and every variable must touch at least one edge.
    """
    m = row_ptr.shape[0] - 1
    n = col_ptr.shape[0] - 1
    if m <= 0 or n <= 0:
        raise ValueError("bp_min_sum needs at least one check and one variable")
    deg_r = np.diff(row_ptr)
    deg_c = np.diff(col_ptr)
    if deg_r.min() <= 0 or deg_c.min() <= 0:
        raise ValueError("bp_min_sum requires every check and variable to touch an edge")

    row_starts = row_ptr[:-1]
    check_of_edge = np.repeat(np.arange(m), deg_r)
    var_of_cm = np.repeat(np.arange(n), deg_c)
    syn = syndrome.astype(np.uint8)

    post = llr.astype(np.float64)
    e = post < 0.0
    if np.array_equal(_parity(e[col_idx], row_starts), syn):
        posterior[:] = post
        hard[:] = e
        return True, 0

    nu = llr[col_idx].astype(np.float64)
    for it in range(max_iters):
        # check-to-variable: signed excluded minimum per row
        absnu = np.abs(nu)
        neg = nu < 0.0
        min1 = np.minimum.reduceat(absnu, row_starts)
        attain = absnu == min1[check_of_edge]
        nmin = np.add.reduceat(attain.astype(np.int64), row_starts)
        masked = np.where(attain, np.inf, absnu)
        min2 = np.minimum.reduceat(masked, row_starts)
        excl = np.where(attain & (nmin[check_of_edge] == 1),
                        min2[check_of_edge], min1[check_of_edge])
        excl = np.minimum(excl, MESSAGE_CLAMP)
        flip = (_parity(neg, row_starts) ^ syn).astype(bool)
        sign = flip[check_of_edge] ^ neg
        mu = np.where(sign, -excl, excl)
        if ms_scale != 1.0:
            mu = mu * ms_scale

        # variable-to-check and posterior; np.add.at accumulates in edge
        # order (unbuffered), matching the compiled backend bit for bit
        mu_cm = mu[edge_rm]
        post = llr.astype(np.float64)
        np.add.at(post, var_of_cm, mu_cm)
        nu[edge_rm] = post[var_of_cm] - mu_cm

        e = post < 0.0
        if np.array_equal(_parity(e[col_idx], row_starts), syn):
            posterior[:] = post
            hard[:] = e
            return True, it + 1

    posterior[:] = post
    hard[:] = e
    return False, max_iters


def gf2_rref_packed(mat, col_order):
    """In-place full row reduction of a packed GF(2) matrix.

    Candidate pivot columns are tried in the order given by `col_order`;
    each pivot column ends with a single 1 in its pivot row.  Whole rows
    are XORed, so any columns outside col_order (e.g. an appended
    syndrome) ride along.  Returns (rank, pivot_cols) where pivot_cols[r]
    is the column with its pivot in row r.
    """
    rows = mat.shape[0]
    if rows == 0 or col_order.shape[0] == 0:
        return 0, np.empty(0, dtype=np.int64)
    one = np.uint64(1)
    pivots = np.empty(min(rows, col_order.shape[0]), dtype=np.int64)
    rank = 0
    for c in col_order:
        c = int(c)
        w = c >> 6
        b = np.uint64(c & 63)
        nz = np.nonzero((mat[rank:, w] >> b) & one)[0]
        if nz.size == 0:
            continue
        p = rank + int(nz[0])
        if p != rank:
            mat[[rank, p]] = mat[[p, rank]]
        sel = ((mat[:, w] >> b) & one).astype(bool)
        sel[rank] = False
        if sel.any():
            mat[sel] ^= mat[rank]
        pivots[rank] = c
        rank += 1
        if rank == rows:
            break
    return rank, pivots[:rank].copy()
