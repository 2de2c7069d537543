"""Boundary-matrix column reduction over Z_p.

Two interchangeable backends with identical output:

* ``reduce_numba``: array-based kernel compiled by numba (or run as plain
  python on arrays if numba is disabled, which is slow but correct).
* ``reduce_python``: dictionary/list implementation that is the faster
  choice when numba is unavailable.

Both process dimensions from the top down and clear the columns of
simplices that already appeared as a pivot ("clearing").  Columns are
sparse, with row indices sorted increasingly; the pivot is the last entry.
The result is ``death_of``, where ``death_of[b] = d`` pairs birth simplex
``b`` with death simplex ``d`` and ``-1`` marks an unpaired simplex, plus a
boolean mask of the columns that reduced to a nonzero vector.
"""
import numpy as np

from . import _accel


@_accel.njit
def _inv_mod(a, p):
    # extended Euclid, a and p coprime
    t, newt = 0, 1
    r, newr = p, a % p
    while newr != 0:
        q = r // newr
        t, newt = newt, t - q * newt
        r, newr = newr, r - q * newr
    if t < 0:
        t += p
    return t


@_accel.njit
def _axpy(wr, wv, wl, kr, kv, f, p):
    # (wr, wv)[:wl] + f * (kr, kv), both sorted by row
    out_r = np.empty(wl + kr.shape[0], dtype=np.int64)
    out_v = np.empty(wl + kr.shape[0], dtype=np.int64)
    a = 0
    b = 0
    m = 0
    nb = kr.shape[0]
    while a < wl or b < nb:
        if b >= nb or (a < wl and wr[a] < kr[b]):
            out_r[m] = wr[a]
            out_v[m] = wv[a]
            a += 1
            m += 1
        elif a >= wl or kr[b] < wr[a]:
            out_r[m] = kr[b]
            out_v[m] = (f * kv[b]) % p
            b += 1
            m += 1
        else:
            v = (wv[a] + f * kv[b]) % p
            if v != 0:
                out_r[m] = wr[a]
                out_v[m] = v
                m += 1
            a += 1
            b += 1
    return out_r, out_v, m


@_accel.njit
def reduce_numba(indptr, indices, coeffs, dims, p):
    n = dims.shape[0]
    death_of = np.full(n, -1, dtype=np.int64)
    pivot_col = np.full(n, -1, dtype=np.int64)
    nonzero = np.zeros(n, dtype=np.bool_)
    cleared = np.zeros(n, dtype=np.bool_)

    cap = 2 * indices.shape[0] + 16
    st_r = np.empty(cap, dtype=np.int64)
    st_v = np.empty(cap, dtype=np.int64)
    st_start = np.zeros(n, dtype=np.int64)
    st_len = np.zeros(n, dtype=np.int64)
    used = 0

    maxdim = 0
    for j in range(n):
        if dims[j] > maxdim:
            maxdim = dims[j]

    for d in range(maxdim, 0, -1):
        for j in range(n):
            if dims[j] != d or cleared[j]:
                continue
            lo = indptr[j]
            hi = indptr[j + 1]
            wr = indices[lo:hi].copy()
            wv = coeffs[lo:hi].copy()
            wl = hi - lo
            while wl > 0:
                k = pivot_col[wr[wl - 1]]
                if k < 0:
                    break
                s0 = st_start[k]
                s1 = s0 + st_len[k]
                kr = st_r[s0:s1]
                kv = st_v[s0:s1]
                f = ((p - wv[wl - 1]) * _inv_mod(kv[kv.shape[0] - 1], p)) % p
                wr, wv, wl = _axpy(wr, wv, wl, kr, kv, f, p)
            if wl == 0:
                continue
            low = wr[wl - 1]
            pivot_col[low] = j
            death_of[low] = j
            cleared[low] = True
            nonzero[j] = True
            if used + wl > cap:
                while used + wl > cap:
                    cap *= 2
                nr = np.empty(cap, dtype=np.int64)
                nv = np.empty(cap, dtype=np.int64)
                nr[:used] = st_r[:used]
                nv[:used] = st_v[:used]
                st_r = nr
                st_v = nv
            st_r[used:used + wl] = wr[:wl]
            st_v[used:used + wl] = wv[:wl]
            st_start[j] = used
            st_len[j] = wl
            used += wl
    return death_of, nonzero


def reduce_python(indptr, indices, coeffs, dims, p):
    """Same contract as :func:`reduce_numba`, using dicts instead of arrays."""
    n = len(dims)
    indptr = indptr.tolist()
    indices = indices.tolist()
    coeffs = coeffs.tolist()
    dims_l = dims.tolist()
    death_of = [-1] * n
    nonzero = [False] * n
    cleared = [False] * n
    pivot_col = {}
    stored = {}
    inv = {}

    for d in range(max(dims_l, default=0), 0, -1):
        for j in range(n):
            if dims_l[j] != d or cleared[j]:
                continue
            col = dict(zip(indices[indptr[j]:indptr[j + 1]], coeffs[indptr[j]:indptr[j + 1]]))
            while col:
                low = max(col)
                k = pivot_col.get(low)
                if k is None:
                    break
                other, other_low = stored[k]
                c = other[other_low]
                if c not in inv:
                    inv[c] = pow(c, -1, p)
                f = (-col[low] * inv[c]) % p
                for r, v in other.items():
                    nv = (col.get(r, 0) + f * v) % p
                    if nv:
                        col[r] = nv
                    else:
                        col.pop(r, None)
            if not col:
                continue
            low = max(col)
            pivot_col[low] = j
            death_of[low] = j
            cleared[low] = True
            nonzero[j] = True
            stored[j] = (col, low)
    return np.array(death_of, dtype=np.int64), np.array(nonzero, dtype=bool)


def reduce(indptr, indices, coeffs, dims, p, backend=None):
    """Dispatch to the numba kernel or the python fallback."""
    if backend is None:
        backend = "numba" if _accel.USE_NUMBA else "python"
    if backend == "numba":
        return reduce_numba(np.asarray(indptr, dtype=np.int64), np.asarray(indices, dtype=np.int64),
                            np.asarray(coeffs, dtype=np.int64), np.asarray(dims, dtype=np.int64), int(p))
    if backend == "python":
        return reduce_python(np.asarray(indptr), np.asarray(indices), np.asarray(coeffs),
                             np.asarray(dims), int(p))
    raise ValueError(f"unknown backend {backend!r}")


@_accel.njit
def dense_rank_mod_p(mat, p):
    """Rank over Z_p of a small dense integer matrix (modified in place)."""
    rows, cols = mat.shape
    for r in range(rows):
        for c in range(cols):
            mat[r, c] %= p
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        piv = -1
        for r in range(rank, rows):
            if mat[r, c] != 0:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for k in range(cols):
                mat[rank, k], mat[piv, k] = mat[piv, k], mat[rank, k]
        inv = _inv_mod(mat[rank, c], p)
        for k in range(cols):
            mat[rank, k] = (mat[rank, k] * inv) % p
        for r in range(rows):
            if r != rank and mat[r, c] != 0:
                f = mat[r, c]
                for k in range(cols):
                    mat[r, k] = (mat[r, k] - f * mat[rank, k]) % p
        rank += 1
    return rank


@_accel.njit
def relative_betti_kernel(subset, dims, facets, p):
    """Betti numbers 0..2 of the chain complex spanned by sorted ``subset``.

    Boundary entries to faces outside the subset are dropped.  The sign of
    the facet in slot k is (-1)^k.
    """
    k = subset.shape[0]
    local = np.empty(k, dtype=np.int64)
    counts = np.zeros(5, dtype=np.int64)
    for a in range(k):
        d = dims[subset[a]]
        local[a] = counts[d]
        counts[d] += 1
    ranks = np.zeros(5, dtype=np.int64)
    for d in range(1, 4):
        if counts[d] == 0 or counts[d - 1] == 0:
            continue
        mat = np.zeros((counts[d - 1], counts[d]), dtype=np.int64)
        for a in range(k):
            s = subset[a]
            if dims[s] != d:
                continue
            for slot in range(facets.shape[1]):
                f = facets[s, slot]
                if f < 0:
                    continue
                pos = np.searchsorted(subset, f)
                if pos < k and subset[pos] == f:
                    mat[local[pos], local[a]] = 1 if slot % 2 == 0 else p - 1
        ranks[d] = dense_rank_mod_p(mat, p)
    out = np.zeros(3, dtype=np.int64)
    for d in range(3):
        out[d] = counts[d] - ranks[d] - ranks[d + 1]
    return out
