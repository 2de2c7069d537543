"""Filtered complexes, persistence diagrams over Z_p and related tools."""
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from . import _accel, _reduction

INF = float("inf")
MAX_DIM = 2


def is_prime(p):
    p = int(p)
    if p < 2:
        return False
    k = 2
    while k * k <= p:
        if p % k == 0:
            return False
        k += 1
    return True


def _check_prime(p):
    if not is_prime(p):
        raise ValueError(f"coefficient field needs a prime, got {p}")
    return int(p)


def _row_keys(rows):
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    return rows.view(np.dtype((np.void, 8 * rows.shape[1]))).ravel()


def lookup_rows(table, queries):
    """Index of each query row in ``table`` (rows are padded vertex lists).

    Raises ``KeyError`` if a query is missing.
    """
    tk = _row_keys(table)
    order = np.argsort(tk, kind="stable")
    sorted_keys = tk[order]
    qk = _row_keys(queries)
    pos = np.searchsorted(sorted_keys, qk)
    pos = np.minimum(pos, len(sorted_keys) - 1)
    found = sorted_keys[pos] == qk
    if not np.all(found):
        bad = np.asarray(queries)[~found][0]
        raise KeyError(f"face {bad[bad >= 0].tolist()} missing from complex")
    return order[pos]


def facet_rows(simplices, dims):
    """All facets of each simplex as padded rows.

    Returns ``(owner, slot, rows)``: the facet obtained from simplex
    ``owner`` by deleting vertex number ``slot``.
    """
    width = simplices.shape[1]
    owners, slots, rows = [], [], []
    for d in range(1, width):
        idx = np.flatnonzero(dims == d)
        if idx.size == 0:
            continue
        block = simplices[idx, : d + 1]
        for r in range(d + 1):
            keep = [c for c in range(d + 1) if c != r]
            facet = np.full((idx.size, width), -1, dtype=np.int64)
            facet[:, :d] = block[:, keep]
            owners.append(idx)
            slots.append(np.full(idx.size, r))
            rows.append(facet)
    if not owners:
        return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64),
                np.empty((0, width), dtype=np.int64))
    return np.concatenate(owners), np.concatenate(slots), np.vstack(rows)


class FilteredComplex:
    """A simplicial complex with a monotone filtration, in total order.

    ``simplices`` is an (N, w) integer array of sorted vertex ids padded with
    -1.  Simplices are ordered by (value, dim, lexicographic vertex list),
    which puts faces before cofaces.  The boundary matrix is stored in CSR
    form with rows sorted by filtration position.
    """

    def __init__(self, simplices, values, check=True):
        s = np.array(simplices, dtype=np.int64)
        if s.ndim != 2:
            raise ValueError("simplices must be a 2-d padded array")
        values = np.asarray(values, dtype=float)
        s.sort(axis=1)
        # sort puts the -1 padding first; move it to the end
        s = np.where(s >= 0, s, np.iinfo(np.int64).max)
        s.sort(axis=1)
        s = np.where(s == np.iinfo(np.int64).max, -1, s)
        dims = np.sum(s >= 0, axis=1) - 1

        keys = [s[:, c] for c in range(s.shape[1] - 1, -1, -1)] + [dims, values]
        order = np.lexsort(keys)
        self.order = order
        self.simplices = s[order]
        self.dims = dims[order]
        self.values = values[order]

        owner, slot, rows = facet_rows(self.simplices, self.dims)
        try:
            facet = lookup_rows(self.simplices, rows) if rows.size else np.empty(0, dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"not a simplicial complex: {exc.args[0]}") from None
        if check and np.any(facet >= owner):
            raise ValueError("a face does not precede its coface in the filtration")
        if check and np.any(self.values[facet] > self.values[owner]):
            raise ValueError("filtration is not monotone along the face relation")
        width = s.shape[1]
        self.facets = np.full((len(self.dims), width), -1, dtype=np.int64)
        self.facets[owner, slot] = facet
        self.facet_signs = np.where(slot % 2 == 0, 1, -1)

        by_col = np.lexsort((facet, owner))
        counts = np.bincount(owner, minlength=len(self.dims))
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.indices = facet[by_col].astype(np.int64)
        self.signs = self.facet_signs[by_col].astype(np.int64)

    def __len__(self):
        return len(self.dims)

    def euler_characteristic(self):
        return int(np.sum((-1) ** self.dims))

    def to_text(self):
        """One line per simplex: ``dim v0 v1 ... F`` in filtration order."""
        lines = []
        for row, d, v in zip(self.simplices, self.dims, self.values):
            verts = " ".join(str(int(x)) for x in row[: d + 1])
            lines.append(f"{int(d)} {verts} {float(v)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        rows, vals = [], []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            d = int(parts[0])
            verts = [int(x) for x in parts[1: d + 2]]
            rows.append(verts + [-1] * (3 - d))
            vals.append(float(parts[d + 2]))
        width = max(len(r) for r in rows)
        rows = [r + [-1] * (width - len(r)) for r in rows]
        return cls(np.array(rows), np.array(vals))


class PersistenceDiagram:
    """Multiset of (dim, birth, death) points over Z_p; death may be inf."""

    def __init__(self, p, dims, births, deaths, zero_pairs=None):
        dims = np.asarray(dims, dtype=np.int64)
        births = np.asarray(births, dtype=float)
        deaths = np.asarray(deaths, dtype=float)
        order = np.lexsort((deaths, births, dims))
        self.p = int(p)
        self.dims = dims[order]
        self.births = births[order]
        self.deaths = deaths[order]
        self.zero_pairs = zero_pairs

    def __len__(self):
        return len(self.dims)

    def __eq__(self, other):
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return (self.p == other.p and np.array_equal(self.dims, other.dims)
                and np.array_equal(self.births, other.births)
                and np.array_equal(self.deaths, other.deaths))

    def __repr__(self):
        counts = {int(k): int(np.sum(self.dims == k)) for k in np.unique(self.dims)}
        return f"PersistenceDiagram(p={self.p}, points per dim={counts})"

    def points(self, dim):
        """(m, 2) array of (birth, death) in dimension ``dim``."""
        mask = self.dims == dim
        return np.column_stack([self.births[mask], self.deaths[mask]])

    def betti_at(self, a):
        """Betti numbers of the sublevel complex at value ``a``."""
        alive = (self.births <= a) & (self.deaths > a)
        return tuple(int(np.sum(alive & (self.dims == k))) for k in range(MAX_DIM + 1))

    def map_values(self, func):
        return PersistenceDiagram(self.p, self.dims, func(self.births), func(self.deaths))

    def to_dict(self):
        pts = [{"dim": int(d), "birth": float(b), "death": float(t)}
               for d, b, t in zip(self.dims, self.births, self.deaths)]
        return {"p": self.p, "points": pts}

    @classmethod
    def from_dict(cls, data):
        pts = data["points"]
        return cls(data["p"], [q["dim"] for q in pts], [float(q["birth"]) for q in pts],
                   [float(q["death"]) for q in pts])


def compute_persistence(fc, p=3, backend=None, keep_zero=False):
    """Persistence diagram of a :class:`FilteredComplex` over Z_p (dims 0..2).

    Pairs with equal birth and death values are dropped; with
    ``keep_zero=True`` they are kept in ``diagram.zero_pairs`` as
    (dim, value) rows for debugging.
    """
    p = _check_prime(p)
    coeffs = np.mod(fc.signs, p)
    death_of, nonzero = _reduction.reduce(fc.indptr, fc.indices, coeffs, fc.dims, p, backend)

    births = np.flatnonzero(death_of >= 0)
    deaths = death_of[births]
    essential = np.flatnonzero((death_of < 0) & ~nonzero)

    b_vals = np.concatenate([fc.values[births], fc.values[essential]])
    d_vals = np.concatenate([fc.values[deaths], np.full(essential.size, INF)])
    dims = np.concatenate([fc.dims[births], fc.dims[essential]])
    keep = (b_vals < d_vals) & (dims <= MAX_DIM)
    zero = None
    if keep_zero:
        z = b_vals == d_vals
        zero = np.column_stack([dims[z], b_vals[z]])
    return PersistenceDiagram(p, dims[keep], b_vals[keep], d_vals[keep], zero_pairs=zero)


def _split(diag, dim):
    pts = diag.points(dim)
    fin = pts[np.isfinite(pts[:, 1])]
    ess = np.sort(pts[~np.isfinite(pts[:, 1]), 0])
    return fin, ess


def _covers(adj, rows_needed):
    """Does a matching of the bipartite graph cover every row in rows_needed?"""
    if not rows_needed.any():
        return True
    sub = adj[rows_needed]
    if sub.shape[1] == 0:
        return False
    match = maximum_bipartite_matching(csr_matrix(sub), perm_type="column")
    return bool(np.all(match >= 0))


def _finite_bottleneck(a, b):
    if len(a) == 0 and len(b) == 0:
        return 0.0
    ha = (a[:, 1] - a[:, 0]) / 2.0
    hb = (b[:, 1] - b[:, 0]) / 2.0
    if len(a) == 0:
        return float(hb.max())
    if len(b) == 0:
        return float(ha.max())
    cost = np.maximum(np.abs(a[:, None, 0] - b[None, :, 0]), np.abs(a[:, None, 1] - b[None, :, 1]))
    cands = np.unique(np.concatenate([[0.0], cost.ravel(), ha, hb]))

    def feasible(delta):
        # an off-diagonal point may go to the diagonal iff its half-persistence
        # is at most delta; the remaining "must" points on each side need to be
        # matched across, and by the Mendelsohn-Dulmage theorem covering both
        # sides separately suffices
        adj = cost <= delta
        return _covers(adj, ha > delta) and _covers(adj.T, hb > delta)

    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])


def bottleneck(d1, d2, dim):
    """Exact bottleneck distance between two diagrams in dimension ``dim``."""
    f1, e1 = _split(d1, dim)
    f2, e2 = _split(d2, dim)
    if len(e1) != len(e2):
        return INF
    ess = float(np.max(np.abs(e1 - e2))) if len(e1) else 0.0
    return max(ess, _finite_bottleneck(f1, f2))


def bottleneck_bruteforce(a, b):
    """Bottleneck distance between two small finite point lists by enumeration."""
    a = [tuple(x) for x in a]
    b = [tuple(x) for x in b]
    left = a + [None] * len(b)
    right = b + [None] * len(a)

    def cost(x, y):
        if x is None and y is None:
            return 0.0
        if x is None:
            return (y[1] - y[0]) / 2.0
        if y is None:
            return (x[1] - x[0]) / 2.0
        return max(abs(x[0] - y[0]), abs(x[1] - y[1]))

    best = INF
    for perm in permutations(range(len(right))):
        best = min(best, max((cost(left[i], right[j]) for i, j in enumerate(perm)), default=0.0))
    return best


def square_map(diag, direction="to_squared"):
    """Move a diagram between the half-squared and the plain distance scale.

    ``to_squared`` applies (s, t) -> (s²/2, t²/2); ``to_unsquared`` applies
    (s, t) -> (√(2s), √(2t)).  Infinity is preserved.
    """
    if np.any(diag.births < 0) or np.any(diag.deaths < 0):
        raise ValueError("square_map needs nonnegative coordinates")
    if direction == "to_squared":
        return diag.map_values(lambda v: 0.5 * v * v)
    if direction == "to_unsquared":
        return diag.map_values(lambda v: np.sqrt(2.0 * v))
    raise ValueError(f"unknown direction {direction!r}")


def _rank_numpy(m, p):
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        piv = np.flatnonzero(m[rank:, c])
        if piv.size == 0:
            continue
        r = rank + piv[0]
        m[[rank, r]] = m[[r, rank]]
        m[rank] = (m[rank] * pow(int(m[rank, c]), -1, p)) % p
        others = np.flatnonzero(m[:, c])
        others = others[others != rank]
        if others.size:
            m[others] = (m[others] - np.outer(m[others, c], m[rank])) % p
        rank += 1
    return rank


def rank_mod_p(mat, p):
    """Rank of an integer matrix over Z_p by Gaussian elimination."""
    m = np.array(mat, dtype=np.int64) % p
    if m.size == 0:
        return 0
    if _accel.USE_NUMBA:
        return int(_reduction.dense_rank_mod_p(m, p))
    return _rank_numpy(m, p)


def relative_betti(fc, subset, p=3):
    """Betti numbers (dims 0..2) of H(K, K - S) for a set S of simplices of ``fc``.

    The chain complex is spanned by the simplices of S, with boundary
    entries to faces outside S dropped; this computes the homology of the
    pair (closure, closure - S) whenever closure - S is a subcomplex.
    """
    p = _check_prime(p)
    subset = np.unique(np.asarray(subset, dtype=np.int64))
    betti = _reduction.relative_betti_kernel(subset, fc.dims, fc.facets, p)
    return tuple(int(b) for b in betti)


@dataclass
class ConleyIndex:
    betti: tuple

    @property
    def saddle_index(self):
        """k when the index is e_k, otherwise None."""
        if sum(self.betti) == 1:
            return self.betti.index(1)
        return None


def conley_index(ms, p=3):
    """Relative homology of a Morse set's closure against its link."""
    if len(ms.simplices) == 1:
        # a lone simplex has all its faces in the link: H(sigma, boundary) = e_k
        k = int(ms.complex.dims[ms.simplices[0]])
        betti = [0] * (MAX_DIM + 1)
        if k <= MAX_DIM:
            betti[k] = 1
        return ConleyIndex(tuple(betti))
    return ConleyIndex(relative_betti(ms.complex, ms.simplices, p))


@dataclass
class MaxMinReport:
    ok: bool
    p: int
    zero_point: tuple = None
    l_point: tuple = None
    minmax: float = None
    repeated_max: int = 0
    messages: list = field(default_factory=list)

    def to_dict(self):
        def enc(pt):
            return None if pt is None else [float(v) for v in pt]
        return {"ok": self.ok, "p": self.p, "zero_point": enc(self.zero_point),
                "l_point": enc(self.l_point), "minmax": self.minmax,
                "repeated_max": self.repeated_max, "messages": list(self.messages)}


def verify_maxmin_structure(diag, maxval, minmax, rtol=1e-9):
    """Check the two distinguished H1 points of a Moebius-band filtration.

    For p = 2 the diagram must contain (0, maxval) and some (l, inf) with
    l <= minmax; for odd p it must contain (0, inf) and (l, maxval) with
    l <= minmax.
    """
    pts = diag.points(1)
    tol = rtol * max(abs(maxval), 1.0)
    is_max = np.isfinite(pts[:, 1]) & (np.abs(pts[:, 1] - maxval) <= tol)
    is_inf = ~np.isfinite(pts[:, 1])
    at_zero = pts[:, 0] <= tol
    ltol = rtol * max(abs(minmax), 1.0)
    rep = MaxMinReport(ok=False, p=diag.p, minmax=float(minmax),
                       repeated_max=int(is_max.sum()))
    if diag.p == 2:
        zero_mask, l_mask = at_zero & is_max, is_inf
    else:
        zero_mask, l_mask = at_zero & is_inf, is_max
    if zero_mask.any():
        rep.zero_point = tuple(pts[np.flatnonzero(zero_mask)[0]])
    else:
        rep.messages.append("no H1 point born at 0 with the expected death")
    cand = np.flatnonzero(l_mask & ~zero_mask) if zero_mask.sum() == 1 else np.flatnonzero(l_mask)
    if cand.size:
        k = cand[np.argmin(pts[cand, 0])]
        rep.l_point = tuple(pts[k])
        if pts[k, 0] > minmax + ltol:
            rep.messages.append(f"l = {pts[k, 0]!r} exceeds min-max bound {minmax!r}")
    else:
        rep.messages.append("no H1 point with the expected second death")
    if rep.repeated_max > 1:
        rep.messages.append(f"{rep.repeated_max} H1 points die at the maximum value")
    rep.ok = (rep.zero_point is not None and rep.l_point is not None
              and rep.l_point[0] <= minmax + ltol)
    return rep
