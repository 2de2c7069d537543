"""The filtered nerve of the edge-pair cover of the Moebius band.

Cover element ``(i, j)`` with ``0 <= i <= j < n`` is the set of chords with
one end on edge ``i`` and the other on edge ``j``.  Nerve vertex ``(i, j)``
is stored as the integer id ``i * n + j``, so sorting ids sorts the pairs
lexicographically.

Every simplex also records a *location*: a chord ``(i, s1, j, s2)`` on the
loop at which its filtration value is attained.  These are the candidate
critical chords used by :mod:`chordal_ph.critical`.
"""
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .geometry import half_sq, point_segment_min_batch, segment_segment_min_batch
from .loop import check_nondegeneracy
from .persistence import FilteredComplex, compute_persistence, lookup_rows


class NerveError(ValueError):
    """Raised when the nerve cannot be built for a loop."""


def pair_id(a, b, n):
    """Canonical vertex id of the unordered cover index {a, b} (mod n)."""
    a = np.asarray(a) % n
    b = np.asarray(b) % n
    return np.minimum(a, b) * n + np.maximum(a, b)


def decode_id(v, n):
    return int(v) // n, int(v) % n


class NerveComplex:
    """Filtered nerve together with the chord realizing each simplex value.

    Attributes mirror :class:`FilteredComplex` (``complex``) in filtration
    order; ``locations[k]`` is ``(i, s1, j, s2)`` for simplex ``k``.
    """

    def __init__(self, n, simplices, values, locations, collapsed=False):
        self.n = n
        self.complex = FilteredComplex(simplices, values)
        self.locations = np.asarray(locations, dtype=float)[self.complex.order]
        self.collapsed = collapsed
        assert_monotone(self)

    @property
    def simplices(self):
        return self.complex.simplices

    @property
    def dims(self):
        return self.complex.dims

    @property
    def values(self):
        return self.complex.values

    def __len__(self):
        return len(self.complex)

    def __repr__(self):
        counts = np.bincount(self.dims, minlength=4).tolist()
        return f"NerveComplex(n={self.n}, simplices per dim={counts}, collapsed={self.collapsed})"

    def vertex_pairs(self, k):
        """Cover indices of the vertices of simplex ``k``."""
        row = self.simplices[k]
        return [decode_id(v, self.n) for v in row[row >= 0]]

    def to_text(self):
        return self.complex.to_text()

    def persistence(self, p=3, backend=None):
        return compute_persistence(self.complex, p, backend=backend)


def assert_monotone(nc):
    """Exact check that F(face) <= F(coface) for every facet relation."""
    fc = nc.complex
    owner, slot = np.nonzero(fc.facets >= 0)
    facet = fc.facets[owner, slot]
    bad = fc.values[facet] > fc.values[owner]
    if np.any(bad):
        k = int(owner[np.flatnonzero(bad)[0]])
        raise AssertionError(f"filtration not monotone at simplex {nc.vertex_pairs(k)}")
    vert = fc.dims == 0
    zero_expected = np.zeros(int(vert.sum()), dtype=bool)
    for idx, v in enumerate(fc.simplices[vert, 0]):
        i, j = decode_id(v, nc.n)
        zero_expected[idx] = j == i or j == (i + 1) % nc.n or i == (j + 1) % nc.n
    if not np.array_equal(fc.values[vert] == 0.0, zero_expected):
        raise AssertionError("vertex value vanishes off the boundary cells (or vice versa)")


def _tetra_vertices(n):
    i, j = np.triu_indices(n, k=1)
    i1, j1 = (i + 1) % n, (j + 1) % n
    a = pair_id(i, j, n)
    b = pair_id(i1, j, n)
    c = pair_id(i, j1, n)
    d = pair_id(i1, j1, n)
    return i, j, i1, j1, a, b, c, d


def _rows(*cols):
    out = np.full((len(cols[0]), 4), -1, dtype=np.int64)
    for k, c in enumerate(cols):
        out[:, k] = c
    out[:, : len(cols)].sort(axis=1)
    return out


def build_nerve(loop, collapse=False, validate=True):
    """Build the filtered nerve of a loop (needs C1-C2 and n >= 5).

    With ``collapse=True`` the 3-simplices are collapsed away, see
    :func:`collapse_nerve`.
    """
    n = loop.n
    if n < 5:
        raise NerveError("the edge-pair cover is not a good cover for n = 4; need n >= 5")
    if validate:
        rep = check_nondegeneracy(loop)
        if not rep.embedded:
            raise NerveError(f"loop is not embedded: C1 {rep.c1_violations}, C2 {rep.c2_violations}")
    x = loop.points
    rows, vals, locs = [], [], []

    def add(r, v, loc):
        rows.append(r)
        vals.append(np.broadcast_to(np.asarray(v, dtype=float), (len(r),)))
        locs.append(np.column_stack([np.broadcast_to(np.asarray(c, dtype=float), (len(r),)) for c in loc]))

    # vertices: closest chord between edge i and edge j
    vi, vj = np.triu_indices(n)
    h, s1, s2 = segment_segment_min_batch(x[vi], x[(vi + 1) % n], x[vj], x[(vj + 1) % n])
    add(_rows(vi * n + vj), h, (vi, s1, vj, s2))

    i, j, i1, j1, a, b, c, d = _tetra_vertices(n)
    corner = half_sq(x[i1], x[j1])
    corner_loc = (i1, 0.0, j1, 0.0)

    def e1(p_idx, seg):
        sq, s = point_segment_min_batch(x[p_idx], x[seg], x[(seg + 1) % n])
        return 0.5 * sq, s

    # edges sharing an edge index: shared vertex of the two other edges
    # against the common edge
    v, s = e1(i1, j)
    add(_rows(a, b), v, (i1, 0.0, j, s))
    v, s = e1(i1, j1)
    add(_rows(c, d), v, (i1, 0.0, j1, s))
    v, s = e1(j1, i)
    add(_rows(a, c), v, (i, s, j1, 0.0))
    v, s = e1(j1, i1)
    add(_rows(b, d), v, (i1, s, j1, 0.0))
    # diagonal and anti-diagonal edges, triangles and the 3-simplex: corner value
    add(_rows(a, d), corner, corner_loc)
    add(_rows(b, c), corner, corner_loc)
    for tri in ((a, b, c), (a, b, d), (a, c, d), (b, c, d)):
        add(_rows(*tri), corner, corner_loc)
    add(_rows(a, b, c, d), corner, corner_loc)

    # boundary triangles along the diagonal of the band
    k = np.arange(n)
    k1 = (k + 1) % n
    p_, q_, r_ = pair_id(k, k, n), pair_id(k, k1, n), pair_id(k1, k1, n)
    zloc = (k1, 0.0, k1, 0.0)
    v, _ = e1(k1, k)
    add(_rows(p_, q_), v, zloc)
    v, _ = e1(k1, k1)
    add(_rows(q_, r_), v, zloc)
    add(_rows(p_, r_), half_sq(x[k1], x[k1]), zloc)
    add(_rows(p_, q_, r_), 0.0, zloc)

    rows = np.vstack(rows)
    vals = np.concatenate(vals)
    locs = np.vstack(locs)
    uniq, first, inverse = np.unique(rows, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    lo = np.full(len(uniq), np.inf)
    hi = np.full(len(uniq), -np.inf)
    np.minimum.at(lo, inverse, vals)
    np.maximum.at(hi, inverse, vals)
    if np.any(lo != hi):
        bad = uniq[np.flatnonzero(lo != hi)[0]]
        raise AssertionError(f"simplex {bad[bad >= 0].tolist()} received two different values")

    nc = NerveComplex(n, uniq, vals[first], locs[first])
    if nc.complex.euler_characteristic() != 0:
        raise AssertionError("nerve does not have the Euler characteristic of a Moebius band")
    return collapse_nerve(nc) if collapse else nc


def collapse_nerve(nc):
    """Remove each 3-simplex with its anti-diagonal edge and the two triangles on it."""
    n = nc.n
    _, _, _, _, a, b, c, d = _tetra_vertices(n)
    drop = np.vstack([_rows(a, b, c, d), _rows(b, c), _rows(a, b, c), _rows(b, c, d)])
    idx = lookup_rows(nc.simplices, drop)
    keep = np.ones(len(nc), dtype=bool)
    keep[idx] = False
    # locations are already in filtration order; FilteredComplex re-sorts stably
    out = NerveComplex.__new__(NerveComplex)
    out.n = n
    out.complex = FilteredComplex(nc.simplices[keep], nc.values[keep])
    out.locations = nc.locations[keep][out.complex.order]
    out.collapsed = True
    assert_monotone(out)
    if out.complex.euler_characteristic() != 0:
        raise AssertionError("collapse changed the Euler characteristic")
    return out


class MorseSet:
    """Connected block of simplices entering the filtration at one value.

    ``simplices``, ``closure`` and ``link`` hold indices into ``complex``;
    closure and link are computed on first access.
    """

    def __init__(self, value, simplices, complex):
        self.value = float(value)
        self.simplices = np.asarray(simplices, dtype=np.int64)
        self.complex = complex
        self._closure = None

    def __repr__(self):
        return f"MorseSet(value={self.value!r}, size={len(self.simplices)}, top_dim={self.top_dim})"

    @property
    def top_dim(self):
        return int(self.complex.dims[self.simplices].max())

    @property
    def closure(self):
        if self._closure is None:
            self._closure = _closure(self.complex, self.simplices)
        return self._closure

    @property
    def link(self):
        return np.setdiff1d(self.closure, self.simplices)


def _closure(fc, idx):
    seen = set(int(k) for k in idx)
    stack = list(seen)
    while stack:
        k = stack.pop()
        for f in fc.facets[k]:
            f = int(f)
            if f >= 0 and f not in seen:
                seen.add(f)
                stack.append(f)
    return np.array(sorted(seen), dtype=np.int64)


def all_morse_sets(nc_or_fc):
    """Morse sets at every filtration value, as a dict value -> list of MorseSet."""
    fc = getattr(nc_or_fc, "complex", nc_or_fc)
    owner, slot = np.nonzero(fc.facets >= 0)
    facet = fc.facets[owner, slot]
    same = fc.values[facet] == fc.values[owner]
    N = len(fc)
    graph = coo_matrix((np.ones(int(same.sum())), (owner[same], facet[same])), shape=(N, N))
    ncomp, labels = connected_components(graph, directed=False)
    groups = np.split(np.argsort(labels, kind="stable"),
                      np.cumsum(np.bincount(labels, minlength=ncomp))[:-1])
    out = {}
    for g in groups:
        g = np.sort(g)
        val = float(fc.values[g[0]])
        out.setdefault(val, []).append(MorseSet(val, g, fc))
    for v in out:
        out[v].sort(key=lambda m: int(m.simplices[0]))
    return out


def morse_sets(nc, a):
    """Morse sets entering at filtration value ``a``."""
    fc = nc.complex
    if not np.any(fc.values == a):
        raise ValueError(f"{a!r} is not a filtration value")
    return all_morse_sets(nc)[float(a)]
