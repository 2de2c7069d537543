"""Brute-force oracle: a triangulated Moebius band sampled on an m-grid.

The torus [0,1)² of ordered parameter pairs is triangulated on the m × m
lattice, each square (a, b)-(a+1, b+1) split along its diagonal into

    T1 = (a, b), (a+1, b), (a+1, b+1)    and    T2 = (a, b), (a, b+1), (a+1, b+1).

Swapping the two ends of a chord maps T1 at (a, b) onto T2 at (b, a), so the
quotient by the swap is obtained by replacing every lattice point with the
unordered pair {a, b}.  The result is a triangulated Moebius band whose
boundary is the diagonal.  :func:`build_grid` checks this combinatorially
(Euler characteristic 0, exactly one boundary circle) before returning.

For heatmaps the band is shown in (u, v) coordinates with v = t1 and
u = t2 − t1 the chord offset, so column u = 0 is the boundary and each
chord appears at (v, u) and at (v + u, 1 − u).
"""
import json

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _accel
from .persistence import FilteredComplex, compute_persistence


class GridError(ValueError):
    pass


@_accel.parallel_njit
def _half_sq_rows_kernel(a, b):
    out = np.empty((a.shape[0], b.shape[0]))
    for r in _accel.prange(a.shape[0]):
        for c in range(b.shape[0]):
            acc = 0.0
            for k in range(a.shape[1]):
                d = a[r, k] - b[c, k]
                acc += d * d
            out[r, c] = 0.5 * acc
    return out


def half_sq_table(a, b):
    """Matrix of half squared distances between the rows of ``a`` and ``b``.

    Rows are computed in parallel under numba; each entry is summed in the
    same order either way, so the result does not depend on the thread count.
    """
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    if _accel.USE_NUMBA:
        return _half_sq_rows_kernel(a, b)
    # same summation order as the kernel (np.sum is pairwise for d > 8)
    acc = np.zeros((a.shape[0], b.shape[0]))
    for k in range(a.shape[1]):
        d = a[:, k, None] - b[None, :, k]
        acc += d * d
    return 0.5 * acc


class MobiusGrid:
    """Lattice triangulation of the band with vertex values of the transform."""

    def __init__(self, loop, m, samples, torus_values, pairs, edges, triangles):
        self.loop = loop
        self.m = m
        self.samples = samples
        self.torus_values = torus_values
        self.pairs = pairs
        self.values = torus_values[pairs[:, 0], pairs[:, 1]]
        self.edges = edges
        self.triangles = triangles

    def __repr__(self):
        return (f"MobiusGrid(m={self.m}, vertices={len(self.pairs)}, edges={len(self.edges)}, "
                f"triangles={len(self.triangles)})")

    def euler_characteristic(self):
        return len(self.pairs) - len(self.edges) + len(self.triangles)

    def boundary_edges(self):
        faces = np.sort(np.vstack([self.triangles[:, [0, 1]], self.triangles[:, [0, 2]],
                                   self.triangles[:, [1, 2]]]), axis=1)
        uniq, counts = _unique_rows(faces, len(self.pairs), return_counts=True)
        if np.any(counts > 2):
            raise GridError("an edge lies in more than two triangles")
        return uniq[counts == 1]

    def boundary_circles(self):
        """Number of boundary components (each must be a cycle)."""
        b = self.boundary_edges()
        if len(b) == 0:
            return 0
        deg = np.bincount(b.ravel(), minlength=len(self.pairs))
        used = np.flatnonzero(deg)
        if np.any(deg[used] != 2):
            raise GridError("boundary is not a union of circles")
        nv = len(self.pairs)
        g = coo_matrix((np.ones(len(b)), (b[:, 0], b[:, 1])), shape=(nv, nv))
        _, labels = connected_components(g, directed=False)
        return len(np.unique(labels[used]))

    def filtered_complex(self):
        """Lower-star filtration: each simplex enters at its largest vertex value."""
        nv = len(self.pairs)
        rows = np.full((nv + len(self.edges) + len(self.triangles), 3), -1, dtype=np.int64)
        rows[:nv, 0] = np.arange(nv)
        rows[nv:nv + len(self.edges), :2] = self.edges
        rows[nv + len(self.edges):] = self.triangles
        vals = np.concatenate([self.values, self.values[self.edges].max(axis=1),
                               self.values[self.triangles].max(axis=1)])
        return FilteredComplex(rows, vals, check=False)

    def interpolate(self, t1, t2):
        """Value of the piecewise-linear interpolant at parameter pairs."""
        m = self.m
        x = np.mod(np.asarray(t1, dtype=float), 1.0) * m
        y = np.mod(np.asarray(t2, dtype=float), 1.0) * m
        a = np.floor(x).astype(np.int64)
        b = np.floor(y).astype(np.int64)
        f1 = x - a
        f2 = y - b
        a %= m
        b %= m
        a1 = (a + 1) % m
        b1 = (b + 1) % m
        V = self.torus_values
        lower = f1 >= f2
        v_t1 = (1 - f1) * V[a, b] + (f1 - f2) * V[a1, b] + f2 * V[a1, b1]
        v_t2 = (1 - f2) * V[a, b] + (f2 - f1) * V[a, b1] + f1 * V[a1, b1]
        return np.where(lower, v_t1, v_t2)

    def heatmap(self):
        """Matrix of unsquared distances, rows v = a/m, columns u = k/m (k = 0..m)."""
        m = self.m
        a = np.arange(m)[:, None]
        k = np.arange(m + 1)[None, :]
        return np.sqrt(2.0 * self.torus_values[a, (a + k) % m])


def _unique_rows(rows, base, return_counts=False):
    """Lexicographically sorted unique rows of a small-integer array.

    Packs each row into one int64 key, which is much faster than
    ``np.unique(..., axis=0)`` on the half-million rows of a fine grid.
    """
    key = np.zeros(len(rows), dtype=np.int64)
    for col in range(rows.shape[1]):
        key = key * base + rows[:, col]
    key, counts = np.unique(key, return_counts=True)
    out = np.empty((len(key), rows.shape[1]), dtype=np.int64)
    for col in range(rows.shape[1] - 1, -1, -1):
        key, out[:, col] = np.divmod(key, base)
    return (out, counts) if return_counts else out


def build_grid(loop, m):
    """Sample the loop at m arc-length positions and triangulate the band."""
    m = int(m)
    if m < 8:
        raise GridError("grid resolution must be at least 8")
    samples = loop.sample(np.arange(m) / m)
    torus = half_sq_table(samples, samples)

    a, b = np.triu_indices(m)
    pairs = np.column_stack([a, b])
    index = np.full((m, m), -1, dtype=np.int64)
    index[a, b] = np.arange(len(a))
    index[b, a] = np.arange(len(a))

    ga, gb = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    ga, gb = ga.ravel(), gb.ravel()
    a1, b1 = (ga + 1) % m, (gb + 1) % m
    t1 = np.column_stack([index[ga, gb], index[a1, gb], index[a1, b1]])
    t2 = np.column_stack([index[ga, gb], index[ga, b1], index[a1, b1]])
    tris = _unique_rows(np.sort(np.vstack([t1, t2]), axis=1), len(a))
    edges = _unique_rows(np.sort(np.vstack([tris[:, [0, 1]], tris[:, [0, 2]], tris[:, [1, 2]]]),
                                 axis=1), len(a))
    grid = MobiusGrid(loop, m, samples, torus, pairs, edges, tris)
    chi = grid.euler_characteristic()
    if chi != 0:
        raise GridError(f"glued grid has Euler characteristic {chi}, expected 0")
    circles = grid.boundary_circles()
    if circles != 1:
        raise GridError(f"glued grid has {circles} boundary circles, expected 1")
    return grid


def lower_star_persistence(grid, p=3, backend=None):
    return compute_persistence(grid.filtered_complex(), p, backend=backend)


def sup_gap_estimate(grid, refine=4, chunk=128):
    """Estimate of sup |T − interpolant| by evaluation on a refined lattice.

    Checks every point of the lattice refined ``refine`` times, the points
    on the lines through loop vertices (where the transform has kinks), and
    the vertex-pair corners.
    """
    loop = grid.loop
    fine = grid.m * refine
    tf = np.arange(fine) / fine
    pf = loop.sample(tf)
    worst = 0.0
    for start in range(0, fine, chunk):
        rows = slice(start, min(start + chunk, fine))
        exact = half_sq_table(pf[rows], pf)
        t1 = np.broadcast_to(tf[rows, None], exact.shape)
        t2 = np.broadcast_to(tf[None, :], exact.shape)
        worst = max(worst, float(np.max(np.abs(exact - grid.interpolate(t1, t2)))))
    knots = loop.partial_lengths
    pk = loop.points
    exact = half_sq_table(pk, pf)
    t1 = np.broadcast_to(knots[:, None], exact.shape)
    t2 = np.broadcast_to(tf[None, :], exact.shape)
    worst = max(worst, float(np.max(np.abs(exact - grid.interpolate(t1, t2)))))
    exact = half_sq_table(pk, pk)
    t1 = np.broadcast_to(knots[:, None], exact.shape)
    t2 = np.broadcast_to(knots[None, :], exact.shape)
    worst = max(worst, float(np.max(np.abs(exact - grid.interpolate(t1, t2)))))
    return worst


def export_heatmap(grid, path):
    """Write ``path`` (CSV), ``path.pgm`` (8-bit image) and ``path.json`` (scale)."""
    h = grid.heatmap()
    path = str(path)
    np.savetxt(path, h, delimiter=",", fmt="%.17g")
    lo, hi = float(h.min()), float(h.max())
    span = hi - lo if hi > lo else 1.0
    img = np.rint((h - lo) / span * 255.0).astype(np.uint8)
    base = path[:-4] if path.endswith(".csv") else path
    with open(base + ".pgm", "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    meta = {"min": lo, "max": hi, "rows": int(h.shape[0]), "cols": int(h.shape[1]),
            "rows_are": "v = t1", "cols_are": "u = t2 - t1", "quantity": "unsquared distance"}
    with open(base + ".json", "w") as fh:
        json.dump(meta, fh, indent=2)
    return {"csv": path, "pgm": base + ".pgm", "json": base + ".json"}


def read_heatmap(path):
    return np.loadtxt(str(path), delimiter=",", ndmin=2)
