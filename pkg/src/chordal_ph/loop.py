"""Piecewise-linear loops: ingestion, arc length, tangents and validation."""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .geometry import half_sq, point_segment_min_batch, segment_segment_min_batch


class LoopError(ValueError):
    """Raised when a point sequence cannot be turned into a valid loop."""


class LoopParam(NamedTuple):
    """Position ``x_i + s * u_i`` on edge ``i`` of a loop."""

    i: int
    s: float


class PolyLoop:
    """Closed polygonal loop through ``points`` (cyclic order = row order).

    All derived arrays are computed once and made read-only.
    """

    def __init__(self, points):
        x = np.array(points, dtype=float)
        if x.ndim != 2:
            raise LoopError("points must be a 2-d array of shape (n, d)")
        n, d = x.shape
        if n <= 3:
            raise LoopError(f"a loop needs more than 3 points, got {n}")
        if d < 1:
            raise LoopError("points need at least one coordinate")
        if not np.all(np.isfinite(x)):
            raise LoopError("points must be finite")

        u = np.roll(x, -1, axis=0) - x
        lengths = np.sqrt(np.sum(u * u, axis=1))
        zero = np.flatnonzero(lengths == 0.0)
        if zero.size:
            i = int(zero[0])
            raise LoopError(f"zero-length edge {i}: points {i} and {(i + 1) % n} coincide (C1)")

        total = float(lengths.sum())
        partial = np.concatenate([[0.0], np.cumsum(lengths)[:-1]]) / total

        self.points = x
        self.edge_vectors = u
        self.lengths = lengths
        self.total_length = total
        self.partial_lengths = partial
        self.unit_tangents = u / lengths[:, None]
        for arr in (self.points, self.edge_vectors, self.lengths,
                    self.partial_lengths, self.unit_tangents):
            arr.setflags(write=False)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"PolyLoop(n={self.n}, d={self.dim}, L={self.total_length:.6g})"

    def bbox_diameter(self):
        span = self.points.max(axis=0) - self.points.min(axis=0)
        return float(np.sqrt(np.sum(span * span)))

    def default_tolerance(self):
        return 1e-9 * self.bbox_diameter()

    def canonical(self, w):
        """Map ``(i, s)`` into ``0 <= i < n`` with ``s == 1`` sent to ``(i + 1, 0)``."""
        i, s = int(w[0]) % self.n, float(w[1])
        if s == 1.0:
            return LoopParam((i + 1) % self.n, 0.0)
        return LoopParam(i, s)

    def points_at(self, i, s):
        """Vectorized ``x_i + s u_i`` with exact vertices at s = 0 and s = 1."""
        i = np.asarray(i, dtype=np.int64) % self.n
        s = np.asarray(s, dtype=float)
        out = self.points[i] + s[..., None] * self.edge_vectors[i]
        out = np.where((s == 0.0)[..., None], self.points[i], out)
        out = np.where((s == 1.0)[..., None], self.points[(i + 1) % self.n], out)
        return out

    def point(self, w):
        i, s = self.canonical(w)
        return self.points_at(np.array([i]), np.array([s]))[0]

    def param_at(self, t):
        """Arc-length parameter ``t`` in [0, 1) to local ``(i, s)`` arrays."""
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        i = np.searchsorted(self.partial_lengths, t, side="right") - 1
        i = np.clip(i, 0, self.n - 1)
        s = (t - self.partial_lengths[i]) * self.total_length / self.lengths[i]
        return i, np.clip(s, 0.0, 1.0)

    def sample(self, t):
        """Points of the loop at arc-length parameters ``t`` (normalized length 1)."""
        i, s = self.param_at(t)
        return self.points_at(i, s)

    def tangent_pair(self, w):
        """One-sided unit tangents (tau_minus, tau_plus) at a loop position."""
        i, s = self.canonical(w)
        if s == 0.0:
            return self.unit_tangents[i - 1], self.unit_tangents[i]
        return self.unit_tangents[i], self.unit_tangents[i]


def build_loop(points):
    """Build a :class:`PolyLoop` from an (n, d) point sequence with n > 3."""
    return PolyLoop(points)


@dataclass
class NondegeneracyReport:
    """Violations of the three non-degeneracy conditions."""

    c1_violations: list = field(default_factory=list)
    c2_violations: list = field(default_factory=list)
    c3_violations: list = field(default_factory=list)
    tolerance: float = 0.0

    @property
    def ok(self):
        return not (self.c1_violations or self.c2_violations or self.c3_violations)

    @property
    def embedded(self):
        """True when C1 and C2 hold (enough for a diagram)."""
        return not (self.c1_violations or self.c2_violations)

    def to_dict(self):
        return {
            "ok": self.ok,
            "tolerance": self.tolerance,
            "c1_violations": [list(v) for v in self.c1_violations],
            "c2_violations": [list(v) for v in self.c2_violations],
            "c3_violations": [list(v) for v in self.c3_violations],
        }


def check_nondegeneracy(loop, tol=None):
    """Check C1 (distinct points), C2 (embedding) and C3 (no parallel edges).

    ``tol`` is a length; it defaults to 1e-9 times the bounding-box diameter.
    The parallelism test of C3 compares the sine of the angle between two
    edges with the dimensionless ``tol / diameter``.
    """
    if tol is None:
        tol = loop.default_tolerance()
    tol = float(tol)
    n = loop.n
    x = loop.points
    report = NondegeneracyReport(tolerance=tol)

    ii, jj = np.triu_indices(n, k=1)
    d2 = 2.0 * half_sq(x[ii], x[jj])
    bad = d2 <= tol * tol
    report.c1_violations = [(int(a), int(b)) for a, b in zip(ii[bad], jj[bad])]

    nxt = lambda k: (k + 1) % n  # noqa: E731
    adjacent = (jj == ii + 1) | ((ii == 0) & (jj == n - 1))
    pi, pj = ii[~adjacent], jj[~adjacent]
    h, _, _ = segment_segment_min_batch(x[pi], x[nxt(pi)], x[pj], x[nxt(pj)])
    bad = 2.0 * h <= tol * tol
    c2 = [(int(a), int(b)) for a, b in zip(pi[bad], pj[bad])]
    # consecutive edges i, i+1 share x_{i+1}; they overlap only if one folds back
    k = np.arange(n)
    back1, _ = point_segment_min_batch(x[k], x[nxt(k)], x[nxt(nxt(k))])
    back2, _ = point_segment_min_batch(x[nxt(nxt(k))], x[k], x[nxt(k)])
    fold = (back1 <= tol * tol) | (back2 <= tol * tol)
    c2 += [tuple(sorted((int(a), int(nxt(a))))) for a in k[fold]]
    report.c2_violations = sorted(set(c2))

    diam = loop.bbox_diameter()
    rel = tol / diam if diam > 0 else tol
    tau = loop.unit_tangents
    # sine of the angle between the edge directions, from the orthogonal
    # component (1 - |cos| would only resolve angles down to sqrt(rel))
    cos = np.sum(tau[ii] * tau[jj], axis=1)
    perp = tau[jj] - cos[:, None] * tau[ii]
    sin = np.sqrt(np.sum(perp * perp, axis=1))
    bad = sin <= rel
    report.c3_violations = [(int(a), int(b)) for a, b in zip(ii[bad], jj[bad])]
    return report


def eval_T(loop, w):
    """Half the squared distance between the loop points at ``w = (w1, w2)``."""
    p = loop.point(w[0])
    q = loop.point(w[1])
    return float(half_sq(p, q))


def sample_curve(curve, n, params=None):
    """PolyLoop through ``curve(t)`` at ``t = k / n`` (or at given ``params``)."""
    if n <= 3:
        raise LoopError(f"a loop needs more than 3 points, got {n}")
    ts = np.arange(n) / n if params is None else np.asarray(params, dtype=float)
    pts = np.array([np.asarray(curve(t), dtype=float) for t in ts])
    return build_loop(pts)
