"""Euclidean primitives in arbitrary dimension.

Every filtration value used elsewhere in the package is produced by the
batch routines in this module.  Two design points matter downstream:

* Segments are put into a canonical orientation (lexicographically smaller
  endpoint first) and segment pairs into a canonical order before any
  arithmetic happens.  The returned floats therefore do not depend on how a
  caller happens to orient or order its inputs, which makes nerve diagrams
  bit-for-bit invariant under re-indexing and reversal of a loop.
* The segment/segment minimum is the minimum over four point/segment calls
  on the boundary of the unit square plus an interior stationary point.  A
  face in the nerve is evaluated with the very same point/segment call, so
  face values can never exceed coface values because of round-off.
"""
from dataclasses import dataclass
from math import factorial

import numpy as np


@dataclass(frozen=True)
class SegmentPairMin:
    """Minimum of half the squared distance between two segments."""

    sq_half_distance: float
    s1: float
    s2: float


def _as_points(*arrays):
    out = [np.asarray(a, dtype=float) for a in arrays]
    shape = out[0].shape
    for a in out[1:]:
        if a.shape != shape:
            raise ValueError(f"dimension mismatch: {shape} vs {a.shape}")
    return out


def half_sq(p, q):
    """Half the squared distance along the last axis, ``0.5 * sum((p - q)**2)``."""
    diff = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    return 0.5 * np.sum(diff * diff, axis=-1)


def sq_distance(p, q):
    """Squared Euclidean distance between two points of equal dimension."""
    p, q = _as_points(p, q)
    if p.ndim != 1:
        raise ValueError("sq_distance expects two points")
    diff = p - q
    return float(np.sum(diff * diff))


def lex_less(a, b):
    """Row-wise strict lexicographic comparison of two (N, d) arrays."""
    less = np.zeros(a.shape[0], dtype=bool)
    equal = np.ones(a.shape[0], dtype=bool)
    for k in range(a.shape[1]):
        less |= equal & (a[:, k] < b[:, k])
        equal &= a[:, k] == b[:, k]
    return less


def point_segment_min_batch(p, a, b):
    """Vectorized squared distance from points to segments.

    Parameters are (N, d) arrays.  Returns ``(sq, s)`` with ``sq`` the
    squared distance from ``p`` to the segment ``[a, b]`` and ``s`` the
    clamped barycentric minimizer measured from ``a``.
    """
    p, a, b = _as_points(p, a, b)
    flip = lex_less(b, a)
    a0 = np.where(flip[:, None], b, a)
    a1 = np.where(flip[:, None], a, b)

    ab = a1 - a0
    denom = np.sum(ab * ab, axis=1)
    num = np.sum((p - a0) * ab, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), 0.0)
    s = np.clip(s, 0.0, 1.0)

    foot = a0 + s[:, None] * ab
    foot = np.where((s == 0.0)[:, None], a0, foot)
    foot = np.where((s == 1.0)[:, None], a1, foot)
    diff = p - foot
    sq = np.sum(diff * diff, axis=1)

    # the endpoints are evaluated exactly as a corner chord would be, and win
    # against the interior foot whenever round-off makes the foot look worse
    d0 = p - a0
    sq0 = np.sum(d0 * d0, axis=1)
    d1 = p - a1
    sq1 = np.sum(d1 * d1, axis=1)
    use0 = sq0 < sq
    sq = np.where(use0, sq0, sq)
    s = np.where(use0, 0.0, s)
    use1 = sq1 < sq
    sq = np.where(use1, sq1, sq)
    s = np.where(use1, 1.0, s)

    s = np.where(flip, 1.0 - s, s)
    return sq, s


def point_segment_min(p, a, b):
    """Squared distance from ``p`` to segment ``[a, b]`` and its minimizer ``s``.

    A degenerate segment (``a == b``) is allowed and gives ``s = 0``.

    >>> point_segment_min([0.0, 1.0], [-1.0, 0.0], [1.0, 0.0])
    (1.0, 0.5)
    """
    p, a, b = _as_points(p, a, b)
    sq, s = point_segment_min_batch(p[None], a[None], b[None])
    return float(sq[0]), float(s[0])


def segment_segment_min_batch(a0, a1, b0, b1):
    """Vectorized minimum of ½‖(a0+s1(a1−a0)) − (b0+s2(b1−b0))‖² over [0,1]².

    Returns three arrays ``(half_sq, s1, s2)``.  Ties between minimizers
    (parallel segments) resolve to the lexicographically smallest (s1, s2).
    """
    a0, a1, b0, b1 = _as_points(a0, a1, b0, b1)
    n, d = a0.shape

    # canonical orientation of each segment
    fa = lex_less(a1, a0)
    fb = lex_less(b1, b0)
    pa0 = np.where(fa[:, None], a1, a0)
    pa1 = np.where(fa[:, None], a0, a1)
    pb0 = np.where(fb[:, None], b1, b0)
    pb1 = np.where(fb[:, None], b0, b1)
    # canonical order of the two segments
    swap = lex_less(np.hstack([pb0, pb1]), np.hstack([pa0, pa1]))
    sw = swap[:, None]
    c0 = np.where(sw, pb0, pa0)
    c1 = np.where(sw, pb1, pa1)
    e0 = np.where(sw, pa0, pb0)
    e1 = np.where(sw, pa1, pb1)

    vals = np.empty((n, 5))
    s1 = np.empty((n, 5))
    s2 = np.empty((n, 5))
    vals[:, 0], s2[:, 0] = point_segment_min_batch(c0, e0, e1)
    s1[:, 0] = 0.0
    vals[:, 1], s2[:, 1] = point_segment_min_batch(c1, e0, e1)
    s1[:, 1] = 1.0
    vals[:, 2], s1[:, 2] = point_segment_min_batch(e0, c0, c1)
    s2[:, 2] = 0.0
    vals[:, 3], s1[:, 3] = point_segment_min_batch(e1, c0, c1)
    s2[:, 3] = 1.0

    # interior stationary point of the quadratic, when it exists
    d1 = c1 - c0
    d2 = e1 - e0
    r = c0 - e0
    qa = np.sum(d1 * d1, axis=1)
    qb = np.sum(d1 * d2, axis=1)
    qc = np.sum(d2 * d2, axis=1)
    qe = np.sum(d1 * r, axis=1)
    qf = np.sum(d2 * r, axis=1)
    det = qa * qc - qb * qb
    ok = det > 1e-14 * qa * qc
    safe = np.where(ok, det, 1.0)
    si = (qb * qf - qc * qe) / safe
    ti = (qa * qf - qb * qe) / safe
    ok &= (si > 0.0) & (si < 1.0) & (ti > 0.0) & (ti < 1.0)
    diff = (c0 + si[:, None] * d1) - (e0 + ti[:, None] * d2)
    vals[:, 4] = np.where(ok, np.sum(diff * diff, axis=1), np.inf)
    s1[:, 4] = si
    s2[:, 4] = ti

    # back to the caller's frame: undo the swap, then the flips
    s1, s2 = np.where(sw, s2, s1), np.where(sw, s1, s2)
    s1 = np.where(fa[:, None], 1.0 - s1, s1)
    s2 = np.where(fb[:, None], 1.0 - s2, s2)

    best = vals.min(axis=1)
    cand = vals == best[:, None]
    k1 = np.where(cand, s1, np.inf).min(axis=1)
    cand &= s1 == k1[:, None]
    k2 = np.where(cand, s2, np.inf).min(axis=1)
    return 0.5 * best, k1, k2


def segment_segment_min(a0, a1, b0, b1):
    """Closest pair of points on two segments, as a :class:`SegmentPairMin`."""
    a0, a1, b0, b1 = _as_points(a0, a1, b0, b1)
    h, s1, s2 = segment_segment_min_batch(a0[None], a1[None], b0[None], b1[None])
    return SegmentPairMin(float(h[0]), float(s1[0]), float(s2[0]))


def _cm_coefficient(k):
    return (-1) ** (k + 1) / (factorial(k) ** 2 * 2**k)


def cayley_menger_sq_volume_batch(configs):
    """Squared k-volumes of many simplices at once.

    ``configs`` has shape (N, k+1, d).  For k = 1 the squared length is
    returned directly (it is what the determinant evaluates to).
    """
    x = np.asarray(configs, dtype=float)
    if x.ndim != 3:
        raise ValueError("configs must have shape (N, k+1, d)")
    k = x.shape[1] - 1
    d = x.shape[2]
    if k < 1 or k > d:
        raise ValueError(f"need 1 <= k <= d, got k={k}, d={d}")
    diff = x[:, :, None, :] - x[:, None, :, :]
    dist2 = np.sum(diff * diff, axis=-1)
    if k == 1:
        return dist2[:, 0, 1].copy()

    m = np.ones((x.shape[0], k + 2, k + 2))
    m[:, 0, 0] = 0.0
    m[:, 1:, 1:] = dist2
    vol2 = _cm_coefficient(k) * np.linalg.det(m)

    scale = dist2.reshape(x.shape[0], -1).max(axis=1)
    thresh = 1e-12 * scale**k
    if np.any(vol2 < -thresh):
        raise FloatingPointError("Cayley-Menger determinant has the wrong sign")
    return np.maximum(vol2, 0.0)


def cayley_menger_sq_volume(points):
    """Squared volume of the simplex spanned by k+1 points (1 <= k <= d).

    >>> cayley_menger_sq_volume([[0, 0], [1, 0], [0, 1]])
    0.25
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must be a list of equal-length coordinate vectors")
    return float(cayley_menger_sq_volume_batch(pts[None])[0])
