"""Smooth closed curves: gradient, Hessian and curvature classification.

For a C² curve x(t), t in [0, 1), the function F(t1, t2) = ½‖x(t1) − x(t2)‖²
has gradient (⟨x1', x1 − x2⟩, ⟨x2', x2 − x1⟩) and Hessian

    [[‖x1'‖² + ⟨x1'', x1 − x2⟩,  −⟨x1', x2'⟩],
     [−⟨x1', x2'⟩,  ‖x2'‖² + ⟨x2'', x2 − x1⟩]].

At a critical chord the type follows from the relative curvatures
κ12 = ⟨x1'', v12⟩ (unit speed, v12 = x2 − x1) and cos θ12 = ⟨T1, T2⟩:
saddle when (1 − κ12)(1 − κ21) < cos² θ12, otherwise a maximum when both
κ exceed 1 and a minimum when both are below 1.
"""
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SmoothCurve:
    """Closed curve on [0, 1) with vectorized position and derivatives."""

    name: str
    f: object
    df: object
    ddf: object

    def __call__(self, t):
        return self.f(t)


def circle(r=1.0):
    def f(t):
        w = TWO_PI * np.asarray(t, dtype=float)
        return np.stack([r * np.cos(w), r * np.sin(w)], axis=-1)

    def df(t):
        w = TWO_PI * np.asarray(t, dtype=float)
        return TWO_PI * np.stack([-r * np.sin(w), r * np.cos(w)], axis=-1)

    def ddf(t):
        return -(TWO_PI**2) * f(t)

    return SmoothCurve(f"circle({r})", f, df, ddf)


def ellipse(a=2.0, b=1.0):
    def f(t):
        w = TWO_PI * np.asarray(t, dtype=float)
        return np.stack([a * np.cos(w), b * np.sin(w)], axis=-1)

    def df(t):
        w = TWO_PI * np.asarray(t, dtype=float)
        return TWO_PI * np.stack([-a * np.sin(w), b * np.cos(w)], axis=-1)

    def ddf(t):
        return -(TWO_PI**2) * f(t)

    return SmoothCurve(f"ellipse({a},{b})", f, df, ddf)


def trefoil():
    """Trefoil-like space curve (sin w + 2 sin 2w, cos w − 2 cos 2w, −sin 3w)."""
    def f(t):
        w = TWO_PI * np.asarray(t, dtype=float)
        return np.stack([np.sin(w) + 2 * np.sin(2 * w), np.cos(w) - 2 * np.cos(2 * w),
                         -np.sin(3 * w)], axis=-1)

    def df(t):
        w = TWO_PI * np.asarray(t, dtype=float)
        return TWO_PI * np.stack([np.cos(w) + 4 * np.cos(2 * w), -np.sin(w) + 4 * np.sin(2 * w),
                                  -3 * np.cos(3 * w)], axis=-1)

    def ddf(t):
        w = TWO_PI * np.asarray(t, dtype=float)
        return TWO_PI**2 * np.stack([-np.sin(w) - 8 * np.sin(2 * w),
                                     -np.cos(w) + 8 * np.cos(2 * w),
                                     9 * np.sin(3 * w)], axis=-1)

    return SmoothCurve("trefoil", f, df, ddf)


BUILTIN_CURVES = {"circle": circle, "ellipse": ellipse, "trefoil": trefoil}


def ellipse_polygon_angles(n):
    """Vertex angles for a C3-clean PL ellipse with n (even) vertices.

    The upper half is sampled uniformly, so both ends of the major axis and
    the top of the minor axis are vertices.  The lower half is shifted by up
    to half a step, which puts the bottom of the minor axis at the middle of
    an edge.  A uniform sampling with even n is centrally symmetric, and then
    every edge is parallel to its opposite edge.
    """
    if n < 6 or n % 2:
        raise ValueError("need an even n >= 6")
    half = n // 2
    upper = np.pi * np.arange(half + 1) / half
    j = np.arange(1, half)
    lower = np.pi + np.pi * (j + 0.5 * np.sin(np.pi * j / half)) / half
    return np.concatenate([upper, lower])


def ellipse_polygon(a=2.0, b=1.0, n=200):
    """Vertices of the PL ellipse described in :func:`ellipse_polygon_angles`."""
    th = ellipse_polygon_angles(n)
    return np.column_stack([a * np.cos(th), b * np.sin(th)])


def smooth_value(curve, t1, t2):
    d = curve.f(t1) - curve.f(t2)
    return 0.5 * np.sum(d * d, axis=-1)


def smooth_gradient(curve, t1, t2):
    x1, x2 = curve.f(t1), curve.f(t2)
    d1, d2 = curve.df(t1), curve.df(t2)
    v = x1 - x2
    return np.stack([np.sum(d1 * v, axis=-1), -np.sum(d2 * v, axis=-1)], axis=-1)


def smooth_hessian(curve, t1, t2):
    x1, x2 = curve.f(t1), curve.f(t2)
    d1, d2 = curve.df(t1), curve.df(t2)
    dd1, dd2 = curve.ddf(t1), curve.ddf(t2)
    v = x1 - x2
    p = np.sum(d1 * d1, axis=-1) + np.sum(dd1 * v, axis=-1)
    q = np.sum(d2 * d2, axis=-1) - np.sum(dd2 * v, axis=-1)
    r = -np.sum(d1 * d2, axis=-1)
    return np.stack([np.stack([p, r], axis=-1), np.stack([r, q], axis=-1)], axis=-2)


class NotCriticalError(ValueError):
    """Raised when a chord given to :func:`classify_smooth` is not critical."""


@dataclass
class SmoothCriticalPoint:
    t1: float
    t2: float
    value: float
    kappa12: float
    kappa21: float
    cos_theta12: float
    morse_type: str

    def to_dict(self):
        return {"t1": self.t1, "t2": self.t2, "value": self.value, "kappa12": self.kappa12,
                "kappa21": self.kappa21, "cos_theta12": self.cos_theta12,
                "morse_type": self.morse_type}


def classify_smooth(curve, t1, t2, tol=1e-8, crit_tol=1e-7):
    """Classify a critical chord of a smooth curve via relative curvatures.

    κ is evaluated in unit-speed form: the second derivative divided by the
    squared speed, which equals the unit-speed curvature vector paired with
    the chord because the chord is normal to the tangent at a critical point.
    """
    x1, x2 = curve.f(t1), curve.f(t2)
    d1, d2 = curve.df(t1), curve.df(t2)
    dd1, dd2 = curve.ddf(t1), curve.ddf(t2)
    v12 = x2 - x1
    length = float(np.linalg.norm(v12))
    sp1, sp2 = float(np.linalg.norm(d1)), float(np.linalg.norm(d2))
    T1, T2 = d1 / sp1, d2 / sp2
    if abs(T1 @ v12) > crit_tol * length or abs(T2 @ v12) > crit_tol * length:
        raise NotCriticalError(f"({t1}, {t2}) is not a critical chord")
    k12 = float(dd1 @ v12) / sp1**2
    k21 = float(dd2 @ (-v12)) / sp2**2
    c = float(T1 @ T2)
    det = (1.0 - k12) * (1.0 - k21) - c * c
    if abs(det) <= tol:
        kind = "degenerate"
    elif det < 0:
        kind = "saddle"
    elif k12 > 1 and k21 > 1:
        kind = "max"
    else:
        kind = "min"
    return SmoothCriticalPoint(float(t1), float(t2), 0.5 * length**2, k12, k21, c, kind)


def _circ_dist(a, b):
    d = np.abs(np.mod(a - b, 1.0))
    return np.minimum(d, 1.0 - d)


def find_smooth_critical(curve, grid_n=24, newton_iters=60, tol=1e-10, cutoff=0.02,
                         max_step=0.05):
    """Critical chords found by Newton iteration from a grid of seeds.

    Seeds with a near-singular Hessian are dropped, roots closer than
    ``cutoff`` to the diagonal are excluded, and duplicates (mod 1 and up to
    swapping the ends) are merged.  Returns ``(points, failures)`` where
    ``failures`` counts seeds that did not converge.
    """
    g = (np.arange(grid_n) + 0.5) / grid_n
    t1, t2 = np.meshgrid(g, g, indexing="ij")
    keep = (t1 < t2) & (_circ_dist(t1, t2) >= cutoff)
    t = np.column_stack([t1[keep], t2[keep]])
    alive = np.ones(len(t), dtype=bool)
    for _ in range(newton_iters):
        grad = smooth_gradient(curve, t[:, 0], t[:, 1])
        hess = smooth_hessian(curve, t[:, 0], t[:, 1])
        det = np.linalg.det(hess)
        alive &= np.abs(det) >= 1e-12
        safe = np.where(alive[:, None, None], hess, np.eye(2))
        step = np.linalg.solve(safe, grad[..., None])[..., 0]
        norm = np.max(np.abs(step), axis=1)
        step *= np.minimum(1.0, max_step / np.maximum(norm, 1e-300))[:, None]
        t = np.where(alive[:, None], t - step, t)
    grad = smooth_gradient(curve, t[:, 0], t[:, 1])
    converged = alive & (np.linalg.norm(grad, axis=1) <= tol)
    failures = int(np.sum(~converged))

    roots = []
    found = np.mod(t[converged], 1.0)
    found[found > 1.0 - 1e-12] = 0.0
    for a, b in found:
        if _circ_dist(a, b) < cutoff:
            continue
        a, b = min(a, b), max(a, b)
        if any(min(max(_circ_dist(a, r[0]), _circ_dist(b, r[1])),
                   max(_circ_dist(a, r[1]), _circ_dist(b, r[0]))) < 1e-6 for r in roots):
            continue
        roots.append((a, b))
    points = [classify_smooth(curve, a, b) for a, b in sorted(roots)]
    return points, failures
