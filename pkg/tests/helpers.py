"""Shared random-loop generators for the test suite."""
import numpy as np

from chordal_ph import build_loop, check_nondegeneracy


def star_polygon(rng, n):
    """Random star-shaped (hence simple) polygon in the plane."""
    th = np.sort(rng.uniform(0, 2 * np.pi, n))
    r = rng.uniform(0.5, 1.5, n)
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


def random_points(rng, n, d):
    if d == 2:
        return star_polygon(rng, n)
    return rng.normal(size=(n, d))


def random_loop(rng, n, d, max_tries=200):
    """Rejection-sample a loop that passes C1-C3."""
    for _ in range(max_tries):
        try:
            loop = build_loop(random_points(rng, n, d))
        except ValueError:
            continue
        if check_nondegeneracy(loop).ok:
            return loop
    raise RuntimeError("could not sample a non-degenerate loop")


def regular_polygon(n, r=1.0):
    th = 2 * np.pi * np.arange(n) / n
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


def random_rotation(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
