"""The k-simplex volume transform and its sup-norm stability bound."""
from dataclasses import dataclass
from math import factorial, sqrt

import numpy as np

from .geometry import cayley_menger_sq_volume_batch


@dataclass
class VolumeSample:
    k: int
    configuration: np.ndarray
    sq_volume: float


def _map_configs(mapping, configurations):
    conf = np.asarray(configurations)
    if mapping is None:
        return np.asarray(conf, dtype=float)
    flat = np.asarray(mapping(conf.ravel()), dtype=float)
    return flat.reshape(conf.shape + (flat.shape[-1],))


def vol_transform_values(mapping, k, configurations):
    """Squared k-volumes of mapped configurations, as an array.

    ``configurations`` is an (N, k+1) array of domain parameters passed to
    the vectorized ``mapping``; with ``mapping=None`` it must already be an
    (N, k+1, d) array of points.
    """
    pts = _map_configs(mapping, configurations)
    if pts.shape[1] != k + 1:
        raise ValueError(f"configurations must have k+1 = {k + 1} entries")
    if k < 1 or k > pts.shape[2]:
        raise ValueError(f"need 1 <= k <= d, got k={k}, d={pts.shape[2]}")
    return cayley_menger_sq_volume_batch(pts)


def vol_transform(mapping, k, configurations):
    """List of :class:`VolumeSample` for each configuration."""
    vals = vol_transform_values(mapping, k, configurations)
    return [VolumeSample(k, np.asarray(c), float(v)) for c, v in zip(configurations, vals)]


def stability_bound(k, M, D, squared_constant=True):
    """Right-hand side of the volume-transform stability estimate.

    ``squared_constant=True`` uses a (2k+2)² term under the root, the safe
    choice; ``False`` uses the tighter (2k+2) variant.
    """
    c = (2 * k + 2) ** 2 if squared_constant else (2 * k + 2)
    pref = (k + 2) * sqrt(k * (k + 1)) / (factorial(k) ** 2 * 2.0 ** (k - 2))
    return pref * M * (M + D) * sqrt((k * k + 2 * k + 2) * D * D + c) ** (k + 1)


def _diameter(points):
    diff = points[:, None, :] - points[None, :, :]
    return float(np.sqrt(np.max(np.sum(diff * diff, axis=-1))))


@dataclass
class StabilityReport:
    k: int
    empirical: float
    M: float
    D: float
    bound: float
    bound_stated: float
    ok: bool

    def to_dict(self):
        return {"k": self.k, "empirical": self.empirical, "M": self.M, "D": self.D,
                "bound": self.bound, "bound_stated": self.bound_stated, "ok": self.ok}


def check_stability_bound(e1, e2, k, configurations):
    """Compare sup |Vol_k(e1) − Vol_k(e2)| with the stability bound.

    ``e1`` and ``e2`` are (m, d) arrays: the two maps evaluated on the same
    finite domain sample X.  ``configurations`` is an (N, k+1) integer array
    of indices into X.  M and D are computed on X itself, so the bound
    applies to exactly the sampled domain.
    """
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    if e1.shape != e2.shape:
        raise ValueError("e1 and e2 must be sampled on the same domain")
    conf = np.asarray(configurations, dtype=np.int64)
    v1 = vol_transform_values(None, k, e1[conf])
    v2 = vol_transform_values(None, k, e2[conf])
    diff = np.abs(v1 - v2)
    M = float(np.max(np.sqrt(np.sum((e1 - e2) ** 2, axis=1))))
    D = max(_diameter(e1), _diameter(e2))
    bound = stability_bound(k, M, D)
    emp = float(diff.max()) if diff.size else 0.0
    return StabilityReport(k, emp, M, D, bound, stability_bound(k, M, D, squared_constant=False),
                           emp <= bound)


def random_stability_trials(k, d=4, trials=100, m=40, scale=1e-2, seed=0):
    """Randomized trials of :func:`check_stability_bound` on perturbed samples."""
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(trials):
        e1 = rng.normal(size=(m, d))
        e2 = e1 + scale * rng.uniform(0.0, 1.0) * rng.normal(size=(m, d))
        conf = np.array([rng.choice(m, size=k + 1, replace=False) for _ in range(200)])
        reports.append(check_stability_bound(e1, e2, k, conf))
    return reports
