"""Tangent-angle classification of critical chords of a polygonal loop.

A chord joins loop positions z1 and z2.  At each end the two one-sided unit
tangents are compared with the chord direction, giving four angle classes
(Acute / Right / Obtuse).  An end "curves towards" the other when both its
angles are acute and "curves away" when neither is.  The index of a
critical chord is then 0 (away/away), 1 (towards/away) or 2
(towards/towards); every other pattern is regular.
"""
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .loop import LoopParam, check_nondegeneracy
from .nerve import all_morse_sets, build_nerve
from .persistence import conley_index

RIGHT_TOL = 1e-8


class AngleClass(str, Enum):
    ACUTE = "A"
    RIGHT = "R"
    OBTUSE = "O"


class ClassificationError(ValueError):
    """Raised when a chord or loop cannot be classified."""


@dataclass
class CriticalChord:
    location: tuple
    value: float
    index: int
    angles: tuple
    kind: str

    def to_dict(self):
        (i, s1), (j, s2) = self.location
        return {"i": int(i), "s1": float(s1), "j": int(j), "s2": float(s2),
                "value": float(self.value), "index": int(self.index),
                "angles": [a.value for a in self.angles], "kind": self.kind}


def _classes(cos, tol):
    out = np.full(cos.shape, "R", dtype="<U1")
    out[cos > tol] = "A"
    out[cos < -tol] = "O"
    return out


def angle_codes(loop, i1, s1, i2, s2, tol=RIGHT_TOL):
    """Vectorized angle classes, shape (N, 4): θ⁺(z1), θ⁻(z1), θ⁺(z2), θ⁻(z2).

    Positions must be canonical (``0 <= s < 1``).  Raises if a chord has
    zero length.
    """
    i1 = np.asarray(i1, dtype=np.int64)
    i2 = np.asarray(i2, dtype=np.int64)
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    p1 = loop.points_at(i1, s1)
    p2 = loop.points_at(i2, s2)
    v = p2 - p1
    norm = np.sqrt(np.sum(v * v, axis=1))
    if np.any(norm == 0):
        raise ClassificationError("chord has zero length (boundary of the band)")
    v = v / norm[:, None]
    tau = loop.unit_tangents
    n = loop.n

    def one_end(i, s, direction):
        plus = tau[i]
        minus = np.where((s == 0.0)[:, None], tau[(i - 1) % n], tau[i])
        cp = np.sum(plus * direction, axis=1)
        cm = -np.sum(minus * direction, axis=1)
        return cp, cm

    c1p, c1m = one_end(i1, s1, v)
    c2p, c2m = one_end(i2, s2, -v)
    return _classes(np.column_stack([c1p, c1m, c2p, c2m]), tol)


def tangent_angles(loop, w, tol=RIGHT_TOL):
    """Angle classes (θ⁺(z1), θ⁻(z1), θ⁺(z2), θ⁻(z2)) of the chord ``w``."""
    a = loop.canonical(w[0])
    b = loop.canonical(w[1])
    codes = angle_codes(loop, [a.i], [a.s], [b.i], [b.s], tol)[0]
    return tuple(AngleClass(c) for c in codes)


def kinds_from_codes(codes):
    """Index array (0, 1, 2, or -1 for regular) from (N, 4) angle codes."""
    towards1 = (codes[:, 0] == "A") & (codes[:, 1] == "A")
    towards2 = (codes[:, 2] == "A") & (codes[:, 3] == "A")
    away1 = (codes[:, 0] != "A") & (codes[:, 1] != "A")
    away2 = (codes[:, 2] != "A") & (codes[:, 3] != "A")
    index = np.full(len(codes), -1, dtype=np.int64)
    index[away1 & away2] = 0
    index[(towards1 & away2) | (away1 & towards2)] = 1
    index[towards1 & towards2] = 2
    return index


def classify_chord(loop, w, tol=RIGHT_TOL, value=None):
    """Return a :class:`CriticalChord`, or None when the chord is regular."""
    a = loop.canonical(w[0])
    b = loop.canonical(w[1])
    codes = angle_codes(loop, [a.i], [a.s], [b.i], [b.s], tol)
    index = int(kinds_from_codes(codes)[0])
    if index < 0:
        return None
    if value is None:
        p, q = loop.point(a), loop.point(b)
        value = float(0.5 * np.sum((p - q) ** 2))
    return CriticalChord((a, b), float(value), index,
                         tuple(AngleClass(c) for c in codes[0]), f"K{index}")


def candidate_chords(loop, nc):
    """Distinct chords realizing the positive filtration values of a nerve.

    Returns arrays ``(i1, s1, i2, s2, value)`` in canonical form.
    """
    n = loop.n
    pos = nc.values > 0
    loc = nc.locations[pos]
    vals = nc.values[pos]
    i1 = loc[:, 0].astype(np.int64)
    s1 = loc[:, 1].copy()
    i2 = loc[:, 2].astype(np.int64)
    s2 = loc[:, 3].copy()
    # (i, 1) is the same point as (i + 1, 0)
    wrap = s1 == 1.0
    i1[wrap] = (i1[wrap] + 1) % n
    s1[wrap] = 0.0
    wrap = s2 == 1.0
    i2[wrap] = (i2[wrap] + 1) % n
    s2[wrap] = 0.0
    # order the two ends so that each chord has one representation
    swap = (i2 < i1) | ((i2 == i1) & (s2 < s1))
    i1, i2 = np.where(swap, i2, i1), np.where(swap, i1, i2)
    s1, s2 = np.where(swap, s2, s1), np.where(swap, s1, s2)
    table = np.column_stack([i1, s1, i2, s2, vals])
    table = np.unique(table, axis=0)
    return (table[:, 0].astype(np.int64), table[:, 1], table[:, 2].astype(np.int64),
            table[:, 3], table[:, 4])


def enumerate_critical_chords(loop, tol=RIGHT_TOL, nc=None):
    """All critical chords among the nerve's candidate chords (needs C1-C3)."""
    report = check_nondegeneracy(loop)
    if report.c3_violations:
        raise ClassificationError(
            f"C3 fails for segment pairs {report.c3_violations[:5]}; perturb the loop first")
    if nc is None:
        nc = build_nerve(loop, validate=False)
    i1, s1, i2, s2, vals = candidate_chords(loop, nc)
    codes = angle_codes(loop, i1, s1, i2, s2, tol)
    index = kinds_from_codes(codes)
    out = []
    for k in np.flatnonzero(index >= 0):
        loc = (LoopParam(int(i1[k]), float(s1[k])), LoopParam(int(i2[k]), float(s2[k])))
        out.append(CriticalChord(loc, float(vals[k]), int(index[k]),
                                 tuple(AngleClass(c) for c in codes[k]), f"K{index[k]}"))
    out.sort(key=lambda c: (c.value, c.index, c.location))
    return out


@dataclass
class AgreementReport:
    ok: bool
    values_checked: int
    mismatches: list = field(default_factory=list)

    def to_dict(self):
        return {"ok": self.ok, "values_checked": self.values_checked,
                "mismatches": [{"value": v, "nerve": list(a), "chords": list(b)}
                               for v, a, b in self.mismatches]}


def conley_agreement(loop, chords=None, nc=None, p=3):
    """Compare Conley indices of Morse sets with the critical chord indices.

    For every filtration value a > 0 the summed Betti vectors of the Morse
    sets entering at a must equal the summed unit vectors e_index of the
    critical chords with value a.
    """
    if nc is None:
        nc = build_nerve(loop, validate=False)
    if chords is None:
        chords = enumerate_critical_chords(loop, nc=nc)
    from_nerve = {}
    for value, sets in all_morse_sets(nc).items():
        if value <= 0:
            continue
        total = np.zeros(3, dtype=np.int64)
        for ms in sets:
            total += conley_index(ms, p).betti
        if total.any():
            from_nerve[value] = tuple(int(t) for t in total)
    from_chords = {}
    counts = Counter((c.value, c.index) for c in chords)
    for (value, index), mult in counts.items():
        vec = list(from_chords.get(value, (0, 0, 0)))
        vec[index] += mult
        from_chords[value] = tuple(vec)
    mismatches = []
    for value in sorted(set(from_nerve) | set(from_chords)):
        a = from_nerve.get(value, (0, 0, 0))
        b = from_chords.get(value, (0, 0, 0))
        if a != b:
            mismatches.append((value, a, b))
    return AgreementReport(not mismatches, len(set(from_nerve) | set(from_chords)), mismatches)
