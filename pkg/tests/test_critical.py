from itertools import product

import numpy as np
import pytest

from chordal_ph import build_loop, build_nerve
from chordal_ph.critical import (AngleClass, ClassificationError, angle_codes, candidate_chords,
                                 classify_chord, conley_agreement, enumerate_critical_chords,
                                 kinds_from_codes, tangent_angles)
from chordal_ph.geometry import half_sq
from chordal_ph.smooth import ellipse_polygon
from helpers import random_loop, regular_polygon

A, R, O = AngleClass.ACUTE, AngleClass.RIGHT, AngleClass.OBTUSE
HOURGLASS = [(-2, -1), (0, -0.3), (2.1, -1.2), (1.9, 1.1), (0.1, 0.35), (-2.2, 0.9)]


def convex_polygon(rng, n):
    th = np.sort(rng.uniform(0, 2 * np.pi, n))
    return np.column_stack([1.7 * np.cos(th), np.sin(th)])


def dot_class(c, tol=1e-8):
    return A if c > tol else (O if c < -tol else R)


def test_hexagon_midpoints_all_right():
    loop = build_loop(regular_polygon(6))
    assert tangent_angles(loop, ((0, 0.5), (3, 0.5))) == (R, R, R, R)


def test_pentagon_vertex_to_foot():
    loop = build_loop(regular_polygon(5))
    x = loop.points
    # the foot of vertex 0 on the opposite edge 2 is its midpoint
    angles = tangent_angles(loop, ((0, 0.0), (2, 0.5)))
    assert angles[2:] == (R, R)
    v = (0.5 * (x[2] + x[3]) - x[0])
    v /= np.linalg.norm(v)
    tau = loop.unit_tangents
    assert angles[0] == dot_class(tau[0] @ v)
    assert angles[1] == dot_class(-tau[4] @ v)


def test_convex_diameter_is_k2(rng):
    for _ in range(10):
        loop = build_loop(convex_polygon(rng, 9))
        x = loop.points
        h = half_sq(x[:, None, :], x[None, :, :])
        i, j = np.unravel_index(np.argmax(h), h.shape)
        chord = classify_chord(loop, ((i, 0.0), (j, 0.0)))
        assert chord.angles == (A, A, A, A)
        assert chord.index == 2 and chord.kind == "K2"
        assert chord.value == h[i, j]


def test_convex_polygon_k2_and_euler_count(rng):
    # the diameter is always a K2 chord; a convex polygon can have further
    # local maxima, balanced by saddles since the band and its boundary
    # circle both have Euler characteristic 0
    for _ in range(8):
        loop = build_loop(convex_polygon(rng, 11))
        chords = enumerate_critical_chords(loop)
        x = loop.points
        k2 = [c for c in chords if c.index == 2]
        assert max(c.value for c in k2) == half_sq(x[:, None], x[None, :]).max()
        assert sum((-1) ** c.index for c in chords) == 0


def test_index_rules_match_definitions():
    letters = ["A", "R", "O"]
    for code in product(letters, repeat=4):
        got = int(kinds_from_codes(np.array([code]))[0])
        toward = [code[0] == code[1] == "A", code[2] == code[3] == "A"]
        away = ["A" not in code[:2], "A" not in code[2:]]
        if away[0] and away[1]:
            expect = 0
        elif (toward[0] and away[1]) or (away[0] and toward[1]):
            expect = 1
        elif toward[0] and toward[1]:
            expect = 2
        else:
            expect = -1
        assert got == expect, code


def test_mixed_end_is_regular():
    assert kinds_from_codes(np.array([["A", "O", "A", "A"]]))[0] == -1
    assert kinds_from_codes(np.array([["O", "A", "O", "O"]]))[0] == -1


def test_hourglass_waist_is_k0():
    loop = build_loop(HOURGLASS)
    chords = enumerate_critical_chords(loop)
    k0 = [c for c in chords if c.index == 0]
    assert len(k0) == 1
    assert (k0[0].location[0].i, k0[0].location[1].i) == (1, 4)
    assert k0[0].angles == (O, O, O, O)
    assert conley_agreement(loop, chords=chords).ok


def test_classify_chord_regular_returns_none():
    loop = build_loop(regular_polygon(5))
    # a generic interior chord is regular
    assert classify_chord(loop, ((0, 0.3), (2, 0.1))) is None


def test_zero_length_chord_raises():
    loop = build_loop(regular_polygon(5))
    with pytest.raises(ClassificationError):
        angle_codes(loop, [1], [0.0], [1], [0.0])


def test_c3_failure_raises():
    with pytest.raises(ClassificationError):
        enumerate_critical_chords(build_loop(regular_polygon(6)))


def test_candidates_are_canonical(rng):
    loop = random_loop(rng, 8, 3)
    i1, s1, i2, s2, vals = candidate_chords(loop, build_nerve(loop))
    assert np.all((s1 >= 0) & (s1 < 1) & (s2 >= 0) & (s2 < 1))
    assert np.all((i1 < i2) | ((i1 == i2) & (s1 <= s2)))
    assert np.all(vals > 0)


def test_agreement_random_loops(rng):
    for k in range(20):
        loop = random_loop(rng, 9, (2, 3, 5)[k % 3])
        rep = conley_agreement(loop)
        assert rep.ok, rep.mismatches


def test_agreement_detects_tampering(rng):
    loop = random_loop(rng, 9, 3)
    chords = enumerate_critical_chords(loop)
    rep = conley_agreement(loop, chords=chords[1:])
    assert not rep.ok
    assert len(rep.mismatches) == 1


def test_pl_ellipse_counts():
    loop = build_loop(ellipse_polygon(2.0, 1.0, 200))
    chords = enumerate_critical_chords(loop)
    assert [c.index for c in chords] == [1, 2]
    assert chords[1].value == 8.0
    assert chords[0].value == pytest.approx(2.0, rel=1e-3)
