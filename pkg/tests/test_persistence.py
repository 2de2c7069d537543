from itertools import combinations

import numpy as np
import pytest

from chordal_ph import build_nerve
from chordal_ph.nerve import MorseSet
from chordal_ph.persistence import (FilteredComplex, PersistenceDiagram, bottleneck,
                                    bottleneck_bruteforce, compute_persistence, conley_index,
                                    is_prime, rank_mod_p, relative_betti, square_map,
                                    verify_maxmin_structure)
from helpers import random_loop

INF = float("inf")


def parse_text(text):
    """Independent reader for the ``dim v0 .. F`` export format."""
    simplices, values = [], []
    for line in text.splitlines():
        parts = line.split()
        d = int(parts[0])
        simplices.append(tuple(sorted(int(v) for v in parts[1:d + 2])))
        values.append(float(parts[d + 2]))
    return simplices, values


def reference_diagram(text, p):
    """Standard column reduction over Z_p without clearing, dicts only."""
    simplices, values = parse_text(text)
    index = {s: k for k, s in enumerate(simplices)}
    columns = []
    for s in simplices:
        col = {}
        if len(s) > 1:
            for k in range(len(s)):
                face = s[:k] + s[k + 1:]
                col[index[face]] = (-1) ** k % p
        columns.append(col)
    low_owner = {}
    pairs = []
    for j, col in enumerate(columns):
        while col:
            low = max(col)
            if low not in low_owner:
                break
            other = columns[low_owner[low]]
            f = col[low] * pow(other[low], -1, p) % p
            for r, v in other.items():
                nv = (col.get(r, 0) - f * v) % p
                if nv:
                    col[r] = nv
                else:
                    col.pop(r, None)
        if col:
            low_owner[max(col)] = j
            pairs.append((max(col), j))
    paired = {b for b, _ in pairs} | {d for _, d in pairs}
    dims, births, deaths = [], [], []
    for b, d in pairs:
        if values[b] < values[d] and len(simplices[b]) <= 3:
            dims.append(len(simplices[b]) - 1)
            births.append(values[b])
            deaths.append(values[d])
    for k, s in enumerate(simplices):
        if k not in paired and len(s) <= 3:
            dims.append(len(s) - 1)
            births.append(values[k])
            deaths.append(INF)
    return PersistenceDiagram(p, dims, births, deaths)


def numpy_rank(mat, p):
    m = np.array(mat, dtype=np.int64) % p
    rank = 0
    for c in range(m.shape[1]):
        rows = [r for r in range(rank, m.shape[0]) if m[r, c]]
        if not rows:
            continue
        m[[rank, rows[0]]] = m[[rows[0], rank]]
        m[rank] = m[rank] * pow(int(m[rank, c]), -1, p) % p
        for r in range(m.shape[0]):
            if r != rank and m[r, c]:
                m[r] = (m[r] - m[r, c] * m[rank]) % p
        rank += 1
    return rank


def prefix_betti(text, a, p):
    simplices, values = parse_text(text)
    sub = [s for s, v in zip(simplices, values) if v <= a]
    by_dim = {}
    for s in sub:
        by_dim.setdefault(len(s) - 1, []).append(s)
    ranks = {}
    for d in range(1, 4):
        cols, rows = by_dim.get(d, []), by_dim.get(d - 1, [])
        if not cols or not rows:
            ranks[d] = 0
            continue
        pos = {s: k for k, s in enumerate(rows)}
        mat = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for c, s in enumerate(cols):
            for k in range(len(s)):
                mat[pos[s[:k] + s[k + 1:]], c] = (-1) ** k
        ranks[d] = numpy_rank(mat, p)
    return tuple(len(by_dim.get(k, [])) - ranks.get(k, 0) - ranks.get(k + 1, 0) for k in range(3))


def full_complex(vertices, values_of):
    rows, vals = [], []
    for d in range(len(vertices)):
        for s in combinations(vertices, d + 1):
            rows.append(list(s) + [-1] * (len(vertices) - 1 - d))
            vals.append(values_of(s))
    return FilteredComplex(np.array(rows), np.array(vals, dtype=float))


def test_is_prime():
    assert [k for k in range(20) if is_prime(k)] == [2, 3, 5, 7, 11, 13, 17, 19]


def test_single_vertex():
    fc = FilteredComplex(np.array([[0]]), np.array([0.0]))
    diag = compute_persistence(fc, 3)
    assert diag.points(0).tolist() == [[0.0, INF]]


def test_circle_at_zero():
    rows = [[0, -1], [1, -1], [2, -1], [0, 1], [1, 2], [0, 2]]
    fc = FilteredComplex(np.array(rows), np.zeros(6))
    diag = compute_persistence(fc, 2)
    assert diag.points(0).tolist() == [[0.0, INF]]
    assert diag.points(1).tolist() == [[0.0, INF]]


def test_rejects_bad_complexes():
    with pytest.raises(ValueError):
        FilteredComplex(np.array([[0, -1], [0, 1]]), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        FilteredComplex(np.array([[0, -1], [1, -1], [0, 1]]), np.array([0.0, 2.0, 1.0]))
    fc = FilteredComplex(np.array([[0]]), np.array([0.0]))
    with pytest.raises(ValueError):
        compute_persistence(fc, 4)


def test_pentagon_matches_reference(pentagon):
    nc = build_nerve(pentagon)
    text = nc.to_text()
    for p in (2, 3, 5):
        assert nc.persistence(p) == reference_diagram(text, p)


def test_random_loops_match_reference(rng):
    for d in (2, 3, 5):
        loop = random_loop(rng, 8, d)
        text = build_nerve(loop).to_text()
        fc = FilteredComplex.from_text(text)
        for p in (2, 3):
            assert compute_persistence(fc, p) == reference_diagram(text, p)


def test_betti_prefix_by_rank(rng):
    loop = random_loop(rng, 7, 3)
    nc = build_nerve(loop)
    text = nc.to_text()
    diag = nc.persistence(3)
    values = np.unique(nc.values)
    for a in values[:: max(1, len(values) // 25)]:
        assert diag.betti_at(a) == prefix_betti(text, a, 3)
    # the whole band retracts onto its core circle
    assert diag.betti_at(values[-1]) == (1, 1, 0)


def test_backends_agree(rng):
    for d in (2, 3):
        nc = build_nerve(random_loop(rng, 12, d))
        for p in (2, 3):
            a = compute_persistence(nc.complex, p, backend="numba")
            b = compute_persistence(nc.complex, p, backend="python")
            assert a == b


def test_text_roundtrip(rng):
    nc = build_nerve(random_loop(rng, 9, 3))
    fc = FilteredComplex.from_text(nc.to_text())
    assert np.array_equal(fc.values, nc.values)
    assert np.array_equal(fc.simplices, nc.simplices)


def test_keep_zero_pairs(pentagon):
    nc = build_nerve(pentagon)
    diag = compute_persistence(nc.complex, 3, keep_zero=True)
    assert diag.zero_pairs is not None and len(diag.zero_pairs) > 0
    assert np.all(diag.births < diag.deaths)


def test_bottleneck_examples():
    a = PersistenceDiagram(3, [1], [1.0], [3.0])
    empty = PersistenceDiagram(3, [], [], [])
    assert bottleneck(a, a, 1) == 0.0
    assert bottleneck(a, empty, 1) == 1.0
    b = PersistenceDiagram(3, [1, 1], [0.0, 1.0], [INF, 3.0])
    c = PersistenceDiagram(3, [1, 1], [0.5, 1.0], [INF, 3.0])
    assert bottleneck(b, c, 1) == 0.5
    assert bottleneck(b, a, 1) == INF


def test_bottleneck_against_bruteforce(rng):
    for _ in range(150):
        na, nb = rng.integers(0, 4, size=2)
        pa = np.sort(rng.uniform(0, 2, size=(na, 2)), axis=1)
        pb = np.sort(rng.uniform(0, 2, size=(nb, 2)), axis=1)
        da = PersistenceDiagram(2, [0] * na, pa[:, 0], pa[:, 1])
        db = PersistenceDiagram(2, [0] * nb, pb[:, 0], pb[:, 1])
        assert bottleneck(da, db, 0) == pytest.approx(bottleneck_bruteforce(pa, pb), abs=1e-15)


def test_square_map_examples(pentagon):
    d = PersistenceDiagram(3, [0, 1], [0.0, 2.0], [INF, 4.0])
    sq = square_map(d, "to_squared")
    assert sq.points(0).tolist() == [[0.0, INF]]
    assert sq.points(1).tolist() == [[2.0, 8.0]]
    back = square_map(sq, "to_unsquared")
    assert back.points(1).tolist() == [[2.0, 4.0]]
    with pytest.raises(ValueError):
        square_map(d, "sideways")


def test_square_map_matches_direct(pentagon):
    nc = build_nerve(pentagon)
    fc = nc.complex
    direct = compute_persistence(FilteredComplex(fc.simplices, np.sqrt(2.0 * fc.values)), 3)
    assert square_map(nc.persistence(3), "to_unsquared") == direct


def test_rank_mod_p(rng):
    for _ in range(30):
        m = rng.integers(-3, 4, size=rng.integers(1, 8, size=2))
        for p in (2, 3, 7):
            assert rank_mod_p(m, p) == numpy_rank(m, p)
    assert rank_mod_p(np.array([[2, 0], [0, 2]]), 2) == 0
    assert rank_mod_p(np.array([[2, 0], [0, 2]]), 3) == 2


def test_conley_index_table_patterns():
    # an isolated vertex
    fc = FilteredComplex(np.array([[0]]), np.array([1.0]))
    assert conley_index(MorseSet(1.0, [0], fc)).betti == (1, 0, 0)

    # tetrahedron whose link is two opposite edges: a 1-saddle
    link = {(0,), (1,), (2,), (3,), (0, 1), (2, 3)}
    fc = full_complex([0, 1, 2, 3], lambda s: 0.0 if s in link else 1.0)
    ms = MorseSet(1.0, np.flatnonzero(fc.values == 1.0), fc)
    assert conley_index(ms, 3).betti == (0, 1, 0)
    assert conley_index(ms, 3).saddle_index == 1

    # link a 4-cycle 0-1-3-2-0: a 2-saddle
    link = {(0,), (1,), (2,), (3,), (0, 1), (1, 3), (2, 3), (0, 2)}
    fc = full_complex([0, 1, 2, 3], lambda s: 0.0 if s in link else 1.0)
    ms = MorseSet(1.0, np.flatnonzero(fc.values == 1.0), fc)
    assert conley_index(ms, 2).betti == (0, 0, 1)
    assert relative_betti(fc, ms.simplices, 5) == (0, 0, 1)


def test_verify_maxmin_structure():
    d3 = PersistenceDiagram(3, [1, 1], [0.0, 1.5], [INF, 8.0])
    rep = verify_maxmin_structure(d3, 8.0, 2.0)
    assert rep.ok and rep.l_point == (1.5, 8.0)
    d2 = PersistenceDiagram(2, [1, 1], [0.0, 1.5], [8.0, INF])
    assert verify_maxmin_structure(d2, 8.0, 2.0).ok
    # the p = 2 pattern is wrong for an odd prime and vice versa
    swapped = PersistenceDiagram(3, d2.dims, d2.births, d2.deaths)
    assert not verify_maxmin_structure(swapped, 8.0, 2.0).ok
    assert not verify_maxmin_structure(PersistenceDiagram(2, d3.dims, d3.births, d3.deaths), 8.0, 2.0).ok
    # l above the min-max bound
    rep = verify_maxmin_structure(d3, 8.0, 1.0)
    assert not rep.ok and rep.messages
