import pytest

from conftest import space
from sylow_orbits.action import RightMap, dot_right
from sylow_orbits.charspace import CharLabel
from sylow_orbits.orbits import (
    NotApplicable, classify, enumerate_orbit, is_power_of, m_max, orbit_partition, separation_step, straighten,
    zero_row_check,
)
from sylow_orbits.geometry import prec_key

# orbit counts at q = 3 (cross-checked below by Burnside and by a naive closure)
ORBIT_COUNTS = {("B", 2): 33, ("C", 2): 21, ("D", 3): 153, ("B", 3): 1011, ("C", 3): 351}
CONFIGS = [("B", 2), ("C", 2), ("D", 3)]


def test_classify_e14():
    S = space("B", 2)
    for a in (1, 2):
        c = classify(S.label({(1, 4): a}))
        assert c.mc == c.rmc == {(1, 4)}
        assert c.minc == {(1, 2)} and c.suppl == frozenset()
        assert c.verge == S.label({(1, 4): a}) and c.is_verge
        assert c.places == {(1, 3)}


def test_classify_e14_e23():
    S = space("B", 2)
    c = classify(S.label({(1, 4): 1, (2, 3): 2}))
    assert c.mc == {(1, 4), (2, 3)}
    assert c.staircase and not c.main_separated


def test_classify_zero():
    c = classify(space("D", 3).zero())
    assert not (c.mc or c.minc or c.suppl or c.places)
    assert c.staircase and c.main_separated and c.is_core and c.is_verge


def test_suppl_parse_flag():
    S = space("D", 3)
    A = S.label({(1, 5): 1, (2, 4): 1})
    assert classify(A, "disjunctive").mc == classify(A).mc
    with pytest.raises(ValueError):
        classify(A, "neither")


def test_enumerate_orbit_examples():
    S = space("B", 2)
    z = enumerate_orbit(S.zero())
    assert z.size == 1
    O = enumerate_orbit(S.label({(1, 4): 1}))
    assert O.size == 3
    # members e14 + a e13 - a^2/2 e12
    want = {S.label({(1, 4): 1, (1, 3): a, (1, 2): (-a * a * 2) % 3}) for a in range(3)}
    assert set(O.member_labels()) == want
    assert enumerate_orbit(S.label({(2, 3): 1})).size == 1


@pytest.mark.parametrize("t,n", list(ORBIT_COUNTS))
def test_orbit_counts_frozen(t, n):
    P = orbit_partition(space(t, n))
    assert P.n_orbits == ORBIT_COUNTS[(t, n)]
    assert P.sizes.sum() == space(t, n).G.order


@pytest.mark.parametrize("t,n", CONFIGS)
def test_orbit_count_burnside(t, n):
    S = space(t, n)
    V = S.all_label_vectors()
    fixed = 0
    for g in S.G.elements:
        fixed += int((RightMap(S, g).labels(V) == V).all(axis=1).sum())
    assert fixed % S.G.order == 0
    assert fixed // S.G.order == ORBIT_COUNTS[(t, n)]


@pytest.mark.parametrize("t,n", [("B", 2), ("C", 2)])
def test_partition_matches_naive_closure(t, n):
    S = space(t, n)
    P = orbit_partition(S)
    gens = [S.G.root(i, j, 1) for (i, j) in S.tp.pup]
    seen = {}
    for v in S.all_label_vectors():
        A = CharLabel(S, v)
        if A in seen:
            continue
        orbit, todo = {A}, [A]
        while todo:
            B = todo.pop()
            for g in gens:
                C = dot_right(B, g)
                if C not in orbit:
                    orbit.add(C)
                    todo.append(C)
        ids = {int(P.orbit_of[B.key]) for B in orbit}
        assert len(ids) == 1 and len(P.members(ids.pop())) == len(orbit)
        for B in orbit:
            seen[B] = True


@pytest.mark.parametrize("t,n", CONFIGS)
def test_orbit_invariants(t, n):
    S = space(t, n)
    P = orbit_partition(S)
    for O in P.records:
        assert is_power_of(O.size, S.q)
        labels = O.member_labels()
        mcs = {classify(B).mc for B in labels}
        assert len(mcs) == 1
        if O.classification.staircase:
            assert O.size == S.q ** len(O.classification.places)
            assert len({classify(B).verge for B in labels}) == 1
            cores = [B for B in labels if classify(B).is_core]
            assert len(cores) == 1 and cores[0] == O.base
        if O.classification.main_separated:
            assert zero_row_check(O)
    assert P.records[int(P.orbit_of[0])].size == 1


def test_zero_row_needs_main_separation():
    S = space("D", 3)
    O = orbit_partition(S).orbit_of_label(S.label({(1, 5): 1, (2, 4): 1}))
    assert not O.classification.main_separated
    assert not zero_row_check(O)
    assert zero_row_check(orbit_partition(S).orbit_of_label(S.zero()))


def test_m_max_examples():
    S = space("B", 2)
    assert m_max(S.label({(1, 4): 1})) is None
    assert m_max(S.label({(1, 4): 1, (2, 3): 1})) == (2, 3)


def test_separation_step_example():
    S = space("B", 2)
    A = S.label({(1, 4): 1, (2, 3): 1})
    x, combo, core = separation_step(A)
    assert combo
    for C in combo:
        M = m_max(C)
        assert M is None or prec_key(M) < prec_key((2, 3))
    with pytest.raises(NotApplicable):
        separation_step(S.label({(1, 4): 1}))


@pytest.mark.parametrize("t,n", [("B", 2), ("D", 3)])
def test_separation_reaches_fixpoint(t, n):
    S = space(t, n)
    P = orbit_partition(S)
    for O in P.records:
        cl = O.classification
        if cl.main_separated or not cl.staircase:
            continue
        frontier = {O.base}
        for _ in range(S.m + 1):
            nxt = set()
            for A in frontier:
                if classify(A).main_separated:
                    continue
                _, combo, _ = separation_step(A)
                nxt |= {C for C in combo if not classify(C).main_separated}
            frontier = nxt
            if not frontier:
                break
        assert not frontier


def test_straighten_makes_staircase():
    S = space("D", 3)
    A = S.label({(1, 4): 1, (2, 4): 2})
    assert not classify(A).staircase
    u, t, C = straighten(A)
    assert classify(C).staircase
    assert S.G.contains(u)


def test_to_json_shape():
    S = space("B", 2)
    O = enumerate_orbit(S.label({(1, 4): 1}))
    d = O.to_json(members=True)
    assert d["size"] == 3 and d["mc"] == [[1, 4]] and len(d["members"]) == 3
    assert d["flags"] == {"staircase": True, "main_separated": True, "core": True, "verge": True}


def test_zero_rows_b3():
    S = space("B", 3)
    P = orbit_partition(S)
    checked = 0
    for O in P.records:
        cl = O.classification
        if not cl.main_separated:
            continue
        live = any(c == S.tp.bar(i) and k < i for i in range(1, S.tp.ntil) for (k, c) in cl.mc)
        checked += live
        assert zero_row_check(O)
    assert checked > 0
