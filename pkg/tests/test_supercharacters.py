import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import space
from sylow_orbits.field import CycNum
from sylow_orbits.geometry import staircase_main_sets
from sylow_orbits.group import tilde_x
from sylow_orbits.homtest import cached_gram
from sylow_orbits.orbits import classify, orbit_partition
from sylow_orbits.supercharacters import (
    NotAVerge, family_inner, hat_verge, is_verge_matrix, left_region_size, staircase_verges, superchar_report,
    superclass, superclass_closure, superclass_map, two_sided_verge, verge_family,
)

# number of main separated verges (families) at q = 3
FAMILIES = {("B", 2): 13, ("C", 2): 17, ("D", 3): 29}


def sep_verges(S):
    return [V for V in staircase_verges(S) if classify(V).main_separated]


def test_trivial_family():
    S = space("B", 2)
    F = verge_family(S.zero())
    assert len(F.orbits) == 1 and F.size == 1
    assert (F.counts()[:, 0] == 1).all()


def test_e14_family():
    S = space("B", 2)
    F = verge_family(S.label({(1, 4): 1}))
    assert sorted(C.to_string() for C in F.cores) == ["1,2=1;1,4=1", "1,2=2;1,4=1", "1,4=1"]
    assert [O.size for O in F.orbits] == [3, 3, 3]
    assert F.size == 9 == 3 ** left_region_size(F.verge)
    assert F.counts()[0].sum() == F.size


def test_not_a_verge():
    S = space("B", 2)
    with pytest.raises(NotAVerge):
        verge_family(S.label({(1, 4): 1, (1, 2): 1}))
    with pytest.raises(NotAVerge):
        hat_verge(S.label({(1, 4): 1, (1, 3): 1}))


@pytest.mark.parametrize("t,n", list(FAMILIES))
def test_families_tile_staircase_cores(t, n):
    S = space(t, n)
    P = orbit_partition(S)
    owner = {}
    for V in staircase_verges(S):
        F = verge_family(V)
        assert F.size == S.q ** left_region_size(V)
        for O in F.orbits:
            assert O.index not in owner
            owner[O.index] = V
        # family character is the sum of its orbit characters
        Gm = cached_gram(S)
        ix = [O.index for O in F.orbits]
        assert family_inner(S, F, F) == int(Gm[np.ix_(ix, ix)].sum())
        # iso classes partition the family
        assert sorted(k for c in F.classes for k in c) == sorted(ix)
    cores = [O.index for O in P.records if O.classification.staircase and O.classification.is_core]
    assert sorted(owner) == sorted(cores)
    assert len(sep_verges(S)) == FAMILIES[(t, n)]


def test_hat_examples():
    S = space("D", 3)
    for (i, j) in S.tp.pup:
        for a in (1, 2):
            H = hat_verge(S.label({(i, j): a})).matrix
            want = np.zeros((6, 6), dtype=np.int64)
            want[i - 1, j - 1] = a
            want[S.tp.bar(j) - 1, S.tp.bar(i) - 1] = (-a) % 3
            assert np.array_equal(H, want)
    C = space("C", 2)
    H = hat_verge(C.label({(1, 4): 2})).matrix
    assert H[0, 3] == 2 and np.count_nonzero(H) == 1
    B = space("B", 2)
    res = hat_verge(B.label({(1, 4): 1, (2, 3): 1}))
    assert not res.is_verge_matrix
    assert not classify(B.label({(1, 4): 1, (2, 3): 1})).main_separated


def test_quadratic_term_breaks_the_verdict():
    # a center-column main condition in type B: e13 is main separated, but
    # adding -a^2/2 at (1, 5) puts a second entry in row 1
    S = space("B", 2)
    A = S.label({(1, 3): 1})
    assert classify(A).main_separated
    assert hat_verge(A).is_verge_matrix
    assert not hat_verge(A, quadratic=True).is_verge_matrix


@pytest.mark.parametrize("t,n", [(t, n) for t in "BCD" for n in (1, 2, 3) if (t, n) != ("D", 1)])
def test_hat_verdict_matches_main_separation(t, n):
    S = space(t, n)
    rng = np.random.default_rng(n)
    for M in staircase_main_sets(S.tp):
        A = S.label({p: int(rng.integers(1, 3)) for p in M})
        assert hat_verge(A).is_verge_matrix == classify(A).main_separated, sorted(M)


def test_is_verge_matrix():
    assert is_verge_matrix(np.zeros((3, 3)))
    assert is_verge_matrix(np.array([[0, 1, 0], [0, 0, 2], [0, 0, 0]]))
    assert not is_verge_matrix(np.array([[0, 1, 1], [0, 0, 0], [0, 0, 0]]))
    assert not is_verge_matrix(np.array([[0, 1, 0], [0, 0, 0], [0, 1, 0]]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_two_sided_verge_is_invariant(seed):
    S = space("B", 2)
    ctx = S.ctx
    N = 5
    rng = np.random.default_rng(seed)
    M = np.triu(rng.integers(0, 3, size=(N, N)), 1)
    key = two_sided_verge(ctx, M)
    V = np.zeros((N, N), dtype=np.int64)
    for (i, j), v in key:
        V[i - 1, j - 1] = v
    assert is_verge_matrix(V)
    for _ in range(4):
        i, j = sorted(rng.choice(np.arange(1, N + 1), 2, replace=False))
        a = int(rng.integers(1, 3))
        g = tilde_x(ctx, N, int(i), int(j), a)
        M = ctx.matmul(g, M) if rng.integers(2) else ctx.matmul(M, g)
        assert two_sided_verge(ctx, M) == key


def test_superclass_of_zero():
    S = space("D", 3)
    assert superclass(S.zero()).tolist() == [0]
    with pytest.raises(ValueError):
        superclass(space("B", 2).label({(1, 4): 1, (2, 3): 1}))


@pytest.mark.parametrize("t,n", [("B", 2), ("C", 2), ("D", 3)])
def test_superclasses_partition_u(t, n):
    S = space(t, n)
    owner = np.zeros(S.G.order, dtype=np.int64)
    for V in sep_verges(S):
        owner[superclass(V)] += 1
    assert (owner == 1).all()
    assert len(set(superclass_map(S))) == FAMILIES[(t, n)]


def test_superclass_matches_naive_closure_b2():
    S = space("B", 2)
    for V in sep_verges(S):
        assert np.array_equal(superclass(V), superclass_closure(V))


@pytest.mark.parametrize("t,n", [("B", 2), ("D", 3)])
def test_report_asserted_types(t, n):
    R = superchar_report(space(t, n))
    assert R.ok and not R.failures
    assert R.data["status"] == "asserted"
    assert R.data["covered"] == R.data["order"]
    orth = np.array(R.data["orthogonality"])
    assert np.array_equal(orth, np.diag(np.diag(orth)))
    assert all(all(row) for row in R.data["constant"])


def test_report_type_c_is_conjectural():
    R = superchar_report(space("C", 2))
    assert R.data["status"] == "conjectural" and R.ok
    kinds = {f["check"] for f in R.failures}
    assert kinds <= {"orthogonal", "constant"}


def test_family_values_on_identity_class():
    S = space("B", 2)
    R = superchar_report(S)
    for fam in R.data["families"]:
        one = [v for v, d in zip(fam["values"], R.data["families"]) if d["verge"] == ""]
        # the identity class belongs to the zero verge; the value there is the degree
        assert one == [CycNum.integer(3, fam["size"]).to_json()]
