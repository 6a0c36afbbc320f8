import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import space
from sylow_orbits.action import (
    RightMap, SituationError, SupportError, aux3_coefficient, combo_as_function, dot_right, lambda_expand,
    lambda_direct, left_dot, left_monomial, left_supported, monomial_right, restricted_column_op, situation,
    tilde_left,
)
from sylow_orbits.charspace import CharLabel
from sylow_orbits.field import CycNum
from sylow_orbits.group import tilde_x
from sylow_orbits.orbits import classify


def test_identity_acts_trivially():
    S = space("D", 3)
    one = np.eye(6, dtype=np.int64)
    for v in S.all_label_vectors()[::37]:
        A = CharLabel(S, v)
        r = monomial_right(A, one)
        assert r.exponent == 0 and r.label == A
        r = left_monomial(one, A)
        assert r.exponent == 0 and r.label == A


def test_e14_times_x23():
    S = space("B", 2)
    A = S.label({(1, 4): 1})
    r = monomial_right(A, S.G.root(2, 3, 1))
    # pi(A x^{-t}): row 1 of the result is row 4 of x^{-t}, giving -1/2 = 1 at (1,2)
    assert r.label == S.label({(1, 2): 1, (1, 3): 1, (1, 4): 1})
    assert r.exponent == 0


@pytest.mark.parametrize("alpha", [0, 1, 2])
def test_root_element_as_three_column_ops(alpha):
    S = space("B", 2)
    ctx = S.ctx
    A = S.label({(1, 4): 1, (1, 2): 2})
    x = S.G.root(2, 3, alpha)
    half_sq = ctx.mul(ctx.half, ctx.mul(alpha, alpha))
    f1, f2, f3 = tilde_x(ctx, 5, 2, 3, alpha), tilde_x(ctx, 5, 3, 4, ctx.neg(alpha)), tilde_x(ctx, 5, 2, 4, half_sq)
    assert np.array_equal(ctx.matmul(ctx.matmul(f1, f2), f3), x)
    B = dot_right(dot_right(dot_right(A, f1), f2), f3)
    assert B == dot_right(A, x) == monomial_right(A, x).label


def test_restricted_column_op_example():
    S = space("B", 2)
    A = S.label({(1, 4): 1})
    for a in range(3):
        B = restricted_column_op(A, 3, 4, a)
        assert B[(1, 3)] == (-a) % 3 and B[(1, 4)] == 1


def test_restricted_column_op_matches_dot_right_exhaustive():
    S = space("B", 2)
    labels = [CharLabel(S, v) for v in S.all_label_vectors()]
    for i, j in itertools.combinations(range(1, 6), 2):
        for a in (1, 2):
            x = tilde_x(S.ctx, 5, i, j, a)
            R = RightMap(S, x)
            got = R.labels(S.all_label_vectors())
            for A, v in zip(labels[::5], got[::5]):
                assert restricted_column_op(A, i, j, a) == CharLabel(S, v)


@pytest.mark.parametrize("t,n", [("B", 2), ("C", 2)])
def test_right_action_law_exhaustive(t, n):
    S = space(t, n)
    G, ctx = S.G, S.ctx
    V = S.all_label_vectors()
    E = G.elements
    maps = [RightMap(S, g) for g in E]
    for g in range(G.order):
        vg, tg = maps[g].apply(V)
        for h in range(0, G.order, 4):
            vgh, tgh = maps[h].apply(vg)
            prod = RightMap(S, ctx.matmul(E[g], E[h]))
            w, t = prod.apply(V)
            assert np.array_equal(vgh, w)
            assert np.array_equal((tg + tgh) % S.p, t)


def test_matrix_and_linear_right_maps_agree():
    S = space("D", 3)
    rng = np.random.default_rng(3)
    for g in S.G.random_elements(rng, 20):
        R = RightMap(S, g)
        for v in S.all_label_vectors()[rng.integers(0, 729, 10)]:
            A = CharLabel(S, v)
            assert dot_right(A, g) == CharLabel(S, R.labels(v))


def test_tilde_left_formula():
    S = space("B", 2)
    for v in S.all_label_vectors()[::7]:
        A = CharLabel(S, v)
        for (i, j) in S.tp.pup:
            for a in (1, 2):
                x = tilde_x(S.ctx, 5, i, j, a)
                if left_supported(x, A):
                    r = left_monomial(x, A)
                    assert r == tilde_left(A, i, j, a)


def test_left_monomial_requires_support():
    S = space("B", 2)
    A = S.label({(1, 4): 1})
    x = S.G.root(1, 2, 1)
    assert not left_supported(x, A)  # row 2 picks up an entry at (2,4)
    with pytest.raises(SupportError):
        left_monomial(x, A)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_left_and_right_commute(seed):
    S = space("B", 2)
    rng = np.random.default_rng(seed)
    u, g = S.G.random_elements(rng, 2)
    A = CharLabel(S, rng.integers(0, 3, S.m))
    R = monomial_right(A, g)
    if not (left_supported(u, A) and left_supported(u, R.label)):
        return
    L = left_monomial(u, A)
    one = monomial_right(L.label, g)
    two = left_monomial(u, R.label)
    assert one.label == two.label
    assert (L.exponent + one.exponent) % 3 == (R.exponent + two.exponent) % 3


def test_lambda_expand_of_identity():
    S = space("B", 2)
    A = S.label({(1, 4): 1, (1, 2): 2})
    combo = lambda_expand(np.eye(5, dtype=np.int64), A)
    assert combo == {A: CycNum.integer(3, 1)}


def test_lambda_expand_monomial_when_supported():
    S = space("B", 2)
    rng = np.random.default_rng(7)
    hits = 0
    for _ in range(400):
        u = S.G.random_elements(rng, 1)[0]
        A = CharLabel(S, rng.integers(0, 3, S.m))
        if not left_supported(u, A) or hits > 30:
            continue
        hits += 1
        combo = lambda_expand(u, A)
        L = left_monomial(u, A)
        assert combo == {L.label: L.scalar()}
    assert hits > 5


def test_lambda_expand_reproduces_the_function():
    S = space("B", 2)
    A = S.label({(1, 4): 1})
    x = S.G.root(1, 2, 1)
    combo = lambda_expand(x, A)
    assert set(combo) == {A, S.label({(1, 4): 1, (2, 3): 1}), S.label({(1, 4): 1, (2, 3): 2})}
    assert sum(combo.values(), CycNum.zero(3)) == CycNum.integer(3, 1)
    vals = combo_as_function(S, combo)
    direct = lambda_direct(x, A)
    assert all(v == CycNum.zeta(3, int(t)) for v, t in zip(vals, direct))


def test_situation_support_and_pivot():
    S = space("B", 2)
    A = S.label({(1, 4): 1})
    for lam in (1, 2):
        sit = situation(A, 1, 3, lam)
        combo = lambda_expand(sit.x, A)
        tgt = (A[sit.pivot] + sit.sigma * lam) % 3
        for C in combo:
            assert all(C[p] == A[p] for p in sit.J)
            assert C[sit.pivot] == tgt
        for v in S.all_label_vectors():
            C = CharLabel(S, v)
            assert aux3_coefficient(sit, C) == combo.get(C, CycNum.zero(3))


def test_aux3_degenerate_and_rejections():
    S = space("B", 2)
    A = S.label({(1, 4): 1})
    sit = situation(A, 1, 3, 0)
    assert aux3_coefficient(sit, A) == CycNum.integer(3, 1)
    # C differing from A off the region vanishes
    assert aux3_coefficient(situation(A, 1, 3, 1), S.label({(1, 4): 2})) == CycNum.zero(3)
    with pytest.raises(SituationError):
        situation(S.label({(2, 3): 1}), 1, 3, 1)
    with pytest.raises(SituationError):
        situation(A, 1, 2, 1)


def test_aux3_accepts_root_element_form():
    S = space("D", 3)
    A = S.label({(1, 5): 1, (2, 4): 1})
    cl = classify(A)
    assert cl.staircase and cl.is_core
    sit = situation(A, 1, 3, 2)
    C = next(iter(lambda_expand(sit.x, A)))
    assert aux3_coefficient(sit.x, A, C) == aux3_coefficient(sit, C)


def test_left_dot_is_projection():
    S = space("C", 2)
    rng = np.random.default_rng(11)
    for u in S.G.random_elements(rng, 10):
        A = CharLabel(S, rng.integers(0, 3, S.m))
        M = S.ctx.matmul(S.G.inv(u).T, A.mat)
        assert left_dot(u, A) == CharLabel.from_matrix(S, M)
