import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import space
from sylow_orbits.action import monomial_right
from sylow_orbits.group import row_group
from sylow_orbits.orbits import classify, orbit_partition
from sylow_orbits.stabilizer import (
    CoreRequired, NotInStabilizer, brute_stabilizer, fixes, nullspace, psi, psi_basis_formula, psi_exponents,
    psi_row_formula, row_stab, row_stab_elements, stab_elements, stab_indices, stab_intersection,
    stab_size_expected, submatrix_ai, x_of_alpha,
)

CORE_COUNTS = {("B", 2): 29, ("C", 2): 17, ("D", 3): 113}


def cores(S):
    out = []
    for O in orbit_partition(S).records:
        c = O.classification
        if c.staircase and c.is_core:
            out.append(O.base)
    return out


def test_submatrix_examples():
    S = space("B", 2)
    assert submatrix_ai(S.label({(1, 4): 1}), 1).shape[0] == 0
    assert submatrix_ai(S.label({(1, 4): 1}), 2).tolist() == [[0]]
    assert submatrix_ai(S.label({(1, 3): 1}), 2).tolist() == [[1]]


def test_row_stab_examples():
    S = space("B", 2)
    assert row_stab(S.label({(1, 4): 1}), 2).kind == "trivial"
    rs = row_stab(S.label({(2, 3): 1}), 1)
    assert rs.kind == "solution" and rs.dim == 3
    assert len(row_stab_elements(S.label({(2, 3): 1}), rs)) == row_group(S.G, 1).order
    C = space("C", 2)
    rs = row_stab(C.label({(1, 4): 1}), 1)
    assert rs.kind == "antidiag"
    assert len(row_stab_elements(C.label({(1, 4): 1}), rs)) == 3


def test_stab_examples():
    S = space("B", 2)
    assert len(stab_elements(S.zero())) == S.G.order
    A = S.label({(1, 4): 1})
    W = stab_elements(A)
    assert len(W) == 27
    assert classify(A).J == {(1, 2), (1, 3), (1, 4)}
    with pytest.raises(CoreRequired):
        stab_elements(S.label({(1, 4): 1, (1, 3): 1}))


@pytest.mark.parametrize("t,n", list(CORE_COUNTS))
def test_row_product_equals_brute_force(t, n):
    S = space(t, n)
    cs = cores(S)
    assert len(cs) == CORE_COUNTS[(t, n)]
    for A in cs:
        rp = np.sort(S.G.index(stab_elements(A)))
        assert np.array_equal(rp, brute_stabilizer(A))
        assert len(rp) == stab_size_expected(A)


@pytest.mark.parametrize("t,n", list(CORE_COUNTS))
def test_basis_vectors_and_dimension(t, n):
    S = space(t, n)
    tp = S.tp
    for A in cores(S):
        mc = classify(A).mc
        for i in range(1, tp.n + 1):
            rs = row_stab(A, i)
            if rs.kind != "solution":
                continue
            assert not rs.generic
            assert rs.dim == tp.itil(i) - i - len(rs.mains)
            for s, alpha in rs.basis.items():
                x = x_of_alpha(S, i, rs.cols, alpha)
                assert fixes(A, x).all()
                assert psi(A, x[0]) == psi_basis_formula(A, rs, s)
        assert mc == classify(A).mc


@pytest.mark.parametrize("t,n", list(CORE_COUNTS))
def test_psi_is_linear_character(t, n):
    S = space(t, n)
    rng = np.random.default_rng(5)
    for A in cores(S)[::3]:
        W = stab_elements(A)
        e = psi_exponents(A, W)
        a, b = rng.integers(0, len(W), size=(2, 20))
        prod = S.ctx.matmul(W[a], W[b])
        assert np.array_equal(psi_exponents(A, prod), (e[a] + e[b]) % S.p)
        # and it is the scalar of the monomial action
        for k in a[:5]:
            r = monomial_right(A, W[k])
            assert r.label == A and r.exponent == e[k]


def test_psi_identity_and_rejection():
    S = space("B", 2)
    A = S.label({(1, 4): 1})
    assert psi(A, np.eye(5, dtype=np.int64)) == 0
    with pytest.raises(NotInStabilizer):
        psi(A, S.G.root(2, 3, 1))


def test_psi_row_formula():
    S = space("D", 3)
    for A in cores(S)[::7]:
        for i in range(1, S.tp.n + 1):
            rs = row_stab(A, i)
            if rs.kind != "solution":
                continue
            for x, alpha in zip(row_stab_elements(A, rs), _alphas(S, A, rs)):
                assert psi(A, x) == psi_row_formula(A, i, rs.cols, alpha)


def _alphas(S, A, rs):
    from sylow_orbits.stabilizer import _lam_grid
    keys = sorted(rs.basis)
    if not keys:
        return [np.zeros(len(rs.cols), dtype=np.int64)]
    B = np.array([rs.basis[s] for s in keys])
    return [S.ctx.sum(S.ctx.mul(lam[:, None], B), axis=0) for lam in _lam_grid(S.q, len(keys))]


def test_stab_intersection():
    S = space("B", 2)
    cs = cores(S)
    for A in cs[:5]:
        assert np.array_equal(stab_intersection(A, A), stab_indices(A))
    rng = np.random.default_rng(2)
    for a, b in rng.integers(0, len(cs), size=(25, 2)):
        A, B = cs[a], cs[b]
        want = np.intersect1d(brute_stabilizer(A), brute_stabilizer(B))
        assert np.array_equal(stab_intersection(A, B), want)


def test_agreeing_above_row_gives_same_row_stabilizers():
    S = space("D", 3)
    cs = cores(S)
    for A in cs:
        for B in cs:
            for i in range(1, S.tp.n + 1):
                if all(A[p] == B[p] for p in S.tp.pup if p[0] < i):
                    ra, rb = row_stab(A, i), row_stab(B, i)
                    assert ra.kind == rb.kind
                    if ra.kind == "solution":
                        assert sorted(ra.basis) == sorted(rb.basis)
                        for s in ra.basis:
                            assert np.array_equal(ra.basis[s], rb.basis[s])


def test_non_core_uses_generic_elimination():
    # a staircase non-core whose A_3 has rank 1 with no main condition inside it
    S = space("B", 3)
    A = S.label({(1, 4): 1, (1, 6): 1})
    cl = classify(A)
    assert cl.staircase and not cl.is_core
    rs = row_stab(A, 3)
    assert rs.generic and rs.dim == 0 and not rs.mains
    with pytest.raises(CoreRequired):
        stab_elements(A)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_nullspace_property(r, c, seed):
    ctx = space("B", 2).ctx
    M = np.random.default_rng(seed).integers(0, 3, size=(r, c))
    N = nullspace(ctx, M)
    for v in N:
        assert (ctx.sum(ctx.mul(M, v[None]), axis=-1) == 0).all()
    # rank-nullity: count the full solution set directly
    grid = np.array(np.meshgrid(*[np.arange(3)] * c, indexing="ij")).reshape(c, -1).T
    sols = (ctx.sum(ctx.mul(M[None], grid[:, None]), axis=-1) == 0).all(axis=1).sum()
    assert sols == 3 ** len(N)
