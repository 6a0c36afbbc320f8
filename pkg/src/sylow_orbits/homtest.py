"""
Orbit characters, exact inner products and the isomorphism tests between
orbit modules: Psi-agreement, Mackey double cosets and the row-by-row
construction of g with g.[B] = [A].

Orbit characters are stored as exponent-count tables: X[u, o, t] is the number
of members [B] of orbit o fixed by u with [B]u = zeta^t [B].  Everything
downstream (Gram matrices, family characters) is integer arithmetic on X.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .action import left_dot, left_supported
from .charspace import CharLabel, Space, pair_exponents
from .field import CycNum
from .geometry import i_sets
from .group import check_budget, identity, mat_inv_unitri
from .orbits import OrbitRecord, classify, orbit_partition
from .stabilizer import (brute_stabilizer, psi_exponents, row_stab, row_stab_elements,
                         stab_elements)


class NonIntegralInnerProduct(ArithmeticError):
    pass


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# character tables

def _right_maps(space: Space, mats):
    """Batched right-action matrices T[b] and negated pi(g^{-1}) for a batch of g."""
    G = space.G
    ginv = mat_inv_unitri(space.ctx, mats)
    rows, cols = G._rows, G._cols
    same = rows[:, None] == rows[None, :]
    T = np.where(same[None], ginv[:, cols[None, :], cols[:, None]], 0)
    w = space.ctx.neg(G.pi(ginv))
    return T, w


def count_table(space: Space, u_index, orbit_of=None, n_orbits=None) -> np.ndarray:
    """X[u, o, t] for the group elements with the given enumeration indices."""
    if orbit_of is None:
        P = orbit_partition(space)
        orbit_of, n_orbits = P.orbit_of, P.n_orbits
    G = space.G
    ctx, p = space.ctx, space.p
    V = space.all_label_vectors()
    u_index = np.asarray(u_index, dtype=np.int64)
    X = np.zeros((len(u_index), n_orbits, p), dtype=np.int64)
    step = max(1, (1 << 22) // max(1, len(V) * max(1, space.m)))
    for s in range(0, len(u_index), step):
        idx = u_index[s:s + step]
        T, w = _right_maps(space, G.elements[idx])
        img = ctx.matmul(V[None], T)
        fixed = (img == V[None]).all(axis=-1)
        E = pair_exponents(space, V, w).T  # (b, |V|)
        b, lab = np.nonzero(fixed)
        flat = (b * n_orbits + orbit_of[lab]) * p + E[b, lab]
        X[s:s + len(idx)] += np.bincount(flat, minlength=len(idx) * n_orbits * p).reshape(len(idx), n_orbits, p)
    return X


def _gram_chunk(args):
    space, u_index = args
    X = count_table(space, u_index)
    return correlation(X, space.p)


def correlation(X: np.ndarray, p: int) -> np.ndarray:
    """C[o1, o2, d] = sum_u sum_t X[u,o1,t] X[u,o2,t-d]."""
    n = X.shape[1]
    C = np.zeros((n, n, p), dtype=np.int64)
    for t in range(p):
        for d in range(p):
            C[:, :, d] += X[:, :, t].T @ X[:, :, (t - d) % p]
    return C


def correlation_to_ints(C: np.ndarray, order: int) -> np.ndarray:
    """Exact integer inner products from correlation counts, or raise."""
    p = C.shape[-1]
    if p > 1 and not (C[..., 1:] == C[..., 1:2]).all():
        raise NonIntegralInnerProduct("inner product is not rational")
    num = C[..., 0] - (C[..., 1] if p > 1 else 0)
    if (num % order).any():
        raise NonIntegralInnerProduct("inner product is not an integer")
    return num // order


def chunks(n: int, parts: int):
    """Deterministic split of range(n) into contiguous blocks."""
    parts = max(1, min(parts, n))
    b = np.linspace(0, n, parts + 1).astype(np.int64)
    return [np.arange(b[k], b[k + 1]) for k in range(parts)]


def gram_matrix(space: Space, workers: int = 1, tiles: int = 8) -> np.ndarray:
    """Inner products between all orbit characters (indexed by canonical orbit number)."""
    G = space.G
    check_budget(G.order * G.order, "Gram matrix")
    jobs = [(space, c) for c in chunks(G.order, tiles) if len(c)]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_gram_chunk, jobs))
    else:
        parts = [_gram_chunk(j) for j in jobs]
    C = sum(parts)
    return correlation_to_ints(C, G.order)


def cached_gram(space: Space, workers: int = 1) -> np.ndarray:
    Gm = space.__dict__.get("_gram")
    if Gm is None:
        Gm = gram_matrix(space, workers)
        space._gram = Gm
    return Gm


def cached_table(space: Space) -> np.ndarray:
    X = space.__dict__.get("_table")
    if X is None:
        X = count_table(space, np.arange(space.G.order))
        space._table = X
    return X


@dataclass
class OrbitCharacter:
    orbit: OrbitRecord
    counts: np.ndarray  # (|U|, p)

    def __call__(self, u_index: int) -> CycNum:
        return CycNum.from_exponent_counts(self.orbit.base.space.p, self.counts[u_index])

    def degree(self) -> int:
        return int(self.counts[0].sum())


def orbit_character(O: OrbitRecord) -> OrbitCharacter:
    S = O.base.space
    if O.index >= 0:
        return OrbitCharacter(O, cached_table(S)[:, O.index, :])
    E = S.G.elements
    return OrbitCharacter(O, np.concatenate(
        [_member_counts(S, E[s:s + 512], O.members) for s in range(0, S.G.order, 512)]))


def _member_counts(space, mats, keys) -> np.ndarray:
    """(len(mats), p) exponent counts over the fixed members among the given label keys."""
    V = space.G.key_to_vec(keys)
    T, w = _right_maps(space, mats)
    img = space.ctx.matmul(V[None], T)
    fixed = (img == V[None]).all(axis=-1)
    E = pair_exponents(space, V, w).T
    return np.stack([(fixed & (E == t)).sum(axis=1) for t in range(space.p)], axis=-1)


def orbit_character_value(O: OrbitRecord, u) -> CycNum:
    """Sum of zeta^t over the members [B] with [B]u = zeta^t [B]."""
    S = O.base.space
    m = u.m if hasattr(u, "m") else np.asarray(u, dtype=np.int64)
    return CycNum.from_exponent_counts(S.p, _member_counts(S, m[None], O.members)[0])


def inner_product(O1: OrbitRecord, O2: OrbitRecord) -> int:
    S = O1.base.space
    if O1.index >= 0 and O2.index >= 0 and S.__dict__.get("_gram") is not None:
        return int(S._gram[O1.index, O2.index])
    return character_inner(S, orbit_character(O1).counts, orbit_character(O2).counts)


def character_inner(space: Space, counts1, counts2) -> int:
    """Inner product of two class functions given as (|U|, p) exponent counts."""
    p = space.p
    C = np.zeros(p, dtype=np.int64)
    for t in range(p):
        for d in range(p):
            C[d] += int(np.asarray(counts1)[:, t] @ np.asarray(counts2)[:, (t - d) % p])
    return int(correlation_to_ints(C[None, None], space.G.order)[0, 0])


# ---------------------------------------------------------------------------
# stabilizers and Psi

def stab_of(A: CharLabel) -> np.ndarray:
    """Sorted enumeration indices of Stab_U[A], cached per label."""
    S = A.space
    cache = S.__dict__.setdefault("_stabcache", {})
    k = A.key
    if k not in cache:
        cl = classify(A)
        if cl.staircase and cl.is_core:
            cache[k] = np.unique(S.G.index(stab_elements(A, verify=False)))
        else:
            cache[k] = brute_stabilizer(A)
    return cache[k]


def _psi_all(A: CharLabel) -> np.ndarray:
    """Exponents of theta kappa(-A, pi(u^{-1})) for every u in U (enumeration order)."""
    S = A.space
    cache = S.__dict__.setdefault("_psicache", {})
    k = A.key
    if k not in cache:
        inv = S.__dict__.get("_pi_inv")
        if inv is None:
            inv = S._pi_inv = S.G.pi(S.G.elements[S.G.inverse_index])
        cache[k] = pair_exponents(S, S.ctx.neg(A.v)[None], inv)[0]
    return cache[k]


def psi_agree(A: CharLabel, B: CharLabel) -> bool:
    """Psi_A = Psi_B on Stab_U[A] ∩ Stab_U[B]."""
    common = np.intersect1d(stab_of(A), stab_of(B))
    return bool((_psi_all(A)[common] == _psi_all(B)[common]).all())


def hom_criterion(A: CharLabel, B: CharLabel) -> bool:
    """Some [D] in the orbit of [B] has Psi_A = Psi_D on the common stabilizer."""
    S = A.space
    P = orbit_partition(S)
    members = P.members(int(P.orbit_of[B.key]))
    return any(psi_agree(A, CharLabel(S, v)) for v in S.G.key_to_vec(members))


# ---------------------------------------------------------------------------
# Mackey

def double_coset_reps(A: CharLabel, B: CharLabel) -> list:
    """Representatives [B].d of the Stab[B]-Stab[A] double cosets, as labels in O_B.

    Right cosets Stab[B] d correspond to [B].d, so double cosets are the orbits
    of Stab[A] on O_B under the dot action.
    """
    S = A.space
    G = S.G
    P = orbit_partition(S)
    members = P.members(int(P.orbit_of[B.key]))
    n = len(members)
    Sa = stab_of(A)
    check_budget(n * len(Sa), "double cosets")
    V = G.key_to_vec(members)
    lookup = np.full(G.order, -1, dtype=np.int64)
    lookup[members] = np.arange(n)
    T, _ = _right_maps(S, G.elements[Sa])
    img = S.ctx.matmul(V[None], T)
    rows = np.tile(np.arange(n), len(Sa))
    cols = lookup[G.vec_key(img)].reshape(-1)
    if (cols < 0).any():
        raise AssertionError("stabilizer element moved a label out of its orbit")
    g = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    nc, comp = connected_components(g, directed=True, connection="weak")
    first = np.full(nc, n)
    np.minimum.at(first, comp, np.arange(n))
    return [CharLabel(S, V[i]) for i in sorted(first)]


def mackey_hom_dim(A: CharLabel, B: CharLabel) -> int:
    """Number of double cosets d with Psi_A = Psi_B^d on S ∩ T^d."""
    return sum(psi_agree(A, C) for C in double_coset_reps(A, B))


def double_cosets_direct(T_idx, S_idx, G) -> list:
    """Literal T d S double cosets of U as sorted index arrays (small groups only)."""
    check_budget(G.order * max(1, len(T_idx)), "direct double cosets")
    E = G.elements
    seen = np.zeros(G.order, dtype=bool)
    out = []
    for d in range(G.order):
        if seen[d]:
            continue
        TD = G.ctx.matmul(E[T_idx], E[d][None])
        TDS = G.ctx.matmul(TD[:, None], E[S_idx][None]).reshape(-1, G.N, G.N)
        idx = np.unique(G.index(TDS))
        seen[idx] = True
        out.append(idx)
    return out


# ---------------------------------------------------------------------------
# the constructive isomorphism

@dataclass
class FindGResult:
    g: np.ndarray | None
    ok: bool
    steps: list = field(default_factory=list)
    failure: dict | None = None

    def to_json(self, ctx) -> dict:
        out = {"ok": self.ok, "steps": self.steps}
        if self.g is not None:
            out["g"] = [[ctx.to_json(int(x)) for x in row] for row in self.g]
        if self.failure is not None:
            out["failure"] = self.failure
        return out


def _rows_agree(A: CharLabel, B: CharLabel, upto: int) -> bool:
    return all(A[pos] == B[pos] for pos in A.space.tp.pup if pos[0] <= upto)


def _row_diff(A, B, i):
    return {f"{a},{b}": [A[(a, b)], B[(a, b)]] for (a, b) in A.space.tp.pup if a == i and A[(a, b)] != B[(a, b)]}


def find_g_main3(A: CharLabel, B: CharLabel, check: bool = True) -> FindGResult:
    """Build g in U_I(A), row by row, with g.[B] = [A]."""
    S = A.space
    tp, ctx, G = S.tp, S.ctx, S.G
    if check:
        ca, cb = classify(A), classify(B)
        if not (ca.main_separated and ca.is_core):
            raise PreconditionError(f"{A} is not a main separated core")
        if not cb.main_separated:
            raise PreconditionError(f"{B} is not main separated")
        up = set(tp.regions["UP"])
        if not (A.supp() <= up and B.supp() <= up):
            raise PreconditionError("labels must be supported in UP")
        if not psi_agree(A, B):
            raise PreconditionError("Psi_A and Psi_B differ on the common stabilizer")
    _, _, I = i_sets(classify(A).mc)
    mc = classify(A).mc
    g = identity(ctx, tp.N)
    D = B
    steps = []
    if not _rows_agree(A, D, 1):
        return FindGResult(None, False, steps, {"row": 1, "reason": "first rows differ", "diff": _row_diff(A, D, 1)})
    for i in range(2, tp.ntil):
        bi = tp.bar(i)
        if any(r != i and c == bi for (r, c) in mc):
            if any(A[(i, c)] or D[(i, c)] for c in range(i + 1, tp.N + 1)):
                return FindGResult(None, False, steps, {"row": i, "reason": "nonzero row under a filled column",
                                                        "diff": _row_diff(A, D, i)})
            steps.append({"row": i, "kind": "skip"})
            continue
        mains = sorted(((r, c) for (r, c) in mc if r < i < c < bi), key=lambda p: p[1])
        lams = []
        gi = identity(ctx, tp.N)
        for (r, c) in mains:
            lam = ctx.mul(ctx.inv(D[(r, c)]), ctx.sub(D[(i, c)], A[(i, c)])) if D[(r, c)] else None
            if lam is None:
                return FindGResult(None, False, steps, {"row": i, "reason": f"B has zero at main ({r},{c})"})
            lams.append([r, int(lam)])
            if lam:
                if (r, i) not in I:
                    return FindGResult(None, False, steps, {"row": i, "reason": f"({r},{i}) outside I(A)",
                                                            "lambdas": lams})
                gi = ctx.matmul(gi, G.root(r, i, lam))
        if not left_supported(gi, D):
            return FindGResult(None, False, steps, {"row": i, "reason": "left action not monomial",
                                                    "lambdas": lams})
        D = left_dot(gi, D)
        g = ctx.matmul(gi, g)
        steps.append({"row": i, "kind": "step", "lambdas": lams})
        if not _rows_agree(A, D, i):
            return FindGResult(None, False, steps, {"row": i, "reason": "row disagrees after the step",
                                                    "lambdas": lams, "diff": _row_diff(A, D, i)})
    if left_dot(g, B) != A:
        return FindGResult(None, False, steps, {"row": None, "reason": "composite g does not map B to A"})
    return FindGResult(g, True, steps)


# ---------------------------------------------------------------------------

def row_relation_check(A: CharLabel, B: CharLabel, i: int) -> bool:
    """B_is = A_is - sum_{j_nu > s} (A_ij_nu - B_ij_nu) alpha^s_j_nu for every free s."""
    S = A.space
    tp, ctx = S.tp, S.ctx
    ca = classify(A)
    if not (ca.staircase and ca.is_core):
        raise PreconditionError(f"{A} is not a staircase core")
    if not classify(B).staircase:
        raise PreconditionError(f"{B} is not staircase")
    if not _rows_agree(A, B, i - 1):
        raise PreconditionError(f"labels differ above row {i}")
    bi = tp.bar(i)
    if any(A[(k, bi)] for k in range(1, i + 1)):
        raise PreconditionError(f"column {bi} is not zero")
    rs = row_stab(A, i)
    W = row_stab_elements(A, rs)
    if not (psi_exponents(A, W) == psi_exponents(B, W)).all():
        raise PreconditionError(f"Psi differs on the row-{i} stabilizer")
    for s in rs.S:
        alpha = dict(zip(rs.cols, rs.basis[s]))
        rhs = A[(i, s)]
        for (_, j) in rs.mains:
            if j > s:
                rhs = ctx.sub(rhs, ctx.mul(ctx.sub(A[(i, j)], B[(i, j)]), int(alpha[j])))
        if int(rhs) != B[(i, s)]:
            return False
    return True
