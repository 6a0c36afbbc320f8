"""
The Sylow p-subgroup U of the classical group of type B, C or D, realized as
unitriangular N x N matrices generated by root subgroups.

Matrices are numpy int64 arrays of field codes, 0-based.  Coordinates are
vectors over pUP in the lexicographic order of TypeParams.pup.
"""

from __future__ import annotations

import itertools
import os
from functools import cached_property

import numpy as np

from .field import FieldCtx
from .geometry import TypeParams, is_closed

DEFAULT_BUDGET = 2_000_000
BUDGET_ENV = "SYLOW_BUDGET"


class BudgetExceeded(RuntimeError):
    pass


class MembershipError(ValueError):
    pass


class RecursionShapeError(RuntimeError):
    pass


def budget() -> int:
    return int(os.environ.get(BUDGET_ENV, DEFAULT_BUDGET))


def check_budget(size: int, what: str):
    b = budget()
    if size > b:
        raise BudgetExceeded(f"{what} needs {size} items, budget is {b} (set {BUDGET_ENV})")


# ---------------------------------------------------------------------------
# matrix helpers over F_q

def identity(ctx, N, batch=()):
    return np.broadcast_to(np.eye(N, dtype=np.int64), tuple(batch) + (N, N)).copy()


def mat_mul(ctx: FieldCtx, a, b):
    return ctx.matmul(a, b)


def mat_inv_unitri(ctx: FieldCtx, u):
    """Inverse of (batches of) unitriangular matrices: sum of (1-u)^k."""
    u = np.asarray(u, dtype=np.int64)
    N = u.shape[-1]
    one = identity(ctx, N, u.shape[:-2])
    X = ctx.sub(one, u)  # 1 - u, strictly upper
    out = one.copy()
    term = one
    for _ in range(N - 1):
        term = ctx.matmul(term, X)
        out = ctx.add(out, term)
    return out


def tilde_x(ctx: FieldCtx, N: int, i: int, j: int, a) -> np.ndarray:
    """Ambient root element 1 + a e_ij (1-based)."""
    m = np.eye(N, dtype=np.int64)
    m[i - 1, j - 1] = ctx.add(m[i - 1, j - 1], ctx.scalar(a))
    return m


class Group:
    """U(X_n) over F_q, with enumeration tables built on demand."""

    def __init__(self, tp: TypeParams, ctx: FieldCtx):
        self.tp = tp
        self.ctx = ctx
        self.N = tp.N
        self.pup = tp.pup
        self.m = len(self.pup)
        self.order = ctx.q ** self.m
        rows = np.array([i - 1 for i, _ in self.pup], dtype=np.int64)
        cols = np.array([j - 1 for _, j in self.pup], dtype=np.int64)
        self._rows, self._cols = rows, cols
        self._weights = ctx.q ** np.arange(self.m - 1, -1, -1, dtype=np.int64)

    def __repr__(self):
        return f"Group({self.tp}, q={self.ctx.q})"

    # -- root elements ------------------------------------------------------

    def root_batch(self, i: int, j: int, alphas) -> np.ndarray:
        """Stack of root elements x_ij(alpha) for an array of alphas."""
        tp, ctx, N = self.tp, self.ctx, self.N
        if not tp.in_("pUP", (i, j)):
            raise ValueError(f"({i},{j}) is not in pUP for {tp}")
        a = np.asarray(alphas, dtype=np.int64).reshape(-1)
        M = identity(ctx, N, (len(a),))
        bi, bj = tp.bar(i), tp.bar(j)
        M[:, i - 1, j - 1] = a
        if tp.lie_type == "C" and j == bi:
            pass
        elif tp.lie_type == "C" and j > tp.n:
            M[:, bj - 1, bi - 1] = a
        else:
            M[:, bj - 1, bi - 1] = ctx.neg(a)
            if tp.lie_type == "B" and j == tp.n + 1:
                M[:, i - 1, bi - 1] = ctx.neg(ctx.mul(ctx.half, ctx.mul(a, a)))
        return M

    def root(self, i: int, j: int, a) -> np.ndarray:
        return self.root_batch(i, j, [self.ctx.scalar(a)])[0]

    # -- coordinates --------------------------------------------------------

    def from_coords(self, c) -> np.ndarray:
        """Product of x_p(c_p) over pUP in lexicographic order; batched over leading axes."""
        c = self._coords_array(c)
        flat = c.reshape(-1, self.m)
        W = identity(self.ctx, self.N, (flat.shape[0],))
        for k, (i, j) in enumerate(self.pup):
            if (flat[:, k] != 0).any():
                W = self.ctx.matmul(W, self.root_batch(i, j, flat[:, k]))
        return W.reshape(c.shape[:-1] + (self.N, self.N))

    def _coords_array(self, c):
        if isinstance(c, dict):
            v = np.zeros(self.m, dtype=np.int64)
            idx = self.tp.pup_index
            for pos, val in c.items():
                v[idx[tuple(pos)]] = self.ctx.scalar(val)
            return v
        return np.asarray(c, dtype=np.int64)

    def to_coords(self, u, check: bool = True) -> np.ndarray:
        """Peel root factors off the left in lexicographic order."""
        u = np.asarray(u, dtype=np.int64)
        single = u.ndim == 2
        W = u.reshape((-1, self.N, self.N)).copy()
        self._check_unitri(W)
        out = np.zeros((W.shape[0], self.m), dtype=np.int64)
        for k, (i, j) in enumerate(self.pup):
            c = W[:, i - 1, j - 1].copy()
            out[:, k] = c
            if (c != 0).any():
                W = self.ctx.matmul(self.root_batch(i, j, self.ctx.neg(c)), W)
        if check:
            bad = (W != np.eye(self.N, dtype=np.int64)).reshape(W.shape[0], -1).any(axis=1)
            if bad.any():
                raise MembershipError(f"{int(bad.sum())} matrix(es) are not in U({self.tp})")
        return out[0] if single else out.reshape(u.shape[:-2] + (self.m,))

    def _check_unitri(self, W):
        N = self.N
        low = np.tril(np.ones((N, N), dtype=bool), -1)
        if (W[:, low] != 0).any() or (np.diagonal(W, axis1=1, axis2=2) != 1).any():
            raise MembershipError("matrix is not upper unitriangular")

    def contains(self, u) -> bool:
        try:
            self.to_coords(u)
            return True
        except MembershipError:
            return False

    # -- projections --------------------------------------------------------

    def pi(self, m) -> np.ndarray:
        """Entries of (batches of) N x N matrices on pUP, as vectors."""
        m = np.asarray(m)
        return m[..., self._rows, self._cols]

    def unpi(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64)
        out = np.zeros(v.shape[:-1] + (self.N, self.N), dtype=np.int64)
        out[..., self._rows, self._cols] = v
        return out

    def key(self, m) -> np.ndarray:
        """Integer key of the pUP entries (a bijection U -> range(|U|))."""
        return self.pi(m) @ self._weights

    def vec_key(self, v) -> np.ndarray:
        return np.asarray(v, dtype=np.int64) @ self._weights

    def key_to_vec(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=np.int64)
        return (k[..., None] // self._weights) % self.ctx.q

    # -- enumeration --------------------------------------------------------

    def all_coords(self) -> np.ndarray:
        check_budget(self.order, f"enumerating U({self.tp}) over F_{self.ctx.q}")
        q, m = self.ctx.q, self.m
        return self.key_to_vec(np.arange(q**m, dtype=np.int64)) if m else np.zeros((1, 0), dtype=np.int64)

    @cached_property
    def elements(self) -> np.ndarray:
        """All of U as an (|U|, N, N) array, in lexicographic coordinate order."""
        C = self.all_coords()
        out = np.empty((len(C), self.N, self.N), dtype=np.int64)
        step = 4096
        for s in range(0, len(C), step):
            out[s:s + step] = self.from_coords(C[s:s + step])
        out.setflags(write=False)
        return out

    @cached_property
    def keys(self) -> np.ndarray:
        k = self.key(self.elements)
        k.setflags(write=False)
        return k

    @cached_property
    def index_of_key(self) -> np.ndarray:
        idx = np.full(self.order, -1, dtype=np.int64)
        idx[self.keys] = np.arange(self.order)
        if (idx < 0).any():
            raise AssertionError("pUP projection is not a bijection on the enumerated group")
        return idx

    @cached_property
    def inverse_index(self) -> np.ndarray:
        inv = self.index_of_key[self.key(mat_inv_unitri(self.ctx, self.elements))]
        inv.setflags(write=False)
        return inv

    def index(self, u) -> np.ndarray:
        return self.index_of_key[self.key(u)]

    def enumerate(self):
        """Deterministic stream of GroupElems in lexicographic coordinate order."""
        for k in range(self.order):
            yield GroupElem(self, self.elements[k])

    def random_elements(self, rng, size: int) -> np.ndarray:
        C = rng.integers(0, self.ctx.q, size=(size, self.m))
        return self.from_coords(C)

    def elem(self, m) -> "GroupElem":
        return GroupElem(self, m)

    def mul(self, a, b):
        return self.ctx.matmul(a, b)

    def inv(self, a):
        return mat_inv_unitri(self.ctx, a)


class GroupElem:
    """Immutable element of U (or of the ambient unitriangular group)."""

    __slots__ = ("group", "m")

    def __init__(self, group: Group, m):
        m = np.array(m, dtype=np.int64)
        m.setflags(write=False)
        self.group = group
        self.m = m

    def __mul__(self, other):
        return GroupElem(self.group, self.group.mul(self.m, other.m))

    def inverse(self):
        return GroupElem(self.group, self.group.inv(self.m))

    def coords(self) -> np.ndarray:
        return self.group.to_coords(self.m)

    def __eq__(self, other):
        return isinstance(other, GroupElem) and np.array_equal(self.m, other.m)

    def __hash__(self):
        return hash(self.m.tobytes())

    def __repr__(self):
        return f"GroupElem({self.m.tolist()})"


def root_elem(G: Group, i: int, j: int, a) -> GroupElem:
    return GroupElem(G, G.root(i, j, a))


def from_coords(G: Group, c) -> GroupElem:
    return GroupElem(G, G.from_coords(c))


def to_coords(u: GroupElem) -> dict:
    v = u.group.to_coords(u.m)
    return {pos: int(x) for pos, x in zip(u.group.pup, v)}


def enumerate_group(G: Group):
    return G.enumerate()


# ---------------------------------------------------------------------------
# subgroups

class Subgroup:
    """A subgroup of U given by a sorted index array into G.elements."""

    def __init__(self, G: Group, indices, name: str = ""):
        self.G = G
        self.indices = np.unique(np.asarray(indices, dtype=np.int64))
        self.name = name
        self._member = np.zeros(G.order, dtype=bool)
        self._member[self.indices] = True

    @property
    def order(self) -> int:
        return len(self.indices)

    @property
    def elements(self) -> np.ndarray:
        return self.G.elements[self.indices]

    def contains(self, u) -> bool:
        return bool(self._member[self.G.index(u)])

    def __contains__(self, u):
        m = u.m if isinstance(u, GroupElem) else u
        return self.contains(m)

    def is_closed_under_mul(self) -> bool:
        E = self.elements
        for a in E:
            prods = self.G.ctx.matmul(a[None], E)
            if not self._member[self.G.index(prods)].all():
                return False
        return True

    def is_abelian(self) -> bool:
        E = self.elements
        for a in E:
            if not np.array_equal(self.G.ctx.matmul(a[None], E), self.G.ctx.matmul(E, a[None])):
                return False
        return True

    def __repr__(self):
        return f"Subgroup({self.name or '?'}, order={self.order})"


def pattern_product(G: Group, J) -> np.ndarray:
    """All products of x_p(c_p) over p in J (lexicographic), as matrices."""
    J = sorted(J)
    q = G.ctx.q
    check_budget(q ** len(J), "pattern subgroup")
    W = identity(G.ctx, G.N, (1,))
    for (i, j) in J:
        R = G.root_batch(i, j, np.arange(q))
        W = G.ctx.matmul(W[:, None], R[None]).reshape(-1, G.N, G.N)
    return W


def pattern_subgroup(G: Group, J, check: bool = True) -> Subgroup:
    if not is_closed(J, G.tp):
        raise ValueError(f"{sorted(J)} is not a closed subset of pUP")
    W = pattern_product(G, J)
    S = Subgroup(G, G.index(W), name=f"U_J{sorted(J)}")
    if S.order != G.ctx.q ** len(set(J)):
        raise AssertionError("pattern product is not injective")
    if check and not S.is_closed_under_mul():
        raise AssertionError("pattern subgroup is not closed under multiplication")
    return S


def row_positions(tp: TypeParams, i: int):
    if not 1 <= i < tp.ntil:
        raise ValueError(f"row {i} outside 1..{tp.ntil - 1}")
    return [(i, j) for j in range(i + 1, tp.itil(i) + 1)]


def row_group(G: Group, i: int) -> Subgroup:
    S = pattern_subgroup(G, row_positions(G.tp, i))
    S.name = f"R_{i}"
    return S


# ---------------------------------------------------------------------------
# the RP recursion

def rp_terms(G: Group, E: np.ndarray, r: int, s: int):
    """(u_rs, u_{sbar rbar}, stacked products u_{sbar lbar} u_rl for r<l<s)."""
    tp, ctx = G.tp, G.ctx
    sb, rb = tp.bar(s), tp.bar(r)
    head = E[:, r - 1, s - 1]
    tail = E[:, sb - 1, rb - 1]
    prods = [ctx.mul(E[:, sb - 1, tp.bar(l) - 1], E[:, r - 1, l - 1]) for l in range(r + 1, s)]
    return head, tail, prods


def rp_sign_probe(G: Group, elements=None, strict: bool = True) -> dict:
    """Sign sigma_rs with u_rs - sigma u_{sbar rbar} + sum u_{sbar lbar} u_rl = 0 on U.

    With strict=False, positions where neither sign works map to None instead
    of raising.
    """
    tp, ctx = G.tp, G.ctx
    E = G.elements if elements is None else elements
    out = {}
    for (r, s) in tp.regions["RP"]:
        head, tail, prods = rp_terms(G, E, r, s)
        tot = head
        for p in prods:
            tot = ctx.add(tot, p)
        found = None
        for sigma in (1, -1):
            t = tail if sigma == 1 else ctx.neg(tail)
            if (ctx.sub(tot, t) == 0).all():
                found = sigma
                break
        if found is None and strict:
            raise RecursionShapeError(f"no uniform sign fits the recursion at ({r},{s}) for {tp}")
        out[(r, s)] = found
    return out


def rp_term_sign_probe(G: Group, elements=None) -> dict:
    """Per-term signs (a, {l: b_l}) with u_rs = a u_{sbar rbar} + sum_l b_l u_{sbar lbar} u_rl."""
    tp, ctx = G.tp, G.ctx
    E = G.elements if elements is None else elements
    out = {}
    for (r, s) in tp.regions["RP"]:
        head, tail, prods = rp_terms(G, E, r, s)
        ls = list(range(r + 1, s))
        hit = None
        for signs in itertools.product((1, -1), repeat=1 + len(prods)):
            tot = tail if signs[0] == 1 else ctx.neg(tail)
            for sg, p in zip(signs[1:], prods):
                tot = ctx.add(tot, p if sg == 1 else ctx.neg(p))
            if (tot == head).all():
                hit = (signs[0], dict(zip(ls, signs[1:])))
                break
        if hit is None:
            raise RecursionShapeError(f"no signed recursion fits at ({r},{s}) for {tp}")
        out[(r, s)] = hit
    return out
