"""
The character space of V = V_pUP: labels [A], the trace form, the
1-cocycle f = pi restricted to U, and character evaluation.

A Space bundles the type, the field, the group and the theta scale c, so that
theta(x) = zeta_p^{c Tr(x)}.  Labels are stored as vectors over pUP.
"""

from __future__ import annotations

import re
from functools import cached_property

import numpy as np

from .field import CycNum, FieldCtx, make_field
from .geometry import TypeParams
from .group import Group, GroupElem, check_budget, rp_term_sign_probe


class Space:
    """Everything fixed for one configuration (type, rank, field, theta)."""

    def __init__(self, tp: TypeParams, ctx: FieldCtx, c: int = 1):
        if c % ctx.p == 0:
            raise ValueError("theta scale must be nonzero mod p")
        self.tp = tp
        self.ctx = ctx
        self.c = c % ctx.p
        self.G = Group(tp, ctx)
        self.m = self.G.m
        self.q = ctx.q
        self.p = ctx.p

    @classmethod
    def make(cls, lie_type: str, n: int, p: int, k: int = 1, c: int = 1):
        return cls(TypeParams(lie_type, n), make_field(p, k), c)

    def __repr__(self):
        return f"Space({self.tp}, q={self.q}, c={self.c})"

    # exponent of theta on field codes
    def texp(self, x):
        return (self.c * np.asarray(self.ctx.trace(x))) % self.p

    @cached_property
    def term_signs(self) -> dict:
        """(r,s) -> (a, {l: b_l}) for u_rs = a u_{sbar rbar} + sum_l b_l u_{sbar lbar} u_rl."""
        return rp_term_sign_probe(self.G)

    @cached_property
    def signs(self) -> dict:
        """(r,s) -> sign of u_{sbar rbar} in the RP recursion."""
        return {k: v[0] for k, v in self.term_signs.items()}

    # -- labels -------------------------------------------------------------

    def label(self, entries=None) -> "CharLabel":
        return CharLabel(self, entries)

    def zero(self) -> "CharLabel":
        return CharLabel(self, None)

    def label_from_key(self, key: int) -> "CharLabel":
        return CharLabel(self, self.G.key_to_vec(int(key)))

    def all_label_vectors(self) -> np.ndarray:
        return self.G.all_coords()

    def parse_label(self, text: str) -> "CharLabel":
        return parse_label(self, text)


class CharLabel:
    """[A] for A in V_pUP, compared entrywise on pUP."""

    __slots__ = ("space", "v", "_cls")

    def __init__(self, space: Space, entries=None):
        self.space = space
        m = space.m
        if entries is None:
            v = np.zeros(m, dtype=np.int64)
        elif isinstance(entries, dict):
            v = np.zeros(m, dtype=np.int64)
            idx = space.tp.pup_index
            for pos, val in entries.items():
                pos = tuple(pos)
                if pos not in idx:
                    raise ValueError(f"{pos} is not in pUP for {space.tp}")
                v[idx[pos]] = space.ctx.scalar(val)
        elif isinstance(entries, CharLabel):
            v = entries.v.copy()
        else:
            v = np.array(entries, dtype=np.int64).reshape(-1)
            if len(v) == space.tp.N ** 2:
                v = space.G.pi(v.reshape(space.tp.N, space.tp.N))
            if len(v) != m:
                raise ValueError(f"expected {m} pUP entries, got {len(v)}")
            if (v < 0).any() or (v >= space.q).any():
                raise ValueError("entries must be field codes")
        v.setflags(write=False)
        self.v = v
        self._cls = None

    @classmethod
    def from_matrix(cls, space: Space, M) -> "CharLabel":
        """Project an N x N matrix to pUP."""
        return cls(space, space.G.pi(np.asarray(M, dtype=np.int64)))

    @property
    def tp(self):
        return self.space.tp

    @property
    def mat(self) -> np.ndarray:
        return self.space.G.unpi(self.v)

    def __getitem__(self, pos) -> int:
        i, j = pos
        k = self.space.tp.pup_index.get((i, j))
        return 0 if k is None else int(self.v[k])

    def entries(self) -> dict:
        return {pos: int(x) for pos, x in zip(self.space.tp.pup, self.v) if x}

    def supp(self) -> frozenset:
        return frozenset(pos for pos, x in zip(self.space.tp.pup, self.v) if x)

    @property
    def key(self) -> int:
        return int(self.space.G.vec_key(self.v))

    def __eq__(self, other):
        return isinstance(other, CharLabel) and self.space is other.space and np.array_equal(self.v, other.v)

    def __hash__(self):
        return hash(self.v.tobytes())

    def __lt__(self, other):
        return self.key < other.key

    def __add__(self, other):
        return CharLabel(self.space, self.space.ctx.add(self.v, other.v))

    def __sub__(self, other):
        return CharLabel(self.space, self.space.ctx.sub(self.v, other.v))

    def __neg__(self):
        return CharLabel(self.space, self.space.ctx.neg(self.v))

    def scaled(self, a) -> "CharLabel":
        return CharLabel(self.space, self.space.ctx.mul(self.v, self.space.ctx.scalar(a)))

    def to_string(self) -> str:
        ctx = self.space.ctx
        parts = []
        for (i, j), x in sorted(self.entries().items()):
            val = ctx.to_json(x)
            s = str(val) if isinstance(val, int) else "[" + ",".join(map(str, val)) + "]"
            parts.append(f"{i},{j}={s}")
        return ";".join(parts)

    def to_json(self) -> dict:
        ctx = self.space.ctx
        return {f"{i},{j}": ctx.to_json(x) for (i, j), x in sorted(self.entries().items())}

    def __str__(self):
        return "[" + (self.to_string() or "0") + "]"

    __repr__ = __str__


_ENTRY = re.compile(r"^\s*(\d+)\s*,\s*(\d+)\s*=\s*(\[[^\]]*\]|-?\d+)\s*$")


def parse_label(space: Space, text: str) -> CharLabel:
    """Parse the "i,j=v;i,j=v" grammar; v is an int or a coefficient list [c0,c1,..]."""
    entries = {}
    text = text.strip()
    if text in ("", "0"):
        return CharLabel(space)
    for part in text.split(";"):
        if not part.strip():
            continue
        m = _ENTRY.match(part)
        if not m:
            raise ValueError(f"cannot parse label entry {part!r}")
        i, j, val = int(m.group(1)), int(m.group(2)), m.group(3)
        if val.startswith("["):
            coeffs = [int(x) for x in val[1:-1].split(",") if x.strip()]
            code = space.ctx.from_json(coeffs)
        else:
            code = space.ctx.from_json(int(val))
        if (i, j) in entries:
            raise ValueError(f"duplicate entry ({i},{j})")
        entries[(i, j)] = code
    return CharLabel(space, entries)


# ---------------------------------------------------------------------------

def kappa(ctx: FieldCtx, A, B):
    """tr(A^t B) = sum of entrywise products (batched over leading axes)."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if A.shape[-2:] != B.shape[-2:]:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    prod = ctx.mul(A, B)
    prod = np.asarray(prod)
    return ctx.sum(prod.reshape(prod.shape[:-2] + (-1,)), axis=-1)


def chi_eval(A: CharLabel, B) -> CycNum:
    """chi_A(B) = theta(kappa(A, B)) for B in V (label or matrix)."""
    S = A.space
    Bm = B.mat if isinstance(B, CharLabel) else np.asarray(B)
    return CycNum.zeta(S.p, int(S.texp(kappa(S.ctx, A.mat, Bm))))


def cocycle_f(g) -> np.ndarray:
    """f(g) = pi(g) as a pUP vector."""
    G = g.group
    return G.pi(g.m)


def dot_v(A, g: GroupElem) -> CharLabel:
    """A.g = pi(A g)."""
    S = A.space
    return CharLabel.from_matrix(S, S.ctx.matmul(A.mat, g.m))


def dot_v_vec(space: Space, a, g) -> np.ndarray:
    """Vector form of A.g for pUP vectors (batched over a)."""
    G = space.G
    return G.pi(space.ctx.matmul(G.unpi(a), g))


def f_star(space: Space, tau) -> np.ndarray:
    """Given tau as a dense array over V (indexed by label key), return tau o f over U.

    The result is indexed by the enumeration order of U.
    """
    tau = np.asarray(tau, dtype=object)
    check_budget(space.G.order, "f_star")
    return tau[space.G.keys]


def f_inverse_star(space: Space, phi) -> np.ndarray:
    """Inverse of f_star: from a function on U to a function on V."""
    out = np.empty(space.G.order, dtype=object)
    out[space.G.keys] = np.asarray(phi, dtype=object)
    return out


def chi_table_exponents(space: Space, A: CharLabel) -> np.ndarray:
    """Exponents of chi_{-A}(B) over all B in V (indexed by key)."""
    V = space.all_label_vectors()
    return space.texp(space.ctx.neg(space.ctx.sum(space.ctx.mul(V, A.v[None]), axis=-1)))


@np.errstate(over="raise")
def pair_exponents(space: Space, X, Y) -> np.ndarray:
    """Matrix of c Tr(sum_p X[a,p] Y[b,p]) mod p for pUP vectors X (a,m), Y (b,m)."""
    X = np.asarray(X, dtype=np.int64)
    Y = np.asarray(Y, dtype=np.int64)
    ctx = space.ctx
    if ctx.k == 1:
        return (space.c * ((X @ Y.T) % ctx.p)) % ctx.p
    trm = space_trace_mul(space)
    out = np.zeros((X.shape[0], Y.shape[0]), dtype=np.int64)
    for k in range(X.shape[1]):
        out += trm[X[:, k][:, None], Y[:, k][None, :]]
    return (space.c * out) % ctx.p


def space_trace_mul(space: Space) -> np.ndarray:
    """Table Tr(a b) over all pairs of field codes."""
    ctx = space.ctx
    a = np.arange(ctx.q)
    return ctx.trace(ctx.mul(a[:, None], a[None, :]))


def exponent_counts(exps: np.ndarray, p: int) -> np.ndarray:
    """Row-wise histogram of exponents in 0..p-1."""
    exps = np.asarray(exps)
    return np.stack([(exps == t).sum(axis=-1) for t in range(p)], axis=-1)
