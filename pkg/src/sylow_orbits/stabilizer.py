"""
Stabilizers Stab_U[A] of staircase cores, computed row by row from the
linear systems A_i alpha = 0, and the linear character Psi_A on them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .charspace import CharLabel, Space, pair_exponents
from .field import FieldCtx
from .group import check_budget, identity, mat_inv_unitri
from .orbits import classify


class NotInStabilizer(ValueError):
    pass


class CoreRequired(ValueError):
    pass


def submatrix_ai(A: CharLabel, i: int) -> np.ndarray:
    """Entries A_{nu mu} with nu < i < mu <= itil(i), as an (i-1) x (itil-i) array."""
    tp = A.space.tp
    if not 1 <= i <= tp.n:
        raise ValueError(f"row {i} outside 1..{tp.n}")
    it = tp.itil(i)
    M = np.zeros((i - 1, it - i), dtype=np.int64)
    for nu in range(1, i):
        for mu in range(i + 1, it + 1):
            M[nu - 1, mu - i - 1] = A[(nu, mu)]
    return M


def nullspace(ctx: FieldCtx, M: np.ndarray) -> np.ndarray:
    """Basis (rows) of {x : M x = 0} over F_q via reduced row echelon form."""
    M = np.array(M, dtype=np.int64).reshape(-1, M.shape[-1] if M.ndim == 2 else 0)
    rows, ncols = M.shape
    R = M.copy()
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((k for k in range(r, rows) if R[k, c] != 0), None)
        if piv is None:
            continue
        R[[r, piv]] = R[[piv, r]]
        R[r] = ctx.mul(R[r], ctx.inv(int(R[r, c])))
        for k in range(rows):
            if k != r and R[k, c] != 0:
                R[k] = ctx.sub(R[k], ctx.mul(R[r], int(R[k, c])))
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(ncols, dtype=np.int64)
        v[f] = ctx.neg(1) if ctx.k > 1 else ctx.p - 1
        for k, c in enumerate(pivots):
            v[c] = ctx.mul(R[k, f], 1)  # x_c = -R[k,f] * x_f = R[k,f] since x_f = -1
        basis.append(v)
    return np.array(basis, dtype=np.int64).reshape(len(basis), ncols)


@dataclass
class RowStab:
    i: int
    kind: str  # "trivial", "antidiag", "solution"
    cols: list  # the columns i+1..itil(i) indexing alpha vectors
    S: list = field(default_factory=list)  # free columns
    mains: list = field(default_factory=list)  # (i_nu, j_nu) inside A_i, left to right
    basis: dict = field(default_factory=dict)  # s -> alpha_s (over cols)
    generic: bool = False  # basis from plain elimination (non-core input)

    @property
    def dim(self) -> int:
        return len(self.basis) if self.kind == "solution" else (1 if self.kind == "antidiag" else 0)

    def to_json(self, ctx) -> dict:
        return {
            "row": self.i,
            "kind": self.kind,
            "S": self.S,
            "mains": [list(p) for p in self.mains],
            "basis": {str(s): [ctx.to_json(int(x)) for x in v] for s, v in sorted(self.basis.items())},
        }


def row_stab(A: CharLabel, i: int) -> RowStab:
    S = A.space
    tp, ctx = S.tp, S.ctx
    if not 1 <= i <= tp.n:
        raise ValueError(f"row {i} outside 1..{tp.n}")
    bi, it = tp.bar(i), tp.itil(i)
    cols = list(range(i + 1, it + 1))
    if any(A[(k, bi)] != 0 for k in range(1, i)):
        return RowStab(i, "trivial", cols)
    if tp.lie_type == "C" and A[(i, bi)] != 0:
        return RowStab(i, "antidiag", cols, S=[bi])
    Ai = submatrix_ai(A, i)
    mc = classify(A).mc
    mains = sorted(((r, c) for (r, c) in mc if r < i and i < c <= it), key=lambda p: p[1])
    jset = [c for _, c in mains]
    Si = [c for c in cols if c not in jset]
    rank_ok = _rank(ctx, Ai) == len(mains)
    basis = {}
    if rank_ok:
        for s in Si:
            alpha = {c: 0 for c in cols}
            alpha[s] = ctx.neg(1) if ctx.k > 1 else ctx.p - 1
            for (r, j) in mains:
                acc = 0
                for mu in cols:
                    if mu < j and alpha[mu]:
                        acc = ctx.add(acc, ctx.mul(A[(r, mu)], alpha[mu]))
                alpha[j] = ctx.neg(ctx.mul(ctx.inv(A[(r, j)]), acc)) if acc else 0
            basis[s] = np.array([int(alpha[c]) for c in cols], dtype=np.int64)
        rs = RowStab(i, "solution", cols, S=Si, mains=mains, basis=basis)
    else:
        ns = nullspace(ctx, Ai)
        rs = RowStab(i, "solution", cols, S=list(range(len(ns))), mains=mains,
                     basis={k: v for k, v in enumerate(ns)}, generic=True)
    for v in rs.basis.values():
        if Ai.size and (_matvec(ctx, Ai, v) != 0).any():
            raise AssertionError(f"basis vector of row {i} does not solve A_i alpha = 0")
    return rs


def _matvec(ctx, M, v):
    if M.size == 0:
        return np.zeros(M.shape[0], dtype=np.int64)
    return ctx.sum(ctx.mul(M, v[None]), axis=-1)


def _rank(ctx, M) -> int:
    if M.size == 0:
        return 0
    return M.shape[1] - len(nullspace(ctx, M))


def x_of_alpha(space: Space, i: int, cols, alpha) -> np.ndarray:
    """x(alpha) = x_{i,i+1}(alpha_{i+1}) ... x_{i,itil}(alpha_itil); batched over alpha rows."""
    G = space.G
    alpha = np.asarray(alpha, dtype=np.int64).reshape(-1, len(cols))
    W = identity(space.ctx, G.N, (len(alpha),))
    for k, c in enumerate(cols):
        if (alpha[:, k] != 0).any():
            W = space.ctx.matmul(W, G.root_batch(i, c, alpha[:, k]))
    return W


def row_stab_elements(A: CharLabel, rs: RowStab) -> np.ndarray:
    S = A.space
    ctx, q = S.ctx, S.q
    N = S.tp.N
    if rs.kind == "trivial":
        return identity(ctx, N, (1,))
    if rs.kind == "antidiag":
        return S.G.root_batch(rs.i, S.tp.bar(rs.i), np.arange(q))
    keys = sorted(rs.basis)
    if not keys:
        return identity(ctx, N, (1,))
    B = np.array([rs.basis[s] for s in keys], dtype=np.int64)
    lam = _lam_grid(q, len(keys))
    alpha = np.zeros((len(lam), len(rs.cols)), dtype=np.int64)
    for k in range(len(keys)):
        alpha = ctx.add(alpha, ctx.mul(lam[:, k:k + 1], B[k][None]))
    return x_of_alpha(S, rs.i, rs.cols, alpha)


def _lam_grid(q, d):
    if d == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(np.meshgrid(*[np.arange(q)] * d, indexing="ij")).reshape(d, -1).T


def fixes(A: CharLabel, mats) -> np.ndarray:
    """Boolean mask: which matrices g satisfy [A].g = [A]."""
    S = A.space
    mats = np.asarray(mats, dtype=np.int64).reshape(-1, S.tp.N, S.tp.N)
    ginv = mat_inv_unitri(S.ctx, mats)
    img = S.G.pi(S.ctx.matmul(A.mat[None], np.swapaxes(ginv, 1, 2)))
    return (img == A.v[None]).all(axis=1)


def stab_elements(A: CharLabel, verify: bool = True) -> np.ndarray:
    """Product of the row stabilizers in ascending row order."""
    S = A.space
    cl = classify(A)
    if not (cl.staircase and cl.is_core):
        raise CoreRequired(f"{A} is not a staircase core")
    W = identity(S.ctx, S.tp.N, (1,))
    for i in range(1, S.tp.n + 1):
        R = row_stab_elements(A, row_stab(A, i))
        W = S.ctx.matmul(W[:, None], R[None]).reshape(-1, S.tp.N, S.tp.N)
        check_budget(len(W), "stabilizer enumeration")
    if verify and not fixes(A, W).all():
        raise AssertionError(f"row-product stabilizer of {A} contains a non-stabilizing element")
    return W


def brute_stabilizer(A: CharLabel) -> np.ndarray:
    """Indices (into the enumeration of U) of all u with [A].u = [A]."""
    S = A.space
    G = S.G
    check_budget(G.order, "brute-force stabilizer")
    E = G.elements
    Einv = E[G.inverse_index]
    img = G.pi(S.ctx.matmul(A.mat[None], np.swapaxes(Einv, 1, 2)))
    return np.nonzero((img == A.v[None]).all(axis=1))[0]


def stab_indices(A: CharLabel) -> np.ndarray:
    cl = classify(A)
    if cl.staircase and cl.is_core:
        return np.sort(A.space.G.index(stab_elements(A, verify=False)))
    return brute_stabilizer(A)


def psi_exponents(A: CharLabel, mats) -> np.ndarray:
    """Exponents of Psi_A(u) = theta kappa(-A, pi(u^{-1})), without the membership check."""
    S = A.space
    mats = np.asarray(mats, dtype=np.int64).reshape(-1, S.tp.N, S.tp.N)
    inv = S.G.pi(mat_inv_unitri(S.ctx, mats))
    return pair_exponents(S, S.ctx.neg(A.v)[None], inv)[0]


def psi(A: CharLabel, u) -> int:
    m = u.m if hasattr(u, "m") else np.asarray(u)
    if not fixes(A, m)[0]:
        raise NotInStabilizer(f"u does not stabilize {A}")
    return int(psi_exponents(A, m)[0])


def psi_basis_formula(A: CharLabel, rs: RowStab, s: int) -> int:
    """Exponent of theta(-A_is) prod_{j_nu > s} theta(A_{i j_nu} alpha^s_{j_nu})."""
    S = A.space
    ctx = S.ctx
    alpha = dict(zip(rs.cols, rs.basis[s]))
    tot = ctx.neg(A[(rs.i, s)])
    for (_, j) in rs.mains:
        if j > s:
            tot = ctx.add(tot, ctx.mul(A[(rs.i, j)], int(alpha[j])))
    return int(S.texp(tot))


def psi_row_formula(A: CharLabel, i: int, cols, alpha) -> int:
    """Exponent of prod_k theta(A_ik alpha_k) for x(alpha) in the row group."""
    S = A.space
    ctx = S.ctx
    tot = 0
    for c, a in zip(cols, alpha):
        tot = ctx.add(tot, ctx.mul(A[(i, c)], int(a)))
    return int(S.texp(tot))


def stab_intersection(A: CharLabel, B: CharLabel) -> np.ndarray:
    """Indices of Stab_U[A] ∩ Stab_U[B]."""
    return np.intersect1d(stab_indices(A), stab_indices(B))


def stab_size_expected(A: CharLabel) -> int:
    return A.space.q ** len(classify(A).J)
