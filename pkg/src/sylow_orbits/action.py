"""
Right monomial action of U on the labels [A], the left actions, and the
expansion of left multiplication lambda_x [A] = sum_C mu_C [C].

Sign convention: [A] stands for chi_{-A}.  With this reading the scalar of the
right action is theta(kappa(-A, pi(g^{-1}))), which is also the value of the
stabilizer character on g.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .charspace import CharLabel, Space, exponent_counts, kappa, pair_exponents
from .field import CycNum
from .geometry import r_region
from .group import GroupElem, check_budget, mat_inv_unitri


class SupportError(ValueError):
    pass


class SituationError(ValueError):
    pass


@dataclass(frozen=True)
class MonomialResult:
    exponent: int
    label: CharLabel

    def scalar(self) -> CycNum:
        return CycNum.zeta(self.label.space.p, self.exponent)

    def to_json(self):
        return {"exponent": int(self.exponent), "label": self.label.to_string()}


def _mat(g):
    return g.m if isinstance(g, GroupElem) else np.asarray(g, dtype=np.int64)


class RightMap:
    """The right action of one g as a linear map on pUP vectors plus an exponent functional."""

    def __init__(self, space: Space, g):
        self.space = space
        g = _mat(g)
        G = space.G
        ginv = mat_inv_unitri(space.ctx, g)
        rows, cols = G._rows, G._cols
        same_row = rows[:, None] == rows[None, :]
        # (A g^{-t})_{i,l} = sum_j A_ij (g^{-1})_{l,j}
        T = np.where(same_row, ginv[cols[None, :], cols[:, None]], 0)
        self.T = T
        self.w = space.ctx.neg(G.pi(ginv))  # pi(g^{-1}), negated for the -A convention

    def labels(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.space.ctx.k == 1:
            return (a @ self.T) % self.space.p
        return self.space.ctx.matmul(a, self.T)

    def exponents(self, a):
        a = np.asarray(a, dtype=np.int64)
        return pair_exponents(self.space, a.reshape(-1, self.space.m), self.w[None]).reshape(a.shape[:-1])

    def apply(self, a):
        return self.labels(a), self.exponents(a)


def monomial_right(A: CharLabel, g) -> MonomialResult:
    """[A]g = zeta^t [pi(A g^{-t})] with t the exponent of theta(kappa(-A, pi(g^{-1})))."""
    R = RightMap(A.space, g)
    v, t = R.apply(A.v)
    return MonomialResult(int(t), CharLabel(A.space, v))


def dot_right(A: CharLabel, g) -> CharLabel:
    """[A].g = [pi(A g^{-t})] computed by matrix products."""
    S = A.space
    ginv = mat_inv_unitri(S.ctx, _mat(g))
    return CharLabel.from_matrix(S, S.ctx.matmul(A.mat, ginv.T))


def restricted_column_op(A: CharLabel, i: int, j: int, alpha) -> CharLabel:
    """Add -alpha times column j to column i, then project to pUP."""
    S = A.space
    N = S.tp.N
    if not 1 <= i < j <= N:
        raise ValueError(f"need 1 <= i < j <= N, got ({i},{j})")
    M = A.mat.copy()
    a = S.ctx.scalar(alpha)
    M[:, i - 1] = S.ctx.sub(M[:, i - 1], S.ctx.mul(M[:, j - 1], a))
    return CharLabel.from_matrix(S, M)


def restricted_row_op(A: CharLabel, i: int, j: int, alpha) -> CharLabel:
    """Add -alpha times row i to row j, then project to pUP."""
    S = A.space
    M = A.mat.copy()
    a = S.ctx.scalar(alpha)
    M[j - 1] = S.ctx.sub(M[j - 1], S.ctx.mul(M[i - 1], a))
    return CharLabel.from_matrix(S, M)


def left_matrix(u, A: CharLabel) -> np.ndarray:
    """u^{-t} A as a full N x N matrix."""
    S = A.space
    uinv = mat_inv_unitri(S.ctx, _mat(u))
    return S.ctx.matmul(uinv.T, A.mat)


def left_dot(u, A: CharLabel) -> CharLabel:
    """u.[A] = [pi(u^{-t} A)]."""
    return CharLabel.from_matrix(A.space, left_matrix(u, A))


def left_supported(u, A: CharLabel) -> bool:
    S = A.space
    M = left_matrix(u, A)
    return not (M[~S.tp.mask0("pKL")] != 0).any()


def left_monomial(u, A: CharLabel) -> MonomialResult:
    """u[A] = chi_{-A}(u^{-1}) u.[A], defined when supp(u^{-t}A) lies in pKL."""
    S = A.space
    if not left_supported(u, A):
        raise SupportError(f"u^(-t)A is not pKL-supported for A = {A}")
    uinv = mat_inv_unitri(S.ctx, _mat(u))
    t = pair_exponents(S, S.ctx.neg(A.v)[None], S.G.pi(uinv)[None])[0, 0]
    return MonomialResult(int(t), left_dot(u, A))


def tilde_left(A: CharLabel, i: int, j: int, alpha) -> MonomialResult:
    """x~_ij(alpha)[A] = theta(alpha A_ij)[B], B from adding -alpha row i to row j."""
    S = A.space
    a = S.ctx.scalar(alpha)
    t = int(S.texp(S.ctx.mul(a, A[(i, j)])))
    return MonomialResult(t, restricted_row_op(A, i, j, a))


# ---------------------------------------------------------------------------
# left multiplication lambda_x

class LinearCombo(dict):
    """Finitely supported map CharLabel -> CycNum without zero coefficients."""

    def add(self, label, coeff):
        cur = self.get(label)
        val = coeff if cur is None else cur + coeff
        if val:
            self[label] = val
        elif label in self:
            del self[label]

    def to_json(self):
        return [{"label": L.to_string(), "coeff": c.to_json()} for L, c in sorted(self.items(), key=lambda kv: kv[0].key)]


def _cyc_from_counts(p, counts, order) -> CycNum:
    counts = [int(x) for x in counts]
    num = CycNum.from_exponent_counts(p, counts)
    if order == 1:
        return num
    return CycNum(p, [Fraction(c, order) for c in num.coeffs])


def lambda_coefficients(x, A: CharLabel, labels=None, chunk: int = 1 << 22):
    """Exponent histograms for mu_C over the given C vectors (default: all of V).

    Returns (C vectors, counts of shape (len(C), p)); mu_C = |U|^{-1} sum_t counts[t] zeta^t.
    """
    S = A.space
    G = S.G
    check_budget(G.order, "lambda expansion")
    E = G.elements
    xm = _mat(x)
    M = S.ctx.neg(S.ctx.matmul(mat_inv_unitri(S.ctx, xm).T, A.mat))  # -x^{-t}A
    base = S.texp(kappa(S.ctx, M[None], E))  # over full matrices, diagonal included
    PE = G.pi(E)
    C = S.all_label_vectors() if labels is None else np.asarray(labels, dtype=np.int64).reshape(-1, S.m)
    out = np.empty((len(C), S.p), dtype=np.int64)
    step = max(1, chunk // max(1, G.order))
    for s in range(0, len(C), step):
        e = (pair_exponents(S, C[s:s + step], PE) + base[None]) % S.p
        out[s:s + step] = exponent_counts(e, S.p)
    return C, out


def lambda_expand(x, A: CharLabel) -> LinearCombo:
    """lambda_x [A] = sum_C mu_C [C] with mu_C = |U|^{-1} sum_u theta kappa(-x^{-t}A, u) chi_C(pi(u))."""
    S = A.space
    C, counts = lambda_coefficients(x, A)
    combo = LinearCombo()
    nz = ~(counts == counts[:, :1]).all(axis=1)
    for k in np.nonzero(nz)[0]:
        combo[CharLabel(S, C[k])] = _cyc_from_counts(S.p, counts[k], S.G.order)
    return combo


def lambda_direct(x, A: CharLabel) -> np.ndarray:
    """lambda_x [A] as a function on U: u -> exponent of theta kappa(-x^{-t}A, u)."""
    S = A.space
    M = S.ctx.neg(S.ctx.matmul(mat_inv_unitri(S.ctx, _mat(x)).T, A.mat))
    return S.texp(kappa(S.ctx, M[None], S.G.elements))


def combo_as_function(space: Space, combo: LinearCombo) -> list:
    """sum_C mu_C chi_{-C}(pi(u)) for every u in U, as CycNums (enumeration order)."""
    PE = space.G.pi(space.G.elements)
    vals = [CycNum.zero(space.p) for _ in range(space.G.order)]
    for C, mu in combo.items():
        e = pair_exponents(space, space.ctx.neg(C.v)[None], PE)[0]
        for u in range(space.G.order):
            vals[u] = vals[u] + mu * CycNum.zeta(space.p, int(e[u]))
    return vals


# ---------------------------------------------------------------------------
# Situation: A core, (i,k) right main condition, kbar < j < k, x = x_ij(-lam / A_ik)

@dataclass(frozen=True)
class Situation:
    A: CharLabel
    i: int
    j: int
    k: int
    lam: int
    sigma: int

    @property
    def x(self) -> np.ndarray:
        S = self.A.space
        ctx = S.ctx
        beta = ctx.neg(ctx.mul(self.lam, ctx.inv(self.A[(self.i, self.k)])))
        return S.G.root(self.i, self.j, beta)

    @property
    def R(self) -> frozenset:
        return r_region(self.j, self.k, self.A.space.tp)

    @property
    def pivot(self):
        tp = self.A.space.tp
        return (tp.bar(self.k), tp.bar(self.j))

    @property
    def J(self) -> frozenset:
        R = self.R
        return frozenset(p for p in self.A.space.tp.pup if p not in R)

    @property
    def K(self) -> frozenset:
        return self.R - {self.pivot}


def situation(A: CharLabel, i: int, j: int, lam) -> Situation:
    from .orbits import classify

    S = A.space
    tp = S.tp
    cl = classify(A)
    if not cl.staircase or not cl.is_core:
        raise SituationError(f"{A} is not a staircase core")
    ks = [k for (r, k) in cl.rmc if r == i]
    if not ks:
        raise SituationError(f"row {i} has no right main condition in {A}")
    k = ks[0]
    if not (tp.bar(k) < j < k and i < j):
        raise SituationError(f"need kbar < j < k, got j={j}, k={k}")
    sigma = S.signs[(j, k)]
    return Situation(A, i, j, k, S.ctx.scalar(lam), sigma)


def situation_from_x(x, A: CharLabel) -> Situation:
    """Recover (i, j, lambda) from a single root element x = x_ij(beta)."""
    S = A.space
    c = S.G.to_coords(_mat(x))
    nz = np.nonzero(c)[0]
    if len(nz) != 1:
        raise SituationError("x must be a single non-identity root element")
    (i, j) = S.tp.pup[nz[0]]
    from .orbits import classify

    ks = [k for (r, k) in classify(A).rmc if r == i]
    if not ks:
        raise SituationError(f"row {i} has no right main condition in {A}")
    lam = S.ctx.neg(S.ctx.mul(int(c[nz[0]]), A[(i, ks[0])]))
    return situation(A, i, j, lam)


def aux3_coefficient(sit, A: CharLabel | None = None, C: CharLabel | None = None) -> CycNum:
    """Closed-form mu_C: Kronecker deltas off R_jk and at the pivot, times the mean of psi_K.

    Call as aux3_coefficient(situation, C) or aux3_coefficient(x, A, C).
    """
    if not isinstance(sit, Situation):
        sit = situation_from_x(sit, A)
    else:
        C = A if C is None else C
    S = sit.A.space
    ctx = S.ctx
    G = S.G
    A = sit.A
    for pos in sit.J:
        if C[pos] != A[pos]:
            return CycNum.zero(S.p)
    target = ctx.add(A[sit.pivot], ctx.mul(ctx.scalar(sit.sigma), sit.lam))
    if C[sit.pivot] != target:
        return CycNum.zero(S.p)
    # mean of psi_K over V_K; u is built from its pUP entries
    K = sorted(sit.K)
    idx = [S.tp.pup_index[p] for p in K]
    q = S.q
    X = np.zeros((q ** len(K), S.m), dtype=np.int64)
    if K:
        grid = np.array(np.meshgrid(*[np.arange(q)] * len(K), indexing="ij")).reshape(len(K), -1).T
        X[:, idx] = grid
    U = G.elements[G.index_of_key[G.vec_key(X)]]
    diff = ctx.sub(C.v, A.v)
    diffK = np.zeros(S.m, dtype=np.int64)
    diffK[idx] = diff[idx]
    e = pair_exponents(S, diffK[None], X)[0]
    j, k = sit.j, sit.k
    kb, jb = sit.pivot
    g = ctx.sub(U[:, j - 1, k - 1], ctx.mul(ctx.scalar(sit.sigma), U[:, kb - 1, jb - 1]))
    e = (e + S.texp(ctx.neg(ctx.mul(sit.lam, g)))) % S.p
    counts = exponent_counts(e[None], S.p)[0]
    return _cyc_from_counts(S.p, counts, len(X))
