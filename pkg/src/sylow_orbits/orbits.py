"""
Orbits of the right action of U on the labels, and the position data that
classifies them: main, minor and supplementary conditions, core, verge,
places, the staircase and main-separated flags, and M(A).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .action import RightMap, lambda_expand, left_monomial
from .charspace import CharLabel, Space
from .geometry import limb, limb_circ, prec_key, prec_max, positions_json
from .group import check_budget

SUPPL_PARSES = ("conjunctive", "disjunctive")


@dataclass(frozen=True)
class Classification:
    mc: frozenset
    lmc: frozenset
    rmc: frozenset
    minc: frozenset
    suppl: frozenset
    core_set: frozenset
    verge: CharLabel
    places: frozenset
    limb: frozenset
    J: frozenset
    staircase: bool
    main_separated: bool
    is_core: bool
    is_verge: bool

    def to_json(self) -> dict:
        return {
            "mc": positions_json(self.mc),
            "lmc": positions_json(self.lmc),
            "rmc": positions_json(self.rmc),
            "minc": positions_json(self.minc),
            "suppl": positions_json(self.suppl),
            "core": positions_json(self.core_set),
            "places": positions_json(self.places),
            "limb": positions_json(self.limb),
            "verge": self.verge.to_string(),
            "staircase": self.staircase,
            "main_separated": self.main_separated,
            "is_core": self.is_core,
            "is_verge": self.is_verge,
        }


def main_conditions(A: CharLabel) -> frozenset:
    last = {}
    for (i, j) in sorted(A.supp()):
        last[i] = j
    return frozenset(last.items())


def suppl_positions(tp, mc, lmc, minc, parse: str = "conjunctive") -> frozenset:
    """Supplementary conditions determined by the main conditions.

    conjunctive: in tril, same column as a minor condition and left of a minor
    or left main condition in its row.  disjunctive: left of a minor condition,
    or left of a left main condition while sharing a column with a minor one.
    """
    if parse not in SUPPL_PARSES:
        raise ValueError(f"unknown suppl parse {parse!r}")
    minor_cols = {b for (_, b) in minc}
    out = set()
    for (a, b) in tp.regions["tril"]:
        if (a, b) in mc or (a, b) in minc:
            continue
        left_minor = any(r == a and c > b for (r, c) in minc)
        left_lmc = any(r == a and c > b for (r, c) in lmc)
        same_col = b in minor_cols
        if parse == "conjunctive":
            ok = same_col and (left_minor or left_lmc)
        else:
            ok = left_minor or (left_lmc and same_col)
        if ok:
            out.add((a, b))
    return frozenset(out)


def classify_main(space: Space, mc, parse: str = "conjunctive") -> dict:
    """All position data that depends only on the main conditions."""
    tp = space.tp
    mc = frozenset(mc)
    lmc = frozenset(p for p in mc if tp.in_("tril", p))
    rmc = frozenset(p for p in mc if tp.in_("trir", p))
    minc = frozenset((i, tp.bar(j)) for (i, j) in rmc)
    suppl = suppl_positions(tp, mc, lmc, minc, parse)
    core = mc | suppl if tp.lie_type == "C" else mc | minc | suppl
    core = frozenset(p for p in core if tp.in_("pUP", p))
    places = frozenset(
        (a, b) for (a, b) in tp.pup if (a, b) not in core and any(r == a and c > b for (r, c) in mc)
    )
    cols = [j for (_, j) in mc]
    staircase = len(cols) == len(set(cols))
    L, J = limb(mc, tp)
    sep = staircase and not (L & mc)
    return dict(mc=mc, lmc=lmc, rmc=rmc, minc=minc, suppl=suppl, core_set=core, places=places,
                limb=L, J=J, staircase=staircase, main_separated=sep)


def classify(A: CharLabel, parse: str = "conjunctive") -> Classification:
    if parse == "conjunctive" and A._cls is not None:
        return A._cls
    d = classify_main(A.space, main_conditions(A), parse)
    verge = CharLabel(A.space, {p: A[p] for p in d["mc"]})
    supp = A.supp()
    cls = Classification(
        verge=verge,
        is_core=d["mc"] <= supp <= d["core_set"],
        is_verge=(verge == A),
        **d,
    )
    if parse == "conjunctive":
        A._cls = cls
    return cls


def m_max(A: CharLabel):
    """The precede-maximum of Limb°(A) ∩ mc(A), or None when A is main separated."""
    cl = classify(A)
    if cl.main_separated:
        return None
    return prec_max(limb_circ(cl.mc, A.space.tp) & cl.mc)


# ---------------------------------------------------------------------------
# orbit enumeration

def generator_maps(space: Space) -> list:
    cache = space.__dict__.setdefault("_genmaps", None)
    if cache is None:
        G = space.G
        cache = []
        for (i, j) in space.tp.pup:
            for a in range(1, space.q):
                cache.append(((i, j), a, RightMap(space, G.root(i, j, a))))
        space._genmaps = cache
    return cache


@dataclass
class OrbitRecord:
    base: CharLabel
    members: np.ndarray  # sorted keys
    classification: Classification
    index: int = -1

    @property
    def size(self) -> int:
        return len(self.members)

    def member_labels(self):
        S = self.base.space
        return [CharLabel(S, v) for v in S.G.key_to_vec(self.members)]

    def to_json(self, members: bool = False) -> dict:
        cl = self.classification
        out = {
            "base": self.base.to_string(),
            "size": self.size,
            "mc": positions_json(cl.mc),
            "flags": {
                "staircase": cl.staircase,
                "main_separated": cl.main_separated,
                "core": cl.is_core,
                "verge": cl.is_verge,
            },
            "verge": cl.verge.to_string(),
            "places": positions_json(cl.places),
        }
        if members:
            out["members"] = [L.to_string() for L in self.member_labels()]
        return out


def _canonical_base(space: Space, keys: np.ndarray) -> CharLabel:
    labels = [CharLabel(space, v) for v in space.G.key_to_vec(keys)]
    cores = [L for L in labels if classify(L).staircase and classify(L).is_core]
    if cores:
        return min(cores, key=lambda L: L.key)
    return min(labels, key=lambda L: L.key)


def enumerate_orbit(A: CharLabel, limit: int | None = None) -> OrbitRecord:
    """Breadth-first closure of {[A]} under all root elements x_ij(alpha)."""
    S = A.space
    gens = generator_maps(S)
    seen = {A.key}
    frontier = A.v[None]
    G = S.G
    while len(frontier):
        new = []
        for _, _, R in gens:
            img = R.labels(frontier)
            for v, k in zip(img, G.vec_key(img)):
                k = int(k)
                if k not in seen:
                    seen.add(k)
                    new.append(v)
        if limit is not None and len(seen) > limit:
            check_budget(len(seen), "orbit enumeration")
        check_budget(len(seen), "orbit enumeration")
        frontier = np.array(new, dtype=np.int64).reshape(-1, S.m)
    keys = np.array(sorted(seen), dtype=np.int64)
    base = _canonical_base(S, keys)
    return OrbitRecord(base, keys, classify(base))


class OrbitPartition:
    """All U-orbits on V^, computed with connected components over generator edges."""

    def __init__(self, space: Space):
        self.space = space
        G = space.G
        check_budget(G.order, "orbit partition")
        V = space.all_label_vectors()
        n = len(V)
        rows, cols = [], []
        src = np.arange(n)
        for _, a, R in generator_maps(space):
            if space.ctx.k == 1 and a != 1:
                continue  # x(a) = x(1)^a on a prime field
            rows.append(src)
            cols.append(G.vec_key(R.labels(V)))
        rows = np.concatenate(rows) if rows else src
        cols = np.concatenate(cols) if cols else src
        graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
        _, comp = connected_components(graph, directed=True, connection="weak")
        # relabel components by their smallest member so the numbering is canonical
        first = np.full(comp.max() + 1, n, dtype=np.int64)
        np.minimum.at(first, comp, src)
        order = np.argsort(first, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(len(order))
        self.orbit_of = rank[comp]
        self.n_orbits = len(order)
        sort = np.argsort(self.orbit_of, kind="stable")
        bounds = np.searchsorted(self.orbit_of[sort], np.arange(self.n_orbits + 1))
        self._members = [sort[bounds[k]:bounds[k + 1]] for k in range(self.n_orbits)]

    def members(self, k: int) -> np.ndarray:
        return self._members[k]

    @cached_property
    def records(self) -> list:
        out = []
        for k in range(self.n_orbits):
            keys = self._members[k]
            base = _canonical_base(self.space, keys)
            out.append(OrbitRecord(base, keys, classify(base), index=k))
        return out

    def orbit_of_label(self, A: CharLabel) -> OrbitRecord:
        return self.records[int(self.orbit_of[A.key])]

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(m) for m in self._members], dtype=np.int64)


def orbit_partition(space: Space) -> OrbitPartition:
    P = space.__dict__.get("_partition")
    if P is None:
        P = OrbitPartition(space)
        space._partition = P
    return P


def is_power_of(n: int, q: int) -> bool:
    while n % q == 0 and n > 1:
        n //= q
    return n == 1


# ---------------------------------------------------------------------------
# the separation step

class NotApplicable(ValueError):
    pass


def straighten(A: CharLabel):
    """Make A staircase by left row operations that act monomially.

    Returns (u, exponent, C) with u[A] = zeta^exponent [C] and C staircase.
    """
    S = A.space
    G = S.G
    u_total = np.eye(S.tp.N, dtype=np.int64)
    exp_total = 0
    C = A
    for _ in range(S.m + 1):
        cl = classify(C)
        if cl.staircase:
            return u_total, exp_total % S.p, C
        bycol = {}
        for (r, c) in sorted(cl.mc):
            bycol.setdefault(c, []).append(r)
        col = min(c for c, rs in bycol.items() if len(rs) > 1)
        k, i = bycol[col][0], bycol[col][1]
        gamma = S.ctx.mul(C[(i, col)], S.ctx.inv(C[(k, col)]))
        u = G.root(k, i, gamma)
        res = left_monomial(u, C)
        exp_total += res.exponent
        C = res.label
        u_total = S.ctx.matmul(u, u_total)
    raise AssertionError("straightening did not terminate")


def orbit_core(A: CharLabel) -> CharLabel:
    """The core label in the orbit of a staircase A."""
    P = orbit_partition(A.space)
    return P.orbit_of_label(A).base


def separation_step(A: CharLabel):
    """One reduction step: returns (x, lambda_x [A']) for the staircase core A' of A.

    Every label with a nonzero coefficient is main separated or has a strictly
    smaller M.
    """
    S = A.space
    cl = classify(A)
    if cl.main_separated:
        raise NotApplicable(f"{A} is already main separated")
    if not cl.staircase:
        _, _, A = straighten(A)
        if classify(A).main_separated:
            raise NotApplicable("straightening produced a main separated label")
    if not classify(A).is_core:
        A = orbit_core(A)
    cl = classify(A)
    M = m_max(A)
    kb, jb = M
    tp = S.tp
    k, j = tp.bar(kb), tp.bar(jb)
    rows = [r for (r, c) in cl.rmc if c == k]
    if not rows:
        raise AssertionError(f"M(A) = {M} is not on the arm of a right main condition")
    i = rows[0]
    sigma = S.signs[(j, k)]
    lam = S.ctx.neg(S.ctx.mul(S.ctx.scalar(sigma), A[M]))
    beta = S.ctx.neg(S.ctx.mul(lam, S.ctx.inv(A[(i, k)])))
    x = S.G.root(i, j, beta)
    combo = lambda_expand(x, A)
    for C in combo:
        Mc = m_max(C)
        if Mc is not None and not prec_key(Mc) < prec_key(M):
            raise AssertionError(f"separation step failed: M({C}) = {Mc} does not precede {M}")
    return x, combo, A


def zero_row_check(O: OrbitRecord) -> bool:
    """Rows i whose mirror column carries a main condition (k, ibar), k < i, vanish on the orbit.

    Only meaningful for main separated bases; other orbits can fail it.
    """
    S = O.base.space
    tp = S.tp
    cl = O.classification
    rows = [i for i in range(1, tp.ntil) if any(c == tp.bar(i) and k < i for (k, c) in cl.mc)]
    if not rows:
        return True
    V = S.G.key_to_vec(O.members)
    idx = [k for k, (i, _) in enumerate(tp.pup) if i in rows]
    return not (V[:, idx] != 0).any()
