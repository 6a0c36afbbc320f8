"""
Verge families, the hat map to ambient verge matrices, superclasses
1 + (U_N a A^ b) ∩ U, and the report tying orbit characters to them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .charspace import CharLabel, Space
from .field import CycNum
from .group import check_budget, identity, tilde_x
from .homtest import cached_gram, cached_table, character_inner
from .orbits import classify, orbit_partition


class NotAVerge(ValueError):
    pass


# ---------------------------------------------------------------------------
# families

@dataclass
class VergeFamily:
    verge: CharLabel
    orbits: list  # OrbitRecords, ordered by orbit index
    classes: list = field(default_factory=list)  # iso classes as lists of orbit indices

    @property
    def cores(self) -> list:
        return [O.base for O in self.orbits]

    @property
    def size(self) -> int:
        return sum(O.size for O in self.orbits)

    def counts(self) -> np.ndarray:
        """Exponent counts (|U|, p) of the family character."""
        X = cached_table(self.verge.space)
        return X[:, [O.index for O in self.orbits], :].sum(axis=1)

    def to_json(self) -> dict:
        S = self.verge.space
        P = orbit_partition(S)
        return {
            "verge": self.verge.to_string(),
            "size": self.size,
            "orbits": [{"core": O.base.to_string(), "size": O.size} for O in self.orbits],
            "iso_classes": [[P.records[k].base.to_string() for k in c] for c in self.classes],
        }


def left_region_size(A: CharLabel) -> int:
    """Number of pUP positions lying left of a main condition in its row."""
    mc = classify(A).mc
    return sum(1 for (i, j) in A.space.tp.pup if any(r == i and j < c for (r, c) in mc))


def verge_family(Averge: CharLabel, iso: bool = True) -> VergeFamily:
    cl = classify(Averge)
    if not (cl.staircase and cl.is_verge):
        raise NotAVerge(f"{Averge} is not a staircase verge")
    S = Averge.space
    P = orbit_partition(S)
    orbits = [O for O in P.records
              if O.classification.staircase and O.classification.is_core and O.classification.verge == Averge]
    fam = VergeFamily(Averge, orbits)
    if iso:
        fam.classes = iso_classes(S, [O.index for O in orbits])
    return fam


def iso_classes(space: Space, idx) -> list:
    """Group orbits whose characters are not orthogonal (union-find over the Gram matrix)."""
    Gm = cached_gram(space)
    parent = {k: k for k in idx}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for a in idx:
        for b in idx:
            if a < b and Gm[a, b]:
                ra, rb = find(a), find(b)
                parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for k in idx:
        groups.setdefault(find(k), []).append(k)
    return [sorted(g) for _, g in sorted(groups.items())]


def staircase_verges(space: Space) -> list:
    """Verges of all staircase orbits, ordered by key."""
    P = orbit_partition(space)
    seen = {}
    for O in P.records:
        cl = O.classification
        if cl.staircase:
            seen.setdefault(cl.verge.key, cl.verge)
    return [seen[k] for k in sorted(seen)]


# ---------------------------------------------------------------------------
# hat map

@dataclass
class HatResult:
    matrix: np.ndarray
    is_verge_matrix: bool


def is_verge_matrix(M) -> bool:
    M = np.asarray(M)
    nz = M != 0
    return bool((nz.sum(axis=0) <= 1).all() and (nz.sum(axis=1) <= 1).all())


def hat_verge(A: CharLabel, quadratic: bool = False) -> HatResult:
    """The ambient matrix A^ of a staircase verge; the verdict is the verge-matrix property.

    quadratic=True also places -1/2 a^2 at (i, ibar) for a type B center-column
    main condition, as in the root element x_{i,n+1}(a).
    """
    S = A.space
    tp, ctx = S.tp, S.ctx
    cl = classify(A)
    if not (cl.staircase and cl.is_verge):
        raise NotAVerge(f"{A} is not a staircase verge")
    N = tp.N
    M = np.zeros((N + 1, N + 1), dtype=np.int64)

    def put(i, j, v):
        M[i, j] = ctx.add(M[i, j], v)

    half = ctx.inv(ctx.from_int(2))
    for (i, j) in sorted(cl.mc):
        a = A[(i, j)]
        bi, bj = tp.bar(i), tp.bar(j)
        if tp.lie_type == "C":
            if j == bi:
                put(i, j, a)
            else:
                put(i, j, a)
                put(bj, bi, a if j > tp.n else ctx.neg(a))
        else:
            put(i, j, a)
            put(bj, bi, ctx.neg(a))
            if quadratic and tp.lie_type == "B" and j == tp.n + 1:
                put(i, bi, ctx.neg(ctx.mul(half, ctx.mul(a, a))))
    M = M[1:, 1:]
    return HatResult(M, is_verge_matrix(M))


# ---------------------------------------------------------------------------
# superclasses

def two_sided_verge(ctx, M) -> tuple:
    """The verge matrix in the two-sided U_N(q) orbit of a strictly upper triangular M.

    Rows are handled bottom-up: the leftmost entry of the lowest live row is a
    pivot; column operations clear its row to the right and row operations
    clear its column above.  Returned as a sorted tuple of ((i, j), value), 1-based.
    """
    M = np.array(M, dtype=np.int64)
    N = M.shape[0]
    out = []
    for i in range(N - 1, -1, -1):
        nz = np.nonzero(M[i])[0]
        if len(nz) == 0:
            continue
        j = int(nz[0])
        piv = int(M[i, j])
        pinv = ctx.inv(piv)
        for l in nz[1:]:
            f = ctx.mul(int(M[i, l]), pinv)
            M[:, l] = ctx.sub(M[:, l], ctx.mul(M[:, j], f))
        for k in np.nonzero(M[:i, j])[0]:
            f = ctx.mul(int(M[k, j]), pinv)
            M[k] = ctx.sub(M[k], ctx.mul(M[i], f))
        out.append(((i + 1, j + 1), piv))
    return tuple(sorted(out))


def _verge_key(M) -> tuple:
    M = np.asarray(M)
    return tuple(((int(i) + 1, int(j) + 1), int(M[i, j])) for i, j in zip(*np.nonzero(M)))


def superclass_map(space: Space) -> list:
    """For each u in U (enumeration order), the verge of the two-sided orbit of u - 1."""
    cache = space.__dict__.get("_scmap")
    if cache is None:
        G = space.G
        ctx = space.ctx
        check_budget(G.order, "superclass map")
        one = identity(ctx, G.N)
        cache = [two_sided_verge(ctx, ctx.sub(E, one)) for E in G.elements]
        space._scmap = cache
    return cache


def superclass(A: CharLabel, quadratic: bool = False) -> np.ndarray:
    """Indices of u in U with u - 1 in the two-sided U_N(q) orbit of A^."""
    H = hat_verge(A, quadratic)
    if not H.is_verge_matrix:
        raise ValueError(f"{A} is not main separated; A^ is not a verge matrix")
    key = _verge_key(H.matrix)
    return np.array([k for k, v in enumerate(superclass_map(A.space)) if v == key], dtype=np.int64)


def superclass_closure(A: CharLabel, quadratic: bool = False) -> np.ndarray:
    """Naive cross-check: close A^ under x~ M and M x~ for all root elements of U_N(q)."""
    S = A.space
    ctx, G = S.ctx, S.G
    N = G.N
    H = hat_verge(A, quadratic).matrix
    gens = [tilde_x(ctx, N, i, j, a) for i in range(1, N + 1) for j in range(i + 1, N + 1)
            for a in range(1, S.q)]
    seen = {H.tobytes(): H}
    frontier = [H]
    while frontier:
        nxt = []
        for M in frontier:
            for g in gens:
                for P in (ctx.matmul(g, M), ctx.matmul(M, g)):
                    b = P.tobytes()
                    if b not in seen:
                        seen[b] = P
                        nxt.append(P)
        check_budget(len(seen), "superclass closure")
        frontier = nxt
    one = identity(ctx, N)
    cands = np.array([ctx.add(M, one) for M in seen.values()], dtype=np.int64)
    idx = G.index(cands)
    ok = (G.elements[idx] == cands).all(axis=(1, 2))
    return np.unique(idx[ok])


# ---------------------------------------------------------------------------
# the report

def _cyc_json(p, counts):
    return CycNum.from_exponent_counts(p, counts).to_json()


@dataclass
class SupercharReport:
    data: dict
    ok: bool
    failures: list


def superchar_report(space: Space, workers: int = 1) -> SupercharReport:
    tp = space.tp
    G = space.G
    cached_gram(space, workers)
    asserted = tp.lie_type in ("B", "D")
    verges = [V for V in staircase_verges(space) if classify(V).main_separated]
    fams = [verge_family(V) for V in verges]
    classes = [superclass(V) for V in verges]
    failures = []
    # disjointness
    owner = np.full(G.order, -1, dtype=np.int64)
    for k, C in enumerate(classes):
        if (owner[C] >= 0).any():
            failures.append({"check": "disjoint", "verge": verges[k].to_string()})
        owner[C] = k
    # constancy
    tables = [F.counts() for F in fams]
    const = []
    for fk, T in enumerate(tables):
        row = []
        for ck, C in enumerate(classes):
            vals = T[C]
            same = bool((vals == vals[:1]).all())
            row.append(same)
            if not same:
                failures.append({"check": "constant", "family": verges[fk].to_string(),
                                 "superclass": verges[ck].to_string()})
        const.append(row)
    # orthogonality between families
    Gm = cached_gram(space)
    nf = len(fams)
    orth = np.zeros((nf, nf), dtype=np.int64)
    for a in range(nf):
        ia = [O.index for O in fams[a].orbits]
        for b in range(nf):
            ib = [O.index for O in fams[b].orbits]
            orth[a, b] = int(Gm[np.ix_(ia, ib)].sum())
            if a != b and orth[a, b]:
                failures.append({"check": "orthogonal", "families": [verges[a].to_string(), verges[b].to_string()]})
    fam_json = []
    for k, F in enumerate(fams):
        d = F.to_json()
        d["hat"] = [[space.ctx.to_json(int(x)) for x in r] for r in hat_verge(verges[k]).matrix]
        d["superclass_size"] = int(len(classes[k]))
        d["values"] = [_cyc_json(space.p, tables[k][C[0]]) for C in classes]
        d["norm"] = int(orth[k, k])
        fam_json.append(d)
    covered = int((owner >= 0).sum())
    status = "asserted" if asserted else "conjectural"
    ok = not failures if asserted else True
    data = {
        "type": str(tp),
        "q": space.q,
        "status": status,
        "families": fam_json,
        "orthogonality": orth.tolist(),
        "constant": const,
        "covered": covered,
        "order": int(G.order),
        "failures": failures,
    }
    return SupercharReport(data, ok, failures)


def family_inner(space: Space, F1: VergeFamily, F2: VergeFamily) -> int:
    return character_inner(space, F1.counts(), F2.counts())

