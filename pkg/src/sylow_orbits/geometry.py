"""
Position combinatorics for the unitriangular models of types B, C and D.

Positions are 1-based pairs (i, j).  Every region is materialized once per
TypeParams as a sorted tuple plus an N x N boolean mask for O(1) membership.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

Position = tuple  # (i, j), 1-based

REGION_NAMES = ("UR", "UP", "CC", "RP", "pUP", "tril", "trir", "KL", "pKL", "diag")


def mirror(i: int, N: int) -> int:
    if not 1 <= i <= N:
        raise ValueError(f"index {i} outside 1..{N}")
    return N + 1 - i


@dataclass(frozen=True)
class TypeParams:
    lie_type: str
    n: int

    def __post_init__(self):
        t = self.lie_type.upper()
        object.__setattr__(self, "lie_type", t)
        if t not in ("B", "C", "D"):
            raise ValueError(f"unknown Lie type {self.lie_type!r}")
        lo = 2 if t == "D" else 1
        if self.n < lo:
            raise ValueError(f"rank n must be >= {lo} for type {t}")

    @property
    def N(self) -> int:
        return 2 * self.n + 1 if self.lie_type == "B" else 2 * self.n

    @property
    def ntil(self) -> int:
        """Center column: n+1 for B, n otherwise."""
        return self.n + 1 if self.lie_type == "B" else self.n

    @property
    def eps(self) -> int:
        return -1 if self.lie_type == "C" else 1

    def bar(self, i: int) -> int:
        return mirror(i, self.N)

    def itil(self, i: int) -> int:
        """Last column of row i inside pUP."""
        return self.bar(i) if self.lie_type == "C" else self.bar(i) - 1

    def __str__(self):
        return f"{self.lie_type}_{self.n}"

    # -- regions ------------------------------------------------------------

    def region(self, name: str, i: int, j: int) -> bool:
        N = self.N
        if not (1 <= i <= N and 1 <= j <= N):
            return False
        bi = N + 1 - i
        if name == "diag":
            return i == j
        if name == "UR":
            return i < j
        if name == "UP":
            return i < j < bi
        if name == "CC":
            return i < j and j == bi
        if name == "RP":
            return N + 1 - j < i < j
        if name == "pUP":
            return i < j < bi or (self.lie_type == "C" and i < j == bi)
        if name == "tril":
            return self.region("pUP", i, j) and j <= self.ntil
        if name == "trir":
            return self.region("pUP", i, j) and j > self.ntil
        if name == "KL":
            return j < bi
        if name == "pKL":
            return j < bi or (self.lie_type == "C" and i < j == bi)
        raise KeyError(name)

    @cached_property
    def masks(self) -> dict:
        N = self.N
        out = {}
        for name in REGION_NAMES:
            m = np.zeros((N + 1, N + 1), dtype=bool)
            for i in range(1, N + 1):
                for j in range(1, N + 1):
                    m[i, j] = self.region(name, i, j)
            m.setflags(write=False)
            out[name] = m
        return out

    def mask0(self, name: str) -> np.ndarray:
        """0-based N x N mask of a region."""
        return self.masks[name][1:, 1:]

    @cached_property
    def regions(self) -> dict:
        return {
            name: tuple(sorted(zip(*map(lambda a: (a + 1).tolist(), np.nonzero(self.mask0(name))))))
            for name in REGION_NAMES
        }

    @cached_property
    def pup(self) -> tuple:
        return self.regions["pUP"]

    @cached_property
    def pup_index(self) -> dict:
        return {pos: k for k, pos in enumerate(self.pup)}

    def in_(self, name: str, pos) -> bool:
        i, j = pos
        return bool(self.masks[name][i, j]) if 1 <= i <= self.N and 1 <= j <= self.N else False


def region_sets(tp: TypeParams) -> dict:
    """Named family {UP, CC, RP, pUP, tril, trir, KL, pKL} (plus UR, diag)."""
    return {k: frozenset(v) for k, v in tp.regions.items()}


def is_closed(J, tp: TypeParams, type_a: bool = False) -> bool:
    J = set(J)
    for (i, j) in J:
        for (j2, k) in J:
            if j2 == j and (i, k) not in J:
                return False
    if type_a:
        return True
    N = tp.N
    for (i, j) in J:
        for (a, b) in J:
            # (a, b) = (kbar, jbar) means b == jbar and k = abar
            if b != N + 1 - j:
                continue
            k = N + 1 - a
            if tp.in_("pUP", (i, k)) and (i, k) not in J:
                return False
    return True


def arm(pos, tp: TypeParams) -> frozenset:
    _, j = pos
    r = tp.bar(j)
    return frozenset((r, a) for a in range(1, tp.N + 1) if tp.in_("UP", (r, a)))


def leg(pos, tp: TypeParams) -> frozenset:
    i, j = pos
    return frozenset((a, j) for a in range(i + 1, tp.N + 1) if tp.in_("UP", (a, j)))


def limb_circ(main, tp: TypeParams) -> frozenset:
    out = set()
    for pos in main:
        out |= arm(pos, tp) | leg(pos, tp)
    return frozenset(out)


def limb(main, tp: TypeParams):
    """(Limb, J) where J = pUP minus Limb; arms and legs of the main conditions."""
    L = set(limb_circ(main, tp))
    if tp.lie_type == "C":
        for (i, j) in main:
            if j > tp.ntil and tp.in_("UP", (i, j)):
                L.add((tp.bar(j), j))
    L = frozenset(L)
    J = frozenset(p for p in tp.pup if p not in L)
    return L, J


def r_region(r: int, s: int, tp: TypeParams) -> frozenset:
    if not tp.in_("RP", (r, s)):
        raise ValueError(f"({r},{s}) is not in RP")
    sb, rb = tp.bar(s), tp.bar(r)
    return frozenset((i, j) for (i, j) in tp.pup if sb <= i <= r and j <= rb)


def i_sets(main, N: int | None = None):
    """(I°_d, I_d, I) for a staircase main-condition set; all inside UR."""
    main = sorted(main)
    rows = {i: a for (i, a) in main}
    Io, Id, I = set(), set(), set()
    for i, a in rows.items():
        for j, b in rows.items():
            if i >= j:
                continue
            if a < b:
                I.add((i, j))
                if i < a <= j < b:
                    Id.add((i, j))
                    if a < j:
                        Io.add((i, j))
    return frozenset(Io), frozenset(Id), frozenset(I)


def precede(p1, p2) -> bool:
    """(i,j) precedes (k,l) iff i > k, or i == k and j <= l."""
    (i, j), (k, l) = p1, p2
    return i > k or (i == k and j <= l)


def prec_key(pos):
    """Sort key realizing the precede order (smallest first)."""
    return (-pos[0], pos[1])


def prec_max(positions):
    positions = list(positions)
    return max(positions, key=prec_key) if positions else None


def sorted_positions(S) -> list:
    return sorted((int(i), int(j)) for i, j in S)


def positions_json(S) -> list:
    return [[i, j] for i, j in sorted_positions(S)]


def staircase_main_sets(tp: TypeParams):
    """All main-condition sets with at most one position per row and pairwise distinct columns."""
    rows = {}
    for (i, j) in tp.pup:
        rows.setdefault(i, []).append((i, j))
    rowlist = sorted(rows)

    def rec(k, used, acc):
        if k == len(rowlist):
            yield frozenset(acc)
            return
        yield from rec(k + 1, used, acc)
        for pos in rows[rowlist[k]]:
            if pos[1] not in used:
                yield from rec(k + 1, used | {pos[1]}, acc + [pos])

    yield from rec(0, frozenset(), [])
