"""
Verification suites.  Each suite returns a transcript: a list of checks with
their inputs and exact values, plus an overall verdict.  Transcripts contain no
timings and are emitted in canonical JSON, so they are byte-stable across runs
and worker counts.
"""

from __future__ import annotations

import json

import numpy as np

from .action import lambda_expand, situation
from .charspace import CharLabel, Space
from .field import CycNum
from .geometry import staircase_main_sets
from .homtest import (cached_gram, double_cosets_direct, double_coset_reps, find_g_main3,
                      hom_criterion, mackey_hom_dim, psi_agree, stab_of)
from .orbits import (SUPPL_PARSES, classify, is_power_of, main_conditions, orbit_partition,
                     separation_step)
from .stabilizer import brute_stabilizer, row_stab, row_stab_elements
from .supercharacters import hat_verge, staircase_verges, superchar_report, superclass, superclass_closure

SUITES = ("bijection", "cocycle", "partition", "stab", "aux3", "main1", "main3", "gram", "mackey", "superchar")

RANDOM_PAIRS = 100_000
SEED = 20240611


class Transcript:
    def __init__(self, suite: str, space: Space):
        self.suite = suite
        self.space = space
        self.checks = []

    def check(self, name: str, ok: bool, asserted: bool = True, **data):
        self.checks.append({"name": name, "pass": bool(ok), "asserted": asserted, **data})
        return ok

    @property
    def ok(self) -> bool:
        return all(c["pass"] for c in self.checks if c["asserted"])

    def to_json(self) -> dict:
        S = self.space
        return {
            "suite": self.suite,
            "config": {"type": S.tp.lie_type, "n": S.tp.n, "p": S.p, "k": S.ctx.k, "theta_scale": S.c},
            "pass": self.ok,
            "checks": self.checks,
        }


def emit_json(obj) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, CycNum):
        return x.to_json()
    raise TypeError(f"not serializable: {type(x)}")


def emit_csv(matrix, labels) -> str:
    """Square integer matrix with row/column keys, one row per line."""
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    labels = [lab or "0" for lab in labels]
    w.writerow([""] + labels)
    for lab, row in zip(labels, np.asarray(matrix).tolist()):
        w.writerow([lab] + row)
    return buf.getvalue()


# ---------------------------------------------------------------------------

def suite_bijection(S: Space, **_) -> Transcript:
    T = Transcript("bijection", S)
    G = S.G
    T.check("order", G.order == S.q ** S.m, order=int(G.order), expected=S.q ** S.m, pup=len(S.tp.pup))
    C = G.all_coords()
    E = G.elements
    back = np.concatenate([G.to_coords(E[s:s + 4096]) for s in range(0, len(E), 4096)])
    T.check("to_coords(from_coords(c)) = c", bool((back == C).all()), n=int(len(C)))
    T.check("pi is a bijection", len(np.unique(G.keys)) == G.order)
    T.check("elements lie in U", bool(G.contains(E[: min(len(E), 2048)])), sampled=int(min(len(E), 2048)))
    return T


def suite_cocycle(S: Space, **_) -> Transcript:
    T = Transcript("cocycle", S)
    G = S.G
    ctx = S.ctx
    E = G.elements
    if G.order ** 2 <= 1 << 20:
        a, b = np.divmod(np.arange(G.order ** 2), G.order)
        mode = "exhaustive"
    else:
        rng = np.random.default_rng(SEED)
        a = rng.integers(0, G.order, RANDOM_PAIRS)
        b = rng.integers(0, G.order, RANDOM_PAIRS)
        mode = "random"
    bad, step = 0, 1 << 14
    for s in range(0, len(a), step):
        g, h = E[a[s:s + step]], E[b[s:s + step]]
        lhs = G.pi(ctx.matmul(g, h))
        rhs = ctx.add(G.pi(ctx.matmul(G.unpi(G.pi(g)), h)), G.pi(h))
        bad += int((lhs != rhs).any(axis=1).sum())
    T.check("f(gh) = f(g).h + f(h)", bad == 0, mode=mode, pairs=int(len(a)), failures=bad)
    return T


def suite_partition(S: Space, suppl_parse: str = "conjunctive", **_) -> Transcript:
    T = Transcript("partition", S)
    P = orbit_partition(S)
    sizes = P.sizes
    T.check("sum of orbit sizes", int(sizes.sum()) == S.q ** S.m, total=int(sizes.sum()), orbits=int(P.n_orbits))
    T.check("orbit sizes are powers of q", all(is_power_of(int(s), S.q) for s in sizes),
            histogram={str(k): int(v) for k, v in zip(*np.unique(sizes, return_counts=True))})
    bad_mc = []
    for O in P.records:
        mcs = {main_conditions(L) for L in O.member_labels()}
        if len(mcs) != 1:
            bad_mc.append(O.base.to_string())
    T.check("mc constant on orbits", not bad_mc, failures=bad_mc[:10])
    bad_law, stair = [], 0
    for O in P.records:
        cl = classify(O.base, suppl_parse)
        if cl.staircase:
            stair += 1
            if O.size != S.q ** len(cl.places):
                bad_law.append({"base": O.base.to_string(), "size": O.size, "places": len(cl.places)})
    T.check("orbit size = q^|places| on staircase orbits", not bad_law, staircase_orbits=stair,
            suppl_parse=suppl_parse, failures=bad_law[:10])
    cores = [O for O in P.records if O.classification.staircase]
    one_core = all(sum(1 for L in O.member_labels() if classify(L).is_core) == 1 for O in cores)
    T.check("one core per staircase orbit", one_core)
    return T


def _row_product_indices(A: CharLabel) -> np.ndarray:
    S = A.space
    W = np.eye(S.tp.N, dtype=np.int64)[None]
    for i in range(1, S.tp.n + 1):
        R = row_stab_elements(A, row_stab(A, i))
        W = S.ctx.matmul(W[:, None], R[None]).reshape(-1, S.tp.N, S.tp.N)
    return np.unique(S.G.index(W))


def stab_failures(S: Space, parse: str) -> dict:
    """Row-product vs brute-force stabilizers on every staircase core under a parse,
    together with the core-uniqueness and orbit-size checks that the parse drives."""
    P = orbit_partition(S)
    fails, per_orbit = [], {}
    for v in S.all_label_vectors():
        A = CharLabel(S, v)
        cl = classify(A, parse)
        if not (cl.staircase and cl.is_core):
            continue
        per_orbit[int(P.orbit_of[A.key])] = per_orbit.get(int(P.orbit_of[A.key]), 0) + 1
        rp = _row_product_indices(A)
        br = brute_stabilizer(A)
        exp = S.q ** len(cl.J)
        if not (np.array_equal(rp, br) and len(br) == exp):
            fails.append({"label": A.to_string(), "row_product": int(len(rp)), "brute": int(len(br)), "expected": exp})
    stair = [O for O in P.records if O.classification.staircase]
    multi = [O.base.to_string() for O in stair if per_orbit.get(O.index, 0) != 1]
    law = [O.base.to_string() for O in stair if O.size != S.q ** len(classify(O.base, parse).places)]
    return {"cores": sum(per_orbit.values()), "staircase_orbits": len(stair),
            "stab_failures": fails[:10], "orbits_without_unique_core": multi[:10], "size_law_failures": law[:10],
            "ok": not (fails or multi or law)}


def suite_stab(S: Space, suppl_parse: str = "conjunctive", **_) -> Transcript:
    T = Transcript("stab", S)
    passing = []
    for parse in SUPPL_PARSES:
        res = stab_failures(S, parse)
        ok = res.pop("ok")
        if ok:
            passing.append(parse)
        T.check(f"stabilizers ({parse} parse)", ok, asserted=(parse == suppl_parse), **res)
    T.check("passing parses", suppl_parse in passing, asserted=False, parses=passing)
    return T


def _first_situation(A: CharLabel):
    cl = classify(A)
    tp = A.space.tp
    for (i, k) in sorted(cl.rmc):
        for j in range(i + 1, k):
            if tp.bar(k) < j and (i, j) in tp.pup_index:
                return i, j
    return None


def suite_aux3(S: Space, **_) -> Transcript:
    from .action import aux3_coefficient

    T = Transcript("aux3", S)
    P = orbit_partition(S)
    zero = CycNum.zero(S.p)
    inst, fails = 0, []
    labels = [CharLabel(S, v) for v in S.all_label_vectors()]
    for O in P.records:
        A = O.base
        cl = O.classification
        if not (cl.staircase and cl.is_core):
            continue
        ij = _first_situation(A)
        if ij is None:
            continue
        sit = situation(A, ij[0], ij[1], 1)
        inst += 1
        combo = lambda_expand(sit.x, A)
        for C in labels:
            if aux3_coefficient(sit, C) != combo.get(C, zero):
                fails.append({"A": A.to_string(), "i": ij[0], "j": ij[1], "C": C.to_string()})
                break
    T.check("closed form = expansion for all C", not fails, instances=inst, failures=fails[:10])
    return T


def suite_main1(S: Space, workers: int = 1, **_) -> Transcript:
    T = Transcript("main1", S)
    P = orbit_partition(S)
    Gm = cached_gram(S, workers)
    ms = [O.index for O in P.records if O.classification.main_separated]
    lonely = [O.base.to_string() for O in P.records if not (Gm[O.index, ms] > 0).any()]
    asserted = S.tp.lie_type in ("B", "D")
    T.check("every orbit meets a main separated orbit", not lonely, asserted=asserted,
            orbits=int(P.n_orbits), main_separated=len(ms), failures=lonely[:10])
    steps, bad = 0, []
    for O in P.records:
        cl = O.classification
        if cl.staircase and cl.is_core and not cl.main_separated:
            try:
                separation_step(O.base)
                steps += 1
            except AssertionError as e:
                bad.append({"A": O.base.to_string(), "error": str(e)})
    T.check("separation step lowers M", not bad, asserted=asserted, steps=steps, failures=bad[:10])
    return T


def main3_pairs(S: Space) -> list:
    P = orbit_partition(S)
    up = set(S.tp.regions["UP"])
    return [O for O in P.records
            if O.classification.main_separated and O.classification.is_core and O.base.supp() <= up]


def suite_main3(S: Space, workers: int = 1, **_) -> Transcript:
    T = Transcript("main3", S)
    Gm = cached_gram(S, workers)
    ms = main3_pairs(S)
    tri, crit, hc, mk = [], [], [], []
    for O1 in ms:
        A = O1.base
        for O2 in ms:
            B = O2.base
            ip = int(Gm[O1.index, O2.index])
            if ip not in (0, int(Gm[O1.index, O1.index])):
                tri.append([A.to_string(), B.to_string(), ip])
            pa = psi_agree(A, B)
            ok_g = find_g_main3(A, B).ok if pa else False
            if not (pa == ok_g == (ip != 0)):
                crit.append([A.to_string(), B.to_string(), ip, pa, ok_g])
            if hom_criterion(A, B) != (ip != 0):
                hc.append([A.to_string(), B.to_string(), ip])
            d = mackey_hom_dim(A, B)
            if d != ip:
                mk.append([A.to_string(), B.to_string(), ip, d])
    n = len(ms) ** 2
    T.check("inner product in {0, self-norm}", not tri, pairs=n, failures=tri[:10])
    T.check("nonzero <=> psi_agree <=> find_g succeeds", not crit, pairs=n, failures=crit[:10])
    T.check("nonzero <=> some orbit member agrees", not hc, pairs=n, failures=hc[:10])
    T.check("mackey = inner product", not mk, pairs=n, failures=mk[:10])
    if S.tp.lie_type == "C":
        P = orbit_partition(S)
        anti = [O for O in P.records if O.classification.main_separated and O.classification.is_core
                and any(j == S.tp.bar(i) for (i, j) in O.classification.mc)]
        agree = sum(1 for O1 in anti for O2 in anti
                    if psi_agree(O1.base, O2.base) == bool(Gm[O1.index, O2.index]))
        T.check("anti-diagonal pairs: psi_agree matches oracle (conjectural)", agree == len(anti) ** 2,
                asserted=False, pairs=len(anti) ** 2, agreeing=agree)
    return T


def suite_gram(S: Space, workers: int = 1, **_) -> Transcript:
    T = Transcript("gram", S)
    P = orbit_partition(S)
    Gm = cached_gram(S, workers)
    T.check("symmetric", bool((Gm == Gm.T).all()))
    T.check("diagonal positive", bool((np.diag(Gm) > 0).all()))
    T.check("sum of all entries = |U|", int(Gm.sum()) == S.G.order, total=int(Gm.sum()))
    ms = [O.index for O in P.records if O.classification.main_separated]
    sub = Gm[np.ix_(ms, ms)]
    d = np.diag(sub)
    ok = bool(((sub == 0) | (sub == d[:, None])).all())
    T.check("main separated rows orthogonal or equal", ok, asserted=S.tp.lie_type in ("B", "D"),
            main_separated=len(ms))
    T.check("matrix", True, asserted=False, labels=[O.base.to_string() for O in P.records], gram=Gm.tolist())
    return T


def suite_mackey(S: Space, workers: int = 1, **_) -> Transcript:
    T = Transcript("mackey", S)
    P = orbit_partition(S)
    Gm = cached_gram(S, workers)
    recs = P.records
    if len(recs) ** 2 <= 5000:
        pairs = [(a, b) for a in recs for b in recs]
    else:
        core = [O for O in recs if O.classification.staircase]
        pairs = [(a, b) for a in core for b in core if a.classification.mc == b.classification.mc] + \
                [(O, O) for O in recs if not O.classification.staircase]
    bad = []
    for O1, O2 in pairs:
        d = mackey_hom_dim(O1.base, O2.base)
        if d != int(Gm[O1.index, O2.index]):
            bad.append([O1.base.to_string(), O2.base.to_string(), int(Gm[O1.index, O2.index]), d])
    T.check("mackey = inner product", not bad, pairs=len(pairs), failures=bad[:10])
    if S.G.order <= 729:
        mism = []
        for O1, O2 in pairs[:12]:
            A, B = O1.base, O2.base
            direct = double_cosets_direct(stab_of(B), stab_of(A), S.G)
            reps = double_coset_reps(A, B)
            if len(direct) != len(reps):
                mism.append([A.to_string(), B.to_string(), len(direct), len(reps)])
        T.check("double coset count = orbits of Stab[A] on O_B", not mism, pairs=min(12, len(pairs)),
                failures=mism)
    return T


def suite_superchar(S: Space, workers: int = 1, **_) -> Transcript:
    T = Transcript("superchar", S)
    R = superchar_report(S, workers)
    asserted = S.tp.lie_type in ("B", "D")
    fails = {k: [f for f in R.failures if f["check"] == k] for k in ("disjoint", "constant", "orthogonal")}
    T.check("superclasses pairwise disjoint", not fails["disjoint"], failures=fails["disjoint"][:10],
            covered=R.data["covered"], order=R.data["order"])
    T.check("family characters constant on superclasses", not fails["constant"], asserted=asserted,
            failures=fails["constant"][:10])
    T.check("distinct families orthogonal", not fails["orthogonal"], asserted=asserted,
            failures=fails["orthogonal"][:10], status=R.data["status"])
    bad = []
    for V in staircase_verges(S):
        if hat_verge(V).is_verge_matrix != classify(V).main_separated:
            bad.append(V.to_string())
    T.check("hat verdict = main separated (orbit verges)", not bad, failures=bad[:10])
    if S.tp.n <= 3:
        bad, n = [], 0
        for mc in staircase_main_sets(S.tp):
            mc = sorted(mc)
            V = CharLabel(S, {p: 1 for p in mc})
            n += 1
            if hat_verge(V).is_verge_matrix != classify(V).main_separated:
                bad.append(V.to_string())
        T.check("hat verdict = main separated (all main sets)", not bad, main_sets=n, failures=bad[:10])
    if S.q ** (S.tp.N * (S.tp.N - 1) // 2) <= 3 ** 10:
        mism = []
        for V in staircase_verges(S):
            if classify(V).main_separated:
                if not np.array_equal(superclass(V), superclass_closure(V)):
                    mism.append(V.to_string())
        T.check("superclass = naive two-sided closure", not mism, failures=mism)
    T.check("report", True, asserted=False, report=R.data)
    return T


SUITE_FUNCS = {
    "bijection": suite_bijection,
    "cocycle": suite_cocycle,
    "partition": suite_partition,
    "stab": suite_stab,
    "aux3": suite_aux3,
    "main1": suite_main1,
    "main3": suite_main3,
    "gram": suite_gram,
    "mackey": suite_mackey,
    "superchar": suite_superchar,
}


def run_suite(name: str, S: Space, **opts) -> list:
    """Run one suite (or all) and return the list of transcripts."""
    names = SUITES if name == "all" else (name,)
    out = []
    for n in names:
        if n not in SUITE_FUNCS:
            raise ValueError(f"unknown suite {n!r}")
        out.append(SUITE_FUNCS[n](S, **opts))
    return out
