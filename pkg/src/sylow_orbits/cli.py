"""Command-line front end: group info, actions, orbits, stabilizers, verify suites, superchar reports."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from .action import SupportError, left_monomial, monomial_right
from .charspace import Space, parse_label
from .field import FieldError, is_prime, make_field
from .geometry import TypeParams, positions_json
from .group import BudgetExceeded, budget
from .orbits import SUPPL_PARSES, classify, orbit_partition
from .verify import SUITES, emit_csv, emit_json, run_suite

EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


@dataclass
class RunConfig:
    lie_type: str
    n: int
    p: int
    k: int = 1
    theta_scale: int = 1
    suppl_parse: str = "conjunctive"
    workers: int = 1
    csv: bool = False
    out: str | None = None
    budget: int = field(default_factory=budget)

    def space(self) -> Space:
        return Space(TypeParams(self.lie_type, self.n), make_field(self.p, self.k), self.theta_scale)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--type", dest="lie_type", required=True, choices=["B", "C", "D"], help="Lie type")
    p.add_argument("--n", type=int, required=True, help="rank")
    p.add_argument("--p", type=int, required=True, help="odd prime")
    p.add_argument("--k", type=int, default=1, help="degree of F_q over F_p")
    p.add_argument("--theta-scale", type=int, default=1, help="c in theta(x) = zeta_p^(c Tr x)")
    p.add_argument("--suppl-parse", choices=SUPPL_PARSES, default="conjunctive")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", action="store_true", help="CSV instead of JSON where a table is emitted")
    p.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sylow-orbits", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("group", help="group data")
    gs = g.add_subparsers(dest="sub", required=True)
    _common(gs.add_parser("info"))

    a = sub.add_parser("act", help="act on a label by one root element")
    _common(a)
    a.add_argument("--label", required=True, help='e.g. "1,4=1;2,3=2"')
    a.add_argument("--gen", required=True, help="i,j,a for x_ij(a)")
    a.add_argument("--left", action="store_true", help="left action instead of right")

    o = sub.add_parser("orbits", help="orbit partition")
    os_ = o.add_subparsers(dest="sub", required=True)
    e = os_.add_parser("enumerate")
    _common(e)
    e.add_argument("--members", action="store_true")
    c = os_.add_parser("classify")
    _common(c)
    c.add_argument("--label", required=True)

    s = sub.add_parser("stab", help="stabilizer of a staircase core")
    _common(s)
    s.add_argument("--label", required=True)
    s.add_argument("--row", type=int, help="report only this row")
    s.add_argument("--brute-check", action="store_true")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    _common(v)

    r = sub.add_parser("superchar", help="supercharacter reports")
    rs = r.add_subparsers(dest="sub", required=True)
    _common(rs.add_parser("report"))
    return ap


def parse_args(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.p < 3 or args.p % 2 == 0:
        ap.error("p must be odd")
    if not is_prime(args.p):
        ap.error("p must be prime")
    if args.n < 1 or args.k < 1 or args.workers < 1:
        ap.error("n, k and workers must be positive")
    if args.lie_type == "D" and args.n < 2:
        ap.error("type D needs n >= 2")
    if args.theta_scale % args.p == 0:
        ap.error("theta scale must be nonzero mod p")
    cfg = RunConfig(args.lie_type, args.n, args.p, args.k, args.theta_scale, args.suppl_parse,
                    args.workers, args.csv, args.out)
    return cfg, args


def _gen(text: str):
    parts = [x.strip() for x in text.split(",")]
    if len(parts) != 3:
        raise ValueError("--gen expects i,j,a")
    return int(parts[0]), int(parts[1]), int(parts[2])


def cmd_group_info(cfg, S, args):
    G = S.G
    tp = S.tp
    return {
        "type": tp.lie_type, "n": tp.n, "N": tp.N, "p": S.p, "k": S.ctx.k, "q": S.q,
        "modulus": list(S.ctx.modulus), "pUP": positions_json(tp.pup), "order": int(G.order),
        "order_formula": f"{S.q}^{len(tp.pup)}",
    }


def cmd_act(cfg, S, args):
    A = parse_label(S, args.label)
    i, j, a = _gen(args.gen)
    if (i, j) not in S.tp.pup_index:
        raise ValueError(f"({i},{j}) is not a root position in pUP")
    x = S.G.root(i, j, S.ctx.scalar(a))
    res = left_monomial(x, A) if args.left else monomial_right(A, x)
    out = res.to_json()
    return {"input": A.to_string(), "gen": [i, j, a], "side": "left" if args.left else "right",
            "label": out["label"], "exponent": out["exponent"]}


def cmd_orbits_enumerate(cfg, S, args):
    P = orbit_partition(S)
    recs = [O.to_json(members=args.members) for O in P.records]
    if cfg.csv:
        import csv
        import io

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "base", "size", "staircase", "main_separated", "core", "verge"])
        for k, r in enumerate(recs):
            f = r["flags"]
            w.writerow([k, r["base"] or "0", r["size"], int(f["staircase"]), int(f["main_separated"]), int(f["core"]),
                        r["verge"] or "0"])
        return buf.getvalue()
    return {"orbits": recs, "count": len(recs), "total": int(P.sizes.sum())}


def cmd_orbits_classify(cfg, S, args):
    A = parse_label(S, args.label)
    return {"label": A.to_string(), "suppl_parse": cfg.suppl_parse, **classify(A, cfg.suppl_parse).to_json()}


def cmd_stab(cfg, S, args):
    from .stabilizer import brute_stabilizer, row_stab, stab_elements

    A = parse_label(S, args.label)
    W = stab_elements(A)
    rows = range(1, S.tp.n + 1) if args.row is None else [args.row]
    if args.row is not None and not 1 <= args.row <= S.tp.n:
        raise ValueError(f"row must lie in 1..{S.tp.n}")
    out = {
        "label": A.to_string(),
        "rows": [row_stab(A, i).to_json(S.ctx) for i in rows],
        "size": int(len(W)),
        "J": positions_json(classify(A).J),
    }
    if args.brute_check:
        out["brute_size"] = int(len(brute_stabilizer(A)))
        out["agree"] = out["brute_size"] == out["size"]
    return out


def cmd_superchar_report(cfg, S, args):
    from .supercharacters import superchar_report

    R = superchar_report(S, cfg.workers)
    return {"ok": R.ok, **R.data}


def cmd_verify(cfg, S, args):
    Ts = run_suite(args.suite, S, workers=cfg.workers, suppl_parse=cfg.suppl_parse)
    if cfg.csv and args.suite == "gram":
        mat = next(c for c in Ts[0].checks if c["name"] == "matrix")
        return emit_csv(mat["gram"], mat["labels"]), all(T.ok for T in Ts)
    return {"suite": args.suite, "pass": all(T.ok for T in Ts), "transcripts": [T.to_json() for T in Ts]}, \
        all(T.ok for T in Ts)


HANDLERS = {
    ("group", "info"): cmd_group_info,
    ("act", None): cmd_act,
    ("orbits", "enumerate"): cmd_orbits_enumerate,
    ("orbits", "classify"): cmd_orbits_classify,
    ("stab", None): cmd_stab,
    ("superchar", "report"): cmd_superchar_report,
}


def _write(cfg, payload):
    text = payload if isinstance(payload, str) else emit_json(payload)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    cfg, args = parse_args(argv)
    ok = True
    try:
        S = cfg.space()
        if args.cmd == "verify":
            payload, ok = cmd_verify(cfg, S, args)
        else:
            payload = HANDLERS[(args.cmd, getattr(args, "sub", None))](cfg, S, args)
    except BudgetExceeded as e:
        sys.stderr.write(f"budget exceeded: {e}\n")
        return EXIT_BUDGET
    except (ValueError, FieldError, SupportError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    _write(cfg, payload)
    return 0 if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
