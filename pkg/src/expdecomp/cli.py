"""Command-line front end.

Exit codes: 0 success, 1 property failure, 2 input error, 3 internal
invariant violation.  All structured output is JSON with sorted keys so that
identical inputs, seeds and flags give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import oracles
from .cutmatching import BALANCED, UNBALANCED, cut_matching
from .decomposition import decomp
from .errors import InputError, InvariantViolation
from .generators import dumbbell, planted, random_regular
from .graph import conductance, format_edge_list, read_edge_list
from .params import make_params
from .suites import SUITES, oracle_compare, run_suites

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2, 3


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _overrides(args) -> dict:
    return {k: getattr(args, k) for k in ("T", "Z", "c", "d", "h")
            if getattr(args, k, None) is not None}


class _TraceWriter:
    def __init__(self, path):
        self.path = path
        self.lines = []

    def __call__(self, rec):
        self.lines.append(_dump(rec))

    def close(self):
        if self.path is not None:
            _write("".join(self.lines), self.path)


# ---------------------------------------------------------------- commands

def cmd_decompose(args) -> int:
    G = read_edge_list(args.input)
    trace = _TraceWriter(args.trace) if args.trace else None
    P = decomp(G, args.phi, mode=args.mode, seed=args.seed, overrides=_overrides(args),
               trace_sink=trace)
    if trace:
        trace.close()
    _write(_dump(P.to_json()), args.out)
    bound = args.phi * G.m
    print(f"clusters={len(P.clusters)} inter_edges={P.inter_cluster_edges} "
          f"bound={bound:.6g}", file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return EXIT_OK


def cmd_cutmatch(args) -> int:
    G = read_edge_list(args.input)
    params = make_params(args.phi, G.m, args.mode, args.seed, **_overrides(args))
    trace = _TraceWriter(args.trace) if args.trace else None
    out = cut_matching(G, params, oracle=args.oracle, trace_sink=trace)
    if trace:
        trace.close()
    report = {"params": params.as_dict(), **out.summary()}
    status = EXIT_OK
    if out.case in (BALANCED, UNBALANCED) and 0 < len(out.r_side) < G.n:
        phi_cut = float(conductance(G, out.r_side))
        report["cut_conductance"] = phi_cut
        report["cut_bound"] = 150 / params.c
        report["r_side"] = out.r_side.tolist()
        if phi_cut > 150 / params.c:
            status = EXIT_PROPERTY
    audit = oracles.congestion_audit(out.state.ledger, out.rounds, params.c)
    report["congestion"] = audit
    if not audit["ok"]:
        status = EXIT_PROPERTY
    _write(_dump(report), args.out)
    print(f"case={out.case} rounds={out.rounds} vol_removed={out.vol_removed}",
          file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return status


def cmd_verify(args) -> int:
    if args.m is not None and args.m > oracles.DEFAULT_CAP:
        raise InputError(f"refusing: oracle suites are capped at m <= {oracles.DEFAULT_CAP}")
    names = args.suite or None
    failures = run_suites(args.seed, names, fault=args.inject_fault)
    for f in failures:
        print(f"FAIL {f}")
    ran = names or list(SUITES)
    print(f"suites={len(ran)} failures={len(failures)}")
    return EXIT_PROPERTY if failures else EXIT_OK


def cmd_oracle_compare(args) -> int:
    G = read_edge_list(args.input)
    params = make_params(args.phi, G.m, args.mode, args.seed, **_overrides(args))
    rows = oracle_compare(G, params, args.seed)
    _write("".join(_dump(r) for r in rows), args.out)
    worst = max(r["projection_error"] for r in rows)
    print(f"rounds={len(rows) - 1} max_projection_error={worst:.3g}", file=sys.stderr)
    return EXIT_PROPERTY if worst > 1e-8 else EXIT_OK


def cmd_gen(args) -> int:
    if args.family == "regular":
        G = random_regular(args.n, args.degree, args.seed, simple=args.simple,
                           connected=args.connected)
    elif args.family == "dumbbell":
        G = dumbbell(args.k, args.n, args.b)
    else:
        G, _ = planted(args.k, args.n, args.degree, args.b, args.seed)
    _write(format_edge_list(G), args.out)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _add_run_flags(p, need_input=True):
    if need_input:
        p.add_argument("input", help="edge-list file")
    p.add_argument("--phi", type=float, default=0.03, help="target conductance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("desk", "paper"), default="desk")
    for name in ("T", "c", "d", "h"):
        p.add_argument(f"--{name}", type=int, default=None, help=f"override {name}")
    p.add_argument("--Z", type=float, default=None, help="override Z")
    p.add_argument("--trace", default=None, metavar="PATH",
                   help="write per-round JSON-lines records to PATH")
    p.add_argument("--out", default=None, metavar="PATH", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="expdecomp", description="Expander decomposition toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="partition a graph into expanders")
    _add_run_flags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("cutmatch", help="run one cut-matching game")
    _add_run_flags(p)
    p.add_argument("--oracle", action="store_true", help="track the potential (m <= 64)")
    p.set_defaults(func=cmd_cutmatch)

    p = sub.add_parser("verify", help="run the randomized oracle suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--suite", action="append", choices=sorted(SUITES))
    p.add_argument("--inject-fault", choices=sorted(SUITES), default=None,
                   help="sabotage one suite (negative control)")
    p.add_argument("--m", type=int, default=None, help="requested oracle size")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle-compare", help="compare projections with dense matrices")
    _add_run_flags(p)
    p.set_defaults(func=cmd_oracle_compare)

    p = sub.add_parser("gen", help="emit a benchmark graph")
    p.add_argument("family", choices=("regular", "dumbbell", "planted"))
    p.add_argument("--n", type=int, default=16, help="vertices (per part for dumbbell/planted)")
    p.add_argument("--k", type=int, default=2, help="number of parts")
    p.add_argument("--b", type=int, default=1, help="bridges between consecutive parts")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--simple", action="store_true", help="reject loops and parallel edges")
    p.add_argument("--connected", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
