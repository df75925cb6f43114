"""Command-line driver: sampling, dimension queries and scaling experiments.

Exit codes: 0 success, 2 configuration error, 3 slope-assertion failure.
"""
from __future__ import annotations

import argparse
import json
import sys

from .amalgam import build_generic
from .core import InputError, Signature, load_structure
from .dimension import d_cap, delta, delta_rel
from .extcalc import ExtensionPattern, closure
from .harness import (
    ExperimentReport,
    empty_closure,
    ext_stats,
    qe_probe,
    rare_substructure,
    zero_one,
)
from .sampler import SampleConfig, sample

CLI_MAX_V = 16


def _parse_grid(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise InputError(f"bad n-grid {text!r}") from exc


def _parse_trials(text: str):
    parts = [int(x) for x in text.split(",") if x]
    return parts[0] if len(parts) == 1 else parts


def _parse_vertex_set(text: str) -> list[int]:
    if not text:
        return []
    return [int(x) for x in text.split(",")]


def _load_pattern(path, sig) -> ExtensionPattern:
    with open(path, "r", encoding="utf-8") as fh:
        pat = ExtensionPattern.from_json_dict(json.load(fh), sig)
    if pat.v > CLI_MAX_V:
        raise InputError(f"pattern adds {pat.v} vertices; the CLI refuses v > {CLI_MAX_V}")
    return pat


def _write_report(report: ExperimentReport, args) -> int:
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if getattr(args, "csv", None):
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
    if getattr(args, "assert_slope", None):
        lo, hi = (float(x) for x in args.assert_slope.split(":"))
        if report.slope is None or not (lo <= report.slope <= hi):
            sys.stderr.write(
                f"slope assertion failed: {report.slope} not in [{lo}, {hi}]\n"
            )
            return 3
    return 0


def _add_common(p: argparse.ArgumentParser, grid: bool = True):
    p.add_argument("--sig", required=True, help="signature JSON file")
    p.add_argument("--seed", type=int, default=0)
    if grid:
        p.add_argument("--n-grid", default="256,512,1024", help="comma-separated sizes")
        p.add_argument("--trials", default="20", help="trials per n (int or comma list)")
        p.add_argument("--out", default=None, help="report JSON path (stdout if omitted)")
        p.add_argument("--csv", default=None, help="report CSV path")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--assert-slope", default=None, metavar="LO:HI",
                       help="exit 3 unless the fitted slope lies in [LO, HI]")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rslab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw one structure from the product measure")
    p.add_argument("--sig", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("delta", help="dimension form of a structure (optionally relative)")
    p.add_argument("--sig", required=True)
    p.add_argument("--structure", required=True)
    p.add_argument("--base", default=None, help="comma-separated base vertices")
    p.add_argument("--d-cap", type=int, nargs="?", const=6, default=None, metavar="CAP",
                   help="also report min delta over supersets of the base, "
                        "adding at most CAP vertices (default 6)")

    p = sub.add_parser("closure", help="closure of a vertex set at level m")
    p.add_argument("--sig", required=True)
    p.add_argument("--structure", required=True)
    p.add_argument("--set", dest="vertex_set", default="", help="comma-separated vertices")
    p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("ext-stats", help="extension-count scaling experiment")
    _add_common(p)
    p.add_argument("--pattern", required=True, help="extension pattern JSON file")
    p.add_argument("--c1", type=float, default=10.0)
    p.add_argument("--cap", type=int, default=200)

    p = sub.add_parser("rare", help="negative-dimension substructure frequency")
    _add_common(p)
    p.add_argument("--structure", required=True, help="pattern structure JSON file")

    p = sub.add_parser("empty-closure", help="frequency of an empty closure of the empty set")
    _add_common(p)
    p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("zero-one", help="semigeneric witness frequency")
    _add_common(p)
    p.add_argument("--pattern", required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--cap", type=int, default=200)

    p = sub.add_parser("generic-build", help="grow a strong chain serving all task types")
    p.add_argument("--sig", required=True)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--vmax", type=int, default=2)
    p.add_argument("--base-max", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("qe-probe", help="formula agreement on tuples with isomorphic closures")
    p.add_argument("--sig", required=True)
    p.add_argument("--g1", required=True)
    p.add_argument("--g2", required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--tuple-len", type=int, default=1)
    p.add_argument("--pairs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    return ap


def _cmd_sample(args) -> int:
    sig = Signature.from_file(args.sig)
    M = sample(SampleConfig(n=args.n, sig=sig, seed=args.seed, trial_index=args.trial))
    text = M.canonical_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_delta(args) -> int:
    sig = Signature.from_file(args.sig)
    M = load_structure(args.structure, sig)
    out = {"delta": delta(M).to_json_dict()}
    base = _parse_vertex_set(args.base) if args.base is not None else None
    if base is not None:
        out["delta_rel"] = delta_rel(M, base).to_json_dict()
    if args.d_cap is not None:
        out["d_cap"] = d_cap(M, base or [], args.d_cap).to_json_dict()
        out["cap"] = args.d_cap
    sys.stdout.write(json.dumps(out, separators=(",", ":")) + "\n")
    return 0


def _cmd_closure(args) -> int:
    sig = Signature.from_file(args.sig)
    M = load_structure(args.structure, sig)
    cl = closure(M, _parse_vertex_set(args.vertex_set), args.m)
    sys.stdout.write(json.dumps({"closure": sorted(cl), "m": args.m}) + "\n")
    return 0


def _cmd_generic_build(args) -> int:
    sig = Signature.from_file(args.sig)
    chain = build_generic(sig, size_bound=args.size, v_max=args.vmax,
                          seed=args.seed, base_max=args.base_max)
    text = json.dumps(chain.to_json_dict(), separators=(",", ":")) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sample":
            return _cmd_sample(args)
        if args.command == "delta":
            return _cmd_delta(args)
        if args.command == "closure":
            return _cmd_closure(args)
        if args.command == "generic-build":
            return _cmd_generic_build(args)

        sig = Signature.from_file(args.sig)
        if args.command == "ext-stats":
            pat = _load_pattern(args.pattern, sig)
            report = ext_stats(pat, _parse_grid(args.n_grid), _parse_trials(args.trials),
                               args.seed, c1=args.c1, cap=args.cap, threads=args.threads)
        elif args.command == "rare":
            B = load_structure(args.structure, sig)
            report = rare_substructure(B, _parse_grid(args.n_grid),
                                       _parse_trials(args.trials), args.seed,
                                       threads=args.threads)
        elif args.command == "empty-closure":
            report = empty_closure(sig, args.m, _parse_grid(args.n_grid),
                                   _parse_trials(args.trials), args.seed,
                                   threads=args.threads)
        elif args.command == "zero-one":
            pat = _load_pattern(args.pattern, sig)
            report = zero_one(pat, args.m, _parse_grid(args.n_grid),
                              _parse_trials(args.trials), args.seed,
                              cap=args.cap, threads=args.threads)
        elif args.command == "qe-probe":
            G1 = load_structure(args.g1, sig)
            G2 = load_structure(args.g2, sig)
            report = qe_probe(G1, G2, args.ell, args.depth,
                              tuple_len=args.tuple_len, pairs=args.pairs, seed=args.seed)
            text = report.to_json()
            if args.out:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return 0
        else:  # pragma: no cover
            raise AssertionError(args.command)
        return _write_report(report, args)
    except (InputError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
