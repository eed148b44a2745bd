"""Command-line front end.

Exit codes: 0 success, 1 domain failure (invalid spec, infeasible rate, failed suite,
scheme/mode mismatch), 2 I/O or JSON parse error.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from . import subsets as ss
from .decodable import FeasibilityKind, classify_relays, largest_feasible_set
from .pmf import Mode, SpecError, spec_problems
from .schemes import SCHEMES, SchemeModeError, all_rates, compute_rate
from .setfuncs import EvalContext
from .specio import load_spec, spec_to_dict
from .verify import (ALPHABET_KEYS, InstanceGenerator, default_optimum_batches, run_lemma_suite,
                     run_optimum_suite, run_theorem_suite)

EXIT_OK, EXIT_FAIL, EXIT_IO = 0, 1, 2


class _IOFailure(Exception):
    pass


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, no NaN/inf, so parse + re-dump reproduces the bytes."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False)


def _load(path: str):
    try:
        return load_spec(path)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise _IOFailure(f"cannot read {path}: {e}") from e


def _fmt_rate(v) -> str:
    return "infeasible" if v is None else f"{v:.6f}"


# --------------------------------------------------------------------------- commands


def cmd_validate(args) -> int:
    try:
        spec = _load(args.spec)
    except SpecError as e:
        problems = e.problems
    else:
        problems = spec_problems(spec)
    if args.json:
        print(dumps({"valid": not problems, "problems": problems}))
    elif problems:
        for p in problems:
            print(f"invalid: {p}")
    else:
        print(f"valid: {spec.mode.value} channel, n={spec.n}")
    return EXIT_FAIL if problems else EXIT_OK


def cmd_rates(args) -> int:
    spec = _load(args.spec).validate()
    ctx = EvalContext.from_spec(spec)
    m = None if args.m is None else ss.parse(args.m, spec.n)
    if args.scheme == "all":
        reports = all_rates(ctx, m)
    else:
        reports = [compute_rate(ctx, args.scheme, m)]
    if args.json:
        print(dumps({"mode": spec.mode.value, "n": spec.n,
                     "reports": [r.to_dict() for r in reports]}))
    else:
        print(f"{'scheme':<8}{'rate (bits)':>14}  argmin / notes")
        for r in reports:
            notes = []
            if r.argmin_subsets:
                notes.append("argmin " + " ".join(ss.fmt(s) for s in r.argmin_subsets))
            if r.diagnostics.get("clamped"):
                notes.append(f"clamped from {r.diagnostics['unclamped']:.6f}")
            if r.diagnostics.get("violators"):
                notes.append("violated at " + " ".join(
                    ss.fmt(ss.from_indices(v)) for v in r.diagnostics["violators"]))
            if r.scheme == "ruj":
                notes.append(f"M={ss.fmt(ss.from_indices(r.diagnostics['m']))}")
            if r.d_j is not None:
                notes.append(f"D_J={ss.fmt(r.d_j)} D'_J={ss.fmt(r.d_j_prime)}")
            if r.witness_rates is not None and r.scheme == "cfs" and r.feasible:
                notes.append("R=" + ",".join(f"{v:.4f}" for v in r.witness_rates))
            print(f"{r.scheme:<8}{_fmt_rate(r.rate):>14}  {'; '.join(notes)}")
    single = len(reports) == 1
    return EXIT_FAIL if single and not reports[0].feasible else EXIT_OK


def cmd_sets(args) -> int:
    spec = _load(args.spec).validate()
    ctx = EvalContext.from_spec(spec)
    out: dict[str, Any] = {"mode": spec.mode.value, "n": spec.n}
    if spec.mode is Mode.DIGITAL:
        out["d_successive"] = ss.to_indices(largest_feasible_set(ctx, FeasibilityKind.I_NONSTRICT))
    else:
        out["d_successive"] = ss.to_indices(largest_feasible_set(ctx, FeasibilityKind.J_NONSTRICT))
        out.update(classify_relays(ctx).to_dict())
    if args.json:
        print(dumps(out))
    else:
        print(f"successively decodable D: {ss.fmt(ss.from_indices(out['d_successive']))}")
        if "d_j" in out:
            print(f"jointly decodable D_J:    {ss.fmt(ss.from_indices(out['d_j']))}")
            print(f"boundary set D'_J:        {ss.fmt(ss.from_indices(out['d_j_prime']))}")
            for i, c in out["classes"].items():
                print(f"  relay {i}: {c}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    from .optimize import SearchConfig, optimize
    spec = _load(args.spec).validate()
    m = None if args.m is None else ss.parse(args.m, spec.n)
    if spec.mode is Mode.DIGITAL and args.scheme not in ("cfs", "cfj"):
        raise SchemeModeError(f"{args.scheme} needs relay inputs; digital-link specs support cfs and cfj only")
    cfg = SearchConfig(args.scheme, free=args.free, restarts=args.restarts, iters=args.iters,
                       seed=args.seed, m=m, enumerate_deterministic=args.enumerate_deterministic,
                       refine=not args.no_refine)
    res = optimize(spec, cfg)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(dumps(spec_to_dict(res.best_spec)) + "\n")
        except OSError as e:
            raise _IOFailure(f"cannot write {args.out}: {e}") from e
    if args.json:
        print(dumps(res.to_dict()))
    else:
        print(f"scheme {res.scheme}: best rate {_fmt_rate(res.best_rate)} bits "
              f"over {len(res.traces)} climbs")
        if res.successive_feasible is not None:
            print(f"successive-decoding constraints at optimum: "
                  f"{'satisfied' if res.successive_feasible else 'violated'} "
                  f"(margin {res.successive_margin:.3g})")
        if res.enumeration_best is not None or res.enumeration_count is not None:
            print(f"deterministic maps: best {_fmt_rate(res.enumeration_best)} "
                  f"over {res.enumeration_count} maps")
    return EXIT_OK if res.best_rate is not None else EXIT_FAIL


def _parse_alphabets(text: str) -> dict[str, int] | int:
    text = text.strip()
    if "=" not in text:
        return int(text)
    out = {}
    for part in text.split(","):
        k, _, v = part.partition("=")
        k = k.strip()
        if k not in ALPHABET_KEYS:
            raise ValueError(f"unknown alphabet key {k!r}; expected one of {ALPHABET_KEYS}")
        out[k] = int(v)
    return out


def cmd_verify(args) -> int:
    reports = []
    if args.suite == "optima":
        batches = default_optimum_batches(seed=args.seed, restarts=args.restarts)
        reports.append(run_optimum_suite(batches))
    else:
        alph = _parse_alphabets(args.alphabets)
        modes = ["digital", "full"] if args.mode == "both" else [args.mode]
        run = run_lemma_suite if args.suite == "lemmas" else run_theorem_suite
        for mode in modes:
            gen = InstanceGenerator.make(mode, args.n, alph, seed=args.seed,
                                         degenerate_ratio=args.degenerate_ratio)
            reports.append(run(gen, args.instances))
    passed = all(r.passed for r in reports)
    if args.json:
        print(dumps({"passed": passed, "reports": [r.to_dict() for r in reports]}))
    else:
        for r in reports:
            label = r.generator.get("mode", "")
            print(f"suite {r.suite} {label}: {r.instances} instances, {r.checks} checks, "
                  f"{len(r.failures)} failures, {len(r.degenerate)} ties -> "
                  f"{'PASS' if r.passed else 'FAIL'}")
            for check, v in r.max_residual.items():
                print(f"  {check:<40} max residual {v:.3e}")
            for f in r.failures[:10]:
                print(f"  failure: {f}")
    return EXIT_OK if passed else EXIT_FAIL


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfrelay", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a spec file's dimensions and normalization")
    v.add_argument("spec")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("rates", help="achievable rate of each scheme at the spec's distribution")
    r.add_argument("spec")
    r.add_argument("--scheme", choices=("all",) + SCHEMES, default="all")
    r.add_argument("--m", default=None, help='relay subset for ruj, e.g. "1,3" or "" for none')
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_rates)

    s = sub.add_parser("sets", help="decodable relay sets and relay classification")
    s.add_argument("spec")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_sets)

    o = sub.add_parser("optimize", help="search compression laws for the best rate")
    o.add_argument("spec")
    o.add_argument("--scheme", choices=SCHEMES, required=True)
    o.add_argument("--restarts", type=int, default=20)
    o.add_argument("--iters", type=int, default=600)
    o.add_argument("--seed", type=int, required=True)
    o.add_argument("--free", choices=("compressions", "all"), default="compressions")
    o.add_argument("--m", default=None, help="relay subset for ruj")
    o.add_argument("--enumerate-deterministic", action="store_true")
    o.add_argument("--no-refine", action="store_true", help="skip the smooth local polish")
    o.add_argument("--out", help="write the optimized spec here")
    o.add_argument("--json", action="store_true")
    o.set_defaults(func=cmd_optimize)

    w = sub.add_parser("verify", help="randomized identity and rate checks")
    w.add_argument("--suite", choices=("lemmas", "theorems", "optima"), required=True)
    w.add_argument("--instances", type=int, default=50)
    w.add_argument("--seed", type=int, required=True)
    w.add_argument("--n", type=int, default=2)
    w.add_argument("--alphabets", default="2", help='one size for all, or e.g. "x=2,y=3,yhat=3"')
    w.add_argument("--mode", choices=("digital", "full", "both"), default="both")
    w.add_argument("--degenerate-ratio", type=float, default=0.1)
    w.add_argument("--restarts", type=int, default=20, help="optimizer restarts for the optima suite")
    w.add_argument("--json", action="store_true")
    w.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _IOFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except SpecError as e:
        for prob in e.problems:
            print(f"invalid: {prob}", file=sys.stderr)
        return EXIT_FAIL
    except (SchemeModeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
