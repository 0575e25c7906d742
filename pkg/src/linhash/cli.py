"""
Command-line front end.

Exit codes: 0 on success, 1 when a verified claim fails, 2 on usage or
domain errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Sequence

from .adversarial import RecipeKind, SetRecipe, generate, local_search_worst
from .effective_modulus import f_distribution
from .errors import BudgetExceeded, DomainError, NoneFound
from .families import FamilyConfig, Kind
from .maxload import (
    DEFAULT_BUDGET,
    exact_expected_maxload,
    maxload_profile,
    mc_expected_maxload,
    pair_collision_prob,
)
from .numtheory import farey_sequence
from .registry import Status, claim_ids, verify
from .twobin import sum_excess

FAMILY_ALIASES = {
    "blocked": Kind.BLOCKED_INT,
    "blocked-int": Kind.BLOCKED_INT,
    "strided": Kind.STRIDED_INT,
    "strided-int": Kind.STRIDED_INT,
    "smart": Kind.SMART_BLOCKED,
    "smart-blocked": Kind.SMART_BLOCKED,
    "random-modulus": Kind.RANDOM_MODULUS,
    "real": Kind.REAL_BLOCKED,
    "real-blocked": Kind.REAL_BLOCKED,
    "twobin-mult": Kind.TWO_BIN_MULT,
    "twobin-affine": Kind.TWO_BIN_AFFINE,
}


class UsageError(Exception):
    pass


def parse_family(name: str) -> Kind:
    key = name.strip().lower()
    if key in FAMILY_ALIASES:
        return FAMILY_ALIASES[key]
    for kind in Kind:
        if kind.value.lower() == key:
            return kind
    raise argparse.ArgumentTypeError(
        f"unknown family {name!r}; choose from {', '.join(sorted(FAMILY_ALIASES))}"
    )


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")


def _family_flags(p: argparse.ArgumentParser, need_bins: bool = True) -> None:
    p.add_argument("--family", type=parse_family, required=True)
    p.add_argument("--modulus", "-m", "--m", "--p", dest="modulus", type=int, required=True,
                   help="modulus m, prime p, or universe u for the real family")
    if need_bins:
        p.add_argument("--bins", type=int, default=None, help="number of bins (default: --n, or 2)")
    p.add_argument("--real-denominator", type=int, default=None)


def _set_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="number of items")
    p.add_argument("--recipe", default="Interval", type=RecipeKind, help="item set recipe")
    p.add_argument("--start", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--step", type=int, default=None)
    p.add_argument("--base", type=int, default=None)
    p.add_argument("--universe", type=int, default=None, help="items drawn from [0, universe); default the modulus")
    p.add_argument("--set-seed", type=int, default=None, help="seed for Random recipes (default --seed)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="linhash", description="Linear hashing experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("maxload", help="expected maxload of an item set (exact, or Monte Carlo with --trials)")
    _family_flags(p)
    _set_flags(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    _common(p)

    p = sub.add_parser("sweep", help="maxload of every parameter of the family")
    _family_flags(p)
    _set_flags(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    _common(p)

    p = sub.add_parser("pairprob", help="exact collision probability of two items")
    _family_flags(p)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    _common(p)

    p = sub.add_parser("farey", help="Farey sequence of order m")
    p.add_argument("--modulus", "-m", "--m", dest="modulus", type=int, required=True)
    _common(p)

    p = sub.add_parser("fdist", help="exact distribution of the effective modulus")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--universe", "--u", dest="universe", type=int, required=True)
    p.add_argument("--budget", type=int, default=10**5)
    _common(p)

    p = sub.add_parser("overlap", help="overlaps and excess overlaps of X = [1, n] (or --x values) modulo p")
    p.add_argument("--modulus", "-m", "--m", "--p", dest="modulus", type=int, required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--x", type=int, nargs="+", default=None)
    _common(p)

    p = sub.add_parser("search", help="local search for a set with large expected maxload")
    _family_flags(p)
    _set_flags(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--budget", type=int, default=100, help="number of swap moves")
    p.add_argument("--trials", type=int, default=2000, help="Monte Carlo trials when exact scoring is too costly")
    p.add_argument("--trace", metavar="PATH", default=None, help="JSONL trace of the search")
    _common(p)

    p = sub.add_parser("verify", help="run registered claim checks")
    p.add_argument("claims", nargs="*", help="claim ids (default: all)")
    p.add_argument("--list", action="store_true", help="list claim ids and exit")
    _common(p)
    return ap


def _config(args, n_items: int | None = None) -> FamilyConfig:
    bins = getattr(args, "bins", None)
    if bins is None:
        if args.family in (Kind.TWO_BIN_MULT, Kind.TWO_BIN_AFFINE):
            bins = 2
        elif n_items is not None:
            bins = n_items
        else:
            raise UsageError("--bins is required")
    return FamilyConfig(args.family, args.modulus, bins, args.real_denominator)


def _items(args, cfg: FamilyConfig):
    params = {k: getattr(args, k) for k in ("start", "stride", "step", "base") if getattr(args, k) is not None}
    seed = args.set_seed if args.set_seed is not None else args.seed
    if args.recipe is RecipeKind.RANDOM and seed is None:
        raise UsageError("Random sets need --seed or --set-seed")
    recipe = SetRecipe(args.recipe, params, seed if args.recipe is RecipeKind.RANDOM else None)
    return generate(recipe, args.n, args.universe or cfg.universe)


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _frac(v: Fraction) -> str:
    return str(v)


def _cmd_maxload(args) -> int:
    cfg = _config(args, args.n)
    X = _items(args, cfg)
    if args.trials is not None:
        if args.seed is None:
            raise UsageError("Monte Carlo runs need --seed")
        dist = mc_expected_maxload(X, cfg, args.trials, args.seed)
    else:
        dist = exact_expected_maxload(X, cfg, args.budget)
    if args.format == "csv":
        _emit(args, dist.to_csv())
    else:
        d = dist.to_dict()
        d["config"] = cfg.to_dict()
        d["items"] = list(X.elements)
        _emit(args, json.dumps(d, sort_keys=True))
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config(args, args.n)
    X = _items(args, cfg)
    params, loads = maxload_profile(X, cfg, args.budget)
    rows = [(p.a, p.b, p.k, int(v)) for p, v in zip(params, loads)]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a", "b", "k", "maxload"])
        w.writerows(["" if c is None else c for c in r] for r in rows)
        _emit(args, buf.getvalue())
    else:
        _emit(args, json.dumps({"config": cfg.to_dict(), "items": list(X.elements),
                                "rows": [list(r) for r in rows]}, sort_keys=True))
    return 0


def _cmd_pairprob(args) -> int:
    cfg = _config(args)
    pr = pair_collision_prob(args.x, args.y, cfg, args.budget)
    if args.format == "csv":
        _emit(args, f"x,y,prob_num,prob_den\n{args.x},{args.y},{pr.numerator},{pr.denominator}")
    elif args.out:
        _emit(args, json.dumps({"x": args.x, "y": args.y, "prob": _frac(pr)}, sort_keys=True))
    else:
        _emit(args, _frac(pr))
    return 0


def _cmd_farey(args) -> int:
    seq = farey_sequence(args.modulus)
    if args.format == "csv":
        _emit(args, "num,den\n" + "\n".join(f"{f.numerator},{f.denominator}" for f in seq))
    else:
        _emit(args, " ".join(f"{f.numerator}/{f.denominator}" for f in seq))
    return 0


def _cmd_fdist(args) -> int:
    dist = f_distribution(args.n, args.universe, budget=args.budget)
    _emit(args, dist.to_csv() if args.format == "csv" else dist.to_json())
    return 0


def _cmd_overlap(args) -> int:
    if args.x:
        xs = args.x
    elif args.n:
        xs = range(1, args.n + 1)
    else:
        raise UsageError("give --n or --x")
    report = sum_excess(xs, args.modulus)
    _emit(args, report.to_csv() if args.format == "csv" else report.to_json())
    return 0


def _cmd_search(args) -> int:
    if args.seed is None:
        raise UsageError("search needs --seed")
    cfg = _config(args, args.n)
    X = _items(args, cfg)
    low = 1 if cfg.kind in (Kind.TWO_BIN_MULT, Kind.TWO_BIN_AFFINE) and 0 not in X else 0
    if args.trace:
        with open(args.trace, "w") as fh:
            res = local_search_worst(X, cfg, args.budget, args.seed, mc_trials=args.trials, low=low, trace_out=fh)
    else:
        res = local_search_worst(X, cfg, args.budget, args.seed, mc_trials=args.trials, low=low)
    score = _frac(res.score) if isinstance(res.score, Fraction) else res.score
    init = _frac(res.initial_score) if isinstance(res.initial_score, Fraction) else res.initial_score
    out = {"config": cfg.to_dict(), "items": list(res.items.elements), "score": score,
           "initial_score": init, "scoring": res.scoring, "steps": len(res.trace)}
    if args.format == "csv":
        _emit(args, "item\n" + "\n".join(str(x) for x in res.items))
    else:
        _emit(args, json.dumps(out, sort_keys=True))
    return 0


def _cmd_verify(args) -> int:
    known = claim_ids()
    if args.list:
        _emit(args, "\n".join(known))
        return 0
    wanted = args.claims or known
    unknown = [c for c in wanted if c not in known]
    if unknown:
        raise UsageError(f"unknown claim id(s): {', '.join(unknown)}")
    reports = [verify(c) for c in wanted]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["claim_id", "status", "bound", "regime_note"])
        for r in reports:
            w.writerow([r.claim_id, r.status.value, r.bound, r.regime_note])
        _emit(args, buf.getvalue())
    else:
        _emit(args, "\n".join(r.to_json() for r in reports))
    return 1 if any(r.status is Status.FAIL for r in reports) else 0


_COMMANDS = {
    "maxload": _cmd_maxload,
    "sweep": _cmd_sweep,
    "pairprob": _cmd_pairprob,
    "farey": _cmd_farey,
    "fdist": _cmd_fdist,
    "overlap": _cmd_overlap,
    "search": _cmd_search,
    "verify": _cmd_verify,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, DomainError, BudgetExceeded, NoneFound, ValueError) as exc:
        print(f"linhash {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
