"""``xctl``: run an experiment, write a CSV report, optionally an SVG snapshot.

Exit status: 0 when every asserted row passes, 1 when one fails, 2 on a usage
error.
"""

from __future__ import annotations

import argparse
import csv
import math
import re
import sys
from fractions import Fraction

import numpy as np

from .experiments import CSV_COLUMNS, EXPERIMENTS, SCHEMA_VERSION, annulus_space
from .lattice import ball, torus
from .render import render

_SQRT = re.compile(r"^(?:(?P<num>[0-9.]+)\s*/\s*)?sqrt\(?(?P<arg>[0-9.]+)\)?$")


class UsageError(Exception):
    pass


def parse_number(text):
    """Integers and decimals become exact fractions; ``sqrt(3)`` and
    ``1/sqrt(3)`` become floats."""
    s = str(text).strip().replace(" ", "")
    m = _SQRT.match(s)
    if m:
        r = math.sqrt(float(m.group("arg")))
        return float(m.group("num")) / r if m.group("num") else r
    try:
        q = Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}")
    return int(q) if q.denominator == 1 else q


def parse_config(path) -> dict:
    """``key = value`` (or ``key value``) lines; ``#`` starts a comment."""
    out = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    with fh:
        for no, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = re.split(r"\s*=\s*|\s+", line, maxsplit=1)
            if len(parts) != 2:
                raise UsageError(f"{path}:{no}: expected 'key = value'")
            out[parts[0].replace("-", "_")] = parts[1]
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xctl", description="Loop O(n) experiment harness.")
    p.add_argument("experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--k", default="1", help="scale; a comma list runs each value")
    p.add_argument("--l", default=None, help="second torus side (default: k)")
    p.add_argument("--n", default="1")
    p.add_argument("--x", default="1")
    p.add_argument("--r", type=int, default=0)
    p.add_argument("--R", type=int, default=None)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("exact", "mcmc"), default=None)
    p.add_argument("--xi", choices=("empty", "hexagon"), default="empty")
    p.add_argument("--delta", type=float, default=0.05, help="window around (1, 1) for defect circuits")
    p.add_argument("--eps", type=float, default=0.01, help="lower bound used for unquantified constants")
    p.add_argument("--out", default=None, help="CSV report path (default: stdout)")
    p.add_argument("--svg", default=None, help="write an SVG snapshot of one sample")
    p.add_argument("--config", default=None, help="key = value file of defaults")
    return p


def _ks(text):
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad --k {text!r}")


def run(args) -> list:
    n, x = parse_number(args.n), parse_number(args.x)
    rows = []
    for k in _ks(args.k):
        e = args.experiment
        if e == "perco":
            rows += EXPERIMENTS[e](k, xi=args.xi, mode=args.mode or "exact", trials=args.trials, seed=args.seed)
        elif e == "torus":
            l = k if args.l is None else int(args.l)
            rows += EXPERIMENTS[e](k, l, n, trials=args.trials, mode=args.mode or "exact", seed=args.seed)
        elif e == "antiferro":
            rows += EXPERIMENTS[e](k, x, trials=args.trials, mode=args.mode or "mcmc", seed=args.seed,
                                   eps=args.eps)
        elif e == "defect-circuit":
            rows += EXPERIMENTS[e](k, n, x, r=args.r, trials=args.trials, seed=args.seed, delta=args.delta)
        elif e == "events":
            R = 2 * args.r + 2 if args.R is None else args.R
            rows += EXPERIMENTS[e](k, n, x, args.r, R, trials=args.trials, seed=args.seed)
        elif e == "rsw":
            rows += EXPERIMENTS[e](k, n, x, trials=args.trials, mode=args.mode or "mcmc", seed=args.seed,
                                   eps=args.eps)
    return rows


def snapshot(args):
    """One sample matching the experiment, for ``--svg``."""
    from .coupling import CoherentTriple, color_loops, sample_eta
    from .ising import es_gibbs_sample
    from .sampler import ModelParams, mcmc_chain

    k = _ks(args.k)[-1]
    n, x = parse_number(args.n), parse_number(args.x)
    e = args.experiment
    if e == "antiferro":
        sigma, _ = es_gibbs_sample(ball((0, 0), 2 * k), x, seed=args.seed)
        return sigma
    if e == "torus":
        region = torus(k, k if args.l is None else int(args.l))
        return next(iter(mcmc_chain(region, ModelParams(n, 1), seed=args.seed, samples=1)))
    if e == "rsw":
        space = annulus_space(k)
        return next(iter(mcmc_chain(space.region, ModelParams(n, x), seed=args.seed, samples=1, space=space)))
    region = ball((0, 0), k)
    w = next(iter(mcmc_chain(region, ModelParams(n, x), seed=args.seed, samples=1)))
    if e == "defect-circuit":
        rng = np.random.default_rng(args.seed)
        col = color_loops(w, n, rng)
        return CoherentTriple(col.red, col.blue, sample_eta(w, x, rng))
    return w


def write_report(rows, fh):
    fh.write(f"# hexloops report schema v{SCHEMA_VERSION}\n")
    wr = csv.writer(fh, lineterminator="\n")
    wr.writerow(CSV_COLUMNS)
    for r in rows:
        wr.writerow(r.row())


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config")
        known, _ = pre.parse_known_args(argv)
        if known.config:
            parser.set_defaults(**parse_config(known.config))
        args = parser.parse_args(argv)
        rows = run(args)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    except (UsageError, ValueError) as exc:
        print(f"xctl: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_report(rows, fh)
    else:
        write_report(rows, sys.stdout)
    if args.svg:
        render(snapshot(args), args.svg)
    failed = [r for r in rows if r.passed is False]
    for r in failed:
        print(f"xctl: FAIL {r.experiment} {r.event} ({r.params_text()}): {r.estimate} {r.note}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
