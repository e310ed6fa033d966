"""Command-line entry point: analytic curves, sweeps, exact values, verification."""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

from . import analysis as an
from .assignment import assignment_from_string, parse_strategy
from .engine import (ORACLE, ExperimentConfig, exact_block_expectation, exact_small_k,
                     interior_marginal, monte_carlo)
from .oracle import oracle_m1_batch
from .schedulers import BLOCK_OF, SCHEMES, run_batch, scheme_assignment
from .structure import render_ranges, split_subnetworks
from .topology import LinkRealization, all_links, check_enumerable

HEADER = "p,id,k,trials,value,ci_low,ci_high,source"
SCHEME_CHOICES = SCHEMES + (ORACLE,)
DEFAULT_WINDOW = {"scheme1": 10, "thm5": 4}
Z95 = 1.96


class CliError(Exception):
    pass


def fmt(v) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".10g")


def row(p, ident, k, trials, value, lo=None, hi=None, source="analytic") -> str:
    return ",".join([fmt(p), ident, fmt(k), fmt(trials), fmt(value), fmt(lo), fmt(hi), source])


def parse_grid(text: str) -> tuple[float, ...]:
    """``a:b:n`` -> n+1 evenly spaced points; ``a:a:n`` collapses to a single point."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise CliError(f"malformed grid {text!r}; expected start:stop:steps, e.g. 0:1:200") from None
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise CliError(f"grid {text!r} leaves [0, 1]")
    if a == b:
        return (a,)
    if n < 1:
        raise CliError(f"grid {text!r} needs at least one step")
    return tuple(a + (b - a) * k / n for k in range(n)) + (b,)


def read_config(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc.strerror}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".erasenet-", dir=folder)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _scheme_id(scheme: str, strategy) -> str:
    return f"oracle:{''.join(map(str, strategy))}" if scheme == ORACLE else scheme


def _check_scheme(scheme: str) -> None:
    if scheme not in SCHEME_CHOICES:
        raise CliError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEME_CHOICES)}")


def _check_k(scheme: str, K: int) -> None:
    block = BLOCK_OF.get(scheme, 1)
    if K < 1 or K % block:
        raise CliError(f"{scheme} needs K to be a positive multiple of {block}, got {K}")


# subcommands --------------------------------------------------------------

def cmd_analytic(args) -> int:
    curves = [c.strip() for c in args.curves.split(",") if c.strip()]
    parsed = []
    for c in curves:
        try:
            parsed.append(an.CurveId.parse(c))
        except ValueError as exc:
            raise CliError(str(exc)) from None
    grid = parse_grid(args.p)
    lines = [HEADER]
    for p in grid:
        for name, cid in zip(curves, parsed):
            v = an.normalized(cid, p) if args.normalize else an.eval_curve(cid, p)
            lines.append(row(p, name, None, None, v))
    write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_sweep(args) -> int:
    _check_scheme(args.scheme)
    if args.scheme != ORACLE:
        _check_k(args.scheme, args.k)
    strategy = parse_strategy(args.strategy)
    cfg = ExperimentConfig(args.scheme, args.k, parse_grid(args.p), args.trials, args.seed,
                           args.trim, strategy)
    ident = _scheme_id(args.scheme, strategy)
    lines = [HEADER]
    for est in monte_carlo(cfg):
        lo, hi = est.ci(Z95)
        lines.append(row(est.p, ident, est.K, est.trials, est.mean, lo, hi, "mc"))
    write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _dump(scheme: str, K: int, assignment, err) -> None:
    d, x = all_links(K)
    if scheme == ORACLE:
        counts = oracle_m1_batch(d, x, assignment)
        for m, c in enumerate(counts):
            r = LinkRealization(K, m)
            err.write(f"{r.to_hex()} -> max {int(c)} | {render_ranges(split_subnetworks(r, assignment))}\n")
        return
    delivered, server = run_batch(scheme, d, x)
    decompose = assignment.M == 1
    for m in range(len(delivered)):
        got = [i + 1 for i in range(K) if delivered[m, i]]
        servers = " ".join(f"{i}@{server[m, i - 1]}" for i in got)
        line = f"{m:x} -> {{{','.join(map(str, got))}}} ({servers})"
        if decompose:
            line += " | " + render_ranges(split_subnetworks(LinkRealization(K, m), assignment))
        err.write(line + "\n")


def cmd_exact(args) -> int:
    _check_scheme(args.scheme)
    grid = parse_grid(args.p)
    strategy = parse_strategy(args.strategy)
    ident = _scheme_id(args.scheme, strategy)
    lines = [HEADER]
    if args.k is None:
        if args.dump:
            raise CliError("--dump needs --k")
        if args.scheme in DEFAULT_WINDOW:
            window = args.window or DEFAULT_WINDOW[args.scheme]
            for p in grid:
                lines.append(row(p, ident, None, None, interior_marginal(args.scheme, p, window)[0],
                                 source="exact"))
        elif args.scheme == ORACLE:
            raise CliError("the oracle has no block form; pass --k")
        else:
            for p in grid:
                lines.append(row(p, ident, None, None, exact_block_expectation(args.scheme, p),
                                 source="exact"))
    else:
        K = args.k
        check_enumerable(K)
        if args.scheme == ORACLE:
            a = assignment_from_string(strategy, K)
        else:
            _check_k(args.scheme, K)
            a = scheme_assignment(args.scheme, K)
        if args.dump:
            _dump(args.scheme, K, a, sys.stderr)
        for p in grid:
            v = exact_small_k(args.scheme, K, p, a if args.scheme == ORACLE else None)
            lines.append(row(p, ident, K, None, v, source="exact"))
    write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_verify(args) -> int:
    from .verify import CHECKS, run_checks

    only = None
    if args.only:
        try:
            only = {int(v) for v in args.only.split(",")}
        except ValueError:
            raise CliError(f"--only expects comma-separated criterion numbers, got {args.only!r}") from None
        known = {n for n, _, _ in CHECKS}
        if only - known:
            raise CliError(f"unknown criteria {sorted(only - known)}; valid are 1..{max(known)}")
    results = run_checks(seed=args.seed, only=only, echo=print)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 0 if not failed else 1


def cmd_crossover(args) -> int:
    p = an.find_crossover(args.a, args.b, args.lo, args.hi)
    print(f"{args.a},{args.b},{fmt(p)}")
    return 0


# argument handling --------------------------------------------------------

# (flag, type, default) per subcommand; defaults apply after the config file
FLAGS = {
    "analytic": [("curves", str, "tau1,tau2,tau3,tau_tdma,thm4,thm5"), ("p", str, "0:1:200"),
                 ("normalize", bool, False), ("out", str, "-")],
    "sweep": [("scheme", str, None), ("k", int, 3000), ("p", str, "0:1:10"), ("trials", int, 200),
              ("seed", int, 0), ("trim", int, 6), ("strategy", str, "1"), ("out", str, "-")],
    "exact": [("scheme", str, None), ("p", str, "0:1:10"), ("k", int, None), ("window", int, None),
              ("strategy", str, "1"), ("dump", bool, False), ("out", str, "-")],
    "verify": [("seed", int, 0), ("only", str, None)],
    "crossover": [("a", str, None), ("b", str, None), ("lo", float, None), ("hi", float, None)],
}
HANDLERS = {"analytic": cmd_analytic, "sweep": cmd_sweep, "exact": cmd_exact,
            "verify": cmd_verify, "crossover": cmd_crossover}
HELP = {
    "analytic": "evaluate closed-form curves on a grid",
    "sweep": "Monte Carlo per-user DoF estimates",
    "exact": "exact expectations by enumeration",
    "verify": "run the acceptance checks",
    "crossover": "bisect the crossing point of two curves",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="erasenet", description="Linear interference network with link erasures.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, flags in FLAGS.items():
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", help="file of 'key = value' lines; flags override it")
        for flag, typ, default in flags:
            opt = "--" + flag.replace("_", "-")
            if typ is bool:
                sp.add_argument(opt, dest=flag, action="store_const", const=True, default=None)
            else:
                sp.add_argument(opt, dest=flag, type=typ, default=None,
                                help=f"default: {default}" if default is not None else None)
    return parser


def _coerce(typ, key, text):
    if typ is bool:
        low = text.lower()
        if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
            raise CliError(f"config key {key!r} expects a boolean, got {text!r}")
        return low in ("1", "true", "yes", "on")
    try:
        return typ(text)
    except ValueError:
        raise CliError(f"config key {key!r} expects {typ.__name__}, got {text!r}") from None


def resolve(args) -> argparse.Namespace:
    flags = FLAGS[args.command]
    conf = read_config(args.config) if args.config else {}
    known = {f for f, _, _ in flags}
    extra = set(conf) - known
    if extra:
        raise CliError(f"unknown config keys for {args.command}: {', '.join(sorted(extra))}")
    for flag, typ, default in flags:
        if getattr(args, flag) is None:
            setattr(args, flag, _coerce(typ, flag, conf[flag]) if flag in conf else default)
        if getattr(args, flag) is None and default is None and flag not in ("k", "window", "only"):
            raise CliError(f"{args.command} needs --{flag.replace('_', '-')}")
    return args


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = resolve(args)
        return HANDLERS[args.command](args)
    except (CliError, ValueError) as exc:
        print(f"erasenet {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print(f"erasenet {args.command}: interrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
