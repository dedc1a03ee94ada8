"""Command line front end.

Every subcommand writes delimited text (CSV, or JSON for ``design``) to
``--out`` or standard output.  Output files start with ``#`` comment lines
carrying the version, the seed and the sample counts, so a rerun with the same
arguments reproduces the file byte for byte.

Exit status: 0 on success, 2 for an invalid configuration, 3 when a size
guard refuses the request.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import __version__
from .channel import ResourceLimitError
from .decoder import CodeSpec
from .density_evolution import DEFAULT_SAMPLES, design
from .experiments import (
    DECODERS,
    FROZEN_MODES,
    block_error,
    capacity_rows,
    channel_from_args,
    de_vs_sim,
    polarization,
    rate_sweep,
)

EXIT_INVALID = 2
EXIT_RESOURCE = 3

# refuse density-evolution runs above this many sample updates
MAX_DE_WORK = 2e10


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _guard_de(n, M):
    if n < 0 or M < 1:
        raise ValueError("need n >= 0 and M >= 1")
    if (2 ** (n + 1)) * M > MAX_DE_WORK:
        raise ResourceLimitError(f"density evolution with n={n}, M={M} exceeds the work guard")


def _emit(args, meta, header, rows):
    buf = io.StringIO()
    buf.write(f"# cqpolar {__version__}\n")
    buf.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    _write(args, buf.getvalue())


def _write(args, text):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_capacity(args):
    if args.theta is not None:
        ch = channel_from_args(theta=args.theta)
        rows = capacity_rows(ch.delta, [ch.gamma])
    else:
        if args.delta is None:
            raise ValueError("give --delta or --theta")
        rows = capacity_rows(args.delta, args.gamma or [0.0])
    _emit(args, {"command": "capacity", "seed": args.seed}, ["delta", "gamma", "capacity"], rows)


def cmd_design(args):
    _guard_de(args.n, args.M)
    gamma = args.gamma[0] if args.gamma else None
    ch = channel_from_args(args.delta, gamma, args.theta)
    if args.K is None and args.target is None:
        raise ValueError("give --K or --target")
    result = design(ch, args.n, args.M, args.seed, K=args.K, target=args.target,
                    bound=args.bound, workers=args.workers)
    _write(args, result.to_json() + "\n")


def cmd_rate_sweep(args):
    _guard_de(args.n, args.M)
    if args.delta is None:
        raise ValueError("give --delta")
    if args.target is None:
        raise ValueError("give --target")
    gammas = args.gamma
    if not gammas:
        top = np.sqrt(args.delta * (1.0 - args.delta))
        gammas = [float(g) for g in np.linspace(0.0, top, args.points)]
    rows = rate_sweep(args.delta, gammas, args.n, args.M, args.seed, args.target, args.workers)
    meta = {"command": "rate-sweep", "seed": args.seed, "M": args.M, "n": args.n,
            "delta": args.delta, "target": args.target}
    _emit(args, meta, ["gamma", "rate_ub", "rate_ncub", "rate_mf_ub"], rows)


def cmd_polarization(args):
    ns = args.levels or [args.n]
    for n in ns:
        _guard_de(n, args.M)
    gamma = args.gamma[0] if args.gamma else None
    ch = channel_from_args(args.delta, gamma, args.theta)
    rows = polarization(ch, ns, args.M, args.seed, args.workers)
    meta = {"command": "polarization", "seed": args.seed, "M": args.M, "delta": ch.delta,
            "gamma": ch.gamma}
    _emit(args, meta, ["n", "index_fraction", "epsilon"], rows)


def cmd_de_vs_sim(args):
    if args.n > 3 and args.theta is None:
        raise ResourceLimitError("mixed-state comparison is limited to n <= 3")
    if args.n > 4:
        raise ResourceLimitError("pure-state comparison is limited to n <= 4")
    gamma = args.gamma[0] if args.gamma else None
    ch = channel_from_args(args.delta, gamma, args.theta)
    mode = args.mode.replace("-", "_")
    rows = de_vs_sim(ch, args.n, theta=args.theta, mode=mode, trials=args.trials, seed=args.seed)
    meta = {"command": "de-vs-sim", "mode": args.mode, "seed": args.seed, "delta": ch.delta,
            "gamma": ch.gamma}
    if mode == "sampled":
        meta["trials"] = args.trials
    _emit(args, meta, ["bit", "de_error", "sim_error"], rows)


def cmd_block_error(args):
    if args.delta is None:
        raise ValueError("give --delta")
    N = 1 << args.n
    if args.info:
        info = [i - 1 for i in args.info]
    elif args.K is not None or args.target is not None:
        info = None
    else:
        raise ValueError("give --info, --K or --target")
    rows = []
    for gamma in args.gamma or [0.0]:
        ch = channel_from_args(args.delta, gamma)
        chosen = info
        if chosen is None:
            _guard_de(args.n, args.M)
            chosen = design(ch, args.n, args.M, args.seed, K=args.K, target=args.target,
                            bound=args.bound).info_set
        code = CodeSpec.from_info_set(ch, N, chosen)
        res = block_error(code, args.trials, args.seed, args.decoder, args.frozen, args.workers)
        rows.append((float(gamma), res.rate, res.trials, res.seed, res.errors, res.low,
                     res.high, " ".join(str(i + 1) for i in chosen)))
    meta = {"command": "block-error", "seed": args.seed, "trials": args.trials,
            "decoder": args.decoder, "frozen": args.frozen, "delta": args.delta, "n": args.n}
    _emit(args, meta, ["gamma", "block_error", "trials", "seed", "errors", "wilson_low",
                       "wilson_high", "info_set"], rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqpolar", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cqpolar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--delta", type=float)
        p.add_argument("--gamma", type=_floats, help="one value or a comma-separated list")
        p.add_argument("--theta", type=float, help="pure-state channel angle in [0, pi/2]")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=0)
        return p

    add("capacity", cmd_capacity, "Holevo capacity of the channel")

    p = add("design", cmd_design, "code design by density evolution (JSON)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--M", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--K", type=int)
    p.add_argument("--target", type=float)
    p.add_argument("--bound", choices=["ub", "ncub"], default="ub")
    p.add_argument("--workers", type=int, default=1)

    p = add("rate-sweep", cmd_rate_sweep, "achievable rate versus gamma for a block-error target")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--M", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--target", type=float)
    p.add_argument("--points", type=int, default=10, help="grid size when --gamma is omitted")
    p.add_argument("--workers", type=int, default=1)

    p = add("polarization", cmd_polarization, "sorted effective-channel errors per length")
    p.add_argument("--n", type=int, default=7)
    p.add_argument("--levels", type=_ints, help="comma-separated list of n values")
    p.add_argument("--M", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--workers", type=int, default=1)

    p = add("de-vs-sim", cmd_de_vs_sim, "exact density evolution against the genie decoder")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--mode", choices=["genie", "sampled", "genie-collapse"], default="genie")
    p.add_argument("--trials", type=int, default=1000, help="sampled outputs in sampled mode")

    p = add("block-error", cmd_block_error, "Monte Carlo block error rate")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--info", type=_ints, help="1-based information positions")
    p.add_argument("--K", type=int)
    p.add_argument("--target", type=float)
    p.add_argument("--bound", choices=["ub", "ncub"], default="ub")
    p.add_argument("--M", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--decoder", choices=list(DECODERS), default="pmbpqm")
    p.add_argument("--frozen", choices=list(FROZEN_MODES), default="random")
    p.add_argument("--workers", type=int, default=1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return 0
