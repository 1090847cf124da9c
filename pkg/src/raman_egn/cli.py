"""Command line entry point ``raman-egn`` with subcommands nli, ssfm, compare and profile."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import load_config
from .core import ConfigError
from .egn.link import MU_KERNELS
from .egn.model import NliModel, NliOptions
from .egn.montecarlo import SAMPLING_MODES, McSettings
from .egn.triplets import BOUNDS
from .report import (COMPARE_COLUMNS, PROFILE_COLUMNS, SSFM_COLUMNS, compare_rows, emit_report, gap_summary,
                     profile_rows, rows_to_csv, ssfm_rows)
from .srs import PROFILE_VARIANTS, link_profiles, output_log_gain
from .ssfm import run_link

logger = logging.getLogger("raman_egn")

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2


def _channels(arg: str, n: int):
    if arg == "all":
        return list(range(1, n + 1))
    out = [int(x) for x in arg.split(",")]
    bad = [k for k in out if not 1 <= k <= n]
    if bad:
        raise ConfigError(f"channel index out of range 1..{n}: {bad}")
    return out


def _write(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
        logger.info("wrote %s", out)


def _seed(args, cfg) -> int:
    return int(args.seed if args.seed is not None else cfg.run.get("seed", 0))


def _nli(args, cfg):
    cap = {} if args.max_samples is None else {"max_samples": args.max_samples}
    mc = McSettings(seed=_seed(args, cfg), tol_db=args.tol_db, sampling=args.sampling, **cap)
    options = NliOptions(mode=args.mode, profile=args.profile, mu_kernel=args.mu_kernel,
                         triplet_bound=args.triplet_bound, mc=mc)
    model = NliModel(cfg.plan, cfg.link, options, cfg.formats)
    return model.report(_channels(args.channel, len(cfg.plan)))


def _ssfm(args, cfg):
    return run_link(cfg.plan, cfg.link, n_symbols=args.symbols, phi_max=args.phi_max, seed=_seed(args, cfg),
                    profile=args.profile, formats=cfg.formats, channels=_channels(args.channel, len(cfg.plan)))


def cmd_nli(args, cfg) -> int:
    report = _nli(args, cfg)
    fmt = "json" if args.out and Path(args.out).suffix.lower() == ".json" else "csv"
    text = emit_report(report, fmt=fmt)
    _write(text, args.out)
    if not report.converged:
        logger.warning("Monte Carlo did not converge for every term; results are partial")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_ssfm(args, cfg) -> int:
    _write(rows_to_csv(ssfm_rows(_ssfm(args, cfg)), SSFM_COLUMNS), args.out)
    return EXIT_OK


def cmd_compare(args, cfg) -> int:
    report = _nli(args, cfg)
    result = _ssfm(args, cfg)
    rows = compare_rows(report, result)
    summary = gap_summary(rows)
    _write(rows_to_csv(rows, COMPARE_COLUMNS), args.out)
    print(f"max |delta eta| = {summary['max_gap_db']:.3f} dB, mean |delta eta| = {summary['mean_gap_db']:.3f} dB",
          file=sys.stderr)
    if not report.converged:
        logger.warning("Monte Carlo did not converge for every term; results are partial")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_profile(args, cfg) -> int:
    link, plan = cfg.link, cfg.plan
    if not 1 <= args.span <= len(link):
        raise ConfigError(f"span index out of range 1..{len(link)}")
    profiles = link_profiles(plan, link, args.profile)
    scale = np.ones(len(plan))
    for span, prof in list(zip(link, profiles))[: args.span - 1]:
        scale = scale * np.exp(output_log_gain(span, prof, plan.freqs))
    span = link.spans[args.span - 1]
    z = np.linspace(0.0, span.length, int(np.ceil(span.length / args.step)) + 1)
    rows = profile_rows(plan, profiles[args.span - 1], z, scale)
    _write(rows_to_csv(rows, PROFILE_COLUMNS), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="TOML or JSON configuration file")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--profile", choices=PROFILE_VARIANTS, default="simplified", help="SRS power profile")
    common.add_argument("--seed", type=int, help="random seed (default: [run] seed of the config, else 0)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-q", "--quiet", action="store_true")
    verbosity.add_argument("-v", "--verbose", action="store_true")

    channel = argparse.ArgumentParser(add_help=False)
    channel.add_argument("--channel", default="all", help="1-based channel index, comma list or 'all'")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--tol-db", type=float, default=0.05, help="Monte Carlo convergence threshold in dB")
    model.add_argument("--mode", choices=("egn", "gn"), default="egn")
    model.add_argument("--mu-kernel", choices=MU_KERNELS, default="table")
    model.add_argument("--triplet-bound", choices=BOUNDS, default="support")
    model.add_argument("--sampling", choices=SAMPLING_MODES, default="uniform")
    model.add_argument("--max-samples", type=int, help="Monte Carlo sample cap per term")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--symbols", type=int, default=2**13, help="symbols per channel (power of two)")
    sim.add_argument("--phi-max", type=float, default=1e-4, help="maximum nonlinear phase per step [rad]")

    p = argparse.ArgumentParser(prog="raman-egn", description="NLI in SRS-affected multi-span WDM links")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("nli", parents=[common, channel, model], help="EGN model NLI coefficients").set_defaults(
        func=cmd_nli)
    sub.add_parser("ssfm", parents=[common, channel, sim], help="split-step reference simulation").set_defaults(
        func=cmd_ssfm)
    sub.add_parser("compare", parents=[common, channel, model, sim], help="model vs split-step per channel"
                   ).set_defaults(func=cmd_compare)
    prof = sub.add_parser("profile", parents=[common], help="channel power along one span")
    prof.add_argument("--span", type=int, default=1, help="1-based span index")
    prof.add_argument("--step", type=float, default=1e3, help="z grid step [m]")
    prof.set_defaults(func=cmd_profile)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.quiet else logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (ConfigError, OSError) as exc:
        print(f"raman-egn: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
