"""Command-line driver.

Subcommands: eigplot, errhist, omegasweep, noisestats, bounds, structure.
Configuration comes from an optional JSON/TOML file (--config) with flags
taking precedence.  The output root defaults to $KACZMARZ_LAB_OUT or
./runs; each command owns one subdirectory and writes the resolved config
next to its outputs.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, NumericalError
from .experiments import COMMANDS, ExperimentConfig, run_command


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON or TOML config file")
    sub.add_argument("--out", help="output root directory")
    sub.add_argument("--problem", choices=("gravity", "baart", "paralleltomo"))
    sub.add_argument("--n", type=int, help="gravity/baart size")
    sub.add_argument("--d", type=float, help="gravity depth parameter")
    sub.add_argument("--N", type=int, help="tomography image side")
    sub.add_argument("--n-angles", dest="n_angles", type=int)
    sub.add_argument("--rays", type=int, help="rays per angle")
    sub.add_argument("--width", type=float, help="detector width (default rays-1)")
    sub.add_argument("--ordering", choices=("default", "random"))
    sub.add_argument("--ordering-seed", dest="ordering_seed", type=int)
    sub.add_argument("--xbar-mode", dest="xbar_mode", choices=("default", "first-row"))
    sub.add_argument("--omega", type=float)
    sub.add_argument("--sweeps", type=int)
    sub.add_argument("--methods", nargs="+",
                     choices=("standard", "symmetric", "randomized", "cgls"))
    sub.add_argument("--solver-seed", dest="solver_seed", type=int)
    sub.add_argument("--sigma", type=float, help="noise standard deviation")
    sub.add_argument("--noise-seed", dest="noise_seed", type=int)
    sub.add_argument("--realizations", type=int)
    sub.add_argument("--ks", nargs="+", type=int, help="iteration counts to analyze")
    sub.add_argument("--omega-grid", dest="omega_grid", nargs="+", type=float)
    sub.add_argument("--omegas-bounds", dest="omegas_bounds", nargs="+", type=float)
    sub.add_argument("--rank-tol", dest="rank_tol", type=float)
    sub.add_argument("--zero-tol", dest="zero_tol", type=float)
    sub.add_argument("--im-tol", dest="im_tol", type=float)
    sub.add_argument("--n-mc", dest="n_mc", type=int)
    sub.add_argument("--mc-seed", dest="mc_seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kaczmarz-lab",
        description="Row-action solvers and spectral analysis of the sweep operator",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "eigplot": "spectrum of the restricted sweep operator",
        "errhist": "error histories (noise-free and noisy)",
        "omegasweep": "spectrum statistics over an omega grid",
        "noisestats": "expected noise-error norms and xi decomposition",
        "bounds": "spectral-radius bounds table",
        "structure": "exact row-orthogonality structure",
    }
    for name in COMMANDS:
        _add_common(subs.add_parser(name, help=descriptions[name]))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        k: v
        for k, v in vars(args).items()
        if k not in ("command", "config") and v is not None
    }
    try:
        cfg = ExperimentConfig.from_sources(args.config, overrides)
        run_command(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
