#!/usr/bin/env python3
"""Unified command line for the mdim-spectra experiments.

This is the main entry point for every experiment script:
- entropy-scale: h(f, eps) sweep
- mdim: coupled-schedule metric mean dimension
- level-spectrum: Lambda_phi over an alpha grid
- hphi: measure-theoretic level entropy over an alpha grid
- variational-check: Lambda vs H_phi vs Bowen table with pass/fail
- spec-demo: Moran construction transcript and EDP bound
- oracle: DP/Gibbs or weighted-shift oracle tables
- cache: count cache statistics, listing and cleanup

Exit codes: 0 success, 1 tolerance failure, 2 configuration error,
3 budget exceeded, 130 interrupted.
"""

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from mdim_spectra.common.config import load_config
from mdim_spectra.common.errors import BudgetError, ConfigError, MdimSpectraError
from mdim_spectra.database.models import CountCache, CountCacheConfig, get_default_cache
from mdim_spectra.services.experiment_service import ExperimentService, get_experiment_service
from mdim_spectra.utils.locking import OutputLock
from scripts import entropy_scale, hphi, level_spectrum, manage_cache, mdim, oracle, spec_demo, variational_check

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_INTERRUPTED = 130

ScriptMain = Callable[..., int]

SCRIPTS: dict[str, ScriptMain] = {
    "entropy-scale": entropy_scale.main,
    "mdim": mdim.main,
    "level-spectrum": level_spectrum.main,
    "hphi": hphi.main,
    "variational-check": variational_check.main,
    "spec-demo": spec_demo.main,
    "oracle": oracle.main,
}

DEFAULT_CACHE = "default"


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subparser per subcommand.

    Returns:
        Configured parser.
    """
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging")
    shared.add_argument(
        "--cache",
        nargs="?",
        const=DEFAULT_CACHE,
        default=None,
        help="sqlite count cache (data/counts.db when no path is given)",
    )

    experiment = argparse.ArgumentParser(add_help=False, parents=[shared])
    experiment.add_argument("--config", type=Path, required=True, help="experiment config file")
    experiment.add_argument("--out", type=Path, default=None, help="output directory (overrides output.dir)")
    experiment.add_argument("--seed", type=int, default=None, help="seed of the sampled modes")
    experiment.add_argument("--tolerance", type=float, default=None, help="variational-check tolerance in nats")
    experiment.add_argument("--max-candidates", type=int, default=None, help="largest enumerated candidate family")
    experiment.add_argument("--copy", action="store_true", help="copy the text summary to the clipboard")
    experiment.add_argument("--timings", action="store_true", help="fill the elapsed_ms column of count rows")

    parser = argparse.ArgumentParser(
        prog="mdim-spectra", description="Entropy, mean dimension and level-set spectra experiments."
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name, script in SCRIPTS.items():
        subparsers.add_parser(name, parents=[experiment], help=sys.modules[script.__module__].__doc__)

    cache = subparsers.add_parser("cache", parents=[shared], help="count cache statistics, listing and cleanup")
    cache.add_argument("action", choices=["stats", "list", "clear"])
    cache.add_argument("--limit", type=int, default=None, help="rows shown by 'list'")
    cache.add_argument("--yes", action="store_true", help="clear without asking")
    return parser


def configure_logging(*, verbosity: int) -> None:
    """Route library logging to stderr at the requested verbosity."""
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def open_cache(*, location: str | None) -> CountCache | None:
    """Open the requested count cache.

    Args:
        location: None for no cache, ``default`` for data/counts.db, otherwise a path.
    """
    if location is None:
        return None
    if location == DEFAULT_CACHE:
        return get_default_cache()
    return CountCache(config=CountCacheConfig(db_path=Path(location)))


def run_experiment(*, args: argparse.Namespace) -> int:
    """Load the config, lock the output directory and run one experiment script.

    Returns:
        Exit status of the script.
    """
    config = load_config(args.config).with_overrides(
        seed=args.seed, tolerance=args.tolerance, max_candidates=args.max_candidates, output_dir=args.out
    )
    service: ExperimentService = get_experiment_service(
        config=config, cache=open_cache(location=args.cache), timings=args.timings
    )
    with OutputLock(out_dir=config.output_dir):
        return SCRIPTS[args.subcommand](service=service, out_dir=config.output_dir, copy=args.copy)


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run the subcommand and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    configure_logging(verbosity=args.verbose)

    try:
        if args.subcommand == "cache":
            cache = open_cache(location=args.cache or DEFAULT_CACHE)
            assert cache is not None
            return manage_cache.main(cache=cache, action=args.action, limit=args.limit, confirmed=args.yes)
        return run_experiment(args=args)

    except KeyboardInterrupt:
        print("\n\n👋 Interrupted.")
        return EXIT_INTERRUPTED
    except ConfigError as e:
        print(f"❌ Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetError as e:
        print(f"❌ Budget exceeded: {e}", file=sys.stderr)
        print(f"💡 Rerun with --max-candidates {e.required}", file=sys.stderr)
        return EXIT_BUDGET
    except MdimSpectraError as e:
        print(f"❌ Invalid experiment: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
