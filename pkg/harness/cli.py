"""
Command-line entry point.

    poisonsim <command> [--config FILE] [--seed N] [--out DIR] [--jobs N]

Exit codes: 0 success, 2 config error, 3 data error, 4 internal error.
"""

import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional

from config import RESULTS_DIR
from exceptions import PoisonSimError
from harness.campaigns import (
    run_beam_campaign,
    run_beam_training,
    run_dfoh_campaign,
    run_dfoh_training,
    run_gen_topology,
    run_monitor_sweep,
)
from harness.experiment_config import load_config
from harness.logging_setup import configure_logging
from harness.results import summarize

logger = logging.getLogger(__name__)

COMMANDS: Dict[str, Callable] = {
    'gen-topology': run_gen_topology,
    'train-dfoh': run_dfoh_training,
    'train-beam': run_beam_training,
    'attack-dfoh': run_dfoh_campaign,
    'attack-beam': run_beam_campaign,
    'eval-monitors': run_monitor_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='poisonsim',
        description='Simulate poisoning attacks on BGP hijack detectors and the private-monitor countermeasure.',
    )
    parser.add_argument('--log-level', default=None, help='Logging level (default from POISONSIM_LOG_LEVEL)')
    sub = parser.add_subparsers(dest='command', required=True)
    for name in [*COMMANDS, 'report']:
        command = sub.add_parser(name)
        command.add_argument('--config', default=None, help='Experiment config (JSON)')
        command.add_argument('--seed', type=int, default=None, help='Root seed, overrides the config')
        command.add_argument('--out', default=None, help='Output directory')
        command.add_argument('--jobs', type=int, default=None, help='Parallel workers')
    return parser


def run(args: argparse.Namespace) -> None:
    if args.command == 'report':
        for line in summarize(args.out or RESULTS_DIR):
            print(line)
        return
    config = load_config(args.config, seed=args.seed).with_overrides(out=args.out, jobs=args.jobs)
    logger.info("%s: seed %d, config %s, out %s", args.command, config.seed, config.config_hash()[:12], config.out)
    bundle = COMMANDS[args.command](config)
    for name, path in sorted(bundle.tables.items()):
        logger.info("%s -> %s", name, path)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(level=args.log_level)
    try:
        run(args)
    except PoisonSimError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code
    except Exception:
        logger.exception("internal error")
        return 4
    return 0


if __name__ == '__main__':
    sys.exit(main())
