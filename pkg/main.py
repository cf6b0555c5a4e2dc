#!/usr/bin/env python3
"""
Graph Preorder Toolkit
Computes coarsest equitable partitions and the inductive node preorder of
simple graphs, and checks that logistic network dynamics respect them.
"""

import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional
import argparse

from cli import CommandError, InitialState, run_command
from config import ConfigError, RunConfig
from dynamics import DynamicsError
from graph_core import GraphError

def setup_logging(log_level: str = "INFO", log_file: Optional[Path] = None) -> None:
    """Configure application logging."""
    log_levels = {
        "DEBUG": logging.DEBUG,
        "INFO": logging.INFO,
        "WARNING": logging.WARNING,
        "ERROR": logging.ERROR,
        "CRITICAL": logging.CRITICAL
    }

    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file is not None:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=log_levels.get(log_level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True
    )

def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Expected comma separated numbers, got '{text}'") from e

def build_parser() -> argparse.ArgumentParser:
    """Top-level parser with one subparser per command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=Path("config.json"), help="Path to configuration file")
    common.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default="INFO",
        help="Set the logging level"
    )
    common.add_argument("--log-file", type=Path, help="Also write the log to this file")
    common.add_argument("--seed", type=int, help="Seed for generators and random starts")
    common.add_argument("--out", dest="output_dir", help="Directory for result files")

    graph = argparse.ArgumentParser(add_help=False)
    source = graph.add_mutually_exclusive_group()
    source.add_argument("--graph", dest="graph_file", help="Edge list (.txt) or interchange (.json) file")
    source.add_argument("--generate", dest="generator_spec", help="Generator spec name:params:seed, e.g. cycle:4")

    dyn = argparse.ArgumentParser(add_help=False)
    dyn.add_argument("--gamma", type=float, help="Infection rate")
    dyn.add_argument("--horizon", type=float, help="Integration horizon")
    dyn.add_argument("--dt", type=float, help="RK4 step")
    dyn.add_argument("--h", type=float, help="Discrete map step (default: largest valid step)")
    dyn.add_argument("--steps", dest="discrete_steps", type=int, help="Number of discrete map steps")
    dyn.add_argument("--tol", type=float, help="Order and lumping tolerance")
    state = dyn.add_mutually_exclusive_group()
    state.add_argument("--y0", type=float, help="Uniform initial value")
    state.add_argument("--y0-values", type=_float_list, help="One initial value per node")
    state.add_argument("--y0-random", action="store_true", help="Uniform random start from --seed")
    state.add_argument("--y0-classes", type=_float_list, help="One initial value per preorder class")
    dyn.add_argument("--discrete", action="store_true", help="Use the discrete map instead of RK4")

    parser = argparse.ArgumentParser(description="Graph Preorder Toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("cep", parents=[common, graph], help="Coarsest equitable partition")
    sub.add_parser("preorder", parents=[common, graph], help="Maximal inductive preorder and its condensation")
    simulate = sub.add_parser("simulate", parents=[common, graph, dyn], help="Logistic dynamics with order monitor")
    simulate.add_argument("--require-consistent", action="store_true",
                          help="Fail unless y0 is ordered consistently with the preorder")
    sub.add_parser("quotient", parents=[common, graph, dyn], help="Lumped dynamics on the equitable quotient")
    sub.add_parser("bound", parents=[common, graph, dyn], help="Bracket a trajectory between class-constant runs")
    verify = sub.add_parser("verify", parents=[common], help="Cross-check preorder, partition and oracles")
    verify.add_argument("--workers", type=int, help="Parallel workers for the check batches")
    verify.add_argument("--max-depth", type=int, help="Walk depth for the adapted-map oracle")
    return parser

def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    return build_parser().parse_args(argv)

def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Load the config file and apply the flags that were given."""
    config = RunConfig.load(args.config)
    overrides = {
        'command': args.command,
        'seed': args.seed,
        'output_dir': args.output_dir,
    }
    for key in ('graph_file', 'generator_spec', 'gamma', 'horizon', 'dt', 'h',
                'discrete_steps', 'workers', 'max_depth'):
        overrides[key] = getattr(args, key, None)
    tol = getattr(args, 'tol', None)
    if tol is not None:
        overrides['order'] = tol
        overrides['lumping'] = tol
    if overrides['graph_file'] is not None or overrides['generator_spec'] is not None:
        # a flag source replaces whatever source the file names
        config = replace(config, graph_file=None, generator_spec=None)
    return config.with_overrides(**overrides)

def initial_from_args(args: argparse.Namespace) -> InitialState:
    return InitialState(
        uniform=getattr(args, 'y0', None),
        values=getattr(args, 'y0_values', None),
        random=getattr(args, 'y0_random', False),
        class_values=getattr(args, 'y0_classes', None),
        require_consistent=getattr(args, 'require_consistent', False),
        discrete=getattr(args, 'discrete', False)
    )

def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point; returns the process exit status."""
    args = parse_arguments(argv)
    setup_logging(args.log_level, args.log_file)
    logger = logging.getLogger(__name__)

    try:
        logger.info(f"Starting command '{args.command}'")
        config = config_from_args(args)
        initial = initial_from_args(args)
        status = run_command(config, initial)
        logger.info(f"Command '{args.command}' finished with status {status}")
        return status

    except (ConfigError, GraphError, DynamicsError, CommandError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 2
    except Exception as e:
        logger.error(f"Command '{args.command}' failed: {e}")
        return 1

if __name__ == "__main__":
    sys.exit(main())
