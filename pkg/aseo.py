#!/usr/bin/env python3
"""
Aseo - Answer Set Enumeration by Optimality CLI

Command-line interface for ranked answer set enumeration, benchmark
generation and approximate Bayesian inference.
"""

import sys
import json
import time
import logging
import argparse
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from src import __version__
from src.bayes import (
    DEFAULT_SCALE,
    QuerySpec,
    approximate_query,
    dump_network,
    exact_posterior,
    load_network,
    random_network,
    relevant_subnetwork,
)
from src.bench import BenchRunner, load_instances
from src.config_loader import Config
from src.errors import (
    ContractError,
    CostOverflowError,
    NetworkError,
    ParseError,
    SearchTimeout,
    UndefinedPosteriorError,
    VerificationError,
)
from src.generators import generate_pn, generate_random
from src.parser import parse_file
from src.report import FORMATS, ModelWriter, RunReport
from src.strategies import Mode, run_strategy

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_MODELS = 2
EXIT_TIMEOUT = 3
EXIT_USAGE = 64

MODES = [mode.value for mode in Mode]
LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR']


def setup_logging(level: str = "INFO", format: Optional[str] = None):
    """
    Setup logging configuration

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR)
        format: Record format
    """
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format=format or '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True
    )


def load_settings(args, overrides: Dict[str, object], cleared: Sequence[str] = ()) -> Optional[Config]:
    """
    Build the configuration for a command and set up logging

    Args:
        args: Parsed arguments carrying config and log_level
        overrides: Key path to flag value, None when the flag is absent
        cleared: Key paths reset to None (e.g. by --all)

    Returns:
        Validated configuration, or None after logging why it is invalid
    """
    config = Config(args.config) if args.config else Config()
    config.override(overrides)
    for key_path in cleared:
        config.set(key_path, None)

    try:
        config.validate()
    except ContractError as e:
        logging.error(f"{e}")
        return None

    setup_logging(args.log_level or config.get("logging.level"), config.get("logging.format"))
    return config


def emit_text(text: str, output: Optional[str]):
    if output:
        Path(output).write_text(text, encoding="utf-8")
        logging.info(f"Wrote {output}")
    else:
        sys.stdout.write(text)


def solve_command(args):
    """Handle the 'solve' command"""
    config = load_settings(
        args,
        {
            "enumeration.mode": args.mode,
            "enumeration.k": args.k,
            "output.format": args.format,
            "enumeration.timeout": args.timeout,
            "solver.branching": None if args.seed is None else "shuffled",
            "solver.seed": args.seed,
        },
        cleared=["enumeration.k"] if args.all else [],
    )
    if config is None:
        return EXIT_INPUT

    mode = Mode(config.get("enumeration.mode"))
    k = config.get("enumeration.k")
    if mode is Mode.SMART and k is None:
        logging.error("Smart enumeration needs a finite -k; the window is undefined for --all")
        return EXIT_USAGE

    start = time.perf_counter()
    try:
        program = parse_file(args.file)
    except (ParseError, CostOverflowError, ContractError, FileNotFoundError) as e:
        logging.error(f"Error reading program: {e}")
        return EXIT_INPUT
    parsed = time.perf_counter()

    writer = ModelWriter(program, config.get("output.format", "text"))
    report = RunReport(mode.value, k)
    search = config.search_config(config.get("enumeration.timeout"))

    status = EXIT_OK
    try:
        run_strategy(mode, program, k, search, sink=writer, summary=report.summary)
    except SearchTimeout as e:
        logging.warning(f"{e}; output is partial")
        report.status = "timeout"
        status = EXIT_TIMEOUT
    except (ContractError, CostOverflowError, VerificationError) as e:
        logging.error(f"Error during enumeration: {e}")
        return EXIT_INPUT

    report.phases = {"parse": parsed - start, "enumerate": time.perf_counter() - parsed}
    if not writer.records and status == EXIT_OK:
        report.status = "unsat"
        status = EXIT_NO_MODELS
    writer.finish(report)
    return status


def gen_command(args):
    """Handle the 'gen' command"""
    setup_logging(args.log_level or "INFO")

    try:
        if args.family == "pn":
            text = generate_pn(args.n)
        elif args.family == "random":
            text = generate_random(args.atoms, args.rules, args.levels, args.seed)
        else:
            text = dump_network(random_network(args.variables, args.seed, args.max_parents)) + "\n"
    except (ContractError, CostOverflowError, NetworkError) as e:
        logging.error(f"Error generating instance: {e}")
        return EXIT_INPUT

    emit_text(text, args.output)
    return EXIT_OK


def parse_evidence(pairs: Optional[List[str]]) -> Dict[str, bool]:
    """
    Parse name=true|false evidence arguments

    Args:
        pairs: Raw --evidence values

    Returns:
        Evidence mapping
    """
    evidence = {}
    for pair in pairs or []:
        name, sep, value = pair.partition("=")
        value = value.strip().lower()
        if not sep or value not in ("true", "false"):
            raise NetworkError(f"Evidence must look like name=true|false, got '{pair}'")
        evidence[name.strip()] = value == "true"
    return evidence


def bayes_command(args):
    """Handle the 'bayes' command"""
    config = load_settings(
        args,
        {
            "bayes.k": args.k,
            "bayes.scale": args.scale,
            "bayes.mode": args.mode,
            "bayes.simplify": False if args.no_simplify else None,
            "output.format": args.format,
        },
        cleared=["bayes.k"] if args.all else [],
    )
    if config is None:
        return EXIT_INPUT

    mode = Mode(config.get("bayes.mode"))
    k = config.get("bayes.k")
    if mode is Mode.SMART and k is None:
        logging.error("Smart enumeration needs a finite -k; the window is undefined for --all")
        return EXIT_USAGE

    try:
        path = Path(args.network)
        if not path.exists():
            raise FileNotFoundError(f"Network file not found: {path}")
        net = load_network(path.read_text(encoding="utf-8"))
        query = QuerySpec(args.query, parse_evidence(args.evidence))
        query.validate(net)

        if config.get("bayes.simplify", True):
            net = relevant_subnetwork(net, query)
            query = query.restricted(net)

        search = config.search_config(args.timeout)
        estimate = approximate_query(net, query, k, config.get("bayes.scale", DEFAULT_SCALE), mode, search)
        if args.exact:
            estimate.exact = exact_posterior(net, query)
    except (NetworkError, ContractError, CostOverflowError, FileNotFoundError) as e:
        logging.error(f"Error in Bayesian query: {e}")
        return EXIT_INPUT
    except UndefinedPosteriorError as e:
        logging.error(f"Posterior undefined: {e}")
        return EXIT_NO_MODELS
    except SearchTimeout as e:
        logging.error(f"{e}")
        return EXIT_TIMEOUT

    if config.get("output.format", "text") == "json":
        print(json.dumps(estimate.to_dict(), indent=2))
    else:
        print(f"P({args.query} | e) ~ {estimate.posterior:.6f}")
        if estimate.exact is not None:
            print(f"exact {estimate.exact:.6f}, error {abs(estimate.posterior - estimate.exact):.2e}")
    return EXIT_OK


def bench_command(args):
    """Handle the 'bench' command"""
    config = load_settings(
        args,
        {
            "bench.modes": args.modes,
            "bench.k_sweep": args.k_sweep,
            "bench.timeout": args.timeout,
            "bench.jobs": args.jobs,
        },
    )
    if config is None:
        return EXIT_INPUT

    try:
        instances = load_instances(args.targets)
        runner = BenchRunner(
            modes=config.get("bench.modes"),
            k_sweep=config.get("bench.k_sweep"),
            timeout=config.get("bench.timeout"),
            jobs=config.get("bench.jobs", 1),
        )
    except (ContractError, CostOverflowError, NetworkError, FileNotFoundError, ValueError) as e:
        logging.error(f"Error preparing benchmark: {e}")
        return EXIT_INPUT

    results = runner.run(instances, progress=not args.no_progress)
    if args.out:
        with open(args.out, 'w', newline='') as f:
            runner.write_csv(results, f)
        logging.info(f"Wrote {len(results)} cells to {args.out}")
    else:
        runner.write_csv(results, sys.stdout)
    return EXIT_OK


def config_command(args):
    """Handle the 'config' command"""
    if args.action == "generate":
        config = Config()
        output_path = args.output or "config.json"
        config.save(output_path)
        print(f"Configuration file generated: {output_path}")
        return EXIT_OK
    elif args.action == "show":
        config = Config(args.config) if args.config else Config()
        print(json.dumps(config.to_dict(), indent=2))
        return EXIT_OK


def add_common(parser: argparse.ArgumentParser, with_config: bool = True):
    if with_config:
        parser.add_argument('-c', '--config', help='Configuration file path')
    parser.add_argument('--log-level', choices=LOG_LEVELS, help='Logging level')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Aseo - Answer Set Enumeration by Optimality",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Stream all answer sets of a program, best first
  aseo.py solve instances/three_way.lp --mode weight --all

  # The 10 best answer sets with the top-k window
  aseo.py solve program.lp --mode smart -k 10 --format json

  # Generate benchmark programs
  aseo.py gen pn --n 4 -o pn4.lp
  aseo.py gen random --atoms 10 --rules 20 --levels 2 --seed 7

  # Approximate P(x3 | x1=true) from the 10 best assignments per branch
  aseo.py bayes instances/chain.json --query x3 --evidence x1=true -k 10

  # Compare strategies on P_4..P_8
  aseo.py bench pn:4-8 --modes weight smart --k-sweep 10 100 --out pn.csv
        """
    )

    parser.add_argument(
        '--version',
        action='version',
        version=f'Aseo {__version__}'
    )

    subparsers = parser.add_subparsers(dest='command', help='Command to execute')

    # Solve command
    solve_parser = subparsers.add_parser('solve', help='Enumerate answer sets by optimality')
    solve_parser.add_argument('file', help='Ground program (.lp)')
    solve_parser.add_argument('-m', '--mode', choices=MODES, help='Enumeration strategy')
    count = solve_parser.add_mutually_exclusive_group()
    count.add_argument('-k', type=int, help='Number of answer sets')
    count.add_argument('--all', action='store_true', help='Enumerate every answer set')
    solve_parser.add_argument('-f', '--format', choices=FORMATS, help='Output format')
    solve_parser.add_argument('-t', '--timeout', type=float, help='Timeout in seconds')
    solve_parser.add_argument('--seed', type=int, help='Shuffle the branching order with this seed')
    add_common(solve_parser)
    solve_parser.set_defaults(func=solve_command)

    # Gen command
    gen_parser = subparsers.add_parser('gen', help='Generate benchmark instances')
    families = gen_parser.add_subparsers(dest='family', required=True)

    pn_parser = families.add_parser('pn', help='The P_n family')
    pn_parser.add_argument('--n', type=int, required=True, help='Bit width')
    pn_parser.add_argument('-o', '--output', help='Output file')
    add_common(pn_parser, with_config=False)

    random_parser = families.add_parser('random', help='Random normal program')
    random_parser.add_argument('--atoms', type=int, default=10, help='Number of atoms')
    random_parser.add_argument('--rules', type=int, default=20, help='Number of rules')
    random_parser.add_argument('--levels', type=int, default=1, help='Number of priority levels')
    random_parser.add_argument('--seed', type=int, default=0, help='Random seed')
    random_parser.add_argument('-o', '--output', help='Output file')
    add_common(random_parser, with_config=False)

    net_parser = families.add_parser('bayes', help='Random Bayesian network (JSON)')
    net_parser.add_argument('--variables', type=int, default=10, help='Number of variables')
    net_parser.add_argument('--max-parents', type=int, default=2, help='Largest in-degree')
    net_parser.add_argument('--seed', type=int, default=0, help='Random seed')
    net_parser.add_argument('-o', '--output', help='Output file')
    add_common(net_parser, with_config=False)

    gen_parser.set_defaults(func=gen_command)

    # Bayes command
    bayes_parser = subparsers.add_parser('bayes', help='Approximate a posterior from ranked assignments')
    bayes_parser.add_argument('network', help='Network file (JSON)')
    bayes_parser.add_argument('-q', '--query', required=True, help='Query variable')
    bayes_parser.add_argument('-e', '--evidence', action='append', help='Evidence name=true|false (repeatable)')
    count = bayes_parser.add_mutually_exclusive_group()
    count.add_argument('-k', type=int, help='Assignments per branch')
    count.add_argument('--all', action='store_true', help='Use every assignment')
    bayes_parser.add_argument('--scale', type=int, help='Weight multiplier for -ln(p)')
    bayes_parser.add_argument('-m', '--mode', choices=MODES, help='Enumeration strategy')
    bayes_parser.add_argument('-f', '--format', choices=FORMATS, help='Output format')
    bayes_parser.add_argument('-t', '--timeout', type=float, help='Timeout in seconds')
    bayes_parser.add_argument('--exact', action='store_true', help='Also report the exact posterior')
    bayes_parser.add_argument('--no-simplify', action='store_true', help='Keep d-separated variables')
    add_common(bayes_parser)
    bayes_parser.set_defaults(func=bayes_command)

    # Bench command
    bench_parser = subparsers.add_parser('bench', help='Benchmark strategies over a k sweep')
    bench_parser.add_argument('targets', nargs='*', default=[],
                              help='Instance directories or generator specs (pn:4-8, random:..., bayes:...)')
    bench_parser.add_argument('--modes', nargs='+', choices=MODES, help='Strategies to compare')
    bench_parser.add_argument('--k-sweep', nargs='+', type=int, help='k values')
    bench_parser.add_argument('-t', '--timeout', type=float, help='Per-cell timeout in seconds')
    bench_parser.add_argument('-j', '--jobs', type=int, help='Worker processes')
    bench_parser.add_argument('-o', '--out', help='CSV output file')
    bench_parser.add_argument('--no-progress', action='store_true', help='Hide the progress bar')
    add_common(bench_parser)
    bench_parser.set_defaults(func=bench_command)

    # Config command
    config_parser = subparsers.add_parser('config', help='Configuration management')
    config_parser.add_argument('action', choices=['generate', 'show'], help='Config action')
    config_parser.add_argument('-o', '--output', help='Output path for config file')
    config_parser.add_argument('-c', '--config', help='Configuration file to show')
    config_parser.set_defaults(func=config_command)

    return parser


def main(argv: Optional[List[str]] = None):
    """Main CLI entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
