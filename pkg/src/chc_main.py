#!/usr/bin/env python3
"""
CHC-COMP Toolkit - Main Script
Subcommand front-end for the benchmark pipeline: check, normalize, dedup, rate, select, score, report.
"""

import argparse
import logging
import sys

# Import the individual modules
try:
    from chc_config_module import BUDGET_PRESETS, CACTUS_AXES, CONFLICT_POLICIES, TIME_KINDS, ConfigError, load_config
    from chc_check_module import run_check_module
    from chc_transform_module import run_dedup_module, run_normalize_module
    from chc_selection_module import run_rate_module, run_select_module
    from chc_scoring_module import run_score_module
    from chc_report_module import run_report_module
except ImportError as e:
    print(f"❌ Error importing modules: {e}", file=sys.stderr)
    print("Make sure all module files are in the src directory:", file=sys.stderr)
    for name in ("config", "model", "parser", "check", "transform", "selection", "scoring", "report"):
        print(f"  - chc_{name}_module.py", file=sys.stderr)
    sys.exit(2)

COMMANDS = ['check', 'normalize', 'dedup', 'rate', 'select', 'score', 'report']
SINGLE_INPUT_COMMANDS = {
    'rate': "probe outcomes CSV",
    'select': "ratings file",
    'score': "run records CSV",
    'report': "run records CSV",
}


def print_banner():
    """Print the application banner."""
    print("\n" + "=" * 70, file=sys.stderr)
    print("🏁 CHC-COMP BENCHMARK TOOLKIT", file=sys.stderr)
    print("=" * 70, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chc-comp",
        description="CHC-COMP benchmark pipeline - format checking, query normalization, deduplication, "
                    "rating, selection, scoring and reporting",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  chc-comp check bench/*.smt2                                            # Check format and classify tracks
  chc-comp normalize --mode merge --out-dir merged bench/*.smt2          # Merge multiple queries
  chc-comp normalize --mode split --out-dir split bench/*.smt2           # One benchmark per query
  chc-comp dedup --out-dir manifests merged/*.smt2                       # Drop canonical duplicates
  chc-comp rate --out-dir sel probes.csv                                 # A/B/C rating from probe runs
  chc-comp select --quotas quotas.toml --seed 42 --out-dir sel sel/ratings.txt
  chc-comp score --hors-concours Eldarica --out-dir out runs.csv         # Scoreboard + consistency report
  chc-comp report --cactus-axis log --out-dir out runs.csv               # Markdown table, cactus CSV and SVG
        """
    )

    parser.add_argument('command', choices=COMMANDS, help='Pipeline stage to run')
    parser.add_argument('inputs', nargs='*', help='Input files for the stage')

    parser.add_argument('--config', '-c', help='Path to a TOML (.toml) or JSON (.json) configuration file')
    parser.add_argument('--out-dir', '-o', help='Output directory (default: results)')
    parser.add_argument('--seed', type=int, help='64-bit unsigned selection seed (default: 0)')
    parser.add_argument('--quotas', '-q', help='Per-repository quota file (TOML or JSON) for select')
    parser.add_argument('--whole-track', action='store_true',
                        help='Select every rated benchmark (tracks used completely)')
    parser.add_argument('--mode', choices=['merge', 'split'], default='merge',
                        help='Query normalization mode (default: merge)')

    parser.add_argument('--conflict-policy', choices=CONFLICT_POLICIES,
                        help='What to do with benchmarks that got both sat and unsat answers')
    parser.add_argument('--strict', action='store_true', help='Same as --conflict-policy abort')
    parser.add_argument('--budget-preset', choices=sorted(BUDGET_PRESETS),
                        help='Named cpu/wall/memory budgets (competition or test runs)')
    parser.add_argument('--cpu-budget', type=float, help='CPU time budget in seconds')
    parser.add_argument('--wall-budget', type=float, help='Wall-clock budget in seconds')
    parser.add_argument('--memory-budget', type=float, help='Memory budget in GB')
    parser.add_argument('--hors-concours', action='append', metavar='NAME',
                        help='Entrant competing outside the competition (repeatable)')

    parser.add_argument('--cactus-axis', choices=CACTUS_AXES, help='Time axis of the cactus SVG')
    parser.add_argument('--log-epsilon', type=float, help='Smallest time shown on a log axis (default: 0.01)')
    parser.add_argument('--time-kind', choices=TIME_KINDS, help='Cactus time measure (default: cpu)')

    parser.add_argument('--jobs', '-j', type=int,
                        help='Worker processes for check, normalize and dedup (default: 1)')
    parser.add_argument('--no-progress', '-np', action='store_true', help='Disable progress bars')
    parser.add_argument('--verbose', '-v', action='store_true', help='Print violations and debug logging')
    return parser


def config_overrides(args: argparse.Namespace) -> dict:
    """Command-line values that take precedence over the configuration file."""
    overrides = {}
    if args.budget_preset:
        cpu, wall, memory = BUDGET_PRESETS[args.budget_preset]
        overrides.update(cpu_budget=cpu, wall_budget=wall, memory_budget_gb=memory)
    overrides.update({
        'seed': args.seed,
        'quotas': args.quotas,
        'out_dir': args.out_dir,
        'conflict_policy': 'abort' if args.strict else args.conflict_policy,
        'cpu_budget': args.cpu_budget if args.cpu_budget is not None else overrides.get('cpu_budget'),
        'wall_budget': args.wall_budget if args.wall_budget is not None else overrides.get('wall_budget'),
        'memory_budget_gb': args.memory_budget if args.memory_budget is not None
        else overrides.get('memory_budget_gb'),
        'hors_concours': args.hors_concours,
        'cactus_axis': args.cactus_axis,
        'log_epsilon': args.log_epsilon,
        'time_kind': args.time_kind,
        'jobs': args.jobs,
    })
    return overrides


def main(argv=None) -> int:
    """Main function with command-line argument parsing; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_intermixed_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        config = load_config(args.config, config_overrides(args))
    except ConfigError as e:
        print(f"❌ Configuration error: {e}", file=sys.stderr)
        return 2

    if args.command in SINGLE_INPUT_COMMANDS and len(args.inputs) != 1:
        print(f"❌ {args.command} expects exactly one input: the {SINGLE_INPUT_COMMANDS[args.command]}",
              file=sys.stderr)
        return 2

    print_banner()
    show_progress = not args.no_progress

    if args.command == 'check':
        return run_check_module(args.inputs, show_progress=show_progress, verbose=args.verbose,
                                jobs=config.jobs)
    if args.command == 'normalize':
        return run_normalize_module(args.inputs, args.mode, config.out_dir, show_progress=show_progress,
                                    jobs=config.jobs)
    if args.command == 'dedup':
        return run_dedup_module(args.inputs, config.out_dir, show_progress=show_progress, jobs=config.jobs)
    if args.command == 'rate':
        return run_rate_module(args.inputs[0], config.out_dir)
    if args.command == 'select':
        if not args.whole_track and not config.quotas:
            print("❌ A quotas file is required for selection. Use --quotas option.", file=sys.stderr)
            return 2
        return run_select_module(args.inputs[0], config.quotas, config.seed, config.out_dir,
                                 whole_track=args.whole_track)
    if args.command == 'score':
        return run_score_module(args.inputs[0], config.out_dir, config.conflict_policy,
                                config.cpu_budget, config.wall_budget, config.hors_concours,
                                config.memory_budget_gb)
    return run_report_module(args.inputs[0], config.out_dir, config.conflict_policy, config.hors_concours,
                             config.cactus_axis, config.log_epsilon, config.time_kind)


if __name__ == "__main__":
    sys.exit(main())
