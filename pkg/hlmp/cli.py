# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Command-line front end.

Machine-readable results are written to the files named by ``--out`` (and
``--trace``); summaries go to stdout and diagnostics to stderr. Exit status
is 0 on success, 1 when an input is rejected, 2 on usage errors.
"""

import argparse
import csv
import dataclasses
import io
import logging
import sys
from pathlib import Path

from hlmp.errors import HlmpError
from hlmp.files import (
    GeneratorConfig, generate, load_generator_config, load_params,
    occupancy_series, parse_instance, parse_schedule, serialize_instance,
    serialize_schedule, serialize_series,
)
from hlmp.model import evaluate, model_size, roll_forward
from hlmp.solvers.annealer import SaParams, solve_restarts
from hlmp.solvers.exact import OracleLimits, solve_exact
from hlmp.util.log import configure

EXIT_OK       = 0
EXIT_REJECTED = 1
EXIT_USAGE    = 2


class _Rejected(Exception):
    """An input could not be used; reported on stderr with EXIT_REJECTED."""


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as e:
        raise _Rejected(f"{path}: {e.strerror}") from None


def _write(path, text):
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise _Rejected(f"{path}: {e.strerror}") from None


def _load_instance(path):
    try:
        return parse_instance(_read(path))
    except HlmpError as e:
        raise _Rejected(f"{path}: {e}") from None


def _size_line(instance):
    size = model_size(instance)
    return (f"model: {size.variables} variables, {size.constraints} constraints, "
            f"search space 2^{size.log2_space:.1f}")


def _cmd_windows(args, out):
    instance = _load_instance(args.instance)
    width = max(len(train.id) for train in instance.trains)
    for train in instance.trains:
        print(f"{train.id:<{width}}  {train.level.name:<3}  expired {train.expired_day:>5}  "
              f"{instance.windows[train.id]}", file=out)
    print(f"horizon {instance.horizon}", file=out)
    return EXIT_OK


def _trace_text(trace):
    text = io.StringIO()
    writer = csv.writer(text, lineterminator="\n")
    writer.writerow(["index", "temperature", "mean_energy", "acceptance_rate",
                     "generated", "accepted", "best_energy"])
    for step in trace:
        writer.writerow([step.index, repr(step.temperature), repr(step.mean_energy),
                         repr(step.acceptance_rate), step.generated, step.accepted,
                         repr(step.best_energy)])
    return text.getvalue()


def _cmd_solve(args, out):
    instance = _load_instance(args.instance)
    params = SaParams()
    if args.params:
        try:
            params = load_params(_read(args.params), instance)
        except HlmpError as e:
            raise _Rejected(f"{args.params}: {e}") from None
    if args.seed is not None:
        params = dataclasses.replace(params, seed=args.seed)

    result = solve_restarts(instance, params, restarts=args.restarts, workers=args.workers)
    document = serialize_schedule(instance, result.best_schedule, result.best_evaluation)
    if args.out:
        _write(args.out, document.machine)
    if args.trace:
        _write(args.trace, _trace_text(result.energy_trace))

    print(document.table, end="", file=out)
    print(_size_line(instance), file=out)
    print(f"annealing: seed {params.seed}, restart {result.restart} of {args.restarts}, "
          f"sigma0 {result.initial_temperature:.6g}, {len(result.energy_trace)} temperatures, "
          f"{result.evaluations} moves, stop {result.stop_reason.value}", file=out)
    print(f"best energy: {result.best_energy:.6f}", file=out)
    return EXIT_OK


def _cmd_oracle(args, out):
    instance = _load_instance(args.instance)
    limits = OracleLimits(max_nodes=args.max_nodes, prune=not args.no_prune, workers=args.workers)
    try:
        result = solve_exact(instance, limits)
    except HlmpError as e:
        raise _Rejected(f"{args.instance}: {e}") from None

    print(_size_line(instance), file=out)
    print(f"searched {result.searched_count} schedules, reached {result.leaves_visited}, "
          f"{result.feasible_count} feasible", file=out)
    if result.optimum is None:
        print("no feasible schedule", file=out)
        return EXIT_OK
    document = serialize_schedule(instance, result.optimum, evaluate(instance, result.optimum))
    if args.out:
        _write(args.out, document.machine)
    print(document.table, end="", file=out)
    print(f"optimum loss_km: {result.optimum_loss:.1f}", file=out)
    return EXIT_OK


def _cmd_validate(args, out):
    instance = _load_instance(args.instance) if args.instance else None
    status = EXIT_OK
    for path in args.files:
        try:
            text = _read(path)
            if instance is None:
                checked = parse_instance(text)
                print(f"ok: {path}: {checked.fleet_size} trains, horizon {checked.horizon}; "
                      f"{_size_line(checked)}", file=out)
            else:
                schedule = parse_schedule(text, instance)
                feasible = evaluate(instance, schedule).feasible
                print(f"ok: {path}: {len(schedule)} deliveries, "
                      f"{'feasible' if feasible else 'infeasible'}", file=out)
        except (HlmpError, _Rejected) as e:
            print(f"error: {path}:\n{e}", file=sys.stderr)
            status = EXIT_REJECTED
    return status


def _cmd_generate(args, out):
    config = GeneratorConfig()
    if args.config:
        try:
            config = load_generator_config(_read(args.config))
        except HlmpError as e:
            raise _Rejected(f"{args.config}: {e}") from None
    overrides = {
        name: value for name, value in (
            ("seed", args.seed), ("fleet_size", args.fleet_size), ("horizon_day", args.horizon),
        ) if value is not None
    }
    try:
        instance = generate(dataclasses.replace(config, **overrides))
    except HlmpError as e:
        raise _Rejected(str(e)) from None
    _write(args.out, serialize_instance(instance))
    print(f"wrote {args.out}: {instance.fleet_size} trains, horizon {instance.horizon}; "
          f"{_size_line(instance)}", file=out)
    return EXIT_OK


def _cmd_report(args, out):
    instance = _load_instance(args.instance)
    try:
        schedule = parse_schedule(_read(args.schedule), instance)
    except HlmpError as e:
        raise _Rejected(f"{args.schedule}: {e}") from None
    series = serialize_series(occupancy_series(instance, schedule))
    if args.out:
        _write(args.out, series)
        print(serialize_schedule(instance, schedule, evaluate(instance, schedule)).table,
              end="", file=out)
    else:
        print(series, end="", file=out)
    return EXIT_OK


def _cmd_roll(args, out):
    instance = _load_instance(args.instance)
    try:
        schedule = parse_schedule(_read(args.schedule), instance)
        rolled = roll_forward(instance, schedule, args.shift, horizon=args.horizon)
    except HlmpError as e:
        raise _Rejected(f"{args.schedule}: {e}") from None
    _write(args.out, serialize_instance(rolled))
    carried = sum(train.carryover is not None for train in rolled.trains)
    print(f"wrote {args.out}: {rolled.fleet_size} trains, horizon {rolled.horizon}, "
          f"{carried} with carryover", file=out)
    return EXIT_OK


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hlmp", description="High-level maintenance planning for EMU fleets.")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="log progress to stderr (-vv for per-temperature detail)")
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = commands.add_parser("solve", help="plan deliveries by simulated annealing")
    p.add_argument("instance")
    p.add_argument("--seed", type=int, help="overrides the seed of --params")
    p.add_argument("--params", help="annealing parameter file (JSON)")
    p.add_argument("--out", help="write the schedule document here")
    p.add_argument("--trace", help="write the per-temperature trace here (CSV)")
    p.add_argument("--restarts", type=_positive, default=1)
    p.add_argument("--workers", type=_positive, help="concurrent restarts (default: all of them)")
    p.set_defaults(handler=_cmd_solve)

    p = commands.add_parser("oracle", help="optimal plan by exhaustive search (small fleets)")
    p.add_argument("instance")
    p.add_argument("--max-nodes", type=_positive, default=OracleLimits.max_nodes)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--no-prune", action="store_true", help="check limits only on complete schedules")
    p.add_argument("--out", help="write the optimal schedule document here")
    p.set_defaults(handler=_cmd_oracle)

    p = commands.add_parser("validate", help="check instance files, or schedules against --instance")
    p.add_argument("files", nargs="+")
    p.add_argument("--instance", help="validate the files as schedules for this instance")
    p.set_defaults(handler=_cmd_validate)

    p = commands.add_parser("generate", help="write a random instance")
    p.add_argument("--config", help="generator configuration file (JSON)")
    p.add_argument("--seed", type=int)
    p.add_argument("--fleet-size", type=_positive)
    p.add_argument("--horizon", type=_positive)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_generate)

    p = commands.add_parser("report", help="per-day occupancy series of a schedule (CSV)")
    p.add_argument("instance")
    p.add_argument("schedule")
    p.add_argument("--out", help="write the series here instead of stdout")
    p.set_defaults(handler=_cmd_report)

    p = commands.add_parser("windows", help="print every train's delivery window")
    p.add_argument("instance")
    p.set_defaults(handler=_cmd_windows)

    p = commands.add_parser("roll", help="instance for the next planning horizon")
    p.add_argument("instance")
    p.add_argument("schedule")
    p.add_argument("--shift", type=_positive, required=True, help="days the horizon moves forward")
    p.add_argument("--horizon", type=_positive, help="new horizon (default: latest window end)")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_roll)

    return parser


def run(argv=None, out=None):
    """Run one command; returns the exit status."""
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    configure({0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG))
    try:
        return args.handler(args, out)
    except _Rejected as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_REJECTED
    except HlmpError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_REJECTED


def main():
    sys.exit(run())
