#!/usr/bin/env python3
"""
Command-Line Surface and File Codecs

Reads series files, writes generated series and result grids, and
dispatches the subcommands:

- detect   - ratio or classical statistic of a series against a stored table
- critvals - simulate a null sample and persist its critical values
- generate - write a simulated series (with or without a change)
- size     - rejection rates with no change
- power    - rejection rates under an alternative
- table    - reproduce one of the published size/power grids

Exit codes: 0 on success, 1 on usage or parameter errors, 2 on data errors.

Usage:
    python -m ratiocusum generate --model ar1 --rho 0.5 --n 500 --seed 7 --out x.csv
    python -m ratiocusum critvals --stat v1 --delta 0.2 --out v1.json
    python -m ratiocusum detect --input x.csv --stat v1 --critvals v1.json --json
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from .config import (
    DEFAULT_DELTA,
    DEFAULT_EXPERIMENT_REPS,
    DEFAULT_GRID,
    DEFAULT_LEVELS,
    DEFAULT_TABLE_REPS,
    get_config,
)
from .cusum_core import evaluate
from .datagen import generate
from .exceptions import (
    CorruptTable,
    DataError,
    ParseError,
    RatioCusumError,
    TooShort,
    UsageError,
    ValidationError,
)
from .experiments import cells_to_frame, make_config, reproduce_table, run_experiment
from .limit_mc import build_table, p_value
from .models import (
    ChangeSpec,
    CriticalValueTable,
    DetectionReport,
    GeneratorSpec,
    ModelVariant,
    NullSample,
    Regime,
    Series,
    StatKind,
    trim_fraction,
)
from .reference_tables import TABLES
from .repository import (
    get_table_repository,
    load_critical_table,
    load_table_with_sample,
    save_critical_table,
)

logger = logging.getLogger(__name__)

STAT_CHOICES = [kind.label for kind in StatKind.all_kinds()]

__all__ = [
    'load_series',
    'write_series',
    'save_critical_table',
    'load_critical_table',
    'detect',
    'build_parser',
    'cli_main',
]

# ============================================
# SERIES FILES
# ============================================

def _parse_number(text: str) -> Optional[float]:
    try:
        return float(text)
    except ValueError:
        return None


def load_series(path) -> Series:
    """
    Read one numeric value per line

    Lines starting with '#' and blank lines are skipped. The first content
    line may be a non-numeric header; any later non-numeric line is an error.

    Raises:
        ParseError: With the 1-based line number of the offending line (also for
            bytes that are not UTF-8)
        TooShort: If fewer than 2 values are read
    """
    values: List[float] = []
    seen_content = False
    with open(path, 'rb') as handle:
        for line_number, raw in enumerate(handle, start=1):
            try:
                text = raw.decode('utf-8').strip()
            except UnicodeDecodeError:
                raise ParseError(f"{path}: line {line_number} is not valid UTF-8", line_number)
            if not text or text.startswith('#'):
                continue
            value = _parse_number(text)
            if value is None:
                if not seen_content:
                    seen_content = True
                    continue
                raise ParseError(f"{path}: line {line_number} is not a number: {text!r}", line_number)
            if not math.isfinite(value):
                raise ParseError(f"{path}: line {line_number} is not finite: {text!r}", line_number)
            seen_content = True
            values.append(value)

    if len(values) < 2:
        raise TooShort(f"{path}: need at least 2 observations, got {len(values)}")
    logger.debug(f"Loaded {len(values)} observations from {path}")
    return Series(np.asarray(values))


def write_series(series: Series, path, comments: Iterable[str] = ()) -> Path:
    """Write '#' comment lines, a 'value' header and one value per line"""
    path = Path(path)
    if not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as handle:
        for comment in comments:
            handle.write(f"# {comment}\n")
        handle.write("value\n")
        for value in series.values:
            handle.write(f"{float(value)!r}\n")
    logger.info(f"Wrote {series.n} observations to {path}")
    return path


# ============================================
# DETECTION
# ============================================

def _table_provenance(table: CriticalValueTable) -> Dict[str, Any]:
    return {
        'kind': table.kind.label,
        'delta': table.delta,
        'm': table.m,
        'reps': table.reps,
        'seed': table.seed,
        'rng': table.rng,
    }


def detect(series, kind: StatKind, delta: float, table: CriticalValueTable,
           sample: Optional[NullSample], bandwidth: Optional[int] = None) -> DetectionReport:
    """
    Test a series for a change against a stored critical-value table

    Args:
        series: Observations
        kind: Statistic kind
        delta: Trim fraction (ignored by the classical statistics apart from validation)
        table: Critical values built for (kind, delta)
        sample: Null draws the table was built from, for the p-value
        bandwidth: Bartlett bandwidth for the classical statistics (floor(n^(1/3)) if None)

    Returns:
        DetectionReport

    Raises:
        InvalidTrimFraction: If delta is outside (0, 1/2)
        KindMismatch: If the table was built for another kind or trim fraction
        CorruptTable: If the table carries no null draws
    """
    delta = trim_fraction(delta)
    table.check_matches(kind, delta)
    if sample is None:
        raise CorruptTable("Table carries no null draws; rebuild it with critvals to get p-values")

    series = Series.of(series)
    value, argmax_k = evaluate(series, kind, delta, bandwidth)
    if math.isinf(value):
        logger.warning(f"{kind.label} is infinite: a constant segment faces a varying one")

    critical_values = {level: table.value_at(level) for level in table.levels}
    return DetectionReport(
        kind=kind,
        value=value,
        argmax_k=argmax_k,
        n=series.n,
        delta=delta,
        critical_values=critical_values,
        p_value=p_value(sample, value),
        decisions={level: bool(value >= cv) for level, cv in critical_values.items()},
        table=_table_provenance(table),
    )


# ============================================
# ARGUMENT PARSING
# ============================================

class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that raises UsageError instead of exiting"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_model_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('error model')
    group.add_argument('--model', choices=[v.value for v in ModelVariant], default='iid')
    group.add_argument('--rho', type=float, default=0.0, help='AR(1) coefficient')
    group.add_argument('--coeffs', default='1', help='linear-process coefficients, comma separated')
    group.add_argument('--omega', type=float, default=1.0)
    group.add_argument('--alpha', type=float, default=0.1)
    group.add_argument('--beta', type=float, default=0.1)


def _add_change_options(parser: argparse.ArgumentParser, default: str = 'none') -> None:
    group = parser.add_argument_group('change')
    group.add_argument('--change', choices=[r.value for r in Regime], default=default)
    group.add_argument('--theta', type=float, default=0.5, help='change at k* = floor(n * theta)')
    group.add_argument('--delta-mag', type=float, default=1.0, help='mean-shift size')
    group.add_argument('--mu', type=float, default=0.0, help='level before the change')


def _add_experiment_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--n', type=int, nargs='+', required=True, help='sample sizes')
    parser.add_argument('--stat', choices=STAT_CHOICES, default='v1')
    parser.add_argument('--delta', type=float, default=DEFAULT_DELTA)
    parser.add_argument('--critvals', required=True, help='critical-value table (JSON)')
    parser.add_argument('--reps', type=int, default=DEFAULT_EXPERIMENT_REPS)
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--levels', type=float, nargs='+', default=None)
    parser.add_argument('--out', help='CSV destination (stdout if omitted)')
    parser.add_argument('--json', action='store_true', help='print JSON records instead of CSV')


def build_parser() -> ArgumentParser:
    """Parser for all subcommands"""
    parser = ArgumentParser(
        prog='ratiocusum',
        description='Ratio CUSUM change-point tests and their Monte Carlo calibration',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument('--workers', type=int, default=None, help='processes for Monte Carlo runs')
    parser.add_argument('--log-level', default=None, help='logging level (RATIOCUSUM_LOG_LEVEL if omitted)')
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    detect_cmd = commands.add_parser('detect', help='test a series for a change')
    detect_cmd.add_argument('--input', required=True, help='series file, one value per line')
    detect_cmd.add_argument('--stat', choices=STAT_CHOICES, required=True)
    detect_cmd.add_argument('--delta', type=float, default=DEFAULT_DELTA)
    detect_cmd.add_argument('--critvals', required=True, help='critical-value table (JSON)')
    detect_cmd.add_argument('--bandwidth', type=int, default=None,
                            help='Bartlett bandwidth for t1..t3 (floor(n^(1/3)) if omitted)')
    detect_cmd.add_argument('--json', action='store_true')
    detect_cmd.set_defaults(handler=_cmd_detect, parser=detect_cmd)

    critvals_cmd = commands.add_parser('critvals', help='simulate critical values')
    critvals_cmd.add_argument('--stat', choices=STAT_CHOICES, required=True)
    critvals_cmd.add_argument('--delta', type=float, default=DEFAULT_DELTA)
    critvals_cmd.add_argument('--grid', type=int, default=DEFAULT_GRID)
    critvals_cmd.add_argument('--reps', type=int, default=DEFAULT_TABLE_REPS)
    critvals_cmd.add_argument('--seed', type=int, default=0)
    critvals_cmd.add_argument('--levels', type=float, nargs='+', default=list(DEFAULT_LEVELS))
    destination = critvals_cmd.add_mutually_exclusive_group(required=True)
    destination.add_argument('--out', help='table file (JSON)')
    destination.add_argument('--store', help='repository directory')
    critvals_cmd.set_defaults(handler=_cmd_critvals, parser=critvals_cmd)

    generate_cmd = commands.add_parser('generate', help='write a simulated series')
    _add_model_options(generate_cmd)
    _add_change_options(generate_cmd)
    generate_cmd.add_argument('--n', type=int, required=True)
    generate_cmd.add_argument('--seed', type=int, default=0)
    generate_cmd.add_argument('--out', required=True)
    generate_cmd.set_defaults(handler=_cmd_generate, parser=generate_cmd)

    size_cmd = commands.add_parser('size', help='rejection rates with no change')
    _add_model_options(size_cmd)
    _add_experiment_options(size_cmd)
    size_cmd.set_defaults(handler=_cmd_size, parser=size_cmd)

    power_cmd = commands.add_parser('power', help='rejection rates under an alternative')
    _add_model_options(power_cmd)
    _add_change_options(power_cmd, default=Regime.MEAN_SHIFT.value)
    _add_experiment_options(power_cmd)
    power_cmd.set_defaults(handler=_cmd_power, parser=power_cmd)

    table_cmd = commands.add_parser('table', help='reproduce a published size/power grid')
    table_cmd.add_argument('--id', dest='table_id', choices=sorted(TABLES), required=True)
    table_cmd.add_argument('--reps', type=int, default=DEFAULT_EXPERIMENT_REPS)
    table_cmd.add_argument('--seed', type=int, default=0)
    table_cmd.add_argument('--critvals', required=True, help='table for v1 with delta 0.2 (JSON)')
    table_cmd.add_argument('--out', help='CSV destination (stdout if omitted)')
    table_cmd.add_argument('--json', action='store_true')
    table_cmd.set_defaults(handler=_cmd_table, parser=table_cmd)

    return parser


def _generator_from_args(args: argparse.Namespace) -> GeneratorSpec:
    variant = ModelVariant(args.model)
    seed = getattr(args, 'seed', 0)
    if variant is ModelVariant.AR1:
        return GeneratorSpec.ar1(args.rho, seed=seed)
    if variant is ModelVariant.LINEAR:
        try:
            coeffs = [float(c) for c in args.coeffs.split(',') if c.strip()]
        except ValueError:
            raise UsageError(f"--coeffs must be comma-separated numbers, got {args.coeffs!r}")
        return GeneratorSpec.linear(coeffs, seed=seed)
    if variant is ModelVariant.GARCH11:
        return GeneratorSpec.garch11(args.omega, args.alpha, args.beta, seed=seed)
    return GeneratorSpec.iid(seed=seed)


def _change_from_args(args: argparse.Namespace) -> ChangeSpec:
    regime = Regime(args.change)
    return ChangeSpec(
        regime=regime,
        theta=args.theta,
        delta_mag=args.delta_mag if regime is Regime.MEAN_SHIFT else 0.0,
        mu=args.mu,
    )


# ============================================
# OUTPUT HELPERS
# ============================================

def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def _print_json(payload: Any) -> None:
    print(json.dumps(payload, indent=2, default=_json_default))


def _emit_frame(frame: pd.DataFrame, out: Optional[str], as_json: bool) -> None:
    if out:
        frame.to_csv(out, index=False)
        logger.info(f"Wrote {len(frame)} rows to {out}")
    if as_json:
        _print_json(frame.to_dict(orient='records'))
    elif not out:
        print(frame.to_csv(index=False), end='')


# ============================================
# SUBCOMMANDS
# ============================================

def _cmd_detect(args: argparse.Namespace) -> int:
    kind = StatKind.parse(args.stat)
    delta = trim_fraction(args.delta)
    table, sample = load_table_with_sample(args.critvals)
    series = load_series(args.input)
    report = detect(series, kind, delta, table, sample, bandwidth=args.bandwidth)

    if args.json:
        _print_json(report.to_dict())
        return 0
    print(f"statistic  {kind.label} = {report.value}")
    print(f"argmax_k   {report.argmax_k} (n = {report.n})")
    print(f"p-value    {report.p_value}")
    for level in sorted(report.critical_values, reverse=True):
        verdict = 'reject' if report.decisions[level] else 'accept'
        print(f"level {level}: critical value {report.critical_values[level]} -> {verdict}")
    return 0


def _cmd_critvals(args: argparse.Namespace) -> int:
    kind = StatKind.parse(args.stat)
    table, sample = build_table(kind, args.delta, m=args.grid, reps=args.reps, seed=args.seed,
                                levels=args.levels, workers=args.workers)
    if args.store:
        path = get_table_repository(args.store).save(table, sample)
    else:
        path = save_critical_table(table, args.out, sample)
    for level in table.levels:
        print(f"{level}\t{table.value_at(level)!r}")
    logger.info(f"Table written to {path}")
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    generator = _generator_from_args(args)
    change = _change_from_args(args)
    series = generate(args.n, generator, change)
    comments = [
        f"generator: {json.dumps(generator.to_dict(), sort_keys=True)}",
        f"change: {json.dumps(change.to_dict(), sort_keys=True)}",
        f"n: {args.n}",
        f"long_run_variance: {generator.long_run_variance!r}",
    ]
    if change.regime is not Regime.NONE:
        comments.append(f"kstar: {change.kstar(args.n)}")
    write_series(series, args.out, comments)
    return 0


def _run_design(args: argparse.Namespace, change: ChangeSpec) -> int:
    kind = StatKind.parse(args.stat)
    table = load_critical_table(args.critvals)
    generator = _generator_from_args(args)

    rows = []
    for cell_index, n in enumerate(args.n):
        cfg = make_config(n, args.reps, generator, change, table, args.seed, kind=kind,
                          delta=args.delta, levels=args.levels, cell_index=cell_index)
        report = run_experiment(cfg, workers=args.workers)
        for level in cfg.levels:
            rows.append({
                'n': n, 'level': level, 'rate': report.rates[level],
                'std_error': report.std_errors[level], 'reps': report.reps,
                'n_infinite': report.n_infinite, 'seed': args.seed, 'digest': report.digest,
            })
    _emit_frame(pd.DataFrame(rows), args.out, args.json)
    return 0


def _cmd_size(args: argparse.Namespace) -> int:
    return _run_design(args, ChangeSpec())


def _cmd_power(args: argparse.Namespace) -> int:
    change = _change_from_args(args)
    if change.regime is Regime.NONE:
        raise UsageError("power needs an alternative; use size for --change none")
    return _run_design(args, change)


def _cmd_table(args: argparse.Namespace) -> int:
    table = load_critical_table(args.critvals)
    cells = reproduce_table(args.table_id, args.reps, args.seed, table, workers=args.workers)
    _emit_frame(cells_to_frame(cells), args.out, args.json)
    return 0


# ============================================
# ENTRY POINT
# ============================================

def _configure_logging(level_name: Optional[str]) -> None:
    level_name = (level_name or get_config().log_level).upper()
    level = logging.getLevelName(level_name)
    if not isinstance(level, int):
        raise UsageError(f"Unknown log level {level_name!r}")
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr)


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand

    Returns:
        0 on success, 1 on usage or parameter errors, 2 on data errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(parser.format_usage(), end='', file=sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    try:
        _configure_logging(args.log_level)
        if args.workers is not None and args.workers < 1:
            raise UsageError(f"--workers must be >= 1, got {args.workers}")
        return args.handler(args)
    except ValidationError as e:
        print(args.parser.format_usage(), end='', file=sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return 1
    except DataError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2
    except RatioCusumError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
