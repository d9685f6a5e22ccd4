from argparse import ArgumentParser, Namespace, _SubParsersAction
from collections.abc import Callable, Sequence
from dataclasses import dataclass
import json
import logging
from pathlib import Path
import sys
from typing import Final, final

from gdrates import models
from gdrates.curvature import CurvatureClass, gamma_bar_inf
from gdrates.engine import TightnessReport, report_instance, tightness_report
from gdrates.errors import DomainError, SolverError
from gdrates.instancelib import dump_instance, load_instance, load_triplets
from gdrates.interpolation import DEFAULT_TOLERANCE, is_interpolable
from gdrates.output import Output, OutputFormat, render
from gdrates.rates import (
    RateBound,
    denom_conjectured_equivalent,
    denom_constant,
    denom_dynamic,
    denom_variable,
    dynamic_schedule_for,
)
from gdrates.schedules import (
    dynamic_sequence,
    kappa_bar,
    opt_const_nonconvex_asymptotic,
    opt_const_nonconvex_numeric,
    truncated_schedule,
)
from gdrates.tables import (
    Cell,
    DataTable,
    Figure,
    comparison_table,
    figure_data,
)
from gdrates.thresholds import gamma_bar, gamma_bar_one, threshold_table
from gdrates.util import (
    check_bool,
    check_float,
    check_float_list,
    check_int,
    check_path,
    configure_logging,
    positive_int,
    stderr_console,
    suppress_unhandled,
)
from gdrates.worstcase import select_worst_case

logger = logging.getLogger(__name__)

EXIT_OK: Final = 0
EXIT_FAILED: Final = 1
EXIT_USAGE: Final = 2

EQUIVALENCE_TOLERANCE: Final = 1e-9


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class GlobalArguments:
    verbosity: Final[int]


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class RateArguments:
    output: Final[Output]
    kappa: Final[float]
    gl: Final[float | None]
    schedule_path: Final[Path | None]
    dynamic: Final[bool]
    n: Final[int | None]
    gap: Final[float]
    to_fn: Final[bool]


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class ThresholdsArguments:
    output: Final[Output]
    kappa: Final[float]
    k_max: Final[int]


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class OptStepArguments:
    output: Final[Output]
    kappa: Final[float]
    n: Final[int | None]


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class ScheduleArguments:
    output: Final[Output]
    kappa: Final[float]
    n: Final[int]
    truncate: Final[bool]


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class WorstCaseArguments:
    output: Final[Output]
    kappa: Final[float]
    l_upper: Final[float]
    gl: Final[float]
    n: Final[int]
    gap: Final[float]
    out_path: Final[Path | None]


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class SimulateArguments:
    output: Final[Output]
    instance_path: Final[Path]


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class VerifyArguments:
    output: Final[Output]
    triplets_path: Final[Path]
    mu: Final[float]
    l_upper: Final[float]
    tol: Final[float]


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class TablesArguments:
    output: Final[Output]
    which: Final[int]


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class FigDataArguments:
    output: Final[Output]
    figure: Final[Figure]
    out_path: Final[Path | None]


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class SweepArguments:
    output: Final[Output]
    sweep_path: Final[Path]


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class JSONSchemaArguments:
    which: Final[str]


type Arguments = (
    RateArguments
    | ThresholdsArguments
    | OptStepArguments
    | ScheduleArguments
    | WorstCaseArguments
    | SimulateArguments
    | VerifyArguments
    | TablesArguments
    | FigDataArguments
    | SweepArguments
    | JSONSchemaArguments
)

type Subparsers = _SubParsersAction[ArgumentParser]


def _add_output_arguments(parser: ArgumentParser) -> None:
    parser.add_argument(
        '-f',
        '--format',
        choices=[f.value for f in OutputFormat],
        default=OutputFormat.TABLE.value,
    )
    parser.add_argument(
        '--csv',
        action='store_const',
        const=OutputFormat.CSV.value,
        dest='format',
    )
    parser.add_argument(
        '--json',
        action='store_const',
        const=OutputFormat.JSON.value,
        dest='format',
    )
    parser.add_argument('--digits', type=int)


def _make_output(ns: Namespace) -> Output:
    digits: object = ns.digits
    return Output(
        format=OutputFormat(ns.format),
        digits=None if digits is None else check_int(digits),
    )


def _add_kappa_argument(parser: ArgumentParser) -> None:
    parser.add_argument('-k', '--kappa', type=float, required=True)


def _add_rate_parser(subparsers: Subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help='worst-case rate denominator')
    _add_output_arguments(parser)
    _add_kappa_argument(parser)
    steps = parser.add_mutually_exclusive_group(required=True)
    steps.add_argument('--gl', type=float)
    steps.add_argument('--schedule', type=Path, dest='schedule_path')
    steps.add_argument('--dynamic', action='store_true')
    parser.add_argument('-n', '--n', type=positive_int)
    parser.add_argument('--gap', type=float, default=1.0)
    parser.add_argument('--to-fn', action='store_true')


def _make_rate_args(ns: Namespace) -> RateArguments:
    gl: object = ns.gl
    schedule_path: object = ns.schedule_path
    n: object = ns.n
    if schedule_path is None and n is None:
        raise DomainError('--n is required with --gl and --dynamic')
    return RateArguments(
        output=_make_output(ns),
        kappa=check_float(ns.kappa),
        gl=None if gl is None else check_float(gl),
        schedule_path=None if schedule_path is None else check_path(
            schedule_path
        ),
        dynamic=check_bool(ns.dynamic),
        n=None if n is None else check_int(n),
        gap=check_float(ns.gap),
        to_fn=check_bool(ns.to_fn),
    )


def _add_thresholds_parser(subparsers: Subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help='stepsize thresholds')
    _add_output_arguments(parser)
    _add_kappa_argument(parser)
    parser.add_argument('--kmax', type=positive_int, default=10, dest='k_max')


def _make_thresholds_args(ns: Namespace) -> ThresholdsArguments:
    return ThresholdsArguments(
        output=_make_output(ns),
        kappa=check_float(ns.kappa),
        k_max=check_int(ns.k_max),
    )


def _add_opt_step_parser(subparsers: Subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help='optimal constant stepsize')
    _add_output_arguments(parser)
    _add_kappa_argument(parser)
    parser.add_argument('-n', '--n', type=positive_int)


def _make_opt_step_args(ns: Namespace) -> OptStepArguments:
    n: object = ns.n
    return OptStepArguments(
        output=_make_output(ns),
        kappa=check_float(ns.kappa),
        n=None if n is None else check_int(n),
    )


def _add_schedule_parser(subparsers: Subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help='dynamic stepsize sequence')
    _add_output_arguments(parser)
    _add_kappa_argument(parser)
    parser.add_argument('-n', '--n', type=positive_int, required=True)
    parser.add_argument('--truncate', action='store_true')


def _make_schedule_args(ns: Namespace) -> ScheduleArguments:
    return ScheduleArguments(
        output=_make_output(ns),
        kappa=check_float(ns.kappa),
        n=check_int(ns.n),
        truncate=check_bool(ns.truncate),
    )


def _add_worstcase_parser(subparsers: Subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help='emit a worst-case instance')
    _add_output_arguments(parser)
    _add_kappa_argument(parser)
    parser.add_argument('-L', '--L', type=float, default=1.0, dest='l_upper')
    parser.add_argument('--gl', type=float, required=True)
    parser.add_argument('-n', '--n', type=positive_int, required=True)
    parser.add_argument('--gap', type=float, default=1.0)
    parser.add_argument('-o', '--out', type=Path, dest='out_path')


def _make_worstcase_args(ns: Namespace) -> WorstCaseArguments:
    out_path: object = ns.out_path
    return WorstCaseArguments(
        output=_make_output(ns),
        kappa=check_float(ns.kappa),
        l_upper=check_float(ns.l_upper),
        gl=check_float(ns.gl),
        n=check_int(ns.n),
        gap=check_float(ns.gap),
        out_path=None if out_path is None else check_path(out_path),
    )


def _add_simulate_parser(subparsers: Subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help='run a saved instance')
    _add_output_arguments(parser)
    parser.add_argument(
        '-i',
        '--instance',
        type=Path,
        required=True,
        dest='instance_path',
    )


def _make_simulate_args(ns: Namespace) -> SimulateArguments:
    return SimulateArguments(
        output=_make_output(ns),
        instance_path=check_path(ns.instance_path),
    )


def _add_verify_parser(subparsers: Subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help='check interpolability')
    _add_output_arguments(parser)
    parser.add_argument(
        '-t',
        '--triplets',
        type=Path,
        required=True,
        dest='triplets_path',
    )
    parser.add_argument('--mu', type=float, required=True)
    parser.add_argument('-L', '--L', type=float, default=1.0, dest='l_upper')
    parser.add_argument('--tol', type=float, default=DEFAULT_TOLERANCE)


def _make_verify_args(ns: Namespace) -> VerifyArguments:
    return VerifyArguments(
        output=_make_output(ns),
        triplets_path=check_path(ns.triplets_path),
        mu=check_float(ns.mu),
        l_upper=check_float(ns.l_upper),
        tol=check_float(ns.tol),
    )


def _add_tables_parser(subparsers: Subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help='denominator comparisons')
    _add_output_arguments(parser)
    parser.add_argument(
        '-w',
        '--which',
        type=int,
        choices=(1, 2, 3),
        required=True,
    )


def _make_tables_args(ns: Namespace) -> TablesArguments:
    return TablesArguments(output=_make_output(ns), which=check_int(ns.which))


def _add_figdata_parser(subparsers: Subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help='plot-ready curve data')
    parser.add_argument(
        '-w',
        '--which',
        choices=[f.value for f in Figure],
        required=True,
    )
    parser.add_argument('--digits', type=int)
    parser.add_argument('-o', '--out', type=Path, dest='out_path')


def _make_figdata_args(ns: Namespace) -> FigDataArguments:
    digits: object = ns.digits
    out_path: object = ns.out_path
    return FigDataArguments(
        output=Output(
            format=OutputFormat.CSV,
            digits=None if digits is None else check_int(digits),
        ),
        figure=Figure(ns.which),
        out_path=None if out_path is None else check_path(out_path),
    )


def _add_sweep_parser(subparsers: Subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help='tightness checks on a grid')
    _add_output_arguments(parser)
    parser.add_argument(
        '-s',
        '--sweep',
        default='gdrates.yaml',
        type=Path,
        dest='sweep_path',
    )


def _make_sweep_args(ns: Namespace) -> SweepArguments:
    return SweepArguments(
        output=_make_output(ns),
        sweep_path=check_path(ns.sweep_path),
    )


def _add_json_schema_parser(subparsers: Subparsers, name: str) -> None:
    parser = subparsers.add_parser(name, help='JSON schema of input files')
    parser.add_argument(
        'which',
        nargs='?',
        choices=('sweep', 'instance'),
        default='sweep',
    )


def _make_json_schema_args(ns: Namespace) -> JSONSchemaArguments:
    return JSONSchemaArguments(which=ns.which)


def parse_args(
    argv: Sequence[str] | None = None,
) -> tuple[GlobalArguments, Arguments]:
    parser = ArgumentParser(prog='gdrates')
    parser.add_argument('-v', '--verbose', action='count', default=0)
    commands: dict[str, Callable[[Namespace], Arguments]] = {}

    subparsers = parser.add_subparsers(
        title='command',
        dest='command',
        required=True,
    )

    def command(
        name: str,
        make_command: Callable[[Subparsers, str], None],
        make_args: Callable[[Namespace], Arguments],
    ) -> None:
        make_command(subparsers, name)
        commands[name] = make_args

    command('rate', _add_rate_parser, _make_rate_args)
    command('thresholds', _add_thresholds_parser, _make_thresholds_args)
    command('opt-step', _add_opt_step_parser, _make_opt_step_args)
    command('schedule', _add_schedule_parser, _make_schedule_args)
    command('worstcase', _add_worstcase_parser, _make_worstcase_args)
    command('simulate', _add_simulate_parser, _make_simulate_args)
    command('verify', _add_verify_parser, _make_verify_args)
    command('tables', _add_tables_parser, _make_tables_args)
    command('figdata', _add_figdata_parser, _make_figdata_args)
    command('sweep', _add_sweep_parser, _make_sweep_args)
    command('json-schema', _add_json_schema_parser, _make_json_schema_args)
    ns = parser.parse_args(argv)
    return (
        GlobalArguments(verbosity=check_int(ns.verbose)),
        commands[ns.command](ns),
    )


def _rate_table(
    kappa: float,
    n: int,
    gl: str,
    rate: RateBound,
    gap: float,
    step_gain_sum: float | None = None,
) -> DataTable:
    columns: tuple[str, ...] = (
        'kappa',
        'N',
        'gl',
        'regime',
        'numerator',
        'denominator',
        'bound',
    )
    row: tuple[Cell, ...] = (
        kappa,
        n,
        gl,
        str(rate.regime),
        rate.numerator_kind.value,
        rate.denominator,
        rate.bound(gap),
    )
    if step_gain_sum is not None:
        columns += ('step_gain_sum',)
        row += (step_gain_sum,)
    return DataTable(title='Worst-case rate', columns=columns, rows=(row,))


def _step_gain_sum(kappa: float, n: int, rate: RateBound) -> float:
    value = denom_conjectured_equivalent(dynamic_schedule_for(kappa, n), kappa)
    gap = abs(value - rate.denominator)
    if gap > EQUIVALENCE_TOLERANCE * rate.denominator:
        logger.warning(
            'step-gain sum %.12g differs from the dynamic denominator %.12g',
            value,
            rate.denominator,
        )
    return value


def do_rate(args: RateArguments) -> int:
    step_gain_sum: float | None = None
    if args.schedule_path is not None:
        schedule = _load_schedule(args.schedule_path)
        rate = denom_variable(schedule, args.kappa)
        n = len(schedule)
        label = 'variable'
    elif args.dynamic:
        assert args.n is not None
        n = args.n
        rate = denom_dynamic(args.kappa, n)
        step_gain_sum = _step_gain_sum(args.kappa, n, rate)
        label = 'dynamic'
    else:
        assert args.gl is not None and args.n is not None
        n = args.n
        rate = denom_constant(args.gl, args.kappa, n)
        label = repr(args.gl)

    if args.to_fn:
        rate = rate.to_fn()
        if step_gain_sum is not None:
            step_gain_sum -= 1.0
    table = _rate_table(args.kappa, n, label, rate, args.gap, step_gain_sum)
    render(table, args.output)
    return EXIT_OK


def do_thresholds(args: ThresholdsArguments) -> int:
    thresholds = threshold_table(args.kappa, args.k_max)
    table = DataTable(
        title=f'Stepsize thresholds (kappa = {args.kappa:g}, limit '
        f'{thresholds.gamma_bar_inf:.6f})',
        columns=('k', 'gamma_bar_k'),
        rows=thresholds.values,
    )
    render(table, args.output)
    return EXIT_OK


def do_opt_step(args: OptStepArguments) -> int:
    rows: list[tuple[str, float]] = []
    if args.kappa >= 0:
        if args.n is None:
            raise DomainError('--n is required for kappa >= 0')
        rows.append(('gamma_bar_N', gamma_bar(args.n, args.kappa)))
    else:
        threshold = kappa_bar()
        rows += [
            ('gamma_star', opt_const_nonconvex_asymptotic(args.kappa)),
            ('gamma_bar_1', gamma_bar_one(args.kappa)),
            ('kappa_bar', threshold),
            ('gamma_star_is_n_independent', float(args.kappa <= threshold)),
        ]
        if args.n is not None:
            rows.append(
                (
                    'gl_optimal_N',
                    opt_const_nonconvex_numeric(args.kappa, args.n),
                ),
            )
    table = DataTable(
        title=f'Optimal constant stepsize (kappa = {args.kappa:g})',
        columns=('name', 'value'),
        rows=tuple(rows),
    )
    render(table, args.output)
    return EXIT_OK


def do_schedule(args: ScheduleArguments) -> int:
    if args.truncate:
        schedule = truncated_schedule(args.kappa, args.n)
    else:
        schedule = dynamic_sequence(args.kappa, args.n)
    table = DataTable(
        title=f'{schedule.kind.value} schedule (kappa = {args.kappa:g}, '
        f'limit {gamma_bar_inf(args.kappa):.6f})',
        columns=('i', 'gl'),
        rows=tuple(enumerate(schedule.entries)),
    )
    render(table, args.output)
    return EXIT_OK


def _report_table(reports: Sequence[TightnessReport]) -> DataTable:
    return DataTable(
        title='Tightness',
        columns=(
            'kind',
            'regime',
            'bound',
            'achieved',
            'ratio',
            'interpolable',
            'worst_pair',
            'status',
        ),
        rows=tuple(
            (
                report.kind,
                str(report.regime),
                report.bound,
                report.achieved,
                report.ratio,
                str(report.interpolable),
                '-'
                if report.worst is None
                else f'{report.worst.i},{report.worst.j}',
                _status(report),
            )
            for report in reports
        ),
    )


def _status(report: TightnessReport) -> str:
    if not report.passed():
        return 'FAIL'
    return 'CONJECTURED' if report.conjectured else 'PASS'


def do_worstcase(args: WorstCaseArguments) -> int:
    cls = CurvatureClass.from_kappa(args.kappa, args.l_upper)
    instance = select_worst_case(cls, args.gl, args.n, args.gap)
    text = dump_instance(instance)
    if args.out_path is None:
        sys.stdout.write(text + '\n')
        return EXIT_OK
    args.out_path.write_text(text + '\n')
    logger.info('wrote %s instance to %s', instance.kind, args.out_path)
    render(_report_table([report_instance(instance)]), args.output)
    return EXIT_OK


def do_simulate(args: SimulateArguments) -> int:
    report = report_instance(load_instance(args.instance_path))
    render(_report_table([report]), args.output)
    return EXIT_OK if report.passed() else EXIT_FAILED


def do_verify(args: VerifyArguments) -> int:
    triplets = load_triplets(args.triplets_path)
    cls = CurvatureClass.of(args.mu, args.l_upper)
    verdict = is_interpolable(triplets, cls, args.tol)
    worst = verdict.worst
    table = DataTable(
        title=f'Interpolation in F(mu={args.mu:g}, L={args.l_upper:g})',
        columns=('triplets', 'worst_i', 'worst_j', 'worst_residual', 'status'),
        rows=(
            (
                len(triplets),
                -1 if worst is None else worst.i,
                -1 if worst is None else worst.j,
                0.0 if worst is None else worst.residual,
                'PASS' if verdict.interpolable else 'FAIL',
            ),
        ),
    )
    render(table, args.output, default_digits=12)
    return EXIT_OK if verdict.interpolable else EXIT_FAILED


def do_tables(args: TablesArguments) -> int:
    table = comparison_table(args.which)
    render(table, args.output, default_digits=table.digits)
    return EXIT_OK


def do_figdata(args: FigDataArguments) -> int:
    table = figure_data(args.figure)
    if args.out_path is None:
        render(table, args.output, default_digits=12)
        return EXIT_OK
    with open(args.out_path, 'w', newline='') as out_file:
        render(table, args.output, file=out_file, default_digits=12)
    logger.info('wrote %d rows to %s', len(table.rows), args.out_path)
    return EXIT_OK


def do_sweep(args: SweepArguments) -> int:
    sweep = models.load_sweep(args.sweep_path)
    reports: list[TightnessReport] = []
    for kappa in sweep.kappas:
        cls = CurvatureClass.from_kappa(kappa, sweep.l_upper)
        upper = gamma_bar_inf(kappa)
        gls = [gl for gl in sweep.gls if gl < upper]
        if len(gls) < len(sweep.gls):
            logger.info(
                'kappa=%g: skipping stepsizes at or above %g',
                kappa,
                upper,
            )
        for gl in gls:
            for n in sweep.ns:
                report = tightness_report(cls, gl, n, sweep.gap, sweep.tol)
                if report.conjectured and not sweep.include_conjectured:
                    continue
                reports.append(report)
    render(_report_table(reports), args.output)
    return EXIT_OK if all(r.passed() for r in reports) else EXIT_FAILED


def do_json_schema(args: JSONSchemaArguments) -> int:
    match args.which:
        case 'instance':
            schema = models.InstanceModel.model_json_schema()
        case _:
            schema = models.SweepModel.model_json_schema()
    json.dump(schema, sys.stdout, indent=2)
    sys.stdout.write('\n')
    return EXIT_OK


def _dispatch(args: Arguments) -> int:
    match args:
        case RateArguments():
            return do_rate(args)
        case ThresholdsArguments():
            return do_thresholds(args)
        case OptStepArguments():
            return do_opt_step(args)
        case ScheduleArguments():
            return do_schedule(args)
        case WorstCaseArguments():
            return do_worstcase(args)
        case SimulateArguments():
            return do_simulate(args)
        case VerifyArguments():
            return do_verify(args)
        case TablesArguments():
            return do_tables(args)
        case FigDataArguments():
            return do_figdata(args)
        case SweepArguments():
            return do_sweep(args)
        case JSONSchemaArguments():
            return do_json_schema(args)


def run(argv: Sequence[str] | None = None) -> int:
    try:
        options, args = parse_args(argv)
        configure_logging(options.verbosity)
        return _dispatch(args)
    except (ValueError, FileNotFoundError) as error:
        stderr_console.print(f'[red]error:[/red] {error}', highlight=False)
        return EXIT_USAGE
    except SolverError as error:
        stderr_console.print(f'[red]solver:[/red] {error}', highlight=False)
        return EXIT_FAILED


def main() -> None:
    suppress_unhandled(KeyboardInterrupt)
    sys.exit(run())


if __name__ == '__main__':
    main()
