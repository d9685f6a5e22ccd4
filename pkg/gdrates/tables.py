"""Denominator comparison tables and plot-ready curve data."""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum, unique
import logging
from typing import Final, final

import numpy as np

from gdrates.curvature import gamma_bar_inf, p_coeff, t_k
from gdrates.rates import (
    SQRT3,
    denom_constant,
    denom_convex,
    denom_dynamic_nonconvex,
    denom_dynamic_strongly_convex,
    denom_nonconvex_const,
    denom_strongly_convex,
)
from gdrates.schedules import (
    dynamic_sequence,
    kappa_bar,
    opt_const_nonconvex_asymptotic,
    opt_const_nonconvex_numeric,
    truncated_schedule,
)
from gdrates.thresholds import gamma_bar, gamma_bar_one

logger = logging.getLogger(__name__)

type Cell = int | float | str

CONVEX_NS: Final = (1, 2, 5, 10, 20, 30, 40, 50, 100)
STRONGLY_CONVEX_KAPPAS: Final = (1e-3, 1e-4)
STRONGLY_CONVEX_NS: Final = (1, 2, 5, 10, 20, 30, 40, 50, 70)
NONCONVEX_KAPPA: Final = -1e-3
NONCONVEX_NS: Final = (1, 2, 5, 8, 9, 10, 20, 30, 40, 50, 100)

CURVE_SAMPLES: Final = 200
P_TERM_KAPPAS: Final = (-0.1, -0.5, -1.0, -2.0, -5.0)
THRESHOLD_KS: Final = (1, 2, 3, 4, 5, 10)
T_CURVE_KS: Final = (1, 2, 3, 4, 5)
T_CURVE_KAPPA: Final = -0.5
OPT_N_KAPPAS: Final = (-1e-3, -1e-2, -0.1, -1.0)
OPT_N_NS: Final = (1, 2, 5, 10, 20, 50)


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class DataTable:
    title: Final[str]
    columns: Final[tuple[str, ...]]
    rows: Final[tuple[tuple[Cell, ...], ...]]
    digits: Final[int] = 3

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(
                    f'row of {len(row)} cells under {len(self.columns)} '
                    f'columns',
                )

    def column(self, name: str) -> list[Cell]:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def row_for(self, key: str, value: Cell) -> tuple[Cell, ...]:
        i = self.columns.index(key)
        for row in self.rows:
            if row[i] == value:
                return row
        raise KeyError(f'no row with {key} = {value}')


def _percent(numerator: float, denominator: float) -> float:
    return 100.0 * numerator / denominator


def convex_row(n: int) -> tuple[float, ...]:
    optimal_gl = gamma_bar(n, 0.0)
    optimal = denom_convex(optimal_gl, n).denominator
    s_last = dynamic_sequence(0.0, n).entries[-1]
    dynamic = denom_dynamic_strongly_convex(0.0, n).denominator
    return (
        n,
        1.0,
        denom_convex(1.0, n).denominator,
        optimal_gl,
        optimal,
        s_last,
        dynamic,
        _percent(dynamic, optimal),
    )


def table_convex(ns: Iterable[int] = CONVEX_NS) -> DataTable:
    return DataTable(
        title='Convex: constant gl = 1, optimal constant, dynamic',
        columns=(
            'N',
            'gl_standard',
            'denom_standard',
            'gamma_bar_N',
            'denom_optimal',
            's_last',
            'denom_dynamic',
            'ratio_percent',
        ),
        rows=tuple(convex_row(n) for n in ns),
    )


def strongly_convex_row(kappa: float, n: int) -> tuple[float, ...]:
    standard_gl = 2.0 / (1.0 + kappa)
    optimal_gl = gamma_bar(n, kappa)
    optimal = denom_strongly_convex(optimal_gl, kappa, n).denominator
    s_last = dynamic_sequence(kappa, n).entries[-1]
    dynamic = denom_dynamic_strongly_convex(kappa, n).denominator
    return (
        kappa,
        n,
        standard_gl,
        denom_constant(standard_gl, kappa, n).denominator,
        optimal_gl,
        optimal,
        s_last,
        dynamic,
        _percent(dynamic, optimal),
    )


def table_strongly_convex(
    kappas: Iterable[float] = STRONGLY_CONVEX_KAPPAS,
    ns: Sequence[int] = STRONGLY_CONVEX_NS,
) -> DataTable:
    return DataTable(
        title='Strongly convex: gl = 2/(1+kappa), optimal constant, dynamic',
        digits=4,
        columns=(
            'kappa',
            'N',
            'gl_standard',
            'denom_standard',
            'gamma_bar_N',
            'denom_optimal',
            's_last',
            'denom_dynamic',
            'ratio_percent',
        ),
        rows=tuple(
            strongly_convex_row(kappa, n) for kappa in kappas for n in ns
        ),
    )


def nonconvex_row(kappa: float, n: int) -> tuple[float, ...]:
    gamma_star = opt_const_nonconvex_asymptotic(kappa)
    asymptotic = denom_nonconvex_const(gamma_star, kappa, n).denominator
    optimal_gl = opt_const_nonconvex_numeric(kappa, n)
    optimal = denom_nonconvex_const(optimal_gl, kappa, n).denominator
    last_step = truncated_schedule(kappa, n).entries[-1]
    dynamic = denom_dynamic_nonconvex(kappa, n).denominator
    return (
        n,
        gamma_star,
        asymptotic,
        optimal_gl,
        optimal,
        last_step,
        dynamic,
        _percent(dynamic, optimal),
    )


def table_nonconvex(
    kappa: float = NONCONVEX_KAPPA,
    ns: Iterable[int] = NONCONVEX_NS,
) -> DataTable:
    rows = []
    for n in ns:
        rows.append(nonconvex_row(kappa, n))
        logger.debug('nonconvex row N=%d done', n)
    return DataTable(
        title=f'Nonconvex (kappa = {kappa:g}): gamma_*, optimal constant, '
        f'truncated dynamic',
        columns=(
            'N',
            'gamma_star',
            'denom_asymptotic',
            'gl_optimal',
            'denom_optimal',
            'last_step',
            'denom_dynamic',
            'ratio_percent',
        ),
        rows=tuple(rows),
    )


def comparison_table(which: int) -> DataTable:
    match which:
        case 1:
            return table_convex()
        case 2:
            return table_strongly_convex()
        case 3:
            return table_nonconvex()
        case _:
            raise ValueError(f'no table {which}, expected 1, 2 or 3')


@final
@unique
class Figure(Enum):
    P_TERM = 'p-term'
    THRESHOLDS = 'thresholds'
    T_CURVES = 't-curves'
    OPT_COMPARE = 'opt-compare'
    OPT_N = 'opt-n'


def _open_grid(low: float, high: float, samples: int) -> list[float]:
    return [float(x) for x in np.linspace(low, high, samples + 2)[1:-1]]


def p_term_curves(
    kappas: Iterable[float] = P_TERM_KAPPAS,
    samples: int = CURVE_SAMPLES,
) -> DataTable:
    """gl * p(gl, kappa*gl) with the gamma_bar_1 marker for each kappa."""
    rows = []
    for kappa in kappas:
        marker = gamma_bar_one(kappa)
        for gl in _open_grid(0.0, gamma_bar_inf(kappa), samples):
            rows.append((kappa, gl, gl * p_coeff(gl, kappa * gl), marker))
    return DataTable(
        title='Dominant per-step term',
        columns=('kappa', 'gl', 'gl_p', 'gamma_bar_1'),
        rows=tuple(rows),
    )


def threshold_curves(
    ks: Iterable[int] = THRESHOLD_KS,
    samples: int = CURVE_SAMPLES,
    kappa_low: float = -10.0,
) -> DataTable:
    rows = []
    ks = tuple(ks)
    for kappa in _open_grid(kappa_low, 1.0, samples):
        limit = gamma_bar_inf(kappa)
        for k in ks:
            rows.append((kappa, k, gamma_bar(k, kappa), limit))
    return DataTable(
        title='Stepsize thresholds',
        columns=('kappa', 'k', 'gamma_bar_k', 'gamma_bar_inf'),
        rows=tuple(rows),
    )


def t_curves(
    kappa: float = T_CURVE_KAPPA,
    ks: Iterable[int] = T_CURVE_KS,
    samples: int = CURVE_SAMPLES,
) -> DataTable:
    rows = []
    ks = tuple(ks)
    for gl in _open_grid(1.0, gamma_bar_inf(kappa), samples):
        for k in ks:
            rows.append((gl, k, t_k(gl, kappa, k)))
    return DataTable(
        title=f'T_k against gl (kappa = {kappa:g})',
        columns=('gl', 'k', 't_k'),
        rows=tuple(rows),
    )


def opt_compare_curves(
    samples: int = CURVE_SAMPLES,
    kappa_low: float = -10.0,
) -> DataTable:
    """Per-step gain of gamma_*, 2/sqrt(3) and 1 on nonconvex classes."""
    rows = []
    threshold = kappa_bar()
    aps = 2.0 / SQRT3
    for kappa in _open_grid(kappa_low, 0.0, samples):
        gamma_star = opt_const_nonconvex_asymptotic(kappa)
        rows.append(
            (
                kappa,
                gamma_star,
                gamma_bar_one(kappa),
                gamma_star * p_coeff(gamma_star, kappa * gamma_star),
                aps * p_coeff(aps, kappa * aps),
                p_coeff(1.0, kappa),
                threshold,
            ),
        )
    return DataTable(
        title='Asymptotic per-step gain of constant stepsizes',
        columns=(
            'kappa',
            'gamma_star',
            'gamma_bar_1',
            'gain_gamma_star',
            'gain_two_over_sqrt3',
            'gain_one',
            'kappa_bar',
        ),
        rows=tuple(rows),
    )


def opt_n_curves(
    kappas: Iterable[float] = OPT_N_KAPPAS,
    ns: Iterable[int] = OPT_N_NS,
) -> DataTable:
    """Numerically optimal constant stepsize against N."""
    rows = []
    ns = tuple(ns)
    for kappa in kappas:
        gamma_star = opt_const_nonconvex_asymptotic(kappa)
        for n in ns:
            optimal = opt_const_nonconvex_numeric(kappa, n)
            rows.append((kappa, n, optimal, gamma_star))
    return DataTable(
        title='Optimal constant stepsize against N',
        columns=('kappa', 'N', 'gl_optimal', 'gamma_star'),
        rows=tuple(rows),
    )


def figure_data(figure: Figure) -> DataTable:
    match figure:
        case Figure.P_TERM:
            return p_term_curves()
        case Figure.THRESHOLDS:
            return threshold_curves()
        case Figure.T_CURVES:
            return t_curves()
        case Figure.OPT_COMPARE:
            return opt_compare_curves()
        case Figure.OPT_N:
            return opt_n_curves()
