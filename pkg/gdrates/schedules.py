"""Optimal constant stepsizes and the dynamic stepsize sequence."""

from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from enum import Enum, unique
from itertools import count, islice, pairwise, takewhile
import logging
import math
from typing import Final, Self, final

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from gdrates.curvature import gamma_bar_inf
from gdrates.errors import DomainError, SolverError
from gdrates.thresholds import gamma_bar, gamma_bar_one

logger = logging.getLogger(__name__)

ROOT_TOLERANCE: Final = 1e-15
MAX_ITERATIONS: Final = 200
CELL_SAMPLES: Final = 33
CELL_TOLERANCE: Final = 1e-10


@final
@unique
class ScheduleKind(Enum):
    CONSTANT = 'constant'
    DYNAMIC = 'dynamic'
    TRUNCATED_DYNAMIC = 'truncated_dynamic'
    CUSTOM = 'custom'


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class StepsizeSchedule:
    entries: Final[tuple[float, ...]]
    kind: Final[ScheduleKind]

    def __post_init__(self) -> None:
        if not self.entries:
            raise DomainError('a schedule needs at least one stepsize')
        for i, gl in enumerate(self.entries):
            if not 0 < gl < 2:
                raise DomainError(f'stepsize {i} = {gl} outside (0, 2)')
        if self.kind is ScheduleKind.DYNAMIC:
            for i in range(1, len(self.entries)):
                if not self.entries[i - 1] < self.entries[i]:
                    raise DomainError(
                        f'dynamic schedule not increasing at index {i}',
                    )

    @classmethod
    def constant(cls, gl: float, n: int) -> Self:
        if n < 1:
            raise DomainError(f'number of iterations must be >= 1, got {n}')
        return cls(entries=(gl,) * n, kind=ScheduleKind.CONSTANT)

    @classmethod
    def custom(cls, entries: Iterable[float]) -> Self:
        return cls(entries=tuple(entries), kind=ScheduleKind.CUSTOM)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def is_constant(self) -> bool:
        return len(set(self.entries)) == 1


def opt_const_convex(n: int) -> float:
    return gamma_bar(n, 0.0)


def opt_const_strongly_convex(kappa: float, n: int) -> float:
    if not 0 < kappa < 1:
        raise DomainError(f'kappa must be in (0, 1), got {kappa}')
    return gamma_bar(n, kappa)


def _stationarity_cubic(l: float, kappa: float) -> float:
    return (
        -kappa * (1.0 + kappa) * l**3
        + (3.0 * kappa + (1.0 + kappa) ** 2) * l**2
        - 4.0 * (1.0 + kappa) * l
        + 4.0
    )


def opt_const_nonconvex_asymptotic(kappa: float) -> float:
    """Maximizer gamma_* of gl * p(gl, kappa*gl) on [1, 2).

    The cubic equals 1 at l = 1 and 4 kappa (1 - kappa) < 0 at l = 2.
    """
    if not kappa < 0:
        raise DomainError(f'kappa must be < 0, got {kappa}')
    root, result = bisect(
        _stationarity_cubic,
        1.0,
        2.0,
        args=(kappa,),
        xtol=ROOT_TOLERANCE,
        maxiter=MAX_ITERATIONS,
        full_output=True,
        disp=False,
    )
    if not result.converged:
        raise SolverError(f'gamma_*({kappa}) did not converge: {result.flag}')
    return root


def kappa_bar() -> float:
    """Curvature ratio below which gamma_* <= gamma_bar_1."""
    sqrt5 = math.sqrt(5.0)
    return (-9.0 - 5.0 * sqrt5 + math.sqrt(190.0 + 90.0 * sqrt5)) / 4.0


def _dynamic_cubic(s: float, s_prev: float, kappa: float) -> float:
    a = 2.0 - s_prev * (1.0 + kappa)
    return (
        -kappa * a * s**3
        + 2.0 * (1.0 + kappa) * a * s**2
        + 2.0 * (-3.0 + 2.0 * s_prev * (1.0 + kappa)) * s
        - 2.0 * s_prev
    )


def _next_convex(s_prev: float) -> float:
    return (3.0 - 2.0 * s_prev + math.sqrt(9.0 - 4.0 * s_prev)) / (
        2.0 * (2.0 - s_prev)
    )


def dynamic_balance_residual(
    s_next: float,
    s_prev: float,
    kappa: float,
) -> float:
    """Zero when s_next follows s_prev in the dynamic sequence.

    The balance

        s+ [(2-s+)(2-kappa s+) - 1]/(2-s+(1+kappa)) + s/(2-s(1+kappa))

    is returned times both denominators, which stay positive but vanish
    as the sequence approaches gamma_bar_inf.
    """
    gain = (2.0 - s_next) * (2.0 - kappa * s_next) - 1.0
    head = s_next * gain * (2.0 - s_prev * (1.0 + kappa))
    return head + s_prev * (2.0 - s_next * (1.0 + kappa))


def _next_dynamic(s_prev: float, kappa: float, upper: float) -> float:
    root, result = bisect(
        _dynamic_cubic,
        1.0,
        upper,
        args=(s_prev, kappa),
        xtol=ROOT_TOLERANCE,
        maxiter=MAX_ITERATIONS,
        full_output=True,
        disp=False,
    )
    if not result.converged:
        raise SolverError(
            f'dynamic stepsize after {s_prev} at kappa {kappa} did not '
            f'converge: {result.flag}',
        )
    return root


def _dynamic_steps(kappa: float) -> Iterator[float]:
    upper = gamma_bar_inf(kappa)
    s_prev = 0.0
    for i in count():
        if kappa == 0:
            s = _next_convex(s_prev)
        elif s_prev == 0:
            s = gamma_bar_one(kappa)
        else:
            s = _next_dynamic(s_prev, kappa, upper)
        if not s_prev < s < upper:
            raise SolverError(
                f'dynamic sequence at kappa {kappa} stalls at {s} after '
                f'{i} steps in floating point',
            )
        yield s
        s_prev = s


def dynamic_sequence(kappa: float, n: int) -> StepsizeSchedule:
    if n < 1:
        raise DomainError(f'number of iterations must be >= 1, got {n}')
    entries = tuple(islice(_dynamic_steps(kappa), n))
    logger.debug('dynamic sequence (kappa=%g): %s', kappa, entries)
    return StepsizeSchedule(entries=entries, kind=ScheduleKind.DYNAMIC)


def _steps_below(kappa: float, n: int, cap: float) -> list[float]:
    # stops at the crossing, before the sequence can stall near 2
    if n < 1:
        raise DomainError(f'number of iterations must be >= 1, got {n}')
    return list(takewhile(lambda s: s <= cap, islice(_dynamic_steps(kappa), n)))


def truncated_schedule(kappa: float, n: int) -> StepsizeSchedule:
    """Dynamic sequence capped at gamma_*; constant after the crossing."""
    if not kappa < 0:
        raise DomainError(f'kappa must be < 0, got {kappa}')
    cap = opt_const_nonconvex_asymptotic(kappa)
    below = _steps_below(kappa, n, cap)
    return StepsizeSchedule(
        entries=(*below, *(cap,) * (n - len(below))),
        kind=ScheduleKind.TRUNCATED_DYNAMIC,
    )


def crossing_index(kappa: float, n: int) -> int:
    """Number of dynamic stepsizes that stay at or below gamma_*."""
    cap = opt_const_nonconvex_asymptotic(kappa)
    return len(_steps_below(kappa, n, cap))


def opt_const_nonconvex_numeric(kappa: float, n: int) -> float:
    """Constant stepsize maximizing the nonconvex denominator at fixed N.

    Each threshold cell [gamma_bar_k, gamma_bar_{k+1}] is sampled on a grid
    and the best sample refined with a bounded scalar search. Beyond
    gamma_bar_N the linear regime only decreases.
    """
    from gdrates.rates import denom_nonconvex_const

    if not kappa < 0:
        raise DomainError(f'kappa must be < 0, got {kappa}')
    if n < 1:
        raise DomainError(f'number of iterations must be >= 1, got {n}')

    def denominator(gl: float) -> float:
        return denom_nonconvex_const(gl, kappa, n).denominator

    edges = [1.0] + [gamma_bar(k, kappa) for k in range(1, n + 1)]
    best_gl = 1.0
    best_value = denominator(1.0)
    for a, b in pairwise(edges):
        grid = np.linspace(a, b, CELL_SAMPLES)
        values = [denominator(float(gl)) for gl in grid]
        i = int(np.argmax(values))
        if values[i] > best_value:
            best_gl, best_value = float(grid[i]), values[i]
        lo = float(grid[max(i - 1, 0)])
        hi = float(grid[min(i + 1, CELL_SAMPLES - 1)])
        result = minimize_scalar(
            lambda gl: -denominator(gl),
            bounds=(lo, hi),
            method='bounded',
            options={'xatol': CELL_TOLERANCE},
        )
        if result.success and -result.fun > best_value:
            best_gl, best_value = float(result.x), float(-result.fun)
    logger.info(
        'optimal constant stepsize (kappa=%g, N=%d): %.6f -> %.6f',
        kappa,
        n,
        best_gl,
        best_value,
    )
    return best_gl
