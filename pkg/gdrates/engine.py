from collections.abc import Callable
from dataclasses import dataclass
import logging
from typing import Final, final

import numpy as np
from numpy.typing import ArrayLike
from scipy.stats import ortho_group

from gdrates.curvature import CurvatureClass
from gdrates.errors import DomainError
from gdrates.interpolation import (
    DEFAULT_TOLERANCE,
    Triplet,
    TripletSet,
    Vector,
    WorstPair,
    as_vector,
    f_star_of,
    is_interpolable,
)
from gdrates.rates import RateBound, Regime
from gdrates.schedules import StepsizeSchedule
from gdrates.worstcase import (
    WorstCaseInstance,
    eval_value_and_grad,
    select_worst_case,
)

logger = logging.getLogger(__name__)

type Oracle = Callable[[Vector], tuple[float, Vector]]

REPLAY_TOLERANCE: Final = 1e-12


@final
@dataclass(frozen=True, kw_only=True, slots=True, eq=False)
class Trajectory:
    triplets: Final[TripletSet]
    schedule: Final[StepsizeSchedule]
    cls: Final[CurvatureClass]

    def __post_init__(self) -> None:
        if len(self.triplets) != len(self.schedule) + 1:
            raise DomainError(
                f'{len(self.schedule)} steps need {len(self.schedule) + 1} '
                f'triplets, got {len(self.triplets)}',
            )


def run_gd(
    oracle: Oracle,
    x0: ArrayLike,
    schedule: StepsizeSchedule,
    cls: CurvatureClass,
) -> Trajectory:
    x = as_vector(x0).copy()
    items = []
    for i, gl in enumerate(schedule.entries):
        if not 0 < gl < 2:
            raise DomainError(f'stepsize {i} = {gl} outside (0, 2)')
        f, g = oracle(x)
        items.append(Triplet(x=x, g=as_vector(g), f=f))
        x = x - gl / cls.l_upper * items[-1].g
    f, g = oracle(x)
    items.append(Triplet(x=x, g=as_vector(g), f=f))
    return Trajectory(
        triplets=TripletSet.of(items),
        schedule=schedule,
        cls=cls,
    )


def replay(
    triplets: TripletSet,
    schedule: StepsizeSchedule,
    cls: CurvatureClass,
    tol: float = REPLAY_TOLERANCE,
) -> Trajectory:
    """Check that stored points follow x_{i+1} = x_i - gamma_i g_i."""
    trajectory = Trajectory(triplets=triplets, schedule=schedule, cls=cls)
    for i, gl in enumerate(schedule.entries):
        a, b = triplets[i], triplets[i + 1]
        expected = a.x - gl / cls.l_upper * a.g
        scale = 1.0 + float(np.max(np.abs(a.x)))
        error = float(np.max(np.abs(expected - b.x)))
        if error > tol * scale:
            raise DomainError(
                f'triplet {i + 1} is not a gradient step from triplet {i} '
                f'(deviation {error:.3e})',
            )
    return trajectory


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class Performance:
    metric: Final[float]
    index: Final[int]
    f_star: Final[float]
    gap: Final[float]

    def ratio_to_bound(self, bound: RateBound) -> float:
        """Achieved metric over the bound gap / denominator."""
        return self.metric * bound.denominator / self.gap


def performance(trajectory: Trajectory, f_star: float) -> Performance:
    l_upper = trajectory.cls.l_upper
    norms = [float(t.g @ t.g) / (2.0 * l_upper) for t in trajectory.triplets]
    index = int(np.argmin(norms))
    gap = trajectory.triplets[0].f - f_star
    if not gap > 0:
        raise DomainError(f'initial gap must be > 0, got {gap}')
    return Performance(
        metric=norms[index],
        index=index,
        f_star=f_star,
        gap=gap,
    )


def simulate(instance: WorstCaseInstance) -> Trajectory:
    match instance.payload:
        case TripletSet() as triplets:
            return replay(triplets, instance.schedule, instance.cls)
        case payload:
            return run_gd(
                lambda x: eval_value_and_grad(payload, x),
                instance.x0,
                instance.schedule,
                instance.cls,
            )


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class TightnessReport:
    kind: Final[str]
    regime: Final[Regime]
    bound: Final[float]
    achieved: Final[float]
    ratio: Final[float]
    interpolable: Final[bool]
    worst: Final[WorstPair | None]
    conjectured: Final[bool]

    def passed(self, low: float = 1e-6, high: float = 1e-9) -> bool:
        return self.interpolable and 1.0 - low <= self.ratio <= 1.0 + high


def report_instance(
    instance: WorstCaseInstance,
    tol: float = DEFAULT_TOLERANCE,
) -> TightnessReport:
    trajectory = simulate(instance)
    star = f_star_of(trajectory.triplets, instance.cls)
    perf = performance(trajectory, star.f_star)
    verdict = is_interpolable(trajectory.triplets, instance.cls, tol)
    ratio = perf.ratio_to_bound(instance.expected)
    logger.info(
        '%s instance (%s): ratio %.9f, interpolable %s',
        instance.kind,
        instance.regime,
        ratio,
        verdict.interpolable,
    )
    return TightnessReport(
        kind=instance.kind,
        regime=instance.regime,
        bound=perf.gap / instance.expected.denominator,
        achieved=perf.metric,
        ratio=ratio,
        interpolable=verdict.interpolable,
        worst=verdict.worst,
        conjectured=instance.conjectured,
    )


def tightness_report(
    cls: CurvatureClass,
    gl: float,
    n: int,
    gap: float = 1.0,
    tol: float = DEFAULT_TOLERANCE,
) -> TightnessReport:
    return report_instance(select_worst_case(cls, gl, n, gap), tol)


def random_quadratic(
    cls: CurvatureClass,
    dimension: int,
    rng: np.random.Generator,
) -> Oracle:
    """Quadratic with a random orthogonal eigenbasis and spectrum in [mu, L]."""
    eigenvalues = rng.uniform(cls.mu, cls.l_upper, size=dimension)
    if dimension == 1:
        basis = np.ones((1, 1))
    else:
        basis = ortho_group.rvs(dimension, random_state=rng)
    hessian = basis @ np.diag(eigenvalues) @ basis.T
    linear = rng.standard_normal(dimension)

    def oracle(x: Vector) -> tuple[float, Vector]:
        g = hessian @ x + linear
        return float(0.5 * x @ hessian @ x + linear @ x), g

    return oracle


def random_smooth(
    cls: CurvatureClass,
    dimension: int,
    rng: np.random.Generator,
) -> Oracle:
    """Non-quadratic member of the class.

    In a random orthogonal basis every coordinate carries
    a y^2/2 + b cos(w y + phase)/w^2 with a = (L+mu)/2 and b = (L-mu)/2, whose
    second derivative a - b cos(w y + phase) stays in [mu, L].
    """
    mean = 0.5 * (cls.l_upper + cls.mu)
    ripple = 0.5 * (cls.l_upper - cls.mu)
    if dimension == 1:
        basis = np.ones((1, 1))
    else:
        basis = ortho_group.rvs(dimension, random_state=rng)
    frequencies = rng.uniform(0.5, 3.0, size=dimension)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=dimension)
    linear = rng.standard_normal(dimension)

    def oracle(x: Vector) -> tuple[float, Vector]:
        y = basis.T @ x
        angles = frequencies * y + phases
        f = (
            0.5 * mean * float(y @ y)
            + ripple * float(np.sum(np.cos(angles) / frequencies**2))
            + float(linear @ x)
        )
        dy = mean * y - ripple * np.sin(angles) / frequencies
        return f, basis @ dy + linear

    return oracle
