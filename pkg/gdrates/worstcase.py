"""Worst-case instances attaining the rate bounds with equality.

Every construction is scaled so that f(x_0) - f_* equals the requested gap,
which forces ||g_N||^2 = 2L gap / D and f_0 - f_N = gap (D - 1) / D for the
denominator D of the bound it attains.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from itertools import pairwise
import logging
import math
from typing import Final, final

import numpy as np
from numpy.typing import ArrayLike, NDArray

from gdrates.curvature import CurvatureClass, p_coeff, t_k
from gdrates.errors import DomainError
from gdrates.interpolation import (
    Triplet,
    TripletSet,
    Vector,
    as_vector,
    f_star_of,
)
from gdrates.rates import (
    RateBound,
    Regime,
    RegimeKind,
    denom_constant,
    denom_convex,
    denom_strongly_convex,
)
from gdrates.schedules import StepsizeSchedule
from gdrates.thresholds import gamma_bar, n_bar

logger = logging.getLogger(__name__)


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class HuberQuadratic:
    """L x^2/2 on [-tau, tau]; mu x^2/2 plus a matching affine part outside."""

    tau: Final[float]
    mu: Final[float]
    l_upper: Final[float]

    def __post_init__(self) -> None:
        if not self.tau > 0:
            raise DomainError(f'tau must be > 0, got {self.tau}')
        if not 0 <= self.mu < self.l_upper:
            raise DomainError(
                f'Huber pieces need 0 <= mu < L, got {self.mu}, {self.l_upper}',
            )


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class QuadraticPiece:
    curvature: Final[float]
    slope_at_ref: Final[float]
    value_at_ref: Final[float]
    ref: Final[float]

    def value(self, x: float) -> float:
        d = x - self.ref
        return (
            self.value_at_ref
            + self.slope_at_ref * d
            + self.curvature * d * d / 2.0
        )

    def slope(self, x: float) -> float:
        return self.slope_at_ref + self.curvature * (x - self.ref)


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class Piecewise1D:
    breakpoints: Final[tuple[float, ...]]
    segments: Final[tuple[QuadraticPiece, ...]]

    def __post_init__(self) -> None:
        if len(self.segments) != len(self.breakpoints) + 1:
            raise DomainError(
                f'{len(self.breakpoints)} breakpoints need '
                f'{len(self.breakpoints) + 1} segments, '
                f'got {len(self.segments)}',
            )
        for a, b in pairwise(self.breakpoints):
            if not a <= b:
                raise DomainError('breakpoints must be sorted')

    def segment_at(self, x: float) -> QuadraticPiece:
        index = int(np.searchsorted(self.breakpoints, x, side='right'))
        return self.segments[index]

    def continuity_gaps(self) -> tuple[float, float]:
        """Largest value and slope jumps over all breakpoints."""
        value_gap = 0.0
        slope_gap = 0.0
        for i, x in enumerate(self.breakpoints):
            left, right = self.segments[i], self.segments[i + 1]
            value_gap = max(value_gap, abs(left.value(x) - right.value(x)))
            slope_gap = max(slope_gap, abs(left.slope(x) - right.slope(x)))
        return value_gap, slope_gap


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class Quadratic:
    """1/2 sum_i c_i x_i^2 + <b, x>."""

    curvatures: Final[tuple[float, ...]]
    linear: Final[tuple[float, ...]]

    def __post_init__(self) -> None:
        if len(self.curvatures) != len(self.linear):
            raise DomainError('curvatures and linear term differ in size')


type Payload = HuberQuadratic | Piecewise1D | Quadratic | TripletSet


@final
@dataclass(frozen=True, kw_only=True, slots=True, eq=False)
class WorstCaseInstance:
    payload: Final[Payload]
    x0: Final[Vector]
    cls: Final[CurvatureClass]
    schedule: Final[StepsizeSchedule]
    expected: Final[RateBound]
    gap: Final[float]
    conjectured: Final[bool] = False

    @property
    def regime(self) -> Regime:
        return self.expected.regime

    @property
    def kind(self) -> str:
        match self.payload:
            case HuberQuadratic():
                return 'huber'
            case Piecewise1D():
                return 'piecewise'
            case Quadratic():
                return 'quadratic'
            case TripletSet():
                return 'triplets'


def eval_value_and_grad(payload: Payload, x: ArrayLike) -> tuple[float, Vector]:
    point = as_vector(x)
    match payload:
        case HuberQuadratic(tau=tau, mu=mu, l_upper=l_upper):
            (t,) = point
            if abs(t) <= tau:
                return l_upper * t * t / 2.0, np.array([l_upper * t])
            width = l_upper - mu
            value = mu * t * t / 2.0 + width * tau * abs(t) - width * tau**2 / 2
            return value, np.array([mu * t + width * tau * math.copysign(1, t)])
        case Piecewise1D():
            (t,) = point
            segment = payload.segment_at(t)
            return segment.value(t), np.array([segment.slope(t)])
        case Quadratic(curvatures=curvatures, linear=linear):
            c = np.asarray(curvatures)
            b = np.asarray(linear)
            if point.shape != c.shape:
                raise DomainError(
                    f'point has shape {point.shape}, quadratic has {c.shape}',
                )
            return float(0.5 * (c * point) @ point + b @ point), c * point + b
        case TripletSet():
            raise DomainError('a triplet set has no function to evaluate')


def _check_gap(gap: float) -> None:
    if not gap > 0:
        raise DomainError(f'gap must be > 0, got {gap}')


def _lower_norm_sq(gap: float, l_upper: float, denominator: float) -> float:
    return 2.0 * l_upper * gap / denominator


def _back_solve(
    gradients: Sequence[Vector],
    steps: Sequence[float],
) -> list[Vector]:
    """Points with x_N = 0 and x_i = x_{i+1} + gamma_i g_i."""
    points = [np.zeros_like(gradients[-1])]
    for g, step in zip(reversed(gradients[:-1]), reversed(steps), strict=True):
        points.append(points[-1] + step * g)
    points.reverse()
    return points


def _huber(
    cls: CurvatureClass,
    gl: float,
    n: int,
    gap: float,
    bound: RateBound,
) -> WorstCaseInstance:
    l_upper, mu = cls.l_upper, cls.mu
    gm = cls.kappa * gl
    eta = 1.0 - gm
    tau = math.sqrt(2.0 / l_upper * gap / bound.denominator)
    x = tau
    for _ in range(n):
        x = (x + gl * (1.0 - cls.kappa) * tau) / eta
    logger.debug('Huber instance: tau=%g x0=%g', tau, x)
    return WorstCaseInstance(
        payload=HuberQuadratic(tau=tau, mu=mu, l_upper=l_upper),
        x0=np.array([x]),
        cls=cls,
        schedule=StepsizeSchedule.constant(gl, n),
        expected=bound,
        gap=gap,
    )


def _pure_quadratic(
    cls: CurvatureClass,
    gl: float,
    n: int,
    gap: float,
    bound: RateBound,
) -> WorstCaseInstance:
    return WorstCaseInstance(
        payload=Quadratic(curvatures=(cls.l_upper,), linear=(0.0,)),
        x0=np.array([math.sqrt(2.0 * gap / cls.l_upper)]),
        cls=cls,
        schedule=StepsizeSchedule.constant(gl, n),
        expected=bound,
        gap=gap,
    )


def wc_convex(
    l_upper: float,
    gl: float,
    n: int,
    gap: float = 1.0,
) -> WorstCaseInstance:
    _check_gap(gap)
    cls = CurvatureClass.of(0.0, l_upper)
    bound = denom_convex(gl, n)
    if gl < gamma_bar(n, 0.0):
        return _huber(cls, gl, n, gap, bound)
    return _pure_quadratic(cls, gl, n, gap, bound)


def wc_strongly_convex(
    cls: CurvatureClass,
    gl: float,
    n: int,
    gap: float = 1.0,
) -> WorstCaseInstance:
    _check_gap(gap)
    bound = denom_strongly_convex(gl, cls.kappa, n)
    if gl < gamma_bar(n, cls.kappa):
        return _huber(cls, gl, n, gap, bound)
    return _pure_quadratic(cls, gl, n, gap, bound)


def wc_linear_regime(
    cls: CurvatureClass,
    gl: float,
    n: int,
    gap: float = 1.0,
) -> WorstCaseInstance:
    _check_gap(gap)
    if gl < gamma_bar(n, cls.kappa):
        raise DomainError(
            f'gl = {gl} is below gamma_bar_{n}; not the linear regime',
        )
    bound = denom_constant(gl, cls.kappa, n)
    return _pure_quadratic(cls, gl, n, gap, bound)


def _check_nonconvex(cls: CurvatureClass) -> None:
    if not cls.mu < 0:
        raise DomainError(f'construction needs mu < 0, got {cls.mu}')


def wc_nonconvex_short(
    cls: CurvatureClass,
    schedule: Sequence[float],
    gap: float = 1.0,
) -> WorstCaseInstance:
    """1D piecewise quadratic with the same gradient U at every iterate."""
    _check_gap(gap)
    _check_nonconvex(cls)
    if not schedule:
        raise DomainError('schedule must not be empty')
    for i, gl in enumerate(schedule):
        if not 0 < gl <= 1:
            raise DomainError(f'short steps need gl in (0, 1], got {i}: {gl}')
    l_upper, mu = cls.l_upper, cls.mu
    gains = [gl * p_coeff(gl, cls.kappa * gl) for gl in schedule]
    denominator = 1.0 + sum(gains)
    u = math.sqrt(_lower_norm_sq(gap, l_upper, denominator))
    n = len(schedule)

    points = [0.0] * (n + 1)
    values = [0.0] * (n + 1)
    for i in reversed(range(n)):
        points[i] = points[i + 1] + schedule[i] / l_upper * u
        values[i] = values[i + 1] + u * u / (2.0 * l_upper) * gains[i]

    breakpoints = [points[n]]
    segments = [
        QuadraticPiece(
            curvature=l_upper,
            slope_at_ref=u,
            value_at_ref=values[n],
            ref=points[n],
        ),
    ]
    for i in reversed(range(n)):
        inner = points[i] + mu * schedule[i] / l_upper * u / (l_upper - mu)
        segments.append(
            QuadraticPiece(
                curvature=mu,
                slope_at_ref=u,
                value_at_ref=values[i + 1],
                ref=points[i + 1],
            ),
        )
        breakpoints.append(inner)
        segments.append(
            QuadraticPiece(
                curvature=l_upper,
                slope_at_ref=u,
                value_at_ref=values[i],
                ref=points[i],
            ),
        )
        if i > 0:
            breakpoints.append(points[i])

    if all(gl == schedule[0] for gl in schedule):
        steps = StepsizeSchedule.constant(schedule[0], n)
        bound = denom_constant(schedule[0], cls.kappa, n)
    else:
        steps = StepsizeSchedule.custom(schedule)
        bound = RateBound(
            denominator=denominator,
            regime=Regime(kind=RegimeKind.ONE_STEP),
        )
    return WorstCaseInstance(
        payload=Piecewise1D(
            breakpoints=tuple(breakpoints),
            segments=tuple(segments),
        ),
        x0=np.array([points[0]]),
        cls=cls,
        schedule=steps,
        expected=bound,
        gap=gap,
    )


def mid_cosine(gl: float, kappa: float) -> float:
    """Cosine between consecutive worst-case gradients of mid steps."""
    rho = 1.0 - gl
    eta = 1.0 - kappa * gl
    return (1.0 + eta * rho) / (eta + rho)


def _check_mid(cls: CurvatureClass, gl: float) -> None:
    _check_nonconvex(cls)
    limit = gamma_bar(1, cls.kappa) * (1.0 + 1e-12)
    if not 1 <= gl <= limit:
        raise DomainError(f'mid steps need gl in [1, {limit}], got {gl}')


def _triplet_instance(
    cls: CurvatureClass,
    gradients: Sequence[Vector],
    values: Sequence[float],
    schedule: StepsizeSchedule,
    bound: RateBound,
    gap: float,
    conjectured: bool,
) -> WorstCaseInstance:
    steps = [gl / cls.l_upper for gl in schedule.entries]
    points = _back_solve(gradients, steps)
    triplets = TripletSet.of(
        Triplet(x=x, g=g, f=f)
        for x, g, f in zip(points, gradients, values, strict=True)
    )
    return WorstCaseInstance(
        payload=triplets,
        x0=points[0].copy(),
        cls=cls,
        schedule=schedule,
        expected=bound,
        gap=gap,
        conjectured=conjectured,
    )


def wc_nonconvex_mid(
    cls: CurvatureClass,
    gl: float,
    n: int,
    gap: float = 1.0,
) -> WorstCaseInstance:
    """2D triplets whose gradients alternate around a fixed direction."""
    _check_gap(gap)
    _check_mid(cls, gl)
    bound = denom_constant(gl, cls.kappa, n)
    c = mid_cosine(gl, cls.kappa)
    u = math.sqrt(_lower_norm_sq(gap, cls.l_upper, bound.denominator))
    gap_n = gap * (bound.denominator - 1.0) / bound.denominator
    along = u * math.sqrt((1.0 + c) / 2.0)
    across = u * math.sqrt(max(1.0 - c, 0.0) / 2.0)
    gradients = [np.array([along, (-1) ** i * across]) for i in range(n + 1)]
    values = [gap_n * (1.0 - i / n) for i in range(n + 1)]
    return _triplet_instance(
        cls,
        gradients,
        values,
        StepsizeSchedule.constant(gl, n),
        bound,
        gap,
        conjectured=False,
    )


def _rotation(theta: float) -> NDArray[np.float64]:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def wc_nonconvex_mid_variable(
    cls: CurvatureClass,
    schedule: Sequence[float],
    gap: float = 1.0,
) -> WorstCaseInstance:
    _check_gap(gap)
    if not schedule:
        raise DomainError('schedule must not be empty')
    for gl in schedule:
        _check_mid(cls, gl)
    gains = [gl * p_coeff(gl, cls.kappa * gl) for gl in schedule]
    denominator = 1.0 + sum(gains)
    u_sq = _lower_norm_sq(gap, cls.l_upper, denominator)
    u = math.sqrt(u_sq)
    angles = [
        math.acos(float(np.clip(mid_cosine(gl, cls.kappa), -1.0, 1.0)))
        for gl in schedule
    ]
    half = angles[0] / 2.0
    gradients = [u * np.array([math.cos(half), -math.sin(half)])]
    for i, theta in enumerate(angles):
        gradients.append(_rotation((-1) ** i * theta) @ gradients[-1])
    n = len(schedule)
    values = [0.0] * (n + 1)
    for i in reversed(range(n)):
        values[i] = values[i + 1] + u_sq / (2.0 * cls.l_upper) * gains[i]
    return _triplet_instance(
        cls,
        gradients,
        values,
        StepsizeSchedule.custom(schedule),
        RateBound(
            denominator=denominator,
            regime=Regime(kind=RegimeKind.ONE_STEP),
        ),
        gap,
        conjectured=True,
    )


def _head_gradients(
    u: float,
    gl: float,
    kappa: float,
    n_bar_: int,
    count: int,
    dimension: int,
) -> list[Vector]:
    """Gradients of the 2D quadratic pattern, normalized to U at index N-bar."""
    rho = 1.0 - gl
    eta = 1.0 - kappa * gl
    s = math.sqrt(
        (eta * eta - 1.0) * (1.0 - rho * rho) / (eta * eta - rho * rho),
    )
    a = u * s / math.sqrt(1.0 - rho * rho)
    b = u * s / math.sqrt(eta * eta - 1.0)
    gradients = []
    for i in range(count):
        g = np.zeros(dimension)
        g[0] = a * rho ** (i - n_bar_)
        g[1] = b * eta ** (i - n_bar_)
        gradients.append(g)
    return gradients


def wc_quadratic_2d(
    cls: CurvatureClass,
    gl: float,
    n: int,
    gap: float = 1.0,
) -> WorstCaseInstance:
    """Quadratic with curvatures (L, mu), for N-bar = N - 1."""
    _check_gap(gap)
    _check_nonconvex(cls)
    if not 1 < gl < 2:
        raise DomainError(f'gl must be in (1, 2), got {gl}')
    k = n_bar(gl, cls.kappa, n)
    if k != n - 1:
        raise DomainError(
            f'gl = {gl} has N-bar = {k}; the 2D quadratic needs {n - 1}',
        )
    bound = denom_constant(gl, cls.kappa, n)
    u = math.sqrt(_lower_norm_sq(gap, cls.l_upper, bound.denominator))
    gradients = _head_gradients(u, gl, cls.kappa, k, n + 1, 2)
    steps = [gl / cls.l_upper] * n
    points = _back_solve(gradients, steps)
    return WorstCaseInstance(
        payload=Quadratic(
            curvatures=(cls.l_upper, cls.mu),
            linear=(float(gradients[-1][0]), float(gradients[-1][1])),
        ),
        x0=points[0],
        cls=cls,
        schedule=StepsizeSchedule.constant(gl, n),
        expected=bound,
        gap=gap,
    )


def rotation_parameter(gl: float, kappa: float, i: int, n_bar_: int) -> float:
    rho = 1.0 - gl
    eta = 1.0 - kappa * gl
    magnitude = math.sqrt(
        (eta * eta - 1.0)
        * (1.0 - rho ** (2 * (i - n_bar_)))
        / (1.0 - rho * rho),
    )
    return (-1) ** (i - n_bar_ - 1) * magnitude


def _value_weights(gl: float, kappa: float, n: int, n_bar_: int) -> list[float]:
    """Unnormalized f_i - f_N for the 3D pattern, i = 0..N."""
    l, u = gl, kappa * gl
    scale = l * u / (l - u)
    t = [t_k(gl, kappa, j) for j in range(1, n_bar_ + 1)]
    return [
        n - i + scale * sum(t[: max(n_bar_ - i, 0)]) for i in range(n + 1)
    ]


def wc_conjectured_3d(
    cls: CurvatureClass,
    gl: float,
    n: int,
    gap: float = 1.0,
    *,
    sign: int = 1,
) -> WorstCaseInstance:
    """3D triplets: the 2D quadratic pattern up to N-bar + 1, then rotations.

    sign picks the orientation of the rotations; both give the same Gram
    matrix.
    """
    _check_gap(gap)
    _check_nonconvex(cls)
    if sign not in (1, -1):
        raise DomainError(f'sign must be 1 or -1, got {sign}')
    if not 1 < gl < 2:
        raise DomainError(f'gl must be in (1, 2), got {gl}')
    k = n_bar(gl, cls.kappa, n)
    if not 1 <= k <= n - 2:
        raise DomainError(
            f'gl = {gl} has N-bar = {k}; the 3D pattern needs 1..{n - 2}',
        )
    bound = denom_constant(gl, cls.kappa, n)
    u = math.sqrt(_lower_norm_sq(gap, cls.l_upper, bound.denominator))
    rho = 1.0 - gl
    eta = 1.0 - cls.kappa * gl
    gradients = _head_gradients(u, gl, cls.kappa, k, k + 2, 3)
    for i in range(k + 1, n):
        q = sign * rotation_parameter(gl, cls.kappa, i, k)
        turn = np.array([[1.0, -q], [q, 1.0]]) / (1.0 + q * q)
        g = gradients[-1]
        step = np.zeros(3)
        step[1:] = turn @ g[1:]
        gradients.append(rho * g + (eta - rho) * step)

    gap_n = gap * (bound.denominator - 1.0) / bound.denominator
    weights = _value_weights(gl, cls.kappa, n, k)
    values = [gap_n * w / weights[0] for w in weights]
    return _triplet_instance(
        cls,
        gradients,
        values,
        StepsizeSchedule.constant(gl, n),
        bound,
        gap,
        conjectured=True,
    )


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class NecessaryConditionReport:
    deviations: Final[dict[str, float]]
    argmin_is_last: Final[bool]

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values(), default=0.0)

    def passed(self, tol: float = 1e-9) -> bool:
        return self.argmin_is_last and self.max_deviation < tol


def check_nec_conds_3d(
    triplets: TripletSet,
    cls: CurvatureClass,
    gl: float,
    n: int,
) -> NecessaryConditionReport:
    """Deviations from the gradient and value identities of the worst case.

    Gradient identities are measured relative to U^2 = ||g_N||^2 and value
    identities relative to f_0 - f_N.
    """
    if len(triplets) != n + 1:
        raise DomainError(f'expected {n + 1} triplets, got {len(triplets)}')
    k = n_bar(gl, cls.kappa, n)
    rho = 1.0 - gl
    eta = 1.0 - cls.kappa * gl
    c = mid_cosine(gl, cls.kappa)
    s_sq = (eta * eta - 1.0) * (1.0 - rho * rho) / (eta * eta - rho * rho)
    g = triplets.gradients
    u_sq = float(g[n] @ g[n])

    def head(power: int) -> float:
        return s_sq * (
            rho**power / (1.0 - rho * rho) + eta**power / (eta * eta - 1.0)
        )

    def worst(items: list[float]) -> float:
        return max((abs(item) for item in items), default=0.0)

    tail_norms = [float(g[i] @ g[i]) / u_sq - 1.0 for i in range(k, n + 1)]
    head_norms = [
        float(g[i] @ g[i]) / u_sq - head(2 * (i - k)) for i in range(k)
    ]
    dist_1 = [
        float(g[i] @ g[i + 1]) / u_sq
        - (head(2 * (i - k) + 1) if i < k else c)
        for i in range(n)
    ]
    dist_2 = [
        float(g[i] @ g[i + 2] - g[i + 1] @ g[i + 1]) / u_sq
        for i in range(min(k, n - 1))
    ]
    f = triplets.values
    weights = _value_weights(gl, cls.kappa, n, k)
    span = f[0] - f[n]
    ratios = [
        (f[i] - f[n]) / span - weights[i] / weights[0] for i in range(n + 1)
    ]
    return NecessaryConditionReport(
        deviations={
            'tail_norms': worst(tail_norms),
            'head_norms': worst(head_norms),
            'dist_1': worst(dist_1),
            'dist_2': worst(dist_2),
            'values': worst(ratios),
        },
        argmin_is_last=f_star_of(triplets, cls).index == n,
    )


def select_worst_case(
    cls: CurvatureClass,
    gl: float,
    n: int,
    gap: float = 1.0,
) -> WorstCaseInstance:
    if not 0 < gl < 2:
        raise DomainError(f'gl must be in (0, 2), got {gl}')
    if cls.mu > 0:
        return wc_strongly_convex(cls, gl, n, gap)
    if cls.mu == 0:
        return wc_convex(cls.l_upper, gl, n, gap)
    if gl <= 1:
        return wc_nonconvex_short(cls, [gl] * n, gap)
    k = n_bar(gl, cls.kappa, n)
    if k >= n:
        return wc_linear_regime(cls, gl, n, gap)
    if k == 0:
        return wc_nonconvex_mid(cls, gl, n, gap)
    if k == n - 1:
        return wc_quadratic_2d(cls, gl, n, gap)
    return wc_conjectured_3d(cls, gl, n, gap)

