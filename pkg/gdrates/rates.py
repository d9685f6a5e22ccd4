"""Worst-case rate denominators.

Every bound has the shape

    min_i ||grad f(x_i)||^2 / (2L) <= (f(x_0) - f_*) / denominator

and the functions here return the denominator together with the regime
(which argument of the inner minimum is active).
"""

from collections.abc import Sequence
from dataclasses import dataclass, replace
from enum import Enum, unique
import math
from typing import Final, final

from gdrates.curvature import (
    even_power_sum,
    inv_even_power,
    p_coeff,
    step_gain,
    t_k,
)
from gdrates.errors import DomainError
from gdrates.schedules import (
    crossing_index,
    dynamic_sequence,
    opt_const_nonconvex_asymptotic,
    truncated_schedule,
)
from gdrates.thresholds import gamma_bar, n_bar

SQRT3: Final = math.sqrt(3.0)

_SLACK: Final = 1e-12


@final
@unique
class RegimeKind(Enum):
    SUBLINEAR = 'sublinear'
    LINEAR_L = 'linear_L'
    LINEAR_MU = 'linear_mu'
    ONE_STEP = 'one_step'
    DYNAMIC = 'dynamic'


@final
@unique
class NumeratorKind(Enum):
    GAP_TO_FSTAR = 'gap_to_fstar'
    GAP_TO_FN = 'gap_to_fN'


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class Regime:
    kind: Final[RegimeKind]
    k: Final[int | None] = None

    def __str__(self) -> str:
        match self.kind:
            case RegimeKind.SUBLINEAR if self.k is not None:
                return f'sublinear_{self.k}'
            case _:
                return self.kind.value

    @classmethod
    def parse(cls, text: str) -> 'Regime':
        if text.startswith('sublinear_'):
            return cls(kind=RegimeKind.SUBLINEAR, k=int(text.split('_')[1]))
        return cls(kind=RegimeKind(text))


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class RateBound:
    denominator: Final[float]
    regime: Final[Regime]
    numerator_kind: Final[NumeratorKind] = NumeratorKind.GAP_TO_FSTAR

    def __post_init__(self) -> None:
        if not self.denominator > 0:
            raise DomainError(
                f'rate denominator must be > 0, got {self.denominator}',
            )

    def to_fn(self) -> 'RateBound':
        """The complementary bound on (f_0 - f_N), without the leading 1."""
        if self.numerator_kind is NumeratorKind.GAP_TO_FN:
            return self
        return replace(
            self,
            denominator=self.denominator - 1.0,
            numerator_kind=NumeratorKind.GAP_TO_FN,
        )

    def bound(self, gap: float = 1.0) -> float:
        return gap / self.denominator


def _sublinear(k: int) -> Regime:
    return Regime(kind=RegimeKind.SUBLINEAR, k=k)


_SUBLINEAR: Final = Regime(kind=RegimeKind.SUBLINEAR)
_LINEAR_L: Final = Regime(kind=RegimeKind.LINEAR_L)
_LINEAR_MU: Final = Regime(kind=RegimeKind.LINEAR_MU)
_ONE_STEP: Final = Regime(kind=RegimeKind.ONE_STEP)
_DYNAMIC: Final = Regime(kind=RegimeKind.DYNAMIC)


def _check_n(n: int) -> None:
    if n < 1:
        raise DomainError(f'number of iterations must be >= 1, got {n}')


def _check_gl(gl: float, upper: float = 2.0) -> None:
    if not 0 < gl < upper:
        raise DomainError(f'gl must be in (0, {upper}), got {gl}')


def exponential_term(x: float, n: int) -> float:
    """(-1 + (1-x)^{-2N}) / x, i.e. E_N(1 - x); +inf at x = 1."""
    if abs(1.0 - x) < 1e-10:
        return math.inf
    if x == 0:
        return 2.0 * n
    return (-1.0 + inv_even_power(1.0 - x, n)) / x


def denom_convex(gl: float, n: int) -> RateBound:
    _check_gl(gl)
    _check_n(n)
    sublinear = 2.0 * n
    linear = exponential_term(gl, n)
    if sublinear <= linear:
        return RateBound(
            denominator=1.0 + gl * sublinear,
            regime=_SUBLINEAR,
        )
    return RateBound(denominator=1.0 + gl * linear, regime=_LINEAR_L)


def denom_strongly_convex(gl: float, kappa: float, n: int) -> RateBound:
    if not 0 < kappa < 1:
        raise DomainError(f'kappa must be in (0, 1), got {kappa}')
    _check_gl(gl)
    _check_n(n)
    by_mu = exponential_term(kappa * gl, n)
    by_l = exponential_term(gl, n)
    if by_mu <= by_l:
        return RateBound(denominator=1.0 + gl * by_mu, regime=_LINEAR_MU)
    return RateBound(denominator=1.0 + gl * by_l, regime=_LINEAR_L)


def _check_p_n_args(gl: float, gm: float, n: int, allow_zero: bool) -> None:
    _check_gl(gl)
    _check_n(n)
    if gm > 0 or (gm == 0 and not allow_zero):
        raise DomainError(f'P_N needs gm < 0, got {gm}')


def p_n_sum(gl: float, gm: float, n: int) -> float:
    """p * [N - c * sum_{k=0}^{N} [T_k]_+] with c = -l*u/(l-u)."""
    _check_p_n_args(gl, gm, n, allow_zero=True)
    l, u = gl, gm
    p = p_coeff(l, u)
    if u == 0 or l == 1.0:
        return p * n
    kappa = u / l
    c = -l * u / (l - u)
    clipped = sum(max(t_k(l, kappa, k), 0.0) for k in range(n + 1))
    return p * (n - c * clipped)


def _e_k_double_prime(x: float, k: int) -> float:
    return even_power_sum(x, k) / x


def p_n_min(gl: float, gm: float, n: int) -> float:
    """p * min_{0<=k<=N} {[E''_k(l) - E''_k(u)] / (1/l - 1/u) + N - k}."""
    _check_p_n_args(gl, gm, n, allow_zero=False)
    l, u = gl, gm
    p = p_coeff(l, u)
    if l == 1.0:
        return p * n
    weight = 1.0 / l - 1.0 / u
    return p * min(
        (_e_k_double_prime(l, k) - _e_k_double_prime(u, k)) / weight + n - k
        for k in range(n + 1)
    )


def p_n_piecewise(gl: float, gm: float, n: int) -> float:
    """Closed form on the cell [gamma_bar_k, gamma_bar_{k+1}) with k = N-bar."""
    _check_p_n_args(gl, gm, n, allow_zero=False)
    l, u = gl, gm
    p = p_coeff(l, u)
    k = n_bar(l, u / l, n) if l > 1.0 else 0
    if k == 0:
        return p * n
    weight = 1.0 / (l * (2.0 - l)) - 1.0 / (u * (2.0 - u))
    head = (_e_k_double_prime(l, k) - _e_k_double_prime(u, k)) / weight
    return head + p * (n - k)


def denom_nonconvex_const(gl: float, kappa: float, n: int) -> RateBound:
    if not kappa < 0:
        raise DomainError(f'kappa must be < 0, got {kappa}')
    _check_gl(gl)
    _check_n(n)
    sublinear = p_n_piecewise(gl, kappa * gl, n)
    linear = exponential_term(gl, n)
    if sublinear <= linear:
        k = n_bar(gl, kappa, n) if gl > 1.0 else 0
        return RateBound(
            denominator=1.0 + gl * sublinear,
            regime=_sublinear(min(k, n)),
        )
    return RateBound(denominator=1.0 + gl * linear, regime=_LINEAR_L)


def denom_constant(gl: float, kappa: float, n: int) -> RateBound:
    """Constant-stepsize denominator for any sign of kappa."""
    if kappa > 0:
        return denom_strongly_convex(gl, kappa, n)
    if kappa == 0:
        return denom_convex(gl, n)
    return denom_nonconvex_const(gl, kappa, n)


def denom_variable(schedule: Sequence[float], kappa: float) -> RateBound:
    if kappa > 0:
        raise DomainError(f'kappa must be <= 0, got {kappa}')
    if not schedule:
        raise DomainError('schedule must not be empty')
    limit = gamma_bar(1, kappa) * (1.0 + _SLACK)
    total = 0.0
    for i, gl in enumerate(schedule):
        if not 0 < gl <= limit:
            raise DomainError(
                f'schedule[{i}] = {gl} outside (0, gamma_bar_1 = {limit}]',
            )
        total += gl * p_coeff(gl, kappa * gl)
    return RateBound(denominator=1.0 + total, regime=_ONE_STEP)


def _dynamic_gain(s: float, kappa: float) -> float:
    return s / (2.0 - s * (1.0 + kappa))


def denom_dynamic_strongly_convex(kappa: float, n: int) -> RateBound:
    if not 0 <= kappa < 1:
        raise DomainError(f'kappa must be in [0, 1), got {kappa}')
    _check_n(n)
    s_last = dynamic_sequence(kappa, n).entries[-1]
    return RateBound(
        denominator=1.0 + _dynamic_gain(s_last, kappa),
        regime=_DYNAMIC,
    )


def denom_dynamic_nonconvex(kappa: float, n: int) -> RateBound:
    """Rate of the schedule min{s_i(kappa), gamma_*(kappa)}.

    The first steps that stay below gamma_* telescope into
    s/(2 - s(1+kappa)) at the last of them; every later step at gamma_*
    contributes gamma_* p(gamma_*, kappa gamma_*).
    """
    if not kappa < 0:
        raise DomainError(f'kappa must be < 0, got {kappa}')
    _check_n(n)
    gamma_star = opt_const_nonconvex_asymptotic(kappa)
    entries = truncated_schedule(kappa, n).entries
    below = crossing_index(kappa, n)
    head = _dynamic_gain(entries[below - 1], kappa) if below else 0.0
    tail = (n - below) * gamma_star * p_coeff(
        gamma_star, kappa * gamma_star
    )
    return RateBound(denominator=1.0 + head + tail, regime=_DYNAMIC)


def denom_conjectured_equivalent(
    schedule: Sequence[float],
    kappa: float,
) -> float:
    if not schedule:
        raise DomainError('schedule must not be empty')
    return 1.0 + sum(step_gain(gl, kappa) for gl in schedule)


def denom_dynamic(kappa: float, n: int) -> RateBound:
    if kappa < 0:
        return denom_dynamic_nonconvex(kappa, n)
    return denom_dynamic_strongly_convex(kappa, n)


def dynamic_schedule_for(kappa: float, n: int) -> tuple[float, ...]:
    if kappa < 0:
        return truncated_schedule(kappa, n).entries
    return dynamic_sequence(kappa, n).entries


def denom_classical_nesterov(schedule: Sequence[float]) -> float:
    total = 0.0
    for i, gl in enumerate(schedule):
        if not 0 < gl < 2:
            raise DomainError(f'schedule[{i}] = {gl} outside (0, 2)')
        total += gl * (2.0 - gl)
    return 1.0 + total


def denom_aps(schedule: Sequence[float]) -> float:
    total = 0.0
    for i, gl in enumerate(schedule):
        if not 0 < gl <= SQRT3 * (1.0 + _SLACK):
            raise DomainError(f'schedule[{i}] = {gl} outside (0, sqrt(3)]')
        total += gl * (2.0 - 0.5 * gl * max(1.0, gl))
    return 1.0 + total
