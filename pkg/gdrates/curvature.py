"""Function class F_{mu,L} and the scalar primitives every rate is built from.

All stepsizes are normalized: ``gl`` is gamma*L and ``gm`` is gamma*mu. The
helpers below follow the naming

- ``e_k(x, k)``: sum_{j=1}^{2k} x^{-j}
- ``t_k(gl, kappa, k)``: E_k(1 - kappa*gl) - E_k(1 - gl)
- ``p_coeff(l, u)``: per-step coefficient of the sublinear rates
"""

from dataclasses import dataclass
import math
from typing import Final, Self, final

import numpy as np

from gdrates.errors import DomainError

MAX_EXPONENT: Final = 10**6

_NEAR_ONE: Final = 1e-8


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class CurvatureClass:
    mu: Final[float]
    l_upper: Final[float]
    kappa: Final[float]

    def __post_init__(self) -> None:
        if not self.l_upper > 0:
            raise DomainError(
                f'upper curvature must be > 0, got {self.l_upper}',
            )
        if not self.mu < self.l_upper:
            raise DomainError(
                f'lower curvature must be < {self.l_upper}, got {self.mu}',
            )
        expected = self.mu / self.l_upper
        if abs(self.kappa - expected) > 1e-12 * max(1.0, abs(expected)):
            raise DomainError(
                f'kappa {self.kappa} inconsistent with mu/L = {expected}',
            )

    @classmethod
    def of(cls, mu: float, l_upper: float = 1.0) -> Self:
        if not l_upper > 0:
            raise DomainError(f'upper curvature must be > 0, got {l_upper}')
        return cls(mu=mu, l_upper=l_upper, kappa=mu / l_upper)

    @classmethod
    def from_kappa(cls, kappa: float, l_upper: float = 1.0) -> Self:
        return cls(mu=kappa * l_upper, l_upper=l_upper, kappa=kappa)

    @property
    def lipschitz(self) -> float:
        return max(-self.mu, self.l_upper)

    def step(self, gl: float) -> 'NormalizedStep':
        return NormalizedStep.of(gl, self.kappa)


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class NormalizedStep:
    gl: Final[float]
    gm: Final[float]
    rho: Final[float]
    eta: Final[float]

    @classmethod
    def of(cls, gl: float, kappa: float) -> Self:
        gm = kappa * gl
        return cls(gl=gl, gm=gm, rho=1.0 - gl, eta=1.0 - gm)


def gamma_bar_inf(kappa: float) -> float:
    """Upper end 2/(1+[kappa]_+) of the stepsize range covered by the rates."""
    if not kappa < 1:
        raise DomainError(f'kappa must be < 1, got {kappa}')
    return 2.0 / (1.0 + max(kappa, 0.0))


def inv_even_power(x: float, k: int) -> float:
    """x^{-2k}, +inf once it exceeds the float range."""
    if k > MAX_EXPONENT:
        raise DomainError(f'exponent index {k} exceeds {MAX_EXPONENT}')
    if x == 0:
        raise DomainError('x^{-2k} is undefined at x = 0')
    try:
        return (1.0 / (x * x)) ** k
    except OverflowError:
        return math.inf


def e_k(x: float, k: int) -> float:
    if k < 1:
        raise DomainError(f'E_k needs k >= 1, got {k}')
    if x == 0:
        raise DomainError('E_k is undefined at x = 0')
    if abs(1.0 - x) <= _NEAR_ONE:
        if x == 1.0:
            return 2.0 * k
        return float(np.sum(np.power(x, -np.arange(1, 2 * k + 1))))
    return (-1.0 + inv_even_power(x, k)) / (1.0 - x)


def t_k(gl: float, kappa: float, k: int) -> float:
    if k < 0:
        raise DomainError(f'T_k needs k >= 0, got {k}')
    if k == 0:
        return 0.0
    _check_t_domain(gl, kappa)
    return e_k(1.0 - kappa * gl, k) - e_k(1.0 - gl, k)


def t_k_scaled(gl: float, kappa: float, k: int) -> float:
    """T_k times a positive factor that keeps it finite for large k.

    Same sign and same roots in gl as ``t_k``.
    """
    if k == 0:
        return 0.0
    _check_t_domain(gl, kappa)
    eta = 1.0 - kappa * gl
    rho = 1.0 - gl
    log_eta = -2.0 * k * math.log(abs(eta))
    log_rho = -2.0 * k * math.log(abs(rho))
    shift = max(log_eta, log_rho, 0.0)
    return _e_k_shifted(eta, k, log_eta, shift) - _e_k_shifted(
        rho, k, log_rho, shift
    )


def _e_k_shifted(x: float, k: int, log_power: float, shift: float) -> float:
    if abs(1.0 - x) <= _NEAR_ONE:
        return e_k(x, k) * math.exp(-shift)
    return (math.exp(log_power - shift) - math.exp(-shift)) / (1.0 - x)


def _check_t_domain(gl: float, kappa: float) -> None:
    if not 0 < gl < gamma_bar_inf(kappa):
        raise DomainError(
            f'T_k needs gl in (0, {gamma_bar_inf(kappa)}), got {gl}',
        )
    if gl == 1.0:
        raise DomainError('T_k is undefined at gl = 1')


def even_power_sum(x: float, k: int) -> float:
    """sum_{j=1}^{k} (1-x)^{-2j}, zero for k = 0."""
    if k == 0:
        return 0.0
    y = (1.0 - x) ** 2
    if abs(1.0 - y) <= _NEAR_ONE:
        return float(np.sum(np.power(y, -np.arange(1, k + 1))))
    return (-1.0 + inv_even_power(1.0 - x, k)) / (1.0 - y)


def t_sum(gl: float, kappa: float, k: int) -> float:
    """Closed form of sum_{i=0}^{k} T_i(gl, kappa) for kappa != 0."""
    l = gl
    u = kappa * gl
    if u == 0:
        raise DomainError('closed-form T sum needs kappa != 0')
    return (
        even_power_sum(u, k) / u
        - even_power_sum(l, k) / l
        + (1.0 / l - 1.0 / u) * k
    )


def t_sum_direct(gl: float, kappa: float, k: int) -> float:
    l = gl
    u = kappa * gl
    return sum(
        (-1.0 + inv_even_power(1.0 - u, i)) / u
        - (-1.0 + inv_even_power(1.0 - l, i)) / l
        for i in range(k + 1)
    )


def p_coeff(l: float, u: float) -> float:
    if not 0 < l < 2:
        raise DomainError(f'p needs l in (0, 2), got {l}')
    if not u < l:
        raise DomainError(f'p needs u < l, got u={u}, l={l}')
    denominator = 1.0 - u - abs(1.0 - l)
    if not denominator > 0:
        raise DomainError(
            f'p is undefined beyond the stepsize range (2-l-u = {denominator})',
        )
    return 2.0 + l * u / denominator


def step_gain(gl: float, kappa: float) -> float:
    """Per-step gain gl(2-gl)(2-kappa gl)/(2-gl(1+kappa)) of long steps."""
    denominator = 2.0 - gl * (1.0 + kappa)
    if not denominator > 0:
        raise DomainError(f'step gain undefined at gl={gl}, kappa={kappa}')
    return gl * (2.0 - gl) * (2.0 - kappa * gl) / denominator
