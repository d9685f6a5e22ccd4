"""Descent inequalities along constant-stepsize gradient descent traces.

Each lemma is a nonnegative combination of interpolation inequalities, so on
any trajectory of a function in the class its residual (left-hand side minus
right-hand side) is nonnegative inside the stepsize range it is stated for.
"""

from collections.abc import Callable
from enum import Enum, unique
from itertools import pairwise
from typing import Final, final

from gdrates.curvature import CurvatureClass, e_k, gamma_bar_inf, t_k
from gdrates.errors import PreconditionError
from gdrates.interpolation import Triplet, TripletSet
from gdrates.thresholds import n_bar


@final
@unique
class Lemma(Enum):
    N2SD = 'N2SD'
    N4SD = 'N4SD'
    TWO_SD = '2SD'
    FOUR_SD = '4SD'
    GN4SD = 'GN4SD'
    G4SD = 'G4SD'
    D2 = 'D2'
    SC_L = 'SC_L'
    SC_MU = 'SC_mu'


def _sq(item: Triplet) -> float:
    return float(item.g @ item.g)


def _require(condition: bool, lemma: Lemma, message: str) -> None:
    if not condition:
        raise PreconditionError(f'{lemma.value} needs {message}')


def _n2sd(traj: TripletSet, cls: CurvatureClass, gl: float) -> list[float]:
    _require(0 < gl <= 1, Lemma.N2SD, f'gl in (0, 1], got {gl}')
    _require(cls.mu <= 0, Lemma.N2SD, f'mu <= 0, got {cls.mu}')
    gm = cls.kappa * gl
    width = cls.l_upper - cls.mu
    head = (gl * gm - 2.0 * gm + gl) / width
    tail = gl / width
    return [
        a.f - b.f - head * _sq(a) / 2.0 - tail * _sq(b) / 2.0
        for a, b in pairwise(traj.items)
    ]


def _n4sd(traj: TripletSet, cls: CurvatureClass, gl: float) -> list[float]:
    upper = gamma_bar_inf(cls.kappa)
    _require(1 <= gl < upper, Lemma.N4SD, f'gl in [1, {upper}), got {gl}')
    _require(cls.mu <= 0, Lemma.N4SD, f'mu <= 0, got {cls.mu}')
    l, u = gl, cls.kappa * gl
    gamma = gl / cls.l_upper
    head = gamma * ((2.0 - l) * (2.0 - u) - 1.0) / (2.0 - l - u)
    tail = gamma / (2.0 - l - u)
    return [
        a.f - b.f - head * _sq(a) / 2.0 - tail * _sq(b) / 2.0
        for a, b in pairwise(traj.items)
    ]


def _two_sd(traj: TripletSet, cls: CurvatureClass, gl: float) -> list[float]:
    _require(0 < gl <= 1, Lemma.TWO_SD, f'gl in (0, 1], got {gl}')
    _require(cls.mu >= 0, Lemma.TWO_SD, f'mu >= 0, got {cls.mu}')
    gamma = gl / cls.l_upper
    return [
        a.f - b.f - gamma * (_sq(a) + _sq(b)) / 2.0
        for a, b in pairwise(traj.items)
    ]


def _four_sd(traj: TripletSet, cls: CurvatureClass, gl: float) -> list[float]:
    _require(1 <= gl < 2, Lemma.FOUR_SD, f'gl in [1, 2), got {gl}')
    _require(cls.mu >= 0, Lemma.FOUR_SD, f'mu >= 0, got {cls.mu}')
    gamma = gl / cls.l_upper
    head = gamma * (3.0 - 2.0 * gl) / (2.0 - gl)
    tail = gamma / (2.0 - gl)
    return [
        a.f - b.f - head * _sq(a) / 2.0 - tail * _sq(b) / 2.0
        for a, b in pairwise(traj.items)
    ]


def _long_step_range(
    lemma: Lemma,
    traj: TripletSet,
    cls: CurvatureClass,
    gl: float,
) -> int:
    upper = gamma_bar_inf(cls.kappa)
    _require(1 < gl < upper, lemma, f'gl in (1, {upper}), got {gl}')
    _require(len(traj) >= 2, lemma, 'at least two iterates')
    return n_bar(gl, cls.kappa, len(traj) - 1)


def _gn4sd(traj: TripletSet, cls: CurvatureClass, gl: float) -> list[float]:
    k_max = min(
        _long_step_range(Lemma.GN4SD, traj, cls, gl),
        len(traj) - 2,
    )
    rho = 1.0 - gl
    eta = 1.0 - cls.kappa * gl
    gamma = gl / cls.l_upper
    spread = eta * eta - rho * rho
    residuals = []
    for k in range(k_max + 1):
        head = -(eta * rho) ** 2 * t_k(gl, cls.kappa, k + 1) / spread
        tail = (t_k(gl, cls.kappa, k) + eta - rho) / spread
        lhs = (traj[0].f - traj[k + 1].f) / gamma
        rhs = head * _sq(traj[k]) / 2.0 + tail * _sq(traj[k + 1]) / 2.0
        residuals.append(lhs - rhs)
    return residuals


def _d2(traj: TripletSet, cls: CurvatureClass, gl: float) -> list[float]:
    k_max = min(_long_step_range(Lemma.D2, traj, cls, gl), len(traj) - 2)
    _require(k_max >= 1, Lemma.D2, f'gl >= gamma_bar_1, got {gl}')
    rho = 1.0 - gl
    eta = 1.0 - cls.kappa * gl
    gamma = gl / cls.l_upper
    residuals = []
    for k in range(1, k_max + 1):
        t = t_k(gl, cls.kappa, k)
        a, b = traj[k], traj[k + 1]
        weight = t / (2.0 * (eta - rho))
        lhs = (traj[0].f - a.f) / gamma + (eta + rho) * weight * (
            a.f - b.f
        ) / gamma
        rhs = (e_k(eta, k) + e_k(rho, k)) * _sq(a) / 4.0 + weight * (
            eta * rho * _sq(a) / 2.0 + float(a.g @ b.g) + _sq(b) / 2.0
        )
        residuals.append(lhs - rhs)
    return residuals


def _g4sd(traj: TripletSet, cls: CurvatureClass, gl: float) -> list[float]:
    _require(1 <= gl < 2, Lemma.G4SD, f'gl in [1, 2), got {gl}')
    _require(cls.mu >= 0, Lemma.G4SD, f'mu >= 0, got {cls.mu}')
    _require(len(traj) >= 2, Lemma.G4SD, 'at least two iterates')
    k_max = min(n_bar(gl, 0.0, len(traj) - 1), len(traj) - 2)
    rho = 1.0 - gl
    scale = 2.0 * cls.l_upper
    residuals = []
    for k in range(k_max + 1):
        powers = sum(rho ** (-2 * i) for i in range(k + 1))
        head = -2.0 * (k + 1) * rho * rho / (2.0 - gl) + powers
        tail = 2.0 * (k + 1) / (2.0 - gl) - powers
        lhs = traj[0].f - traj[k + 1].f
        rhs = (head * _sq(traj[k]) + tail * _sq(traj[k + 1])) / scale
        residuals.append(lhs - rhs)
    return residuals


def _e_or_zero(x: float, k: int) -> float:
    return 0.0 if k == 0 else e_k(x, k)


def _sc_l(traj: TripletSet, cls: CurvatureClass, gl: float) -> list[float]:
    _require(1 < gl < 2, Lemma.SC_L, f'gl in (1, 2), got {gl}')
    rho = 1.0 - gl
    eta = 1.0 - cls.kappa * gl
    gamma = gl / cls.l_upper
    residuals = []
    for i, (a, b) in enumerate(pairwise(traj.items)):
        e_next = e_k(rho, i + 1)
        mixed = b.g - rho * a.g
        rhs = (
            -_e_or_zero(rho, i) * _sq(a) / 2.0
            + e_next * _sq(b) / 2.0
            + (1.0 - (eta + rho) * e_next)
            / (eta - rho)
            * float(mixed @ mixed)
            / 2.0
        )
        residuals.append((a.f - b.f) / gamma - rhs)
    return residuals


def _sc_mu(traj: TripletSet, cls: CurvatureClass, gl: float) -> list[float]:
    upper = gamma_bar_inf(cls.kappa)
    _require(0 < gl < upper, Lemma.SC_MU, f'gl in (0, {upper}), got {gl}')
    rho = 1.0 - gl
    eta = 1.0 - cls.kappa * gl
    gamma = gl / cls.l_upper
    residuals = []
    for i, (a, b) in enumerate(pairwise(traj.items)):
        e_next = e_k(eta, i + 1)
        mixed = b.g - eta * a.g
        rhs = (
            -_e_or_zero(eta, i) * _sq(a) / 2.0
            + e_next * _sq(b) / 2.0
            + (-1.0 + (eta + rho) * e_next)
            / (eta - rho)
            * float(mixed @ mixed)
            / 2.0
        )
        residuals.append((a.f - b.f) / gamma - rhs)
    return residuals


type _Check = Callable[[TripletSet, CurvatureClass, float], list[float]]

_CHECKS: Final[dict[Lemma, _Check]] = {
    Lemma.N2SD: _n2sd,
    Lemma.N4SD: _n4sd,
    Lemma.TWO_SD: _two_sd,
    Lemma.FOUR_SD: _four_sd,
    Lemma.GN4SD: _gn4sd,
    Lemma.G4SD: _g4sd,
    Lemma.D2: _d2,
    Lemma.SC_L: _sc_l,
    Lemma.SC_MU: _sc_mu,
}


def descent_lemma_residuals(
    trajectory: TripletSet,
    cls: CurvatureClass,
    gl: float,
    which: Lemma,
) -> list[float]:
    if len(trajectory) < 2:
        raise PreconditionError('a trajectory needs at least two iterates')
    return _CHECKS[which](trajectory, cls, gl)
