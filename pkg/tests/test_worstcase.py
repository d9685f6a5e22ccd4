import math

import numpy as np
import pytest

from gdrates.curvature import CurvatureClass
from gdrates.engine import report_instance, simulate
from gdrates.errors import DomainError
from gdrates.interpolation import TripletSet, is_interpolable
from gdrates.rates import RegimeKind
from gdrates.thresholds import gamma_bar
from gdrates.worstcase import (
    HuberQuadratic,
    Piecewise1D,
    Quadratic,
    QuadraticPiece,
    check_nec_conds_3d,
    eval_value_and_grad,
    mid_cosine,
    rotation_parameter,
    select_worst_case,
    wc_conjectured_3d,
    wc_convex,
    wc_linear_regime,
    wc_nonconvex_mid,
    wc_nonconvex_mid_variable,
    wc_nonconvex_short,
    wc_quadratic_2d,
    wc_strongly_convex,
)


def _norms(triplets: TripletSet) -> np.ndarray:
    return np.sqrt(np.sum(triplets.gradients**2, axis=1))


def test_huber_rejects() -> None:
    with pytest.raises(DomainError):
        HuberQuadratic(tau=0.0, mu=0.0, l_upper=1.0)
    with pytest.raises(DomainError):
        HuberQuadratic(tau=1.0, mu=-0.5, l_upper=1.0)


@pytest.mark.parametrize('mu', [0.0, 0.25])
def test_huber_is_c1_at_the_kink(mu: float) -> None:
    payload = HuberQuadratic(tau=0.5, mu=mu, l_upper=2.0)
    for side in (1.0, -1.0):
        inside, g_inside = eval_value_and_grad(payload, side * 0.5)
        outside, g_outside = eval_value_and_grad(payload, side * (0.5 + 1e-9))
        assert inside == pytest.approx(outside, abs=1e-8)
        assert np.allclose(g_inside, g_outside, atol=1e-8)
    value, grad = eval_value_and_grad(payload, 2.0)
    assert grad[0] == pytest.approx(mu * 2.0 + (2.0 - mu) * 0.5)
    assert value > 0


def test_quadratic_eval() -> None:
    payload = Quadratic(curvatures=(1.0, -0.5), linear=(1.0, 0.0))
    value, grad = eval_value_and_grad(payload, [2.0, 2.0])
    assert value == pytest.approx(0.5 * (4.0 - 2.0) + 2.0)
    assert np.allclose(grad, [3.0, -1.0])
    with pytest.raises(DomainError):
        eval_value_and_grad(payload, [1.0])
    with pytest.raises(DomainError):
        Quadratic(curvatures=(1.0,), linear=(0.0, 0.0))


def test_piecewise_rejects_mismatched_segments() -> None:
    piece = QuadraticPiece(
        curvature=1.0,
        slope_at_ref=0.0,
        value_at_ref=0.0,
        ref=0.0,
    )
    with pytest.raises(DomainError):
        Piecewise1D(breakpoints=(0.0,), segments=(piece,))
    with pytest.raises(DomainError):
        Piecewise1D(breakpoints=(1.0, 0.0), segments=(piece,) * 3)


@pytest.mark.parametrize('gl', [0.5, 1.5])
def test_convex_instance(gl: float) -> None:
    instance = wc_convex(1.0, gl, 3, gap=2.0)
    expected = 'huber' if gl < gamma_bar(3, 0.0) else 'quadratic'
    assert instance.kind == expected
    assert instance.gap == 2.0
    assert instance.schedule.entries == (gl,) * 3


def test_strongly_convex_instance() -> None:
    cls = CurvatureClass.of(0.1)
    instance = wc_strongly_convex(cls, 0.5, 4)
    assert instance.kind == 'huber'
    assert instance.regime.kind is RegimeKind.LINEAR_MU


def test_linear_regime_rejects_short_steps() -> None:
    with pytest.raises(DomainError):
        wc_linear_regime(CurvatureClass.of(-0.5), 1.2, 3)


@pytest.mark.parametrize(
    'schedule',
    [[0.5] * 4, [0.3, 0.9, 1.0, 0.6]],
)
def test_short_piecewise_instance(schedule: list[float]) -> None:
    cls = CurvatureClass.of(-0.5)
    instance = wc_nonconvex_short(cls, schedule, gap=1.5)
    payload = instance.payload
    assert isinstance(payload, Piecewise1D)
    value_gap, slope_gap = payload.continuity_gaps()
    assert value_gap < 1e-12
    assert slope_gap < 1e-12
    triplets = simulate(instance).triplets
    norms = _norms(triplets)
    assert np.allclose(norms, norms[-1], rtol=1e-12)
    assert norms[-1] ** 2 == pytest.approx(
        2.0 * 1.5 / instance.expected.denominator,
    )
    assert is_interpolable(triplets, cls).interpolable


def test_short_instance_rejects() -> None:
    cls = CurvatureClass.of(-0.5)
    with pytest.raises(DomainError):
        wc_nonconvex_short(cls, [])
    with pytest.raises(DomainError):
        wc_nonconvex_short(cls, [1.2])
    with pytest.raises(DomainError):
        wc_nonconvex_short(CurvatureClass.of(0.0), [0.5])


@pytest.mark.parametrize('gl, kappa', [(1.0, -0.5), (1.3, -0.5), (1.1, -2.0)])
def test_mid_cosine_is_a_cosine(gl: float, kappa: float) -> None:
    assert -1.0 <= mid_cosine(gl, kappa) <= 1.0


def test_mid_instance_pattern() -> None:
    cls = CurvatureClass.of(-0.5)
    gl, n = 1.3, 5
    instance = wc_nonconvex_mid(cls, gl, n)
    assert isinstance(instance.payload, TripletSet)
    assert not instance.conjectured
    g = instance.payload.gradients
    norms = _norms(instance.payload)
    assert np.allclose(norms, norms[0], rtol=1e-12)
    for i in range(n):
        cosine = g[i] @ g[i + 1] / (norms[i] * norms[i + 1])
        assert cosine == pytest.approx(mid_cosine(gl, cls.kappa))
    values = instance.payload.values
    assert values[0] - values[-1] == pytest.approx(
        (instance.expected.denominator - 1.0) / instance.expected.denominator,
    )


def test_mid_instance_rejects_long_steps() -> None:
    with pytest.raises(DomainError):
        wc_nonconvex_mid(CurvatureClass.of(-0.5), 1.8, 4)


def test_mid_variable_instance() -> None:
    cls = CurvatureClass.of(-0.5)
    schedule = [1.0, 1.2, 1.4, 1.1]
    instance = wc_nonconvex_mid_variable(cls, schedule)
    assert instance.conjectured
    assert instance.regime.kind is RegimeKind.ONE_STEP
    triplets = simulate(instance).triplets
    norms = _norms(triplets)
    assert np.allclose(norms, norms[0], rtol=1e-12)


def test_quadratic_2d_instance() -> None:
    cls = CurvatureClass.of(-0.5)
    instance = wc_quadratic_2d(cls, 1.83, 3)
    assert instance.kind == 'quadratic'
    triplets = simulate(instance).triplets
    assert math.sqrt(triplets.gradients[-1] @ triplets.gradients[-1]) == (
        pytest.approx(math.sqrt(2.0 / instance.expected.denominator))
    )
    with pytest.raises(DomainError):
        wc_quadratic_2d(cls, 1.83, 5)


def test_rotation_parameter_alternates() -> None:
    first = rotation_parameter(1.83, -0.5, 3, 2)
    second = rotation_parameter(1.83, -0.5, 4, 2)
    assert first * second < 0
    assert rotation_parameter(1.83, -0.5, 2, 2) == 0.0


def _cell_midpoint(kappa: float, k: int) -> float:
    return 0.5 * (gamma_bar(k, kappa) + gamma_bar(k + 1, kappa))


CELLS_3D = [
    (kappa, n, k)
    for kappa in (-0.5, -1.0)
    for n in (4, 5, 6)
    for k in range(1, n - 1)
]


@pytest.mark.parametrize('kappa, n, k', CELLS_3D)
@pytest.mark.parametrize('position', [0.1, 0.5, 0.9])
def test_conjectured_3d_meets_necessary_conditions(
    kappa: float,
    n: int,
    k: int,
    position: float,
) -> None:
    cls = CurvatureClass.of(kappa)
    low, high = gamma_bar(k, kappa), gamma_bar(k + 1, kappa)
    gl = low + position * (high - low)
    instance = wc_conjectured_3d(cls, gl, n)
    assert instance.conjectured
    assert isinstance(instance.payload, TripletSet)
    report = check_nec_conds_3d(instance.payload, cls, gl, n)
    assert report.argmin_is_last
    assert report.passed(tol=1e-9), report.deviations
    assert is_interpolable(instance.payload, cls).interpolable
    assert report_instance(instance).ratio == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize('kappa, n, k', CELLS_3D)
def test_conjectured_3d_sign_keeps_the_gram_matrix(
    kappa: float,
    n: int,
    k: int,
) -> None:
    cls = CurvatureClass.of(kappa)
    gl = _cell_midpoint(kappa, k)
    upper = wc_conjectured_3d(cls, gl, n)
    lower = wc_conjectured_3d(cls, gl, n, sign=-1)
    assert isinstance(upper.payload, TripletSet)
    assert isinstance(lower.payload, TripletSet)
    g_upper = upper.payload.gradients
    g_lower = lower.payload.gradients
    assert not np.allclose(g_upper, g_lower)
    assert np.allclose(
        g_upper @ g_upper.T,
        g_lower @ g_lower.T,
        rtol=0.0,
        atol=1e-12 * float(np.max(g_upper @ g_upper.T)),
    )
    assert np.array_equal(upper.payload.values, lower.payload.values)
    with pytest.raises(DomainError):
        wc_conjectured_3d(cls, gl, n, sign=0)


def test_conjectured_3d_rejects_outside_its_cells() -> None:
    cls = CurvatureClass.of(-0.5)
    with pytest.raises(DomainError):
        wc_conjectured_3d(cls, 1.2, 5)
    with pytest.raises(DomainError):
        wc_conjectured_3d(cls, _cell_midpoint(-0.5, 2), 3)


def test_necessary_conditions_reject_wrong_length() -> None:
    cls = CurvatureClass.of(-0.5)
    gl = _cell_midpoint(-0.5, 1)
    instance = wc_conjectured_3d(cls, gl, 4)
    assert isinstance(instance.payload, TripletSet)
    with pytest.raises(DomainError):
        check_nec_conds_3d(instance.payload, cls, gl, 5)


@pytest.mark.parametrize(
    'mu, gl, n, kind',
    [
        (0.1, 0.5, 4, 'huber'),
        (0.0, 1.0, 3, 'huber'),
        (0.0, 1.9, 3, 'quadratic'),
        (-0.5, 0.7, 4, 'piecewise'),
        (-0.5, 1.2, 4, 'triplets'),
        (-0.5, 1.83, 3, 'quadratic'),
        (-0.5, 1.83, 5, 'triplets'),
    ],
)
def test_select_worst_case(mu: float, gl: float, n: int, kind: str) -> None:
    instance = select_worst_case(CurvatureClass.of(mu), gl, n)
    assert instance.kind == kind


def test_select_rejects_step_range() -> None:
    with pytest.raises(DomainError):
        select_worst_case(CurvatureClass.of(-0.5), 2.0, 3)
