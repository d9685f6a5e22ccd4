import numpy as np
import pytest

from gdrates.curvature import CurvatureClass, gamma_bar_inf
from gdrates.engine import (
    Oracle,
    Performance,
    Trajectory,
    performance,
    random_quadratic,
    random_smooth,
    replay,
    report_instance,
    run_gd,
    simulate,
    tightness_report,
)
from gdrates.errors import DomainError
from gdrates.interpolation import Triplet, TripletSet, Vector
from gdrates.rates import (
    RateBound,
    Regime,
    RegimeKind,
    denom_constant,
    denom_dynamic,
    denom_variable,
    dynamic_schedule_for,
)
from gdrates.schedules import StepsizeSchedule
from gdrates.thresholds import gamma_bar_one
from gdrates.worstcase import WorstCaseInstance, wc_nonconvex_mid

UNIT = CurvatureClass.of(0.0)


def _half_square(x: Vector) -> tuple[float, Vector]:
    return 0.5 * float(x @ x), x.copy()


def test_run_gd_on_half_square() -> None:
    trajectory = run_gd(
        _half_square,
        [1.0, -2.0],
        StepsizeSchedule.constant(0.5, 3),
        UNIT,
    )
    points = trajectory.triplets.points
    assert np.allclose(points[:, 0], [1.0, 0.5, 0.25, 0.125])
    assert np.allclose(points[:, 1], [-2.0, -1.0, -0.5, -0.25])
    assert trajectory.triplets.values[-1] == pytest.approx(
        0.5 * (0.125**2 + 0.25**2),
    )


def test_run_gd_scales_by_l_upper() -> None:
    cls = CurvatureClass.of(0.0, 4.0)
    trajectory = run_gd(
        lambda x: (2.0 * float(x @ x), 4.0 * x),
        [1.0],
        StepsizeSchedule.custom([1.0, 0.5]),
        cls,
    )
    assert np.allclose(trajectory.triplets.points[:, 0], [1.0, 0.0, 0.0])


def test_trajectory_checks_length() -> None:
    triplets = TripletSet.of([Triplet.of([0.0], [0.0], 0.0)] * 2)
    with pytest.raises(DomainError):
        Trajectory(
            triplets=triplets,
            schedule=StepsizeSchedule.constant(1.0, 2),
            cls=UNIT,
        )


def test_replay_accepts_gradient_steps() -> None:
    schedule = StepsizeSchedule.constant(0.5, 3)
    trajectory = run_gd(_half_square, [1.0], schedule, UNIT)
    replayed = replay(trajectory.triplets, schedule, UNIT)
    assert replayed.triplets is trajectory.triplets


def test_replay_rejects_a_moved_point() -> None:
    schedule = StepsizeSchedule.constant(0.5, 2)
    trajectory = run_gd(_half_square, [1.0], schedule, UNIT)
    items = list(trajectory.triplets)
    moved = items[1]
    items[1] = Triplet(x=moved.x + 1e-6, g=moved.g, f=moved.f)
    with pytest.raises(DomainError):
        replay(TripletSet.of(items), schedule, UNIT)


def test_performance() -> None:
    trajectory = run_gd(
        _half_square,
        [2.0],
        StepsizeSchedule.constant(0.5, 2),
        UNIT,
    )
    perf = performance(trajectory, 0.0)
    assert perf.index == 2
    assert perf.metric == pytest.approx(0.5**2 / 2.0)
    assert perf.gap == pytest.approx(2.0)
    with pytest.raises(DomainError):
        performance(trajectory, 5.0)


def test_ratio_to_bound() -> None:
    perf = Performance(metric=0.25, index=0, f_star=0.0, gap=2.0)
    bound = RateBound(denominator=8.0, regime=Regime(kind=RegimeKind.DYNAMIC))
    assert perf.ratio_to_bound(bound) == 1.0


@pytest.mark.parametrize(
    'mu, gl, n, regime',
    [
        (0.1, 0.5, 4, 'linear_mu'),
        (0.0, 1.0, 3, 'sublinear'),
        (0.0, 1.9, 3, 'linear_L'),
        (-0.5, 0.7, 4, 'sublinear_0'),
        (-0.5, 1.5, 7, 'sublinear_0'),
        (-0.5, 1.83, 3, 'sublinear_2'),
        (-0.5, 1.95, 4, 'linear_L'),
    ],
)
def test_worst_cases_are_tight(
    mu: float,
    gl: float,
    n: int,
    regime: str,
) -> None:
    report = tightness_report(CurvatureClass.of(mu), gl, n)
    assert str(report.regime) == regime
    assert report.ratio == pytest.approx(1.0, abs=1e-9)
    assert report.interpolable
    assert report.passed()
    assert not report.conjectured


KAPPAS = [0.5, 0.1, 0.0, -0.1, -0.5, -1.0, -4.0]


@pytest.mark.parametrize('kappa', KAPPAS)
@pytest.mark.parametrize('gl', [0.3, 0.9, 1.0, 1.2, 1.5, 1.8, 1.95])
@pytest.mark.parametrize('n', [1, 2, 3, 4, 5, 6])
def test_proven_worst_cases_over_a_grid(
    kappa: float,
    gl: float,
    n: int,
) -> None:
    cls = CurvatureClass.from_kappa(kappa)
    if gl >= gamma_bar_inf(kappa):
        pytest.skip('outside the stepsize range')
    report = tightness_report(cls, gl, n, gap=0.5)
    if report.conjectured:
        pytest.skip('conjectured construction')
    assert report.interpolable, report
    assert report.passed(), report


def test_report_is_gap_invariant() -> None:
    cls = CurvatureClass.of(-0.5)
    small = tightness_report(cls, 1.2, 4, gap=1e-3)
    large = tightness_report(cls, 1.2, 4, gap=1e3)
    assert small.ratio == pytest.approx(large.ratio, abs=1e-9)
    assert large.bound == pytest.approx(1e6 * small.bound)


def test_report_flags_a_broken_instance() -> None:
    cls = CurvatureClass.of(-0.5)
    instance = wc_nonconvex_mid(cls, 1.2, 4)
    assert isinstance(instance.payload, TripletSet)
    items = list(instance.payload)
    last = items[-1]
    items[-1] = Triplet(x=last.x, g=last.g, f=last.f + 1.0)
    broken = WorstCaseInstance(
        payload=TripletSet.of(items),
        x0=instance.x0,
        cls=instance.cls,
        schedule=instance.schedule,
        expected=instance.expected,
        gap=instance.gap,
    )
    report = report_instance(broken)
    assert not report.interpolable
    assert not report.passed()
    assert report.worst is not None


def test_simulate_triplets_replays() -> None:
    cls = CurvatureClass.of(-0.5)
    instance = wc_nonconvex_mid(cls, 1.2, 3)
    assert simulate(instance).triplets is instance.payload


FUZZ_RUNS = 180


def _quadratic_minimum(oracle: Oracle, dimension: int) -> float:
    _, linear = oracle(np.zeros(dimension))
    hessian = np.stack([oracle(e)[1] - linear for e in np.eye(dimension)])
    return oracle(np.linalg.solve(hessian, -linear))[0]


def _random_schedule(
    kappa: float,
    kind: str,
    rng: np.random.Generator,
) -> tuple[StepsizeSchedule, RateBound]:
    n = int(rng.integers(1, 9))
    match kind:
        case 'constant':
            gl = float(rng.uniform(0.05, 0.98 * gamma_bar_inf(kappa)))
            return (
                StepsizeSchedule.constant(gl, n),
                denom_constant(gl, kappa, n),
            )
        case 'dynamic':
            return (
                StepsizeSchedule.custom(dynamic_schedule_for(kappa, n)),
                denom_dynamic(kappa, n),
            )
        case _:
            entries = rng.uniform(0.05, gamma_bar_one(kappa), size=n)
            return (
                StepsizeSchedule.custom(entries.tolist()),
                denom_variable(entries.tolist(), kappa),
            )


@pytest.mark.parametrize('mu', [0.5, 0.1, 0.0, -0.5, -1.0, -4.0])
def test_bounds_hold_on_random_functions(
    mu: float,
    rng: np.random.Generator,
) -> None:
    cls = CurvatureClass.of(mu)
    kinds = ['constant', 'dynamic'] + (['variable'] if mu <= 0 else [])
    for i in range(FUZZ_RUNS):
        kind = kinds[i % len(kinds)]
        schedule, bound = _random_schedule(mu, kind, rng)
        # the rippled family has no closed-form minimum at mu = 0
        smooth = i % 2 == 1 and mu != 0
        make = random_smooth if smooth else random_quadratic
        oracle = make(cls, 3, rng)
        trajectory = run_gd(oracle, rng.standard_normal(3), schedule, cls)
        last = trajectory.triplets[-1]
        if mu < 0:
            bound = bound.to_fn()
            f_star = last.f
        elif smooth:
            f_star = last.f - float(last.g @ last.g) / (2.0 * mu)
        else:
            f_star = _quadratic_minimum(oracle, 3)
        perf = performance(trajectory, f_star)
        assert perf.ratio_to_bound(bound) <= 1.0 + 1e-9, (i, kind, schedule)


def test_random_smooth_curvature(rng: np.random.Generator) -> None:
    cls = CurvatureClass.of(-0.5)
    oracle = random_smooth(cls, 3, rng)
    for _ in range(50):
        x = rng.standard_normal(3)
        d = rng.standard_normal(3)
        fx, gx = oracle(x)
        fy, gy = oracle(x + d)
        curvature = float((gy - gx) @ d) / float(d @ d)
        assert -0.5 - 1e-12 <= curvature <= 1.0 + 1e-12
        # f stays between the mu- and L-models around x
        step = float(gx @ d)
        assert fy >= fx + step - 0.25 * float(d @ d) - 1e-12
        assert fy <= fx + step + 0.5 * float(d @ d) + 1e-12


def test_random_smooth_is_not_quadratic(rng: np.random.Generator) -> None:
    oracle = random_smooth(CurvatureClass.of(-0.5), 2, rng)
    _, g0 = oracle(np.zeros(2))
    _, g1 = oracle(np.array([1.0, 0.0]))
    _, g2 = oracle(np.array([2.0, 0.0]))
    assert not np.allclose(g2 - g1, g1 - g0)


def test_random_quadratic_spectrum(rng: np.random.Generator) -> None:
    cls = CurvatureClass.of(-0.5)
    oracle = random_quadratic(cls, 4, rng)
    _, g0 = oracle(np.zeros(4))
    basis = np.eye(4)
    hessian = np.stack([oracle(e)[1] - g0 for e in basis])
    assert np.allclose(hessian, hessian.T)
    eigenvalues = np.linalg.eigvalsh(hessian)
    assert eigenvalues.min() >= -0.5 - 1e-12
    assert eigenvalues.max() <= 1.0 + 1e-12
