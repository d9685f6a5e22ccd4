from dataclasses import dataclass
import logging
import math
from typing import Final, final

from scipy.optimize import bisect

from gdrates.curvature import gamma_bar_inf, t_k_scaled
from gdrates.errors import DomainError, SolverError

logger = logging.getLogger(__name__)

BRACKET_MARGIN: Final = 1e-12
MAX_ITERATIONS: Final = 200


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class ThresholdTable:
    kappa: Final[float]
    values: Final[tuple[tuple[int, float], ...]]
    gamma_bar_inf: Final[float]

    def __post_init__(self) -> None:
        previous = 1.0
        for k, value in self.values:
            if not previous < value < self.gamma_bar_inf:
                raise SolverError(
                    f'threshold {k} = {value!r} breaks 1 < ... < '
                    f'{self.gamma_bar_inf}',
                )
            previous = value


def gamma_bar_one(kappa: float) -> float:
    return 3.0 / (1.0 + kappa + math.sqrt(1.0 - kappa + kappa * kappa))


def _snap_to_nonnegative(gl: float, kappa: float, k: int) -> float:
    # The root is reported on the side where T_k >= 0 so that n_bar(gamma_bar)
    # classifies it into its own interval [gamma_bar_k, gamma_bar_{k+1}).
    for _ in range(100_000):
        if t_k_scaled(gl, kappa, k) >= 0:
            return gl
        gl = math.nextafter(gl, math.inf)
    raise SolverError(f'cannot place gamma_bar_{k}({kappa}) on T_k >= 0')


def gamma_bar(k: int, kappa: float, tol: float = 1e-12) -> float:
    if k < 0:
        raise DomainError(f'threshold index must be >= 0, got {k}')
    if not tol > 0:
        raise DomainError(f'tolerance must be > 0, got {tol}')
    upper = gamma_bar_inf(kappa)

    if k == 0:
        return 1.0
    if k == 1:
        return _snap_to_nonnegative(gamma_bar_one(kappa), kappa, 1)

    a = 1.0 + BRACKET_MARGIN
    b = upper - BRACKET_MARGIN
    root, result = bisect(
        t_k_scaled,
        a,
        b,
        args=(kappa, k),
        xtol=tol,
        maxiter=MAX_ITERATIONS,
        full_output=True,
        disp=False,
    )
    if not result.converged:
        raise SolverError(
            f'bisection for gamma_bar_{k}({kappa}) did not converge: '
            f'{result.flag}',
        )
    logger.debug('gamma_bar_%d(%g) = %.15f', k, kappa, root)
    return _snap_to_nonnegative(root, kappa, k)


def n_bar(gl: float, kappa: float, k_max: int) -> int:
    """Largest k <= k_max with T_k(gl, kappa) >= 0; zero for gl <= 1."""
    if k_max < 1:
        raise DomainError(f'k_max must be >= 1, got {k_max}')
    if gl <= 1.0:
        return 0
    if not gl < gamma_bar_inf(kappa):
        raise DomainError(
            f'n_bar needs gl < {gamma_bar_inf(kappa)}, got {gl}',
        )
    k = 0
    while k < k_max and t_k_scaled(gl, kappa, k + 1) >= 0:
        k += 1
    return k


def threshold_table(kappa: float, k_max: int) -> ThresholdTable:
    if k_max < 1:
        raise DomainError(f'k_max must be >= 1, got {k_max}')
    values = tuple((k, gamma_bar(k, kappa)) for k in range(1, k_max + 1))
    return ThresholdTable(
        kappa=kappa,
        values=values,
        gamma_bar_inf=gamma_bar_inf(kappa),
    )
