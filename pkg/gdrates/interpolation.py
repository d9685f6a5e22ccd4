"""Interpolation conditions for F_{mu,L} on sets of (x, g, f) triplets."""

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
import logging
from typing import Final, Self, final

import numpy as np
from numpy.typing import ArrayLike, NDArray

from gdrates.curvature import CurvatureClass
from gdrates.errors import DomainError
from gdrates.util import pairs

logger = logging.getLogger(__name__)

type Vector = NDArray[np.float64]

DEFAULT_TOLERANCE: Final = 1e-8


def as_vector(value: ArrayLike) -> Vector:
    vector = np.atleast_1d(np.asarray(value, dtype=np.float64))
    if vector.ndim != 1:
        raise DomainError(f'expected a vector, got shape {vector.shape}')
    return vector


@final
@dataclass(frozen=True, kw_only=True, slots=True, eq=False)
class Triplet:
    x: Final[Vector]
    g: Final[Vector]
    f: Final[float]

    def __post_init__(self) -> None:
        if self.x.shape != self.g.shape:
            raise DomainError(
                f'point and gradient dimensions differ: {self.x.shape} vs '
                f'{self.g.shape}',
            )
        if self.x.size < 1:
            raise DomainError('triplet dimension must be >= 1')

    @classmethod
    def of(cls, x: ArrayLike, g: ArrayLike, f: float) -> Self:
        return cls(x=as_vector(x), g=as_vector(g), f=float(f))

    @property
    def dimension(self) -> int:
        return self.x.size


@final
@dataclass(frozen=True, kw_only=True, slots=True, eq=False)
class TripletSet:
    items: Final[tuple[Triplet, ...]]

    def __post_init__(self) -> None:
        if not self.items:
            raise DomainError('a triplet set needs at least one triplet')
        dimension = self.items[0].dimension
        for i, item in enumerate(self.items):
            if item.dimension != dimension:
                raise DomainError(
                    f'triplet {i} has dimension {item.dimension}, '
                    f'expected {dimension}',
                )

    @classmethod
    def of(cls, items: Iterable[Triplet]) -> Self:
        return cls(items=tuple(items))

    @classmethod
    def from_arrays(
        cls,
        xs: ArrayLike,
        gs: ArrayLike,
        fs: ArrayLike,
    ) -> Self:
        x_rows = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        g_rows = np.atleast_2d(np.asarray(gs, dtype=np.float64))
        f_values = np.asarray(fs, dtype=np.float64)
        return cls(
            items=tuple(
                Triplet(x=x.copy(), g=g.copy(), f=float(f))
                for x, g, f in zip(x_rows, g_rows, f_values, strict=True)
            ),
        )

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[Triplet]:
        return iter(self.items)

    def __getitem__(self, index: int) -> Triplet:
        return self.items[index]

    @property
    def dimension(self) -> int:
        return self.items[0].dimension

    @property
    def points(self) -> NDArray[np.float64]:
        return np.stack([item.x for item in self.items])

    @property
    def gradients(self) -> NDArray[np.float64]:
        return np.stack([item.g for item in self.items])

    @property
    def values(self) -> NDArray[np.float64]:
        return np.array([item.f for item in self.items])


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class WorstPair:
    i: Final[int]
    j: Final[int]
    residual: Final[float]


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class InterpolationVerdict:
    interpolable: Final[bool]
    worst: Final[WorstPair | None]


@final
@dataclass(frozen=True, kw_only=True, slots=True, eq=False)
class FStar:
    f_star: Final[float]
    x_star: Final[Vector]
    index: Final[int]


def interp_residual(a: Triplet, b: Triplet, cls: CurvatureClass) -> float:
    """Slack of the (a, b) interpolation inequality; >= 0 when it holds."""
    l_upper = cls.l_upper
    mu = cls.mu
    dx = a.x - b.x
    dg = a.g - b.g
    mixed = dg - l_upper * dx
    return float(
        a.f
        - b.f
        - b.g @ dx
        - dg @ dg / (2.0 * l_upper)
        - mu / (2.0 * l_upper * (l_upper - mu)) * (mixed @ mixed),
    )


def residual_scale(a: Triplet, b: Triplet, cls: CurvatureClass) -> float:
    return (
        1.0
        + abs(a.f)
        + abs(b.f)
        + max(float(a.g @ a.g), float(b.g @ b.g)) / cls.l_upper
    )


def is_interpolable(
    triplets: TripletSet,
    cls: CurvatureClass,
    tol: float = DEFAULT_TOLERANCE,
) -> InterpolationVerdict:
    """Check every ordered pair; the worst pair is reported by scaled slack."""
    worst: WorstPair | None = None
    worst_scaled = float('inf')
    items = list(triplets)
    for i, j in pairs(items):
        residual = interp_residual(items[i], items[j], cls)
        scaled = residual / residual_scale(items[i], items[j], cls)
        if scaled < worst_scaled:
            worst_scaled = scaled
            worst = WorstPair(i=i, j=j, residual=residual)
    interpolable = worst is None or worst_scaled >= -tol
    if worst is not None:
        logger.debug(
            'worst interpolation pair (%d, %d): %.3e',
            worst.i,
            worst.j,
            worst.residual,
        )
    return InterpolationVerdict(interpolable=interpolable, worst=worst)


def cocoercivity_residual(
    a: Triplet,
    b: Triplet,
    cls: CurvatureClass,
) -> float:
    """-<dg - L dx, dg - mu dx>, which is (L - mu) times the pair sum."""
    dx = a.x - b.x
    dg = a.g - b.g
    return float(-(dg - cls.l_upper * dx) @ (dg - cls.mu * dx))


def f_star_of(triplets: TripletSet, cls: CurvatureClass) -> FStar:
    candidates = [
        item.f - float(item.g @ item.g) / (2.0 * cls.l_upper)
        for item in triplets
    ]
    index = int(np.argmin(candidates))
    item = triplets[index]
    return FStar(
        f_star=candidates[index],
        x_star=item.x - item.g / cls.l_upper,
        index=index,
    )


def grad_norm_monotonicity_residual(a: Triplet, b: Triplet, gl: float) -> float:
    if not 0 < gl < 2:
        raise DomainError(f'gl must be in (0, 2), got {gl}')
    dg = a.g - b.g
    return float(a.g @ a.g - b.g @ b.g - (2.0 - gl) / gl * (dg @ dg))


def gram(gradients: Sequence[Vector]) -> NDArray[np.float64]:
    matrix = np.asarray(gradients, dtype=np.float64)
    return matrix @ matrix.T
