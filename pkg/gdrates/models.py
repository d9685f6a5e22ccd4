from pathlib import Path
from typing import Annotated, Literal, final

from pydantic import BaseModel, ConfigDict, Field
import yaml

from gdrates.rates import NumeratorKind
from gdrates.schedules import ScheduleKind


@final
class TripletModel(BaseModel):
    model_config = ConfigDict(extra='forbid')

    index: int
    x: list[float]
    g: list[float]
    f: float


@final
class HuberModel(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['huber'] = 'huber'
    tau: float
    mu: float
    l_upper: float


@final
class PieceModel(BaseModel):
    model_config = ConfigDict(extra='forbid')

    curvature: float
    slope_at_ref: float
    value_at_ref: float
    ref: float


@final
class PiecewiseModel(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['piecewise'] = 'piecewise'
    breakpoints: list[float]
    segments: list[PieceModel]


@final
class QuadraticModel(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['quadratic'] = 'quadratic'
    curvatures: list[float]
    linear: list[float]


@final
class TripletsModel(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['triplets'] = 'triplets'
    triplets: list[TripletModel]


PayloadModel = Annotated[
    HuberModel | PiecewiseModel | QuadraticModel | TripletsModel,
    Field(discriminator='kind'),
]


@final
class RateModel(BaseModel):
    model_config = ConfigDict(extra='forbid')

    denominator: float
    regime: str
    numerator_kind: NumeratorKind = NumeratorKind.GAP_TO_FSTAR


@final
class ScheduleModel(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: ScheduleKind
    entries: list[float]


@final
class InstanceModel(BaseModel):
    model_config = ConfigDict(extra='forbid')

    mu: float
    l_upper: float
    gap: float
    conjectured: bool = False
    schedule: ScheduleModel
    expected: RateModel
    x0: list[float]
    payload: PayloadModel


@final
class SweepModel(BaseModel):
    """Grid of tightness checks read from a YAML file."""

    model_config = ConfigDict(extra='forbid')

    kappas: list[Annotated[float, Field(lt=1)]]
    gls: list[Annotated[float, Field(gt=0, lt=2)]]
    ns: list[Annotated[int, Field(ge=1)]]
    gap: Annotated[float, Field(gt=0)] = 1.0
    l_upper: Annotated[float, Field(gt=0)] = 1.0
    include_conjectured: bool = False
    tol: Annotated[float, Field(gt=0)] = 1e-8


def load_sweep(path: Path) -> SweepModel:
    with open(path) as sweep_file:
        return SweepModel(**yaml.safe_load(sweep_file))
