"""Conversion between worst-case instances and their JSON models."""

from collections.abc import Iterable
import json
from pathlib import Path

import numpy as np
from pydantic import TypeAdapter

from gdrates import models
from gdrates.curvature import CurvatureClass
from gdrates.interpolation import Triplet, TripletSet
from gdrates.rates import RateBound, Regime
from gdrates.schedules import StepsizeSchedule
from gdrates.worstcase import (
    HuberQuadratic,
    Payload,
    Piecewise1D,
    Quadratic,
    QuadraticPiece,
    WorstCaseInstance,
)

_triplet_list = TypeAdapter(list[models.TripletModel])


def create_triplets_from_models(
    records: Iterable[models.TripletModel],
) -> TripletSet:
    ordered = sorted(records, key=lambda record: record.index)
    for expected, record in enumerate(ordered):
        if record.index != expected:
            raise ValueError(
                f'triplet indices must run 0..N, missing {expected}',
            )
    return TripletSet.of(
        Triplet.of(record.x, record.g, record.f) for record in ordered
    )


def create_models_from_triplets(
    triplets: TripletSet,
) -> list[models.TripletModel]:
    return [
        models.TripletModel(
            index=i,
            x=[float(v) for v in item.x],
            g=[float(v) for v in item.g],
            f=item.f,
        )
        for i, item in enumerate(triplets)
    ]


def create_payload_from_model(
    model: models.HuberModel
    | models.PiecewiseModel
    | models.QuadraticModel
    | models.TripletsModel,
) -> Payload:
    match model:
        case models.HuberModel(tau=tau, mu=mu, l_upper=l_upper):
            return HuberQuadratic(tau=tau, mu=mu, l_upper=l_upper)
        case models.PiecewiseModel(breakpoints=breakpoints, segments=segments):
            return Piecewise1D(
                breakpoints=tuple(breakpoints),
                segments=tuple(
                    QuadraticPiece(
                        curvature=s.curvature,
                        slope_at_ref=s.slope_at_ref,
                        value_at_ref=s.value_at_ref,
                        ref=s.ref,
                    )
                    for s in segments
                ),
            )
        case models.QuadraticModel(curvatures=curvatures, linear=linear):
            return Quadratic(curvatures=tuple(curvatures), linear=tuple(linear))
        case models.TripletsModel(triplets=triplets):
            return create_triplets_from_models(triplets)


def create_model_from_payload(
    payload: Payload,
) -> (
    models.HuberModel
    | models.PiecewiseModel
    | models.QuadraticModel
    | models.TripletsModel
):
    match payload:
        case HuberQuadratic(tau=tau, mu=mu, l_upper=l_upper):
            return models.HuberModel(tau=tau, mu=mu, l_upper=l_upper)
        case Piecewise1D(breakpoints=breakpoints, segments=segments):
            return models.PiecewiseModel(
                breakpoints=list(breakpoints),
                segments=[
                    models.PieceModel(
                        curvature=s.curvature,
                        slope_at_ref=s.slope_at_ref,
                        value_at_ref=s.value_at_ref,
                        ref=s.ref,
                    )
                    for s in segments
                ],
            )
        case Quadratic(curvatures=curvatures, linear=linear):
            return models.QuadraticModel(
                curvatures=list(curvatures),
                linear=list(linear),
            )
        case TripletSet():
            return models.TripletsModel(
                triplets=create_models_from_triplets(payload),
            )


def create_instance_from_model(
    model: models.InstanceModel,
) -> WorstCaseInstance:
    return WorstCaseInstance(
        payload=create_payload_from_model(model.payload),
        x0=np.asarray(model.x0, dtype=np.float64),
        cls=CurvatureClass.of(model.mu, model.l_upper),
        schedule=StepsizeSchedule(
            entries=tuple(model.schedule.entries),
            kind=model.schedule.kind,
        ),
        expected=RateBound(
            denominator=model.expected.denominator,
            regime=Regime.parse(model.expected.regime),
            numerator_kind=model.expected.numerator_kind,
        ),
        gap=model.gap,
        conjectured=model.conjectured,
    )


def create_model_from_instance(
    instance: WorstCaseInstance,
) -> models.InstanceModel:
    return models.InstanceModel(
        mu=instance.cls.mu,
        l_upper=instance.cls.l_upper,
        gap=instance.gap,
        conjectured=instance.conjectured,
        schedule=models.ScheduleModel(
            kind=instance.schedule.kind,
            entries=list(instance.schedule.entries),
        ),
        expected=models.RateModel(
            denominator=instance.expected.denominator,
            regime=str(instance.expected.regime),
            numerator_kind=instance.expected.numerator_kind,
        ),
        x0=[float(v) for v in instance.x0],
        payload=create_model_from_payload(instance.payload),
    )


def load_instance(path: Path) -> WorstCaseInstance:
    model = models.InstanceModel.model_validate_json(path.read_text())
    return create_instance_from_model(model)


def dump_instance(instance: WorstCaseInstance) -> str:
    return create_model_from_instance(instance).model_dump_json(indent=2)


def load_triplets(path: Path) -> TripletSet:
    """Triplets from a JSON array of records or from a saved instance."""
    data: object = json.loads(path.read_text())
    if isinstance(data, dict):
        payload = models.InstanceModel.model_validate(data).payload
        if not isinstance(payload, models.TripletsModel):
            raise ValueError(f'{path} holds a {payload.kind} instance')
        return create_triplets_from_models(payload.triplets)
    return create_triplets_from_models(_triplet_list.validate_python(data))


def dump_triplets(triplets: TripletSet) -> str:
    return _triplet_list.dump_json(
        create_models_from_triplets(triplets),
        indent=2,
    ).decode()
