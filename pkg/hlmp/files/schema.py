# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
On-disk document layouts. Units are spelled out in the field names
(``..._km``, ``..._day``); all days are integers except ``expired_day``,
which is checked for integrality after loading.
"""

import json
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from hlmp.errors import InstanceSyntaxError, InstanceValidationError

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class _Versioned(_Strict):
    schema_version: int

    @field_validator("schema_version")
    @classmethod
    def _known_version(cls, version):
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {version}, expected {SCHEMA_VERSION}")
        return version


class LevelRuleModel(_Strict):
    target_mileage_km: float = Field(gt=0)
    left_offset_km:    float = Field(ge=0)
    right_offset_km:   float = Field(ge=0)
    service_days:      int = Field(ge=1)
    capacity_trains:   int = Field(ge=1)


class RegulationsModel(_Strict):
    cycle_interval_km: float = Field(gt=0)
    levels:            dict[str, LevelRuleModel]


class CarryoverModel(_Strict):
    start_day:     int
    duration_days: int = Field(ge=1)
    level:         Optional[str] = None


class TrainModel(_Strict):
    id:               str = Field(min_length=1)
    unit_count:       int = Field(default=1, ge=1)
    daily_mileage_km: float = Field(gt=0)
    expired_day:      float = Field(ge=1)
    level:            str
    next_level:       str
    carryover:        Optional[CarryoverModel] = None


class RatePeriodModel(_Strict):
    label:     str = ""
    begin_day: int
    end_day:   int
    max_rate:  float = Field(ge=0, le=1)


class CapacityModel(_Strict):
    mode:         Literal["per_level", "aggregate"] = "per_level"
    total_trains: Optional[int] = Field(default=None, ge=1)


class CostModel(_Strict):
    maintain_per_km: float = 1.0
    income_per_km:   float = 0.0
    profit_rate:     float = 0.0


class InstanceModel(_Versioned):
    regulations:             RegulationsModel
    fleet:                   list[TrainModel]
    rate_periods:            list[RatePeriodModel]
    daily_acceptance_trains: int = Field(ge=1)
    capacity:                CapacityModel = Field(default_factory=CapacityModel)
    horizon_day:             Optional[int] = Field(default=None, ge=1)
    cost:                    CostModel = Field(default_factory=CostModel)


class DeliveryModel(BaseModel):
    # Report columns next to these two are ignored on load.
    model_config = ConfigDict(extra="ignore")
    id:           str
    delivery_day: int


class ScheduleModel(_Versioned):
    model_config = ConfigDict(extra="ignore")
    deliveries: list[DeliveryModel]


class SaParamsModel(_Strict):
    beta_rate:             Optional[float] = Field(default=None, ge=0)
    beta_accept:           Optional[float] = Field(default=None, ge=0)
    beta_capacity:         Optional[float] = Field(default=None, ge=0)
    cooling_rate:          float = Field(default=0.97, gt=0, lt=1)
    inner_generated_coeff: float = Field(default=3.0, ge=1)
    inner_accepted_coeff:  float = Field(default=6.0, ge=1)
    min_accept_rate:       float = Field(default=0.001, gt=0, lt=1)
    stability_count:       int = Field(default=30, ge=1)
    stability_rel_tol:     float = Field(default=1e-4, ge=0)
    initial_temp:          Optional[float] = Field(default=None, gt=0)
    seed:                  int = Field(default=0, ge=0, lt=2**64)
    initial_schedule:      Optional[dict[str, int]] = None
    max_evaluations:       int = Field(default=10**6, ge=1)
    check_incremental:     bool = False


class RushModel(_Strict):
    label:     str
    begin_day: int = Field(ge=0)
    days:      int = Field(ge=1)
    max_rate:  float = Field(ge=0, le=1)


class GeneratorConfigModel(_Strict):
    fleet_size:            int = Field(default=20, ge=1)
    horizon_day:           int = Field(default=365, ge=1)
    expiry_range_day:      Optional[tuple[int, int]] = None
    level_mix:             tuple[float, float, float] = (0.5, 0.3, 0.2)
    daily_mileage_km:      tuple[float, float] = (1400.0, 1900.0)
    double_unit_share:     float = Field(default=0.2, ge=0, le=1)
    carryover_probability: float = Field(default=0.1, ge=0, le=1)
    base_rate:             float = Field(default=0.1, ge=0, le=1)
    rushes:                Optional[list[RushModel]] = None
    daily_acceptance:      int = Field(default=1, ge=1)
    aggregate_capacity:    Optional[int] = Field(default=None, ge=1)
    service_days:          tuple[int, int, int] = (15, 25, 40)
    capacities:            tuple[int, int, int] = (4, 2, 1)
    offset_scale:          float = Field(default=1.0, gt=0)
    seed:                  int = Field(default=0, ge=0, lt=2**64)


def read_document(model_cls, text):
    """
    Parse JSON ``text`` into ``model_cls``. Malformed JSON raises
    InstanceSyntaxError; every layout problem is listed in one
    InstanceValidationError.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceSyntaxError(e.lineno, e.colno, e.msg) from None
    try:
        return model_cls.model_validate(data)
    except ValidationError as e:
        problems = [f"{'.'.join(str(part) for part in item['loc']) or 'document'}: {item['msg']}"
                    for item in e.errors()]
        raise InstanceValidationError(problems) from None
