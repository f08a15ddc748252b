# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Seeded random instances for tests, benchmarks and oracle comparisons.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from hlmp.errors import (
    ConfigurationError, GenerationError, HlmpError, InstanceValidationError,
)
from hlmp.fleet import (
    Carryover, LevelRule, MaintenanceLevel, RegulationTable, TrainRecord,
    compute_window, crh2_regulations, cycle_predecessors, cycle_successor,
)
from hlmp.model import CapacityLimit, Instance, RatePeriod

from .schema import GeneratorConfigModel, read_document

__all__ = ["Rush", "GeneratorConfig", "generate", "load_generator_config"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Rush:
    """Holiday travel period with a tighter maintenance-rate cap."""
    label:     str
    begin_day: int
    days:      int
    max_rate:  float


_DEFAULT_RUSHES = (
    Rush("SpringRush", 20, 40, 0.05),
    Rush("SummerRush", 180, 62, 0.05),
)


@dataclass(frozen=True)
class GeneratorConfig:
    fleet_size:            int = 20
    horizon_day:           int = 365
    expiry_range_day:      Optional[Tuple[int, int]] = None   # None: (1, horizon_day)
    level_mix:             Tuple[float, float, float] = (0.5, 0.3, 0.2)  # III, IV, V
    daily_mileage_km:      Tuple[float, float] = (1400.0, 1900.0)
    double_unit_share:     float = 0.2     # trains made of two coupled units
    carryover_probability: float = 0.1
    base_rate:             float = 0.1
    rushes:                Tuple[Rush, ...] = _DEFAULT_RUSHES
    daily_acceptance:      int = 1
    aggregate_capacity:    Optional[int] = None   # None: per-level limits
    service_days:          Tuple[int, int, int] = (15, 25, 40)
    capacities:            Tuple[int, int, int] = (4, 2, 1)
    offset_scale:          float = 1.0     # shrinks the regulation offsets (narrower windows)
    seed:                  int = 0
    # Replaces the scaled CRH2 table built from the three fields above.
    regulations:           Optional[RegulationTable] = field(default=None, compare=False)

    def __post_init__(self):
        problems = []
        if self.fleet_size < 1:
            problems.append("fleet_size must be >= 1")
        if self.horizon_day < 1:
            problems.append("horizon_day must be >= 1")
        lo, hi = self.expiry_range
        if not 1 <= lo <= hi:
            problems.append(f"expiry range [{lo},{hi}] is empty or starts before day 1")
        if any(share < 0 for share in self.level_mix) or not math.isclose(sum(self.level_mix), 1.0):
            problems.append("level_mix must be non-negative and sum to 1")
        if not 0 < self.daily_mileage_km[0] <= self.daily_mileage_km[1]:
            problems.append("daily_mileage_km range is empty or not positive")
        for name in ("double_unit_share", "carryover_probability", "base_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                problems.append(f"{name} must lie in [0, 1]")
        if self.daily_acceptance < 1:
            problems.append("daily_acceptance must be >= 1")
        if self.aggregate_capacity is not None and self.aggregate_capacity < 1:
            problems.append("aggregate_capacity must be >= 1")
        if self.offset_scale <= 0:
            problems.append("offset_scale must be > 0")
        if not 0 <= self.seed < 2**64:
            problems.append("seed must be an unsigned 64-bit integer")
        if problems:
            raise ConfigurationError("; ".join(problems))

    @property
    def expiry_range(self):
        return self.expiry_range_day or (1, self.horizon_day)

    def regulation_table(self):
        if self.regulations is not None:
            return self.regulations
        base = crh2_regulations(service_days=self.service_days, capacities=self.capacities)
        if self.offset_scale == 1.0:
            return base
        rules = {
            level: LevelRule(level, rule.target_mileage,
                             rule.left_offset * self.offset_scale,
                             rule.right_offset * self.offset_scale,
                             rule.service_days, rule.capacity)
            for level, rule in base.rules.items()
        }
        return RegulationTable(rules=rules, cycle_interval=base.cycle_interval)


def load_generator_config(text):
    """``GeneratorConfig`` from a JSON document; unknown keys are rejected."""
    model = read_document(GeneratorConfigModel, text)
    values = model.model_dump(exclude_unset=True)
    if "rushes" in values:
        values["rushes"] = tuple(Rush(**rush) for rush in values["rushes"] or ())
    try:
        return GeneratorConfig(**values)
    except ConfigurationError as e:
        raise InstanceValidationError([str(e)]) from None


def _rate_periods(config):
    """Rush periods clipped to the horizon, gaps filled with the base rate."""
    horizon = config.horizon_day
    periods = []
    day = 0
    for rush in sorted(config.rushes, key=lambda rush: rush.begin_day):
        begin = rush.begin_day
        end = min(horizon, rush.begin_day + rush.days - 1)
        if begin > horizon:
            continue
        if begin < day:
            raise GenerationError(f"rush {rush.label} overlaps the previous rush")
        if begin > day:
            periods.append(RatePeriod(day, begin - 1, config.base_rate))
        periods.append(RatePeriod(begin, end, rush.max_rate, rush.label))
        day = end + 1
    if day <= horizon:
        periods.append(RatePeriod(day, horizon, config.base_rate))
    return periods


class _TrainFactory:
    """Draws trains one at a time; windows are re-drawn until they end inside the horizon."""

    _MAX_ATTEMPTS = 1000

    def __init__(self, config, regs, rng):
        self.config = config
        self.regs = regs
        self.rng = rng

    def _level(self):
        return MaintenanceLevel(3 + int(self.rng.choice(3, p=self.config.level_mix)))

    def draw(self, train_id):
        config, rng = self.config, self.rng
        level = self._level()
        # Uniform position in the cycle among those holding `level`.
        previous = cycle_predecessors(level)
        previous = previous[int(rng.integers(len(previous)))]
        next_level = cycle_successor(previous, level)
        units = 2 if rng.random() < config.double_unit_share else 1

        carryover = None
        if rng.random() < config.carryover_probability:
            duration = self.regs.service_days(previous)
            carryover = Carryover(start_day=-int(rng.integers(duration)),
                                  duration_days=duration, level=previous)

        lo, hi = config.expiry_range
        for _ in range(self._MAX_ATTEMPTS):
            train = TrainRecord(
                id=train_id,
                unit_count=units,
                daily_mileage=float(round(rng.uniform(*config.daily_mileage_km))),
                expired_day=int(rng.integers(lo, hi + 1)),
                level=level,
                next_level=next_level,
                carryover=carryover,
            )
            try:
                window = compute_window(train, self.regs)
            except HlmpError:
                continue
            if window.end_day <= config.horizon_day:
                return train
        raise GenerationError(
            f"no window for {train_id} ({level.name}) fits the horizon "
            f"of {config.horizon_day} days after {self._MAX_ATTEMPTS} draws")


def generate(config=None):
    """
    Random instance. The same config, seed included, always yields the same
    instance. Windows fit the horizon; feasibility is not guaranteed.
    """
    config = config or GeneratorConfig()
    regs = config.regulation_table()
    if not regs.complete:
        raise ConfigurationError("generator needs rules for all maintenance levels")
    rng = np.random.Generator(np.random.PCG64(config.seed))
    factory = _TrainFactory(config, regs, rng)
    trains = [factory.draw(f"EMU_{k + 1:03d}") for k in range(config.fleet_size)]

    capacity = CapacityLimit.per_level()
    if config.aggregate_capacity is not None:
        capacity = CapacityLimit.aggregate(config.aggregate_capacity)
    try:
        instance = Instance.build(
            trains=trains,
            regs=regs,
            rate_periods=_rate_periods(config),
            daily_acceptance=config.daily_acceptance,
            capacity=capacity,
            horizon=config.horizon_day,
        )
    except InstanceValidationError as e:
        raise GenerationError("generated instance is invalid:\n" + str(e)) from e
    log.debug("generated %d trains over %d days (seed %d)",
              instance.fleet_size, instance.horizon, config.seed)
    return instance
