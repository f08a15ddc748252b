# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Problem instances and schedules.
"""

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional, Tuple

import numpy as np

from hlmp.errors import HlmpError, InstanceValidationError, ScheduleError
from hlmp.fleet import (
    MaintenanceLevel, RegulationTable, TrainRecord, compute_window, planning_horizon,
)

__all__ = [
    "RatePeriod", "CapacityMode", "CapacityLimit", "CostRecord",
    "Instance", "Schedule", "ModelSize", "model_size",
]


@dataclass(frozen=True)
class RatePeriod:
    """Inclusive day range with its own cap on the share of the fleet in maintenance."""
    begin_day: int
    end_day:   int
    max_rate:  float
    label:     str = ""


class CapacityMode(enum.Enum):
    PER_LEVEL = "per_level"   # one limit per maintenance level (LevelRule.capacity)
    AGGREGATE = "aggregate"   # one limit for all high-level maintenance


@dataclass(frozen=True)
class CapacityLimit:
    mode:  CapacityMode = CapacityMode.PER_LEVEL
    total: Optional[int] = None    # only for AGGREGATE

    @classmethod
    def per_level(cls):
        return cls(CapacityMode.PER_LEVEL)

    @classmethod
    def aggregate(cls, total):
        return cls(CapacityMode.AGGREGATE, total)


@dataclass(frozen=True)
class CostRecord:
    maintain_per_km: float = 1.0   # apportioned maintenance cost per train-km
    income_per_km:   float = 0.0   # average ticket revenue per train-km
    profit_rate:     float = 0.0   # share of revenue that is profit

    @property
    def factor(self):
        """Currency per train-km of wasted remaining mileage."""
        return self.maintain_per_km + self.profit_rate * self.income_per_km


@dataclass(frozen=True)
class Instance:
    """
    A complete planning problem. Build through ``Instance.build`` to get a
    validated instance; the constructor alone checks nothing.
    """
    trains:           Tuple[TrainRecord, ...]
    regs:             RegulationTable
    rate_periods:     Tuple[RatePeriod, ...]
    daily_acceptance: int
    capacity:         CapacityLimit
    horizon:          int
    cost:             CostRecord = field(default_factory=CostRecord)

    @classmethod
    def build(cls, trains, regs, rate_periods, daily_acceptance, capacity=None,
              horizon=None, cost=None):
        """Validated instance. ``horizon`` defaults to the latest window end."""
        trains = tuple(trains)
        if horizon is None:
            try:
                horizon = planning_horizon(trains, regs)
            except HlmpError as e:
                raise InstanceValidationError([str(e)]) from e
        instance = cls(
            trains=trains,
            regs=regs,
            rate_periods=tuple(rate_periods),
            daily_acceptance=daily_acceptance,
            capacity=capacity or CapacityLimit.per_level(),
            horizon=horizon,
            cost=cost or CostRecord(),
        )
        problems = instance.problems()
        if problems:
            raise InstanceValidationError(problems)
        return instance

    def problems(self):
        """Every invariant violation of this instance, as readable strings."""
        problems = []
        if not self.trains:
            problems.append("fleet is empty")
        if self.horizon < 1:
            problems.append(f"horizon {self.horizon} must be >= 1")
        if self.daily_acceptance < 1:
            problems.append(f"daily acceptance {self.daily_acceptance} must be >= 1")
        if self.capacity.mode is CapacityMode.AGGREGATE:
            if self.capacity.total is None or self.capacity.total < 1:
                problems.append("aggregate capacity needs a total >= 1")

        seen = set()
        for train in self.trains:
            if train.id in seen:
                problems.append(f"train {train.id}: duplicate id")
            seen.add(train.id)
            levels = [("level", train.level), ("next_level", train.next_level)]
            if train.carryover is not None:
                levels.append(("carryover level", train.carryover_level))
            missing = [f"{what} {lv.name}" for what, lv in levels if lv not in self.regs.rules]
            if missing:
                problems.append(f"train {train.id}: no regulation for " + ", ".join(missing))
                continue
            try:
                window = compute_window(train, self.regs)
            except HlmpError as e:
                problems.append(str(e))
                continue
            if window.end_day > self.horizon:
                problems.append(f"train {train.id}: window {window} ends after horizon {self.horizon}")

        problems.extend(self._partition_problems())
        return problems

    def _partition_problems(self):
        problems = []
        if not self.rate_periods:
            return ["no rate periods"]
        expected = 0
        for period in self.rate_periods:
            name = period.label or f"[{period.begin_day},{period.end_day}]"
            if not 0.0 <= period.max_rate <= 1.0:
                problems.append(f"rate period {name}: max_rate {period.max_rate} outside [0,1]")
            if period.begin_day > period.end_day:
                problems.append(f"rate period {name}: begin after end")
            if period.begin_day < expected:
                problems.append(f"rate period {name}: overlaps the previous period "
                                f"(begins on day {period.begin_day}, expected {expected})")
            elif period.begin_day > expected:
                problems.append(f"rate period {name}: gap before day {period.begin_day} "
                                f"(expected {expected})")
            expected = max(expected, period.end_day + 1)
        if expected != self.horizon + 1:
            problems.append(f"rate periods end on day {expected - 1}, horizon is {self.horizon}")
        return problems

    @cached_property
    def windows(self):
        return {train.id: compute_window(train, self.regs) for train in self.trains}

    @cached_property
    def index(self):
        return {train.id: i for i, train in enumerate(self.trains)}

    @property
    def fleet_size(self):
        return len(self.trains)

    def train(self, train_id):
        return self.trains[self.index[train_id]]

    def rate_limits(self):
        """Allowed maintenance rate for each day 0..T."""
        limits = np.empty(self.horizon + 1, dtype=float)
        for period in self.rate_periods:
            limits[period.begin_day:period.end_day + 1] = period.max_rate
        return limits

    def capacity_limits(self):
        """Per-level (one row per MaintenanceLevel) or aggregate workshop limit."""
        if self.capacity.mode is CapacityMode.AGGREGATE:
            return np.array([self.capacity.total])
        rules = self.regs.rules
        return np.array([rules[level].capacity if level in rules else 0 for level in MaintenanceLevel])


@dataclass(frozen=True)
class Schedule:
    """One delivery day per train id."""
    delivery: Mapping[str, int]

    @classmethod
    def from_days(cls, instance, days):
        """Schedule from delivery days listed in instance train order."""
        return cls({train.id: int(day) for train, day in zip(instance.trains, days)})

    def __getitem__(self, train_id):
        return self.delivery[train_id]

    def __len__(self):
        return len(self.delivery)

    def days(self, instance):
        """Delivery days in instance train order."""
        return [self.delivery[train.id] for train in instance.trains]

    def moved(self, train_id, day):
        delivery = dict(self.delivery)
        delivery[train_id] = day
        return Schedule(delivery)

    def problems(self, instance):
        """Ids of trains that are missing, unknown or delivered outside their window."""
        bad = set(self.delivery) - set(instance.index)
        for train in instance.trains:
            day = self.delivery.get(train.id)
            if day is None or day not in instance.windows[train.id]:
                bad.add(train.id)
        return sorted(bad)

    def check(self, instance):
        bad = self.problems(instance)
        if bad:
            raise ScheduleError(bad, "schedule misses or misplaces trains")
        return self


@dataclass(frozen=True)
class ModelSize:
    variables:   int     # binary delivery variables, sum of window widths
    constraints: int     # fleet + 5T (per level) or fleet + 3T (aggregate)
    log2_space:  float   # log2 of the number of structurally valid schedules


def model_size(instance):
    """Size of the 0-1 program behind ``instance``."""
    widths = [len(window) for window in instance.windows.values()]
    per_day = 3 if instance.capacity.mode is CapacityMode.AGGREGATE else 2 + len(MaintenanceLevel)
    return ModelSize(
        variables=sum(widths),
        constraints=instance.fleet_size + per_day * instance.horizon,
        log2_space=sum(math.log2(w) for w in widths),
    )
