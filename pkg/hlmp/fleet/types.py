# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Shared type definitions for the fleet model.

Mileage is always in kilometers. Days are integer indices, day 1 being the
first day of the planning horizon; day 0 and negative days belong to the
previous horizon.
"""

import enum
from dataclasses import dataclass
from typing import Mapping, Optional

from hlmp.errors import ConfigurationError

__all__ = [
    "MaintenanceLevel", "LevelRule", "RegulationTable",
    "Carryover", "TrainRecord", "TimeWindow", "crh2_regulations",
]


class MaintenanceLevel(enum.IntEnum):
    """High-level maintenance levels. Ordered III < IV < V."""
    III = 3
    IV  = 4
    V   = 5

    @classmethod
    def parse(cls, name):
        """Look up a level by its roman numeral (``"III"``) or number (``3``)."""
        if isinstance(name, cls):
            return name
        if isinstance(name, int):
            return cls(name)
        try:
            return cls[str(name).strip().upper()]
        except KeyError:
            raise ConfigurationError(f"unknown maintenance level {name!r}") from None


@dataclass(frozen=True)
class LevelRule:
    """Regulation for one maintenance level."""
    level:          MaintenanceLevel
    target_mileage: float   # km between maintenances of this level
    left_offset:    float   # km allowance before the target
    right_offset:   float   # km allowance after the target
    service_days:   int     # days spent in the workshop
    capacity:       int     # trains of this level the workshop holds at once

    def __post_init__(self):
        problems = []
        if self.target_mileage <= 0:
            problems.append("target_mileage must be > 0")
        if self.left_offset < 0:
            problems.append("left_offset must be >= 0")
        if self.right_offset < 0:
            problems.append("right_offset must be >= 0")
        if self.left_offset >= self.target_mileage:
            problems.append("left_offset must be < target_mileage")
        if self.service_days < 1:
            problems.append("service_days must be >= 1")
        if self.capacity < 1:
            problems.append("capacity must be >= 1")
        if problems:
            raise ConfigurationError(f"level {self.level.name}: " + "; ".join(problems))


@dataclass(frozen=True)
class RegulationTable:
    """
    Level rules plus the mileage spacing between two adjacent high-level maintenances.

    A table built in code may hold a subset of the levels; ``rule()`` raises
    on a missing one. Instances parsed from files always carry all three.
    """
    rules:          Mapping[MaintenanceLevel, LevelRule]
    cycle_interval: float

    def __post_init__(self):
        if self.cycle_interval <= 0:
            raise ConfigurationError("cycle_interval must be > 0")
        for level, rule in self.rules.items():
            if rule.level != level:
                raise ConfigurationError(
                    f"rule for {rule.level.name} filed under {MaintenanceLevel(level).name}")

    def rule(self, level):
        try:
            return self.rules[level]
        except KeyError:
            raise ConfigurationError(
                f"no regulation for maintenance level {MaintenanceLevel(level).name}") from None

    def service_days(self, level):
        return self.rule(level).service_days

    @property
    def complete(self):
        return all(level in self.rules for level in MaintenanceLevel)


@dataclass(frozen=True)
class Carryover:
    """Maintenance begun in the previous horizon (start may be <= 0)."""
    start_day:     int
    duration_days: int
    # Level of that maintenance, for per-level capacity. None: the train's own level.
    level:         Optional[MaintenanceLevel] = None

    def __post_init__(self):
        if self.duration_days < 1:
            raise ConfigurationError("carryover duration_days must be >= 1")


@dataclass(frozen=True)
class TrainRecord:
    """One EMU train as seen by the planner."""
    id:            str
    unit_count:    int                 # eight-car units coupled in this train
    daily_mileage: float               # km per day
    expired_day:   int                 # day the mileage target is reached
    level:         MaintenanceLevel    # level of the maintenance being planned
    next_level:    MaintenanceLevel    # level of the maintenance after that one
    carryover:     Optional[Carryover] = None

    def __post_init__(self):
        problems = []
        if self.unit_count < 1:
            problems.append("unit_count must be >= 1")
        if self.daily_mileage <= 0:
            problems.append("daily_mileage must be > 0")
        if self.expired_day < 1:
            problems.append("expired_day must be >= 1")
        if problems:
            raise ConfigurationError(f"train {self.id}: " + "; ".join(problems))

    @property
    def carryover_level(self):
        if self.carryover is None:
            return None
        return self.carryover.level if self.carryover.level is not None else self.level

    @property
    def km_per_day(self):
        """Train-km lost for every day the delivery is brought forward."""
        return self.daily_mileage * self.unit_count


@dataclass(frozen=True)
class TimeWindow:
    """Inclusive range of admissible delivery days."""
    begin_day: int
    end_day:   int

    def __post_init__(self):
        if not 1 <= self.begin_day <= self.end_day:
            raise ValueError(f"bad window [{self.begin_day},{self.end_day}]")

    def __len__(self):
        return self.end_day - self.begin_day + 1

    def __contains__(self, day):
        return self.begin_day <= day <= self.end_day

    def __iter__(self):
        return iter(range(self.begin_day, self.end_day + 1))

    def clamp(self, day):
        return min(max(day, self.begin_day), self.end_day)

    def __str__(self):
        return f"[{self.begin_day},{self.end_day}]"


def crh2_regulations(*, service_days=(15, 25, 40), capacities=(4, 2, 1)):
    """
    CRH2-series inspection regulation for levels III-V (600/1200/2400 thousand km,
    offsets +20/-50, +50/-100, +100/-100 thousand km). Service durations and
    workshop capacities are not regulated and are given as arguments.
    """
    targets = (600_000, 1_200_000, 2_400_000)
    lefts   = (50_000, 100_000, 100_000)
    rights  = (20_000, 50_000, 100_000)
    rules = {
        level: LevelRule(level, target, left, right, days, cap)
        for level, target, left, right, days, cap in zip(
            MaintenanceLevel, targets, lefts, rights, service_days, capacities)
    }
    return RegulationTable(rules=rules, cycle_interval=600_000)
