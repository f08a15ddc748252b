# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Schedule scoring: wasted remaining mileage and the per-day constraint violations.

All violation vectors are indexed by day ``0..T``. Per-level capacity
violations have one row per ``MaintenanceLevel`` (III, IV, V).
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from hlmp.fleet import MaintenanceLevel, occupancy_intervals

from .instance import CapacityMode

__all__ = [
    "LEVEL_ROW", "LoadProfile", "Evaluation",
    "mileage_loss", "rate_check", "acceptance_check", "capacity_check",
    "occupancy_counts", "evaluate",
]

LEVEL_ROW = {level: row for row, level in enumerate(MaintenanceLevel)}


class LoadProfile:
    """
    Per-day counts of trains in the workshop (one row per level) and of new
    deliveries for one schedule, updated in place one train at a time.

    Trains are addressed by their position in ``instance.trains``. The
    violation helpers accept a day index (slice or array) so that callers
    moving a single train can rescore only the days that train touches.
    """

    def __init__(self, instance):
        self.instance = instance
        self.occupied = np.zeros((len(MaintenanceLevel), instance.horizon + 1), dtype=np.int64)
        self.delivered = np.zeros(instance.horizon + 1, dtype=np.int64)
        self._rate_limits = instance.rate_limits()
        self._capacity = instance.capacity_limits()
        self._aggregate = instance.capacity.mode is CapacityMode.AGGREGATE
        self._windows = [instance.windows[train.id] for train in instance.trains]
        self._footprints = {}

    @classmethod
    def of(cls, instance, days):
        """Profile of the delivery ``days`` given in instance train order."""
        profile = cls(instance)
        for i, day in enumerate(days):
            profile.add(i, day)
        return profile

    def footprint(self, i, day):
        """
        Occupied ``(row, begin, stop)`` spans of train ``i`` delivered on ``day``
        and the sorted array of days they cover. A train is counted at most once
        per day even if its intervals touch.
        """
        key = (i, day)
        cached = self._footprints.get(key)
        if cached is not None:
            return cached

        instance = self.instance
        intervals = occupancy_intervals(instance.trains[i], day, instance.regs,
                                        instance.horizon, window=self._windows[i])
        spans = []
        covered_to = 0
        for interval in sorted(intervals, key=lambda iv: iv.begin):
            begin = max(interval.begin, covered_to)
            stop = interval.end + 1
            if begin < stop:
                spans.append((LEVEL_ROW[interval.level], begin, stop))
                covered_to = max(covered_to, stop)
        days = np.concatenate([np.arange(begin, stop) for _, begin, stop in spans])
        cached = self._footprints[key] = (tuple(spans), days)
        return cached

    def add(self, i, day, sign=1):
        spans, _ = self.footprint(i, day)
        for row, begin, stop in spans:
            self.occupied[row, begin:stop] += sign
        self.delivered[day] += sign

    def remove(self, i, day):
        self.add(i, day, -1)

    def in_maintenance(self, days=slice(None)):
        return self.occupied[:, days].sum(axis=0)

    def rate_violation(self, days=slice(None)):
        share = self.in_maintenance(days) / self.instance.fleet_size
        return np.maximum(share - self._rate_limits[days], 0.0)

    def acceptance_violation(self, days=slice(None)):
        return np.maximum(self.delivered[days] - self.instance.daily_acceptance, 0)

    def capacity_violation(self, days=slice(None)):
        if self._aggregate:
            return np.maximum(self.in_maintenance(days) - self._capacity[0], 0)
        return np.maximum(self.occupied[:, days] - self._capacity[:, None], 0)

    def penalty(self, weights, days=slice(None)):
        """Weighted sum of violations on ``days``."""
        rate_w, accept_w, capacity_w = weights
        return (rate_w * float(self.rate_violation(days).sum())
                + accept_w * float(self.acceptance_violation(days).sum())
                + capacity_w * float(self.capacity_violation(days).sum()))

    def violated(self, days=slice(None)):
        return bool(self.rate_violation(days).any()
                    or self.acceptance_violation(days).any()
                    or self.capacity_violation(days).any())


@dataclass(frozen=True, eq=False)
class Evaluation:
    mileage_loss:         float        # train-km, signed (late deliveries count negative)
    cost_value:           float        # mileage_loss times the cost factor
    rate_violation:       np.ndarray   # share of fleet above the period's cap, per day
    acceptance_violation: np.ndarray   # deliveries above the daily acceptance, per day
    capacity_violation:   np.ndarray   # trains above workshop capacity, per day (x level)
    late_trains:          Tuple[str, ...] = ()   # delivered after their expiry day

    @property
    def feasible(self):
        return not (self.rate_violation.any()
                    or self.acceptance_violation.any()
                    or self.capacity_violation.any())

    def violation_totals(self):
        """Summed rate, acceptance and capacity violations over the horizon."""
        return (float(self.rate_violation.sum()),
                int(self.acceptance_violation.sum()),
                int(self.capacity_violation.sum()))

    def __eq__(self, other):
        if not isinstance(other, Evaluation):
            return NotImplemented
        return (self.mileage_loss == other.mileage_loss
                and self.cost_value == other.cost_value
                and self.late_trains == other.late_trains
                and np.array_equal(self.rate_violation, other.rate_violation)
                and np.array_equal(self.acceptance_violation, other.acceptance_violation)
                and np.array_equal(self.capacity_violation, other.capacity_violation))

    __hash__ = None


def mileage_loss(instance, schedule):
    """Remaining train-km given away by delivering before expiry (negative when late)."""
    return math.fsum((train.expired_day - schedule[train.id]) * train.km_per_day
                     for train in instance.trains)


def _profile(instance, schedule):
    schedule.check(instance)
    return LoadProfile.of(instance, schedule.days(instance))


def rate_check(instance, schedule):
    return _profile(instance, schedule).rate_violation()


def acceptance_check(instance, schedule):
    return _profile(instance, schedule).acceptance_violation()


def capacity_check(instance, schedule):
    return _profile(instance, schedule).capacity_violation()


def occupancy_counts(instance, schedule):
    """Trains in the workshop per level (rows) and day (columns)."""
    return _profile(instance, schedule).occupied.copy()


def evaluate(instance, schedule):
    """Score ``schedule``. Raises ScheduleError listing trains that break the structure."""
    profile = _profile(instance, schedule)
    loss = mileage_loss(instance, schedule)
    late = tuple(sorted(train.id for train in instance.trains
                        if schedule[train.id] > train.expired_day))
    return Evaluation(
        mileage_loss=loss,
        cost_value=loss * instance.cost.factor,
        rate_violation=profile.rate_violation(),
        acceptance_violation=profile.acceptance_violation(),
        capacity_violation=profile.capacity_violation(),
        late_trains=late,
    )
