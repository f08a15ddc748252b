# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
State function: on which days of the horizon a train is in the workshop.

A train delivered on day ``tau`` occupies up to three intervals of ``[0, T]``:

1. Carryover: the previous maintenance, begun on ``tau' <= T`` (possibly
   before day 1) and still running on day 0 or later.
2. Current: ``[tau, tau + service_days]`` for the planned level.
3. Next: when delivered early in the horizon, the following maintenance
   starts at its mileage expiry ``tau''`` (see ``next_expiry``) and runs for
   the next level's service time, cut off at ``T``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from hlmp.errors import DomainError, ScheduleError

from .types import MaintenanceLevel
from .window import compute_window

# Intervals include both endpoints: a train delivered on day t with d service
# days is in the workshop on days t .. t+d. Set False for t .. t+d-1.
CLOSED_INTERVALS = True


def service_span(service_days):
    """Offset from the first to the last occupied day of a maintenance."""
    return service_days if CLOSED_INTERVALS else service_days - 1


@dataclass(frozen=True)
class DayInterval:
    begin: int
    end:   int
    level: MaintenanceLevel

    def __len__(self):
        return self.end - self.begin + 1

    def __contains__(self, day):
        return self.begin <= day <= self.end


@dataclass(frozen=True)
class OccupancyIntervals:
    current:   DayInterval
    carryover: Optional[DayInterval] = None
    next:      Optional[DayInterval] = None

    def __iter__(self):
        """Present intervals in ascending order."""
        for interval in (self.carryover, self.current, self.next):
            if interval is not None:
                yield interval

    def __contains__(self, day):
        return any(day in interval for interval in self)

    @property
    def total_days(self):
        return sum(len(interval) for interval in self)


def next_expiry(delivery_day, service_days, cycle_interval, daily_mileage):
    """Day (real valued) the mileage for the following maintenance runs out."""
    if daily_mileage <= 0:
        raise DomainError(f"daily mileage must be positive, got {daily_mileage}")
    if service_days < 0 or cycle_interval < 0:
        raise DomainError("service days and cycle interval must not be negative")
    return delivery_day + service_days + cycle_interval / daily_mileage


def next_expiry_day(delivery_day, service_days, cycle_interval, daily_mileage):
    """``next_expiry`` rounded down: the next maintenance never starts after its expiry."""
    next_expiry(delivery_day, service_days, cycle_interval, daily_mileage)
    return delivery_day + service_days + math.floor(
        Fraction(cycle_interval) / Fraction(daily_mileage))


def occupancy_intervals(train, delivery_day, regs, horizon, *, window=None):
    """
    Workshop intervals of ``train`` delivered on ``delivery_day``, clipped to
    ``[0, horizon]``. ``window`` may be passed when the caller already has it.
    """
    if window is None:
        window = compute_window(train, regs)
    if delivery_day not in window or delivery_day > horizon:
        raise ScheduleError([train.id], f"delivery day {delivery_day} outside window {window}")

    service_days = regs.service_days(train.level)
    current = DayInterval(delivery_day,
                          min(horizon, delivery_day + service_span(service_days)),
                          train.level)

    carryover = None
    if train.carryover is not None:
        start = train.carryover.start_day
        end = start + service_span(train.carryover.duration_days)
        if end > 0 and start <= horizon:
            carryover = DayInterval(max(0, start), min(horizon, end), train.carryover_level)

    nxt = None
    tau2 = next_expiry_day(delivery_day, service_days, regs.cycle_interval, train.daily_mileage)
    if tau2 <= horizon:
        next_days = regs.service_days(train.next_level)
        nxt = DayInterval(tau2, min(horizon, tau2 + service_span(next_days)), train.next_level)

    return OccupancyIntervals(current=current, carryover=carryover, next=nxt)


def state(train, delivery_day, day, regs, horizon):
    """1 if ``train`` is under maintenance on ``day``, else 0."""
    if not 0 <= day <= horizon:
        raise ValueError(f"day {day} outside horizon [0,{horizon}]")
    return int(day in occupancy_intervals(train, delivery_day, regs, horizon))
