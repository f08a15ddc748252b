# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Rolling-horizon hand-over: derive the next horizon's instance from a plan.
"""

import logging
from dataclasses import replace

from hlmp.errors import ConfigurationError
from hlmp.fleet import (
    Carryover, cycle_successor, next_expiry_day, planning_horizon, service_span,
)

from .instance import Instance, RatePeriod

log = logging.getLogger(__name__)


def _shift_periods(periods, shift, horizon):
    """Move periods ``shift`` days earlier, clip to ``[0, horizon]`` and stretch the last one."""
    shifted = []
    for period in periods:
        begin = max(0, period.begin_day - shift)
        end = min(horizon, period.end_day - shift)
        if begin <= end:
            shifted.append(replace(period, begin_day=begin, end_day=end))
    if not shifted:
        rate = periods[-1].max_rate
        return [RatePeriod(0, horizon, rate, periods[-1].label)]
    shifted[-1] = replace(shifted[-1], end_day=horizon)
    return shifted


def roll_forward(instance, schedule, shift_days, *, rate_periods=None, horizon=None):
    """
    Instance for the horizon starting ``shift_days`` days later.

    Trains delivered within the elapsed days become carryover maintenance and
    are due again at their next expiry, at their next level. When that next
    maintenance also began within the elapsed days the train moves on through
    the cycle and the later maintenance becomes the carryover. Other trains keep
    their plan data, moved ``shift_days`` earlier. ``rate_periods`` default to
    the current ones moved the same way; the last one is stretched to the new
    horizon, which defaults to the latest window end.
    """
    if shift_days < 1:
        raise ConfigurationError(f"shift_days must be >= 1, got {shift_days}")
    schedule.check(instance)
    regs = instance.regs

    trains = []
    for train in instance.trains:
        delivery = schedule[train.id]
        if delivery <= shift_days:
            # Follow the cycle while the following maintenance also started
            # within the elapsed days; the last one started is the carryover.
            start, level, next_level = delivery, train.level, train.next_level
            while True:
                service_days = regs.service_days(level)
                expiry = next_expiry_day(start, service_days, regs.cycle_interval,
                                         train.daily_mileage)
                if expiry > shift_days:
                    break
                start, level, next_level = expiry, next_level, cycle_successor(level, next_level)
            trains.append(replace(
                train,
                expired_day=expiry - shift_days,
                level=next_level,
                next_level=cycle_successor(level, next_level),
                carryover=Carryover(start - shift_days, service_days, level),
            ))
            log.debug("%s: maintained (%s) from day %d, next %s due day %d",
                      train.id, level.name, start, next_level.name, expiry - shift_days)
            continue

        carryover = train.carryover
        if carryover is not None:
            start = carryover.start_day - shift_days
            if start + service_span(carryover.duration_days) > 0:
                carryover = replace(carryover, start_day=start,
                                    level=train.carryover_level)
            else:
                carryover = None
        expiry = train.expired_day - shift_days
        if expiry < 1:
            # Overdue at the new horizon start: due on its first day.
            log.warning("%s: expiry day %d falls before the new horizon, moved to day 1",
                        train.id, expiry)
            expiry = 1
        trains.append(replace(train, expired_day=expiry,
                              carryover=carryover))

    if horizon is None:
        horizon = planning_horizon(trains, regs)
    if rate_periods is None:
        rate_periods = _shift_periods(instance.rate_periods, shift_days, horizon)

    return Instance.build(
        trains=trains,
        regs=regs,
        rate_periods=rate_periods,
        daily_acceptance=instance.daily_acceptance,
        capacity=instance.capacity,
        horizon=horizon,
        cost=instance.cost,
    )
