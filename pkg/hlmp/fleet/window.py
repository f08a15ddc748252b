# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Delivery time windows and the planning horizon.
"""

import math
from fractions import Fraction

from hlmp.errors import EmptyInputError, InfeasibleTrainError

from .types import MaintenanceLevel, TimeWindow

# Order in which high-level maintenances follow each other over a train's life.
_CYCLE = (MaintenanceLevel.III, MaintenanceLevel.IV, MaintenanceLevel.III, MaintenanceLevel.V)


def compute_window(train, regs):
    """
    Days on which ``train`` may be delivered: the expiry day minus/plus the level's
    mileage offsets converted to days at the train's daily mileage.

    Fractional bounds are rounded toward the window center (ceil on the begin,
    floor on the end), so the window never extends past the regulation allowance.
    A begin before day 1 is moved to day 1.
    """
    rule = regs.rule(train.level)
    daily = Fraction(train.daily_mileage)
    begin = math.ceil(train.expired_day - Fraction(rule.left_offset) / daily)
    end = math.floor(train.expired_day + Fraction(rule.right_offset) / daily)
    if begin > end:
        raise InfeasibleTrainError(train.id, f"bounds [{begin},{end}] cross after rounding")
    if end < 1:
        raise InfeasibleTrainError(train.id, f"window ends on day {end}, before the horizon")
    return TimeWindow(max(begin, 1), end)


def planning_horizon(trains, regs):
    """Latest window end over the fleet."""
    if not trains:
        raise EmptyInputError("planning horizon of an empty fleet")
    return max(compute_window(train, regs).end_day for train in trains)


def cycle_predecessors(level):
    """Levels that may precede ``level`` in the maintenance cycle."""
    n = len(_CYCLE)
    return sorted({_CYCLE[(i - 1) % n] for i, lv in enumerate(_CYCLE) if lv == level})


def cycle_successor(previous, current):
    """
    Level following ``current`` when ``previous`` came right before it.

    III appears twice in the cycle, so the level before it picks the branch:
    IV -> III -> V and V -> III -> IV.
    """
    n = len(_CYCLE)
    for i, lv in enumerate(_CYCLE):
        if lv == current and _CYCLE[(i - 1) % n] == previous:
            return _CYCLE[(i + 1) % n]
    # XXX: not a position of the cycle (e.g. III after III), take its first occurrence.
    return _CYCLE[(_CYCLE.index(current) + 1) % n]
