# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Shared test fixtures and independent reference computations.

Nothing here uses the occupancy or evaluation modules: the simulator steps
through the horizon one day at a time and the constraint counter loops over
days and trains, so both can check the vectorized code.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
from colorama import Fore, Style

from hlmp.fleet import CLOSED_INTERVALS, LevelRule, MaintenanceLevel, RegulationTable
from hlmp.model import CapacityMode, Schedule
from hlmp.files import GeneratorConfig, Rush, generate


def _last_day(first_day, service_days):
    return first_day + service_days - (0 if CLOSED_INTERVALS else 1)


def simulate_occupancy(train, delivery_day, regs, horizon):
    """
    Level under maintenance (or None) for each day ``0..horizon``, found by
    running the train forward day by day from its delivery.
    """
    levels = [None] * (horizon + 1)

    def occupy(first, last, level):
        for day in range(max(first, 0), min(last, horizon) + 1):
            if levels[day] is None:
                levels[day] = level

    if train.carryover is not None:
        carry_last = _last_day(train.carryover.start_day, train.carryover.duration_days)
        # Only a maintenance still running after day 0 reaches into the horizon.
        if carry_last > 0:
            occupy(train.carryover.start_day, carry_last, train.carryover.level or train.level)

    service = regs.rule(train.level).service_days
    occupy(delivery_day, _last_day(delivery_day, service), train.level)

    # Back in traffic the day after the current maintenance; the next one
    # starts on the last day whose mileage stays within the cycle interval.
    day = delivery_day + service
    run = Fraction(0)
    daily = Fraction(train.daily_mileage)
    cycle = Fraction(regs.cycle_interval)
    while day <= horizon and run + daily <= cycle:
        run += daily
        day += 1
    if day <= horizon:
        occupy(day, _last_day(day, regs.rule(train.next_level).service_days), train.next_level)
    return levels


def count_violations(instance, schedule):
    """
    Rate, acceptance and capacity violation per day, computed with plain loops.
    Capacity is a list of per-level lists in per-level mode.
    """
    horizon = instance.horizon
    n = instance.fleet_size
    occupancy = {train.id: simulate_occupancy(train, schedule[train.id], instance.regs, horizon)
                 for train in instance.trains}

    limit = {}
    for period in instance.rate_periods:
        for day in range(period.begin_day, period.end_day + 1):
            limit[day] = period.max_rate

    rate, acceptance = [], []
    per_level = {level: [] for level in MaintenanceLevel}
    aggregate = []
    for day in range(horizon + 1):
        levels = [occupancy[train.id][day] for train in instance.trains]
        busy = sum(level is not None for level in levels)
        rate.append(max(0.0, busy / n - limit[day]))
        deliveries = sum(schedule[train.id] == day for train in instance.trains)
        acceptance.append(max(0, deliveries - instance.daily_acceptance))
        if instance.capacity.mode is CapacityMode.AGGREGATE:
            aggregate.append(max(0, busy - instance.capacity.total))
        else:
            for level in MaintenanceLevel:
                cap = instance.regs.rules[level].capacity if level in instance.regs.rules else 0
                per_level[level].append(max(0, levels.count(level) - cap))

    if instance.capacity.mode is CapacityMode.AGGREGATE:
        capacity = aggregate
    else:
        capacity = [per_level[level] for level in MaintenanceLevel]
    return rate, acceptance, capacity


def is_feasible(instance, schedule):
    rate, acceptance, capacity = count_violations(instance, schedule)
    return not (any(rate) or any(acceptance) or np.any(capacity))


def enumerate_schedules(instance):
    """Every schedule with each train inside its window."""
    ids = [train.id for train in instance.trains]
    windows = [instance.windows[train_id] for train_id in ids]
    for days in itertools.product(*windows):
        yield Schedule(dict(zip(ids, days)))


def brute_force_optimum(instance):
    """
    (loss, schedule) of the feasible schedule with the smallest loss, ties
    broken by the delivery vector in train-id order. (None, None) if none.
    """
    ids = sorted(train.id for train in instance.trains)
    best = None
    for schedule in enumerate_schedules(instance):
        if not is_feasible(instance, schedule):
            continue
        loss = math.fsum((train.expired_day - schedule[train.id]) * train.km_per_day
                         for train in instance.trains)
        key = (loss, tuple(schedule[train_id] for train_id in ids))
        if best is None or key < best[0]:
            best = (key, schedule)
    if best is None:
        return None, None
    return best[0][0], best[1]


# Short service times and narrow offsets: windows of at most 8 days at
# 1000..2000 km/day; the next maintenance falls due 15..30 days after the last.
SMALL_REGULATIONS = RegulationTable(
    rules={
        MaintenanceLevel.III: LevelRule(MaintenanceLevel.III, 60_000, 4_000, 3_000, 3, 2),
        MaintenanceLevel.IV:  LevelRule(MaintenanceLevel.IV, 120_000, 4_000, 3_000, 4, 1),
        MaintenanceLevel.V:   LevelRule(MaintenanceLevel.V, 240_000, 4_000, 3_000, 5, 1),
    },
    cycle_interval=30_000,
)


def random_small_instance(seed, *, fleet_size=None, aggregate=None):
    """
    Oracle-sized random instance: 2..6 trains, windows of at most 8 days, a
    30-day horizon with one rush. Rate caps are whole multiples of 1/fleet.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    n = fleet_size or int(rng.integers(2, 7))
    if aggregate is None:
        aggregate = bool(rng.random() < 0.5)
    config = GeneratorConfig(
        fleet_size=n,
        horizon_day=30,
        expiry_range_day=(4, 24),
        daily_mileage_km=(1000.0, 2000.0),
        double_unit_share=0.25,
        carryover_probability=0.3,
        base_rate=int(rng.integers(1, n + 1)) / n,
        rushes=(Rush("SpringRush", int(rng.integers(5, 15)), int(rng.integers(4, 10)),
                     int(rng.integers(1, n + 1)) / n),),
        daily_acceptance=int(rng.integers(1, 3)),
        aggregate_capacity=int(rng.integers(1, 4)) if aggregate else None,
        regulations=SMALL_REGULATIONS,
        seed=int(rng.integers(2**32)),
    )
    return generate(config)


def day_trace_lines(instance, schedule, *, color=True):
    """One line per day: trains in the workshop, rate against its cap, deliveries."""
    def tag(name, fore):
        return f"{fore}{name}{Style.RESET_ALL}" if color else name

    limit = {}
    for period in instance.rate_periods:
        for day in range(period.begin_day, period.end_day + 1):
            limit[day] = period.max_rate
    occupancy = {train.id: simulate_occupancy(train, schedule[train.id], instance.regs,
                                              instance.horizon)
                 for train in instance.trains}
    for day in range(instance.horizon + 1):
        busy = [train.id for train in instance.trains if occupancy[train.id][day] is not None]
        rate = len(busy) / instance.fleet_size
        name = tag("DAY", Fore.RED if rate > limit[day] else Fore.BLUE)
        line = f"[{name} d={day:4d}] rate={rate:.2f}/{limit[day]:.2f} {' '.join(busy)}"
        delivered = [train.id for train in instance.trains if schedule[train.id] == day]
        if delivered:
            line += f" {tag('DLV', Fore.GREEN)} {' '.join(delivered)}"
        yield line.rstrip()


def print_day_trace(instance, schedule):
    for line in day_trace_lines(instance, schedule):
        print(line)
