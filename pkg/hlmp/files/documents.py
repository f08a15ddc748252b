# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Reading and writing instance, schedule and parameter documents.

All documents are JSON. Parsing reports malformed text as
``InstanceSyntaxError`` (with line and column) and every layout or model
violation at once as ``InstanceValidationError``.
"""

import csv
import io
import json
from typing import NamedTuple

import numpy as np

from hlmp.errors import ConfigurationError, HlmpError, InstanceValidationError
from hlmp.fleet import (
    Carryover, LevelRule, MaintenanceLevel, RegulationTable, TrainRecord, compute_window,
)
from hlmp.model import (
    CapacityLimit, CapacityMode, CostRecord, Instance, RatePeriod, Schedule,
    LoadProfile, LEVEL_ROW,
)
from hlmp.solvers.annealer import SaParams

from .schema import (
    SCHEMA_VERSION, InstanceModel, SaParamsModel, ScheduleModel, read_document,
)

__all__ = [
    "parse_instance", "serialize_instance", "parse_schedule", "serialize_schedule",
    "ScheduleDocument", "occupancy_series", "serialize_series", "load_params",
]


def _regulations(model, problems):
    rules = {}
    for name, rule in model.levels.items():
        try:
            level = MaintenanceLevel.parse(name)
            rules[level] = LevelRule(
                level=level,
                target_mileage=rule.target_mileage_km,
                left_offset=rule.left_offset_km,
                right_offset=rule.right_offset_km,
                service_days=rule.service_days,
                capacity=rule.capacity_trains,
            )
        except ConfigurationError as e:
            problems.append(f"regulations.levels.{name}: {e}")
    missing = [level.name for level in MaintenanceLevel if level not in rules]
    if missing and len(rules) == len(model.levels):
        problems.append("regulations.levels: missing " + ", ".join(missing))
    return RegulationTable(rules=rules, cycle_interval=model.cycle_interval_km)


def _train(model, problems):
    try:
        level = MaintenanceLevel.parse(model.level)
        next_level = MaintenanceLevel.parse(model.next_level)
        carryover = None
        if model.carryover is not None:
            carry = model.carryover
            carryover = Carryover(
                start_day=carry.start_day,
                duration_days=carry.duration_days,
                level=None if carry.level is None else MaintenanceLevel.parse(carry.level),
            )
        if not model.expired_day.is_integer():
            raise ConfigurationError(f"expired_day {model.expired_day} is not a whole day")
        return TrainRecord(
            id=model.id,
            unit_count=model.unit_count,
            daily_mileage=model.daily_mileage_km,
            expired_day=int(model.expired_day),
            level=level,
            next_level=next_level,
            carryover=carryover,
        )
    except ConfigurationError as e:
        message = str(e)
        if not message.startswith(f"train {model.id}"):
            message = f"train {model.id}: {message}"
        problems.append(message)
        return None


def _horizon(trains, regs):
    ends = []
    for train in trains:
        try:
            ends.append(compute_window(train, regs).end_day)
        except HlmpError:
            # Reported by Instance.problems().
            pass
    return max(ends, default=0)


def parse_instance(text):
    """Validated ``Instance`` from an instance document."""
    model = read_document(InstanceModel, text)
    problems = []
    regs = _regulations(model.regulations, problems)
    trains = [train for train in (_train(tm, problems) for tm in model.fleet) if train is not None]
    capacity = CapacityLimit(CapacityMode(model.capacity.mode), model.capacity.total_trains)
    horizon = model.horizon_day if model.horizon_day is not None else _horizon(trains, regs)

    instance = Instance(
        trains=tuple(trains),
        regs=regs,
        rate_periods=tuple(RatePeriod(p.begin_day, p.end_day, p.max_rate, p.label)
                           for p in model.rate_periods),
        daily_acceptance=model.daily_acceptance_trains,
        capacity=capacity,
        horizon=horizon,
        cost=CostRecord(model.cost.maintain_per_km, model.cost.income_per_km,
                        model.cost.profit_rate),
    )
    if trains or not model.fleet:
        problems.extend(instance.problems())
    if problems:
        raise InstanceValidationError(problems)
    return instance


def _instance_document(instance):
    levels = {}
    for level in MaintenanceLevel:
        if level not in instance.regs.rules:
            continue
        rule = instance.regs.rule(level)
        levels[level.name] = {
            "target_mileage_km": rule.target_mileage,
            "left_offset_km":    rule.left_offset,
            "right_offset_km":   rule.right_offset,
            "service_days":      rule.service_days,
            "capacity_trains":   rule.capacity,
        }

    fleet = []
    for train in instance.trains:
        entry = {
            "id":               train.id,
            "unit_count":       train.unit_count,
            "daily_mileage_km": train.daily_mileage,
            "expired_day":      train.expired_day,
            "level":            train.level.name,
            "next_level":       train.next_level.name,
        }
        if train.carryover is not None:
            entry["carryover"] = {
                "start_day":     train.carryover.start_day,
                "duration_days": train.carryover.duration_days,
            }
            if train.carryover.level is not None:
                entry["carryover"]["level"] = train.carryover.level.name
        fleet.append(entry)

    capacity = {"mode": instance.capacity.mode.value}
    if instance.capacity.total is not None:
        capacity["total_trains"] = instance.capacity.total

    return {
        "schema_version": SCHEMA_VERSION,
        "regulations": {
            "cycle_interval_km": instance.regs.cycle_interval,
            "levels": levels,
        },
        "fleet": fleet,
        "rate_periods": [
            {"label": p.label, "begin_day": p.begin_day, "end_day": p.end_day, "max_rate": p.max_rate}
            for p in instance.rate_periods
        ],
        "daily_acceptance_trains": instance.daily_acceptance,
        "capacity": capacity,
        "horizon_day": instance.horizon,
        "cost": {
            "maintain_per_km": instance.cost.maintain_per_km,
            "income_per_km":   instance.cost.income_per_km,
            "profit_rate":     instance.cost.profit_rate,
        },
    }


def serialize_instance(instance):
    """Instance document text; ``parse_instance`` gives back an equal instance."""
    return json.dumps(_instance_document(instance), indent=2) + "\n"


def parse_schedule(text, instance=None):
    """
    Schedule from a machine-readable schedule document. Extra report columns
    are ignored. With ``instance`` the schedule is also checked against it.
    """
    model = read_document(ScheduleModel, text)
    delivery = {}
    duplicates = []
    for entry in model.deliveries:
        if entry.id in delivery:
            duplicates.append(f"deliveries: train {entry.id} listed twice")
        delivery[entry.id] = entry.delivery_day
    if duplicates:
        raise InstanceValidationError(duplicates)
    schedule = Schedule(delivery)
    if instance is not None:
        schedule.check(instance)
    return schedule


class ScheduleDocument(NamedTuple):
    table:   str    # fixed-width text for people
    machine: str    # JSON, readable by parse_schedule


def _rows(instance, schedule):
    for train in instance.trains:
        day = schedule[train.id]
        early = train.expired_day - day
        yield train, instance.windows[train.id], day, early, float(early * train.km_per_day)


def serialize_schedule(instance, schedule, evaluation):
    """
    Per-train rows (id, level, window, delivery, days early, train-km loss)
    plus a summary, as a fixed-width table and as JSON.
    """
    if set(schedule.delivery) != set(instance.index) or \
            len(evaluation.acceptance_violation) != instance.horizon + 1:
        raise ValueError("schedule and evaluation do not belong to this instance")

    rate, acceptance, capacity = evaluation.violation_totals()
    in_maintenance = [int(n) for n in np.asarray(LoadProfile.of(
        instance, schedule.days(instance)).in_maintenance())]

    width = max(len("train"), *(len(train.id) for train in instance.trains))
    lines = [f"{'train':<{width}}  level  {'window':<11}  delivery  days_early  {'loss_km':>12}"]
    deliveries = []
    for train, window, day, early, loss in _rows(instance, schedule):
        late = "  late" if train.id in evaluation.late_trains else ""
        lines.append(f"{train.id:<{width}}  {train.level.name:<5}  {str(window):<11}  "
                     f"{day:>8}  {early:>10}  {loss:>12.1f}{late}")
        deliveries.append({
            "id":           train.id,
            "level":        train.level.name,
            "window":       [window.begin_day, window.end_day],
            "delivery_day": day,
            "days_early":   early,
            "loss_km":      loss,
        })
    lines += [
        "",
        f"total loss_km: {evaluation.mileage_loss:.1f}",
        f"cost:          {evaluation.cost_value:.2f}",
        f"feasible:      {'yes' if evaluation.feasible else 'no'}",
        f"violations:    rate={rate:.4f} acceptance={acceptance} capacity={capacity}",
        f"late trains:   {', '.join(evaluation.late_trains) or '-'}",
        f"peak in maintenance: {max(in_maintenance)} on day {in_maintenance.index(max(in_maintenance))}",
    ]

    machine = {
        "schema_version": SCHEMA_VERSION,
        "deliveries": deliveries,
        "summary": {
            "mileage_loss_km": evaluation.mileage_loss,
            "cost":            evaluation.cost_value,
            "feasible":        evaluation.feasible,
            "late_trains":     list(evaluation.late_trains),
            "violations": {
                "rate":       rate,
                "acceptance": acceptance,
                "capacity":   capacity,
            },
            "in_maintenance": in_maintenance,
        },
    }
    return ScheduleDocument(
        table="\n".join(lines) + "\n",
        machine=json.dumps(machine, indent=2) + "\n",
    )


_SERIES_COLUMNS = (
    "day", "in_maintenance", "rate", "rate_limit", "deliveries",
    "in_III", "in_IV", "in_V", "rate_violation", "acceptance_violation", "capacity_violation",
)


def occupancy_series(instance, schedule):
    """One row per day ``0..T`` with workshop load, limits and violations."""
    schedule.check(instance)
    profile = LoadProfile.of(instance, schedule.days(instance))
    total = profile.in_maintenance()
    limits = instance.rate_limits()
    rate_violation = profile.rate_violation()
    acceptance_violation = profile.acceptance_violation()
    capacity_violation = profile.capacity_violation()
    if capacity_violation.ndim == 2:
        capacity_violation = capacity_violation.sum(axis=0)

    for day in range(instance.horizon + 1):
        yield {
            "day":                  day,
            "in_maintenance":       int(total[day]),
            "rate":                 round(float(total[day]) / instance.fleet_size, 6),
            "rate_limit":           float(limits[day]),
            "deliveries":           int(profile.delivered[day]),
            "in_III":               int(profile.occupied[LEVEL_ROW[MaintenanceLevel.III], day]),
            "in_IV":                int(profile.occupied[LEVEL_ROW[MaintenanceLevel.IV], day]),
            "in_V":                 int(profile.occupied[LEVEL_ROW[MaintenanceLevel.V], day]),
            "rate_violation":       round(float(rate_violation[day]), 6),
            "acceptance_violation": int(acceptance_violation[day]),
            "capacity_violation":   int(capacity_violation[day]),
        }


def serialize_series(rows):
    """Comma-separated text with a header line."""
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=_SERIES_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return out.getvalue()


def load_params(text, instance=None):
    """
    ``SaParams`` from a parameter document. Keys are the ``SaParams`` field
    names; an ``initial_schedule`` maps train ids to delivery days.
    """
    model = read_document(SaParamsModel, text)
    values = model.model_dump(exclude_unset=True)
    if "initial_schedule" in values and values["initial_schedule"] is not None:
        schedule = Schedule(values["initial_schedule"])
        if instance is not None:
            schedule.check(instance)
        values["initial_schedule"] = schedule
    try:
        return SaParams(**values)
    except ConfigurationError as e:
        raise InstanceValidationError([str(e)]) from None
