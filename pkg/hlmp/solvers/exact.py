# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Exhaustive solver for small instances, used as ground truth for the annealer.

Trains are assigned in id order, each trying its window days in ascending
order, so the first optimum found is the lexicographically smallest delivery
vector among the schedules of minimum mileage loss.

Pruning drops a partial assignment as soon as it breaks a rate, acceptance
or capacity limit. All three counts only grow as more trains are placed, so
no feasible completion is ever lost.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from hlmp.errors import ConfigurationError, SearchTooLargeError
from hlmp.model import Instance, LoadProfile, Schedule, evaluate

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleLimits:
    max_nodes: int = 10**7   # largest number of complete schedules searched
    prune:     bool = True
    workers:   int = 1       # threads sharing the first train's window


@dataclass(frozen=True)
class OracleResult:
    optimum:        Optional[Schedule]
    optimum_loss:   Optional[float]
    feasible_count: int
    searched_count: int    # product of candidate day counts
    leaves_visited: int    # complete schedules actually reached


def search_space_size(instance, days=None):
    """Number of complete schedules, over ``days`` where given and whole windows elsewhere."""
    candidates = _candidates(instance, days)
    return math.prod(len(candidates[train.id]) for train in instance.trains)


def _candidates(instance, days):
    """Allowed delivery days per train id, ascending."""
    days = days or {}
    unknown = sorted(set(days) - set(instance.index))
    if unknown:
        raise ConfigurationError(f"day restriction for unknown trains: {', '.join(unknown)}")
    candidates = {}
    for train_id, window in instance.windows.items():
        if train_id not in days:
            candidates[train_id] = list(window)
            continue
        allowed = sorted(set(days[train_id]))
        if not allowed or any(day not in window for day in allowed):
            raise ConfigurationError(
                f"train {train_id}: allowed days must be a non-empty subset of {window}")
        candidates[train_id] = allowed
    return candidates


@dataclass
class _Branch:
    loss:     Optional[float] = None
    vector:   Optional[tuple] = None
    feasible: int = 0
    leaves:   int = 0

    def offer(self, loss, vector):
        if self.loss is None or (loss, vector) < (self.loss, self.vector):
            self.loss, self.vector = loss, vector


def _search(instance, order, candidates, first_days, prune):
    """Depth-first search over the assignments whose first train uses ``first_days``."""
    profile = LoadProfile(instance)
    choices = [candidates[instance.trains[i].id] for i in order]
    gains = [instance.trains[i].km_per_day for i in order]
    expired = [instance.trains[i].expired_day for i in order]
    branch = _Branch()
    vector = [0] * len(order)

    def place(depth):
        if depth == len(order):
            branch.leaves += 1
            if not prune:
                days = [0] * len(order)
                for pos, i in enumerate(order):
                    days[i] = vector[pos]
                if not evaluate(instance, Schedule.from_days(instance, days)).feasible:
                    return
            branch.feasible += 1
            # Exactly rounded, whatever the train order.
            loss = math.fsum((e - d) * g for e, d, g in zip(expired, vector, gains))
            branch.offer(loss, tuple(vector))
            return
        i = order[depth]
        days = first_days if depth == 0 else choices[depth]
        for day in days:
            profile.add(i, day)
            if not (prune and profile.violated(profile.footprint(i, day)[1])):
                vector[depth] = day
                place(depth + 1)
            profile.remove(i, day)

    place(0)
    return branch


def solve_exact(instance: Instance, limits=None, *, days=None):
    """
    Minimum-loss feasible schedule by enumeration. Refuses instances whose
    search space exceeds ``limits.max_nodes``.

    ``days`` optionally maps train ids to the delivery days they may use, each
    a non-empty subset of the train's window.
    """
    limits = limits or OracleLimits()
    if limits.workers < 1:
        raise ConfigurationError("workers must be >= 1")
    candidates = _candidates(instance, days)
    nodes = math.prod(len(c) for c in candidates.values())
    if nodes > limits.max_nodes:
        raise SearchTooLargeError(nodes, limits.max_nodes)

    order = sorted(range(instance.fleet_size), key=lambda i: instance.trains[i].id)
    first = candidates[instance.trains[order[0]].id]
    chunks = [first[k::limits.workers] for k in range(limits.workers)]
    chunks = [chunk for chunk in chunks if chunk]
    log.info("enumerating %d schedules over %d trains (prune=%s, workers=%d)",
             nodes, instance.fleet_size, limits.prune, len(chunks))

    with ThreadPoolExecutor(max_workers=len(chunks)) as executor:
        branches = list(executor.map(
            lambda chunk: _search(instance, order, candidates, chunk, limits.prune), chunks))

    merged = _Branch()
    for branch in branches:
        merged.feasible += branch.feasible
        merged.leaves += branch.leaves
        if branch.loss is not None:
            merged.offer(branch.loss, branch.vector)

    optimum = None
    if merged.vector is not None:
        ids = [instance.trains[i].id for i in order]
        optimum = Schedule(dict(zip(ids, merged.vector)))
    return OracleResult(
        optimum=optimum,
        optimum_loss=_loss_of(instance, optimum),
        feasible_count=merged.feasible,
        searched_count=nodes,
        leaves_visited=merged.leaves,
    )


def _loss_of(instance, schedule):
    if schedule is None:
        return None
    return evaluate(instance, schedule).mileage_loss
