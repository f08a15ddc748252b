# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Simulated annealing over delivery schedules.

The hard structure (one delivery per train, inside its window) is kept by
construction; rate, acceptance and capacity limits enter the energy as
weighted penalties on top of the wasted remaining mileage.

Random numbers come from numpy's PCG64. A run seeded with ``seed`` derives two
independent streams from ``SeedSequence(seed)``: child 0 drives the
temperature calibration walk, child 1 the search. Restarts take child ``k`` of
``SeedSequence(seed).spawn(restarts)`` as their own root.
"""

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from hlmp.errors import ConfigurationError, ConsistencyError
from hlmp.model import LoadProfile, Evaluation, Schedule, evaluate, model_size

__all__ = [
    "StopReason", "SaParams", "default_penalty_weight", "TemperatureStep", "SaResult",
    "energy", "initial_solution", "neighbor", "metropolis_accept", "initial_temperature_for",
    "Annealer", "calibrate_initial_temperature", "solve", "solve_restarts",
]

log = logging.getLogger(__name__)


class StopReason(enum.Enum):
    ACCEPTANCE_BELOW_EPSILON = "acceptance_below_epsilon"
    ENERGY_STABLE            = "energy_stable"
    ITERATION_CAP            = "iteration_cap"


@dataclass(frozen=True)
class SaParams:
    # Penalty weights for rate, acceptance and capacity violations.
    # None picks a weight at which one unit of violation outweighs any mileage gain.
    beta_rate:             Optional[float] = None
    beta_accept:           Optional[float] = None
    beta_capacity:         Optional[float] = None
    cooling_rate:          float = 0.97     # h3
    inner_generated_coeff: float = 3.0      # h1: moves generated per temperature, per variable
    inner_accepted_coeff:  float = 6.0      # h2: moves accepted per temperature, per variable
    min_accept_rate:       float = 0.001    # epsilon
    stability_count:       int = 30
    stability_rel_tol:     float = 1e-4
    initial_temp:          Optional[float] = None   # calibrated when None
    seed:                  int = 0
    initial_schedule:      Optional[Schedule] = None  # None: deliver on expiry days
    max_evaluations:       int = 10**6
    check_incremental:     bool = False

    def __post_init__(self):
        problems = []
        for name in ("beta_rate", "beta_accept", "beta_capacity"):
            value = getattr(self, name)
            if value is not None and value < 0:
                problems.append(f"{name} must be >= 0")
        if not 0.0 < self.cooling_rate < 1.0:
            problems.append("cooling_rate must lie in (0, 1)")
        if self.inner_generated_coeff < 1 or self.inner_accepted_coeff < 1:
            problems.append("inner loop coefficients must be >= 1")
        if not 0.0 < self.min_accept_rate < 1.0:
            problems.append("min_accept_rate must lie in (0, 1)")
        if self.stability_count < 1:
            problems.append("stability_count must be >= 1")
        if self.stability_rel_tol < 0:
            problems.append("stability_rel_tol must be >= 0")
        if self.initial_temp is not None and self.initial_temp <= 0:
            problems.append("initial_temp must be > 0")
        if not 0 <= self.seed < 2**64:
            problems.append("seed must be an unsigned 64-bit integer")
        if self.max_evaluations < 1:
            problems.append("max_evaluations must be >= 1")
        if problems:
            raise ConfigurationError("; ".join(problems))

    def weights(self, instance):
        """(rate, acceptance, capacity) penalty weights for ``instance``."""
        default = default_penalty_weight(instance)
        return tuple(default if beta is None else float(beta)
                     for beta in (self.beta_rate, self.beta_accept, self.beta_capacity))


def default_penalty_weight(instance):
    """
    Mileage-loss range of the instance (plus one train-km) times the fleet size.

    A single unit of acceptance or capacity violation then costs more than the
    gap between the best and the worst possible mileage loss, and so does one
    train's worth (1/fleet) of rate violation.
    """
    spread = math.fsum((len(instance.windows[train.id]) - 1) * train.km_per_day
                       for train in instance.trains)
    return (spread + 1.0) * instance.fleet_size


@dataclass(frozen=True)
class TemperatureStep:
    index:           int
    temperature:     float
    mean_energy:     float
    acceptance_rate: float
    generated:       int
    accepted:        int
    best_energy:     float


@dataclass(frozen=True)
class SaResult:
    best_schedule:       Schedule
    best_evaluation:     Evaluation
    best_energy:         float
    energy_trace:        Tuple[TemperatureStep, ...]
    stop_reason:         StopReason
    initial_temperature: float
    evaluations:         int
    weights:             Tuple[float, float, float]
    restart:             int = 0


def energy(instance, schedule, params=None):
    """Mileage loss plus weighted violation totals, computed from scratch."""
    params = params or SaParams()
    evaluation = evaluate(instance, schedule)
    return _energy_of(evaluation, params.weights(instance))


def _energy_of(evaluation, weights):
    totals = evaluation.violation_totals()
    return evaluation.mileage_loss + sum(w * v for w, v in zip(weights, totals))


def initial_solution(instance, params=None):
    """Provided schedule (validated), else every train delivered on its expiry day."""
    params = params or SaParams()
    if params.initial_schedule is not None:
        return params.initial_schedule.check(instance)
    return Schedule({train.id: instance.windows[train.id].clamp(train.expired_day)
                     for train in instance.trains})


def _draw_move(windows, days, rng):
    """Random train and a different day of its window (same day for width-1 windows)."""
    i = int(rng.integers(len(windows)))
    window = windows[i]
    if len(window) == 1:
        return i, days[i]
    day = window.begin_day + int(rng.integers(len(window) - 1))
    if day >= days[i]:
        day += 1
    return i, day


def neighbor(schedule, instance, rng):
    """``schedule`` with one random train moved to another day of its window."""
    windows = [instance.windows[train.id] for train in instance.trains]
    days = schedule.days(instance)
    i, day = _draw_move(windows, days, rng)
    return schedule.moved(instance.trains[i].id, day)


def metropolis_accept(delta, temperature, rng):
    """Downhill and flat moves always pass; uphill ones with probability exp(-delta/T)."""
    if delta <= 0:
        return True
    return rng.random() < math.exp(-delta / temperature)


def initial_temperature_for(mean_rise, acceptance=0.95):
    """Temperature at which a move of ``mean_rise`` is accepted with ``acceptance``."""
    return mean_rise / math.log(1.0 / acceptance)


class _SearchState:
    """Current delivery days with energy kept up to date one move at a time."""

    def __init__(self, instance, days, weights):
        self.instance = instance
        self.weights = weights
        self.days = list(days)
        self.profile = LoadProfile.of(instance, self.days)
        self._km_per_day = [train.km_per_day for train in instance.trains]
        self._pending = None
        self.resync()

    @property
    def energy(self):
        return self.loss + self.penalty

    def _full_loss(self):
        return math.fsum((train.expired_day - day) * km
                         for train, day, km in zip(self.instance.trains, self.days, self._km_per_day))

    def resync(self):
        """Recompute loss and penalty from scratch to shed rounding drift."""
        self.loss = self._full_loss()
        self.penalty = self.profile.penalty(self.weights)

    def propose(self, i, day):
        """Apply a tentative move and return its energy change. Follow with commit or revert."""
        old = self.days[i]
        if day == old:
            self._pending = None
            return 0.0
        _, old_days = self.profile.footprint(i, old)
        _, new_days = self.profile.footprint(i, day)
        touched = np.union1d(old_days, new_days)
        before = self.profile.penalty(self.weights, touched)
        self.profile.remove(i, old)
        self.profile.add(i, day)
        after = self.profile.penalty(self.weights, touched)
        d_loss = (old - day) * self._km_per_day[i]
        self._pending = (i, old, day, d_loss, after - before)
        return d_loss + (after - before)

    def commit(self):
        if self._pending is None:
            return
        i, _, day, d_loss, d_penalty = self._pending
        self.days[i] = day
        self.loss += d_loss
        self.penalty += d_penalty
        self._pending = None

    def revert(self):
        if self._pending is None:
            return
        i, old, day, _, _ = self._pending
        self.profile.remove(i, day)
        self.profile.add(i, old)
        self._pending = None

    def verify(self):
        schedule = Schedule.from_days(self.instance, self.days)
        full = _energy_of(evaluate(self.instance, schedule), self.weights)
        if not math.isclose(self.energy, full, rel_tol=1e-9, abs_tol=1e-6):
            raise ConsistencyError(f"incremental energy {self.energy!r} != full {full!r}")


class Annealer:
    """
    Simulated annealing search for one seed.

    Search sequence:
    1. Start from the initial schedule: expiry days, or a provided plan.
    2. Calibrate the initial temperature with a random walk, unless given.
    3. At temperature sigma_i, draw single-train moves and accept them by the
       Metropolis rule, until h1*|X| moves were generated or h2*|X| accepted.
       |X| is the number of binary delivery variables, the sum of window widths.
    4. Cool geometrically: sigma_i = sigma_0 * h3**i.
    5. Stop when the acceptance rate drops below epsilon, when the mean energy
       changes by less than the relative tolerance for ``stability_count``
       consecutive temperatures, or when ``max_evaluations`` moves were drawn.

    The best schedule ever visited is returned.
    """

    # Random walk length and target uphill acceptance for the initial temperature.
    _CALIBRATION_SAMPLES = 200
    _CALIBRATION_ACCEPTANCE = 0.95

    def __init__(self, instance, params=None, *, seed_sequence=None, restart=0):
        self.instance = instance
        self.params = params or SaParams()
        self.restart = restart
        root = seed_sequence or np.random.SeedSequence(self.params.seed)
        self.calibration_rng = _child_rng(root, 0)
        self.search_rng = _child_rng(root, 1)
        self.weights = self.params.weights(instance)
        self.windows = [instance.windows[train.id] for train in instance.trains]
        self.size = model_size(instance).variables

    def calibrate(self, schedule):
        state = _SearchState(self.instance, schedule.days(self.instance), self.weights)
        rises = []
        for _ in range(self._CALIBRATION_SAMPLES):
            i, day = _draw_move(self.windows, state.days, self.calibration_rng)
            delta = state.propose(i, day)
            state.commit()
            if delta > 0:
                rises.append(delta)
        if not rises:
            return 1.0
        return initial_temperature_for(math.fsum(rises) / len(rises),
                                       self._CALIBRATION_ACCEPTANCE)

    def run(self):
        params = self.params
        start = initial_solution(self.instance, params)
        sigma0 = params.initial_temp or self.calibrate(start)

        state = _SearchState(self.instance, start.days(self.instance), self.weights)
        best_days, best_energy = list(state.days), state.energy

        generated_limit = params.inner_generated_coeff * self.size
        accepted_limit = params.inner_accepted_coeff * self.size
        rng = self.search_rng

        log.info("annealing %d trains, %d variables, sigma0=%.6g",
                 self.instance.fleet_size, self.size, sigma0)

        trace = []
        stop = None
        total = 0
        stable = 0
        prev_mean = None
        step = 0
        while stop is None:
            sigma = sigma0 * params.cooling_rate ** step
            generated = accepted = 0
            energy_sum = 0.0
            while generated < generated_limit and accepted < accepted_limit:
                if total >= params.max_evaluations:
                    stop = StopReason.ITERATION_CAP
                    break
                i, day = _draw_move(self.windows, state.days, rng)
                delta = state.propose(i, day)
                generated += 1
                total += 1
                if metropolis_accept(delta, sigma, rng):
                    state.commit()
                    accepted += 1
                    if params.check_incremental:
                        state.verify()
                    if state.energy < best_energy:
                        best_days, best_energy = list(state.days), state.energy
                else:
                    state.revert()
                energy_sum += state.energy
            state.resync()

            if generated == 0:
                break
            mean = energy_sum / generated
            rate = accepted / generated
            trace.append(TemperatureStep(step, sigma, mean, rate, generated, accepted, best_energy))
            log.debug("T[%d]=%.6g mean=%.6g accept=%.4f best=%.6g",
                      step, sigma, mean, rate, best_energy)
            if stop is not None:
                break

            if rate < params.min_accept_rate:
                stop = StopReason.ACCEPTANCE_BELOW_EPSILON
            elif prev_mean is not None and \
                    abs(mean - prev_mean) < params.stability_rel_tol * max(abs(prev_mean), 1.0):
                stable += 1
                if stable >= params.stability_count:
                    stop = StopReason.ENERGY_STABLE
            else:
                stable = 0
            prev_mean = mean
            step += 1

        best_schedule = Schedule.from_days(self.instance, best_days)
        best_evaluation = evaluate(self.instance, best_schedule)
        log.info("stopped after %d temperatures (%s), best energy %.6g, feasible=%s",
                 len(trace), stop.value, best_energy, best_evaluation.feasible)
        return SaResult(
            best_schedule=best_schedule,
            best_evaluation=best_evaluation,
            best_energy=_energy_of(best_evaluation, self.weights),
            energy_trace=tuple(trace),
            stop_reason=stop,
            initial_temperature=sigma0,
            evaluations=total,
            weights=self.weights,
            restart=self.restart,
        )


def _child_rng(root, index):
    child = np.random.SeedSequence(root.entropy, spawn_key=root.spawn_key + (index,))
    return np.random.Generator(np.random.PCG64(child))


def calibrate_initial_temperature(instance, schedule, params, rng):
    """
    Initial temperature from a 200-step random walk starting at ``schedule``:
    the mean uphill energy change is accepted with probability 0.95.
    Falls back to 1.0 when no step went uphill.
    """
    annealer = Annealer(instance, params)
    annealer.calibration_rng = rng
    return annealer.calibrate(schedule.check(instance))


def solve(instance, params=None):
    """Anneal once with ``params.seed``."""
    return Annealer(instance, params).run()


def solve_restarts(instance, params=None, restarts=1, workers=None):
    """
    ``restarts`` independent runs on a thread pool, at most ``workers`` at a time
    (all of them when ``workers`` is None).
    The best by (energy, restart index) wins, so the answer does not depend on
    ``workers``.
    """
    params = params or SaParams()
    if restarts < 1:
        raise ConfigurationError("restarts must be >= 1")
    roots = np.random.SeedSequence(params.seed).spawn(restarts)

    def _run(k):
        return Annealer(instance, params, seed_sequence=roots[k], restart=k).run()

    with ThreadPoolExecutor(max_workers=workers or restarts) as executor:
        results = list(executor.map(_run, range(restarts)))
    return min(results, key=lambda result: (result.best_energy, result.restart))
