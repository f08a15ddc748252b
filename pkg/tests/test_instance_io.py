# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Tests for instance, schedule and parameter documents and the instance generator.
"""

import json
import unittest
from pathlib import Path

import numpy as np
from parameterized import parameterized

from hlmp.errors import (
    ConfigurationError, GenerationError, InstanceSyntaxError, InstanceValidationError,
    ScheduleError,
)
from hlmp.files import *
from hlmp.fleet import LevelRule, MaintenanceLevel, RegulationTable, TrainRecord
from hlmp.model import Instance, RatePeriod, Schedule, evaluate
from hlmp.solvers.annealer import SaParams
from hlmp.solvers.exact import search_space_size
from hlmp.util import test_util

III, IV, V = MaintenanceLevel.III, MaintenanceLevel.IV, MaintenanceLevel.V

CRH2_TRIO = Path("tests/data/instances/crh2_trio.instance").read_text()


def edited(**changes):
    """The crh2_trio document with top-level keys replaced."""
    document = json.loads(CRH2_TRIO)
    document.update(changes)
    return json.dumps(document)


def edited_train(index, **changes):
    document = json.loads(CRH2_TRIO)
    document["fleet"][index].update(changes)
    return json.dumps(document)


def problems_of(text):
    try:
        parse_instance(text)
    except InstanceValidationError as e:
        return e.problems
    raise AssertionError("document was accepted")


class ParseInstanceTests(unittest.TestCase):

    def test_crh2_trio(self):
        instance = parse_instance(CRH2_TRIO)
        self.assertEqual([str(instance.windows[t.id]) for t in instance.trains],
                         ["[96,139]", "[126,208]", "[18,142]"])
        self.assertEqual(instance.horizon, 208)
        self.assertEqual(instance.rate_periods[1].label, "SpringRush")
        self.assertEqual(instance.train("EMU_072").level, IV)

    def test_overlapping_periods(self):
        problems = problems_of(edited(rate_periods=[
            {"begin_day": 0, "end_day": 100, "max_rate": 0.5},
            {"begin_day": 90, "end_day": 208, "max_rate": 0.5},
        ]))
        self.assertTrue(any("overlaps" in p for p in problems), problems)

    def test_unknown_level(self):
        problems = problems_of(edited_train(2, level="VI"))
        self.assertTrue(any("EMU_090" in p and "'VI'" in p for p in problems), problems)

    def test_every_problem_listed(self):
        document = json.loads(CRH2_TRIO)
        document["fleet"][0]["level"] = "VI"
        document["fleet"][1]["expired_day"] = 181.5
        document["daily_acceptance_trains"] = 0
        document["rate_periods"] = [{"begin_day": 0, "end_day": 50, "max_rate": 0.5}]
        problems = problems_of(json.dumps(document))
        self.assertGreaterEqual(len(problems), 1)
        # Layout errors are reported before model checks run.
        self.assertTrue(any("daily_acceptance_trains" in p for p in problems), problems)

    def test_model_problems_together(self):
        document = json.loads(CRH2_TRIO)
        document["fleet"][0]["level"] = "VI"
        document["fleet"][1]["expired_day"] = 181.5
        document["rate_periods"] = [{"begin_day": 0, "end_day": 50, "max_rate": 0.5}]
        problems = problems_of(json.dumps(document))
        self.assertTrue(any("'VI'" in p for p in problems), problems)
        self.assertTrue(any("whole day" in p for p in problems), problems)
        self.assertTrue(any("rate periods end on day 50" in p for p in problems), problems)

    def test_syntax_error_position(self):
        with self.assertRaises(InstanceSyntaxError) as cm:
            parse_instance('{\n  "schema_version": 1,\n  "fleet": [,]\n}')
        self.assertEqual(cm.exception.line, 3)
        self.assertEqual(cm.exception.column, 13)

    @parameterized.expand([
        ["version",     dict(schema_version=2), "schema_version"],
        ["unknown_key", dict(colour="blue"), "colour"],
        ["rate",        dict(rate_periods=[{"begin_day": 0, "end_day": 208, "max_rate": 2}]),
                        "max_rate"],
    ])
    def test_layout_errors(self, name, changes, where):
        problems = problems_of(edited(**changes))
        self.assertTrue(any(where in p for p in problems), problems)

    def test_missing_level_rule(self):
        document = json.loads(CRH2_TRIO)
        del document["regulations"]["levels"]["V"]
        problems = problems_of(json.dumps(document))
        self.assertTrue(any("missing V" in p for p in problems), problems)

    def test_carryover_and_units(self):
        instance = parse_instance(edited_train(
            0, unit_count=2, carryover={"start_day": -5, "duration_days": 15, "level": "V"}))
        train = instance.train("EMU_001")
        self.assertEqual(train.km_per_day, 3200)
        self.assertEqual(train.carryover_level, V)

    def test_round_trip_generated(self):
        for seed in range(100):
            instance = generate(GeneratorConfig(fleet_size=8, seed=seed, carryover_probability=0.5))
            self.assertEqual(parse_instance(serialize_instance(instance)), instance, f"seed {seed}")

    def test_round_trip_crh2_trio(self):
        instance = parse_instance(CRH2_TRIO)
        self.assertEqual(parse_instance(serialize_instance(instance)), instance)


def single_train():
    regs = RegulationTable(
        {level: LevelRule(level, 600_000, 0, 3200, 3, 1) for level in MaintenanceLevel}, 600_000)
    return Instance.build([TrainRecord("T0", 1, 1600, 100, III, IV)], regs,
                          [RatePeriod(0, 102, 1.0)], 1)


class ScheduleDocumentTests(unittest.TestCase):

    def test_single_train_table(self):
        instance = single_train()
        schedule = Schedule({"T0": 101})
        document = serialize_schedule(instance, schedule, evaluate(instance, schedule))
        lines = document.table.splitlines()
        self.assertEqual(lines[0].split(),
                         ["train", "level", "window", "delivery", "days_early", "loss_km"])
        self.assertEqual(lines[1].split(), ["T0", "III", "[100,102]", "101", "-1", "-1600.0", "late"])
        self.assertEqual(len(lines[1]) - len("  late"), len(lines[0]))
        self.assertIn("total loss_km: -1600.0", lines)
        self.assertIn("feasible:      yes", lines)
        self.assertIn("late trains:   T0", lines)

    def test_machine_form(self):
        instance = parse_instance(CRH2_TRIO)
        schedule = Schedule({"EMU_001": 96, "EMU_072": 181, "EMU_090": 80})
        document = serialize_schedule(instance, schedule, evaluate(instance, schedule))
        data = json.loads(document.machine)
        self.assertEqual(data["deliveries"][0],
                         {"id": "EMU_001", "level": "III", "window": [96, 139], "delivery_day": 96,
                          "days_early": 31, "loss_km": 49_600.0})
        self.assertEqual(data["summary"]["mileage_loss_km"], 49_600.0)
        self.assertEqual(len(data["summary"]["in_maintenance"]), 209)
        self.assertEqual(parse_schedule(document.machine), schedule)
        self.assertEqual(document, serialize_schedule(instance, schedule, evaluate(instance, schedule)))

    def test_feasible_flag_matches_violations(self):
        rng = np.random.Generator(np.random.PCG64(8))
        for seed in range(20):
            instance = test_util.random_small_instance(seed)
            schedule = Schedule({t.id: int(rng.choice(list(instance.windows[t.id])))
                                 for t in instance.trains})
            summary = json.loads(serialize_schedule(
                instance, schedule, evaluate(instance, schedule)).machine)["summary"]
            violations = summary["violations"]
            self.assertEqual(summary["feasible"],
                             violations["rate"] == 0 and violations["acceptance"] == 0
                             and violations["capacity"] == 0)

    def test_mismatched_evaluation(self):
        instance = parse_instance(CRH2_TRIO)
        schedule = Schedule({"EMU_001": 96, "EMU_072": 181, "EMU_090": 80})
        other = single_train()
        with self.assertRaises(ValueError):
            serialize_schedule(instance, schedule, evaluate(other, Schedule({"T0": 100})))

    def test_parse_schedule_checks(self):
        text = json.dumps({"schema_version": 1, "deliveries": [
            {"id": "EMU_001", "delivery_day": 95},
            {"id": "EMU_072", "delivery_day": 181},
            {"id": "EMU_090", "delivery_day": 80},
        ]})
        self.assertEqual(parse_schedule(text)["EMU_001"], 95)
        with self.assertRaises(ScheduleError) as cm:
            parse_schedule(text, parse_instance(CRH2_TRIO))
        self.assertEqual(cm.exception.train_ids, ["EMU_001"])

    def test_duplicate_delivery(self):
        text = json.dumps({"schema_version": 1, "deliveries": [
            {"id": "A", "delivery_day": 1}, {"id": "A", "delivery_day": 2}]})
        with self.assertRaises(InstanceValidationError):
            parse_schedule(text)


class SeriesTests(unittest.TestCase):

    def test_series(self):
        instance = parse_instance(CRH2_TRIO)
        schedule = Schedule({"EMU_001": 96, "EMU_072": 181, "EMU_090": 80})
        rows = list(occupancy_series(instance, schedule))
        self.assertEqual(len(rows), 209)
        self.assertEqual(rows[85]["in_maintenance"], 1)
        self.assertEqual(rows[96]["in_maintenance"], 2)
        self.assertEqual(rows[96]["deliveries"], 1)
        self.assertEqual(rows[115]["in_maintenance"], 1)
        self.assertEqual(rows[100]["in_V"], 1)
        self.assertEqual(rows[30]["rate_limit"], 0.34)
        text = serialize_series(rows)
        self.assertTrue(text.startswith("day,in_maintenance,rate,rate_limit,deliveries,"))
        self.assertEqual(len(text.splitlines()), 210)


class ParamsTests(unittest.TestCase):

    def test_defaults(self):
        self.assertEqual(load_params("{}"), SaParams())

    def test_overrides(self):
        params = load_params('{"cooling_rate": 0.9, "seed": 12, "beta_rate": 5}')
        self.assertEqual(params.cooling_rate, 0.9)
        self.assertEqual(params.seed, 12)
        self.assertEqual(params.beta_rate, 5.0)

    def test_initial_schedule(self):
        params = load_params('{"initial_schedule": {"EMU_001": 96, "EMU_072": 181, "EMU_090": 80}}',
                             parse_instance(CRH2_TRIO))
        self.assertEqual(params.initial_schedule["EMU_001"], 96)

    @parameterized.expand([
        ["unknown", '{"temperature": 3}'],
        ["range",   '{"cooling_rate": 1.5}'],
        ["type",    '{"seed": "abc"}'],
    ])
    def test_rejected(self, name, text):
        with self.assertRaises(InstanceValidationError):
            load_params(text)


class GeneratorTests(unittest.TestCase):

    def test_deterministic(self):
        config = GeneratorConfig(seed=42)
        self.assertEqual(generate(config), generate(config))
        self.assertNotEqual(generate(config), generate(GeneratorConfig(seed=43)))

    def test_windows_inside_horizon(self):
        for seed in range(20):
            instance = generate(GeneratorConfig(seed=seed))
            self.assertEqual(instance.horizon, 365)
            for window in instance.windows.values():
                self.assertGreaterEqual(window.begin_day, 1)
                self.assertLessEqual(window.end_day, 365)

    def test_oracle_sized(self):
        config = GeneratorConfig(fleet_size=6, horizon_day=60, expiry_range_day=(5, 50),
                                 offset_scale=0.04, seed=3)
        instance = generate(config)
        self.assertTrue(all(len(w) <= 8 for w in instance.windows.values()))
        self.assertLessEqual(search_space_size(instance), 8 ** 6)

    def test_single_level_mix(self):
        instance = generate(GeneratorConfig(level_mix=(1.0, 0.0, 0.0), seed=9))
        self.assertTrue(all(t.level is III for t in instance.trains))
        self.assertTrue(all(t.next_level in (IV, V) for t in instance.trains))

    def test_cycle_convention(self):
        instance = generate(GeneratorConfig(fleet_size=60, level_mix=(0.0, 0.5, 0.5), seed=1))
        self.assertTrue(all(t.next_level is III for t in instance.trains))

    def test_rush_periods(self):
        instance = generate(GeneratorConfig(seed=0))
        labels = [p.label for p in instance.rate_periods]
        self.assertEqual(labels, ["", "SpringRush", "", "SummerRush", ""])
        spring = instance.rate_periods[1]
        self.assertEqual(spring.end_day - spring.begin_day + 1, 40)

    def test_windows_cannot_fit(self):
        with self.assertRaises(GenerationError):
            generate(GeneratorConfig(horizon_day=10, expiry_range_day=(50, 60)))

    @parameterized.expand([
        ["mix",     dict(level_mix=(0.5, 0.5, 0.5))],
        ["mileage", dict(daily_mileage_km=(1900.0, 1400.0))],
        ["expiry",  dict(expiry_range_day=(0, 10))],
    ])
    def test_bad_config(self, name, overrides):
        with self.assertRaises(ConfigurationError):
            GeneratorConfig(**overrides)

    def test_config_document(self):
        config = load_generator_config(
            '{"fleet_size": 4, "seed": 5, "rushes": [{"label": "SpringRush", "begin_day": 10,'
            ' "days": 40, "max_rate": 0.05}]}')
        self.assertEqual(config.fleet_size, 4)
        self.assertEqual(config.rushes[0], Rush("SpringRush", 10, 40, 0.05))
        with self.assertRaises(InstanceValidationError):
            load_generator_config('{"fleet": 4}')


if __name__ == "__main__":
    unittest.main()
