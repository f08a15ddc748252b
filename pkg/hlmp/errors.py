# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Exceptions raised by the planning library.
"""


class HlmpError(Exception):
    """Root of all planning errors."""


class ConfigurationError(HlmpError):
    """Regulation table, solver parameters or generator config are unusable."""


class DomainError(HlmpError, ValueError):
    """A numeric argument lies outside the domain of a formula."""


class EmptyInputError(HlmpError, ValueError):
    """An operation that needs at least one train got an empty fleet."""


class InfeasibleTrainError(HlmpError):
    """A train's delivery window is empty."""

    def __init__(self, train_id, detail=""):
        self.train_id = train_id
        message = f"train {train_id} has an empty delivery window"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class InstanceSyntaxError(HlmpError):
    """An instance or schedule document is not well-formed."""

    def __init__(self, line, column, msg):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {msg}")


class InstanceValidationError(HlmpError):
    """A well-formed document violates the model. Lists every problem found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


class ScheduleError(HlmpError):
    """A schedule misses trains, names unknown trains or leaves a window."""

    def __init__(self, train_ids, detail="invalid delivery"):
        self.train_ids = sorted(train_ids)
        super().__init__(f"{detail}: {', '.join(self.train_ids)}")


class SearchTooLargeError(HlmpError):
    """The exact solver refuses a search space above its node limit."""

    def __init__(self, nodes, limit):
        self.nodes = nodes
        self.limit = limit
        super().__init__(f"search space of {nodes} schedules exceeds the limit of {limit}")


class GenerationError(HlmpError):
    """The instance generator cannot satisfy its configuration."""


class ConsistencyError(HlmpError):
    """Incremental bookkeeping disagrees with a full recomputation."""
