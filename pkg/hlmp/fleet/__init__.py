# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Fleet model: maintenance regulations, train records, delivery windows and occupancy.
"""

from .types import *
from .window import compute_window, planning_horizon, cycle_successor, cycle_predecessors
from .occupancy import (
    CLOSED_INTERVALS, DayInterval, OccupancyIntervals,
    next_expiry, next_expiry_day, occupancy_intervals, service_span, state,
)
