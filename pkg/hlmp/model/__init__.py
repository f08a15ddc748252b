# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Planning model: problem instances, schedules and their evaluation.
"""

from .instance import *
from .evaluation import *
from .rolling import roll_forward
