# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
hlmp - High-level maintenance planning for EMU train fleets.
"""

from . import fleet
from . import model
from . import solvers
from . import files
