# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Instance and schedule documents, parameter files and instance generation.
"""

from .schema import SCHEMA_VERSION
from .documents import *
from .generator import GeneratorConfig, Rush, generate, load_generator_config
