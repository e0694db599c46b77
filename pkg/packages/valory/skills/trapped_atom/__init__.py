# -*- coding: utf-8 -*-
# ------------------------------------------------------------------------------
#
#   Copyright 2024 Valory AG
#
#   Licensed under the Apache License, Version 2.0 (the "License");
#   you may not use this file except in compliance with the License.
#   You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#   Unless required by applicable law or agreed to in writing, software
#   distributed under the License is distributed on an "AS IS" BASIS,
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#   See the License for the specific language governing permissions and
#   limitations under the License.
#
# ------------------------------------------------------------------------------

"""
This module contains the trapped atom single-photon source skill.

It simulates a single optically trapped two-level atom driven by short
resonant pulses: Rabi oscillations, photon emission statistics, HBT
correlations and Raman spectroscopy of the ground hyperfine qubit.
"""

from aea.configurations.base import PublicId


PUBLIC_ID = PublicId.from_str("valory/trapped_atom:0.1.0")
LOGGER_NAME = PUBLIC_ID.name
