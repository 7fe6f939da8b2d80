# Copyright 2026 The qreal Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Event-driven realization of quantum branches on a never-collapsing state."""

import json

from qreal._core import (
    ConfigError,
    HistoryInconsistent,
    QrealError,
    default_parameters,
    scenario_names,
    schmidt,
    signaling,
    trial,
)
from qreal import _core

__all__ = [
    "ConfigError",
    "HistoryInconsistent",
    "QrealError",
    "audit",
    "default_parameters",
    "run",
    "scenario_names",
    "schmidt",
    "signaling",
    "trial",
]


def _strings(parameters):
    return {str(k): str(v).lower() if isinstance(v, bool) else str(v) for k, v in (parameters or {}).items()}


def run(scenario, trials=10000, seed=1, parameters=None, compare=(), threads=1):
    """Ensemble run; returns the same report as `qreal run`."""
    return json.loads(_core.run_json(scenario, trials, seed, _strings(parameters), list(compare), threads))


def audit(scenario, seeds=10, seed=1, parameters=None):
    """Invariant audit; returns the same report as `qreal audit`."""
    return json.loads(_core.audit_json(scenario, seeds, seed, _strings(parameters)))
