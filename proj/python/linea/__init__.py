"""Python interface to the linea scheduling core.

Instances, schedules and anomalies are plain dicts in the layouts described
by the JSON schemas under docs/.
"""

import json

from . import _linea
from ._linea import LineaError

__version__ = _linea.__version__

__all__ = ["LineaError", "Simulator", "check", "export_model", "load", "model_stats", "oracle", "plan", "validate"]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def _decoded(result):
    if result.get("schedule") is not None:
        result["schedule"] = json.loads(result["schedule"])
    return result


def load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def validate(instance):
    """Returns a list of (kind, subject, message) tuples; empty when valid."""
    return _linea.validate(_text(instance))


def model_stats(instance):
    return _linea.model_stats(_text(instance))


def plan(instance, gap=1e-6, time_limit=300.0, node_limit=1000000):
    """Solves the instance by branch-and-bound.

    Returns a dict with status, objective, bound, nodes, seconds and the
    decoded schedule (None when no schedule was found).
    """
    return _decoded(_linea.plan(_text(instance), gap, time_limit, node_limit))


def oracle(instance, max_binaries=20):
    """Solves a tiny instance by enumerating every binary assignment."""
    return _decoded(_linea.oracle(_text(instance), max_binaries))


def export_model(instance, format="mps"):
    return _linea.export_model(_text(instance), format)


def check(instance, schedule):
    """Returns a list of (rule, message) tuples; empty when the schedule is valid."""
    return _linea.check(_text(instance), _text(schedule))


class Simulator:
    """Executes a schedule step by step, with anomalies and replanning."""

    def __init__(self, instance, schedule, auto_replan=False, time_limit=300.0):
        self._sim = _linea.Simulator(_text(instance), _text(schedule), auto_replan, time_limit)

    @property
    def clock(self):
        return self._sim.clock

    @property
    def horizon(self):
        return self._sim.horizon

    @property
    def finished(self):
        return self._sim.finished

    def step(self):
        """Advances one step; returns the events as (step, kind, subject, message)."""
        return self._sim.step()

    def run_to_end(self):
        self._sim.run_to_end()

    def inject(self, anomaly):
        self._sim.inject(_text(anomaly))

    def deviations(self):
        return self._sim.deviations()

    def replan(self, window=None):
        return self._sim.replan(window)

    def plan(self):
        return json.loads(self._sim.plan())

    def trajectory(self):
        return json.loads(self._sim.trajectory())

    def state(self):
        return json.loads(self._sim.state())

    def trace(self):
        return [json.loads(line) for line in self._sim.trace().splitlines()]
