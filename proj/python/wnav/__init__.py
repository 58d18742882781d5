"""Python bindings for the wnav planners.

Results come back as plain dicts decoded from the library's JSON output.
"""

import json as _json

from . import _wnav
from ._wnav import GridMap, InputError, TransportError, load_radio_map, state_count

__all__ = [
    "GridMap",
    "InputError",
    "TransportError",
    "ingest_radio_map",
    "load_radio_map",
    "synthesize_map",
    "plan_astar",
    "plan_nwa",
    "plan_dpwa",
    "state_count",
    "render_heatmap_png",
    "oracle_mock_script",
    "run_scott_mock",
    "run_scenario_table",
]


def _doc(value):
    return value if isinstance(value, str) else _json.dumps(value)


def ingest_radio_map(document):
    """Build a map from a radio-map document (dict or JSON text)."""
    return _wnav.ingest_radio_map(_doc(document))


def synthesize_map(spec):
    """Build a synthetic map from a spec (dict or JSON text)."""
    return _wnav.synthesize_map(_doc(spec))


def plan_astar(grid, start, goal, threshold=0.0):
    return _json.loads(_wnav.plan_astar(grid, tuple(start), tuple(goal), threshold))


def plan_nwa(grid, start, goal, threshold=0.0, epsilon=1e-6):
    return _json.loads(_wnav.plan_nwa(grid, tuple(start), tuple(goal), threshold, epsilon))


def plan_dpwa(grid, start, goal, threshold, horizon=None, prune=True):
    return _json.loads(_wnav.plan_dpwa(grid, tuple(start), tuple(goal), threshold, horizon, prune))


def render_heatmap_png(grid, pixels_per_cell=8):
    """PNG bytes of the gain heatmap."""
    return _wnav.render_heatmap_png(grid, pixels_per_cell)


def oracle_mock_script(grid, start, goal, threshold, config=None):
    """Mock-client script that replays the DP-WA* path."""
    raw = _wnav.oracle_mock_script(grid, tuple(start), tuple(goal), threshold, _doc(config or {}))
    return _json.loads(raw)


def run_scott_mock(grid, start, goal, threshold, script, config=None):
    """Run the three-subtask pipeline against scripted replies. Returns the transcript."""
    raw = _wnav.run_scott_mock(grid, tuple(start), tuple(goal), threshold, _doc(script), _doc(config or {}))
    return _json.loads(raw)


def run_scenario_table(path, fmt="json", runs=None):
    """Benchmark table for a scenario file; parsed when fmt is "json"."""
    text = _wnav.run_scenario_table(str(path), fmt, runs)
    return _json.loads(text) if fmt == "json" else text
