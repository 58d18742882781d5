import os
import pathlib

import pytest

import wnav

ROOT = pathlib.Path(__file__).resolve().parents[2]
SCENARIOS = ROOT / "scenarios"


def bright_row_map():
    cells = []
    for row in range(4):
        for col in range(4):
            cells.append({"x": col + 0.5, "y": row + 0.5, "gain_norm": 1.0 if row == 0 else 0.1})
    return wnav.ingest_radio_map({"cell_size_m": 1.0, "origin_m": [0, 0], "cells": cells})


def test_ingest_and_export_round_trip():
    m = bright_row_map()
    assert (m.width, m.height, m.traversable_count) == (4, 4, 16)
    assert m.gain(0, 0) == pytest.approx(1.0)
    again = wnav.ingest_radio_map(m.export_json())
    assert again.hash() == m.hash()


def test_dp_detours_where_astar_does_not():
    m = bright_row_map()
    a = wnav.plan_astar(m, (0.5, 3.5), (3.5, 3.5), 0.6)
    d = wnav.plan_dpwa(m, (0.5, 3.5), (3.5, 3.5), 0.6)
    assert not a["feasible"]
    assert d["feasible"] and d["avg_gain"] >= 0.6
    assert d["path_length_m"] > a["path_length_m"]
    n = wnav.plan_nwa(m, (0.5, 3.5), (3.5, 3.5))
    assert n["avg_gain"] >= a["avg_gain"]


def test_state_count_and_errors():
    m = wnav.synthesize_map({"width_cells": 8, "height_cells": 8, "access_points": [{"position_m": [0, 0]}]})
    assert wnav.state_count(m, 8) == 64 * 9 * 91
    with pytest.raises(wnav.InputError):
        wnav.plan_astar(m, (0.5, 0.5), (0.5, 0.5))


def test_heatmap_png():
    png = wnav.render_heatmap_png(bright_row_map(), 4)
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


def test_scott_with_oracle_script():
    m = bright_row_map()
    cfg = {"n_areas": 2, "max_distance_m": 1.5}
    script = wnav.oracle_mock_script(m, (0.5, 3.5), (3.5, 3.5), 0.6, cfg)
    t = wnav.run_scott_mock(m, (0.5, 3.5), (3.5, 3.5), 0.6, script, cfg)
    assert t["status"] == "success"
    assert t["result"]["avg_gain"] >= 0.6


def test_scott_missing_reply_is_transport_failure():
    m = bright_row_map()
    t = wnav.run_scott_mock(m, (0.5, 3.5), (3.5, 3.5), 0.6, {"replies": {}})
    assert t["status"] == "transport-failure"


@pytest.mark.skipif(not SCENARIOS.exists(), reason="scenario files not available")
def test_scenario_table():
    rows = wnav.run_scenario_table(SCENARIOS / "path2_wall_to_wall.json", "json", runs=1)
    names = [r["algorithm"] for r in rows]
    assert names == ["A*", "N-WA*", "DP-WA*", "SCoTT", "SCoTT-DP-WA*"]
    assert rows[2]["avg_path_gain"] >= 0.4
