import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import breakwater as bw

ROOT = Path(os.environ.get("BREAKWATER_SOURCE_DIR", Path(__file__).resolve().parents[2]))
HARBOR = ROOT / "scenarios" / "sochi_like.json"
LATTICE = ROOT / "scenarios" / "lattice_single.json"


@pytest.fixture(scope="module")
def harbor():
    return bw.load_scenario(HARBOR)


def test_scenario_loads(harbor):
    assert harbor.total_segments == 12
    assert len(harbor.baseline.wave_heights) == len(harbor.control_points)
    assert json.loads(harbor.to_json())["name"] == "sochi_like"


def test_base_configuration_scores_one(harbor):
    o = bw.evaluate(harbor, [(0.0, 0.0)] * harbor.total_segments)
    assert o["feasible"]
    assert o["rel_cost"] == 0.0
    assert o["score"] == 1.0
    assert o["wave_heights"] == harbor.baseline.wave_heights


def test_wave_field_shape_and_baseline(harbor):
    field = bw.wave_field(harbor)
    assert field.shape == (harbor.n_rows, harbor.n_cols)
    assert np.nanmax(field) <= 4.0
    shielded = bw.wave_field(harbor, [(10.0, 0.0)] * harbor.total_segments)
    water = field > 0
    assert np.all(shielded[water] <= field[water] * (1 + 1e-12))


def test_convert_round_trip(harbor):
    genes = [(3.0, 20.0), (2.0, -45.0), (1.0, 10.0), (5.0, 90.0)] * 3
    cart = bw.convert(harbor, genes, "angular", "cartesian")
    back = bw.convert(harbor, cart, "cartesian", "angular")
    for (l1, a1), (l2, a2) in zip(genes, back):
        assert l1 == pytest.approx(l2, abs=1e-9)
        assert math.remainder(a1 - a2, 360.0) == pytest.approx(0.0, abs=1e-9)


def test_optimize_small_run():
    s = bw.load_scenario(LATTICE)
    cfg = bw.EAConfig()
    cfg.population_size = 10
    cfg.archive_size = 10
    cfg.generations = 5
    cfg.greedy = True
    h = bw.optimize(s, "spea2", cfg)
    assert h.generations == 5
    assert h.model_runs == 50
    assert h.mask_violations == 0
    front = h.front()
    assert front and all(ind.feasible for ind in front)
    points = [ind.point for ind in front]
    ref = bw.reference_point(points)
    assert bw.hypervolume(points, ref) > 0.0
    again = bw.optimize(s, "spea2", cfg)
    assert [i.point for i in again.front()] == points


def test_de_best_is_monotone():
    s = bw.load_scenario(LATTICE)
    cfg = bw.EAConfig()
    cfg.population_size = 8
    cfg.generations = 6
    best = bw.optimize(s, "de", cfg).best_scalar()
    assert all(b <= a for a, b in zip(best, best[1:]))


def test_metrics_helpers():
    assert bw.hypervolume([[0.0, 2.0], [2.0, 0.0]], [3.0, 3.0]) == 5.0
    assert bw.nondominated([[1.0, 1.0], [2.0, 2.0], [0.0, 3.0]]) == [[1.0, 1.0], [0.0, 3.0]]


def test_errors_map_to_python_exceptions(harbor):
    with pytest.raises(bw.ValidationError):
        bw.scenario_from_json("{}")
    cfg = bw.EAConfig()
    cfg.population_size = 1
    with pytest.raises(bw.ConfigurationError):
        bw.optimize(harbor, "spea2", cfg)
    with pytest.raises(bw.ConfigurationError):
        bw.evaluate(harbor, [(1.0, 0.0)])
