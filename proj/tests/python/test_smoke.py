import json
import math

import pytest

import mugen


def test_utility_mu_matches_max():
    q = [0.2, 0.7, 0.4]
    total, coeffs = mugen.utility("mu", q)
    assert total == pytest.approx(0.7)
    assert len(coeffs) == 3
    assert mugen.utility("max", q)[0] == pytest.approx(0.7)
    with pytest.raises(Exception):
        mugen.utility("bogus", q)


def test_location_game():
    values = mugen.sample_grid(3, 3.0, 1.0, seed=4)
    assert len(values) == 9
    assert sum(values) == pytest.approx(1.0)
    opp = mugen.opponent_cells(values, 1)
    cells, best = mugen.brute_force_best(values, 2, opp)
    assert mugen.location_reward(values, cells, opp) == pytest.approx(best)
    assert 0.0 <= best <= 1.0


def test_curling_round_trip():
    stones = mugen.sample_hammer_state(seed=3)
    assert all(team in ("hammer", "opponent") for _, _, team in stones)
    after = mugen.simulate_shot(stones, (0.6, 0.5, 1))
    assert mugen.score(after) == -mugen.score(mugen.swap_teams(after))


def test_kernel_estimate_and_ucb():
    samples = [((0.5, 0.5, 1), 1.0), ((0.52, 0.5, 1), 0.0)]
    q, density = mugen.kernel_estimate(samples, (0.51, 0.5, 1))
    assert q == pytest.approx(0.5)
    assert density > 0.0

    means = [0.1, 0.9, 0.3]
    cands = [(0.2, 0.5, 1), (0.5, 0.5, 1), (0.8, 0.5, 1)]
    assert mugen.ucb_plan(cands, lambda i: means[i], budget=64) == 1


def test_diversity():
    assert mugen.diversity([[(0.0, 0.0, 1), (1.0, 1.0, 1)]]) == pytest.approx(math.sqrt(2.0))


def test_train_bump():
    cfg = {"env": {"id": "synthetic_bump"}, "method": "mu", "m": 2, "iterations": 3, "hidden": [4], "seed": 1}
    checkpoint, metrics = mugen.train(cfg)
    assert [row[0] for row in metrics] == [1, 2, 3]
    assert checkpoint["iteration"] == 3
    with pytest.raises(mugen.ConfigError):
        mugen.train({"env": {"id": "synthetic_bump"}})


def test_run_train_command(tmp_path):
    cfg = {"env": {"id": "synthetic_bump"}, "method": "sum", "m": 2, "iterations": 2, "hidden": [4], "seed": 2}
    path = tmp_path / "train.json"
    path.write_text(json.dumps(cfg))
    run_dir, files = mugen.run("train", path, out=tmp_path / "runs")
    assert run_dir.endswith("-s2")
    assert "metrics.csv" in files
    with pytest.raises(mugen.ArtifactError):
        mugen.run("train", path, out=tmp_path / "runs")
    assert mugen.run("train", path, out=tmp_path / "runs", seed=5)[0].endswith("-s5")
