import json
import math
import os
import pathlib

import numpy as np
import pytest

import ccsim

DATA = pathlib.Path(os.environ.get("CCSIM_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))


def scalar_model(a=0.9, b=0.5, bw=1.0):
    box = lambda lo, hi: ccsim.Box(np.array([lo]), np.array([hi]))
    return ccsim.LtiModel(
        np.array([[a]]), np.array([[b]]), np.array([[bw]]), np.array([[1.0]]), box(-10.0, 10.0), box(-1.0, 1.0)
    )


def test_coupling_round_trip():
    for d in [0.0, 0.012, 0.3]:
        assert ccsim.delta_from_gamma_norm(ccsim.radius_from_delta(d)) == pytest.approx(d, abs=1e-12)
    with pytest.raises(ValueError):
        ccsim.radius_from_delta(1.0)


def test_sample_coupling_hit_rate():
    gamma = np.array([1.0])
    w_hat, w, hit = ccsim.sample_coupling(gamma, 20000, seed=3)
    hit = np.asarray(hit)
    assert w.shape == (20000, 1)
    assert abs(hit.mean() - (1.0 - ccsim.delta_from_gamma_norm(1.0))) < 0.015
    assert np.allclose(w[hit] - w_hat[hit], 1.0)


def test_optimize_and_verify_1d():
    model = scalar_model()
    betas = [np.array([-0.05]), np.array([0.05])]
    rel = ccsim.optimize_epsilon(model, betas, 0.0, lambda_steps=19)
    assert rel.epsilon == pytest.approx(0.5, rel=1e-3)
    report = ccsim.verify_relation(model, betas, rel)
    assert report.passed
    assert ccsim.scalar_oracle(0.9, 1.0, 0.05, 0.0) == pytest.approx(0.5)


def test_quantify_reports_infeasible_as_none():
    model = scalar_model()
    betas = [np.array([-0.05]), np.array([0.05])]
    rows = ccsim.quantify(model, betas, [0.0, 0.018], lambda_steps=19)
    assert rows[0][1] == pytest.approx(0.5, rel=1e-3)
    assert rows[1][1] == pytest.approx(0.05, rel=0.02)


def test_compose_transitive():
    a = ccsim.SimRelation()
    a.epsilon, a.delta = 0.1087, 0.0
    b = ccsim.SimRelation()
    b.kind = ccsim.RelationKind.model_order_reduction
    b.epsilon, b.delta = 0.2413, 0.0161
    assert ccsim.compose_transitive(a, b) == (pytest.approx(0.35), pytest.approx(0.0161))


def test_grid_and_loader():
    model, grid = ccsim.load_model(str(DATA / "parking1d.json"))
    assert grid.cells_per_axis == [200]
    g = ccsim.build_grid(model, grid, with_kernel=False)
    assert g.num_cells() == 200
    assert g.representative(g.project(np.array([5.0])))[0] == pytest.approx(5.05)


def test_cmd_quantify_to_directory(tmp_path):
    cfg = ccsim.RunConfig()
    cfg.model_path = str(DATA / "parking1d.json")
    cfg.deltas = [0.0, 0.012]
    cfg.lambda_steps = 19
    cfg.out_dir = str(tmp_path)
    cfg.timing = False
    code, out, err = ccsim.cmd_quantify(cfg)
    assert code == 0, err
    lines = (tmp_path / "frontier.csv").read_text().strip().splitlines()
    assert len(lines) == 3


def test_cmd_reports_config_error(tmp_path):
    cfg = ccsim.RunConfig()
    cfg.model_path = str(tmp_path / "missing.json")
    cfg.deltas = [0.0]
    code, _, err = ccsim.cmd_quantify(cfg)
    assert code == 3
    assert err
