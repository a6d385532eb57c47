import json

import numpy as np
import pytest

import stackbandit as sb

G0 = {
    "d": 1,
    "A_l": 2,
    "A_f": 2,
    "K": 1,
    "leader": [[[1.0], [-1.0]], [[-1.0], [0.0]]],
    "followers": [[[[1.0], [0.0]], [[0.0], [1.0]]]],
}


@pytest.fixture
def g0():
    return sb.game_from_dict(G0)


def test_g0_best_response_and_utility(g0):
    assert sb.best_response(g0, [1.0], [0.7, 0.3], 0) == 0
    assert sb.best_response(g0, [1.0], [0.5, 0.5], 0) == 0
    assert sb.best_response(g0, [1.0], [0.3, 0.7], 0) == 1
    assert sb.utility_vector(g0, [1.0], [0.7, 0.3]) == pytest.approx([0.4])


def test_g0_menu(g0):
    menu = sb.extreme_points(g0, [1.0], 0.01)
    pts = sorted(tuple(np.round(s, 12)) for s in menu["strategies"])
    assert pts == [(0.0, 1.0), (0.495, 0.505), (0.5, 0.5), (1.0, 0.0)]
    assert sum(menu["perturbed"]) == 1


def test_embedding_identity():
    g = sb.generate_game(3, 2, 2, 2, 2, True)
    z = np.array([1.0, -0.3])
    x = np.array([0.25, 0.75])
    gamma = np.array([0.6, 0.4])
    lhs = sb.h_embedding(g, z, x) @ sb.embedding_parameter(g, gamma)
    rhs = gamma @ sb.utility_vector(g, z, x)
    assert lhs == pytest.approx(rhs, abs=1e-12)
    assert sb.flat_index(2, 1, 1, 1, 2, 2, 2, 3) == 13


def test_bad_inputs_raise(g0):
    with pytest.raises(ValueError):
        sb.best_response(g0, [1.0], [0.5, 0.5], 3)
    with pytest.raises((ValueError, RuntimeError)):
        sb.game_from_dict({"d": 1})


def test_oful_ridge():
    o = sb.Oful(1)
    o.observe_utility(np.ones(1), 1.0)
    assert o.theta_hat[0] == pytest.approx(0.5)
    assert o.recommend([np.array([-1.0]), np.array([1.0])]) == 1


def test_markets():
    assert len(sb.simplex_grid(3, 2)) == 6
    spec = {
        "kind": "auction",
        "m": 1,
        "d": 1,
        "thresholds": [[0.3], [0.45]],
        "valuations": [[0.5]],
    }
    # weighted margins: 0 at bid 0, 0.1 at 0.3, 0.125 at 0.45
    assert sb.auction_policy_bid(spec, [1.0], [0.5, 0.5])[0] == 0.45
    assert sb.auction_policy_bid(spec, [1.0], [0.0, 1.0])[0] == 0.45
    spec["valuations"] = [[0.2]]
    assert sb.auction_policy_bid(spec, [1.0], [0.5, 0.5])[0] == 0.0


def test_run_experiment_roundtrip(tmp_path):
    cfg = {
        "algorithms": ["alg1-oful", "random"],
        "T": 50,
        "game": {"d": 2, "K": 2, "A_l": 2, "A_f": 2},
        "seeds": "0..1",
        "jobs": 1,
    }
    summary = sb.run_experiment(cfg, tmp_path / "a")
    again = sb.run_experiment(json.dumps(cfg), tmp_path / "b")
    assert summary == again
    assert len(summary["algorithms"]["alg1-oful"]["mean_cum_utility"]) == 50
    assert (tmp_path / "a" / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()
    offline = sb.regret_from_logs(tmp_path / "a")
    assert offline["algorithms"]["random"]["mean_cum_regret"] == pytest.approx(
        summary["algorithms"]["random"]["mean_cum_regret"], abs=1e-12
    )
    y = np.sqrt(np.arange(1, 101, dtype=float))
    assert sb.loglog_slope(list(y), 10, 100) == pytest.approx(0.5)
