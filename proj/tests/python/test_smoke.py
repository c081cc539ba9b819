import math

import pytest

import predtrig


def test_steady_state_and_period():
    model, prior = predtrig.preset("example1")
    p = predtrig.steady_state_posterior(model)
    assert p[0][0] == pytest.approx(0.061383, abs=1e-6)
    assert predtrig.steady_state_period(model, 0.6) == 7
    assert predtrig.steady_state_period(model, 3.0) is None
    assert predtrig.steady_state_gap(model, 2) == pytest.approx(0.1912747393, abs=1e-9)


def test_simulate_self_trigger():
    model, prior = predtrig.preset("example1")
    run = predtrig.simulate(model, prior, "st", 0.6, steps=200, seed=1)
    times = [k + 1 for k, g in enumerate(run["transmit"]) if g]
    assert times[:3] == [1, 8, 15]
    assert run["communication"] == pytest.approx(29 / 200)
    assert math.isfinite(run["mse"])


def test_zero_cost_tracks_filter():
    model = predtrig.Model([[1.1]], [[1.0]], [[0.1]], [[0.1]])
    prior = predtrig.Prior([1.0], [[1.0]])
    run = predtrig.simulate(model, prior, "pt", 0.0, steps=50, horizon=2)
    assert run["remote_estimate"] == run["filter_estimate"]


def test_sweep_is_worker_independent():
    model, prior = predtrig.preset("example2")
    a = predtrig.sweep(model, prior, "et", [0.1, 0.5], steps=50, runs=30, workers=1)
    b = predtrig.sweep(model, prior, "et", [0.1, 0.5], steps=50, runs=30, workers=4)
    assert a == b
    assert a[0]["comm_mean"] >= a[1]["comm_mean"]


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        predtrig.preset("nope")
    with pytest.raises(ValueError):
        predtrig.Model([[1.0, 0.0]], [[1.0]], [[0.1]], [[0.1]])
    model, prior = predtrig.preset("example1")
    with pytest.raises(ValueError):
        predtrig.simulate(model, prior, "et", -1.0)


def test_cli_entry_point():
    code, out, err = predtrig.run_cli(["period", "--preset", "example1", "--cost", "0.25"])
    assert code == 0
    assert out == "C,M\n0.25,3\n"
    code, _, err = predtrig.run_cli(["period", "--preset", "bad", "--cost", "1"])
    assert code == 2 and err.startswith("error: config:")
