import math

import pytest

import confound_ope as co


def test_guiding_example_oracle():
    env = co.paper_env(0.9, 0.01)
    a0 = co.deterministic_policy(0, 2)
    assert co.oracle.true_policy_value(env, a0) == pytest.approx(0.1, abs=1e-12)
    gap = co.oracle.asymptotic_estimated_ips(env, a0) - co.oracle.true_policy_value(env, a0)
    assert abs(co.oracle.estimated_ips_bias(env, a0) - gap) <= 1e-12
    assert co.oracle.crossover_epsilon(0.75) == pytest.approx(0.125, abs=1e-9)
    assert co.oracle.crossover_epsilon(1.0) is None


def test_simulate_estimate_diagnose():
    env = co.paper_env(0.9, 0.1)
    full = co.sample_full_log(env, 20000, 7)
    assert len(full) == 20000
    arrays = full.to_numpy()
    assert set(arrays) == {"context", "action", "reward", "propensity"}
    assert arrays["action"].shape == (20000,)

    log = full.censor()
    props = co.estimate_propensities(log, 2)
    assert math.fsum(props) == pytest.approx(1.0)
    a0 = co.deterministic_policy(0, 2)
    ips = co.ips_estimated_value(log, a0, props).value
    assert ips == pytest.approx(co.dm_value(log, a0).value, abs=1e-12)
    assert ips == pytest.approx(co.snips_value(log, a0, props).value, abs=1e-12)
    assert co.ips_ideal_value(full, a0).std_error > 0

    report = co.diagnostics.run_all(log, props, {"pi_a0": a0, "uniform": co.Policy.uniform(2)})
    assert report.passed
    assert report.to_csv().startswith("test,action_or_target,statistic,expected,z,verdict\n")
    assert not co.diagnostics.run_all(log, [0.5, 0.5], {"pi_a0": a0}).passed


def test_errors_map_to_python_exceptions():
    with pytest.raises(co.ValidationError):
        co.paper_env(1.5, 0.1)
    bad = co.EnvironmentSpec([0.5, 0.6], [[1.0], [0.0]], [[1.0], [1.0]])
    assert co.validate(bad)
    with pytest.raises(ValueError):
        co.sample_full_log(bad, 10, 1)
    with pytest.raises(co.SupportError):
        log = co.CensoredLog.from_lists([0, 0], [1, 0])
        co.ips_estimated_value(log, co.deterministic_policy(0, 2), [0.0, 1.0])
    with pytest.raises(co.UndefinedEstimateError):
        co.dm_value(co.CensoredLog.from_lists([0], [1]), co.deterministic_policy(1, 2))
    with pytest.raises(co.IoError):
        co.harness.read_cells_csv("/nonexistent/cells.csv")


def test_small_sweep_round_trip(tmp_path):
    config = co.harness.SweepConfig()
    config.alpha_values = [0.9]
    config.epsilon_min = 0.1
    config.epsilon_max = 0.2
    config.epsilon_step = 0.1
    config.num_samples = 2000
    config.estimators = ["ips_estimated", "oracle_asymptotic"]
    cells = co.harness.run_sweep(config)
    assert len(cells) == 4
    assert all(c.true_difference == pytest.approx(0.6) for c in cells)

    csv = tmp_path / "cells.csv"
    co.harness.write_cells_csv(cells, str(csv))
    back = co.harness.read_cells_csv(str(csv))
    assert [c.difference for c in back] == [c.difference for c in sorted(cells, key=lambda c: (c.epsilon, c.estimator))]

    svg = tmp_path / "fig.svg"
    co.harness.render_plot(back, str(svg))
    assert "</svg>" in svg.read_text()
