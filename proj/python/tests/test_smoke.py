import numpy as np
import pytest

import cdpsolve


def test_dc_abs_reaches_quarter():
    s = cdpsolve.run(builtin="dc-abs", algorithm="esqm")
    assert s["phi0"] == pytest.approx(-0.25, abs=1e-4)
    assert abs(abs(s["x_final"][0]) - 0.5) <= 1e-3
    assert s["trace"]["p"].shape == (s["iterations"],)


def test_constrained_both_algorithms():
    for alg in ("esqm", "aesqm"):
        s = cdpsolve.run(builtin="constrained", algorithm=alg)
        assert s["x_final"][0] == pytest.approx(-1.0, abs=1e-3)
        assert "alpha0" in s["config"] or alg == "esqm"


def test_bad_sigma_is_a_config_error():
    with pytest.raises(cdpsolve.ConfigError, match="sigma"):
        cdpsolve.run(builtin="dc-abs", sigma=1.5)


def test_qp_matches_hand_solution():
    # min ½‖d‖² + d₀  s.t.  −d₀ ≤ 0.5  →  d = (−0.5, 0), μ = 0.5
    out = cdpsolve.solve_qp(np.eye(2), np.array([1.0, 0.0]), np.array([[-1.0, 0.0]]), np.array([0.5]),
                            np.zeros((0, 2)), np.zeros(0))
    assert out["status"] == "Optimal"
    np.testing.assert_allclose(out["d"], [-0.5, 0.0], atol=1e-9)
    np.testing.assert_allclose(out["mu"], [0.5], atol=1e-8)


def test_network_equilibrium_conserves_demand():
    net = cdpsolve.synthetic_network(cdpsolve.scenario_demand("mid"))
    v, h = net.equilibrium(np.zeros(4))
    np.testing.assert_allclose(net.Lambda @ h, net.demand, atol=1e-10)
    np.testing.assert_allclose(net.Delta @ h, v, atol=1e-12)
    assert net.kappa(np.zeros(4), v, 0.1) <= 1e-8
    again = cdpsolve.parse_network(net.to_text())
    np.testing.assert_array_equal(again.A, net.A)


def test_network_run_reports_design_cost(tmp_path):
    path = tmp_path / "syn.txt"
    path.write_text(cdpsolve.synthetic_network(cdpsolve.scenario_demand("low")).to_text())
    s = cdpsolve.run(network=path, scenario="low")
    assert s["network_objective"] is not None
    assert s["config"]["p0"] == 0.01
