import math
import os

import numpy as np
import pytest

import fredholm


def test_expressions():
    assert fredholm.eval_expr("2+3*4") == 14
    assert fredholm.eval_expr("2^3^2") == 512
    assert fredholm.eval_expr("-x^2", {"x": 3}) == -9
    assert fredholm.free_vars("t*(u + u^2)") == {"t", "u"}
    with pytest.raises(fredholm.ParseError, match="offset 6"):
        fredholm.eval_expr("sin(x*")
    with pytest.raises(fredholm.EvalError):
        fredholm.eval_expr("log(x)", {"x": 0})
    assert issubclass(fredholm.EvalError, fredholm.FredholmError)


def test_registry_example():
    assert "laplace_disc" in fredholm.example_names()
    report = fredholm.run_example("ex2", grid=400, sweep=4)
    assert report["metadata"]["grid_n"] == 400
    assert report["metadata"]["max_abs_err"] < 2e-3
    assert len(report["sweep"]) == 4
    again = fredholm.run_example("ex2", grid=400, sweep=4)
    assert fredholm.render_csv(report) == fredholm.render_csv(again)
    with pytest.raises(fredholm.ValidationError):
        fredholm.run_example("nope")


def test_solve_config():
    config = fredholm.example_config("ex1")
    config["grid_n"] = 200
    report = fredholm.solve(config)
    assert report["metadata"]["max_abs_err"] < 1e-2
    path = os.path.join(os.environ.get("FREDHOLM_CONFIG_DIR", "configs"), "nl1.json")
    if os.path.exists(path):
        assert fredholm.solve(path)["metadata"]["max_abs_err"] < 5e-5


def test_network_matches_explicit_iteration():
    out = fredholm.linear_network("sin(x)*cos(z)", "sin(x)", 0, math.pi / 2, 64, 6, scheme="closed")
    a, g = out["matrix"], np.sin(out["nodes"])
    h = g.copy()
    for m in range(1, 6):
        h = g + a @ h
        np.testing.assert_allclose(out["history"][m], h, rtol=1e-12)
    assert fredholm.plan_layers("1/e", "exp(x)", 0, 1, 2000, "closed", 1e-6) == 14


def test_fd_constant_boundary():
    u, residual, sweeps = fredholm.solve_fd("1", 16, 16)
    assert u.shape == (17, 16)
    assert np.max(np.abs(u - 1)) <= 1e-10
    assert residual <= 1e-10 and sweeps >= 1
