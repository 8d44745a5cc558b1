import math

import pytest

import pneutop


@pytest.fixture(scope="module")
def model():
    cfg = pneutop.RunConfig()
    cfg.nex = 12
    cfg.ney = 18
    cfg.validate()
    return pneutop.build_model(cfg)


def test_scalar_helpers():
    assert pneutop.project(0.0, 8.0, 0.5) == pytest.approx(0.0, abs=1e-14)
    assert pneutop.project(1.0, 8.0, 0.5) == pytest.approx(1.0, abs=1e-14)
    assert pneutop.smooth_step(0.5, 10.0, 0.2) == pytest.approx(
        (math.tanh(2.0) + math.tanh(3.0)) / (math.tanh(2.0) + math.tanh(8.0))
    )
    assert pneutop.flow_coefficient(0.0) == pytest.approx(1.0)
    assert pneutop.flow_coefficient(1.0) == pytest.approx(1e-7)
    assert pneutop.simp_modulus(1.0) == pytest.approx(100e6)
    assert pneutop.discreteness([0.5, 0.5]) == pytest.approx(100.0)
    assert pneutop.discreteness([0.0, 1.0]) == pytest.approx(0.0)


def test_model_regions(model):
    assert model.num_elems == 12 * 18
    assert model.num_nodes == 13 * 19
    assert model.num_design_vars < model.num_elems  # passive void present
    assert model.output_node >= 0


def test_filter_is_averaging(model):
    rho = [1.0] * model.num_elems
    filtered = pneutop.apply_filter(model, rho)
    assert max(abs(v - 1.0) for v in filtered) < 1e-12


def test_physics_pipeline(model):
    rho = [0.5] * model.num_elems
    mse, se, delta = pneutop.solve_intermediate(model, rho, 2.0)
    assert se > 0.0
    assert mse == pytest.approx(-delta * 1.0, rel=1e-9)  # unit dummy load


def test_gradient_check():
    cfg = pneutop.RunConfig()
    cfg.nex = 6
    cfg.ney = 9
    model = pneutop.build_model(cfg)
    passed, max_err = pneutop.check_gradients(model, seed=3)
    assert passed
    assert max_err <= 1e-3


def test_short_optimization():
    cfg = pneutop.RunConfig()
    cfg.nex = 12
    cfg.ney = 18
    cfg.mma_max_iters = 5
    model = pneutop.build_model(cfg)
    seen = []
    result = pneutop.run_optimization(model, seen.append)
    assert len(result.history) == 5
    assert len(seen) == 5
    assert result.history[-1].iteration == 5
    assert result.final_f0[0] < 0.0
    vfs = [sum(f) / model.num_elems for f in (result.eroded, result.intermediate, result.dilated)]
    assert vfs[0] < vfs[1] < vfs[2]


def test_config_error():
    cfg = pneutop.RunConfig()
    cfg.nu = 0.9
    with pytest.raises(pneutop.ConfigError):
        cfg.validate()
