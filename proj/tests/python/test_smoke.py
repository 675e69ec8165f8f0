import json
import math

import numpy as np
import pytest

import uis


def test_schedule_identity():
    beta, h, sigma = 0.3, 0.2, 0.7
    gamma = uis.injected_noise_amplitude(beta, h, sigma)
    lhs = (1 - h) ** 2 * sigma**2 + gamma**2
    assert lhs == pytest.approx(((1 - beta * h) * sigma) ** 2, rel=1e-12)
    assert uis.step_size(0.01, 1) == pytest.approx(0.01)
    assert uis.expected_sigma_next(1.0, 0.5, 2.0) == pytest.approx(1.0)


def test_effective_sigma():
    assert uis.effective_sigma(np.full(4, 2.0)) == pytest.approx(2.0)


def test_measurement_orthonormal():
    m, xc = uis.measurement({"type": "block_average", "block": 4}, shape=[16, 16])
    assert xc is None
    assert m.rank == 16
    dense = m.dense()
    np.testing.assert_allclose(dense.T @ dense, np.eye(16), atol=1e-12)
    x = np.random.default_rng(0).random(256)
    np.testing.assert_allclose(m.project(m.project(x)), m.project(x), atol=1e-12)


def test_wiener_oracle_matches_closed_form():
    p = uis.prior({"type": "gaussian", "mean": [0.0, 0.0], "variance": 1.0})
    np.testing.assert_allclose(p.mmse_denoise(np.array([2.0, 0.0]), 1.0), [1.0, 0.0], atol=1e-15)


def test_identity_callable_returns_initial_draw():
    out = uis.sample_prior(lambda y, sigma: y, 16, seed=3)
    assert out["converged"]
    assert out["iterations"] == 1
    assert out["sample"].shape == (16,)


def test_callable_sees_sigma_hint():
    hints = []

    def denoiser(y, sigma):
        hints.append(sigma)
        return 0.5 * y

    uis.sample_prior(denoiser, 4, beta=1.0, h0=0.5, max_iters=5)
    assert hints[0] == pytest.approx(1.0)


def test_conditional_satisfies_constraint():
    p = uis.prior({"type": "synthetic_images", "shape": [16, 16], "count": 4, "seed": 2})
    m, _ = uis.measurement({"type": "random_orthonormal", "fraction": 0.1, "seed": 1}, shape=[16, 16])
    truth = p.mmse_denoise(p.mean(), 1e-3)
    xc = m.measure(truth)
    out = uis.sample_conditional(p, m, xc, seed=5)
    assert out["converged"]
    rms = np.linalg.norm(m.measure(out["sample"]) - xc) / math.sqrt(m.rank)
    assert rms <= 0.02


def test_empty_measurement_matches_prior_sampling():
    p = uis.prior({"type": "gaussian", "mean": [0.2, 0.4, 0.6], "variance": 0.05})
    m, _ = uis.measurement({"type": "empty", "signal_dim": 3})
    a = uis.sample_prior(p, 3, seed=9)
    b = uis.sample_conditional(p, m, np.zeros(0), seed=9)
    assert np.array_equal(a["sample"], b["sample"])
    assert a["trace_csv"] == b["trace_csv"]


def test_psnr_twenty_db():
    x = np.zeros(16)
    assert uis.psnr(x, x + 0.1) == pytest.approx(20.0, abs=1e-12)


def test_ssim_identical_is_one():
    x = np.random.default_rng(1).random(64)
    assert uis.ssim(x, x, [8, 8]) == pytest.approx(1.0)


def test_errors_are_python_exceptions():
    with pytest.raises(ValueError):
        uis.step_size(0.0, 1)
    with pytest.raises(ValueError):
        uis.prior({"type": "nonsense"})


def test_run_demo2d(tmp_path):
    code, metrics = uis.run({"task": "demo2d", "output_dir": str(tmp_path)})
    assert code == 0
    assert metrics["max_distance_to_curve"] <= 0.03
    assert json.loads((tmp_path / "metrics.json").read_text())["curved_fraction"] >= 0.9
