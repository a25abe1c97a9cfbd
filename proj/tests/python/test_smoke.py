"""Smoke tests for the python surface of the C++ core."""

import math

import numpy as np
import pytest

import darn

LN2 = math.log(2.0)


@pytest.fixture
def tiny():
    arch = darn.parse_architecture("x=3;h=2")
    return arch, darn.init_params(arch, seed=7, scale=0.0)


def test_architecture_round_trip():
    text = "x=5,ar;h=2,det=3,enc-ar;h=4,no-dec-ar"
    arch = darn.parse_architecture(text)
    assert darn.format_architecture(arch) == text
    assert arch.total_hidden() == 6
    with pytest.raises(darn.UsageError):
        darn.parse_architecture("x=4;h=0")


def test_init_params_determinism():
    arch = darn.parse_architecture("x=4;h=3,det=2")
    a = darn.init_params(arch, seed=1, scale=0.1)
    b = darn.init_params(arch, seed=1, scale=0.1)
    c = darn.init_params(arch, seed=2, scale=0.1)
    for name, block in a.blocks().items():
        assert np.array_equal(block, b.blocks()[name])
    assert any(
        not np.array_equal(block, c.blocks()[name])
        for name, block in a.blocks().items()
    )


def test_zero_params_log_probs(tiny):
    _, params = tiny
    x = np.zeros(3)
    assert darn.joint_log_prob(params, x, [np.zeros(2)]) == pytest.approx(-5 * LN2)
    assert darn.encoder_log_prob(params, x, [np.ones(2)]) == pytest.approx(-2 * LN2)
    d = darn.description_length(params, x, [np.zeros(2)])
    assert d["total"] == pytest.approx(3 * LN2)
    assert d["total"] == d["residual"] + d["prior_cost"] + d["bits_back"]


def test_variational_bound_and_likelihood():
    arch = darn.parse_architecture("x=4;h=3,det=2")
    params = darn.init_params(arch, seed=3, scale=0.8)
    x = np.array([1.0, 0.0, 1.0, 1.0])
    fe = darn.free_energy_exact(params, x)
    ll = darn.exact_log_likelihood(params, x)
    assert fe >= -ll - 1e-9
    est = darn.importance_sampling_ll(params, x, S=20000, repeats=5, seed=11)
    assert est["ci95_low"] <= est["mean_nats"] <= est["ci95_high"]
    assert est["mean_nats"] == pytest.approx(ll, abs=0.05)


def test_sampling_determinism_and_shape():
    arch = darn.parse_architecture("x=4;h=2")
    params = darn.init_params(arch, seed=5, scale=0.5)
    bits1, probs1 = darn.sample_decoder(params, seed=9, count=32)
    bits2, _ = darn.sample_decoder(params, seed=9, count=32)
    assert bits1.shape == (32, 4)
    assert np.array_equal(bits1, bits2)
    assert np.all((probs1 > 0.0) & (probs1 < 1.0))
    layers = darn.sample_encoder(params, np.array([1.0, 0.0, 0.0, 1.0]), seed=2)
    assert len(layers) == 1
    bits, probs = layers[0]
    assert set(np.unique(bits)) <= {0.0, 1.0}
    assert np.all((probs > 0.0) & (probs < 1.0))


def test_count_multiplications_formula():
    arch = darn.parse_architecture("x=6;h=4")
    assert darn.count_multiplications(arch) == 4 * 3 // 2 + 4 * 6


def test_enumeration_guard():
    arch = darn.parse_architecture("x=2;h=21")
    params = darn.init_params(arch, seed=0, scale=0.0)
    with pytest.raises(darn.EnumerationGuardError):
        darn.exact_log_likelihood(params, np.zeros(2))


def test_training_reduces_description_length():
    rng = np.random.default_rng(0)
    patterns = rng.integers(0, 2, size=(4, 6)).astype(float)
    rows = patterns[rng.integers(0, 4, size=400)]
    arch = darn.parse_architecture("x=6;h=4")
    params, log, best_epoch, best_val = darn.train(
        rows, arch, val_rows=rows, lr=0.01, minibatch=50, epochs=40, seed=3
    )
    assert len(log) == 40
    first, last = log[0][1], log[-1][1]
    assert last < first - 0.5
    assert best_epoch >= 1
    assert best_val < first
    summary = darn.dataset_eval(params, rows, "fe", S=0, repeats=1, seed=0)
    assert summary["mean_nats"] == pytest.approx(best_val, abs=0.5)


def test_checkpoint_round_trip(tmp_path):
    arch = darn.parse_architecture("x=3,ar;h=2,det=2")
    params = darn.init_params(arch, seed=21, scale=0.7)
    path = str(tmp_path / "model.ckpt")
    darn.save_checkpoint(path, params, rng_seed=5)
    loaded = darn.load_checkpoint(path)
    for name, block in params.blocks().items():
        assert np.array_equal(block, loaded.blocks()[name])
    with pytest.raises(darn.DataError):
        darn.load_checkpoint(str(tmp_path / "missing.ckpt"))
