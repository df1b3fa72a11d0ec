import math

import numpy as np
import pytest

from hiervc.transform import (
    DCT8,
    dct8_forward,
    dct8_inverse,
    dequantize,
    make_quant_plan,
    quantize,
)


def basis(u, v):
    """Direct DCT-II basis image for coefficient (row u, column v)."""
    cu = math.sqrt(1 / 8) if u == 0 else math.sqrt(2 / 8)
    cv = math.sqrt(1 / 8) if v == 0 else math.sqrt(2 / 8)
    out = np.empty((8, 8))
    for y in range(8):
        for x in range(8):
            out[y, x] = cu * cv * math.cos((2 * y + 1) * u * math.pi / 16) * math.cos((2 * x + 1) * v * math.pi / 16)
    return out


def test_matrix_orthonormal():
    assert np.allclose(DCT8 @ DCT8.T, np.eye(8), atol=1e-14)


def test_constant_block():
    c = dct8_forward(np.full((8, 8), 128.0))
    assert c[0, 0] == pytest.approx(1024)
    assert np.allclose(np.delete(c.ravel(), 0), 0, atol=1e-9)
    assert np.allclose(dct8_inverse(c), 128, atol=1e-9)


def test_zero_block():
    assert not dct8_forward(np.zeros((8, 8))).any()


@pytest.mark.parametrize("u,v", [(0, 1), (1, 0), (3, 5), (7, 7), (2, 6)])
def test_single_coefficient_is_basis(u, v):
    c = np.zeros((8, 8))
    c[u, v] = 1.0
    assert np.allclose(dct8_inverse(c), basis(u, v), atol=1e-12)


def test_parseval_and_inverse(rng):
    blocks = rng.uniform(-255, 255, size=(10_000, 8, 8))
    coefs = DCT8 @ blocks @ DCT8.T
    e_in = (blocks ** 2).sum(axis=(1, 2))
    e_out = (coefs ** 2).sum(axis=(1, 2))
    assert np.all(np.abs(e_out - e_in) <= 1e-6 * e_in)
    for b in blocks[:50]:
        assert np.allclose(dct8_inverse(dct8_forward(b)), b, atol=1e-9)
        assert np.allclose(dct8_forward(dct8_inverse(b)), b, atol=1e-9)


def test_quantize_examples():
    assert quantize(np.array([34.0]), 10).tolist() == [3]
    assert quantize(np.array([-35.0]), 10).tolist() == [-4]
    assert quantize(np.array([35.0, 4.999, -5.0]), 10).tolist() == [4, 0, -1]
    c = np.array([1.5, -2.5, 0.4, 7.0])
    assert quantize(c, 1).tolist() == [2, -3, 0, 7]
    assert dequantize(np.array([3]), 10).tolist() == [30]
    assert not dequantize(np.zeros(64, dtype=int), 16).any()


@pytest.mark.parametrize("fn", [quantize, dequantize])
@pytest.mark.parametrize("step", [0, -1.0])
def test_nonpositive_step(fn, step):
    with pytest.raises(ValueError):
        fn(np.zeros(4), step)


def test_quantization_error_bound(rng):
    for _ in range(200):
        step = float(rng.uniform(0.1, 100))
        c = rng.uniform(-3000, 3000, size=64)
        err = np.abs(dequantize(quantize(c, step), step) - c)
        assert err.max() <= step / 2 + 1e-9
    c = rng.uniform(-2000, 2000, size=10_000)
    assert np.abs(dequantize(quantize(c, 16), 16) - c).max() <= 8


def test_psnr_non_increasing_in_step(rng):
    steps = [1, 2, 4, 8, 16, 32, 64, 128]
    for _ in range(10):
        b = rng.integers(0, 256, size=(8, 8)).astype(float)
        mses = []
        for s in steps:
            rec = np.clip(np.round(dct8_inverse(dequantize(quantize(dct8_forward(b), s), s))), 0, 255)
            mses.append(((rec - b) ** 2).mean())
        assert all(a <= b for a, b in zip(mses, mses[1:]))


def test_quant_plan_examples():
    assert make_quant_plan(16, 0.9129, 1.2).effective_step == pytest.approx(12.172, abs=1e-9)
    assert make_quant_plan(16, 1.4142, 0.8).effective_step == pytest.approx(28.284, abs=1e-9)
    for m in (0.9129, 1.0541, 1.4142):
        assert make_quant_plan(16, m, 1.0).effective_step == pytest.approx(16 * m)


def test_quant_plan_decreasing_in_omega():
    omegas = np.linspace(0.8, 1.2, 41)
    steps = [make_quant_plan(16, 1.0541, float(w)).effective_step for w in omegas]
    assert all(a > b for a, b in zip(steps, steps[1:]))


@pytest.mark.parametrize("omega", [0.79, 1.21, 0.0])
def test_quant_plan_omega_range(omega):
    with pytest.raises(ValueError):
        make_quant_plan(16, 1.0, omega)


def test_quant_plan_rejects_bad_step():
    with pytest.raises(ValueError):
        make_quant_plan(0, 1.0, 1.0)
