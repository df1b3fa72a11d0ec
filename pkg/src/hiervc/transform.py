"""8x8 orthonormal DCT-II and uniform scalar quantization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import round_half_away

OMEGA_MIN = 0.8
OMEGA_MAX = 1.2


def _dct_matrix(n: int = 8) -> np.ndarray:
    m = np.empty((n, n), dtype=np.float64)
    for k in range(n):
        a = math.sqrt((1.0 if k == 0 else 2.0) / n)
        for i in range(n):
            m[k, i] = a * math.cos(math.pi * (2 * i + 1) * k / (2 * n))
    return m


DCT8 = _dct_matrix(8)
DCT8.setflags(write=False)


def dct8_forward(block) -> np.ndarray:
    x = np.asarray(block, dtype=np.float64)
    if x.shape != (8, 8):
        raise ValueError(f"expected an 8x8 block, got {x.shape}")
    return DCT8 @ x @ DCT8.T


def dct8_inverse(coefs) -> np.ndarray:
    c = np.asarray(coefs, dtype=np.float64).reshape(8, 8)
    return DCT8.T @ c @ DCT8


def _check_step(step: float) -> None:
    if not step > 0:
        raise ValueError(f"quantizer step must be positive, got {step}")


def quantize(coefs, step: float) -> np.ndarray:
    """Uniform quantizer without dead zone; levels are ``int64``."""
    _check_step(step)
    return round_half_away(np.asarray(coefs, dtype=np.float64) / step).astype(np.int64)


def dequantize(levels, step: float) -> np.ndarray:
    _check_step(step)
    return np.asarray(levels, dtype=np.float64) * step


@dataclass(frozen=True)
class QuantPlan:
    base_step: float
    layer_multiplier: float
    omega: float
    effective_step: float


def make_quant_plan(base_step: float, layer, omega: float = 1.0) -> QuantPlan:
    """Frame quantizer step ``base_step * layer_multiplier / omega``.

    ``layer`` is a :class:`~hiervc.structure.Layer` or an already computed
    multiplier.  A larger ``omega`` gives a finer step.
    """
    from .structure import Layer, layer_quant_multiplier

    _check_step(base_step)
    if not OMEGA_MIN <= omega <= OMEGA_MAX:
        raise ValueError(f"omega {omega} outside [{OMEGA_MIN}, {OMEGA_MAX}]")
    mult = layer_quant_multiplier(layer) if isinstance(layer, Layer) else float(layer)
    return QuantPlan(base_step, mult, omega, base_step * mult / omega)
