"""Pure Python/numpy implementations of the hot kernels.

These define the reference behaviour; ``_ckernels.pyx`` must agree with them
bit for bit.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

MASK64 = (1 << 64) - 1
TWO_PI = 2.0 * math.pi
INV_2_53 = 1.0 / (1 << 53)


@lru_cache(maxsize=None)
def _search_order(rng: int) -> np.ndarray:
    """Flat candidate indices ordered by the tie-break rule."""
    side = 2 * rng + 1
    cands = [(abs(dx) + abs(dy), dy, dx) for dy in range(-rng, rng + 1) for dx in range(-rng, rng + 1)]
    order = sorted(range(side * side), key=cands.__getitem__)
    return np.asarray(order, dtype=np.intp)


def full_search(cur: np.ndarray, ref_padded: np.ndarray, x: int, y: int, pad: int, rng: int):
    """Exhaustive SAD search of a square block.

    ``ref_padded`` is the reference plane with ``pad`` edge-replicated samples
    on every side; ``(x, y)`` is the block origin in unpadded coordinates.
    Ties go to the smaller ``|dx|+|dy|``, then smaller ``dy``, then ``dx``.
    """
    n = cur.shape[0]
    side = 2 * rng + 1
    y0 = y + pad - rng
    x0 = x + pad - rng
    window = ref_padded[y0:y0 + side + n - 1, x0:x0 + side + n - 1]
    views = sliding_window_view(window, (n, n))
    sad = np.abs(views.astype(np.int32) - cur.astype(np.int32)).sum(axis=(2, 3)).ravel()
    order = _search_order(rng)
    best = order[int(np.argmin(sad[order]))]
    dy, dx = divmod(int(best), side)
    return dx - rng, dy - rng, int(sad[best])


def _xoshiro_next(s: list) -> int:
    result = (((s[1] * 5) & MASK64) << 7 | ((s[1] * 5) & MASK64) >> 57) & MASK64
    result = (result * 9) & MASK64
    t = (s[1] << 17) & MASK64
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = ((s[3] << 45) | (s[3] >> 19)) & MASK64
    return result


def xoshiro_uint64(state, n: int):
    s = list(state)
    out = np.empty(n, dtype=np.uint64)
    for i in range(n):
        out[i] = _xoshiro_next(s)
    return out, tuple(s)


def xoshiro_gaussian(state, n: int):
    """``n`` standard normal draws by Box-Muller over xoshiro256** output.

    Each pair consumes two 64-bit words ``a, b``:
    ``u1 = ((a >> 11) + 1) / 2**53``, ``u2 = (b >> 11) / 2**53``,
    ``z0 = sqrt(-2 ln u1) cos(2 pi u2)``, ``z1 = sqrt(-2 ln u1) sin(2 pi u2)``.
    An odd ``n`` discards the final ``z1``.
    """
    s = list(state)
    out = np.empty(n, dtype=np.float64)
    i = 0
    while i < n:
        a = _xoshiro_next(s)
        b = _xoshiro_next(s)
        u1 = ((a >> 11) + 1) * INV_2_53
        u2 = (b >> 11) * INV_2_53
        r = math.sqrt(-2.0 * math.log(u1))
        theta = TWO_PI * u2
        out[i] = r * math.cos(theta)
        if i + 1 < n:
            out[i + 1] = r * math.sin(theta)
        i += 2
    return out, tuple(s)
