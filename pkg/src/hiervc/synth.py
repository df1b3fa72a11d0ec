"""Seeded synthetic test sequences.

Randomness comes from xoshiro256** seeded through splitmix64, and Gaussian
noise from the Box-Muller pairing documented in ``_pykernels``, so the same
spec yields the same pictures with either kernel backend.

Stream consumption order: the texture cells of the ``mixed`` pattern (one
64-bit word per 4x4 cell, row-major), then ``width * height`` Gaussian
draws per frame, row-major, frame after frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Frame, Sequence, clamp_plane

MASK64 = (1 << 64) - 1
PATTERNS = ("gradient", "checker", "mixed")


def splitmix64(seed: int):
    """Infinite splitmix64 stream."""
    state = seed & MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        yield z ^ (z >> 31)


class Xoshiro256:
    """xoshiro256** with splitmix64 seeding; draws delegate to the kernels."""

    def __init__(self, seed: int):
        sm = splitmix64(seed)
        self.state = tuple(next(sm) for _ in range(4))

    def uint64(self, n: int) -> np.ndarray:
        out, self.state = kernels.xoshiro_uint64(self.state, n)
        return out

    def gaussian(self, n: int) -> np.ndarray:
        out, self.state = kernels.xoshiro_gaussian(self.state, n)
        return out


@dataclass(frozen=True)
class SyntheticSpec:
    seed: int = 0
    width: int = 64
    height: int = 64
    n_frames: int = 33
    motion: tuple = (1, 0)
    noise_sigma: float = 2.0
    pattern: str = "mixed"
    # content starts this many motion steps in; frame t shows t + phase
    phase: int = 0

    def __post_init__(self):
        if self.width < 32 or self.height < 32:
            raise ValueError("synthetic sequences need at least 32x32 pixels")
        if self.n_frames < 1:
            raise ValueError("n_frames must be positive")
        if self.pattern not in PATTERNS:
            raise ValueError(f"pattern must be one of {PATTERNS}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.phase < 0:
            raise ValueError("phase must be non-negative")


def _base_pattern(spec: SyntheticSpec, rng: Xoshiro256) -> np.ndarray:
    h, w = spec.height, spec.width
    y, x = np.mgrid[0:h, 0:w].astype(np.float64)
    gradient = 255.0 * (x / (w - 1) + y / (h - 1)) / 2.0
    checker = np.where(((x // 8) + (y // 8)) % 2 == 0, 48.0, 208.0)
    if spec.pattern == "gradient":
        return gradient
    if spec.pattern == "checker":
        return checker
    ch, cw = -(-h // 4), -(-w // 4)
    cells = (rng.uint64(ch * cw) >> np.uint64(56)).astype(np.float64).reshape(ch, cw)
    texture = np.kron(cells, np.ones((4, 4)))[:h, :w]
    return 0.35 * gradient + 0.25 * checker + 0.4 * texture


def gen_synthetic(spec: SyntheticSpec) -> Sequence:
    rng = Xoshiro256(spec.seed)
    base = _base_pattern(spec, rng)
    dx, dy = spec.motion
    frames = []
    for t in range(spec.n_frames):
        k = t + spec.phase
        img = np.roll(base, (k * dy, k * dx), axis=(0, 1))
        if spec.noise_sigma > 0:
            img = img + spec.noise_sigma * rng.gaussian(spec.width * spec.height).reshape(spec.height, spec.width)
        frames.append(Frame(spec.width, spec.height, clamp_plane(img)))
    return Sequence(tuple(frames))
