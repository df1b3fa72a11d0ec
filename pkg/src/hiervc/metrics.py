"""Quality and rate measurements: PSNR, bits per pixel, Bjontegaard delta rate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

PEAK = 255.0
# Identical frames have infinite PSNR; averages clip them here.
PSNR_CAP = 100.0


def psnr_from_sse(sse: float, n_samples: int) -> float:
    if sse == 0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK * n_samples / sse)


def psnr(ref, rec) -> float:
    """Luma PSNR in dB; ``math.inf`` for identical planes."""
    a = np.asarray(getattr(ref, "luma", ref), dtype=np.int64)
    b = np.asarray(getattr(rec, "luma", rec), dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError(f"cannot compare {a.shape} with {b.shape}")
    d = a - b
    return psnr_from_sse(float((d * d).sum()), d.size)


def mean_psnr(values: Iterable[float]) -> float:
    vals = [min(v, PSNR_CAP) for v in values]
    if not vals:
        raise ValueError("no PSNR values to average")
    return sum(vals) / len(vals)


def bpp(total_bits: int, width: int, height: int, n_frames: int) -> float:
    denom = width * height * n_frames
    if denom <= 0:
        raise ValueError("bpp needs positive width, height and frame count")
    return total_bits / denom


@dataclass(frozen=True)
class RdPoint:
    bpp: float
    psnr: float

    def __post_init__(self):
        if not self.bpp > 0:
            raise ValueError(f"bpp must be positive, got {self.bpp}")
        if not math.isfinite(self.psnr):
            raise ValueError("psnr must be finite")


class RdCurve:
    """Rate-distortion points sorted by rate, strictly increasing in both axes."""

    MIN_POINTS = 4

    def __init__(self, points):
        pts = sorted((p if isinstance(p, RdPoint) else RdPoint(*p) for p in points), key=lambda p: p.bpp)
        if len(pts) < self.MIN_POINTS:
            raise ValueError(f"an RD curve needs at least {self.MIN_POINTS} points, got {len(pts)}")
        for a, b in zip(pts, pts[1:]):
            if not (b.bpp > a.bpp and b.psnr > a.psnr):
                raise ValueError(f"RD points not strictly increasing: {a} -> {b}")
        self.points = tuple(pts)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other):
        return isinstance(other, RdCurve) and self.points == other.points

    def __repr__(self):
        return f"RdCurve({list(self.points)!r})"

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.bpp for p in self.points])

    @property
    def psnrs(self) -> np.ndarray:
        return np.array([p.psnr for p in self.points])


def _as_curve(c) -> RdCurve:
    return c if isinstance(c, RdCurve) else RdCurve(c)


def bd_rate(anchor, test) -> float:
    """Bjontegaard delta rate of ``test`` against ``anchor`` in percent.

    Fits a least-squares cubic of log10(bpp) over PSNR to each curve and
    compares their integrals over the common PSNR interval.  Negative
    values mean ``test`` needs fewer bits for the same quality.
    """
    a, t = _as_curve(anchor), _as_curve(test)
    lo = max(a.psnrs.min(), t.psnrs.min())
    hi = min(a.psnrs.max(), t.psnrs.max())
    if not hi > lo:
        raise ValueError("RD curves do not overlap in PSNR")
    pa = np.polyint(np.polyfit(a.psnrs, np.log10(a.rates), 3))
    pt = np.polyint(np.polyfit(t.psnrs, np.log10(t.rates), 3))
    ia = np.polyval(pa, hi) - np.polyval(pa, lo)
    it = np.polyval(pt, hi) - np.polyval(pt, lo)
    avg_diff = (it - ia) / (hi - lo)
    return (10.0 ** avg_diff - 1.0) * 100.0
