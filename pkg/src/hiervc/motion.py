"""Block motion search, compensation and two-reference mode decision.

Each 16x16 block picks one of four predictors: motion-compensated from the
adjacent reconstruction (ADJ), from the key-frame reconstruction (KEY), the
rounded mean of both (AVG), or a flat block at the mean of its causal
neighbours (INTRA_DC).  The choice minimises ``SSE + lambda * bits``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .core import Frame
from .entropy import se_length

MB_SIZE = 16
MV_RANGE = 16
MODE_HEADER_BITS = 2


class Mode(enum.IntEnum):
    ADJ = 0
    KEY = 1
    AVG = 2
    INTRA_DC = 3


class MotionVector(NamedTuple):
    dx: int
    dy: int


ZERO_MV = MotionVector(0, 0)


class RefPicture:
    """A reference plane with a replicated border for motion search."""

    __slots__ = ("plane", "padded", "pad", "width", "height")

    def __init__(self, plane, pad: int = MV_RANGE):
        if isinstance(plane, Frame):
            plane = plane.luma
        self.plane = np.ascontiguousarray(plane, dtype=np.uint8)
        self.pad = pad
        self.padded = np.ascontiguousarray(np.pad(self.plane, pad, mode="edge"))
        self.height, self.width = self.plane.shape


def as_ref(ref) -> RefPicture:
    return ref if isinstance(ref, RefPicture) else RefPicture(ref)


def motion_search(cur, ref, center, search_range: int = MV_RANGE):
    """Full-search SAD block matching around ``center`` (the block origin).

    Returns ``(MotionVector, sad)``.  Reference samples outside the picture
    are edge-clamped.
    """
    if not 0 <= search_range <= MV_RANGE:
        raise ValueError(f"search range must be in 0..{MV_RANGE}")
    ref = as_ref(ref)
    cur = np.ascontiguousarray(getattr(cur, "samples", cur), dtype=np.uint8)
    x, y = int(center[0]), int(center[1])
    n = cur.shape[0]
    lo, hi = search_range - ref.pad, ref.pad - search_range - n
    if not (lo <= x <= ref.width + hi and lo <= y <= ref.height + hi):
        raise ValueError("search window exceeds the reference border")
    dx, dy, sad = kernels.full_search(cur, ref.padded, x, y, ref.pad, search_range)
    return MotionVector(dx, dy), sad


def motion_compensate(ref, mv, origin, size: int = MB_SIZE) -> np.ndarray:
    """Fetch a ``size``-square block at ``origin + mv`` with edge clamping."""
    plane = ref.plane if isinstance(ref, RefPicture) else getattr(ref, "luma", ref)
    h, w = plane.shape
    x = int(origin[0]) + int(mv[0])
    y = int(origin[1]) + int(mv[1])
    if 0 <= x and x + size <= w and 0 <= y and y + size <= h:
        return plane[y:y + size, x:x + size].copy()
    rows = np.clip(np.arange(y, y + size), 0, h - 1)
    cols = np.clip(np.arange(x, x + size), 0, w - 1)
    return plane[np.ix_(rows, cols)]


def average_prediction(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Non-negative operands: +1 then floor is round-half-away-from-zero.
    return ((a.astype(np.int32) + b.astype(np.int32) + 1) >> 1).astype(np.uint8)


def intra_dc_value(recon: np.ndarray, origin, size: int = MB_SIZE) -> int:
    """Mean of the row above and the column left of the block, or 128."""
    x, y = int(origin[0]), int(origin[1])
    total = 0
    count = 0
    if y > 0:
        total += int(recon[y - 1, x:x + size].sum(dtype=np.int64))
        count += size
    if x > 0:
        total += int(recon[y:y + size, x - 1].sum(dtype=np.int64))
        count += size
    if not count:
        return 128
    return (2 * total + count) // (2 * count)


def predict_mv(left: Optional[MotionVector], above: Optional[MotionVector]) -> MotionVector:
    l = left or ZERO_MV
    a = above or ZERO_MV
    return MotionVector(sorted((l[0], a[0], 0))[1], sorted((l[1], a[1], 0))[1])


def mv_bits(mv, mvp) -> int:
    return se_length(mv[0] - mvp[0]) + se_length(mv[1] - mvp[1])


@dataclass(frozen=True, eq=False)
class BlockPrediction:
    mode: Mode
    mv_adj: Optional[MotionVector]
    mv_key: Optional[MotionVector]
    prediction: np.ndarray
    cost: float
    distortion: int = 0
    rate: int = 0


@dataclass(frozen=True)
class MotionField:
    width: int
    height: int
    blocks: tuple

    def mode_counts(self) -> dict:
        counts = {m.name: 0 for m in Mode}
        for b in self.blocks:
            counts[b.mode.name] += 1
        return counts


def sse(a: np.ndarray, b: np.ndarray) -> int:
    d = a.astype(np.int32) - b.astype(np.int32)
    return int(np.dot(d.ravel(), d.ravel()))


def candidate_predictions(
    cur,
    adj_ref,
    key_ref=None,
    lambda_eff: float = 0.0,
    *,
    origin=None,
    mvp_adj: MotionVector = ZERO_MV,
    mvp_key: MotionVector = ZERO_MV,
    dc_value: int = 128,
) -> list[BlockPrediction]:
    """All competing predictions for one block, in mode order."""
    if origin is None:
        origin = getattr(cur, "origin", (0, 0))
    samples = np.asarray(getattr(cur, "samples", cur), dtype=np.uint8)
    size = samples.shape[0]
    adj_ref = as_ref(adj_ref)
    out = []

    def add(mode, mv_a, mv_k, pred):
        rate = MODE_HEADER_BITS
        if mv_a is not None:
            rate += mv_bits(mv_a, mvp_adj)
        if mv_k is not None:
            rate += mv_bits(mv_k, mvp_key)
        dist = sse(samples, pred)
        out.append(BlockPrediction(mode, mv_a, mv_k, pred, dist + lambda_eff * rate, dist, rate))

    mv_a, _ = motion_search(samples, adj_ref, origin, MV_RANGE)
    pred_a = motion_compensate(adj_ref, mv_a, origin, size)
    add(Mode.ADJ, mv_a, None, pred_a)
    if key_ref is not None:
        key_ref = as_ref(key_ref)
        mv_k, _ = motion_search(samples, key_ref, origin, MV_RANGE)
        pred_k = motion_compensate(key_ref, mv_k, origin, size)
        add(Mode.KEY, None, mv_k, pred_k)
        add(Mode.AVG, mv_a, mv_k, average_prediction(pred_a, pred_k))
    add(Mode.INTRA_DC, None, None, np.full((size, size), dc_value, dtype=np.uint8))
    return out


def predict_multi_ref(cur, adj_ref, key_ref=None, lambda_eff: float = 0.0, **kwargs) -> BlockPrediction:
    """Lowest-cost candidate; ties resolve to the earlier mode."""
    best = None
    for cand in candidate_predictions(cur, adj_ref, key_ref, lambda_eff, **kwargs):
        if best is None or cand.cost < best.cost:
            best = cand
    return best
