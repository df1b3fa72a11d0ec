"""Picture and block types shared by every stage of the codec.

Planes are stored as read-only ``uint8`` numpy arrays of shape
``(height, width)``; coordinates passed around the package are ``(x, y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence as Seq

import numpy as np


def round_half_away(v):
    """Round half away from zero, for scalars or arrays."""
    if isinstance(v, np.ndarray):
        return np.sign(v) * np.floor(np.abs(v) + 0.5)
    return math.copysign(math.floor(abs(v) + 0.5), v)


def clamp_pixel(v: float) -> int:
    r = int(round_half_away(float(v)))
    return 0 if r < 0 else 255 if r > 255 else r


def clamp_plane(values: np.ndarray) -> np.ndarray:
    """Vectorised :func:`clamp_pixel`; returns ``uint8``."""
    return np.clip(round_half_away(np.asarray(values, dtype=np.float64)), 0, 255).astype(np.uint8)


def _frozen_plane(a, shape, name: str) -> np.ndarray:
    arr = np.asarray(a)
    if arr.ndim == 1 and arr.size == shape[0] * shape[1]:
        arr = arr.reshape(shape)
    if arr.shape != shape:
        raise ValueError(f"{name} plane has shape {arr.shape}, expected {shape}")
    if arr.dtype != np.uint8:
        if np.any(arr < 0) or np.any(arr > 255):
            raise ValueError(f"{name} samples must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    else:
        arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Frame:
    width: int
    height: int
    luma: np.ndarray
    chroma_u: Optional[np.ndarray] = None
    chroma_v: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("frame dimensions must be positive")
        object.__setattr__(self, "luma", _frozen_plane(self.luma, (self.height, self.width), "luma"))
        if (self.chroma_u is None) != (self.chroma_v is None):
            raise ValueError("chroma planes must be given together")
        if self.chroma_u is not None:
            cshape = (chroma_dim(self.height), chroma_dim(self.width))
            object.__setattr__(self, "chroma_u", _frozen_plane(self.chroma_u, cshape, "chroma_u"))
            object.__setattr__(self, "chroma_v", _frozen_plane(self.chroma_v, cshape, "chroma_v"))

    @classmethod
    def constant(cls, width: int, height: int, value: int = 128, chroma: bool = False) -> "Frame":
        luma = np.full((height, width), value, dtype=np.uint8)
        if not chroma:
            return cls(width, height, luma)
        c = np.full((chroma_dim(height), chroma_dim(width)), 128, dtype=np.uint8)
        return cls(width, height, luma, c, c)

    @property
    def has_chroma(self) -> bool:
        return self.chroma_u is not None

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        if (self.width, self.height) != (other.width, other.height):
            return False
        if not np.array_equal(self.luma, other.luma):
            return False
        if self.has_chroma != other.has_chroma:
            return False
        return not self.has_chroma or (
            np.array_equal(self.chroma_u, other.chroma_u) and np.array_equal(self.chroma_v, other.chroma_v)
        )

    __hash__ = None


def chroma_dim(n: int) -> int:
    return (n + 1) // 2


@dataclass(frozen=True, eq=False)
class Block:
    origin: tuple[int, int]
    size: int
    samples: np.ndarray


@dataclass(frozen=True)
class Sequence:
    frames: tuple
    frame_rate: Fraction = Fraction(30)

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "frame_rate", Fraction(self.frame_rate))
        if frames:
            dims = {(f.width, f.height) for f in frames}
            if len(dims) != 1:
                raise ValueError(f"frames have differing dimensions: {sorted(dims)}")

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, i):
        return self.frames[i]

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    def replace_frame(self, index: int, frame: Frame) -> "Sequence":
        frames = list(self.frames)
        frames[index] = frame
        return Sequence(tuple(frames), self.frame_rate)


def pad_to_multiple(frame: Frame, multiple: int) -> Frame:
    """Round dimensions up to ``multiple`` by replicating the edge samples."""
    if multiple not in (8, 16):
        raise ValueError("multiple must be 8 or 16")
    w = -(-frame.width // multiple) * multiple
    h = -(-frame.height // multiple) * multiple
    if (w, h) == (frame.width, frame.height):
        return frame
    luma = np.pad(frame.luma, ((0, h - frame.height), (0, w - frame.width)), mode="edge")
    if not frame.has_chroma:
        return Frame(w, h, luma)
    ch, cw = chroma_dim(h), chroma_dim(w)
    cpad = ((0, ch - frame.chroma_u.shape[0]), (0, cw - frame.chroma_u.shape[1]))
    return Frame(w, h, luma, np.pad(frame.chroma_u, cpad, mode="edge"), np.pad(frame.chroma_v, cpad, mode="edge"))


def crop(frame: Frame, width: int, height: int) -> Frame:
    if (width, height) == (frame.width, frame.height):
        return frame
    luma = frame.luma[:height, :width]
    if not frame.has_chroma:
        return Frame(width, height, luma)
    ch, cw = chroma_dim(height), chroma_dim(width)
    return Frame(width, height, luma, frame.chroma_u[:ch, :cw], frame.chroma_v[:ch, :cw])


def extract_block(frame: Frame, origin: Seq[int], size: int) -> Block:
    x, y = int(origin[0]), int(origin[1])
    if x < 0 or y < 0 or x + size > frame.width or y + size > frame.height:
        raise IndexError(f"{size}x{size} block at {(x, y)} exceeds {frame.width}x{frame.height} frame")
    samples = frame.luma[y:y + size, x:x + size].copy()
    samples.setflags(write=False)
    return Block((x, y), size, samples)
