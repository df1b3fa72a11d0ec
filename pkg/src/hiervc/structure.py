"""Hierarchical quality and reference structure.

Two schedules live here.  The VTM low-delay tables (per-frame QP derivation
and the 4-candidate reference lists) are kept as golden data for comparison
reports.  The schedule the codec actually runs is the key-frame structure:
every inter frame references its neighbour and the most recent key (or
intra) frame, and the quantizer of each frame follows its layer weight.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

DEFAULT_WEIGHTS = (0.5, 1.2, 0.5, 0.9)


@dataclass(frozen=True)
class QpParams:
    offset: int
    mscale: Fraction
    moffset: Fraction
    quality_label: str


# Exact decimals so the truncation in vtm_qp never sees binary rounding noise.
_QP_LOW = QpParams(6, Fraction("0.245"), Fraction("-6.5"), "low")
_QP_HIGH = QpParams(4, Fraction("0.259"), Fraction("-6.5"), "high")
_QP_VERY_HIGH = QpParams(1, Fraction(0), Fraction(0), "very_high")

VTM_QP_PARAMS = (_QP_LOW, _QP_HIGH, _QP_LOW, _QP_HIGH, _QP_LOW, _QP_HIGH, _QP_LOW, _QP_VERY_HIGH)

VTM_REFERENCE_LISTS = (
    ((1, 9, 17, 25), (1, 3, 5, 33)),
    ((1, 2, 10, 18), (1, 2, 4, 26)),
    ((1, 3, 11, 19), (1, 3, 5, 27)),
    ((1, 4, 12, 20), (1, 2, 4, 28)),
    ((1, 5, 13, 21), (1, 3, 5, 29)),
    ((1, 6, 14, 22), (1, 2, 6, 30)),
    ((1, 7, 15, 23), (1, 3, 7, 31)),
    ((1, 8, 16, 24), (1, 2, 4, 32)),
)


def _check_gop_index(idx: int) -> None:
    if not 0 <= idx <= 7:
        raise ValueError(f"frame index in GOP must be in 0..7, got {idx}")


def vtm_qp(qp_base: int, frame_idx_in_gop: int) -> int:
    _check_gop_index(frame_idx_in_gop)
    p = VTM_QP_PARAMS[frame_idx_in_gop]
    qp_bias = qp_base + p.offset
    # int() of a Fraction truncates toward zero.
    return int(qp_bias + p.mscale * qp_bias + p.moffset + Fraction(1, 2))


def vtm_reference_lists(frame_idx_in_gop: int) -> tuple[list[int], list[int]]:
    _check_gop_index(frame_idx_in_gop)
    l0, l1 = VTM_REFERENCE_LISTS[frame_idx_in_gop]
    return list(l0), list(l1)


class LayerId(enum.IntEnum):
    KEY = 1
    HIGH = 2
    LOW = 3


# Position in the 4-frame weight cycle decides the layer, so a reweighted
# cycle keeps the same reference structure.
_LAYER_BY_PHASE = (LayerId.LOW, LayerId.KEY, LayerId.LOW, LayerId.HIGH)


@dataclass(frozen=True)
class Layer:
    id: LayerId
    weight: float

    @property
    def name(self) -> str:
        return self.id.name.capitalize()


def layer_of(inter_index: int, weights: Sequence[float] = DEFAULT_WEIGHTS) -> Layer:
    if inter_index < 1:
        raise ValueError("inter index counts from 1")
    phase = inter_index % 4
    return Layer(_LAYER_BY_PHASE[phase], float(weights[phase]))


def layer_quant_multiplier(layer) -> float:
    """Quantizer step multiplier ``1/sqrt(weight)`` at 4-decimal precision.

    Accepts a :class:`Layer` or a bare weight.
    """
    w = layer.weight if isinstance(layer, Layer) else float(layer)
    if w <= 0:
        raise ValueError("layer weight must be positive")
    return round(1.0 / math.sqrt(w), 4)


class FrameType(enum.IntEnum):
    INTRA = 0
    INTER = 1


@dataclass(frozen=True)
class StructureConfig:
    n_frames: int
    intra_period: int = -1
    weights: tuple = DEFAULT_WEIGHTS
    base_step: float = 16.0
    lambda_base: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.weights) != 4 or any(w <= 0 for w in self.weights):
            raise ValueError("weights must be four positive values")
        if self.intra_period != -1 and self.intra_period < 1:
            raise ValueError("intra_period must be -1 or >= 1")
        if not self.base_step > 0:
            raise ValueError("base_step must be positive")
        if not self.lambda_base > 0:
            raise ValueError("lambda_base must be positive")


@dataclass(frozen=True)
class FrameSchedule:
    index: int
    frame_type: FrameType
    layer: Optional[Layer]
    refs: tuple
    quant_multiplier: float
    omega_perturb: float = 1.0

    @property
    def is_intra(self) -> bool:
        return self.frame_type == FrameType.INTRA

    @property
    def is_key(self) -> bool:
        return self.layer is not None and self.layer.id == LayerId.KEY

    @property
    def is_anchor(self) -> bool:
        """True for frames that enter the key slot of the reference buffer."""
        return self.is_intra or self.is_key


def is_intra_index(index: int, intra_period: int) -> bool:
    return index == 0 or (intra_period > 0 and index % intra_period == 0)


def build_schedule(config: StructureConfig) -> list[FrameSchedule]:
    if config.n_frames < 1:
        raise ValueError("schedule needs at least one frame")
    weights = config.weights
    # Intra frames share the key layer's step; they seed the key slot.
    intra_mult = layer_quant_multiplier(weights[1])
    out: list[FrameSchedule] = []
    inter_index = 0
    last_anchor = 0
    for idx in range(config.n_frames):
        if is_intra_index(idx, config.intra_period):
            out.append(FrameSchedule(idx, FrameType.INTRA, None, (), intra_mult))
            inter_index = 0
            last_anchor = idx
            continue
        inter_index += 1
        layer = layer_of(inter_index, weights)
        refs = (idx - 1,) if last_anchor == idx - 1 else (idx - 1, last_anchor)
        out.append(FrameSchedule(idx, FrameType.INTER, layer, refs, layer_quant_multiplier(layer)))
        if layer.id == LayerId.KEY:
            last_anchor = idx
    return out


SCHEDULE_CSV_FIELDS = ("index", "type", "layer", "omega", "refs", "quant_multiplier")


def schedule_to_csv(schedule: Sequence[FrameSchedule]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCHEDULE_CSV_FIELDS)
    for s in schedule:
        w.writerow([
            s.index,
            "Intra" if s.is_intra else "Inter",
            s.layer.name if s.layer else "",
            repr(s.layer.weight) if s.layer else "",
            " ".join(str(r) for r in s.refs),
            f"{s.quant_multiplier:.4f}",
        ])
    return buf.getvalue()
