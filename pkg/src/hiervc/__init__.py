"""Hierarchical block-based video codec with multi-reference prediction,
one-frame lookahead and layer-wise quantization."""

__version__ = "0.1.0"

from .codec import CodecConfig, EncodeResult, decode_sequence, encode_sequence
from .core import Frame, Sequence
from .metrics import RdCurve, RdPoint, bd_rate, bpp, psnr
from .structure import StructureConfig, build_schedule, vtm_qp, vtm_reference_lists
from .synth import SyntheticSpec, gen_synthetic
from .y4m import parse_y4m, write_y4m

__all__ = [
    "CodecConfig",
    "EncodeResult",
    "Frame",
    "RdCurve",
    "RdPoint",
    "Sequence",
    "StructureConfig",
    "SyntheticSpec",
    "bd_rate",
    "bpp",
    "build_schedule",
    "decode_sequence",
    "encode_sequence",
    "gen_synthetic",
    "parse_y4m",
    "psnr",
    "vtm_qp",
    "vtm_reference_lists",
    "write_y4m",
]
