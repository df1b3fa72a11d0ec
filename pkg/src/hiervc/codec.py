"""Encoder and decoder for the ``.ehb`` bitstream.

Bitstream layout (all integers little-endian)::

    SequenceHeader  40 bytes  magic "EHB1", width u32, height u32,
                              frame_count u32, base_step*1000 u32,
                              4 x weight*1000 u16, intra_period i32,
                              flags u32, reserved u32
    repeated:
      FrameHeader   12 bytes  frame_type u8, layer u8, omega Q8.8 u16,
                              payload_len u32, reserved u32
      payload       payload_len bytes of range-coded data

Flags: bit 0 per-block step indices present (lookahead), bit 1 random key
frame omega, bit 2 single reference (adjacent frame only).

A payload codes the 16x16 macroblocks of the padded luma plane in raster
order.  Each macroblock carries an optional step index (0..2, truncated
unary), then for inter frames its prediction mode and motion vector
differences, then four 8x8 residual coefficient blocks.  Contexts reset at every frame, so a
payload decodes given only its reference reconstructions.

Only luma is coded; decoded frames carry no chroma planes.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import metrics
from .core import Frame, Sequence, clamp_plane, crop, pad_to_multiple, round_half_away
from .entropy import (
    ContextSet,
    PayloadError,
    RangeDecoder,
    RangeEncoder,
    decode_coef_block,
    decode_mode,
    decode_mvd,
    encode_coef_block,
    encode_mode,
    encode_mvd,
)
from .motion import (
    MB_SIZE,
    MV_RANGE,
    Mode,
    MotionField,
    MotionVector,
    RefPicture,
    average_prediction,
    intra_dc_value,
    motion_compensate,
    motion_search,
    predict_multi_ref,
    predict_mv,
)
from .structure import (
    FrameSchedule,
    StructureConfig,
    build_schedule,
)
from .transform import DCT8, OMEGA_MAX, OMEGA_MIN, QuantPlan, make_quant_plan, quantize

log = logging.getLogger(__name__)

MAGIC = b"EHB1"
SEQ_HEADER = struct.Struct("<4sIIIIHHHHiII")
FRAME_HEADER = struct.Struct("<BBHII")
assert SEQ_HEADER.size == 40 and FRAME_HEADER.size == 12

FLAG_BLOCK_STEPS = 1
FLAG_RANDOM_OMEGA = 2
FLAG_SINGLE_REF = 4

STEP_SCALES = (1.0, 0.75, 0.5)
LAMBDA_SCALE = 0.1
OMEGA_Q_MIN = 205  # ceil(0.8 * 256)
OMEGA_Q_MAX = 307  # floor(1.2 * 256)


class BitstreamError(ValueError):
    """Base class for undecodable streams."""


class BadMagicError(BitstreamError):
    pass


class TruncatedStreamError(BitstreamError):
    def __init__(self, msg, frames=()):
        super().__init__(msg)
        self.frames = list(frames)


class OmegaRangeError(BitstreamError):
    pass


class CorruptPayloadError(BitstreamError):
    def __init__(self, msg, frames=()):
        super().__init__(msg)
        self.frames = list(frames)


@dataclass(frozen=True)
class CodecConfig:
    structure: StructureConfig = field(default_factory=lambda: StructureConfig(n_frames=1))
    lookahead_enabled: bool = True
    lookahead_strength: float = 0.2
    random_omega_seed: Optional[int] = None
    omega_mode: str = "off"
    multi_reference: bool = True
    lambda_scale: float = LAMBDA_SCALE

    def __post_init__(self):
        if not 0.0 <= self.lookahead_strength <= 1.0:
            raise ValueError("lookahead_strength must be in [0, 1]")
        if self.omega_mode not in ("off", "random_key"):
            raise ValueError(f"unknown omega_mode {self.omega_mode!r}")
        if not self.lambda_scale >= 0:
            raise ValueError("lambda_scale must be non-negative")

    @property
    def lookahead_active(self) -> bool:
        return self.lookahead_enabled and self.lookahead_strength > 0


@dataclass(frozen=True)
class SequenceHeader:
    width: int
    height: int
    frame_count: int
    base_step_milli: int
    weights_milli: tuple
    intra_period: int
    flags: int

    def pack(self) -> bytes:
        return SEQ_HEADER.pack(MAGIC, self.width, self.height, self.frame_count, self.base_step_milli,
                               *self.weights_milli, self.intra_period, self.flags, 0)

    @classmethod
    def unpack(cls, data: bytes) -> "SequenceHeader":
        if len(data) < 4 or data[:4] != MAGIC:
            raise BadMagicError("not an EHB1 bitstream")
        if len(data) < SEQ_HEADER.size:
            raise TruncatedStreamError("sequence header truncated")
        magic, w, h, n, step, w0, w1, w2, w3, ip, flags, _ = SEQ_HEADER.unpack_from(data)
        if w == 0 or h == 0 or step == 0 or 0 in (w0, w1, w2, w3):
            raise BitstreamError("sequence header carries zero dimensions or parameters")
        return cls(w, h, n, step, (w0, w1, w2, w3), ip, flags)

    @property
    def base_step(self) -> float:
        return self.base_step_milli / 1000.0

    @property
    def weights(self) -> tuple:
        return tuple(w / 1000.0 for w in self.weights_milli)

    def structure(self) -> StructureConfig:
        return StructureConfig(self.frame_count, self.intra_period, self.weights, self.base_step)


@dataclass(frozen=True)
class FrameHeader:
    frame_type: int
    layer: int
    omega_q: int
    payload_len: int

    def pack(self) -> bytes:
        return FRAME_HEADER.pack(self.frame_type, self.layer, self.omega_q, self.payload_len, 0)

    @property
    def omega(self) -> float:
        return self.omega_q / 256.0


def omega_to_q88(omega: float) -> int:
    return int(round_half_away(omega * 256.0))


@dataclass
class DecodedPictureBuffer:
    last: Optional[RefPicture] = None
    key: Optional[RefPicture] = None
    intra: Optional[RefPicture] = None
    last_index: int = -1
    key_index: int = -1
    intra_index: int = -1

    def update(self, entry: FrameSchedule, recon: np.ndarray) -> None:
        ref = RefPicture(recon)
        self.last, self.last_index = ref, entry.index
        if entry.is_anchor:
            self.key, self.key_index = ref, entry.index
        if entry.is_intra:
            self.intra, self.intra_index = ref, entry.index

    def references(self, entry: FrameSchedule):
        """Adjacent and (optional) key references for an inter frame."""
        if self.last is None or self.last_index != entry.refs[0]:
            raise ValueError(f"frame {entry.index}: adjacent reference {entry.refs[0]} not in buffer")
        if len(entry.refs) < 2:
            return self.last, None
        if self.key is None or self.key_index != entry.refs[1]:
            raise ValueError(f"frame {entry.index}: key reference {entry.refs[1]} not in buffer")
        return self.last, self.key


@dataclass(frozen=True)
class FrameStats:
    index: int
    frame_type: str
    layer: str
    omega: float
    bits: int
    sse: int
    psnr: float
    modes: dict = field(default_factory=dict)


@dataclass
class EncodeResult:
    bitstream: bytes
    reconstructions: list
    stats: list
    width: int
    height: int

    @property
    def total_bits(self) -> int:
        return 8 * len(self.bitstream)

    @property
    def bpp(self) -> float:
        return metrics.bpp(self.total_bits, self.width, self.height, len(self.stats))

    @property
    def mean_psnr(self) -> float:
        return metrics.mean_psnr([s.psnr for s in self.stats])

    @property
    def rd_point(self) -> "metrics.RdPoint":
        return metrics.RdPoint(self.bpp, self.mean_psnr)

    @property
    def rd_points(self) -> list:
        """Per-frame ``(bpp, psnr)`` points."""
        px = self.width * self.height
        return [metrics.RdPoint(s.bits / px, min(s.psnr, metrics.PSNR_CAP)) for s in self.stats]


# --- block transform helpers -------------------------------------------------

def _split8(block16: np.ndarray) -> np.ndarray:
    """16x16 -> (4, 8, 8) in raster order of the sub-blocks."""
    return block16.reshape(2, 8, 2, 8).transpose(0, 2, 1, 3).reshape(4, 8, 8)


def _merge8(blocks: np.ndarray) -> np.ndarray:
    return blocks.reshape(2, 2, 8, 8).transpose(0, 2, 1, 3).reshape(16, 16)


def forward_levels(block16, step: float) -> np.ndarray:
    """Quantized DCT levels of the four 8x8 sub-blocks, shape ``(4, 64)``."""
    coefs = DCT8 @ _split8(np.asarray(block16, dtype=np.float64)) @ DCT8.T
    return quantize(coefs, step).reshape(4, 64)


def inverse_levels(levels: np.ndarray, step: float) -> np.ndarray:
    """Dequantized, inverse-transformed 16x16 block (float, unclamped).

    Encoder and decoder both call this on identical levels, which is what
    keeps their reconstructions identical.
    """
    coefs = levels.reshape(4, 8, 8).astype(np.float64) * step
    return _merge8(DCT8.T @ coefs @ DCT8)


def quantize_multipliers(grid) -> np.ndarray:
    """Map lookahead multipliers to step indices (nearest, ties to coarser)."""
    g = np.asarray(grid, dtype=np.float64)
    scales = np.asarray(STEP_SCALES)
    dist = np.abs(g[..., None] - scales)
    # argmin picks the first minimum, i.e. the coarser step on a tie
    return np.argmin(dist + np.arange(len(scales)) * 1e-12, axis=-1).astype(np.int64)


def _mb_grid(width: int, height: int):
    for by in range(height // MB_SIZE):
        for bx in range(width // MB_SIZE):
            yield by, bx


def _write_step_index(enc: RangeEncoder, ctxs: ContextSet, idx: int) -> None:
    # truncated unary over the three usable indices
    enc.encode_bit(ctxs.qidx[0], 1 if idx else 0)
    if idx:
        enc.encode_bit(ctxs.qidx[1], idx - 1)


def _read_step_index(dec: RangeDecoder, ctxs: ContextSet) -> int:
    if not dec.decode_bit(ctxs.qidx[0]):
        return 0
    return 1 + dec.decode_bit(ctxs.qidx[1])


# --- frame encoders ----------------------------------------------------------

def _as_plane(frame) -> np.ndarray:
    plane = frame.luma if isinstance(frame, Frame) else np.asarray(frame, dtype=np.uint8)
    h, w = plane.shape
    if h % MB_SIZE or w % MB_SIZE:
        raise ValueError("frame must be padded to a multiple of 16")
    return plane


def _step_indices(q_mults, shape) -> Optional[np.ndarray]:
    if q_mults is None:
        return None
    idx = quantize_multipliers(q_mults)
    if idx.shape != shape:
        raise ValueError(f"multiplier grid shape {idx.shape} does not match {shape}")
    return idx


def encode_intra_frame(frame, quant_plan: QuantPlan, q_mults=None):
    """Code every 8x8 block of raw samples; returns ``(payload, recon)``.

    ``q_mults`` is an optional per-macroblock multiplier grid; when given,
    a step index is coded for each macroblock.
    """
    plane = _as_plane(frame)
    h, w = plane.shape
    steps = _step_indices(q_mults, (h // MB_SIZE, w // MB_SIZE))
    enc = RangeEncoder()
    ctxs = ContextSet()
    recon = np.empty_like(plane)
    for by, bx in _mb_grid(w, h):
        y, x = by * MB_SIZE, bx * MB_SIZE
        step = quant_plan.effective_step
        if steps is not None:
            _write_step_index(enc, ctxs, int(steps[by, bx]))
            step *= STEP_SCALES[steps[by, bx]]
        levels = forward_levels(plane[y:y + MB_SIZE, x:x + MB_SIZE], step)
        for b in levels:
            encode_coef_block(enc, ctxs, b)
        recon[y:y + MB_SIZE, x:x + MB_SIZE] = clamp_plane(inverse_levels(levels, step))
    return enc.finish(), recon


def encode_inter_frame(
    frame,
    schedule_entry: FrameSchedule,
    dpb: DecodedPictureBuffer,
    quant_plan: QuantPlan,
    q_mults=None,
    *,
    multi_reference: bool = True,
    lambda_scale: float = LAMBDA_SCALE,
    lambda_base: float = 1.0,
):
    """Code one predicted frame; returns ``(payload, recon, MotionField)``."""
    plane = _as_plane(frame)
    h, w = plane.shape
    steps = _step_indices(q_mults, (h // MB_SIZE, w // MB_SIZE))
    adj, key = dpb.references(schedule_entry)
    if not multi_reference:
        key = None
    n_modes = 4 if key is not None else 2
    enc = RangeEncoder()
    ctxs = ContextSet()
    recon = np.empty_like(plane)
    cols = w // MB_SIZE
    mv_adj_row: list = [None] * cols
    mv_key_row: list = [None] * cols
    blocks = []
    for by, bx in _mb_grid(w, h):
        y, x = by * MB_SIZE, bx * MB_SIZE
        step = quant_plan.effective_step
        if steps is not None:
            _write_step_index(enc, ctxs, int(steps[by, bx]))
            step *= STEP_SCALES[steps[by, bx]]
        lam = lambda_base * lambda_scale * step * step
        left_a = mv_adj_row[bx - 1] if bx else None
        left_k = mv_key_row[bx - 1] if bx else None
        mvp_a = predict_mv(left_a, mv_adj_row[bx] if by else None)
        mvp_k = predict_mv(left_k, mv_key_row[bx] if by else None)
        cur = plane[y:y + MB_SIZE, x:x + MB_SIZE]
        bp = predict_multi_ref(
            cur, adj, key, lam,
            origin=(x, y), mvp_adj=mvp_a, mvp_key=mvp_k,
            dc_value=intra_dc_value(recon, (x, y)),
        )
        mode_index = int(bp.mode) if key is not None else (0 if bp.mode == Mode.ADJ else 1)
        encode_mode(enc, ctxs, mode_index, n_modes)
        if bp.mv_adj is not None:
            encode_mvd(enc, ctxs, (bp.mv_adj[0] - mvp_a[0], bp.mv_adj[1] - mvp_a[1]))
        if bp.mv_key is not None:
            encode_mvd(enc, ctxs, (bp.mv_key[0] - mvp_k[0], bp.mv_key[1] - mvp_k[1]))
        residual = cur.astype(np.int32) - bp.prediction.astype(np.int32)
        levels = forward_levels(residual, step)
        for b in levels:
            encode_coef_block(enc, ctxs, b)
        recon[y:y + MB_SIZE, x:x + MB_SIZE] = clamp_plane(bp.prediction + inverse_levels(levels, step))
        mv_adj_row[bx] = bp.mv_adj
        mv_key_row[bx] = bp.mv_key
        blocks.append(bp)
    return enc.finish(), recon, MotionField(w, h, tuple(blocks))


# --- lookahead ---------------------------------------------------------------

def lookahead_weights(cur, nxt, strength: float) -> np.ndarray:
    """Per-macroblock step multipliers of ``cur`` from one future frame.

    Each block of ``nxt`` is matched onto the original ``cur``.  A match
    whose error is small relative to the block's own activity marks the
    region of ``cur`` it lands on as referenced; overlapped areas
    accumulate ``w``, and the multiplier is ``clamp((1 + w)^-strength, 0.5, 1)``.
    """
    a = _as_plane(cur)
    b = _as_plane(nxt)
    if a.shape != b.shape:
        raise ValueError(f"lookahead frames differ in size: {a.shape} vs {b.shape}")
    h, w = a.shape
    rows, cols = h // MB_SIZE, w // MB_SIZE
    if strength == 0:
        return np.ones((rows, cols))
    ref = RefPicture(a)
    acc = np.zeros((rows, cols))
    area = float(MB_SIZE * MB_SIZE)
    for by, bx in _mb_grid(w, h):
        y, x = by * MB_SIZE, bx * MB_SIZE
        blk = b[y:y + MB_SIZE, x:x + MB_SIZE]
        mv, sad_inter = motion_search(blk, ref, (x, y), MV_RANGE)
        sad_intra = float(np.abs(blk - blk.mean()).sum())
        reuse = max(0.0, 1.0 - sad_inter / (sad_intra + 1.0))
        if reuse == 0.0:
            continue
        mx, my = x + mv.dx, y + mv.dy
        for ty in range(max(0, my // MB_SIZE), min(rows, (my + MB_SIZE - 1) // MB_SIZE + 1)):
            oy = min(my + MB_SIZE, (ty + 1) * MB_SIZE) - max(my, ty * MB_SIZE)
            if oy <= 0:
                continue
            for tx in range(max(0, mx // MB_SIZE), min(cols, (mx + MB_SIZE - 1) // MB_SIZE + 1)):
                ox = min(mx + MB_SIZE, (tx + 1) * MB_SIZE) - max(mx, tx * MB_SIZE)
                if ox > 0:
                    acc[ty, tx] += ox * oy / area * reuse
    return np.clip((1.0 + acc) ** (-strength), 0.5, 1.0)


# --- sequence level ----------------------------------------------------------

def _layer_code(entry: FrameSchedule) -> int:
    return 0 if entry.layer is None else int(entry.layer.id)


def _header_for(seq: Sequence, config: CodecConfig) -> SequenceHeader:
    st = config.structure
    flags = 0
    if config.lookahead_active:
        flags |= FLAG_BLOCK_STEPS
    if config.omega_mode == "random_key":
        flags |= FLAG_RANDOM_OMEGA
    if not config.multi_reference:
        flags |= FLAG_SINGLE_REF
    step_milli = int(round_half_away(st.base_step * 1000))
    weights_milli = tuple(int(round_half_away(wt * 1000)) for wt in st.weights)
    if step_milli < 1 or step_milli > 0xFFFFFFFF or min(weights_milli) < 1 or max(weights_milli) > 0xFFFF:
        raise ValueError("base_step or weights not representable in the sequence header")
    return SequenceHeader(seq.width, seq.height, len(seq), step_milli, weights_milli, st.intra_period, flags)


def frame_plan(header: SequenceHeader, entry: FrameSchedule, omega: float) -> QuantPlan:
    return make_quant_plan(header.base_step, entry.quant_multiplier, omega)


def encode_sequence(seq: Sequence, config: CodecConfig) -> EncodeResult:
    if len(seq) == 0:
        raise ValueError("cannot encode an empty sequence")
    header = _header_for(seq, config)
    structure = header.structure()
    schedule = build_schedule(structure)
    lambda_base = config.structure.lambda_base
    padded = [pad_to_multiple(f, 16) for f in seq.frames]
    rng = np.random.default_rng(config.random_omega_seed)
    out = bytearray(header.pack())
    dpb = DecodedPictureBuffer()
    recons, stats = [], []
    for entry in schedule:
        t = entry.index
        omega_q = 256
        if config.omega_mode == "random_key" and entry.is_key:
            omega_q = omega_to_q88(rng.uniform(OMEGA_MIN, OMEGA_MAX))
            entry = replace(entry, omega_perturb=omega_q / 256.0)
        plan = frame_plan(header, entry, omega_q / 256.0)
        q_mults = None
        if config.lookahead_active:
            if t + 1 < len(padded):
                q_mults = lookahead_weights(padded[t], padded[t + 1], config.lookahead_strength)
            else:
                q_mults = np.ones((padded[t].height // MB_SIZE, padded[t].width // MB_SIZE))
        modes = {}
        if entry.is_intra:
            payload, recon = encode_intra_frame(padded[t], plan, q_mults)
        else:
            payload, recon, field_ = encode_inter_frame(
                padded[t], entry, dpb, plan, q_mults,
                multi_reference=config.multi_reference,
                lambda_scale=config.lambda_scale,
                lambda_base=lambda_base,
            )
            modes = field_.mode_counts()
        fh = FrameHeader(int(entry.frame_type), _layer_code(entry), omega_q, len(payload))
        out += fh.pack()
        out += payload
        dpb.update(entry, recon)
        rec = crop(Frame(recon.shape[1], recon.shape[0], recon), seq.width, seq.height)
        recons.append(rec)
        err = seq[t].luma.astype(np.int64) - rec.luma.astype(np.int64)
        sse = int((err * err).sum())
        stats.append(FrameStats(
            t,
            "Intra" if entry.is_intra else "Inter",
            entry.layer.name if entry.layer else "Intra",
            omega_q / 256.0,
            8 * (FRAME_HEADER.size + len(payload)),
            sse,
            metrics.psnr_from_sse(sse, seq.width * seq.height),
            modes,
        ))
    return EncodeResult(bytes(out), recons, stats, seq.width, seq.height)


class Decoder:
    """Stateful decoder; ``concealed`` lists frames replaced after errors."""

    def __init__(self, conceal_errors: bool = False):
        self.conceal_errors = conceal_errors
        self.concealed: list[int] = []
        self.header: Optional[SequenceHeader] = None
        self.frame_headers: list[FrameHeader] = []

    def decode(self, data: bytes) -> Sequence:
        data = bytes(data)
        header = SequenceHeader.unpack(data)
        self.header = header
        schedule = build_schedule(header.structure())
        pw = -(-header.width // MB_SIZE) * MB_SIZE
        ph = -(-header.height // MB_SIZE) * MB_SIZE
        pos = SEQ_HEADER.size
        dpb = DecodedPictureBuffer()
        frames: list[Frame] = []
        for entry in schedule:
            if pos + FRAME_HEADER.size > len(data):
                raise TruncatedStreamError(f"frame {entry.index}: header truncated", frames)
            ftype, layer, omega_q, plen, _ = FRAME_HEADER.unpack_from(data, pos)
            pos += FRAME_HEADER.size
            if pos + plen > len(data):
                raise TruncatedStreamError(f"frame {entry.index}: payload truncated", frames)
            payload = data[pos:pos + plen]
            pos += plen
            fh = FrameHeader(ftype, layer, omega_q, plen)
            self.frame_headers.append(fh)
            if ftype != int(entry.frame_type) or layer != _layer_code(entry):
                raise CorruptPayloadError(f"frame {entry.index}: header disagrees with the schedule", frames)
            if not OMEGA_Q_MIN <= omega_q <= OMEGA_Q_MAX:
                raise OmegaRangeError(f"frame {entry.index}: omega {omega_q}/256 outside [0.8, 1.2]")
            plan = frame_plan(header, entry, omega_q / 256.0)
            try:
                recon = self._decode_payload(payload, entry, dpb, plan, header, (ph, pw))
            except (PayloadError, ValueError) as exc:
                if not self.conceal_errors:
                    raise CorruptPayloadError(f"frame {entry.index}: {exc}", frames) from exc
                log.warning("frame %d undecodable (%s); concealing", entry.index, exc)
                self.concealed.append(entry.index)
                recon = dpb.last.plane.copy() if dpb.last is not None else np.full((ph, pw), 128, np.uint8)
            dpb.update(entry, recon)
            frames.append(crop(Frame(pw, ph, recon), header.width, header.height))
        return Sequence(tuple(frames))

    def _decode_payload(self, payload, entry, dpb, plan, header, shape) -> np.ndarray:
        dec = RangeDecoder(payload)
        ctxs = ContextSet()
        block_steps = bool(header.flags & FLAG_BLOCK_STEPS)
        if entry.is_intra:
            recon = self._decode_intra(dec, ctxs, plan, block_steps, shape)
        else:
            recon = self._decode_inter(dec, ctxs, plan, block_steps, shape, entry, dpb,
                                       not header.flags & FLAG_SINGLE_REF)
        if not dec.exhausted:
            raise PayloadError("trailing bytes after the last macroblock")
        return recon

    @staticmethod
    def _block_step(dec, ctxs, plan, block_steps) -> float:
        step = plan.effective_step
        if block_steps:
            step *= STEP_SCALES[_read_step_index(dec, ctxs)]
        return step

    def _decode_intra(self, dec, ctxs, plan, block_steps, shape) -> np.ndarray:
        h, w = shape
        recon = np.empty((h, w), dtype=np.uint8)
        for by, bx in _mb_grid(w, h):
            y, x = by * MB_SIZE, bx * MB_SIZE
            step = self._block_step(dec, ctxs, plan, block_steps)
            levels = np.stack([decode_coef_block(dec, ctxs) for _ in range(4)])
            recon[y:y + MB_SIZE, x:x + MB_SIZE] = clamp_plane(inverse_levels(levels, step))
        return recon

    def _decode_inter(self, dec, ctxs, plan, block_steps, shape, entry, dpb, multi_reference) -> np.ndarray:
        h, w = shape
        adj, key = dpb.references(entry)
        if not multi_reference:
            key = None
        n_modes = 4 if key is not None else 2
        recon = np.empty((h, w), dtype=np.uint8)
        cols = w // MB_SIZE
        mv_adj_row: list = [None] * cols
        mv_key_row: list = [None] * cols
        for by, bx in _mb_grid(w, h):
            y, x = by * MB_SIZE, bx * MB_SIZE
            step = self._block_step(dec, ctxs, plan, block_steps)
            mvp_a = predict_mv(mv_adj_row[bx - 1] if bx else None, mv_adj_row[bx] if by else None)
            mvp_k = predict_mv(mv_key_row[bx - 1] if bx else None, mv_key_row[bx] if by else None)
            mode_index = decode_mode(dec, ctxs, n_modes)
            mode = Mode(mode_index) if key is not None else (Mode.ADJ if mode_index == 0 else Mode.INTRA_DC)
            mv_a = mv_k = None
            if mode in (Mode.ADJ, Mode.AVG):
                d = decode_mvd(dec, ctxs)
                mv_a = MotionVector(mvp_a[0] + d[0], mvp_a[1] + d[1])
            if mode in (Mode.KEY, Mode.AVG):
                d = decode_mvd(dec, ctxs)
                mv_k = MotionVector(mvp_k[0] + d[0], mvp_k[1] + d[1])
            for mv in (mv_a, mv_k):
                if mv is not None and (abs(mv[0]) > MV_RANGE or abs(mv[1]) > MV_RANGE):
                    raise PayloadError("motion vector out of range")
            if mode == Mode.ADJ:
                pred = motion_compensate(adj, mv_a, (x, y))
            elif mode == Mode.KEY:
                pred = motion_compensate(key, mv_k, (x, y))
            elif mode == Mode.AVG:
                pred = average_prediction(motion_compensate(adj, mv_a, (x, y)), motion_compensate(key, mv_k, (x, y)))
            else:
                pred = np.full((MB_SIZE, MB_SIZE), intra_dc_value(recon, (x, y)), dtype=np.uint8)
            levels = np.stack([decode_coef_block(dec, ctxs) for _ in range(4)])
            recon[y:y + MB_SIZE, x:x + MB_SIZE] = clamp_plane(pred + inverse_levels(levels, step))
            mv_adj_row[bx] = mv_a
            mv_key_row[bx] = mv_k
        return recon


def decode_sequence(bitstream: bytes, *, conceal_errors: bool = False) -> Sequence:
    return Decoder(conceal_errors).decode(bitstream)
