"""YUV4MPEG2 reader/writer for progressive 8-bit 4:2:0 content."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .core import Frame, Sequence, chroma_dim

SIGNATURE = b"YUV4MPEG2"
SUPPORTED_COLORSPACES = {"420", "420jpeg", "420paldv", "420mpeg2"}


class Y4MError(ValueError):
    pass


class UnsupportedColorspaceError(Y4MError):
    pass


class TruncatedFrameError(Y4MError):
    pass


def _parse_params(tokens):
    params = {}
    for tok in tokens:
        if tok:
            params[tok[:1]] = tok[1:]
    return params


def parse_y4m(data: bytes) -> Sequence:
    data = bytes(data)
    nl = data.find(b"\n")
    if nl < 0 or not data.startswith(SIGNATURE):
        raise Y4MError("missing YUV4MPEG2 header")
    params = _parse_params(data[len(SIGNATURE):nl].decode("ascii").split(" "))
    try:
        width, height = int(params["W"]), int(params["H"])
        num, den = (int(v) for v in params["F"].split(":"))
    except (KeyError, ValueError) as exc:
        raise Y4MError(f"header needs W, H and F parameters: {exc}") from None
    if width <= 0 or height <= 0 or num <= 0 or den <= 0:
        raise Y4MError("non-positive header parameter")
    cs = params.get("C", "420")
    if cs not in SUPPORTED_COLORSPACES:
        raise UnsupportedColorspaceError(f"unsupported colorspace C{cs}")
    if params.get("I", "p") not in ("p", "?"):
        raise Y4MError("only progressive content is supported")
    ysize = width * height
    ch, cw = chroma_dim(height), chroma_dim(width)
    csize = ch * cw
    frames = []
    pos = nl + 1
    while pos < len(data):
        fnl = data.find(b"\n", pos)
        if fnl < 0 or not data.startswith(b"FRAME", pos):
            raise Y4MError(f"expected FRAME marker at byte {pos}")
        pos = fnl + 1
        end = pos + ysize + 2 * csize
        if end > len(data):
            raise TruncatedFrameError(f"frame {len(frames)} truncated")
        buf = np.frombuffer(data, dtype=np.uint8, count=ysize + 2 * csize, offset=pos)
        frames.append(Frame(
            width, height,
            buf[:ysize].reshape(height, width),
            buf[ysize:ysize + csize].reshape(ch, cw),
            buf[ysize + csize:].reshape(ch, cw),
        ))
        pos = end
    return Sequence(tuple(frames), Fraction(num, den))


def write_y4m(seq: Sequence) -> bytes:
    """Serialise ``seq``; frames without chroma get neutral (128) chroma."""
    if not len(seq):
        raise Y4MError("cannot write an empty sequence")
    rate = Fraction(seq.frame_rate)
    parts = [f"YUV4MPEG2 W{seq.width} H{seq.height} F{rate.numerator}:{rate.denominator} Ip C420jpeg\n".encode("ascii")]
    neutral = np.full((chroma_dim(seq.height), chroma_dim(seq.width)), 128, dtype=np.uint8)
    for f in seq:
        parts.append(b"FRAME\n")
        parts.append(f.luma.tobytes())
        parts.append((f.chroma_u if f.has_chroma else neutral).tobytes())
        parts.append((f.chroma_v if f.has_chroma else neutral).tobytes())
    return b"".join(parts)
