"""Adaptive binary range coder and the syntax binarizations built on it.

The coder is a carry-propagating 32-bit range coder (low/range with a byte
cache) over 12-bit probabilities of the bit being 0.  Contexts adapt after
every regular bin with a rate that starts at 1/2 and halves as the context
sees more bins, settling at 1/128; bypass bins use a fixed probability of
one half.  The flush writes the four bytes of ``low``, so the decoder reads
exactly the bytes the encoder wrote.
"""

from __future__ import annotations

import hashlib

import numpy as np

PROB_BITS = 12
PROB_ONE = 1 << PROB_BITS
PROB_INIT = PROB_ONE // 2
PROB_MAX = PROB_ONE - 1
MAX_ADAPT_SHIFT = 7
TOP = 1 << 24
MASK32 = 0xFFFFFFFF
MAX_UE_PREFIX = 32


class PayloadError(ValueError):
    """Raised when a payload cannot be decoded."""


class BinProb:
    """Probability of a 0 bin, in units of 1/4096.

    After the n-th update (counting from 0) the estimate moves towards the
    target (4095 for a 0, 1 for a 1) by ``1 / 2**s`` with rounding, where
    ``s = min(7, floor(log2(n + 2)))``.  The short early shifts make the
    estimate behave like a frequency count; the long final shift keeps
    estimation noise low on stationary sources.
    """

    __slots__ = ("p", "count")

    def __init__(self, p: int = PROB_INIT):
        self.p = p
        self.count = 0

    def update(self, bit: int) -> None:
        n = self.count
        s = (n + 2).bit_length() - 1
        if s > MAX_ADAPT_SHIFT:
            s = MAX_ADAPT_SHIFT
        else:
            self.count = n + 1
        p = self.p
        p += ((1 if bit else PROB_MAX) - p + (1 << (s - 1))) >> s
        self.p = 1 if p < 1 else PROB_MAX if p > PROB_MAX else p

    def __repr__(self):
        return f"BinProb({self.p})"


class ContextSet:
    """All adaptive contexts of one frame payload."""

    def __init__(self):
        self.reset()

    def reset(self) -> None:
        self.mode = [BinProb() for _ in range(3)]
        # zero flags for x/y, then greater-than-one flags for x/y
        self.mv = [BinProb() for _ in range(4)]
        self.sig = [BinProb() for _ in range(4)]
        self.level = [BinProb() for _ in range(2)]
        self.last = [BinProb() for _ in range(2)]
        self.cbf = BinProb()
        # per-macroblock quantizer step index (lookahead)
        self.qidx = [BinProb() for _ in range(2)]

    def _all(self):
        for group in (self.mode, self.mv, self.sig, self.level, self.last, (self.cbf,), self.qidx):
            yield from group

    def probabilities(self) -> tuple:
        return tuple((c.p, c.count) for c in self._all())

    def state_hash(self) -> str:
        return hashlib.sha256(np.asarray(self.probabilities(), dtype=np.int64).tobytes()).hexdigest()


class RangeEncoder:
    def __init__(self):
        self.low = 0
        self.range = MASK32
        self._cache = 0
        self._cache_size = 1
        self._out = bytearray()
        self._skip_first = True
        self.bins = 0

    def _shift_low(self) -> None:
        low = self.low
        if low < 0xFF000000 or low > MASK32:
            carry = low >> 32
            temp = self._cache
            while True:
                if self._skip_first:
                    # the very first byte is always zero
                    self._skip_first = False
                else:
                    self._out.append((temp + carry) & 0xFF)
                temp = 0xFF
                self._cache_size -= 1
                if self._cache_size == 0:
                    break
            self._cache = (low >> 24) & 0xFF
        self._cache_size += 1
        self.low = (low & 0x00FFFFFF) << 8

    def encode_bit(self, ctx: BinProb, bit: int) -> None:
        bound = (self.range >> PROB_BITS) * ctx.p
        if bit:
            self.low += bound
            self.range -= bound
        else:
            self.range = bound
        ctx.update(bit)
        self.bins += 1
        while self.range < TOP:
            self.range <<= 8
            self._shift_low()

    def encode_bypass(self, bit: int) -> None:
        bound = (self.range >> PROB_BITS) * PROB_INIT
        if bit:
            self.low += bound
            self.range -= bound
        else:
            self.range = bound
        self.bins += 1
        while self.range < TOP:
            self.range <<= 8
            self._shift_low()

    def finish(self) -> bytes:
        for _ in range(5):
            self._shift_low()
        return bytes(self._out)


class RangeDecoder:
    def __init__(self, data: bytes):
        if len(data) < 4:
            raise PayloadError("payload shorter than the range coder preamble")
        self._data = data
        self._pos = 4
        self.code = int.from_bytes(data[:4], "big")
        self.range = MASK32
        self.bins = 0

    def _next_byte(self) -> int:
        if self._pos >= len(self._data):
            raise PayloadError("read past end of payload")
        b = self._data[self._pos]
        self._pos += 1
        return b

    @property
    def exhausted(self) -> bool:
        return self._pos >= len(self._data)

    def decode_bit(self, ctx: BinProb) -> int:
        bound = (self.range >> PROB_BITS) * ctx.p
        if self.code < bound:
            self.range = bound
            bit = 0
        else:
            self.code -= bound
            self.range -= bound
            bit = 1
        ctx.update(bit)
        self.bins += 1
        while self.range < TOP:
            self.range <<= 8
            self.code = ((self.code << 8) | self._next_byte()) & MASK32
        return bit

    def decode_bypass(self) -> int:
        bound = (self.range >> PROB_BITS) * PROB_INIT
        if self.code < bound:
            self.range = bound
            bit = 0
        else:
            self.code -= bound
            self.range -= bound
            bit = 1
        self.bins += 1
        while self.range < TOP:
            self.range <<= 8
            self.code = ((self.code << 8) | self._next_byte()) & MASK32
        return bit


# --- binarizations -----------------------------------------------------------

def ue_length(value: int) -> int:
    """Codeword length of order-0 exp-Golomb."""
    return 2 * (value + 1).bit_length() - 1


def zigzag_signed(value: int) -> int:
    """0, -1, 1, -2, 2, ... -> 0, 1, 2, 3, 4, ..."""
    return 2 * value if value >= 0 else -2 * value - 1


def unzigzag(code: int) -> int:
    return -((code + 1) // 2) if code & 1 else code // 2


def se_length(value: int) -> int:
    return ue_length(zigzag_signed(value))


def encode_ue(enc: RangeEncoder, value: int) -> None:
    if value < 0:
        raise ValueError("ue needs a non-negative value")
    v = value + 1
    n = v.bit_length() - 1
    for _ in range(n):
        enc.encode_bypass(0)
    for i in range(n, -1, -1):
        enc.encode_bypass((v >> i) & 1)


def decode_ue(dec: RangeDecoder) -> int:
    n = 0
    while dec.decode_bypass() == 0:
        n += 1
        if n > MAX_UE_PREFIX:
            raise PayloadError("exp-Golomb prefix too long")
    v = 1
    for _ in range(n):
        v = (v << 1) | dec.decode_bypass()
    return v - 1


def encode_se(enc: RangeEncoder, value: int) -> None:
    encode_ue(enc, zigzag_signed(value))


def decode_se(dec: RangeDecoder) -> int:
    return unzigzag(decode_ue(dec))


def _zigzag_order(n: int = 8) -> np.ndarray:
    cells = sorted(
        ((x, y) for y in range(n) for x in range(n)),
        key=lambda c: (c[0] + c[1], c[1] if (c[0] + c[1]) % 2 else c[0]),
    )
    return np.asarray([y * n + x for x, y in cells], dtype=np.intp)


ZIGZAG = _zigzag_order(8)
ZIGZAG.setflags(write=False)
_SIG_BAND = tuple(0 if i == 0 else 1 if i <= 5 else 2 if i <= 20 else 3 for i in range(64))
_LAST_CTX = tuple(0 if i < 6 else 1 for i in range(64))


def encode_coef_block(enc: RangeEncoder, ctxs: ContextSet, levels) -> None:
    """Code 64 raster-order levels in zigzag order."""
    scan = np.asarray(levels, dtype=np.int64).reshape(64)[ZIGZAG].tolist()
    nz = [i for i, v in enumerate(scan) if v]
    if not nz:
        enc.encode_bit(ctxs.cbf, 0)
        return
    enc.encode_bit(ctxs.cbf, 1)
    last_pos = nz[-1]
    sig, lev, last = ctxs.sig, ctxs.level, ctxs.last
    for pos in range(last_pos + 1):
        v = scan[pos]
        enc.encode_bit(sig[_SIG_BAND[pos]], 1 if v else 0)
        if not v:
            continue
        mag = -v if v < 0 else v
        enc.encode_bit(lev[0 if pos == 0 else 1], 1 if mag > 1 else 0)
        if mag > 1:
            encode_ue(enc, mag - 2)
        enc.encode_bypass(1 if v < 0 else 0)
        enc.encode_bit(last[_LAST_CTX[pos]], 1 if pos == last_pos else 0)


def decode_coef_block(dec: RangeDecoder, ctxs: ContextSet) -> np.ndarray:
    out = np.zeros(64, dtype=np.int64)
    if not dec.decode_bit(ctxs.cbf):
        return out
    sig, lev, last = ctxs.sig, ctxs.level, ctxs.last
    scan = [0] * 64
    for pos in range(64):
        if not dec.decode_bit(sig[_SIG_BAND[pos]]):
            continue
        mag = 1
        if dec.decode_bit(lev[0 if pos == 0 else 1]):
            mag = decode_ue(dec) + 2
        scan[pos] = -mag if dec.decode_bypass() else mag
        if dec.decode_bit(last[_LAST_CTX[pos]]):
            out[ZIGZAG] = scan
            return out
    raise PayloadError("coefficient block has no terminating last flag")


def encode_mvd(enc: RangeEncoder, ctxs: ContextSet, mvd) -> None:
    for c in (0, 1):
        v = int(mvd[c])
        enc.encode_bit(ctxs.mv[c], 1 if v else 0)
        if not v:
            continue
        mag = -v if v < 0 else v
        enc.encode_bit(ctxs.mv[2 + c], 1 if mag > 1 else 0)
        if mag > 1:
            encode_ue(enc, mag - 2)
        enc.encode_bypass(1 if v < 0 else 0)


def decode_mvd(dec: RangeDecoder, ctxs: ContextSet) -> tuple[int, int]:
    out = []
    for c in (0, 1):
        if not dec.decode_bit(ctxs.mv[c]):
            out.append(0)
            continue
        mag = 1
        if dec.decode_bit(ctxs.mv[2 + c]):
            mag = decode_ue(dec) + 2
        out.append(-mag if dec.decode_bypass() else mag)
    return out[0], out[1]


def encode_mode(enc: RangeEncoder, ctxs: ContextSet, mode_index: int, n_modes: int) -> None:
    """Truncated unary over ``n_modes`` symbols, one context per bin."""
    for i in range(n_modes - 1):
        bit = 1 if mode_index > i else 0
        enc.encode_bit(ctxs.mode[i], bit)
        if not bit:
            return


def decode_mode(dec: RangeDecoder, ctxs: ContextSet, n_modes: int) -> int:
    i = 0
    while i < n_modes - 1 and dec.decode_bit(ctxs.mode[i]):
        i += 1
    return i
