"""Fixed-width cell words and the bit-level primitives used by the watermark.

A numeric cell is stored as a W-bit unsigned word. Bit 0 carries the
attribute-watermark bit, bit 1 the tuple-watermark bit, and bits >= 2 carry
data. Signed values use two's complement inside the W bits, and decimal
columns are shifted by ``10**scale`` into the integer domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Union

import numpy as np

Number = Union[int, str, Decimal, float]

LOW_BITS = 0b11
INTEGER = "integer"
DECIMAL = "decimal"


class CodecError(ValueError):
    """A raw value cannot be represented as a cell word."""


@dataclass(frozen=True)
class ColumnSpec:
    """Encoding of one numeric column."""

    name: str
    kind: str = INTEGER
    scale: int = 0
    width_bits: int = 32

    def __post_init__(self):
        if self.kind not in (INTEGER, DECIMAL):
            raise ValueError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if not 3 <= self.width_bits <= 64:
            raise ValueError(
                f"column {self.name!r}: width_bits must be in [3, 64], got {self.width_bits}"
            )
        if self.scale < 0:
            raise ValueError(f"column {self.name!r}: scale must be non-negative")
        if self.kind == INTEGER and self.scale != 0:
            raise ValueError(f"column {self.name!r}: integer columns have scale 0")

    @property
    def modulus(self) -> int:
        return 1 << self.width_bits


def _to_decimal(raw: Number) -> Decimal:
    if isinstance(raw, Decimal):
        return raw
    if isinstance(raw, float):
        return Decimal(repr(raw))
    try:
        return Decimal(str(raw).strip())
    except InvalidOperation:
        raise CodecError(f"not a number: {raw!r}") from None


def encode_cell(raw: Number, spec: ColumnSpec) -> int:
    """Encode ``raw`` as a W-bit word.

    Raises:
        CodecError: if the scaled value is not an integer or does not fit in
            ``spec.width_bits`` bits of two's complement.
    """
    if isinstance(raw, int) and not isinstance(raw, bool) and spec.scale == 0:
        scaled = raw
    else:
        value = _to_decimal(raw)
        if not value.is_finite():
            raise CodecError(f"not a finite number: {raw!r}")
        shifted = value.scaleb(spec.scale)
        if shifted != shifted.to_integral_value():
            raise CodecError(
                f"{raw!r} has more than {spec.scale} fractional digits for column {spec.name!r}"
            )
        scaled = int(shifted)
    half = 1 << (spec.width_bits - 1)
    if not -half <= scaled < half:
        raise CodecError(
            f"{raw!r} overflows {spec.width_bits}-bit column {spec.name!r}"
        )
    return scaled % spec.modulus


def decode_cell(word: int, spec: ColumnSpec) -> Union[int, Decimal]:
    word = int(word)
    if word >= 1 << (spec.width_bits - 1):
        word -= spec.modulus
    if spec.kind == INTEGER:
        return word
    return Decimal(word).scaleb(-spec.scale)


def mask(word: int) -> int:
    """Clear the two watermark bits."""
    return word & ~LOW_BITS


def get_bit(word: int, position: int) -> int:
    return (word >> position) & 1


def set_bit(word: int, position: int, bit: int) -> int:
    if bit:
        return word | (1 << position)
    return word & ~(1 << position)


def fold(word: int, length: int) -> int:
    """XOR the ``length``-bit chunks of ``word``, least-significant chunk first.

    The result is an integer below ``2**length``; read MSB-first it is the
    bit string of that length.
    """
    if length < 1:
        raise ValueError("fold length must be positive")
    chunk_mask = (1 << length) - 1
    out = 0
    while word:
        out ^= word & chunk_mask
        word >>= length
    return out


@dataclass(frozen=True)
class BitString:
    """An immutable bit string, most-significant bit first.

    ``value`` holds the bits as an integer whose top bit is position 0.
    """

    value: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("bit strings are non-empty")
        if not 0 <= self.value < (1 << self.length):
            raise ValueError(f"value does not fit in {self.length} bits")

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        return cls(int(text, 2), len(text))

    @classmethod
    def from_bytes(cls, data: bytes) -> "BitString":
        return cls(int.from_bytes(data, "big"), 8 * len(data))

    @classmethod
    def from_bits(cls, bits) -> "BitString":
        bits = [int(b) for b in bits]
        value = 0
        for b in bits:
            value = (value << 1) | b
        return cls(value, len(bits))

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.value >> (self.length - 1 - i)) & 1

    def __xor__(self, other: "BitString") -> "BitString":
        if other.length != self.length:
            raise ValueError("length mismatch")
        return BitString(self.value ^ other.value, self.length)

    def __str__(self) -> str:
        return format(self.value, f"0{self.length}b")

    def to_array(self) -> np.ndarray:
        return int_to_bits(self.value, self.length)


def extract_bits(h: BitString, length: int) -> BitString:
    """Take the ``length`` leading bits of ``h``, cycling through ``h`` again
    when it is too short."""
    if length < 1:
        raise ValueError("length must be positive")
    if h.length >= length:
        return BitString(h.value >> (h.length - length), length)
    rest = extract_bits(h, length - h.length)
    return BitString((h.value << rest.length) | rest.value, length)


# -- array helpers shared by the group kernels -------------------------------

def int_to_bits(value: int, length: int) -> np.ndarray:
    """MSB-first uint8 bit array of ``value`` zero-extended to ``length`` bits."""
    nbytes = (length + 7) // 8
    raw = np.frombuffer(value.to_bytes(nbytes, "big"), dtype=np.uint8)
    return np.unpackbits(raw)[8 * nbytes - length:]


def bits_to_int(bits: np.ndarray) -> int:
    bits = np.asarray(bits, dtype=np.uint8)
    pad = (-len(bits)) % 8
    packed = np.packbits(np.concatenate([np.zeros(pad, np.uint8), bits]))
    return int.from_bytes(packed.tobytes(), "big")


def cycle_bits(bits: np.ndarray, length: int) -> np.ndarray:
    """Array form of :func:`extract_bits`; works row-wise on 2-D input."""
    n = bits.shape[-1]
    if length <= n:
        return bits[..., :length]
    reps = -(-length // n)
    return np.tile(bits, (1,) * (bits.ndim - 1) + (reps,))[..., :length]


def mask_array(words: np.ndarray) -> np.ndarray:
    return words & np.uint64(~LOW_BITS & 0xFFFFFFFFFFFFFFFF)
