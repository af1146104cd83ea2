"""Fingerprint value type, hashing and Tanimoto similarity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash; platform independent."""
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def fold(h: int, width: int) -> int:
    """Map a 64-bit hash onto a bit index in ``[0, width)``."""
    return h % width


@dataclass(frozen=True)
class Fingerprint:
    """Fixed-width bit vector tagged with the algorithm that produced it.

    ``bits`` is an integer whose bit ``i`` is fingerprint position ``i``.
    """

    family: str
    params: tuple
    width: int
    bits: int = 0

    def __post_init__(self) -> None:
        if self.width <= 0:
            raise ValueError("fingerprint width must be positive")
        if self.bits < 0 or self.bits >> self.width:
            raise ValueError("bits outside fingerprint width")

    @classmethod
    def from_indices(cls, family: str, params: tuple, width: int, indices: Iterable[int]) -> Fingerprint:
        bits = 0
        for i in indices:
            bits |= 1 << i
        return cls(family, params, width, bits)

    def popcount(self) -> int:
        return bin(self.bits).count("1")

    def on_bits(self) -> list[int]:
        return [i for i in range(self.width) if self.bits >> i & 1]

    def __contains__(self, index: int) -> bool:
        return bool(self.bits >> index & 1)

    def to_hex(self) -> str:
        """Hex string, most significant position first, padded to the full width."""
        return format(self.bits, f"0{(self.width + 3) // 4}x")


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a AND b| / |a OR b|; 0.0 when both fingerprints are empty.

    Raises:
        ValueError: if the fingerprints come from different families or parameters.
    """
    if (a.family, a.params, a.width) != (b.family, b.params, b.width):
        raise ValueError(
            f"cannot compare {a.family}{a.params} with {b.family}{b.params} fingerprints"
        )
    union = bin(a.bits | b.bits).count("1")
    if union == 0:
        return 0.0
    return bin(a.bits & b.bits).count("1") / union


def fts_batch(pairs: Sequence[tuple], fingerprinter: Callable[..., Fingerprint]) -> float:
    """Mean Tanimoto similarity over (reference, prediction) molecule pairs."""
    if not pairs:
        raise ValueError("fts_batch needs at least one pair")
    total = 0.0
    for ref, pred in pairs:
        total += tanimoto(fingerprinter(ref), fingerprinter(pred))
    return total / len(pairs)
