"""Hadamard signalling codebooks and per-burst code sequences for the two half-spaces.

Each pulse of a burst carries one entry of a transmissive code and one entry of
a reflective code; the surface splits its aperture so that the squared moduli
of paired entries sum to one on every pulse.  Codewords are Hadamard columns
scaled by 1/sqrt(2): the transmissive book takes the first 2^b columns, the
reflective book the last 2^b, which keeps all codewords mutually orthogonal
within and across books.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import hadamard as _sylvester_hadamard

from .geometry import HalfSpace

__all__ = [
    "hadamard",
    "Codebook",
    "CodeSequence",
    "build_codebooks",
    "radar_only_codes",
    "assemble_code_sequence",
]

COLUMN_ORDERS = ("natural", "reversed_tr")


def hadamard(n: int) -> np.ndarray:
    """Sylvester-type Hadamard matrix of order n (a power of two), integer entries."""
    if n < 1 or n & (n - 1):
        raise ValueError(f"Hadamard order {n} is not a power of two")
    return _sylvester_hadamard(n, dtype=np.int64)


def _message_columns(m: int, b: int, side: HalfSpace, column_order: str) -> np.ndarray:
    """Hadamard column index used by each message index, in message order."""
    n_codes = 1 << b
    if side is HalfSpace.TRANSMISSIVE:
        cols = np.arange(n_codes)
        if column_order == "reversed_tr":
            cols = cols[::-1]
        return cols
    # reflective book reads its block left to right under both orders
    return np.arange(m - n_codes, m)


@dataclass(frozen=True)
class Codebook:
    """Per-half-space signalling codebook: 2^b codewords of m pulses each.

    `codewords[i]` is the codeword for message index i; bits map to indices in
    natural binary order, most significant bit first.
    """

    side: HalfSpace
    m: int
    b: int
    column_order: str
    codewords: np.ndarray = field(repr=False)  # (2**b, m) float64, entries +-1/sqrt(2)

    @property
    def n_codewords(self) -> int:
        return 1 << self.b

    def codeword(self, index: int) -> np.ndarray:
        return self.codewords[index]

    def bits_to_index(self, bits) -> int:
        if len(bits) != self.b:
            raise ValueError(f"expected {self.b} bits, got {len(bits)}")
        index = 0
        for bit in bits:
            index = (index << 1) | int(bit)
        return index

    def index_to_bits(self, index: int) -> tuple[int, ...]:
        return tuple((index >> k) & 1 for k in range(self.b - 1, -1, -1))

    def to_text(self) -> str:
        """Plain-text dump, one codeword per line, entries space-separated."""
        buf = io.StringIO()
        for row in self.codewords:
            buf.write(" ".join(repr(v) for v in row.tolist()))
            buf.write("\n")
        return buf.getvalue()


def codewords_from_text(text: str) -> np.ndarray:
    """Parse a `Codebook.to_text` dump back into a (n_codewords, m) array."""
    rows = [
        [float(tok) for tok in line.split()] for line in text.splitlines() if line.strip()
    ]
    return np.asarray(rows, dtype=float)


def build_codebooks(
    m: int, b: int, column_order: str = "reversed_tr"
) -> tuple[Codebook, Codebook]:
    """Transmissive and reflective codebooks for m-pulse slots carrying b bits each.

    Requires m a power of two and 2^(b+1) <= m so the two books are disjoint.
    `column_order` fixes the message-index-to-column mapping: "reversed_tr"
    (default) enumerates the transmissive block right to left, "natural" reads
    both blocks left to right.  The codeword sets are identical either way.
    """
    if b < 0:
        raise ValueError(f"bits per slot must be >= 0, got {b}")
    if m < 1 or m & (m - 1):
        raise ValueError(f"pulses per slot {m} is not a power of two")
    if (1 << (b + 1)) > m:
        raise ValueError(f"2^(b+1) = {1 << (b + 1)} codewords do not fit in {m} pulses")
    if column_order not in COLUMN_ORDERS:
        raise ValueError(f"column_order must be one of {COLUMN_ORDERS}, got {column_order!r}")
    h = hadamard(m).astype(float) / math.sqrt(2.0)
    books = []
    for side in (HalfSpace.TRANSMISSIVE, HalfSpace.REFLECTIVE):
        cols = _message_columns(m, b, side, column_order)
        books.append(
            Codebook(side=side, m=m, b=b, column_order=column_order, codewords=h[:, cols].T.copy())
        )
    return books[0], books[1]


@dataclass(frozen=True)
class CodeSequence:
    """Code for one full burst: per-pulse values plus the slot structure that built them."""

    side: HalfSpace
    values: np.ndarray = field(repr=False)  # (n_pulses,) float64
    slot_len: int
    messages: tuple[int, ...]

    @property
    def n_pulses(self) -> int:
        return self.values.shape[0]

    def slot_values(self, slot: int) -> np.ndarray:
        return self.values[slot * self.slot_len : (slot + 1) * self.slot_len]


def radar_only_codes(n_pulses: int) -> tuple[CodeSequence, CodeSequence]:
    """Zero-rate burst codes: first and last Hadamard column over the whole burst.

    Equals a one-slot assembly with b = 0, so both column orders coincide.
    """
    book_tr, book_re = build_codebooks(n_pulses, 0)
    return (
        assemble_code_sequence(book_tr, [0], n_pulses),
        assemble_code_sequence(book_re, [0], n_pulses),
    )


def assemble_code_sequence(book: Codebook, messages, n_pulses: int) -> CodeSequence:
    """Concatenate one codeword per slot into a burst-length code sequence.

    `messages` holds one codeword index per slot; the burst must contain a
    whole number of slots and exactly len(messages) of them.
    """
    messages = tuple(int(v) for v in messages)
    if n_pulses % book.m:
        raise ValueError(f"burst of {n_pulses} pulses is not a multiple of slot length {book.m}")
    n_slots = n_pulses // book.m
    if len(messages) != n_slots:
        raise ValueError(f"expected {n_slots} messages for {n_pulses} pulses, got {len(messages)}")
    for msg in messages:
        if not 0 <= msg < book.n_codewords:
            raise ValueError(f"message index {msg} outside [0, {book.n_codewords})")
    values = book.codewords[list(messages)].reshape(-1)
    return CodeSequence(side=book.side, values=values, slot_len=book.m, messages=messages)
