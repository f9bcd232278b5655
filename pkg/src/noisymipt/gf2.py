"""GF(2) linear algebra on int bitsets.

Binary vectors are plain Python ints (bit ``b`` of the int is component
``b`` of the vector), which keeps Gaussian elimination word-packed without
any explicit word bookkeeping.  All reductions here work on copies; inputs
are never mutated.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


def rank(vectors: Iterable[int], limit: int | None = None) -> int:
    """Rank of a set of bit-vectors over GF(2).

    Builds an XOR echelon basis keyed by leading bit.  ``limit`` allows an
    early exit once the rank is known to have saturated (e.g. at the number
    of stabilizer generators).
    """
    pivots: dict[int, int] = {}
    r = 0
    for v in vectors:
        while v:
            b = v.bit_length() - 1
            p = pivots.get(b)
            if p is None:
                pivots[b] = v
                r += 1
                break
            v ^= p
        else:
            continue
        if r == limit:
            return r
    return r


def in_span(vectors: Iterable[int], target: int) -> bool:
    """Whether ``target`` lies in the GF(2) span of ``vectors``."""
    pivots: dict[int, int] = {}
    for v in vectors:
        while v:
            b = v.bit_length() - 1
            p = pivots.get(b)
            if p is None:
                pivots[b] = v
                break
            v ^= p
    while target:
        b = target.bit_length() - 1
        p = pivots.get(b)
        if p is None:
            return False
        target ^= p
    return True


def pack_rows(matrix: np.ndarray | Sequence[Sequence[int]]) -> list[int]:
    """Pack a 2-D 0/1 matrix into one int per row (bit b = column b)."""
    arr = np.asarray(matrix, dtype=np.uint8) & 1
    if arr.ndim != 2:
        raise ValueError("expected a 2-D binary matrix")
    out = []
    for row in arr:
        v = 0
        for b in np.flatnonzero(row):
            v |= 1 << int(b)
        out.append(v)
    return out


def rank_gf2(matrix: np.ndarray | Sequence[int], ncols: int | None = None) -> int:
    """GF(2) rank of a binary matrix.

    Accepts either a 2-D 0/1 array or an already bit-packed sequence of row
    ints.  ``ncols`` is accepted for interface symmetry but not needed by the
    packed elimination.
    """
    del ncols
    if isinstance(matrix, np.ndarray):
        rows: Sequence[int] = pack_rows(matrix)
    else:
        rows = list(matrix)
    return rank(rows)


def bit_transpose(vectors: Sequence[int], width: int) -> list[int]:
    """Transpose a bit matrix given as ``len(vectors)`` ints of ``width`` bits.

    Returns ``width`` ints of ``len(vectors)`` bits with
    ``out[b] >> i & 1 == vectors[i] >> b & 1``.  Uses numpy unpack/pack, which
    beats a double loop once either dimension exceeds a few dozen.
    """
    n = len(vectors)
    if n == 0:
        return [0] * width
    nbytes = (width + 7) // 8
    buf = bytearray(n * nbytes)
    for i, v in enumerate(vectors):
        buf[i * nbytes : (i + 1) * nbytes] = v.to_bytes(nbytes, "little")
    bits = np.unpackbits(
        np.frombuffer(bytes(buf), dtype=np.uint8).reshape(n, nbytes),
        axis=1,
        bitorder="little",
    )[:, :width]
    packed = np.packbits(bits.T, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]
