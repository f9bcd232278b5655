"""Uniform two-qubit Clifford sampling and deterministic stream derivation.

A two-qubit Clifford (mod global phase) is stored as its conjugation action
on the four Pauli generators X_i, Z_i, X_j, Z_j: four image Paulis with
signs.  The group order is 11520 = |Sp(4,2)| * 2^4; sampling draws a uniform
symplectic image set by the anticommuting-pair construction and four fair
sign bits, with no rejection.

For the tableau's bit-sliced application the gate also carries a precomputed
plan: each output bit column is a GF(2) combination of the four input
columns (``col_selectors``), and the sign flip is a degree-<=3 boolean
function of the four input bits whose algebraic normal form is derived from
Pauli product phases at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .tableau import PauliString, TableauError

# Symplectic vectors for a qubit pair are 4-bit ints: bit0 = X on the first
# site, bit1 = Z on the first site, bits 2/3 the same on the second site.
_E = (1, 2, 4, 8)  # X_i, Z_i, X_j, Z_j


def _g1(x1: int, z1: int, x2: int, z2: int) -> int:
    x3, z3 = x1 ^ x2, z1 ^ z2
    return (x1 * z1 + x2 * z2 - x3 * z3 + 2 * z1 * x2) % 4


def _g2(a: int, b: int) -> int:
    return (
        _g1(a & 1, (a >> 1) & 1, b & 1, (b >> 1) & 1)
        + _g1((a >> 2) & 1, (a >> 3) & 1, (b >> 2) & 1, (b >> 3) & 1)
    ) % 4


def _sp(a: int, b: int) -> int:
    """Symplectic product parity (1 = anticommute)."""
    return (
        (a & 1) * ((b >> 1) & 1)
        ^ ((a >> 1) & 1) * (b & 1)
        ^ ((a >> 2) & 1) * ((b >> 3) & 1)
        ^ ((a >> 3) & 1) * ((b >> 2) & 1)
    )


_G2 = tuple(tuple(_g2(a, b) for b in range(16)) for a in range(16))
_ANTI = {m: tuple(p for p in range(1, 16) if _sp(p, m)) for m in range(1, 16)}
_COMPL = {
    (p, q): tuple(r for r in range(1, 16) if not _sp(r, p) and not _sp(r, q))
    for p in range(1, 16)
    for q in _ANTI[p]
}

GATE_DRAW_HIGHS = (15, 8, 3, 2, 16)
TWO_QUBIT_CLIFFORD_ORDER = 11520


def _chain_delta(ms: Sequence[int], es: Sequence[int]) -> int:
    """Half the phase-exponent difference between the ordered products of
    image Paulis and of input Paulis.  Always an integer for valid images."""
    gm = ge = 0
    am, ae = ms[0], es[0]
    for m, e in zip(ms[1:], es[1:]):
        gm += _G2[am][m]
        ge += _G2[ae][e]
        am ^= m
        ae ^= e
    d = (gm - ge) % 4
    if d & 1:
        raise TableauError("image set breaks the symplectic phase structure")
    return d >> 1


class TwoQubitClifford:
    """A two-qubit Clifford element as its action on X_i, Z_i, X_j, Z_j."""

    __slots__ = (
        "_imgs",
        "_sgn",
        "col_selectors",
        "sign_linear",
        "sign_quadratic",
        "sign_cubic",
        "sign_quartic",
    )

    def __init__(self, images: Sequence[PauliString]):
        if len(images) != 4 or any(p.n != 2 for p in images):
            raise ValueError("need the four images as two-qubit PauliStrings")
        imgs = tuple(
            (p.x_bits & 1) | ((p.z_bits & 1) << 1) | ((p.x_bits >> 1) << 2) | ((p.z_bits >> 1) << 3)
            for p in images
        )
        sgn = 0
        for t, p in enumerate(images):
            if p.sign < 0:
                sgn |= 1 << t
        self._init_packed(imgs, sgn)

    @classmethod
    def _from_packed(cls, imgs: tuple[int, int, int, int], sgn: int) -> "TwoQubitClifford":
        self = cls.__new__(cls)
        self._init_packed(imgs, sgn)
        return self

    def _init_packed(self, imgs: tuple[int, int, int, int], sgn: int) -> None:
        if _sp(imgs[0], imgs[1]) != 1 or _sp(imgs[2], imgs[3]) != 1:
            raise ValueError("images of an (X, Z) pair must anticommute")
        for t, u in ((0, 2), (0, 3), (1, 2), (1, 3)):
            if _sp(imgs[t], imgs[u]):
                raise ValueError("images across qubit pairs must commute")
        self._imgs = imgs
        self._sgn = sgn
        self.col_selectors = tuple(
            sum(((imgs[t] >> b) & 1) << t for t in range(4)) for b in range(4)
        )
        self.sign_linear = sgn
        quad: dict[tuple[int, int], int] = {}
        for t, u in combinations(range(4), 2):
            quad[(t, u)] = _chain_delta((imgs[t], imgs[u]), (_E[t], _E[u]))
        cubic: dict[tuple[int, int, int], int] = {}
        for t, u, w in combinations(range(4), 3):
            d = _chain_delta((imgs[t], imgs[u], imgs[w]), (_E[t], _E[u], _E[w]))
            cubic[(t, u, w)] = d ^ quad[(t, u)] ^ quad[(t, w)] ^ quad[(u, w)]
        d4 = _chain_delta(imgs, _E)
        quartic = d4
        for c in quad.values():
            quartic ^= c
        for c in cubic.values():
            quartic ^= c
        self.sign_quadratic = tuple(k for k, c in quad.items() if c)
        self.sign_cubic = tuple(k for k, c in cubic.items() if c)
        self.sign_quartic = quartic

    # -- views ----------------------------------------------------------

    @property
    def images(self) -> tuple[PauliString, PauliString, PauliString, PauliString]:
        out = []
        for t in range(4):
            m = self._imgs[t]
            x = (m & 1) | (((m >> 2) & 1) << 1)
            z = ((m >> 1) & 1) | (((m >> 3) & 1) << 1)
            out.append(PauliString(2, x, z, -1 if (self._sgn >> t) & 1 else 1))
        return tuple(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TwoQubitClifford):
            return NotImplemented
        return self._imgs == other._imgs and self._sgn == other._sgn

    def __hash__(self) -> int:
        return hash((self._imgs, self._sgn))

    def __repr__(self) -> str:
        return "TwoQubitClifford[" + ", ".join(p.label() for p in self.images) + "]"

    def sign_of(self, v: int) -> int:
        """Sign bit of the image of the input Pauli with 4-bit content v."""
        s = (self.sign_linear & v).bit_count() & 1
        for t, u in self.sign_quadratic:
            s ^= (v >> t) & (v >> u) & 1
        for t, u, w in self.sign_cubic:
            s ^= (v >> t) & (v >> u) & (v >> w) & 1
        if self.sign_quartic and v == 15:
            s ^= 1
        return s

    def image_of(self, p: PauliString) -> PauliString:
        """Conjugation image of an arbitrary two-qubit PauliString."""
        if p.n != 2:
            raise ValueError("expected a two-qubit Pauli")
        v = (p.x_bits & 1) | ((p.z_bits & 1) << 1) | ((p.x_bits >> 1) << 2) | ((p.z_bits >> 1) << 3)
        m = 0
        for t in range(4):
            if (v >> t) & 1:
                m ^= self._imgs[t]
        x = (m & 1) | (((m >> 2) & 1) << 1)
        z = ((m >> 1) & 1) | (((m >> 3) & 1) << 1)
        sign = p.sign * (-1 if self.sign_of(v) else 1)
        return PauliString(2, x, z, sign)

    # -- group structure --------------------------------------------------

    def then(self, other: "TwoQubitClifford") -> "TwoQubitClifford":
        """Composite map: apply self first, then other (as circuit order)."""
        imgs = []
        sgn = 0
        for t in range(4):
            m = 0
            v = self._imgs[t]
            for u in range(4):
                if (v >> u) & 1:
                    m ^= other._imgs[u]
            # sign_of already accounts for reassembling other's images
            s = ((self._sgn >> t) & 1) ^ other.sign_of(v)
            imgs.append(m)
            if s:
                sgn |= 1 << t
        return TwoQubitClifford._from_packed(tuple(imgs), sgn)

    def inverse(self) -> "TwoQubitClifford":
        inv_cols = _invert_sympl4(self._imgs)
        imgs = []
        sgn = 0
        for t in range(4):
            v = inv_cols[t]
            if self.sign_of(v):
                sgn |= 1 << t
            imgs.append(v)
        return TwoQubitClifford._from_packed(tuple(imgs), sgn)

    # -- named gates -------------------------------------------------------

    @classmethod
    def identity(cls) -> "TwoQubitClifford":
        return cls._from_packed(_E, 0)

    @classmethod
    def cnot(cls) -> "TwoQubitClifford":
        """CNOT with the first site as control, second as target."""
        return cls._from_packed((1 | 4, 2, 4, 2 | 8), 0)

    @classmethod
    def swap(cls) -> "TwoQubitClifford":
        return cls._from_packed((4, 8, 1, 2), 0)

    @classmethod
    def hadamard_first(cls) -> "TwoQubitClifford":
        """H on the first site, identity on the second."""
        return cls._from_packed((2, 1, 4, 8), 0)

    @classmethod
    def bell_encoder(cls) -> "TwoQubitClifford":
        """(H on first) followed by CNOT(first -> second): |00> -> Bell pair."""
        return cls._from_packed((2, 1 | 4, 4, 2 | 8), 0)


def _invert_sympl4(cols: tuple[int, int, int, int]) -> list[int]:
    """Invert the GF(2) 4x4 matrix whose columns are the given 4-bit ints."""
    rows = [0] * 4  # row-major bit rows, augmented with identity in bits 4..7
    for b in range(4):
        r = 0
        for t in range(4):
            if (cols[t] >> b) & 1:
                r |= 1 << t
        rows[b] = r | (1 << (4 + b))
    for c in range(4):
        piv = next(r for r in range(c, 4) if (rows[r] >> c) & 1)
        rows[c], rows[piv] = rows[piv], rows[c]
        for r in range(4):
            if r != c and (rows[r] >> c) & 1:
                rows[r] ^= rows[c]
    # inverse columns: inverse[t] = column t of the augmented part
    out = []
    for t in range(4):
        v = 0
        for b in range(4):
            if (rows[b] >> (4 + t)) & 1:
                v |= 1 << b
        out.append(v)
    return out


def _packed_from_draws(a: int, b: int, c: int, d: int, smask: int) -> tuple[tuple[int, int, int, int], int]:
    m0 = a + 1
    m1 = _ANTI[m0][b]
    trip = _COMPL[(m0, m1)]
    m2 = trip[c]
    m3 = trip[(c + 1) % 3] if d == 0 else trip[(c + 2) % 3]
    return (m0, m1, m2, m3), smask


def random_two_qubit_clifford(rng: np.random.Generator) -> TwoQubitClifford:
    """Uniform over the 11520-element two-qubit Clifford group (mod phase).

    Image of X_i uniform over the 15 non-identity Paulis, image of Z_i
    uniform over its 8 anticommuting partners, the second pair uniform over
    the 3 * 2 symplectic completions, and four independent sign bits.
    """
    a, b, c, d, s = (int(v) for v in rng.integers(0, GATE_DRAW_HIGHS))
    imgs, sgn = _packed_from_draws(a, b, c, d, s)
    return TwoQubitClifford._from_packed(imgs, sgn)


# ---------------------------------------------------------------------------
# Deterministic stream derivation


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a trajectory stream id."""

    master_seed: int
    stream_id: int


def derive_stream(seed: SeedSpec) -> np.random.Generator:
    """Counter-based per-trajectory RNG.

    A Philox4x64 bit generator keyed by
    ``SeedSequence(entropy=master_seed, spawn_key=(stream_id,))``; the same
    (master_seed, stream_id) pair yields the same stream on any platform,
    distinct pairs yield statistically independent streams.
    """
    ss = np.random.SeedSequence(entropy=seed.master_seed, spawn_key=(seed.stream_id,))
    return np.random.Generator(np.random.Philox(ss))
