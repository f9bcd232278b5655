"""Mixed-state stabilizer tableau with noise channels and region entropies.

A state on ``n`` qubits is a stabilizer *group*: ``k <= n`` independent,
mutually commuting Pauli strings with +-1 signs.  ``k`` may be smaller than
``n`` (mixed state) and changes under measurements and noise channels; total
entropy is ``n - k`` bits and region entropies follow from a GF(2) rank of
the generator matrix restricted to the region's complement.

Storage is column-major over generator slots: for each qubit ``j`` the X and
Z components of all generators are packed into one int each, so a two-qubit
gate touches four ints regardless of ``k``.  Signs live in one more int.
Pauli strings are kept in the Hermitian convention ``W(x, z) = i^{xz} X^x
Z^z`` per qubit ({I, X, Z, Y}); products of commuting strings then carry a
real sign, and any +-i phase on a generator marks a broken invariant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import gf2


class TableauError(RuntimeError):
    """Internal stabilizer-group invariant violation."""


# ---------------------------------------------------------------------------
# Pauli strings


def phase_exponent(x1: int, z1: int, x2: int, z2: int) -> int:
    """i-exponent (mod 4) of W(x1,z1)*W(x2,z2) relative to W(x1^x2, z1^z2).

    Inputs are bit-packed rows over qubits.  Odd results mean the factors
    anticommute.
    """
    x3 = x1 ^ x2
    z3 = z1 ^ z2
    g = (
        (x1 & z1).bit_count()
        + (x2 & z2).bit_count()
        + 3 * (x3 & z3).bit_count()
        + 2 * (z1 & x2).bit_count()
    )
    return g & 3


@dataclass(frozen=True)
class PauliString:
    """A signed n-qubit Pauli in the Hermitian W convention."""

    n: int
    x_bits: int
    z_bits: int
    sign: int = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        mask = (1 << self.n) - 1
        if (self.x_bits | self.z_bits) & ~mask:
            raise ValueError("support outside the declared qubit count")

    def commutes_with(self, other: "PauliString") -> bool:
        if self.n != other.n:
            raise ValueError("qubit counts differ")
        anti = (self.x_bits & other.z_bits).bit_count() + (self.z_bits & other.x_bits).bit_count()
        return anti % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("qubit counts differ")
        g = phase_exponent(self.x_bits, self.z_bits, other.x_bits, other.z_bits)
        if g & 1:
            raise TableauError("product of anticommuting Paulis carries phase +-i")
        sign = self.sign * other.sign * (-1 if g == 2 else 1)
        return PauliString(self.n, self.x_bits ^ other.x_bits, self.z_bits ^ other.z_bits, sign)

    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    def label(self) -> str:
        chars = []
        for j in range(self.n):
            x = (self.x_bits >> j) & 1
            z = (self.z_bits >> j) & 1
            chars.append("IXZY"[x + 2 * z] if x + 2 * z != 3 else "Y")
        return ("+" if self.sign > 0 else "-") + "".join(chars)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        sign = 1
        if label[0] in "+-":
            sign = 1 if label[0] == "+" else -1
            label = label[1:]
        x = z = 0
        for j, ch in enumerate(label):
            if ch == "X":
                x |= 1 << j
            elif ch == "Z":
                z |= 1 << j
            elif ch == "Y":
                x |= 1 << j
                z |= 1 << j
            elif ch != "I":
                raise ValueError(f"bad Pauli letter {ch!r}")
        return cls(len(label), x, z, sign)


@dataclass(frozen=True)
class Region:
    """A sorted set of distinct qubit indices."""

    sites: tuple[int, ...]

    def __post_init__(self) -> None:
        s = self.sites
        if any(b <= a for a, b in zip(s, s[1:])) or (s and s[0] < 0):
            raise ValueError("region sites must be strictly increasing and non-negative")

    @classmethod
    def of(cls, sites: Iterable[int]) -> "Region":
        return cls(tuple(sorted(set(int(i) for i in sites))))

    def __len__(self) -> int:
        return len(self.sites)


def _region_sites(region: "Region | Iterable[int]", n: int) -> tuple[int, ...]:
    sites = region.sites if isinstance(region, Region) else tuple(sorted(set(region)))
    if sites and (sites[0] < 0 or sites[-1] >= n):
        raise ValueError(f"region {sites} not within [0, {n})")
    return sites


# ---------------------------------------------------------------------------
# The tableau


def _pauli_mul_tagged(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> tuple[int, int, int, int]:
    """Multiply (vec, x, z, sign) group elements; vec is the GF(2) sort key."""
    g = phase_exponent(a[1], a[2], b[1], b[2])
    if g & 1:
        raise TableauError("anticommuting elements inside an abelian group")
    return (a[0] ^ b[0], a[1] ^ b[1], a[2] ^ b[2], a[3] ^ b[3] ^ (g >> 1))


class MixedStabilizerState:
    """Stabilizer group of a (generally mixed) n-qubit state."""

    __slots__ = ("n", "_x", "_z", "_signs", "_active", "_nslots", "_free", "_zknown")

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        self._x: list[int] = [0] * n
        self._z: list[int] = [0] * n
        self._signs = 0
        self._active = 0
        self._nslots = 0
        self._free: list[int] = []
        # site -> +-1 for sites where +-Z_site is known to be a group element;
        # pure bookkeeping cache, kept exact (see measure_z).
        self._zknown: dict[int, int] = {}

    # -- constructors --------------------------------------------------

    @classmethod
    def product_state(cls, n: int) -> "MixedStabilizerState":
        """|0>^n : generators +Z_i."""
        st = cls(n)
        for i in range(n):
            st._z[i] = 1 << i
            st._zknown[i] = 1
        st._active = (1 << n) - 1
        st._nslots = n
        return st

    @classmethod
    def maximally_mixed(cls, n: int) -> "MixedStabilizerState":
        """I / 2^n : empty generator set."""
        return cls(n)

    def copy(self) -> "MixedStabilizerState":
        st = MixedStabilizerState(self.n)
        st._x = self._x[:]
        st._z = self._z[:]
        st._signs = self._signs
        st._active = self._active
        st._nslots = self._nslots
        st._free = self._free[:]
        st._zknown = dict(self._zknown)
        return st

    # -- bookkeeping ----------------------------------------------------

    @property
    def k(self) -> int:
        """Number of independent generators."""
        return self._active.bit_count()

    def total_entropy(self) -> int:
        return self.n - self.k

    def _new_slot(self) -> int:
        if self._free:
            return self._free.pop()
        s = self._nslots
        self._nslots += 1
        return s

    def _append_z_generator(self, i: int, outcome: int) -> None:
        slot = self._new_slot()
        sb = 1 << slot
        self._z[i] |= sb
        self._active |= sb
        if outcome < 0:
            self._signs |= sb
        self._zknown[i] = outcome

    def append_qubit_zero(self) -> int:
        """Append one fresh qubit prepared in |0>; returns its index."""
        self._x.append(0)
        self._z.append(0)
        i = self.n
        self.n += 1
        self._append_z_generator(i, 1)
        return i

    # -- gates ----------------------------------------------------------

    def apply_clifford2(self, gate, i: int, j: int) -> None:
        """Conjugate all generators by a two-qubit Clifford on (i, j).

        ``gate`` carries the images of X_i, Z_i, X_j, Z_j plus a precomputed
        bit-sliced plan (see cliffords.TwoQubitClifford): the new X/Z columns
        are GF(2) combinations of the old four, and the sign flip is the
        gate's cubic ANF evaluated on them.
        """
        n = self.n
        if i == j or not (0 <= i < n) or not (0 <= j < n):
            raise ValueError(f"bad gate sites ({i}, {j}) for n={n}")
        xs = self._x
        zs = self._z
        v = (xs[i], zs[i], xs[j], zs[j])
        s = 0
        m = gate.sign_linear
        if m:
            if m & 1:
                s = v[0]
            if m & 2:
                s ^= v[1]
            if m & 4:
                s ^= v[2]
            if m & 8:
                s ^= v[3]
        for a, b in gate.sign_quadratic:
            s ^= v[a] & v[b]
        for a, b, c in gate.sign_cubic:
            s ^= v[a] & v[b] & v[c]
        if gate.sign_quartic:
            s ^= v[0] & v[1] & v[2] & v[3]
        if s:
            self._signs ^= s
        out = []
        for sel in gate.col_selectors:
            a = 0
            if sel & 1:
                a = v[0]
            if sel & 2:
                a ^= v[1]
            if sel & 4:
                a ^= v[2]
            if sel & 8:
                a ^= v[3]
            out.append(a)
        xs[i], zs[i], xs[j], zs[j] = out
        zk = self._zknown
        zk.pop(i, None)
        zk.pop(j, None)

    def apply_hadamard(self, i: int) -> None:
        """H on qubit i: X<->Z, Y -> -Y."""
        x = self._x[i]
        z = self._z[i]
        self._signs ^= x & z
        self._x[i] = z
        self._z[i] = x
        self._zknown.pop(i, None)

    def apply_x(self, i: int) -> None:
        """Pauli X on qubit i (flips signs of generators with Z support there)."""
        self._signs ^= self._z[i]
        if i in self._zknown:
            self._zknown[i] = -self._zknown[i]

    def apply_z(self, i: int) -> None:
        """Pauli Z on qubit i."""
        self._signs ^= self._x[i]

    # -- measurement and channels ----------------------------------------

    def _mult_rows_by_pivot(self, others: int, pivot: int) -> None:
        """Row-multiply every generator in mask ``others`` by the pivot
        generator, with sign tracking, and zero the pivot's own bits in every
        column.  Phase arithmetic is done bit-sliced: per qubit the i-exponent
        contribution of (row, pivot) is a 2-bit counter accumulated mod 4
        across all generators at once.
        """
        pb = 1 << pivot
        npb = ~pb
        xs = self._x
        zs = self._z
        acc0 = 0
        acc1 = 0
        for j in range(self.n):
            xcj = xs[j]
            zcj = zs[j]
            if xcj & pb:
                if zcj & pb:  # pivot has Y here: i^{(x^z) + 2(z & ~x)}
                    lo = xcj ^ zcj
                    hi = zcj & ~xcj
                    xs[j] = (xcj ^ others) & npb
                    zs[j] = (zcj ^ others) & npb
                else:  # pivot has X here: i^{z + 2(z & x)}
                    lo = zcj
                    hi = zcj & xcj
                    xs[j] = (xcj ^ others) & npb
            elif zcj & pb:  # pivot has Z here: i^{x + 2(x & ~z)}
                lo = xcj
                hi = xcj & ~zcj
                zs[j] = (zcj ^ others) & npb
            else:
                continue
            acc1 ^= hi ^ (acc0 & lo)
            acc0 ^= lo
        if acc0 & others:
            raise TableauError("generator product acquired phase +-i")
        flips = acc1 & others
        if self._signs & pb:
            flips ^= others
        self._signs ^= flips

    def _drop_slot(self, pivot: int) -> None:
        pb = 1 << pivot
        self._signs &= ~pb
        self._active &= ~pb
        self._free.append(pivot)

    def measure_z_info(self, i: int, rng) -> tuple[int, bool]:
        """Projective Z measurement; returns (outcome, deterministic)."""
        if not 0 <= i < self.n:
            raise ValueError(f"qubit {i} out of range")
        m = self._x[i]
        if m:
            # (a) some generator anticommutes: random outcome, pivot -> +-Z_i
            pb = m & -m
            pivot = pb.bit_length() - 1
            self._mult_rows_by_pivot(m ^ pb, pivot)
            outcome = -1 if rng.integers(0, 2) else 1
            self._signs &= ~pb
            self._z[i] |= pb
            if outcome < 0:
                self._signs |= pb
            self._zknown[i] = outcome
            return outcome, False
        known = self._zknown.get(i)
        if known is not None:
            return known, True  # (b) cached deterministic direction
        member, sign = self._solve_z_membership(i)
        if member:
            self._zknown[i] = sign
            return sign, True  # (b) deterministic, state unchanged
        # (c) Z_i commutes but is not in the group: purify that direction
        outcome = -1 if rng.integers(0, 2) else 1
        self._append_z_generator(i, outcome)
        return outcome, False

    def measure_z(self, i: int, rng) -> int:
        return self.measure_z_info(i, rng)[0]

    def dephase(self, i: int) -> None:
        """Z-basis dephasing channel on qubit i.

        Keeps the subgroup commuting with Z_i: one anticommuting pivot is
        multiplied into the other anticommuting generators and then dropped
        (k decreases by one); no anticommuters means a Z-diagonal site and a
        no-op.  Idempotent by construction.
        """
        if not 0 <= i < self.n:
            raise ValueError(f"qubit {i} out of range")
        m = self._x[i]
        if not m:
            return
        pb = m & -m
        pivot = pb.bit_length() - 1
        self._mult_rows_by_pivot(m ^ pb, pivot)
        self._drop_slot(pivot)

    def reset(self, i: int) -> None:
        """Reset channel on qubit i: trace out the site and re-prepare |0>.

        Exact channel action on the group: keep only elements acting
        trivially on i (dephase, then drop any remaining Z_i support), then
        adjoin +Z_i.  Afterwards entropy({i}) = 0 and measure_z(i) is
        deterministically +1.
        """
        self.dephase(i)
        m = self._z[i]
        if m:
            pb = m & -m
            pivot = pb.bit_length() - 1
            self._mult_rows_by_pivot(m ^ pb, pivot)
            self._drop_slot(pivot)
        self._append_z_generator(i, 1)

    # -- entropies --------------------------------------------------------

    def entropy(self, region: "Region | Iterable[int]") -> int:
        """Entanglement entropy of a region, in bits.

        S_A = |A| - k + rank of the generator matrix restricted to the
        complement of A (the rank is computed on the complement's bit-packed
        X/Z columns directly).
        """
        sites = _region_sites(region, self.n)
        if not sites:
            return 0
        k = self._active.bit_count()
        in_region = set(sites)
        if len(in_region) == self.n:
            return self.n - k
        xs = self._x
        zs = self._z
        vecs = []
        for j in range(self.n):
            if j not in in_region:
                vecs.append(xs[j])
                vecs.append(zs[j])
        return len(sites) - k + gf2.rank(vecs, limit=k)

    def mutual_information(self, a: "Region | Iterable[int]", b: "Region | Iterable[int]") -> int:
        """I(A:B) = S_A + S_B - S_AB for disjoint regions, in bits."""
        sa = _region_sites(a, self.n)
        sb = _region_sites(b, self.n)
        if set(sa) & set(sb):
            raise ValueError("regions overlap")
        return self.entropy(sa) + self.entropy(sb) - self.entropy(sa + sb)

    # -- introspection (test/validation paths) -----------------------------

    def _slot_rows(self) -> list[tuple[int, int, int, int]]:
        """Active (slot, x_row, z_row, sign) tuples via bit transpose."""
        if self._nslots == 0:
            return []
        xt = gf2.bit_transpose(self._x, self._nslots)
        zt = gf2.bit_transpose(self._z, self._nslots)
        out = []
        act = self._active
        sg = self._signs
        for g in range(self._nslots):
            if (act >> g) & 1:
                out.append((g, xt[g], zt[g], (sg >> g) & 1))
        return out

    def generators(self) -> list[PauliString]:
        """The current generator set as PauliStrings (slot order)."""
        return [
            PauliString(self.n, x, z, -1 if s else 1) for (_, x, z, s) in self._slot_rows()
        ]

    def canonical_form(self) -> tuple[tuple[int, int, int], ...]:
        """Sign-aware reduced echelon form of the group, for equality tests."""
        n = self.n
        pivots: dict[int, tuple[int, int, int, int]] = {}
        for _, x, z, s in self._slot_rows():
            cur = ((x << n) | z, x, z, s)
            while cur[0]:
                b = cur[0].bit_length() - 1
                p = pivots.get(b)
                if p is None:
                    pivots[b] = cur
                    break
                cur = _pauli_mul_tagged(cur, p)
            else:
                raise TableauError("dependent generator set")
        # back-substitute to a unique reduced form
        for b in sorted(pivots, reverse=True):
            cur = pivots[b]
            changed = True
            while changed:
                changed = False
                rest = cur[0] ^ (1 << b)
                while rest:
                    bb = rest.bit_length() - 1
                    rest ^= 1 << bb
                    p = pivots.get(bb)
                    if p is not None and bb != b:
                        cur = _pauli_mul_tagged(cur, p)
                        changed = True
                        break
            pivots[b] = cur
        return tuple((c[1], c[2], c[3]) for _, c in sorted(pivots.items()))

    def _solve_z_membership(self, i: int) -> tuple[bool, int]:
        """Is +-Z_i a group element?  Returns (member, sign).

        Cold path for measurements on sites where no generator anticommutes
        and the direction is not cached.  Membership reduces to a column-space
        test (Z_i is in the row space iff the i-th Z column is independent of
        all other columns); the sign needs an explicit row-space solve with
        Pauli multiplication.
        """
        zi = self._z[i]
        if zi == 0:
            return False, 0
        pivots: dict[int, int] = {}

        def insert(v: int) -> None:
            while v:
                b = v.bit_length() - 1
                p = pivots.get(b)
                if p is None:
                    pivots[b] = v
                    return
                v ^= p

        for j in range(self.n):
            insert(self._x[j])
            if j != i:
                insert(self._z[j])
        v = zi
        while v:
            b = v.bit_length() - 1
            p = pivots.get(b)
            if p is None:
                break
            v ^= p
        if v == 0:
            return False, 0
        # sign: reduce Z_i through an echelon basis of actual group elements
        n = self.n
        basis: dict[int, tuple[int, int, int, int]] = {}
        for _, x, z, s in self._slot_rows():
            cur = ((x << n) | z, x, z, s)
            while cur[0]:
                b = cur[0].bit_length() - 1
                p = basis.get(b)
                if p is None:
                    basis[b] = cur
                    break
                cur = _pauli_mul_tagged(cur, p)
        t = (1 << i, 0, 1 << i, 0)
        while t[0]:
            b = t[0].bit_length() - 1
            p = basis.get(b)
            if p is None:
                raise TableauError("column/row membership tests disagree")
            t = _pauli_mul_tagged(t, p)
        return True, (-1 if t[3] else 1)

    def validate(self) -> None:
        """Debug validator: commutation, independence, storage hygiene."""
        act = self._active
        if self._signs & ~act:
            raise TableauError("sign bit on inactive slot")
        for j in range(self.n):
            if (self._x[j] | self._z[j]) & ~act:
                raise TableauError("column bits on inactive slot")
        rows = self._slot_rows()
        if len(rows) != self.k:
            raise TableauError("slot bookkeeping out of sync")
        for a in range(len(rows)):
            for b in range(a + 1, len(rows)):
                _, xa, za, _ = rows[a]
                _, xb, zb, _ = rows[b]
                if ((xa & zb).bit_count() + (za & xb).bit_count()) % 2:
                    raise TableauError("generators do not commute")
        vecs = [(x << self.n) | z for _, x, z, _ in rows]
        if gf2.rank(vecs) != len(vecs):
            raise TableauError("generators are GF(2)-dependent")
        if self.k > self.n:
            raise TableauError("more generators than qubits")
