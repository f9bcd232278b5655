"""Brute-force density-matrix oracle for validating the stabilizer engine.

Everything here is test-support machinery for n <= 8 qubits: exact channel
action on a dense density matrix, von Neumann entropies of reduced states,
conversion of a TwoQubitClifford to its 4x4 unitary, and a lockstep driver
that runs the same seeded hybrid circuit through both engines and compares
region entropies.  Clarity over speed throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cliffords import SeedSpec, TwoQubitClifford, derive_stream, random_two_qubit_clifford
from .tableau import MixedStabilizerState, PauliString, Region, _region_sites

_MAX_QUBITS = 8

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)
_K01 = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|


def _embed(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Single-site operator as a full 2^n operator (site 0 = leftmost factor)."""
    out = np.array([[1.0 + 0j]])
    for j in range(n):
        out = np.kron(out, op if j == site else _I2)
    return out


def _pauli_matrix(p: PauliString) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for j in range(p.n):
        x = (p.x_bits >> j) & 1
        z = (p.z_bits >> j) & 1
        m = (1j) ** (x * z) * (np.linalg.matrix_power(_X, x) @ np.linalg.matrix_power(_Z, z))
        out = np.kron(out, m)
    return p.sign * out


def clifford_to_unitary(gate: TwoQubitClifford) -> np.ndarray:
    """The 4x4 unitary realizing a TwoQubitClifford (global phase arbitrary).

    Solves the commutation constraints U P_t = Img_t U for the four Pauli
    generators; the solution space is one-dimensional, and the result is
    rescaled to a unitary.
    """
    blocks = []
    for p_in, p_img in zip(
        (PauliString(2, 1, 0), PauliString(2, 0, 1), PauliString(2, 2, 0), PauliString(2, 0, 2)),
        gate.images,
    ):
        P = _pauli_matrix(p_in)
        Q = _pauli_matrix(p_img)
        # row-major vec: vec(A U B) = (A kron B^T) vec(U)
        blocks.append(np.kron(np.eye(4), P.T) - np.kron(Q, np.eye(4)))
    M = np.vstack(blocks)
    _, s, vh = np.linalg.svd(M)
    if s[-1] > 1e-9:
        raise ValueError("images do not define a Clifford")
    U = vh[-1].reshape(4, 4)
    U *= np.sqrt(4.0 / np.trace(U.conj().T @ U))
    if not np.allclose(U.conj().T @ U, np.eye(4), atol=1e-9):
        raise ValueError("null vector did not normalize to a unitary")
    return U


@dataclass
class DenseState:
    """Dense density matrix on n <= 8 qubits."""

    n: int
    rho: np.ndarray = field(repr=False)

    @classmethod
    def product_zero(cls, n: int) -> "DenseState":
        cls._check_n(n)
        rho = np.zeros((2**n, 2**n), dtype=complex)
        rho[0, 0] = 1.0
        return cls(n, rho)

    @classmethod
    def maximally_mixed(cls, n: int) -> "DenseState":
        cls._check_n(n)
        d = 2**n
        return cls(n, np.eye(d, dtype=complex) / d)

    @staticmethod
    def _check_n(n: int) -> None:
        if not 1 <= n <= _MAX_QUBITS:
            raise ValueError(f"oracle supports 1..{_MAX_QUBITS} qubits")

    def copy(self) -> "DenseState":
        return DenseState(self.n, self.rho.copy())

    # -- channels ---------------------------------------------------------

    def apply_unitary(self, u: np.ndarray, sites: Sequence[int]) -> None:
        m = len(sites)
        if u.shape != (2**m, 2**m):
            raise ValueError("unitary size does not match site count")
        full = self._expand_unitary(u, sites)
        self.rho = full @ self.rho @ full.conj().T

    def _expand_unitary(self, u: np.ndarray, sites: Sequence[int]) -> np.ndarray:
        n = self.n
        m = len(sites)
        op = np.kron(u, np.eye(2 ** (n - m))).reshape((2,) * (2 * n))
        # output axes then input axes; permute so `sites` occupy their slots
        rest = [j for j in range(n) if j not in sites]
        perm = list(sites) + rest
        inv = np.argsort(perm)
        order = list(inv) + [n + p for p in inv]
        return op.transpose(order).reshape(2**n, 2**n)

    def dephase(self, i: int) -> None:
        p0 = _embed(_P0, i, self.n)
        p1 = _embed(_P1, i, self.n)
        self.rho = p0 @ self.rho @ p0 + p1 @ self.rho @ p1

    def reset(self, i: int) -> None:
        k0 = _embed(_P0, i, self.n)
        k1 = _embed(_K01, i, self.n)
        self.rho = k0 @ self.rho @ k0.conj().T + k1 @ self.rho @ k1.conj().T

    def measure_z(self, i: int, outcome: int) -> float:
        """Force a +-1 outcome; renormalizes and returns its probability."""
        if outcome not in (1, -1):
            raise ValueError("outcome must be +-1")
        proj = _embed(_P0 if outcome == 1 else _P1, i, self.n)
        p = float(np.real(np.trace(proj @ self.rho)))
        if p < 1e-12:
            raise ValueError(f"forced outcome {outcome} on qubit {i} has probability {p}")
        self.rho = proj @ self.rho @ proj / p
        return p

    # -- observables --------------------------------------------------------

    def reduced(self, region: Region | Iterable[int]) -> np.ndarray:
        sites = _region_sites(region, self.n)
        n = self.n
        t = self.rho.reshape((2,) * (2 * n))
        keep = list(sites)
        drop = [j for j in range(n) if j not in sites]
        for j in sorted(drop, reverse=True):
            t = np.trace(t, axis1=j, axis2=j + (t.ndim // 2))
        d = 2 ** len(keep)
        return t.reshape(d, d)

    def von_neumann_entropy(self, region: Region | Iterable[int]) -> float:
        sites = _region_sites(region, self.n)
        if not sites:
            return 0.0
        evals = np.linalg.eigvalsh(self.reduced(sites))
        evals = evals[evals > 1e-12]
        return float(-(evals * np.log2(evals)).sum())

    def validate(self) -> None:
        rho = self.rho
        if not np.allclose(rho, rho.conj().T, atol=1e-12):
            raise ValueError("density matrix not Hermitian")
        if abs(np.trace(rho) - 1.0) > 1e-12:
            raise ValueError("density matrix trace drifted from 1")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise ValueError("density matrix not positive semidefinite")


# ---------------------------------------------------------------------------
# Lockstep comparison of both engines


@dataclass
class LockstepReport:
    n: int
    steps: int
    seed: int
    max_deviation: float
    failures: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _compare_cuts(
    stab: MixedStabilizerState,
    dense: DenseState,
    step: int,
    tol: float,
    report: LockstepReport,
) -> None:
    n = stab.n
    regions = [tuple(range(c)) for c in range(1, n)]
    regions += [(i,) for i in range(n)]
    regions.append(tuple(range(n)))
    for region in regions:
        s_stab = stab.entropy(region)
        s_dense = dense.von_neumann_entropy(region)
        dev = abs(s_stab - s_dense)
        report.max_deviation = max(report.max_deviation, dev)
        if dev > tol:
            report.failures.append(
                {"step": step, "region": region, "stabilizer": s_stab, "oracle": s_dense}
            )


def lockstep_run(
    n: int,
    steps: int,
    seed: int,
    p_m: float = 0.3,
    q: float = 0.25,
    initial: str = "product_zero",
    tol: float = 1e-9,
    corrupt_at: int | None = None,
) -> LockstepReport:
    """Run one seeded hybrid circuit through both engines, comparing every
    prefix-cut and single-site entropy after each brick-wall period.

    Measurement outcomes from the stabilizer engine are forced into the
    oracle, which checks their probabilities (deterministic -> 1, random ->
    1/2).  Noise events alternate channel by a seeded coin so both reset and
    dephasing are exercised.  ``corrupt_at`` is a test hook that flips one
    tableau bit before the given step's comparison.
    """
    DenseState._check_n(n)
    rng = derive_stream(SeedSpec(seed, 0))
    if initial == "product_zero":
        stab = MixedStabilizerState.product_state(n)
        dense = DenseState.product_zero(n)
    elif initial == "maximally_mixed":
        stab = MixedStabilizerState.maximally_mixed(n)
        dense = DenseState.maximally_mixed(n)
    else:
        raise ValueError(f"unknown initial state {initial!r}")
    report = LockstepReport(n=n, steps=steps, seed=seed, max_deviation=0.0)
    for step in range(steps):
        for parity in (0, 1):
            for i in range(parity, n - 1, 2):
                gate = random_two_qubit_clifford(rng)
                stab.apply_clifford2(gate, i, i + 1)
                dense.apply_unitary(clifford_to_unitary(gate), (i, i + 1))
        for i in np.flatnonzero(rng.random(n) < q):
            i = int(i)
            if rng.integers(0, 2):
                stab.reset(i)
                dense.reset(i)
            else:
                stab.dephase(i)
                dense.dephase(i)
        for i in np.flatnonzero(rng.random(n) < p_m):
            i = int(i)
            outcome, deterministic = stab.measure_z_info(i, rng)
            prob = dense.measure_z(i, outcome)
            target = 1.0 if deterministic else 0.5
            if abs(prob - target) > tol:
                report.failures.append(
                    {"step": step, "qubit": i, "probability": prob, "expected": target}
                )
        if corrupt_at is not None and step == corrupt_at:
            stab._x[0] ^= stab._active & -stab._active if stab._active else 1
        stab.validate()
        dense.validate()
        _compare_cuts(stab, dense, step, tol, report)
    return report
