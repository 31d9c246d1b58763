"""Truncated bosonic Fock space used as an independent matrix oracle.

States live on occupation tuples of ``m`` modes with total number
``<= cutoff``. Ladder operators are exact on every sector except the top
one, so results are trusted only while the top-sector mass stays small.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.linalg import expm


class FockSpace:
    def __init__(self, modes: int = 1, cutoff: int = 40):
        if modes < 1 or cutoff < 1:
            raise ValueError("modes and cutoff must be >= 1")
        self.modes = modes
        self.cutoff = cutoff
        basis = [occ for total in range(cutoff + 1)
                 for occ in itertools.product(range(total + 1), repeat=modes) if sum(occ) == total]
        self.basis = basis
        self.index = {occ: i for i, occ in enumerate(basis)}
        self.totals = np.array([sum(occ) for occ in basis])

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def annihilators(self) -> list[np.ndarray]:
        ops = []
        for k in range(self.modes):
            a = np.zeros((self.dim, self.dim), dtype=complex)
            for i, occ in enumerate(self.basis):
                if occ[k] == 0:
                    continue
                lower = occ[:k] + (occ[k] - 1,) + occ[k + 1:]
                a[self.index[lower], i] = math.sqrt(occ[k])
            ops.append(a)
        return ops

    def number(self) -> np.ndarray:
        return np.diag(self.totals.astype(complex))

    def hamiltonian(self, omega) -> np.ndarray:
        """Second quantization of the dispersion ``omega``; the vacuum has energy 0."""
        omega = np.asarray(omega, dtype=float)
        occ = np.array(self.basis, dtype=float)
        return np.diag((occ @ omega).astype(complex))

    def field(self, f) -> np.ndarray:
        """Segal field ``(a(f) + a*(f)) / sqrt(2)``; ``a(f)`` is antilinear in ``f``."""
        f = np.asarray(f, dtype=complex)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for fk, a in zip(f, self.annihilators):
            out += np.conj(fk) * a + fk * a.conj().T
        return out / math.sqrt(2.0)

    def weyl(self, f) -> np.ndarray:
        """``exp(i Phi(f))`` by scaling and squaring on the cutoff space."""
        return expm(1j * self.field(f))

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def coherent(self, alpha, theta: float = 0.0) -> np.ndarray:
        """Amplitudes of ``exp(i theta) |alpha>`` restricted to the cutoff space."""
        alpha = np.asarray(alpha, dtype=complex)
        occ = np.array(self.basis)
        logfact = np.array([[math.lgamma(n + 1) for n in row] for row in occ])
        amp = np.exp(-0.5 * np.sum(np.abs(alpha) ** 2) - 0.5 * logfact.sum(axis=1))
        amp = amp * np.prod(alpha[None, :] ** occ, axis=1)
        return np.exp(1j * theta) * amp

    def top_mass(self, psi) -> float:
        """Probability in the highest retained number sector."""
        psi = np.asarray(psi)
        return float(np.sum(np.abs(psi[self.totals == self.cutoff]) ** 2))


@dataclass
class FockState:
    space: FockSpace
    amplitudes: np.ndarray
    leakage: float = 0.0

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def rk4_evolve(space: FockSpace, generator: Callable[[float], np.ndarray], psi0, s: float, t: float,
               steps: int) -> FockState:
    """Integrate ``psi' = G(t) psi`` by classical RK4.

    ``leakage`` records the largest top-sector mass seen along the way.
    """
    h = (t - s) / steps
    psi = np.asarray(psi0, dtype=complex).copy()
    leak = space.top_mass(psi)
    for j in range(steps):
        u = s + j * h
        G0 = generator(u)
        Gm = generator(u + 0.5 * h)
        G1 = generator(u + h)
        k1 = G0 @ psi
        k2 = Gm @ (psi + 0.5 * h * k1)
        k3 = Gm @ (psi + 0.5 * h * k2)
        k4 = G1 @ (psi + h * k3)
        psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        leak = max(leak, space.top_mass(psi))
    return FockState(space, psi, leak)
