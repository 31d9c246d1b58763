"""Scalar time profiles with exact antiderivatives.

Generator coefficients (nilpotent families) and electric field components
(Schrödinger backend) are built from these, so that time-averaged
generators and drift integrals never need quadrature.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial


class Coefficient:
    """A smooth scalar function of time, closed under antidifferentiation."""

    def __call__(self, t):
        raise NotImplementedError

    def antiderivative(self) -> "Coefficient":
        """Antiderivative normalized to vanish at ``t = 0``."""
        raise NotImplementedError

    @property
    def polynomial(self) -> Polynomial | None:
        """The exact polynomial form, or ``None`` if the profile is not polynomial."""
        return None

    def integral(self, s: float, t: float):
        F = self.antiderivative()
        return F(t) - F(s)

    def __add__(self, other: "Coefficient") -> "Coefficient":
        return Sum([self, other])

    def __neg__(self) -> "Coefficient":
        return self.scaled(-1.0)

    def scaled(self, factor) -> "Coefficient":
        raise NotImplementedError


class Poly(Coefficient):
    """Polynomial profile; ``coefs`` in increasing degree."""

    def __init__(self, coefs: Sequence[complex] | Polynomial):
        if isinstance(coefs, Polynomial):
            self._p = coefs
        else:
            self._p = Polynomial(np.asarray(coefs))

    def __call__(self, t):
        return self._p(t)

    def antiderivative(self) -> "Poly":
        return Poly(self._p.integ(lbnd=0.0))

    @property
    def polynomial(self) -> Polynomial:
        return self._p

    def scaled(self, factor) -> "Poly":
        return Poly(self._p * factor)

    def __repr__(self) -> str:
        return f"Poly({list(self._p.coef)})"


class Harmonic(Coefficient):
    """``amplitude * cos(frequency * t + phase)`` with nonzero frequency."""

    def __init__(self, amplitude: complex, frequency: float, phase: float = 0.0):
        if frequency == 0:
            raise ValueError("use Poly for a constant profile")
        self.amplitude = amplitude
        self.frequency = float(frequency)
        self.phase = float(phase)

    def __call__(self, t):
        return self.amplitude * np.cos(self.frequency * np.asarray(t) + self.phase)

    def antiderivative(self) -> Coefficient:
        prim = Harmonic(self.amplitude / self.frequency, self.frequency, self.phase - math.pi / 2)
        return Sum([prim, Poly([-prim(0.0)])])

    def scaled(self, factor) -> "Harmonic":
        return Harmonic(self.amplitude * factor, self.frequency, self.phase)

    def __repr__(self) -> str:
        return f"Harmonic({self.amplitude}, {self.frequency}, {self.phase})"


class Sum(Coefficient):
    def __init__(self, terms: Sequence[Coefficient]):
        flat: list[Coefficient] = []
        for term in terms:
            flat.extend(term.terms if isinstance(term, Sum) else [term])
        self.terms = flat

    def __call__(self, t):
        return sum(term(t) for term in self.terms)

    def antiderivative(self) -> "Sum":
        return Sum([term.antiderivative() for term in self.terms])

    @property
    def polynomial(self) -> Polynomial | None:
        polys = [term.polynomial for term in self.terms]
        if any(p is None for p in polys):
            return None
        total = Polynomial([0.0])
        for p in polys:
            total = total + p
        return total

    def scaled(self, factor) -> "Sum":
        return Sum([term.scaled(factor) for term in self.terms])

    def __repr__(self) -> str:
        return " + ".join(repr(term) for term in self.terms)


def constant(value: complex) -> Poly:
    return Poly([value])


def linear(slope: complex, offset: complex = 0.0) -> Poly:
    return Poly([offset, slope])


def sine(amplitude: float, frequency: float) -> Harmonic:
    """``amplitude * sin(frequency * t)``."""
    return Harmonic(amplitude, frequency, -math.pi / 2)


def random_poly(rng: np.random.Generator, max_degree: int = 4) -> Poly:
    """Random polynomial of degree <= ``max_degree`` with coefficients in [-1, 1]."""
    degree = int(rng.integers(0, max_degree + 1))
    return Poly(rng.uniform(-1.0, 1.0, size=degree + 1))
