"""Coherent-state bookkeeping for Segal field and van Hove dynamics on finitely many modes.

A coherent label ``(alpha, theta)`` stands for the unit vector
``exp(i theta) |alpha>``. Weyl operators ``W(f) = exp(i Phi(f))`` map labels
to labels, so the evolution generated by ``i Phi(f_t)`` is tracked exactly:
``U(t, s) = W(g) exp(i phase)`` with ``g = int f`` and
``phase = -1/2 int_s^t int_s^tau Im<f_tau, f_sigma>``.

Conventions: ``<f, g> = sum(conj(f) * g)``; ``Phi(f) = (a(f) + a*(f)) / sqrt(2)``
with ``a(f)`` antilinear, hence ``W(f)`` is the displacement by ``i f / sqrt(2)``.
The displacement rule is cross-checked against the truncated Fock oracle in
the test suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .commutators import modulus_of_continuity, phase_integral
from .errors import InvalidDataError, InvalidIntervalError
from .evolution import GeneratorFamily
from .fock import FockSpace, FockState, rk4_evolve
from .quadrature import DEFAULT_LEVEL, DEFAULT_NODES, integrate

SQRT2 = math.sqrt(2.0)


def inner(f, g) -> complex:
    return complex(np.vdot(np.asarray(f, dtype=complex), np.asarray(g, dtype=complex)))


@dataclass(frozen=True)
class ModeSpace:
    omega: np.ndarray

    def __post_init__(self):
        omega = np.atleast_1d(np.asarray(self.omega, dtype=float))
        if np.any(omega <= 0):
            raise InvalidDataError("frequencies must be positive")
        object.__setattr__(self, "omega", omega)

    @property
    def m(self) -> int:
        return self.omega.size


@dataclass(frozen=True)
class CoherentLabel:
    alpha: np.ndarray
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.atleast_1d(np.asarray(self.alpha, dtype=complex)))
        object.__setattr__(self, "theta", float(self.theta))

    @classmethod
    def vacuum(cls, modes: int = 1) -> "CoherentLabel":
        return cls(np.zeros(modes, dtype=complex), 0.0)

    def overlap(self, other: "CoherentLabel") -> complex:
        return np.exp(self._log_overlap(other))

    def _log_overlap(self, other: "CoherentLabel") -> complex:
        d = other.alpha - self.alpha
        cross = np.vdot(self.alpha, other.alpha)
        return 1j * (other.theta - self.theta) - 0.5 * float(np.vdot(d, d).real) + 1j * cross.imag

    def distance(self, other: "CoherentLabel") -> float:
        """Hilbert-space distance of the two unit vectors, without cancellation."""
        gap = -2.0 * np.expm1(self._log_overlap(other)).real
        return math.sqrt(max(gap, 0.0))

    def fock(self, space: FockSpace) -> np.ndarray:
        return space.coherent(self.alpha, self.theta)

    def rotated(self, angles) -> "CoherentLabel":
        """Label of ``exp(i sum_k angles_k N_k)`` applied to this state."""
        return CoherentLabel(self.alpha * np.exp(1j * np.asarray(angles, dtype=float)), self.theta)


def weyl_compose(f, g) -> tuple[np.ndarray, float]:
    """``W(f) W(g) = W(f + g) exp(i phase)`` with ``phase = -Im<f, g> / 2``."""
    f = np.atleast_1d(np.asarray(f, dtype=complex))
    g = np.atleast_1d(np.asarray(g, dtype=complex))
    if f.shape != g.shape:
        raise InvalidDataError("mode count mismatch")
    return f + g, -0.5 * inner(f, g).imag


def weyl_apply_coherent(f, x: CoherentLabel) -> CoherentLabel:
    """Label of ``W(f) exp(i theta) |alpha>``.

    ``W(f)`` displaces by ``beta = i f / sqrt(2)`` and
    ``D(beta)|alpha> = exp(i Im(beta conj(alpha))) |alpha + beta>``.
    """
    f = np.atleast_1d(np.asarray(f, dtype=complex))
    if f.shape != x.alpha.shape:
        raise InvalidDataError("mode count mismatch")
    beta = 1j * f / SQRT2
    return CoherentLabel(x.alpha + beta, x.theta + float(np.sum(beta * np.conj(x.alpha)).imag))


def source_values(f: Callable, times) -> np.ndarray:
    """Evaluate a mode-valued source at an array of times; shape ``(k, m)``."""
    times = np.asarray(times, dtype=float)
    if getattr(f, "vectorized", False):
        return np.asarray(f(times), dtype=complex).reshape(times.size, -1)
    return np.array([np.atleast_1d(f(float(u))) for u in times], dtype=complex).reshape(times.size, -1)


class ModulatedSource:
    """``f_t = amplitude * exp(i frequency t) * f0`` (constant when ``frequency = 0``)."""

    vectorized = True

    def __init__(self, f0, frequency: float = 0.0, amplitude: complex = 1.0):
        self.f0 = np.atleast_1d(np.asarray(f0, dtype=complex))
        self.frequency = float(frequency)
        self.amplitude = amplitude

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        phase = self.amplitude * np.exp(1j * self.frequency * t)
        return phase[..., None] * self.f0 if t.ndim else phase * self.f0


class InteractionSource:
    """``f~_t = -exp(i omega t) f_t``, the source seen in the interaction picture."""

    def __init__(self, f: Callable, modes: ModeSpace):
        self.f = f
        self.modes = modes
        self.vectorized = True

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return -np.exp(1j * self.modes.omega * float(t)) * np.atleast_1d(self.f(float(t)))
        vals = source_values(self.f, t)
        return -np.exp(1j * t[:, None] * self.modes.omega[None, :]) * vals


def segal_mu(f: Callable) -> Callable:
    """Scalar commutator ``mu(s, t) = [i Phi(f_s), i Phi(f_t)] = -i Im<f_s, f_t>``."""

    def mu(s, t):
        return -1j * inner(np.atleast_1d(f(s)), np.atleast_1d(f(t))).imag

    return mu


def _mu_arrays(f: Callable):
    def mu(tau, sigma):
        ft = source_values(f, tau)
        fs = source_values(f, sigma)
        return -1j * np.sum(np.conj(ft) * fs, axis=1).imag

    return mu


def segal_evolution(f: Callable, s: float, t: float, quad_level: int = DEFAULT_LEVEL,
                    nodes: int = DEFAULT_NODES, continuity_threshold: float | None = None):
    """Parameters ``(g, phase)`` of ``U(t, s) = W(g) exp(i phase)`` for ``A(t) = i Phi(f_t)``."""
    if s > t:
        raise InvalidIntervalError(f"s={s} > t={t}")
    if continuity_threshold is not None:
        modulus_of_continuity(f, s, t, threshold=continuity_threshold)
    if s == t:
        m = np.atleast_1d(f(s)).size
        return np.zeros(m, dtype=complex), 0.0
    g = integrate(lambda u: source_values(f, u), s, t, quad_level, nodes)
    phi = phase_integral(_mu_arrays(f), s, t, quad_level, nodes, vectorized=True)
    return np.asarray(g, dtype=complex), 0.5 * phi.imag


def apply_segal(f: Callable, s: float, t: float, x: CoherentLabel, quad_level: int = DEFAULT_LEVEL) -> CoherentLabel:
    g, phase = segal_evolution(f, s, t, quad_level)
    y = weyl_apply_coherent(g, x)
    return CoherentLabel(y.alpha, y.theta + phase)


class SegalFamily(GeneratorFamily):
    """``A(t) = i Phi(f_t)`` acting on coherent labels."""

    supports_groups = True
    stability = (1.0, 0.0)

    def __init__(self, f: Callable, quad_level: int = DEFAULT_LEVEL):
        self.f = f
        self.quad_level = quad_level
        self.mu = segal_mu(f)

    def exp_apply(self, t: float, tau: float, x: CoherentLabel) -> CoherentLabel:
        return weyl_apply_coherent(tau * np.atleast_1d(self.f(t)), x)

    def chain_apply(self, times, durations, x: CoherentLabel) -> CoherentLabel:
        """Compose ``W(h_j f(s_j))`` over a chunk with the Weyl composition law."""
        steps = np.asarray(durations)[:, None] * source_values(self.f, times)
        before = np.cumsum(steps, axis=0) - steps
        phase = -0.5 * np.sum(np.conj(steps) * before).imag
        y = weyl_apply_coherent(steps.sum(axis=0), x)
        return CoherentLabel(y.alpha, y.theta + phase)

    def norm(self, x: CoherentLabel) -> float:
        return 1.0

    def distance(self, x: CoherentLabel, y: CoherentLabel) -> float:
        return x.distance(y)

    def random_state(self, rng: np.random.Generator) -> CoherentLabel:
        m = np.atleast_1d(self.f(0.0)).size
        return CoherentLabel(rng.normal(size=m) + 1j * rng.normal(size=m), rng.uniform(0, 2 * np.pi))

    # closed-form interface

    def averaged_exp(self, s: float, t: float, x: CoherentLabel) -> CoherentLabel:
        g = integrate(lambda u: source_values(self.f, u), s, t, self.quad_level)
        return weyl_apply_coherent(g, x)

    def phase_exponent(self, s: float, t: float) -> complex:
        return phase_integral(_mu_arrays(self.f), s, t, self.quad_level, vectorized=True)

    def apply_central(self, c: complex, x: CoherentLabel) -> CoherentLabel:
        if abs(c.real) > 1e-14 * max(1.0, abs(c)):
            raise InvalidDataError("scalar commutators of skew-adjoint generators are imaginary")
        return CoherentLabel(x.alpha, x.theta + c.imag)


def vanhove_evolution(f: Callable, modes: ModeSpace, s: float, t: float, x: CoherentLabel,
                      quad_level: int = DEFAULT_LEVEL) -> CoherentLabel:
    """Evolution generated by ``-i (H_omega + Phi(f_t))`` through the interaction picture.

    ``U(t, s) = exp(-i H t) U~(t, s) exp(i H s)`` where ``U~`` is the Segal
    evolution for ``f~_t = -exp(i omega t) f_t``. The vacuum energy is zero,
    so the free factors only rotate the label.
    """
    if s > t:
        raise InvalidIntervalError(f"s={s} > t={t}")
    y = x.rotated(modes.omega * s)
    y = apply_segal(InteractionSource(f, modes), s, t, y, quad_level)
    return y.rotated(-modes.omega * t)


class VanHoveFamily(GeneratorFamily):
    """``A(t) = -i (H_omega + Phi(f_t))`` acting on coherent labels.

    The frozen exponential is exact: for a constant source ``f0`` the
    interaction picture gives ``g = -f0 (exp(i omega tau) - 1) / (i omega)``
    and ``phase = sum |f0|^2 (tau - sin(omega tau) / omega) / (2 omega)``,
    followed by the free rotation over ``tau``.
    """

    supports_groups = True
    stability = (1.0, 0.0)

    def __init__(self, f: Callable, modes: ModeSpace, quad_level: int = DEFAULT_LEVEL):
        self.f = f
        self.modes = modes
        self.quad_level = quad_level

    def exp_apply(self, t: float, tau: float, x: CoherentLabel) -> CoherentLabel:
        f0 = np.atleast_1d(np.asarray(self.f(t), dtype=complex))
        w = self.modes.omega
        g = -f0 * np.expm1(1j * w * tau) / (1j * w)
        phase = 0.5 * float(np.sum(np.abs(f0) ** 2 * (tau - np.sin(w * tau) / w) / w))
        y = weyl_apply_coherent(g, x)
        return CoherentLabel(y.alpha, y.theta + phase).rotated(-w * tau)

    def norm(self, x: CoherentLabel) -> float:
        return 1.0

    def distance(self, x: CoherentLabel, y: CoherentLabel) -> float:
        return x.distance(y)

    def propagate(self, s: float, t: float, x: CoherentLabel) -> CoherentLabel:
        return vanhove_evolution(self.f, self.modes, s, t, x, self.quad_level)


# truncated Fock oracles


def fidelity(x: CoherentLabel, psi: FockState) -> float:
    return abs(np.vdot(x.fock(psi.space), psi.amplitudes)) ** 2


def segal_fock_oracle(f: Callable, s: float, t: float, x: CoherentLabel, space: FockSpace,
                      steps: int = 2000) -> FockState:
    """RK4 integration of ``psi' = i Phi(f_t) psi`` from the Fock image of ``x``."""
    ann = space.annihilators
    cre = [a.conj().T for a in ann]

    def generator(u):
        fu = np.atleast_1d(f(u))
        phi = sum(np.conj(fk) * a + fk * c for fk, a, c in zip(fu, ann, cre)) / SQRT2
        return 1j * phi

    return rk4_evolve(space, generator, x.fock(space), s, t, steps)


def vanhove_fock_oracle(f: Callable, modes: ModeSpace, s: float, t: float, x: CoherentLabel,
                        space: FockSpace, steps: int = 4000) -> FockState:
    """RK4 integration of ``psi' = -i (H_omega + Phi(f_t)) psi``."""
    ann = space.annihilators
    cre = [a.conj().T for a in ann]
    H = space.hamiltonian(modes.omega)

    def generator(u):
        fu = np.atleast_1d(f(u))
        phi = sum(np.conj(fk) * a + fk * c for fk, a, c in zip(fu, ann, cre)) / SQRT2
        return -1j * (H + phi)

    return rk4_evolve(space, generator, x.fock(space), s, t, steps)


@dataclass
class BoundCheck:
    lhs: float
    rhs: float
    conclusive: bool

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def number_bound_check(f, psi: FockState, max_top_mass: float = 1e-10) -> BoundCheck:
    """``||Phi(f) psi||`` against ``sqrt(2) ||f|| ||(N + 1)^(1/2) psi||``."""
    f = np.atleast_1d(np.asarray(f, dtype=complex))
    space = psi.space
    lhs = float(np.linalg.norm(space.field(f) @ psi.amplitudes))
    weight = np.sqrt(space.totals + 1.0)
    rhs = SQRT2 * float(np.linalg.norm(f)) * float(np.linalg.norm(weight * psi.amplitudes))
    return BoundCheck(lhs, rhs, space.top_mass(psi.amplitudes) <= max_top_mass)


def hw_bound_check(f, psi: FockState, modes: ModeSpace, max_top_mass: float = 1e-10) -> BoundCheck:
    """``||Phi(f) psi||`` against ``sqrt(2) (||f||^2 + ||f/sqrt(omega)||^2)^(1/2) ||(H + 1)^(1/2) psi||``."""
    f = np.atleast_1d(np.asarray(f, dtype=complex))
    space = psi.space
    lhs = float(np.linalg.norm(space.field(f) @ psi.amplitudes))
    energy = np.real(np.diag(space.hamiltonian(modes.omega)))
    coupling = float(np.linalg.norm(f)) ** 2 + float(np.linalg.norm(f / np.sqrt(modes.omega))) ** 2
    rhs = SQRT2 * math.sqrt(coupling) * float(np.linalg.norm(np.sqrt(energy + 1.0) * psi.amplitudes))
    return BoundCheck(lhs, rhs, space.top_mass(psi.amplitudes) <= max_top_mass)


def random_fock_state(space: FockSpace, rng: np.random.Generator, max_number: int | None = None) -> FockState:
    """Normalized random state supported on number sectors ``<= max_number``."""
    if max_number is None:
        max_number = space.cutoff - 2
    amp = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    amp[space.totals > max_number] = 0.0
    amp /= np.linalg.norm(amp)
    return FockState(space, amp)
