"""Particle in a spatially constant, time-dependent electric field on a periodic grid.

The equation is ``i psi' = (-Delta + b(t).x) psi``, i.e. ``A(t) = i Delta - i b(t).x``.
With the drift ``c(t) = int_0^t b`` the gauge transform ``exp(-i c(t).x)``
turns it into a commuting family of Fourier multipliers, so

    U(t, s) = exp(-i c(t).x) F^-1 exp(-i int_s^t |xi - c|^2) F exp(i c(s).x)

The frozen-field exponential factorizes exactly into a free step, a position
phase, a translation and a scalar phase. The box ``[-L, L)^d`` stands in for
``R^d``; results are meaningful only while the packet stays away from the seam,
which ``WaveFunction.boundary_mass`` monitors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .coefficients import Coefficient, Poly
from .commutators import CommutatorField
from .errors import InvalidDataError, InvalidIntervalError, UnsupportedBackendError
from .evolution import GeneratorFamily, dyadic_partition, product_approximant
from .quadrature import integrate

BOUNDARY_SHELL = 0.1
BOUNDARY_LIMIT = 1e-8


class Grid:
    """Uniform periodic grid with ``n`` points per axis on ``[-L, L)^d``."""

    def __init__(self, d: int = 1, L: float = 40.0, n: int = 1024):
        if d not in (1, 2):
            raise InvalidDataError("d must be 1 or 2")
        if n < 2 or n & (n - 1):
            raise InvalidDataError("n must be a power of two")
        if not L > 0:
            raise InvalidDataError("L must be positive")
        self.d, self.L, self.n = d, float(L), n
        self.dx = 2.0 * self.L / n
        axis = -self.L + self.dx * np.arange(n)
        freq = 2.0 * np.pi * np.fft.fftfreq(n, d=self.dx)
        self.x = np.meshgrid(*([axis] * d), indexing="ij", sparse=True)
        self.xi = np.meshgrid(*([freq] * d), indexing="ij", sparse=True)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def cell_volume(self) -> float:
        return self.dx**self.d

    @property
    def xi2(self) -> np.ndarray:
        return sum(k**2 for k in self.xi)

    def dot_x(self, v) -> np.ndarray:
        return sum(float(vk) * xk for vk, xk in zip(np.atleast_1d(v), self.x))

    def dot_xi(self, v) -> np.ndarray:
        return sum(float(vk) * k for vk, k in zip(np.atleast_1d(v), self.xi))

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and (self.d, self.L, self.n) == (other.d, other.L, other.n)

    def __repr__(self) -> str:
        return f"Grid(d={self.d}, L={self.L}, n={self.n})"


@dataclass
class WaveFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise InvalidDataError(f"values of shape {self.values.shape} do not fit {self.grid}")

    def with_values(self, values) -> "WaveFunction":
        return WaveFunction(self.grid, values)

    @property
    def norm(self) -> float:
        return math.sqrt(self.grid.cell_volume) * float(np.linalg.norm(self.values))

    def distance(self, other: "WaveFunction") -> float:
        return math.sqrt(self.grid.cell_volume) * float(np.linalg.norm(self.values - other.values))

    def boundary_mass(self) -> float:
        """Probability in the outer shell ``|x_k| > (1 - 0.1) L`` of any axis."""
        mask = np.zeros(self.grid.shape, dtype=bool)
        for xk in self.grid.x:
            mask = mask | (np.abs(xk) > (1.0 - BOUNDARY_SHELL) * self.grid.L)
        return self.grid.cell_volume * float(np.sum(np.abs(self.values[mask]) ** 2))

    def check_interior(self, limit: float = BOUNDARY_LIMIT) -> None:
        mass = self.boundary_mass()
        if mass > limit:
            raise InvalidDataError(f"boundary mass {mass:.3g} exceeds {limit:.3g}; enlarge the box")

    def mean_position(self) -> np.ndarray:
        rho = np.abs(self.values) ** 2
        total = rho.sum()
        return np.array([float(np.sum(xk * rho) / total) for xk in self.grid.x])

    def mean_momentum(self) -> np.ndarray:
        rho = np.abs(np.fft.fftn(self.values)) ** 2
        total = rho.sum()
        return np.array([float(np.sum(k * rho) / total) for k in self.grid.xi])

    def save(self, path) -> None:
        """Header line ``d n L`` followed by raw little-endian complex64 values."""
        with open(path, "wb") as fh:
            fh.write(f"{self.grid.d} {self.grid.n} {self.grid.L!r}\n".encode())
            fh.write(self.values.astype("<c8").tobytes())

    @classmethod
    def load(cls, path) -> "WaveFunction":
        raw = Path(path).read_bytes()
        head, _, body = raw.partition(b"\n")
        try:
            d, n, L = head.decode().split()
            grid = Grid(int(d), float(L), int(n))
        except ValueError as exc:
            raise InvalidDataError(f"bad header {head!r}") from exc
        data = np.frombuffer(body, dtype="<c8")
        if data.size != n_points(grid):
            raise InvalidDataError(f"expected {n_points(grid)} values, found {data.size}")
        return cls(grid, data.astype(complex).reshape(grid.shape))


def n_points(grid: Grid) -> int:
    return grid.n**grid.d


def gaussian_packet(grid: Grid, center=0.0, momentum=0.0, width: float = 1.0) -> WaveFunction:
    """Normalized ``exp(-|x - x0|^2 / (4 width^2) + i p0.x)``."""
    x0 = np.broadcast_to(np.asarray(center, dtype=float), (grid.d,))
    p0 = np.broadcast_to(np.asarray(momentum, dtype=float), (grid.d,))
    expo = sum(-((xk - a) ** 2) / (4.0 * width**2) + 1j * p * xk for xk, a, p in zip(grid.x, x0, p0))
    psi = np.exp(expo) * np.ones(grid.shape)
    wf = WaveFunction(grid, psi)
    return WaveFunction(grid, psi / wf.norm)


class FieldProfile:
    """Field ``b(t)`` in ``R^d`` with one coefficient per axis, and its drift ``c = int_0^t b``."""

    def __init__(self, components: Sequence[Coefficient]):
        if len(components) not in (1, 2):
            raise InvalidDataError("one or two field components")
        self.components = list(components)
        self.drifts = [b.antiderivative() for b in self.components]

    @property
    def d(self) -> int:
        return len(self.components)

    def b(self, t: float) -> np.ndarray:
        return np.array([float(np.real(b(t))) for b in self.components])

    def c(self, t: float) -> np.ndarray:
        return np.array([float(np.real(c(t))) for c in self.drifts])

    def drift_integral(self, s: float, t: float) -> np.ndarray:
        """``int_s^t c`` per axis, from the second antiderivative."""
        return np.array([float(np.real(c.integral(s, t))) for c in self.drifts])

    def drift_square_integral(self, s: float, t: float) -> float:
        """``int_s^t |c|^2``; exact for polynomial fields, Gauss-Legendre otherwise."""
        total = 0.0
        for c in self.drifts:
            P = c.polynomial
            if P is not None:
                Q = (P * P).integ()
                total += float(np.real(Q(t) - Q(s)))
            else:
                total += float(integrate(lambda u: np.abs(c(u)) ** 2, s, t, level=5, nodes=8))
        return total

    def phase_multiplier(self, grid: Grid, s: float, t: float) -> np.ndarray:
        """``exp(-i int_s^t |xi - c(tau)|^2 dtau)`` on the Fourier grid."""
        expo = grid.xi2 * (t - s) - 2.0 * grid.dot_xi(self.drift_integral(s, t)) + self.drift_square_integral(s, t)
        return np.exp(-1j * expo)

    @classmethod
    def constant(cls, *values: float) -> "FieldProfile":
        return cls([Poly([v]) for v in values])


def _check_grid(psi: WaveFunction, profile: FieldProfile) -> None:
    if psi.grid.d != profile.d:
        raise InvalidDataError(f"field has {profile.d} components, grid is {psi.grid.d}-dimensional")


def spectral_propagator(psi: WaveFunction, profile: FieldProfile, s: float, t: float) -> WaveFunction:
    """Gauge-transformed closed form of ``U(t, s) psi``."""
    if s > t:
        raise InvalidIntervalError(f"s={s} > t={t}")
    _check_grid(psi, profile)
    g = psi.grid
    phi = np.exp(1j * g.dot_x(profile.c(s))) * psi.values
    phi = np.fft.ifftn(profile.phase_multiplier(g, s, t) * np.fft.fftn(phi))
    return psi.with_values(np.exp(-1j * g.dot_x(profile.c(t))) * phi)


# elementary groups


def free_group(psi: WaveFunction, t: float) -> WaveFunction:
    """``exp(i Delta t)``."""
    g = psi.grid
    return psi.with_values(np.fft.ifftn(np.exp(-1j * g.xi2 * t) * np.fft.fftn(psi.values)))


def field_group(psi: WaveFunction, b, t: float) -> WaveFunction:
    """``exp(B t)`` with ``B = -i b.x``."""
    return psi.with_values(np.exp(-1j * t * psi.grid.dot_x(b)) * psi.values)


def translation_group(psi: WaveFunction, v, s: float = 1.0) -> WaveFunction:
    """``exp(s v.grad)``, i.e. ``psi(x + s v)``, by Fourier shift."""
    g = psi.grid
    return psi.with_values(np.fft.ifftn(np.exp(1j * s * g.dot_xi(v)) * np.fft.fftn(psi.values)))


def frozen_step(psi: WaveFunction, b0, tau: float) -> WaveFunction:
    """``exp((i Delta - i b0.x) tau)`` as the exact product

    ``exp(A0 tau) exp(B tau) exp(-tau^2 b0.grad) exp(2 i |b0|^2 tau^3 / 3)``.
    """
    b0 = np.atleast_1d(np.asarray(b0, dtype=float))
    if b0.size != psi.grid.d:
        raise InvalidDataError("field dimension does not match the grid")
    out = psi.with_values(np.exp(2j * float(b0 @ b0) * tau**3 / 3.0) * psi.values)
    out = translation_group(out, b0, -tau * tau)
    out = field_group(out, b0, tau)
    return free_group(out, tau)


class ElectricFamily(GeneratorFamily):
    """``A(t) = i Delta - i b(t).x`` acting on wave functions."""

    supports_groups = True
    stability = (1.0, 0.0)

    def __init__(self, profile: FieldProfile):
        self.profile = profile

    def exp_apply(self, t: float, tau: float, x: WaveFunction) -> WaveFunction:
        return frozen_step(x, self.profile.b(t), tau)

    def gen_apply(self, t: float, x: WaveFunction) -> WaveFunction:
        g = x.grid
        lap = np.fft.ifftn(-g.xi2 * np.fft.fftn(x.values))
        return x.with_values(1j * lap - 1j * g.dot_x(self.profile.b(t)) * x.values)

    def norm(self, x: WaveFunction) -> float:
        return x.norm

    def distance(self, x: WaveFunction, y: WaveFunction) -> float:
        return x.distance(y)

    def commutator_field(self) -> CommutatorField:
        """``C^(1)(t1, t2) = 2 (b(t2) - b(t1)).grad``; ``mu`` is the triple commutator."""

        def C(k: int, *times):
            if k != 1 or len(times) != 2:
                raise UnsupportedBackendError("only C^(1) is an operator for this family")
            return GradientOperator(2.0 * (self.profile.b(times[1]) - self.profile.b(times[0])))

        return CommutatorField(order=2, C=C, mu=lambda *ts: triple_commutator_mu(self.profile, *ts))


@dataclass
class GradientOperator:
    """``v.grad`` with a constant coefficient vector."""

    v: np.ndarray

    def __mul__(self, k: float) -> "GradientOperator":
        return GradientOperator(np.asarray(self.v) * k)

    __rmul__ = __mul__

    def __add__(self, other: "GradientOperator") -> "GradientOperator":
        return GradientOperator(np.asarray(self.v) + np.asarray(other.v))

    def apply(self, psi: WaveFunction) -> WaveFunction:
        g = psi.grid
        return psi.with_values(np.fft.ifftn(1j * g.dot_xi(self.v) * np.fft.fftn(psi.values)))


def product_limit(psi: WaveFunction, profile: FieldProfile, s: float, t: float, level: int) -> WaveFunction:
    """Frozen steps over the dyadic partition of ``[s, t]``, field frozen at cell-left times."""
    if s > t:
        raise InvalidIntervalError(f"s={s} > t={t}")
    _check_grid(psi, profile)
    if s == t:
        return psi.with_values(psi.values.copy())
    return product_approximant(ElectricFamily(profile), dyadic_partition(s, t, level), s, t, psi)


def _strang(psi: WaveFunction, profile: FieldProfile, s: float, t: float, steps: int) -> np.ndarray:
    g = psi.grid
    h = (t - s) / steps
    half = np.exp(-0.5j * g.xi2 * h)
    v = np.fft.fftn(psi.values)
    for j in range(steps):
        mid = s + (j + 0.5) * h
        u = np.fft.ifftn(half * v)
        u *= np.exp(-1j * h * g.dot_x(profile.b(mid)))
        v = half * np.fft.fftn(u)
    return np.fft.ifftn(v)


def splitting_oracle(psi: WaveFunction, profile: FieldProfile, s: float, t: float,
                     steps: int = 256) -> WaveFunction:
    """Strang splitting with the field frozen at step midpoints, Richardson-extrapolated once."""
    if steps < 1:
        raise InvalidDataError("steps must be >= 1")
    if s > t:
        raise InvalidIntervalError(f"s={s} > t={t}")
    _check_grid(psi, profile)
    coarse = _strang(psi, profile, s, t, steps)
    fine = _strang(psi, profile, s, t, 2 * steps)
    return psi.with_values((4.0 * fine - coarse) / 3.0)


def triple_commutator_mu(profile: FieldProfile, t1: float, t2: float, t3: float) -> complex:
    """``[[A(t1), A(t2)], A(t3)] = -2i (b(t2) - b(t1)).b(t3)``."""
    return complex(-2j * float((profile.b(t2) - profile.b(t1)) @ profile.b(t3)))


def gauge_equivalence_check(psi: WaveFunction, profile: FieldProfile, s: float, t: float, level: int) -> float:
    """``||spectral_propagator psi - product_limit psi||`` in ``L^2``."""
    exact = spectral_propagator(psi, profile, s, t)
    return exact.distance(product_limit(psi, profile, s, t, level))


def commutation_residuals(psi: WaveFunction, b, t: float, s: float) -> tuple[float, float, float]:
    """Residuals of the three group relations for ``A0 = i Delta``, ``B = -i b.x``, ``grad``.

    * ``exp(A0 t) exp(s d_k) = exp(s d_k) exp(A0 t)``
    * ``exp(B t) exp(s d_k) = exp(s d_k) exp(B t) exp(i b_k t s)``
    * ``exp(A0 t) exp(B s) = exp(B s) exp(A0 t) exp(2 t s b.grad) exp(-i |b|^2 t s^2)``

    The first two are reported as the worst case over axes.
    """
    b = np.atleast_1d(np.asarray(b, dtype=float))
    d = psi.grid.d
    r1 = r2 = 0.0
    for k in range(d):
        e = np.zeros(d)
        e[k] = 1.0
        lhs = free_group(translation_group(psi, e, s), t)
        rhs = translation_group(free_group(psi, t), e, s)
        r1 = max(r1, lhs.distance(rhs))
        lhs = field_group(translation_group(psi, e, s), b, t)
        rhs = translation_group(field_group(psi.with_values(np.exp(1j * b[k] * t * s) * psi.values), b, t), e, s)
        r2 = max(r2, lhs.distance(rhs))
    lhs = free_group(field_group(psi, b, s), t)
    inner = translation_group(psi.with_values(np.exp(-1j * float(b @ b) * t * s * s) * psi.values), b, 2.0 * t * s)
    rhs = field_group(free_group(inner, t), b, s)
    return r1, r2, lhs.distance(rhs)
