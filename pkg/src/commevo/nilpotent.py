"""Exact finite-dimensional backends with central commutators.

``NilpotentFamily`` places coefficient functions on the super-diagonal of a
3x3 or 4x4 matrix (plus an optional central corner term). For ``n = 3`` the
commutator ``[A(s), A(t)]`` is a multiple of ``E_13``; for ``n = 4`` the
2-fold commutators land in ``span{E_14}``. Both are central, so the closed
forms and correction identities hold exactly and every check is limited
only by round-off.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from . import kernels
from .coefficients import Coefficient, Poly, random_poly
from .commutators import CommutatorField
from .errors import InvalidDataError, ModelError, UnsupportedBackendError
from .evolution import GeneratorFamily
from .quadrature import integrate


def unit(n: int, i: int, j: int) -> np.ndarray:
    """Matrix unit ``E_ij`` (1-based indices)."""
    E = np.zeros((n, n), dtype=complex)
    E[i - 1, j - 1] = 1.0
    return E


def nilpotent_exp(M) -> np.ndarray:
    """``sum_{k<n} M^k / k!`` for strictly upper triangular ``M``."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidDataError("expected a square matrix")
    if np.any(np.tril(M) != 0):
        raise InvalidDataError("matrix is not strictly upper triangular")
    n = M.shape[0]
    out = np.eye(n, dtype=complex)
    power = np.eye(n, dtype=complex)
    fact = 1.0
    for k in range(1, n):
        power = power @ M
        fact *= k
        out = out + power / fact
    return out


class NilpotentFamily(GeneratorFamily):
    """``A(t) = sum_k a_k(t) E_{k,k+1} + c(t) E_{1,n}`` with ``n = len(coefficients) + 1``."""

    supports_groups = True

    def __init__(self, coefficients: Sequence[Coefficient], central: Coefficient | None = None):
        if len(coefficients) not in (2, 3):
            raise InvalidDataError("need 2 (n=3) or 3 (n=4) super-diagonal coefficients")
        self.coefficients = list(coefficients)
        self.central_coefficient = central
        self.n = len(coefficients) + 1
        self.Z = unit(self.n, 1, self.n)
        grid = np.linspace(0.0, 1.0, 65)
        omega = max(np.linalg.norm(self.matrix(u), 2) for u in grid)
        # generous margin: the grid only samples the sup norm
        self.stability = (1.0, 1.5 * float(omega) + 1e-12)

    @property
    def order(self) -> int:
        """Depth ``p`` of the first central commutator."""
        return self.n - 2

    def matrices(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        out = np.zeros(times.shape + (self.n, self.n), dtype=complex)
        for k, a in enumerate(self.coefficients):
            out[..., k, k + 1] = a(times)
        if self.central_coefficient is not None:
            out[..., 0, self.n - 1] += self.central_coefficient(times)
        return out

    def matrix(self, t: float) -> np.ndarray:
        return self.matrices(np.array([t]))[0]

    def exp_apply(self, t: float, tau: float, x):
        self._check_duration(tau)
        return nilpotent_exp(self.matrix(t) * tau) @ x

    def gen_apply(self, t: float, x):
        return self.matrix(t) @ x

    def coefficient_table(self, times) -> np.ndarray:
        """Rows ``(a_1(t), ..., a_{n-1}(t), c(t))`` for each time."""
        times = np.asarray(times, dtype=float)
        table = np.zeros((times.size, self.n), dtype=complex)
        for k, a in enumerate(self.coefficients):
            table[:, k] = a(times)
        if self.central_coefficient is not None:
            table[:, self.n - 1] = self.central_coefficient(times)
        return table

    def chain_apply(self, times, durations, x):
        x = np.asarray(x, dtype=complex)
        acc = np.ascontiguousarray(x.reshape(self.n, -1)).copy()
        kernels.superdiag_chain(self.coefficient_table(times),
                                np.ascontiguousarray(durations, dtype=float), acc)
        return acc.reshape(x.shape)

    def random_state(self, rng: np.random.Generator) -> np.ndarray:
        return rng.normal(size=self.n) + 1j * rng.normal(size=self.n)

    # closed-form interface

    def averaged_matrix(self, s: float, t: float) -> np.ndarray:
        """``int_s^t A(tau) dtau`` from exact antiderivatives."""
        B = np.zeros((self.n, self.n), dtype=complex)
        for k, a in enumerate(self.coefficients):
            B[k, k + 1] = a.integral(s, t)
        if self.central_coefficient is not None:
            B[0, self.n - 1] += self.central_coefficient.integral(s, t)
        return B

    def averaged_exp(self, s: float, t: float, x):
        return nilpotent_exp(self.averaged_matrix(s, t)) @ x

    def mu(self, s: float, t: float) -> complex:
        """Coefficient of ``E_13`` in ``[A(s), A(t)]`` (``n = 3`` only)."""
        if self.n != 3:
            raise UnsupportedBackendError("1-fold commutators are central only for n=3")
        a1, a2 = self.coefficients
        return a1(s) * a2(t) - a1(t) * a2(s)

    def phase_exponent(self, s: float, t: float) -> complex:
        """``int_s^t int_s^tau mu(tau, sigma) dsigma dtau``.

        Reduced to a single integral with the antiderivatives ``P_k`` of
        ``a_k``: ``int_s^t a1 (P2 - P2(s)) - a2 (P1 - P1(s)) dtau``. Exact
        for polynomial coefficients; otherwise a 256-node Gauss-Legendre rule
        on the smooth one-dimensional integrand.
        """
        if self.n != 3:
            raise UnsupportedBackendError("no closed form for p >= 2")
        a1, a2 = self.coefficients
        P1, P2 = a1.antiderivative(), a2.antiderivative()
        polys = [a1.polynomial, a2.polynomial]
        if all(p is not None for p in polys):
            q1, q2 = polys
            Q1, Q2 = P1.polynomial, P2.polynomial
            g = q1 * (Q2 - Q2(s)) - q2 * (Q1 - Q1(s))
            G = g.integ()
            return complex(G(t) - G(s))

        def integrand(tau):
            return a1(tau) * (P2(tau) - P2(s)) - a2(tau) * (P1(tau) - P1(s))

        return complex(integrate(integrand, s, t, level=5, nodes=8))

    def apply_central(self, c: complex, x):
        """``exp(c Z) x = (I + c Z) x`` since ``Z**2 = 0``."""
        return x + c * (self.Z @ x)

    def commutator_field(self) -> CommutatorField:
        return extract_commutators(self, np.linspace(0.0, 1.0, 5))


def _commutator(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


def extract_commutators(family: NilpotentFamily, sample_times, tol: float = 1e-13) -> CommutatorField:
    """Nested commutators of the matrix model and their central coefficient.

    ``C^(k)(t1..t_{k+1}) = [C^(k-1)(t1..tk), A(t_{k+1})]`` with ``C^(0) = A``;
    ``mu`` is the ``E_{1n}`` entry of ``C^(p)``. Centrality of ``C^(p)`` is
    verified on all tuples of ``sample_times``; failure raises ``ModelError``.
    """
    p = family.order
    n = family.n

    def C(k: int, *times) -> np.ndarray:
        if len(times) != k + 1:
            raise InvalidDataError(f"C^({k}) takes {k + 1} times")
        out = family.matrix(times[0])
        for u in times[1:]:
            out = _commutator(out, family.matrix(u))
        return out

    def mu(*times) -> complex:
        return complex(C(p, *times)[0, n - 1])

    samples = [float(u) for u in sample_times]
    for tup in _tuples(samples, p + 1):
        top = C(p, *tup)
        off = top.copy()
        off[0, n - 1] = 0.0
        scale = max(1.0, float(np.max(np.abs(top))))
        if np.max(np.abs(off)) > tol * scale:
            raise ModelError(f"C^({p}) at {tup} is not a multiple of E_1{n}")
    for u in samples:
        if np.max(np.abs(_commutator(family.Z, family.matrix(u)))) > tol:
            raise ModelError("central element does not commute with A(t)")
    return CommutatorField(order=p, C=C, mu=mu, central=family.Z)


def _tuples(values, k):
    if k == 0:
        yield ()
        return
    for v in values:
        for rest in _tuples(values, k - 1):
            yield (v,) + rest


@dataclass
class OdeSolution:
    matrix: np.ndarray
    error_estimate: float


def _rk4(family: NilpotentFamily, s: float, t: float, steps: int) -> np.ndarray:
    h = (t - s) / steps
    times = s + h * np.arange(steps + 1)
    mids = times[:-1] + 0.5 * h
    A_left = family.matrices(times[:-1])
    A_mid = family.matrices(mids)
    A_right = family.matrices(times[1:])
    U = np.eye(family.n, dtype=complex)
    for j in range(steps):
        k1 = A_left[j] @ U
        k2 = A_mid[j] @ (U + 0.5 * h * k1)
        k3 = A_mid[j] @ (U + 0.5 * h * k2)
        k4 = A_right[j] @ (U + h * k3)
        U = U + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return U


def ode_oracle(family: NilpotentFamily, s: float, t: float, steps: int = 128) -> OdeSolution:
    """Solve ``U' = A(t) U``, ``U(s) = I`` by classical RK4, Richardson-extrapolated once."""
    if steps < 1:
        raise InvalidDataError("steps must be >= 1")
    if s == t:
        return OdeSolution(np.eye(family.n, dtype=complex), 0.0)
    coarse = _rk4(family, s, t, steps)
    fine = _rk4(family, s, t, 2 * steps)
    extrap = fine + (fine - coarse) / 15.0
    return OdeSolution(extrap, float(np.max(np.abs(fine - coarse))) / 15.0)


def heisenberg_family(a1: Coefficient | None = None, a2: Coefficient | None = None,
                      central: Coefficient | None = None) -> NilpotentFamily:
    """3x3 family; defaults to ``a1 = 1``, ``a2(t) = t``."""
    return NilpotentFamily([a1 or Poly([1.0]), a2 or Poly([0.0, 1.0])], central)


def random_heisenberg(rng: np.random.Generator, with_central: bool = True) -> NilpotentFamily:
    central = random_poly(rng) if with_central else None
    return NilpotentFamily([random_poly(rng), random_poly(rng)], central)


def random_nilpotent4(rng: np.random.Generator) -> NilpotentFamily:
    return NilpotentFamily([random_poly(rng) for _ in range(3)], random_poly(rng))
