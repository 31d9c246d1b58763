"""Central commutator fields, phase integrals and the correction sums S^(l).

For a family whose ``p``-fold commutators are central, passing ``A(r)`` from
the left of a product approximant to its right produces correction terms

    A(r) U_n(t,s) = U_n(t,s) (A(r) + S^(1) + ... + S^(p))

with ``S^(l)`` a weighted sum of ``C^(l)(r, s_j1, ..., s_jl)`` over weakly
decreasing cell tuples. Everything here works on matrix payloads; the top
order ``l = p`` is a scalar multiplying the central element ``Z``.
"""
from __future__ import annotations

import itertools
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidIntervalError, OutOfOrderError, UnsupportedBackendError
from .evolution import Partition, product_approximant
from .quadrature import DEFAULT_LEVEL, DEFAULT_NODES, triangle_rule


@dataclass
class CommutatorField:
    """Nested commutators ``C^(k)`` of a family and their central top value.

    ``C(k, t1, ..., t_{k+1})`` returns the operator for ``0 <= k < order``
    (``C(0, t)`` is the generator itself). ``mu(t1, ..., t_{order+1})`` is the
    scalar coefficient of ``central`` (``None`` for strictly scalar backends).
    """

    order: int
    C: Callable[..., np.ndarray]
    mu: Callable[..., complex]
    central: np.ndarray | None = None

    def top(self, *times) -> np.ndarray:
        """``C^(order)`` as a matrix, i.e. ``mu * Z``."""
        if self.central is None:
            raise UnsupportedBackendError("field has no central matrix")
        return self.mu(*times) * self.central


def multiplicity_alpha(indices: Sequence[int]) -> int:
    """Number of permutations fixing the tuple: product of factorials of the value counts."""
    return math.prod(math.factorial(c) for c in Counter(indices).values())


def phase_integral(mu: Callable[[float, float], complex], s: float, t: float,
                   quad_level: int = DEFAULT_LEVEL, nodes: int = DEFAULT_NODES,
                   vectorized: bool = False) -> complex:
    """``int_s^t int_s^tau mu(tau, sigma) dsigma dtau`` by iterated Gauss-Legendre.

    The factor 1/2 of the representation formula is left to the caller.
    ``vectorized=True`` passes whole node arrays to ``mu`` in one call.
    """
    if s > t:
        raise InvalidIntervalError(f"s={s} > t={t}")
    if s == t:
        return 0j
    tau, sigma, w = triangle_rule(s, t, quad_level, nodes)
    if vectorized:
        vals = np.asarray(mu(tau, sigma), dtype=complex)
    else:
        vals = np.fromiter((mu(a, b) for a, b in zip(tau, sigma)), dtype=complex, count=tau.size)
    return complex(np.dot(w, vals))


def modulus_of_continuity(fn: Callable[[float], object], s: float, t: float, samples: int = 257,
                          threshold: float | None = None) -> float:
    """Largest jump of ``fn`` between neighbouring points of a uniform grid on ``[s, t]``.

    Emits a ``RuntimeWarning`` if ``threshold`` is given and exceeded.
    """
    grid = np.linspace(s, t, samples)
    vals = [np.asarray(fn(u), dtype=complex) for u in grid]
    jump = max(float(np.max(np.abs(b - a))) for a, b in zip(vals[:-1], vals[1:])) if samples > 1 else 0.0
    if threshold is not None and jump > threshold:
        warnings.warn(f"sampled modulus of continuity {jump:.3g} exceeds {threshold:.3g}",
                      RuntimeWarning, stacklevel=2)
    return jump


def antisymmetry_check(mu: Callable[[float, float], complex], samples) -> float:
    """``max |mu(s, t) + mu(t, s)|`` over the sample pairs."""
    worst = 0.0
    for s, t in samples:
        worst = max(worst, abs(mu(s, t) + mu(t, s)))
    return worst


def _cell_list(partition: Partition, s: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    frozen, dur = [], []
    for f, d in partition.cells(s, t):
        frozen.append(f)
        dur.append(d)
    if not frozen:
        return np.empty(0), np.empty(0)
    return np.concatenate(frozen), np.concatenate(dur)


def correction_integral_S(field: CommutatorField, partition: Partition, s: float, t: float,
                          r: float, l: int):
    """Discrete correction ``S^(l)_n(t, s, r)``.

    Sum over cell tuples ``j1 >= ... >= jl`` of
    ``C^(l)(r, s_j1, ..., s_jl) / alpha(j) * h_j1 ... h_jl``, where ``s_j`` is
    the frozen time and ``h_j`` the length of cell ``j`` inside ``[s, t]``.
    Returns a matrix for ``l < p`` and the scalar coefficient of the central
    element for ``l = p``.
    """
    p = field.order
    if not 1 <= l <= p:
        raise OutOfOrderError(f"l={l} outside 1..{p}")
    if s > t:
        raise InvalidIntervalError(f"s={s} > t={t}")
    times, h = _cell_list(partition, s, t)
    m = times.size
    total = None
    for inc in itertools.combinations_with_replacement(range(m), l):
        idx = inc[::-1]
        weight = math.prod(h[j] for j in idx) / multiplicity_alpha(idx)
        args = [float(times[j]) for j in idx]
        term = field.mu(r, *args) if l == p else field.C(l, r, *args)
        term = term * weight
        total = term if total is None else total + term
    if total is None:
        if l == p:
            return 0j
        return 0.0 * field.C(l, *([r] * (l + 1)))
    return total


def commutation_pass_check(F, field: CommutatorField, partition: Partition, s: float, t: float,
                           r: float, x) -> float:
    """Residual ``||A(r) U_n x - U_n (A(r) + S^(1) + ... + S^(p)) x||``.

    Needs a matrix backend exposing ``matrix(t)`` and a central matrix.
    """
    if not hasattr(F, "matrix") or field.central is None:
        raise UnsupportedBackendError(f"{type(F).__name__} has no operator arithmetic")
    A_r = F.matrix(r)
    n = A_r.shape[0]
    U = product_approximant(F, partition, s, t, np.eye(n, dtype=complex))
    shifted = A_r.astype(complex).copy()
    for l in range(1, field.order):
        shifted = shifted + correction_integral_S(field, partition, s, t, r, l)
    shifted = shifted + correction_integral_S(field, partition, s, t, r, field.order) * field.central
    x = np.asarray(x, dtype=complex)
    return float(np.linalg.norm(A_r @ (U @ x) - U @ (shifted @ x)))
