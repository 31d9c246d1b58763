"""Partitions, piecewise-frozen product approximants and mesh refinement.

A backend is any :class:`GeneratorFamily`: it knows how to apply the frozen
exponential ``exp(A(t) * tau)`` to a state. The product approximant on a
partition evolves piecewise with the generator frozen at the left end point
of each cell; refining the partition drives it to the evolution system.
"""
from __future__ import annotations

import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator

import numpy as np

from .errors import InvalidDataError, InvalidIntervalError, UnsupportedBackendError

CHUNK = 1 << 16


class Partition:
    """Strictly increasing mesh ``points[0] < ... < points[-1]``.

    ``r(u)`` is the largest point ``<= u``; ``r_plus``/``r_minus`` are its
    neighbours above and below; ``index(u)`` is the position of ``r(u)``.
    """

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise InvalidDataError("a partition needs at least two points")
        if not np.all(np.diff(pts) > 0):
            raise InvalidDataError("partition points must be strictly increasing")
        self._points = pts

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def start(self) -> float:
        return float(self._points[0])

    @property
    def stop(self) -> float:
        return float(self._points[-1])

    @property
    def ncells(self) -> int:
        return len(self._points) - 1

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self._points)))

    def __len__(self) -> int:
        return self.ncells + 1

    def point(self, i: int) -> float:
        return float(self._points[i])

    def _check_inside(self, u: float) -> None:
        if not (self.start <= u <= self.stop):
            raise InvalidIntervalError(f"{u} outside [{self.start}, {self.stop}]")

    def index(self, u: float) -> int:
        self._check_inside(u)
        return int(np.searchsorted(self._points, u, side="right") - 1)

    def r(self, u: float) -> float:
        return self.point(self.index(u))

    def r_plus(self, u: float) -> float:
        i = self.index(u)
        if i >= self.ncells:
            raise InvalidIntervalError(f"no partition point above {u}")
        return self.point(i + 1)

    def r_minus(self, u: float) -> float:
        i = self.index(u)
        if i == 0:
            raise InvalidIntervalError(f"no partition point below r({u})")
        return self.point(i - 1)

    def _cell_range(self, s: float, t: float) -> tuple[int, int]:
        """Indices ``i0 <= i < i1`` of the cells meeting ``[s, t]`` in positive length."""
        self._check_inside(s)
        self._check_inside(t)
        if s > t:
            raise InvalidIntervalError(f"s={s} > t={t}")
        if s == t:
            return 0, 0
        i0 = self.index(s)
        i1 = int(np.searchsorted(self._points, t, side="left"))
        return i0, i1

    def cells(self, s: float, t: float, chunk: int = CHUNK) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Yield ``(frozen_times, durations)`` for the cells of ``[s, t]`` in time order."""
        i0, i1 = self._cell_range(s, t)
        for lo in range(i0, i1, chunk):
            hi = min(lo + chunk, i1)
            left = self._points[lo:hi]
            right = self._points[lo + 1:hi + 1]
            frozen = left.copy()
            a = np.maximum(left, s)
            b = np.minimum(right, t)
            yield frozen, b - a


class UniformPartition(Partition):
    """Equispaced partition stored implicitly, so very fine meshes stay cheap."""

    def __init__(self, start: float, stop: float, ncells: int):
        if not start < stop:
            raise InvalidIntervalError(f"start={start} must be < stop={stop}")
        if ncells < 1:
            raise InvalidDataError("ncells must be >= 1")
        self._start = float(start)
        self._stop = float(stop)
        self._n = int(ncells)
        self._cache: np.ndarray | None = None

    def _pts(self, i):
        i = np.asarray(i, dtype=float)
        return self._start + (self._stop - self._start) * (i / self._n)

    @property
    def points(self) -> np.ndarray:
        if self._cache is None:
            self._cache = self._pts(np.arange(self._n + 1))
        return self._cache

    @property
    def start(self) -> float:
        return self._start

    @property
    def stop(self) -> float:
        return self._stop

    @property
    def ncells(self) -> int:
        return self._n

    @property
    def mesh(self) -> float:
        return (self._stop - self._start) / self._n

    def point(self, i: int) -> float:
        return float(self._pts(i))

    def index(self, u: float) -> int:
        self._check_inside(u)
        i = int(math.floor((u - self._start) / self.mesh))
        i = min(max(i, 0), self._n)
        while i > 0 and self.point(i) > u:
            i -= 1
        while i < self._n and self.point(i + 1) <= u:
            i += 1
        return i

    def _cell_range(self, s: float, t: float) -> tuple[int, int]:
        self._check_inside(s)
        self._check_inside(t)
        if s > t:
            raise InvalidIntervalError(f"s={s} > t={t}")
        if s == t:
            return 0, 0
        i0 = self.index(s)
        i1 = self.index(t)
        if self.point(i1) < t:
            i1 += 1
        return i0, i1

    def cells(self, s: float, t: float, chunk: int = CHUNK):
        i0, i1 = self._cell_range(s, t)
        for lo in range(i0, i1, chunk):
            hi = min(lo + chunk, i1)
            idx = np.arange(lo, hi + 1)
            edges = self._pts(idx)
            frozen = edges[:-1].copy()
            a = np.maximum(edges[:-1], s)
            b = np.minimum(edges[1:], t)
            yield frozen, b - a


def dyadic_partition(s: float, t: float, n: int) -> UniformPartition:
    """``2**n + 1`` equispaced points from ``s`` to ``t`` on any interval."""
    if not s < t:
        raise InvalidIntervalError(f"need s < t, got s={s}, t={t}")
    if n < 0:
        raise InvalidDataError("level must be >= 0")
    return UniformPartition(s, t, 2**n)


def build_dyadic_partition(s: float, t: float, n: int) -> UniformPartition:
    """Dyadic partition of ``[s, t]`` inside the unit time domain."""
    if not (0.0 <= s < t <= 1.0):
        raise InvalidIntervalError(f"need 0 <= s < t <= 1, got s={s}, t={t}")
    return dyadic_partition(s, t, n)


class GeneratorFamily(ABC):
    """Time-indexed generator ``A(t)`` with an exact frozen-time exponential.

    Subclasses declare a stability pair ``(M, omega)`` such that ordered
    products of frozen exponentials obey
    ``||exp(A(t_k) tau_k) ... exp(A(t_1) tau_1)|| <= M exp(omega * sum(tau))``.
    """

    stability: tuple[float, float] = (1.0, 0.0)
    supports_groups: bool = False

    @abstractmethod
    def exp_apply(self, t: float, tau: float, x: Any) -> Any:
        """Apply ``exp(A(t) * tau)`` to ``x``."""

    def gen_apply(self, t: float, x: Any) -> Any:
        raise UnsupportedBackendError(f"{type(self).__name__} has no generator action")

    def norm(self, x: Any) -> float:
        return float(np.linalg.norm(x))

    def distance(self, x: Any, y: Any) -> float:
        return float(np.linalg.norm(np.asarray(x) - np.asarray(y)))

    def random_state(self, rng: np.random.Generator) -> Any:
        raise UnsupportedBackendError(f"{type(self).__name__} cannot draw random states")

    def _check_duration(self, tau: float) -> None:
        if tau < 0 and not self.supports_groups:
            raise ValueError("negative durations need a group generator")


def product_approximant(F: GeneratorFamily, partition: Partition, s: float, t: float, x):
    """Piecewise-frozen evolution of ``x`` from ``s`` to ``t`` over ``partition``.

    Each cell ``[r_i, r_{i+1}]`` meeting ``[s, t]`` contributes
    ``exp(A(r_i) * length)``, composed with later cells on the left.
    Backends may provide ``chain_apply(times, durations, x)`` to process a
    whole chunk of cells at once.
    """
    chain = getattr(F, "chain_apply", None)
    for frozen, dur in partition.cells(s, t):
        if chain is not None:
            x = chain(frozen, dur, x)
        else:
            for tf, d in zip(frozen, dur):
                x = F.exp_apply(float(tf), float(d), x)
    return x


def cocycle_residual(U: Callable[[float, float, Any], Any], r: float, s: float, t: float, x,
                     distance: Callable[[Any, Any], float] | None = None) -> float:
    """``||U(t,s) U(s,r) x - U(t,r) x||`` for a propagator closure ``U(t, s, x)``."""
    if not (r <= s <= t):
        raise InvalidIntervalError(f"need r <= s <= t, got {r}, {s}, {t}")
    if distance is None:
        distance = lambda a, b: float(np.linalg.norm(np.asarray(a) - np.asarray(b)))
    return distance(U(t, s, U(s, r, x)), U(t, r, x))


@dataclass
class RefinementResult:
    state: Any
    level: int
    estimates: list[float] = field(default_factory=list)
    converged: bool = True


def refine_to_convergence(F: GeneratorFamily, s: float, t: float, x, tol: float,
                          max_level: int = 20) -> RefinementResult:
    """Double the dyadic level until successive approximants differ by ``<= tol``.

    ``estimates[n]`` is ``||U_{n+1} x - U_n x||``. On success ``level`` is the
    first such ``n`` and ``state`` is the finer iterate ``U_{n+1} x``. If
    ``max_level`` is reached first the best iterate is returned with
    ``converged=False`` and a ``RuntimeWarning``.
    """
    if not tol > 0:
        raise InvalidDataError("tol must be > 0")
    prev = product_approximant(F, dyadic_partition(s, t, 0), s, t, x)
    estimates: list[float] = []
    for n in range(max_level):
        cur = product_approximant(F, dyadic_partition(s, t, n + 1), s, t, x)
        est = F.distance(cur, prev)
        estimates.append(est)
        if est <= tol:
            return RefinementResult(cur, n, estimates, True)
        prev = cur
    warnings.warn(
        f"no convergence to tol={tol:g} by level {max_level} (last estimate "
        f"{estimates[-1] if estimates else float('nan'):.3g})",
        RuntimeWarning,
        stacklevel=2,
    )
    return RefinementResult(prev, max_level, estimates, False)


def convergence_order(errors) -> float:
    """Negated least-squares slope of ``log2(error)`` against refinement level."""
    e = np.asarray(errors, dtype=float)
    if e.ndim != 1 or e.size < 3:
        raise InvalidDataError("need at least three errors")
    if not np.all(e > 0):
        raise InvalidDataError("errors must be positive")
    levels = np.arange(e.size, dtype=float)
    slope = np.polyfit(levels, np.log2(e), 1)[0]
    return float(-slope)


def stability_probe(F: GeneratorFamily, rng: np.random.Generator, trials: int = 32,
                    max_factors: int = 64, max_tau: float = 0.5) -> float:
    """Largest observed ``||chain x|| / (M exp(omega sum tau) ||x||)`` over random chains.

    Frozen times are drawn sorted so that the chain respects time order.
    A value ``<= 1`` is consistent with the declared stability pair.
    """
    M, omega = F.stability
    worst = 0.0
    for _ in range(trials):
        k = int(rng.integers(1, max_factors + 1))
        times = np.sort(rng.uniform(0.0, 1.0, size=k))
        taus = rng.uniform(0.0, max_tau, size=k)
        x = F.random_state(rng)
        y = x
        for tf, d in zip(times, taus):
            y = F.exp_apply(float(tf), float(d), y)
        bound = M * math.exp(omega * taus.sum()) * F.norm(x)
        worst = max(worst, F.norm(y) / bound)
    return worst
