"""Closed-form propagator for central 1-fold commutators and its discrete form.

When ``[A(s), A(t)] = mu(s, t)`` is central the time-ordered exponential
truncates exactly:

    U(t, s) = exp(int_s^t A) * exp(1/2 int_s^t int_s^tau mu(tau, sigma))

A backend supplies ``averaged_exp(s, t, x)``, ``phase_exponent(s, t)`` (the
double integral without the 1/2) and ``apply_central(c, x)`` (action of
``exp(c Z)``, or multiplication by ``exp(c)`` for scalar commutators).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDataError, InvalidIntervalError, UnsupportedBackendError
from .evolution import (
    GeneratorFamily,
    Partition,
    convergence_order,
    dyadic_partition,
    product_approximant,
    refine_to_convergence,
)

_CLOSED_FORM_API = ("averaged_exp", "phase_exponent", "apply_central")


def _require(backend, names) -> None:
    missing = [n for n in names if not hasattr(backend, n)]
    if missing:
        raise UnsupportedBackendError(f"{type(backend).__name__} lacks {', '.join(missing)}")


def closed_form_propagator(backend, s: float, t: float, x):
    if s > t:
        raise InvalidIntervalError(f"s={s} > t={t}")
    _require(backend, _CLOSED_FORM_API)
    y = backend.averaged_exp(s, t, x)
    return backend.apply_central(0.5 * backend.phase_exponent(s, t), y)


def discrete_phase(mu, partition: Partition, s: float, t: float) -> complex:
    """``int_s^t int_s^tau mu(r_n(tau), r_n(sigma))`` summed exactly over cells.

    Off-diagonal cell pairs ``j > k`` give ``mu(s_j, s_k) h_j h_k``; a cell
    paired with itself covers half a square, ``mu(s_j, s_j) h_j**2 / 2``.
    """
    times, h = [], []
    for f, d in partition.cells(s, t):
        times.extend(f.tolist())
        h.extend(d.tolist())
    total = 0j
    for j in range(len(times)):
        total += 0.5 * mu(times[j], times[j]) * h[j] ** 2
        for k in range(j):
            total += mu(times[j], times[k]) * h[j] * h[k]
    return total


class _Scaled(GeneratorFamily):
    """The family ``r * A(t)``, used for the Zassenhaus decomposition."""

    def __init__(self, base, r: float):
        self.base = base
        self.r = r
        self.supports_groups = True

    def exp_apply(self, t, tau, x):
        return self.base.exp_apply(t, self.r * tau, x)

    def chain_apply(self, times, durations, x):
        return self.base.chain_apply(times, self.r * np.asarray(durations), x)


def zassenhaus_check(backend, partition: Partition, s: float, t: float, r: float, x) -> float:
    """Residual of ``exp(B_n r) x = U_n^r(t, s) exp(-nu r**2 / 2) x``.

    ``B_n = sum_j A(s_j) h_j`` over the cells of ``[s, t]``, ``U_n^r`` is the
    product approximant with every generator scaled by ``r`` and ``nu`` is
    :func:`discrete_phase`. Matrix backends only.
    """
    _require(backend, ("matrix", "mu", "apply_central"))
    from .nilpotent import nilpotent_exp

    B = None
    for f, d in partition.cells(s, t):
        part = np.tensordot(d, backend.matrices(f), axes=(0, 0))
        B = part if B is None else B + part
    if B is None:
        B = np.zeros_like(backend.matrix(s))
    nu = discrete_phase(backend.mu, partition, s, t)
    x = np.asarray(x, dtype=complex)
    lhs = nilpotent_exp(B * r) @ x
    chained = product_approximant(_Scaled(backend, r), partition, s, t,
                                  backend.apply_central(-0.5 * nu * r * r, x))
    return float(np.linalg.norm(lhs - chained))


@dataclass
class FormulaReport:
    """Closed form against product approximants.

    ``distances`` holds the distance at each swept dyadic level; ``refined``
    is the distance of the approximant refined until successive iterates
    differ by at most ``tol / 2``.
    """

    levels: list[int]
    distances: list[float]
    order: float | None
    tol: float
    refined: float | None
    refined_level: int | None
    passed: bool
    notes: list[str] = field(default_factory=list)

    @property
    def final_distance(self) -> float:
        return self.refined if self.refined is not None else self.distances[-1]


def formula_vs_limit(backend, s: float, t: float, x, tol: float, levels=range(0, 11),
                     fit_from: int = 3, refine: bool = True, max_level: int = 30) -> FormulaReport:
    """Compare ``closed_form_propagator`` with product approximants over dyadic levels.

    The order is fitted on levels ``>= fit_from`` whose distances are above
    round-off. With ``refine`` the approximant is also refined to ``tol`` and
    ``passed`` refers to that refined distance; otherwise to the finest swept level.
    """
    if not tol > 0:
        raise InvalidDataError("tol must be > 0")
    levels = list(levels)
    exact = closed_form_propagator(backend, s, t, x)
    dist = []
    for n in levels:
        approx = product_approximant(backend, dyadic_partition(s, t, n), s, t, x)
        dist.append(backend.distance(approx, exact))
    fit = [d for n, d in zip(levels, dist) if n >= fit_from and d > 1e-14]
    notes = []
    order = None
    if len(fit) >= 3:
        order = convergence_order(fit)
    else:
        notes.append("too few distances above round-off for an order fit")
    refined = refined_level = None
    if refine:
        if dist and dist[-1] <= 0.5 * tol:
            refined, refined_level = dist[-1], levels[-1]
        else:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                res = refine_to_convergence(backend, s, t, x, 0.5 * tol, max_level=max_level)
            notes.extend(str(w.message) for w in caught)
            refined = backend.distance(res.state, exact)
            refined_level = res.level + 1 if res.converged else res.level
    final = refined if refined is not None else dist[-1]
    return FormulaReport(levels, dist, order, tol, refined, refined_level, final <= tol, notes)
