"""Composite Gauss-Legendre rules on intervals and on the triangle s <= sigma <= tau <= t."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

DEFAULT_LEVEL = 3  # 2**3 = 8 panels
DEFAULT_NODES = 4


@lru_cache(maxsize=32)
def _leggauss(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_rule(a: float, b: float, panels: int, nodes: int = DEFAULT_NODES):
    """Nodes and weights of the composite Gauss-Legendre rule on ``[a, b]``.

    Returns two flat arrays of length ``panels * nodes``. A degenerate
    interval yields zero weights.
    """
    if panels < 1:
        raise ValueError("panels must be >= 1")
    x, w = _leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def integrate(f, a: float, b: float, level: int = DEFAULT_LEVEL, nodes: int = DEFAULT_NODES):
    """Integrate a vectorized ``f`` over ``[a, b]``.

    ``f`` receives a 1-D array of nodes and may return shape ``(k,)`` or
    ``(k, m)``; the result has the trailing shape.
    """
    pts, wts = composite_rule(a, b, 2**level, nodes)
    vals = np.asarray(f(pts))
    return np.tensordot(wts, vals, axes=(0, 0))


def triangle_rule(s: float, t: float, level: int = DEFAULT_LEVEL, nodes: int = DEFAULT_NODES):
    """Iterated rule for ``int_s^t int_s^tau g(tau, sigma) dsigma dtau``.

    The outer variable uses ``2**level`` panels on ``[s, t]``; for each outer
    node the inner interval ``[s, tau]`` gets the same panel count. Returns
    flat arrays ``(tau, sigma, weight)``.
    """
    if s > t:
        raise ValueError(f"invalid interval: s={s} > t={t}")
    panels = 2**level
    tau, wt = composite_rule(s, t, panels, nodes)
    # unit inner rule on [0, 1], rescaled per outer node
    u_pts, u_wts = composite_rule(0.0, 1.0, panels, nodes)
    span = tau - s
    sigma = s + span[:, None] * u_pts[None, :]
    weight = wt[:, None] * span[:, None] * u_wts[None, :]
    tau_full = np.broadcast_to(tau[:, None], sigma.shape)
    return tau_full.ravel(), sigma.ravel(), weight.ravel()
