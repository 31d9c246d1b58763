"""Numpy fallback for the compiled kernels; same signatures and results."""
import numpy as np


def _batched_nilpotent_exp(mats: np.ndarray) -> np.ndarray:
    n = mats.shape[-1]
    out = np.broadcast_to(np.eye(n, dtype=complex), mats.shape).copy()
    power = mats
    fact = 1.0
    for p in range(1, n):
        fact *= p
        out += power / fact
        power = power @ mats
    return out


def nilpotent_chain(gens, durations, acc):
    """Replace ``acc`` by ``exp(G[m-1] d[m-1]) ... exp(G[0] d[0]) @ acc`` in place."""
    gens = np.asarray(gens, dtype=complex)
    durations = np.asarray(durations, dtype=float)
    if gens.shape[0] == 0:
        return acc
    factors = _batched_nilpotent_exp(gens * durations[:, None, None])
    # pairwise tree reduction; later factors multiply from the left
    while factors.shape[0] > 1:
        half = factors.shape[0] // 2
        paired = factors[1:2 * half:2] @ factors[0:2 * half:2]
        if factors.shape[0] % 2:
            paired = np.concatenate([paired, factors[-1:]])
        factors = paired
    acc[...] = factors[0] @ acc
    return acc


def superdiag_chain(coefs, durations, acc):
    """Dense-matrix route for super-diagonal plus corner generators."""
    coefs = np.asarray(coefs, dtype=complex)
    m, n = coefs.shape
    gens = np.zeros((m, n, n), dtype=complex)
    idx = np.arange(n - 1)
    gens[:, idx, idx + 1] = coefs[:, : n - 1]
    gens[:, 0, n - 1] += coefs[:, n - 1]
    return nilpotent_chain(gens, durations, acc)
