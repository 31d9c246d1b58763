import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.linalg import expm

from commevo import kernels
from commevo.nilpotent import nilpotent_exp


def _gens(coefs, n):
    m = coefs.shape[0]
    g = np.zeros((m, n, n), dtype=complex)
    for k in range(n - 1):
        g[:, k, k + 1] = coefs[:, k]
    g[:, 0, n - 1] += coefs[:, n - 1]
    return g


def _reference(gens, durs, x):
    for G, d in zip(gens, durs):
        x = expm(G * d) @ x
    return x


@pytest.mark.parametrize("n", [3, 4])
@pytest.mark.parametrize("m", [1, 2, 7, 64])
def test_superdiag_chain_matches_expm(kernel_impl, rng, n, m):
    coefs = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    durs = rng.uniform(0, 0.3, size=m)
    x = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    acc = x.copy()
    kernel_impl.superdiag_chain(coefs, durs, acc)
    assert np.allclose(acc, _reference(_gens(coefs, n), durs, x), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_nilpotent_chain_matches_series(kernel_impl, rng, n):
    m = 9
    gens = np.triu(rng.normal(size=(m, n, n)) + 1j * rng.normal(size=(m, n, n)), 1)
    durs = rng.uniform(-0.5, 0.5, size=m)
    x = rng.normal(size=(n, 3)) + 0j
    acc = x.copy()
    kernel_impl.nilpotent_chain(gens, durs, acc)
    ref = x
    for G, d in zip(gens, durs):
        ref = nilpotent_exp(G * d) @ ref
    assert np.allclose(acc, ref, rtol=1e-12, atol=1e-12)


def test_empty_chain_is_identity(kernel_impl):
    acc = np.eye(3, dtype=complex)
    kernel_impl.superdiag_chain(np.zeros((0, 3), dtype=complex), np.zeros(0), acc)
    assert np.array_equal(acc, np.eye(3))


@pytest.mark.skipif(len(kernels.available()) < 2, reason="compiled kernels not built")
@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (20, 3), elements=st.floats(-2, 2)),
       arrays(np.float64, 20, elements=st.floats(0, 0.5)))
def test_compiled_and_numpy_agree(coefs, durs):
    x = np.array([[0.3], [-1.0], [2.0]], dtype=complex)
    out = []
    for name in ("compiled", "numpy"):
        acc = x.copy()
        kernels.get(name).superdiag_chain(coefs.astype(complex), durs, acc)
        out.append(acc)
    scale = max(1.0, float(np.max(np.abs(out[1]))))
    assert np.max(np.abs(out[0] - out[1])) <= 1e-12 * scale


def test_implementation_flag():
    assert kernels.IMPLEMENTATION in kernels.available()
    with pytest.raises(KeyError):
        kernels.get("fortran")
