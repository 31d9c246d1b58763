import numpy as np
import pytest

from commevo.coefficients import Poly, constant, linear, sine
from commevo.errors import InvalidDataError, ModelError, UnsupportedBackendError
from commevo.magnus import closed_form_propagator
from commevo.nilpotent import (
    NilpotentFamily,
    extract_commutators,
    heisenberg_family,
    nilpotent_exp,
    ode_oracle,
    random_heisenberg,
    random_nilpotent4,
    unit,
)

E12, E23, E13 = unit(3, 1, 2), unit(3, 2, 3), unit(3, 1, 3)


class TestNilpotentExp:
    def test_zero(self):
        assert np.array_equal(nilpotent_exp(np.zeros((3, 3))), np.eye(3))

    def test_square_zero(self):
        assert np.array_equal(nilpotent_exp(E12), np.eye(3) + E12)

    def test_hand_expansion(self):
        got = nilpotent_exp(E12 + 0.5 * E23)
        assert np.allclose(got, np.eye(3) + E12 + 0.5 * E23 + 0.25 * E13, atol=0)

    def test_rejects_lower_part(self):
        with pytest.raises(InvalidDataError):
            nilpotent_exp(E12 + E12.T)
        with pytest.raises(InvalidDataError):
            nilpotent_exp(np.eye(3))

    def test_inverse(self, rng):
        for n in (3, 4, 5):
            M = np.triu(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)), 1)
            assert np.max(np.abs(nilpotent_exp(M) @ nilpotent_exp(-M) - np.eye(n))) <= 1e-14


class TestOdeOracle:
    def test_zero_generator(self):
        F = NilpotentFamily([constant(0.0), constant(0.0)])
        assert np.allclose(ode_oracle(F, 0, 1).matrix, np.eye(3), atol=0)

    def test_heisenberg(self):
        sol = ode_oracle(heisenberg_family(), 0, 1)
        U = sol.matrix
        assert U[0, 1] == pytest.approx(1.0, abs=1e-12)
        assert U[1, 2] == pytest.approx(0.5, abs=1e-12)
        assert U[0, 2] == pytest.approx(1 / 6, abs=1e-12)
        assert sol.error_estimate <= 1e-12

    def test_autonomous(self, rng):
        A = np.triu(rng.normal(size=(4, 4)), 1)
        F = NilpotentFamily([constant(A[0, 1]), constant(A[1, 2]), constant(A[2, 3])])
        A = F.matrix(0.0)
        assert np.max(np.abs(ode_oracle(F, 0.2, 0.9).matrix - nilpotent_exp(A * 0.7))) <= 1e-12

    def test_bad_steps(self):
        with pytest.raises(InvalidDataError):
            ode_oracle(heisenberg_family(), 0, 1, steps=0)

    @pytest.mark.parametrize("seed", range(5))
    def test_against_closed_form(self, seed):
        rng = np.random.default_rng(seed)
        F = random_heisenberg(rng)
        cf = closed_form_propagator(F, 0, 1, np.eye(3, dtype=complex))
        assert np.max(np.abs(cf - ode_oracle(F, 0, 1).matrix)) <= 1e-10


class TestExtractCommutators:
    def test_heisenberg_mu(self):
        field = extract_commutators(heisenberg_family(), np.linspace(0, 1, 4))
        for s, t in [(0.0, 1.0), (0.3, 0.8), (0.9, 0.2)]:
            assert field.mu(s, t) == pytest.approx(t - s, abs=1e-15)
        assert field.mu(0.4, 0.4) == 0

    def test_mu_matches_family_formula(self, rng):
        F = random_heisenberg(rng)
        field = F.commutator_field()
        assert field.mu(0.2, 0.7) == pytest.approx(F.mu(0.2, 0.7), rel=1e-13)

    def test_nilpotent4_structure(self):
        F = NilpotentFamily([constant(1.0), linear(1.0), constant(1.0)])
        field = F.commutator_field()
        C1 = field.C(1, 0.2, 0.7)
        mask = np.zeros((4, 4), dtype=bool)
        mask[0, 2] = mask[1, 3] = True
        assert np.all(C1[~mask] == 0)
        assert abs(C1[0, 2]) > 0 and abs(C1[1, 3]) > 0
        C2 = field.C(2, 0.2, 0.7, 0.1)
        off = C2.copy()
        off[0, 3] = 0
        assert np.all(off == 0) and C2[0, 3] != 0
        assert np.allclose(field.top(0.2, 0.7, 0.1), C2)

    def test_non_central_raises(self):
        # probing a 4x4 family at depth 1 must fail the centrality test
        F = NilpotentFamily([constant(1.0), linear(1.0), constant(1.0)])
        with pytest.raises(ModelError):
            extract_commutators(_ShallowView(F), [0.0, 1.0])

    def test_mu_unsupported_for_n4(self, rng):
        with pytest.raises(UnsupportedBackendError):
            random_nilpotent4(rng).mu(0.1, 0.2)


class _ShallowView:
    """A 4x4 family that pretends its 1-fold commutators are central."""

    def __init__(self, F):
        self._F = F
        self.n = F.n
        self.order = 1
        self.Z = F.Z

    def matrix(self, t):
        return self._F.matrix(t)


def test_bad_coefficient_count():
    with pytest.raises(InvalidDataError):
        NilpotentFamily([constant(1.0)])


def test_semigroup_commutation_relation(rng):
    F = heisenberg_family(Poly([0.3, -0.7]), sine(1.0, 2.0))
    Z = F.Z
    for _ in range(20):
        ti, tj = rng.uniform(0, 1, 2)
        sig, tau = rng.uniform(-2, 2, 2)
        Ai, Aj = F.matrix(ti), F.matrix(tj)
        lhs = nilpotent_exp(Ai * sig) @ nilpotent_exp(Aj * tau)
        rhs = nilpotent_exp(Aj * tau) @ nilpotent_exp(Ai * sig) @ nilpotent_exp(F.mu(ti, tj) * sig * tau * Z)
        assert np.max(np.abs(lhs - rhs)) <= 1e-13


def test_central_element_commutes(rng):
    F = random_nilpotent4(rng)
    for t in np.linspace(0, 1, 5):
        A = F.matrix(t)
        assert np.max(np.abs(A @ F.Z - F.Z @ A)) == 0


def test_matrices_strictly_upper(rng):
    F = random_nilpotent4(rng)
    for A in F.matrices(np.linspace(0, 1, 9)):
        assert np.all(np.tril(A) == 0)
        assert np.allclose(np.linalg.matrix_power(A, 4), 0)
