import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elastosheet import FixedSoundSpeed, FrozenCoefficients, Frequency, GammaLaw, frozen_from_background
from elastosheet.core_state import PlanarBackground
from elastosheet.errors import DegenerateLiftError, DomainError, PoleProximity
from elastosheet.oracles import random_frequency, random_frozen_state
from elastosheet.reduction13 import (assemble_A, assemble_A0, assemble_A3_tilde, assemble_T, reduced_ode_oracle,
                                     state_vector, verify_diagonalization)
from elastosheet.symbols import interior_symbol_A, symbol_bundle

LAW = FixedSoundSpeed(1.0)


def general_state(defect=0.0, phi=(0.4, -0.2, 1.1)):
    F = np.array([[1.0, 0.3, -0.2], [0.1, 0.9, 0.4], [0, 0, 0]])
    p1, p2, p3 = phi
    F[2] = F[0] * p1 + F[1] * p2 + defect
    return FrozenCoefficients("r", 1.3, 0.2, -0.1, F, p1, p2, p3, FixedSoundSpeed(0.8), v3=0.05)


class TestAssembleA:
    def test_printed_entries(self):
        u = np.arange(13, dtype=float) + 1.0
        law = GammaLaw(1.0, 2.0)
        A1 = assemble_A(1, u, law)
        rho = u[0]
        assert A1[0, 1] == rho
        assert A1[1, 0] == pytest.approx(2.0 * rho / rho)
        assert A1[1, 4] == -u[4]  # -F11
        A3 = assemble_A(3, u, law)
        assert A3[0, 3] == rho
        assert A3[3, 0] == pytest.approx(2.0)

    def test_symmetric_couplings(self):
        u = np.random.default_rng(0).normal(size=13)
        u[0] = 1.5
        for j in (1, 2, 3):
            A = assemble_A(j, u, LAW)
            B = A.copy()
            B[0, j] = B[j, 0] = 0
            np.testing.assert_array_equal(B, B.T)

    def test_vanishing_advection(self):
        u = np.zeros(13)
        u[0] = 2.0
        A = assemble_A(2, u, LAW)
        expected = np.zeros((13, 13))
        expected[0, 2] = 2.0
        expected[2, 0] = 0.5
        np.testing.assert_array_equal(A, expected)

    def test_bad_density(self):
        with pytest.raises(DomainError):
            assemble_A(1, np.zeros(13), LAW)


class TestLiftAndT:
    def test_identity_lift(self):
        bg = PlanarBackground(1.0, 0.3, [1, 0, 0], [0, 1, 0])
        _, r = frozen_from_background(bg)
        u = state_vector(r)
        np.testing.assert_array_equal(assemble_A3_tilde(u, r, LAW), assemble_A(3, u, LAW))

    def test_rank_two(self, rng):
        for _ in range(20):
            s = random_frozen_state(rng)
            At = assemble_A3_tilde(state_vector(s), s, s.law)
            assert np.linalg.matrix_rank(At, tol=1e-10) == 2

    def test_spectral_form(self):
        s = general_state()
        u = state_vector(s)
        T = assemble_T(u, s, s.law)
        lam = s.c * s.tan_norm / s.phi3
        D = np.zeros(13)
        D[2], D[3] = lam, -lam
        np.testing.assert_allclose(assemble_A3_tilde(u, s, s.law), T @ np.diag(D) @ np.linalg.inv(T), atol=1e-12)

    def test_planar_T_block(self):
        bg = PlanarBackground(2.0, 0.3, [1, 0, 0], [0, 1, 0], FixedSoundSpeed(3.0))
        _, r = frozen_from_background(bg)
        T = assemble_T(state_vector(r), r, r.law)
        np.testing.assert_allclose(T[:4, :4], [[0, 0, 1, 1], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1.5, -1.5]])

    def test_A0(self):
        s = general_state()
        d = np.diag(assemble_A0(s, s.law))
        x = s.phi3 / (s.c * s.tan_norm)
        np.testing.assert_allclose(d, [1, 1, x, -x] + [1] * 9)

    def test_T_invertible(self, rng):
        for _ in range(100):
            s = random_frozen_state(rng)
            assert abs(np.linalg.det(assemble_T(state_vector(s), s, s.law))) > 1e-8

    def test_degenerate_lift(self):
        s = FrozenCoefficients("r", 1, 0, 0, np.zeros((3, 3)), 0, 0, 1e-14)
        with pytest.raises(DegenerateLiftError):
            assemble_A3_tilde(state_vector(s), s, LAW)


class TestDiagonalization:
    def test_planar(self):
        _, r = frozen_from_background(PlanarBackground(1.0, 0.3, [1, 0, 0], [0, 1, 0]))
        res, ok = verify_diagonalization(state_vector(r), r, LAW, 1e-10)
        assert ok and res < 1e-10

    def test_tilted(self):
        s = general_state()
        res, ok = verify_diagonalization(state_vector(s), s, s.law)
        assert ok and res < 1e-9

    def test_involution_violation(self):
        s = general_state(defect=0.5)
        res, ok = verify_diagonalization(state_vector(s), s, s.law)
        assert not ok and res > 0.1


class TestSchurOracle:
    def test_decoupled(self):
        _, r = frozen_from_background(PlanarBackground(1.0, 0.0, [0, 0, 0], [0, 0, 0]))
        np.testing.assert_allclose(reduced_ode_oracle(Frequency(1, 0, 0, 0), r), [[-1, 0], [0, 1]], atol=1e-14)

    def test_derived(self):
        _, r = frozen_from_background(PlanarBackground(1.0, 0.0, [1, 0, 0], [0, 1, 0]))
        np.testing.assert_allclose(reduced_ode_oracle(Frequency(2, 0, 1, 0), r),
                                   [[-2.45, 0.05], [-0.05, 2.45]], atol=1e-8)

    def test_pole(self):
        _, r = frozen_from_background(PlanarBackground(1.0, 0.5, [0, 0, 0], [0, 0, 0]))
        with pytest.raises(PoleProximity):
            reduced_ode_oracle(Frequency(0, -0.5, 1, 0), r)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_matches_closed_form(self, seed):
        rng = np.random.default_rng(seed)
        s = random_frozen_state(rng, "r" if seed % 2 else "l")
        f = random_frequency(rng)
        try:
            A = interior_symbol_A(f, s)
        except PoleProximity:
            return
        S = reduced_ode_oracle(f, s)
        assert np.max(np.abs(S - A)) <= 1e-8 * f.Lambda
        b = symbol_bundle(f, s)
        ev = np.linalg.eigvals(S)
        assert ev.sum() == pytest.approx(2 * b.eig_shift, abs=1e-8 * f.Lambda)
        assert np.prod(ev) == pytest.approx(b.eig_shift ** 2 - b.omega ** 2, abs=1e-8 * f.Lambda ** 2)
