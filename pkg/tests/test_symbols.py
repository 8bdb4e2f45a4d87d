import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elastosheet import FixedSoundSpeed, FrozenCoefficients, Frequency, PlanarBackground, frozen_from_background
from elastosheet.errors import InconsistentTraceError, PoleProximity
from elastosheet.oracles import random_frequency, random_frozen_state
from elastosheet.symbols import (boundary_symbol_beta, eigvec_E, front_symbol_b, interior_symbol_A, k1, k2,
                                 mu_m, omega, omega_sq_kernel, symbol_bundle)


def planar(vbar=0.0, F1=(0, 0, 0), F2=(0, 0, 0), rho=1.0, c=1.0):
    return frozen_from_background(PlanarBackground(rho, vbar, F1, F2, FixedSoundSpeed(c)))


UNIT = Frequency(1, 0, 0, 0)


class TestK1K2:
    def test_real_tau(self):
        l, r = planar(0.7)
        assert k1(UNIT, r) == 1

    def test_substitution(self):
        st_ = FrozenCoefficients("r", 1, 0.3, 0, np.zeros((3, 3)), 0, 0, 1)
        assert k1(Frequency(0.1, 0.2, 0.5, 0), st_) == pytest.approx(0.1 + 0.35j)

    def test_left_side(self):
        l, _ = planar(0.3)
        assert k1(Frequency(0, 1, 1, 0), l) == pytest.approx(0.7j)

    def test_k2(self):
        _, r = planar(F1=(1, 0, 0), F2=(0, 1, 0))
        assert k2(Frequency(0, 0, 0.6, 0.8), r) == pytest.approx(1.0)
        assert k2(Frequency(1, 0, 0, 0), r) == 0

    def test_k2_null_direction(self):
        lam = 2.0
        _, r = planar(F1=(1, 2, 3), F2=(lam, 2 * lam, 3 * lam))
        assert k2(Frequency(0, 0, -lam, 1), r) == pytest.approx(0, abs=1e-12)


class TestMuM:
    def test_decoupled(self):
        l, r = planar()
        assert mu_m(UNIT, r) == (-1, 0)
        assert mu_m(UNIT, l) == (1, 0)

    def test_derived(self):
        _, r = planar(F1=(1, 0, 0), F2=(0, 1, 0))
        mu, m = mu_m(Frequency(2, 0, 1, 0), r)
        assert mu == pytest.approx(-2.45, abs=1e-14)
        assert m == pytest.approx(-0.05, abs=1e-14)

    def test_pole_guard(self):
        _, r = planar(0.5)
        with pytest.raises(PoleProximity) as exc:
            mu_m(Frequency(0, -0.5, 1, 0), r)
        assert exc.value.factor < exc.value.threshold


class TestOmega:
    def test_decoupled(self):
        l, r = planar()
        assert omega(UNIT, r) == -1
        assert omega(UNIT, l) == -1

    def test_hyperbolic_boundary_branch(self):
        # branch fixed by continuity from gamma > 0; frozen value
        _, r = planar()
        w = omega(Frequency(0, 5, 1, 0), r)
        assert w == pytest.approx(-1j * math.sqrt(24), abs=1e-14)
        w_eps = omega(Frequency(1e-6, 5, 1, 0), r)
        assert abs(w - w_eps) < 1e-5

    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_identity_and_branch(self, seed):
        rng = np.random.default_rng(seed)
        s = random_frozen_state(rng, "r" if seed % 2 else "l")
        f = random_frequency(rng, gamma_min=1e-8)
        try:
            b = symbol_bundle(f, s)
        except PoleProximity:
            return
        assert b.omega.real < 0
        w2 = omega(f, s) ** 2
        assert abs(w2 - (b.mu ** 2 - b.m ** 2)) <= 1e-12 * max(abs(b.omega) ** 2, 1.0)

    @given(st.integers(0, 2 ** 32 - 1), st.sampled_from([0.5, 2.0, 10.0]))
    def test_homogeneity(self, seed, s):
        rng = np.random.default_rng(seed)
        st_ = random_frozen_state(rng)
        f = random_frequency(rng)
        try:
            w = omega(f, st_)
        except PoleProximity:
            return
        assert omega(f.scaled(s), st_) == pytest.approx(s * w, rel=1e-12)
        assert k1(f.scaled(s), st_) == pytest.approx(s * k1(f, st_), rel=1e-14)
        assert k2(f.scaled(s), st_) == pytest.approx(s * s * k2(f, st_), rel=1e-14, abs=1e-300)

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
    def test_side_squared_symmetry(self, delta, eta, eta_t):
        # on gamma = 0 the left value at (delta, eta, eta_t) is the right value at (delta, -eta, -eta_t)
        l, r = planar(0.3, (1, 0.2, 0), (0.1, 1, 0))
        wl = omega_sq_kernel(1j * delta, eta, eta_t, l)
        wr = omega_sq_kernel(1j * delta, -eta, -eta_t, r)
        assert wl == pytest.approx(wr, rel=1e-13, abs=1e-13)

    def test_literal_reflection_is_not_a_symmetry(self):
        # reflecting (delta, eta) maps each side to itself, so it cannot exchange the sides
        l, r = planar(0.3, (1, 0.2, 0), (0.1, 1, 0))
        wl = omega_sq_kernel(1j * 1.0, 1.0, 0.0, l)
        wr = omega_sq_kernel(-1j * 1.0, -1.0, 0.0, r)
        assert abs(wl - wr) > 0.1


class TestEigenvector:
    def test_right_decoupled(self):
        _, r = planar()
        E, fb = eigvec_E(UNIT, r)
        np.testing.assert_allclose(E, [2, 0])
        assert not fb

    def test_left_fallback(self):
        l, _ = planar()
        E, fb = eigvec_E(UNIT, l)
        np.testing.assert_allclose(E, [0, -2])
        assert fb

    def test_left_side_preference(self):
        l, _ = planar()
        E, fb = eigvec_E(UNIT, l, prefer="side")
        np.testing.assert_allclose(E, [0, -2])
        assert not fb

    def test_generic_residual(self):
        _, r = planar(F1=(1, 0, 0), F2=(0, 1, 0))
        f = Frequency(2, 0, 1, 0)
        A = interior_symbol_A(f, r)
        b = symbol_bundle(f, r)
        assert np.linalg.norm(A @ b.E - (b.omega + b.eig_shift) * b.E) <= 1e-10 * np.linalg.norm(b.E)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["primary", "side"]))
    def test_residual_random(self, seed, prefer):
        rng = np.random.default_rng(seed)
        s = random_frozen_state(rng, "r" if seed % 2 else "l")
        f = random_frequency(rng)
        try:
            A = interior_symbol_A(f, s)
            b = symbol_bundle(f, s, prefer=prefer)
        except PoleProximity:
            return
        lam = b.omega + b.eig_shift
        assert np.linalg.norm(A @ b.E - lam * b.E) <= 1e-10 * np.linalg.norm(b.E)
        np.testing.assert_allclose(np.linalg.norm(b.E_unit), 1.0)


class TestInteriorSymbol:
    def test_decoupled(self):
        _, r = planar()
        np.testing.assert_allclose(interior_symbol_A(UNIT, r), [[-1, 0], [0, 1]])

    def test_derived(self):
        _, r = planar(F1=(1, 0, 0), F2=(0, 1, 0))
        np.testing.assert_allclose(interior_symbol_A(Frequency(2, 0, 1, 0), r),
                                   [[-2.45, 0.05], [-0.05, 2.45]], atol=1e-14)

    @given(st.integers(0, 2 ** 32 - 1))
    def test_trace(self, seed):
        rng = np.random.default_rng(seed)
        s = random_frozen_state(rng)
        f = random_frequency(rng)
        try:
            A = interior_symbol_A(f, s)
        except PoleProximity:
            return
        b = symbol_bundle(f, s)
        assert np.trace(A) == pytest.approx(2 * b.eig_shift, abs=1e-12 * f.Lambda)


class TestBeta:
    def test_unit(self):
        l, r = planar()
        np.testing.assert_allclose(boundary_symbol_beta(UNIT, l, r), [[1, 1, -1, -1], [-1, 1, 1, -1]])

    def test_row1_frequency_independent(self):
        l, r = planar(0.3)
        b1 = boundary_symbol_beta(UNIT, l, r)
        b2 = boundary_symbol_beta(Frequency(0.2, 3, -1, 2), l, r)
        np.testing.assert_array_equal(b1[0], b2[0])

    @pytest.mark.parametrize("s", [0.5, 2.0, 10.0])
    def test_row_degrees(self, s):
        # row 1 is degree 0 and row 2 degree 1, so the matrix as a whole is not degree 0
        l, r = planar(0.3)
        f = Frequency(0.3, 0.4, 0.7, -0.2)
        a, b = boundary_symbol_beta(f, l, r), boundary_symbol_beta(f.scaled(s), l, r)
        np.testing.assert_allclose(b[0], a[0], rtol=1e-14)
        np.testing.assert_allclose(b[1], s * a[1], rtol=1e-13)

    def test_derived_row2(self):
        l, r = planar(0.3)
        b = boundary_symbol_beta(Frequency(0, 1, 1, 0), l, r)
        np.testing.assert_allclose(b[1], [-0.7j, 0.7j, 1.3j, -1.3j], atol=1e-15)

    def test_inconsistent_slopes(self):
        r = FrozenCoefficients("r", 1, 0, 0, np.zeros((3, 3)), 0.1, 0, 1)
        l = FrozenCoefficients("l", 1, 0, 0, np.zeros((3, 3)), 0.0, 0, -1)
        with pytest.raises(InconsistentTraceError):
            boundary_symbol_beta(UNIT, l, r)


class TestFrontSymbol:
    def test_only_tau(self):
        l, r = planar(0.3, (1, 0, 0), (0, 1, 0))
        b, ratio = front_symbol_b(UNIT, l, r)
        np.testing.assert_allclose(b, [0, 1, 0, 0, 0, 0, 0, 0, 0])
        assert ratio == 1

    def test_parallel_rows_degenerate(self):
        l, r = planar(0.7, (1, 0, 0), (0, 0, 0))
        b, ratio = front_symbol_b(Frequency(0, 0, 0, 1), l, r)
        np.testing.assert_array_equal(b, 0)
        assert ratio == 0
