"""Per-side frequency symbols and the interface symbols beta and b.

All kernels accept numpy arrays for ``tau``, ``eta`` and ``eta_t`` so the
scanners can evaluate whole grids at once.  The scalar wrappers taking a
:class:`Frequency` are thin layers on top that add the pole guard.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_state import FrozenCoefficients, Frequency
from .errors import InconsistentTraceError, PoleProximity

POLE_GUARD = 1e-10
BRANCH_EPS = 1e-9
TOL_DEG = 1e-8
OMEGA_IDENTITY_TOL = 1e-12


def _k1(tau, eta, eta_t, st: FrozenCoefficients):
    return tau + 1j * eta * st.v1 + 1j * eta_t * st.v2


def _k2(eta, eta_t, st: FrozenCoefficients):
    F = st.F
    out = 0.0
    for j in range(3):
        out = out + (eta * F[0, j] + eta_t * F[1, j]) ** 2
    return out


def _D(eta, eta_t, st: FrozenCoefficients):
    return (eta * st.phi2 - eta_t * st.phi1) ** 2 + eta ** 2 + eta_t ** 2


def omega_sq_kernel(tau, eta, eta_t, st: FrozenCoefficients):
    """The factored display of omega squared, independent of mu and m."""
    c, L, p3 = st.c, st.tan_norm, st.phi3
    k1 = _k1(tau, eta, eta_t, st)
    k2 = _k2(eta, eta_t, st)
    return (p3 * p3 / (c * c * L ** 4)) * (L * L * (k1 * k1 + k2) + c * c * _D(eta, eta_t, st))


def _decaying_root(w2, ref_w2=None):
    """Square root with Re < 0; ties on the imaginary axis broken by ``ref_w2``."""
    om = np.sqrt(np.asarray(w2, dtype=complex))
    om = np.where(om.real > 0, -om, om)
    if ref_w2 is not None:
        ref = np.sqrt(np.asarray(ref_w2, dtype=complex))
        ref = np.where(ref.real > 0, -ref, ref)
        flip = np.abs(-om - ref) < np.abs(om - ref)
        om = np.where(flip, -om, om)
    return om


def side_kernel(tau, eta, eta_t, st: FrozenCoefficients):
    """Vectorized symbols of one side.

    Returns a dict with ``k1, k2, mu, m, omega, alpha, shift, E, E_alt,
    pole_factor`` where ``E`` and ``E_alt`` carry the vector index in the
    leading axis.  Pole points produce inf/nan here; the caller masks them
    using ``pole_factor``.
    """
    tau = np.asarray(tau, dtype=complex)
    eta = np.asarray(eta, dtype=float)
    eta_t = np.asarray(eta_t, dtype=float)
    c, L, p1, p2, p3 = st.c, st.tan_norm, st.phi1, st.phi2, st.phi3
    k1 = _k1(tau, eta, eta_t, st)
    k2 = _k2(eta, eta_t, st)
    D = _D(eta, eta_t, st)
    q = k1 * k1 + k2
    with np.errstate(divide="ignore", invalid="ignore"):
        t_a = p3 * k2 / (2 * L * c * k1)
        t_b = p3 * c * k1 * D / (2 * L ** 3 * q)
        mu = -p3 * k1 / (c * L) - t_a - t_b
        m = -t_a + t_b

    gamma = tau.real
    lam = np.sqrt(gamma ** 2 + tau.imag ** 2 + eta ** 2 + eta_t ** 2)
    w2 = omega_sq_kernel(tau, eta, eta_t, st)
    on_axis = gamma == 0
    if np.any(on_axis):
        w2_ref = omega_sq_kernel(tau + BRANCH_EPS * lam, eta, eta_t, st)
        omega = np.where(on_axis, _decaying_root(w2, w2_ref), _decaying_root(w2))
    else:
        omega = _decaying_root(w2)

    alpha = k1 * q
    shift = 1j * (eta * p1 * p3 + eta_t * p2 * p3) / (L * L)
    with np.errstate(invalid="ignore"):
        E = np.stack([-alpha * (mu + omega), -alpha * m])
        E_alt = np.stack([-alpha * m, -alpha * (mu - omega)])
    return dict(k1=k1, k2=k2, mu=mu, m=m, omega=omega, omega_sq=w2, alpha=alpha,
                shift=shift, E=E, E_alt=E_alt, pole_factor=np.abs(k1) * np.abs(q), Lambda=lam)


def _freq_parts(freq: Frequency):
    return freq.tau, freq.eta, freq.eta_t


def _guard(freq: Frequency, st: FrozenCoefficients):
    tau, eta, eta_t = _freq_parts(freq)
    k1 = complex(_k1(tau, eta, eta_t, st))
    factor = abs(k1) * abs(k1 * k1 + _k2(eta, eta_t, st))
    thr = POLE_GUARD * freq.Lambda ** 3
    if factor < thr:
        raise PoleProximity(f"frequency is at a pole on side {st.side}: |k1||k1^2+k2| = {factor:.3e}",
                            factor=factor, threshold=thr)


def k1(freq: Frequency, coeffs: FrozenCoefficients) -> complex:
    return complex(_k1(freq.tau, freq.eta, freq.eta_t, coeffs))


def k2(freq: Frequency, coeffs: FrozenCoefficients) -> float:
    return float(_k2(freq.eta, freq.eta_t, coeffs))


def E_unit(coeffs: FrozenCoefficients) -> float:
    """Tangential norm <d_tan Phi>, shared with the boundary symbol."""
    return coeffs.tan_norm


def mu_m(freq: Frequency, coeffs: FrozenCoefficients):
    _guard(freq, coeffs)
    out = side_kernel(*_freq_parts(freq), coeffs)
    return complex(out["mu"]), complex(out["m"])


def omega(freq: Frequency, coeffs: FrozenCoefficients, check: bool = True) -> complex:
    _guard(freq, coeffs)
    out = side_kernel(*_freq_parts(freq), coeffs)
    om = complex(out["omega"])
    if check:
        w2 = complex(out["omega_sq"])
        alt = complex(out["mu"]) ** 2 - complex(out["m"]) ** 2
        if abs(w2 - alt) > OMEGA_IDENTITY_TOL * max(abs(w2), 1.0):
            raise ArithmeticError(f"omega^2 identity failed: {w2} vs {alt}")
    return om


def eigvec_E(freq: Frequency, coeffs: FrozenCoefficients, prefer: str = "primary",
             tol_deg: float = TOL_DEG):
    """Eigenvector of the interior symbol for the decaying eigenvalue.

    Two adjugate columns are available, ``(-a(mu+w), -a m)`` ("primary")
    and ``(-a m, -a(mu-w))`` ("alternate").  ``prefer="primary"`` tries the
    first and falls back to the second when it collapses.  ``prefer="side"``
    starts from the column that stays nonzero on the decaying branch of the
    given side: primary on r, alternate on l.  Returns ``(E, used_fallback)``.
    """
    _guard(freq, coeffs)
    out = side_kernel(*_freq_parts(freq), coeffs)
    return _pick_column(out, coeffs.side, prefer, tol_deg)


def _pick_column(out, side, prefer, tol_deg):
    first, second = out["E"], out["E_alt"]
    if prefer == "side" and side == "l":
        first, second = second, first
    elif prefer not in ("primary", "side"):
        raise ValueError(f"unknown eigenvector preference {prefer!r}")
    scale = abs(complex(out["alpha"])) * (abs(complex(out["mu"])) + abs(complex(out["omega"]))
                                          + abs(complex(out["m"])) + 1.0)
    thr = tol_deg * scale
    E = np.asarray(first, dtype=complex)
    if np.linalg.norm(E) >= thr and np.linalg.norm(E) > 0:
        return E, False
    E = np.asarray(second, dtype=complex)
    if np.linalg.norm(E) >= thr and np.linalg.norm(E) > 0:
        return E, True
    raise PoleProximity("both eigenvector columns vanish", factor=float(np.linalg.norm(E)), threshold=thr)


def interior_symbol_A(freq: Frequency, coeffs: FrozenCoefficients) -> np.ndarray:
    _guard(freq, coeffs)
    out = side_kernel(*_freq_parts(freq), coeffs)
    mu, m, sh = complex(out["mu"]), complex(out["m"]), complex(out["shift"])
    return np.array([[mu + sh, -m], [m, -mu + sh]], dtype=complex)


@dataclass(frozen=True)
class SymbolBundle:
    k1: complex
    k2: float
    mu: complex
    m: complex
    omega: complex
    alpha: complex
    eig_shift: complex
    degenerate: bool
    E: np.ndarray
    used_fallback: bool

    @property
    def E_unit(self) -> np.ndarray:
        return self.E / np.linalg.norm(self.E)


def symbol_bundle(freq: Frequency, coeffs: FrozenCoefficients, prefer: str = "primary") -> SymbolBundle:
    _guard(freq, coeffs)
    out = side_kernel(*_freq_parts(freq), coeffs)
    E, fb = _pick_column(out, coeffs.side, prefer, TOL_DEG)
    return SymbolBundle(k1=complex(out["k1"]), k2=float(out["k2"]), mu=complex(out["mu"]),
                        m=complex(out["m"]), omega=complex(out["omega"]), alpha=complex(out["alpha"]),
                        eig_shift=complex(out["shift"]), degenerate=fb, E=E, used_fallback=fb)


def boundary_slope(left: FrozenCoefficients, right: FrozenCoefficients) -> float:
    if abs(left.phi1 - right.phi1) > 1e-12 or abs(left.phi2 - right.phi2) > 1e-12:
        raise InconsistentTraceError("the two sides disagree on the tangential slopes of the front")
    return right.tan_norm


def beta_kernel(k1_l, k1_r, left: FrozenCoefficients, right: FrozenCoefficients):
    """Boundary symbol with a leading (2, 4) shape followed by the grid shape."""
    k = boundary_slope(left, right)
    k1_l = np.asarray(k1_l, dtype=complex)
    ones = np.ones_like(k1_l)
    a = (right.c / right.rho) * k * k * k1_l
    b = (left.c / left.rho) * k * k * np.asarray(k1_r, dtype=complex)
    return np.array([[k * ones, k * ones, -k * ones, -k * ones], [-a, a, b, -b]])


def boundary_symbol_beta(freq: Frequency, left: FrozenCoefficients, right: FrozenCoefficients) -> np.ndarray:
    return beta_kernel(k1(freq, left), k1(freq, right), left, right).astype(complex)


def front_kernel(tau, eta, eta_t, left: FrozenCoefficients, right: FrozenCoefficients):
    """Components of the front symbol; the component index is the leading axis."""
    tau = np.asarray(tau, dtype=complex)
    eta = np.asarray(eta, dtype=float)
    eta_t = np.asarray(eta_t, dtype=float)
    Fr, Fl = right.F, left.F
    comps = [1j * (right.v1 - left.v1) * eta + 1j * (right.v2 - left.v2) * eta_t,
             _k1(tau, eta, eta_t, right),
             np.zeros_like(tau)]
    for j in range(3):
        comps.append(1j * eta * (Fr[0, j] - Fl[0, j]) + 1j * eta_t * (Fr[1, j] - Fl[1, j]))
        comps.append(1j * eta * Fr[0, j] + 1j * eta_t * Fr[1, j])
    return np.array(np.broadcast_arrays(*comps))


def front_symbol_b(freq: Frequency, left: FrozenCoefficients, right: FrozenCoefficients):
    b = front_kernel(freq.tau, freq.eta, freq.eta_t, left, right).astype(complex)
    ratio = float(np.sum(np.abs(b) ** 2)) / freq.Lambda ** 2
    return b, ratio


def front_ratio_grid(tau, eta, eta_t, left, right):
    b = front_kernel(tau, eta, eta_t, left, right)
    lam2 = np.abs(tau) ** 2 + eta ** 2 + eta_t ** 2
    return np.sum(np.abs(b) ** 2, axis=0) / lam2


def branch_sign_probe(freq: Frequency, coeffs: FrozenCoefficients) -> complex:
    """omega evaluated at gamma = BRANCH_EPS * Lambda, used to document the branch choice."""
    lam = freq.Lambda
    shifted = Frequency(freq.gamma + BRANCH_EPS * lam, freq.delta, freq.eta, freq.eta_t)
    return omega(shifted, coeffs, check=False)


__all__ = [
    "SymbolBundle", "k1", "k2", "mu_m", "omega", "eigvec_E", "interior_symbol_A",
    "boundary_symbol_beta", "front_symbol_b", "symbol_bundle", "side_kernel", "beta_kernel",
    "front_kernel", "front_ratio_grid", "omega_sq_kernel", "E_unit", "boundary_slope",
    "POLE_GUARD", "BRANCH_EPS", "TOL_DEG",
]
