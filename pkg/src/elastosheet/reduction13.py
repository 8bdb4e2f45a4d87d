"""Full 13x13 coefficient matrices, the boundary transformation and the Schur oracle.

State ordering is ``(rho, v1, v2, v3, F11, F21, F31, F12, F22, F32, F13, F23, F33)``,
so ``F[i, k]`` (0-based) lives at index ``4 + 3*k + i``.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .core_state import FrozenCoefficients, PressureLaw, Frequency, sound_speed
from .errors import DegenerateLiftError, DegenerateTransformationError, DomainError, PoleProximity
from .symbols import _guard

ALG = [0, 1] + list(range(4, 13))
CHAR = [2, 3]
KAPPA_FLOOR = 1e-12
COND_LIMIT = 1e12


def state_vector(coeffs: FrozenCoefficients) -> np.ndarray:
    u = np.zeros(13)
    u[0] = coeffs.rho
    u[1:4] = coeffs.v1, coeffs.v2, coeffs.v3
    u[4:] = coeffs.F.T.reshape(-1)
    return u


def _unpack(u):
    u = np.asarray(u, dtype=float)
    if u.shape != (13,):
        raise DomainError(f"state vector must have 13 components, got shape {u.shape}")
    if not u[0] > 0:
        raise DomainError(f"density must be positive, got {u[0]}")
    return u[0], u[1:4], u[4:].reshape(3, 3).T


def assemble_A(j: int, u, law: PressureLaw) -> np.ndarray:
    """Coefficient matrix A_j for axis ``j`` in {1, 2, 3}."""
    if j not in (1, 2, 3):
        raise DomainError(f"axis index must be 1, 2 or 3, got {j}")
    rho, v, F = _unpack(u)
    jj = j - 1
    A = np.eye(13) * v[jj]
    A[0, 1 + jj] = rho
    A[1 + jj, 0] = sound_speed(law, rho) ** 2 / rho
    for i in range(3):
        for k in range(3):
            idx = 4 + 3 * k + i
            A[1 + i, idx] = -F[jj, k]
            A[idx, 1 + i] = -F[jj, k]
    return A


def _phi(coeffs: FrozenCoefficients):
    if abs(coeffs.phi3) < KAPPA_FLOOR:
        raise DegenerateLiftError(f"|d3 Phi| = {abs(coeffs.phi3):.3e} is below the lift floor")
    return coeffs.phi1, coeffs.phi2, coeffs.phi3


def assemble_A3_tilde(u, coeffs: FrozenCoefficients, law: PressureLaw) -> np.ndarray:
    """Lifted normal matrix with d_t Phi eliminated through the eikonal relation."""
    p1, p2, p3 = _phi(coeffs)
    _, v, _ = _unpack(u)
    dt_phi = v[2] - v[0] * p1 - v[1] * p2
    return (assemble_A(3, u, law) - dt_phi * np.eye(13)
            - p1 * assemble_A(1, u, law) - p2 * assemble_A(2, u, law)) / p3


def assemble_T(u, coeffs: FrozenCoefficients, law: PressureLaw) -> np.ndarray:
    p1, p2, _ = _phi(coeffs)
    rho = _unpack(u)[0]
    c = sound_speed(law, rho)
    L = np.sqrt(1 + p1 * p1 + p2 * p2)
    r = c / rho
    T = np.zeros((13, 13))
    T[0, 2:4] = L, L
    T[1, [0, 2, 3]] = 1, -r * p1, r * p1
    T[2, [1, 2, 3]] = 1, -r * p2, r * p2
    T[3, :4] = p1, p2, r, -r
    block = np.array([[1, 0, -p1], [0, 1, -p2], [p1, p2, 1]])
    for o in (4, 7, 10):
        T[o:o + 3, o:o + 3] = block
    cond = np.linalg.cond(T)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise DegenerateTransformationError(f"transformation is singular (condition {cond:.3e})", cond)
    return T


def assemble_A0(coeffs: FrozenCoefficients, law: PressureLaw) -> np.ndarray:
    p1, p2, p3 = _phi(coeffs)
    c = sound_speed(law, coeffs.rho)
    L = np.sqrt(1 + p1 * p1 + p2 * p2)
    d = np.ones(13)
    d[2] = p3 / (c * L)
    d[3] = -p3 / (c * L)
    return np.diag(d)


def verify_diagonalization(u, coeffs: FrozenCoefficients, law: PressureLaw, tol: float = 1e-9):
    """Max-norm of A0 T^-1 A3_tilde T - I2; returns ``(residual, passed)``."""
    T = assemble_T(u, coeffs, law)
    R = assemble_A0(coeffs, law) @ np.linalg.solve(T, assemble_A3_tilde(u, coeffs, law) @ T)
    I2 = np.zeros((13, 13))
    I2[2, 2] = I2[3, 3] = 1.0
    res = float(np.max(np.abs(R - I2)))
    return res, res <= tol


def transformed_symbol(freq: Frequency, coeffs: FrozenCoefficients, law: PressureLaw) -> np.ndarray:
    """M = tau A0 + i eta A0 T^-1 A1 T + i eta_t A0 T^-1 A2 T."""
    u = state_vector(coeffs)
    T = assemble_T(u, coeffs, law)
    A0 = assemble_A0(coeffs, law)
    A1t = A0 @ np.linalg.solve(T, assemble_A(1, u, law) @ T)
    A2t = A0 @ np.linalg.solve(T, assemble_A(2, u, law) @ T)
    return freq.tau * A0 + 1j * freq.eta * A1t + 1j * freq.eta_t * A2t


def reduced_ode_oracle(freq: Frequency, coeffs: FrozenCoefficients, law: PressureLaw | None = None):
    """Interior 2x2 symbol obtained by eliminating the 11 algebraic unknowns."""
    law = coeffs.law if law is None else law
    _guard(freq, coeffs)
    M = transformed_symbol(freq, coeffs, law)
    Maa = M[np.ix_(ALG, ALG)]
    cond = np.linalg.cond(Maa)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise PoleProximity(f"algebraic block is singular (condition {cond:.3e})", factor=cond,
                            threshold=COND_LIMIT)
    lu = scipy.linalg.lu_factor(Maa)
    S = M[np.ix_(CHAR, CHAR)] - M[np.ix_(CHAR, ALG)] @ scipy.linalg.lu_solve(lu, M[np.ix_(ALG, CHAR)])
    return -S
