"""Cross-module self-checks: random states and the three consistency oracles."""
from __future__ import annotations

import numpy as np

from .core_state import FixedSoundSpeed, FrozenCoefficients, Frequency, PlanarBackground, frozen_from_background
from .errors import FactoredFormUnavailable, PoleProximity
from .lopatinskii import lopatinskii_det_factored, lopatinskii_matrix
from .reduction13 import reduced_ode_oracle, state_vector, verify_diagonalization
from .symbols import interior_symbol_A, symbol_bundle


def random_frozen_state(rng: np.random.Generator, side: str = "r", defect: float = 0.0,
                        base: PlanarBackground | None = None) -> FrozenCoefficients:
    """A random frozen state whose third F row satisfies the involution up to ``defect``."""
    if base is None:
        rho = rng.uniform(0.5, 2.0)
        law = FixedSoundSpeed(rng.uniform(0.5, 2.0))
        F = rng.normal(size=(3, 3))
        v1, v2, v3 = rng.normal(size=3)
    else:
        rho, law = base.rho, base.law
        F = np.vstack([base.F1, base.F2, np.zeros(3)]) + 0.1 * rng.normal(size=(3, 3))
        v1, v2, v3 = base.vbar + 0.1 * rng.normal(size=3)
    p1, p2 = 0.5 * rng.normal(size=2)
    p3 = (1 if side == "r" else -1) * rng.uniform(0.5, 2.0)
    F[2] = F[0] * p1 + F[1] * p2 + defect
    return FrozenCoefficients(side, rho, v1, v2, F, p1, p2, p3, law, v3=v3)


def random_frequency(rng: np.random.Generator, gamma_min: float = 0.05) -> Frequency:
    g = rng.uniform(gamma_min, 1.0)
    d, e, et = rng.normal(size=3)
    return Frequency(g, d, e, et)


def diagonalization_oracle(rng, n: int = 100, defect: float = 0.0, base=None):
    worst = 0.0
    for i in range(n):
        st = random_frozen_state(rng, "r" if i % 2 == 0 else "l", defect, base)
        res, _ = verify_diagonalization(state_vector(st), st, st.law)
        worst = max(worst, res)
    return worst


def schur_oracle(rng, n: int = 200, base=None):
    """Largest elementwise gap (relative to Lambda) and eigenvalue gap over ``n`` samples."""
    worst, worst_eig, done = 0.0, 0.0, 0
    while done < n:
        st = random_frozen_state(rng, "r" if done % 2 == 0 else "l", 0.0, base)
        fr = random_frequency(rng)
        try:
            A_or = reduced_ode_oracle(fr, st)
            A_cl = interior_symbol_A(fr, st)
            b = symbol_bundle(fr, st)
        except PoleProximity:
            continue
        worst = max(worst, float(np.max(np.abs(A_or - A_cl))) / fr.Lambda)
        ev = np.sort_complex(np.linalg.eigvals(A_or))
        ref = np.sort_complex(np.array([b.omega + b.eig_shift, -b.omega + b.eig_shift]))
        worst_eig = max(worst_eig, float(np.max(np.abs(ev - ref))) / fr.Lambda)
        done += 1
    return worst, worst_eig


def random_planar_background(rng) -> PlanarBackground:
    return PlanarBackground(rng.uniform(0.5, 2.0), rng.uniform(0.0, 1.0), rng.normal(size=3), rng.normal(size=3),
                            FixedSoundSpeed(rng.uniform(0.5, 2.0)))


def factored_oracle(rng, n: int = 500, bg: PlanarBackground | None = None):
    """Largest relative gap between direct and closed-form determinants.

    Also returns the smallest modulus seen for the two factors that may not
    vanish, and the number of skipped (pole or degenerate) draws.
    """
    worst, min_factor, done, skipped = 0.0, np.inf, 0, 0
    while done < n:
        b = bg if bg is not None else random_planar_background(rng)
        left, right = frozen_from_background(b)
        fr = random_frequency(rng)
        try:
            fac, (f5, f6) = lopatinskii_det_factored(fr, left, right, return_factors=True)
            L = lopatinskii_matrix(fr, left, right)
        except (PoleProximity, FactoredFormUnavailable):
            skipped += 1
            continue
        det = L[0, 0] * L[1, 1] - L[0, 1] * L[1, 0]
        worst = max(worst, abs(det - fac) / abs(fac))
        min_factor = min(min_factor, abs(f5), abs(f6))
        done += 1
    return worst, float(min_factor), skipped


def omega_identity_residual(fr: Frequency, st: FrozenCoefficients) -> float:
    b = symbol_bundle(fr, st)
    return abs(b.omega ** 2 - (b.mu ** 2 - b.m ** 2)) / max(abs(b.omega) ** 2, 1.0)


__all__ = ["random_frozen_state", "random_frequency", "random_planar_background", "diagonalization_oracle",
           "schur_oracle", "factored_oracle", "omega_identity_residual"]
