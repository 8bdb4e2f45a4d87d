"""Background and frozen states, vector geometry and frequency normalization."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DegenerateAxisError, DomainError


@dataclass(frozen=True)
class GammaLaw:
    """Isentropic law p(rho) = A * rho**gamma_p."""

    A: float
    gamma_p: float

    def __post_init__(self):
        if not self.A > 0:
            raise DomainError(f"gamma law needs A > 0, got {self.A}")
        if not self.gamma_p >= 1:
            raise DomainError(f"gamma law needs gamma_p >= 1, got {self.gamma_p}")

    def dp(self, rho: float) -> float:
        return self.A * self.gamma_p * rho ** (self.gamma_p - 1.0)


@dataclass(frozen=True)
class FixedSoundSpeed:
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"sound speed must be positive, got {self.c}")

    def dp(self, rho: float) -> float:
        return self.c * self.c


PressureLaw = Union[GammaLaw, FixedSoundSpeed]


def sound_speed(law: PressureLaw, rho: float) -> float:
    """c(rho) = sqrt(p'(rho))."""
    if not rho > 0:
        raise DomainError(f"density must be positive, got {rho}")
    if isinstance(law, FixedSoundSpeed):
        return float(law.c)
    return math.sqrt(law.dp(rho))


def _vec3(x, name):
    a = np.asarray(x, dtype=float)
    if a.shape != (3,):
        raise DomainError(f"{name} must be a 3-vector, got shape {a.shape}")
    a = a.copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PlanarBackground:
    """Piecewise-constant sheet: v = (+-vbar, 0, 0), F = +-[F1; F2; 0]."""

    rho: float
    vbar: float
    F1: np.ndarray
    F2: np.ndarray
    law: PressureLaw = field(default_factory=lambda: FixedSoundSpeed(1.0))

    def __post_init__(self):
        if not self.rho > 0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        if not self.vbar >= 0:
            raise DomainError(f"vbar must be nonnegative, got {self.vbar}")
        object.__setattr__(self, "F1", _vec3(self.F1, "F1"))
        object.__setattr__(self, "F2", _vec3(self.F2, "F2"))

    @property
    def c(self) -> float:
        return sound_speed(self.law, self.rho)

    def replace(self, **changes) -> "PlanarBackground":
        kw = dict(rho=self.rho, vbar=self.vbar, F1=self.F1, F2=self.F2, law=self.law)
        kw.update(changes)
        return PlanarBackground(**kw)


@dataclass(frozen=True)
class FrozenCoefficients:
    """Pointwise state of one side, used to evaluate the frozen symbols.

    ``F`` is the full 3x3 deformation gradient (rows F_1., F_2., F_3.).
    ``phi1, phi2, phi3`` are the first derivatives of the lifting function.
    """

    side: str
    rho: float
    v1: float
    v2: float
    F: np.ndarray
    phi1: float
    phi2: float
    phi3: float
    law: PressureLaw = field(default_factory=lambda: FixedSoundSpeed(1.0))
    v3: float = 0.0

    def __post_init__(self):
        if self.side not in ("r", "l"):
            raise DomainError(f"side must be 'r' or 'l', got {self.side!r}")
        if not self.rho > 0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        if self.side == "r" and not self.phi3 > 0:
            raise DomainError("r side needs phi3 > 0")
        if self.side == "l" and not self.phi3 < 0:
            raise DomainError("l side needs phi3 < 0")
        F = np.asarray(self.F, dtype=float).copy()
        if F.shape != (3, 3):
            raise DomainError(f"F must be 3x3, got shape {F.shape}")
        F.flags.writeable = False
        object.__setattr__(self, "F", F)

    @property
    def c(self) -> float:
        return sound_speed(self.law, self.rho)

    @property
    def tan_norm(self) -> float:
        """<d_tan Phi> = sqrt(1 + phi1^2 + phi2^2)."""
        return math.sqrt(1.0 + self.phi1 ** 2 + self.phi2 ** 2)


@dataclass(frozen=True)
class Frequency:
    gamma: float
    delta: float
    eta: float
    eta_t: float

    def __post_init__(self):
        if self.gamma < 0:
            raise DomainError(f"gamma = Re(tau) must be >= 0, got {self.gamma}")
        if self.gamma == 0 and self.delta == 0 and self.eta == 0 and self.eta_t == 0:
            raise DomainError("frequency must not be identically zero")

    @property
    def tau(self) -> complex:
        return complex(self.gamma, self.delta)

    @property
    def Lambda(self) -> float:
        return math.sqrt(self.gamma ** 2 + self.delta ** 2 + self.eta ** 2 + self.eta_t ** 2)

    @property
    def on_hemisphere(self) -> bool:
        return abs(self.Lambda - 1.0) <= 1e-12

    def scaled(self, s: float) -> "Frequency":
        return Frequency(s * self.gamma, s * self.delta, s * self.eta, s * self.eta_t)


def projections(a, b):
    """Split ``b`` into its parts parallel and perpendicular to ``a``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aa = float(a @ a)
    if aa == 0.0:
        raise DegenerateAxisError("cannot project onto the zero vector")
    par = (float(a @ b) / aa) * a
    return par, b - par


def perp_part(F1, F2):
    """Pi^perp_{F2}(F1), with the convention Pi_0 = 0 when F2 vanishes."""
    F1 = np.asarray(F1, dtype=float)
    if not np.any(np.asarray(F2, dtype=float)):
        return F1.copy()
    return projections(F2, F1)[1]


def check_nonparallel(F1, F2, tol: float = 0.0):
    cross_norm = float(np.linalg.norm(np.cross(F1, F2)))
    return cross_norm > tol, cross_norm


def default_nonparallel_tol(F1, F2) -> float:
    return 1e-10 * float(np.linalg.norm(F1) * np.linalg.norm(F2))


def check_involution(state: FrozenCoefficients, tol: float | None = None) -> np.ndarray:
    """Residuals r_j = F_1j phi1 + F_2j phi2 - F_3j, j = 1..3."""
    F = state.F
    return F[0] * state.phi1 + F[1] * state.phi2 - F[2]


def hemisphere_point(gamma: float, delta: float, eta: float, eta_t: float) -> Frequency:
    lam = math.sqrt(gamma * gamma + delta * delta + eta * eta + eta_t * eta_t)
    if lam == 0.0:
        raise DomainError("cannot normalize the zero frequency")
    return Frequency(gamma / lam, delta / lam, eta / lam, eta_t / lam)


def frozen_from_background(bg: PlanarBackground):
    """Embed a planar background as the (left, right) frozen pair, Phi = +-x3."""
    F = np.vstack([bg.F1, bg.F2, np.zeros(3)])
    right = FrozenCoefficients("r", bg.rho, bg.vbar, 0.0, F, 0.0, 0.0, 1.0, bg.law)
    left = FrozenCoefficients("l", bg.rho, -bg.vbar, 0.0, -F, 0.0, 0.0, -1.0, bg.law)
    return left, right
