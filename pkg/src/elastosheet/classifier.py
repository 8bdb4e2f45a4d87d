"""Stability thresholds, characteristic frequency sets and their separation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .core_state import (Frequency, PlanarBackground, check_nonparallel, default_nonparallel_tol,
                         perp_part)
from .errors import RootCountAnomaly

VERDICTS = ("stable_conditions_hold", "h1_violated", "g_violated", "both_violated", "parallel_rows")


def g_theta(theta, F1, F2):
    """sum_j (cos(theta) F1j + sin(theta) F2j)^2, vectorized over theta."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta)[..., None], np.sin(theta)[..., None]
    row = c * np.asarray(F1, dtype=float) + s * np.asarray(F2, dtype=float)
    out = np.sum(row * row, axis=-1)
    return float(out) if out.ndim == 0 else out


def _g_over_cos2(t, F1, F2):
    """g / cos^2 written in t = tan(theta): |F1 + t F2|^2."""
    w = np.asarray(F1, dtype=float) + t * np.asarray(F2, dtype=float)
    return float(w @ w)


@dataclass(frozen=True)
class H1Details:
    value: float
    value_by_minimization: float
    t_star: Optional[float]


def h1_threshold(F1, F2, details: bool = False):
    """|Pi_perp_{F2}(F1)|^2 / 4, cross-checked against a minimization over tan(theta)."""
    F1 = np.asarray(F1, dtype=float)
    F2 = np.asarray(F2, dtype=float)
    perp = perp_part(F1, F2)
    val = float(perp @ perp) / 4.0
    if not details:
        return val
    n2 = float(F2 @ F2)
    if n2 == 0.0:
        return H1Details(val, _g_over_cos2(0.0, F1, F2) / 4.0, None)
    # |F1 + t F2|^2 is convex in t and its minimizer has modulus at most |F1|/|F2|
    span = 1.0 + math.sqrt(float(F1 @ F1) / n2)
    res = optimize.minimize_scalar(lambda t: _g_over_cos2(t, F1, F2), bounds=(-span, span),
                                   method="bounded", options={"xatol": 1e-12})
    return H1Details(val, float(res.fun) / 4.0, float(res.x))


def _G_objective(theta, F1, F2, c):
    g = g_theta(theta, F1, F2)
    cos2 = np.cos(theta) ** 2
    return (np.sqrt(g + c * c) - np.sqrt(g)) ** 2 / (4.0 * cos2)


def G_lower_bound(F1, F2, c: float) -> float:
    F1 = np.asarray(F1, dtype=float)
    F2 = np.asarray(F2, dtype=float)
    S = float(F1 @ F1 + F2 @ F2)
    if S == 0.0:
        return 0.0
    perp = perp_part(F1, F2)
    return float(perp @ perp) / 4.0 * c ** 4 / (S * (math.sqrt(S + c * c) + math.sqrt(S)) ** 2)


@dataclass(frozen=True)
class GDetails:
    value: float
    theta_star: float
    g_star: float
    lower_bound: float


def big_G(F1, F2, c: float, n_points: int = 4096, details: bool = False):
    """Infimum over cos(theta) != 0 of (sqrt(g + c^2) - sqrt(g))^2 / (4 cos^2 theta).

    A dense scan on the open interval (-pi/2, pi/2) locates the best cell,
    then bounded Brent refinement polishes it.
    """
    if not c > 0:
        raise ValueError(f"sound speed must be positive, got {c}")
    thetas = np.linspace(-math.pi / 2, math.pi / 2, n_points + 1)[1:-1]
    vals = _G_objective(thetas, F1, F2, c)
    i = int(np.argmin(vals))
    lo, hi = thetas[max(i - 1, 0)], thetas[min(i + 1, len(thetas) - 1)]
    res = optimize.minimize_scalar(lambda th: float(_G_objective(th, F1, F2, c)), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-12})
    if res.fun < vals[i]:
        val, th = float(res.fun), float(res.x)
    else:
        val, th = float(vals[i]), float(thetas[i])
    lb = G_lower_bound(F1, F2, c)
    g_star = float(g_theta(th, F1, F2))
    S = float(np.dot(F1, F1) + np.dot(F2, F2))
    if val < lb * (1 - 1e-10) - 1e-15:
        raise ArithmeticError(f"G = {val} violates its analytic lower bound {lb}")
    if g_star > S * (1 + 1e-10) + 1e-15:
        raise ArithmeticError(f"g at the minimizer ({g_star}) exceeds |F1|^2 + |F2|^2 = {S}")
    if details:
        return GDetails(val, th, g_star, lb)
    return val


@dataclass(frozen=True)
class StabilityVerdict:
    nonparallel_ok: bool
    cross_norm: float
    h1_threshold: float
    g_threshold: float
    vbar_sq: float
    margins: tuple
    verdict: str

    def to_dict(self) -> dict:
        return {"nonparallel": self.nonparallel_ok, "h1_threshold": self.h1_threshold,
                "g_threshold": self.g_threshold, "vbar_sq": self.vbar_sq,
                "margins": {"h1": self.margins[0], "g": self.margins[1]}, "verdict": self.verdict}


def stability_report(bg: PlanarBackground, n_points: int = 4096) -> StabilityVerdict:
    ok, cross = check_nonparallel(bg.F1, bg.F2, default_nonparallel_tol(bg.F1, bg.F2))
    h1 = h1_threshold(bg.F1, bg.F2)
    G = big_G(bg.F1, bg.F2, bg.c, n_points=n_points)
    v2 = bg.vbar ** 2
    margins = (h1 - v2, G - v2)
    if not ok:
        verdict = "parallel_rows"
    elif margins[0] > 0 and margins[1] > 0:
        verdict = "stable_conditions_hold"
    elif margins[0] > 0:
        verdict = "g_violated"
    elif margins[1] > 0:
        verdict = "h1_violated"
    else:
        verdict = "both_violated"
    return StabilityVerdict(ok, cross, h1, G, v2, margins, verdict)


@dataclass(frozen=True)
class FrequencySetSlice:
    """Branch locations in delta on gamma = 0 for the unit direction (cos theta, sin theta)."""

    theta: float
    ups1_r: float
    ups1_l: float
    pole2_r: tuple
    pole2_l: tuple
    omega_r: tuple
    omega_l: tuple
    roots: Optional[tuple] = None

    def sets(self) -> dict:
        out = {"upsilon1": [self.ups1_r, self.ups1_l],
               "pole2": list(self.pole2_r) + list(self.pole2_l),
               "omega": list(self.omega_r) + list(self.omega_l)}
        if self.roots is not None:
            out["roots"] = list(self.roots)
        return out


def frequency_sets(theta: float, bg: PlanarBackground, roots: bool | None = None,
                   stable: bool | None = None) -> FrequencySetSlice:
    """All branch locations at ``theta``.

    Roots are computed when ``roots`` is true, or when it is None and the
    background satisfies the stability conditions (``stable`` may be passed to
    skip recomputing the verdict).
    """
    from .lopatinskii import find_roots_V

    u = bg.vbar * math.cos(theta)
    g = float(g_theta(theta, bg.F1, bg.F2))
    sg, sw = math.sqrt(g), math.sqrt(g + bg.c ** 2)
    if roots is None:
        if stable is None:
            stable = stability_report(bg).verdict == "stable_conditions_hold"
        roots = stable
    V = find_roots_V(theta, bg) if roots else None
    return FrequencySetSlice(theta=theta, ups1_r=-u, ups1_l=u, pole2_r=(-u - sg, -u + sg),
                             pole2_l=(u - sg, u + sg), omega_r=(-u - sw, -u + sw),
                             omega_l=(u - sw, u + sw), roots=V)


def sigma_weight(freq: Frequency, bg: PlanarBackground, rootsV) -> float:
    """Boundary weight vanishing on the k1 sets and at the neutral roots."""
    d, e, et = freq.delta, freq.eta, freq.eta_t
    den = (d * d + e * e + et * et) ** 1.5
    if den == 0:
        raise ValueError("sigma needs delta^2 + eta^2 + eta_t^2 > 0")
    sE = math.sqrt(e * e + et * et)
    V1, V2 = rootsV
    num = (d + bg.vbar * e) * (d - bg.vbar * e) * (d - V1 * sE) * (d - V2 * sE)
    return num / den


PAIRS = (("upsilon1", "pole2"), ("upsilon1", "omega"), ("upsilon1", "roots"),
         ("pole2", "omega"), ("pole2", "roots"), ("roots", "omega"))


def _pair_gap(a, b):
    return min(abs(x - y) for x in a for y in b)


@dataclass
class SeparationReport:
    thetas: np.ndarray
    gaps: dict
    minima: dict
    argmin_theta: dict
    cross_gap: np.ndarray
    slices: list = field(default_factory=list)
    anomalies: list = field(default_factory=list)

    @property
    def min_gap(self) -> float:
        vals = [v for v in self.minima.values() if np.isfinite(v)]
        return min(vals) if vals else float("nan")

    def row_min_gap(self, i: int) -> float:
        vals = [self.gaps[p][i] for p in self.gaps if np.isfinite(self.gaps[p][i])]
        return min(vals) if vals else float("nan")


def cross_gap_signed(bg: PlanarBackground, thetas) -> np.ndarray:
    """Signed distance between the outer pole branch and the inner omega branch of opposite sides.

    Positive while the two branches are separated; it reaches zero when the
    sets first touch and becomes negative once they have crossed.
    """
    thetas = np.asarray(thetas, dtype=float)
    u = np.abs(bg.vbar * np.cos(thetas))
    g = g_theta(thetas, bg.F1, bg.F2)
    pole_outer = -u - np.sqrt(g)
    omega_inner = u - np.sqrt(g + bg.c ** 2)
    return pole_outer - omega_inner


def k1_pole_gap_signed(bg: PlanarBackground, thetas) -> np.ndarray:
    """Signed distance between one side's k1 branch and the inner pole branch of the other side."""
    thetas = np.asarray(thetas, dtype=float)
    u = np.abs(bg.vbar * np.cos(thetas))
    return np.sqrt(g_theta(thetas, bg.F1, bg.F2)) - 2 * u


def separation_margins(bg: PlanarBackground, thetas=None, with_roots: bool | None = None) -> SeparationReport:
    """Pairwise minimum gaps between the frequency sets over a theta grid."""
    if thetas is None:
        thetas = np.linspace(0.0, math.pi, 720, endpoint=False)
    thetas = np.asarray(thetas, dtype=float)
    stable = stability_report(bg).verdict == "stable_conditions_hold"
    if with_roots is None:
        with_roots = stable
    gaps = {p: np.full(len(thetas), np.nan) for p in PAIRS}
    slices, anomalies = [], []
    for i, th in enumerate(thetas):
        try:
            sl = frequency_sets(float(th), bg, roots=with_roots)
        except RootCountAnomaly as exc:
            anomalies.append((float(th), str(exc)))
            sl = frequency_sets(float(th), bg, roots=False)
        slices.append(sl)
        S = sl.sets()
        for p in PAIRS:
            if p[0] in S and p[1] in S:
                gaps[p][i] = _pair_gap(S[p[0]], S[p[1]])
    cross = cross_gap_signed(bg, thetas)
    # once the outer pole branch and the inner omega branch of the other side
    # have crossed, their absolute distance grows again; the signed gap keeps
    # the pair reported as overlapping
    po = ("pole2", "omega")
    gaps[po] = np.minimum(gaps[po], cross)
    # the same holds for the k1 set of one side against the inner pole branch of the other
    up = ("upsilon1", "pole2")
    gaps[up] = np.minimum(gaps[up], k1_pole_gap_signed(bg, thetas))
    minima, argmin = {}, {}
    for p in PAIRS:
        col = gaps[p]
        if np.all(np.isnan(col)):
            minima[p], argmin[p] = float("nan"), float("nan")
        else:
            k = int(np.nanargmin(col))
            minima[p], argmin[p] = float(col[k]), float(thetas[k])
    # the pole-omega pair is separated exactly when every cross gap is positive
    closed_by_formula = bool(np.any(4 * bg.vbar ** 2 * np.cos(thetas) ** 2
                                    >= (np.sqrt(g_theta(thetas, bg.F1, bg.F2) + bg.c ** 2)
                                        - np.sqrt(g_theta(thetas, bg.F1, bg.F2))) ** 2))
    if (minima[po] > 0) == closed_by_formula and abs(minima[po]) > 1e-12:
        raise ArithmeticError("pole/omega separation disagrees with its closed-form criterion")
    return SeparationReport(thetas, gaps, minima, argmin, cross, slices, anomalies)


def closure_vbar(bg: PlanarBackground, thetas, vmax: float | None = None, xtol: float = 1e-14) -> float:
    """Smallest vbar at which the pole/omega cross gap closes on the given theta grid."""
    thetas = np.asarray(thetas, dtype=float)

    def f(v):
        return float(np.min(cross_gap_signed(bg.replace(vbar=v), thetas)))

    hi = vmax if vmax is not None else bg.c + 1.0
    while f(hi) > 0:
        hi *= 2
    return float(optimize.bisect(f, 0.0, hi, xtol=xtol))
