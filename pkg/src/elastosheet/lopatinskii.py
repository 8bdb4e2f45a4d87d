"""Lopatinskii matrix and determinant, neutral roots, the h-factor and hemisphere scans.

Scans use the planar chart ``(eta, eta_t) = (cos theta, sin theta)``: a
frequency ``(gamma, delta, cos theta, sin theta)`` is the hemisphere point
obtained after dividing by ``sqrt(1 + gamma^2 + delta^2)``.  Every quantity
checked here is homogeneous, so zeros and the normalized determinant do not
depend on that choice of representative.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .core_state import FrozenCoefficients, Frequency, PlanarBackground, frozen_from_background
from .errors import FactoredFormUnavailable, InconsistentTraceError, PoleProximity, RootCountAnomaly
from .symbols import POLE_GUARD, TOL_DEG, _guard, beta_kernel, boundary_slope, side_kernel

log = logging.getLogger(__name__)

SCALE_FLOOR = 1e-30


# ---------------------------------------------------------------------------
# vectorized evaluation


def _side_columns(out, side, tol_deg=TOL_DEG):
    """Per-point eigenvector: the side's preferred column, the other one where it collapses."""
    first, second = (out["E"], out["E_alt"]) if side == "r" else (out["E_alt"], out["E"])
    with np.errstate(invalid="ignore"):
        size = np.abs(out["alpha"]) * (np.abs(out["mu"]) + np.abs(out["omega"]) + np.abs(out["m"]) + 1.0)
        small = np.sqrt(np.abs(first[0]) ** 2 + np.abs(first[1]) ** 2) < tol_deg * size
    E = np.where(small, second, first)
    return E, small


def _matched(left: FrozenCoefficients, right: FrozenCoefficients):
    if abs(left.rho - right.rho) > 1e-12 * max(left.rho, right.rho):
        raise InconsistentTraceError("densities differ across the front")
    if abs(left.c - right.c) > 1e-12 * max(left.c, right.c):
        raise InconsistentTraceError("sound speeds differ across the front")
    return boundary_slope(left, right)


def factored_parts(outr, outl, eta, eta_t, left, right):
    """Factors of the closed-form determinant, evaluated pointwise.

    Returns ``(prefactor, bracket, f4, f5, f6)`` so that the published product is
    ``prefactor * k1r * k1l * bracket * f4 * f5 * f6``.
    """
    k = _matched(left, right)
    c, rho = right.c, right.rho
    i1, i2 = right.phi1, right.phi2
    i3r, i3l = right.phi3, left.phi3
    wr, wl = outr["omega"], outl["omega"]
    pref = c ** 4 * k * k / rho
    bracket = k ** 4 * wr * wl / (i3r * i3l) + (eta * i2 - eta_t * i1) ** 2 + eta ** 2 + eta_t ** 2
    f4 = wr / i3r - wl / i3l
    f5 = i3r / (k * c) * (outr["k1"] ** 2 + outr["k2"]) - outr["k1"] * wr
    f6 = i3l / (k * c) * (outl["k1"] ** 2 + outl["k2"]) + outl["k1"] * wl
    return pref, bracket, f4, f5, f6


@dataclass
class DetGrid:
    det: np.ndarray
    scale: np.ndarray
    pole: np.ndarray
    fallback: np.ndarray
    k1r: np.ndarray
    k1l: np.ndarray

    @property
    def normalized(self) -> np.ndarray:
        return np.abs(self.det) / self.scale


def det_grid(tau, eta, eta_t, left: FrozenCoefficients, right: FrozenCoefficients) -> DetGrid:
    """Direct determinant of beta diag(Er, El) on arrays, with its scale and masks."""
    tau, eta, eta_t = np.broadcast_arrays(np.asarray(tau, dtype=complex), np.asarray(eta, dtype=float),
                                          np.asarray(eta_t, dtype=float))
    outr = side_kernel(tau, eta, eta_t, right)
    outl = side_kernel(tau, eta, eta_t, left)
    Er, fr = _side_columns(outr, "r")
    El, fl = _side_columns(outl, "l")
    B = beta_kernel(outl["k1"], outr["k1"], left, right)
    L11 = B[0, 0] * Er[0] + B[0, 1] * Er[1]
    L21 = B[1, 0] * Er[0] + B[1, 1] * Er[1]
    L12 = B[0, 2] * El[0] + B[0, 3] * El[1]
    L22 = B[1, 2] * El[0] + B[1, 3] * El[1]
    det = L11 * L22 - L12 * L21
    lam = outr["Lambda"]
    pref, _, _, f5, f6 = factored_parts(outr, outl, eta, eta_t, left, right)
    scale = (max(abs(pref), SCALE_FLOOR) * np.maximum(lam ** 5, SCALE_FLOOR)
             * np.maximum(np.abs(f5), SCALE_FLOOR) * np.maximum(np.abs(f6), SCALE_FLOOR))
    thr = POLE_GUARD * lam ** 3
    pole = (outr["pole_factor"] < thr) | (outl["pole_factor"] < thr) | ~np.isfinite(det)
    return DetGrid(det=det, scale=scale, pole=pole, fallback=fr | fl, k1r=outr["k1"], k1l=outl["k1"])


# ---------------------------------------------------------------------------
# scalar API


def lopatinskii_matrix(freq: Frequency, left: FrozenCoefficients, right: FrozenCoefficients,
                       law=None, prefer: str = "side") -> np.ndarray:
    """L = beta diag(Er, El), a complex 2x2 matrix.

    ``prefer`` is forwarded to the eigenvector choice (see ``symbols.eigvec_E``).
    """
    from .symbols import boundary_symbol_beta, eigvec_E

    _guard(freq, right)
    _guard(freq, left)
    Er, _ = eigvec_E(freq, right, prefer=prefer)
    El, _ = eigvec_E(freq, left, prefer=prefer)
    B = boundary_symbol_beta(freq, left, right)
    return np.column_stack([B[:, :2] @ Er, B[:, 2:] @ El])


def _scalar_parts(freq, left, right, guard=True):
    if guard:
        _guard(freq, right)
        _guard(freq, left)
    tau, eta, eta_t = freq.tau, freq.eta, freq.eta_t
    outr = side_kernel(tau, eta, eta_t, right)
    outl = side_kernel(tau, eta, eta_t, left)
    return outr, outl


def published_product(freq: Frequency, left: FrozenCoefficients, right: FrozenCoefficients):
    """The six-factor closed form exactly as printed, with its two nonvanishing factors."""
    with np.errstate(divide="ignore", invalid="ignore"):
        outr, outl = _scalar_parts(freq, left, right, guard=False)
    pref, bracket, f4, f5, f6 = factored_parts(outr, outl, freq.eta, freq.eta_t, left, right)
    val = pref * outr["k1"] * outl["k1"] * bracket * f4 * f5 * f6
    return complex(val), complex(f5), complex(f6)


# det(beta diag(Er, El)) with Er the primary and El the alternate adjugate
# column equals minus the printed product, identically in all inputs.
FACTORED_SIGN = -1.0


def lopatinskii_det_factored(freq: Frequency, left: FrozenCoefficients, right: FrozenCoefficients,
                             return_factors: bool = False):
    """Closed-form determinant, normalized to the eigenvector columns used here.

    The product has no pole, so it is also evaluated where the eigenvectors
    are undefined (for instance where k1 vanishes), as their continuous
    extension.  Raises ``FactoredFormUnavailable`` if either side's preferred
    eigenvector column degenerates away from such points, and
    ``ArithmeticError`` if one of the two factors that cannot vanish does.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        outr, outl = _scalar_parts(freq, left, right, guard=False)
    _, fr = _side_columns(outr, "r")
    _, fl = _side_columns(outl, "l")
    if bool(fr) or bool(fl):
        raise FactoredFormUnavailable("an eigenvector column degenerated; the closed form does not apply")
    val, f5, f6 = published_product(freq, left, right)
    if f5 == 0 or f6 == 0:
        raise ArithmeticError("a factor that cannot vanish evaluated to zero")
    val *= FACTORED_SIGN
    if return_factors:
        return val, (f5, f6)
    return val


@dataclass(frozen=True)
class LopatinskiiSample:
    freq: Frequency
    L: np.ndarray
    det_direct: complex
    det_factored: Optional[complex]
    scale: float

    @property
    def normalized(self) -> float:
        return abs(self.det_direct) / self.scale


def lopatinskii_sample(freq: Frequency, left: FrozenCoefficients, right: FrozenCoefficients) -> LopatinskiiSample:
    L = lopatinskii_matrix(freq, left, right)
    det = complex(L[0, 0] * L[1, 1] - L[0, 1] * L[1, 0])
    g = det_grid(freq.tau, freq.eta, freq.eta_t, left, right)
    try:
        fac = lopatinskii_det_factored(freq, left, right)
    except (FactoredFormUnavailable, InconsistentTraceError):
        fac = None
    return LopatinskiiSample(freq=freq, L=L, det_direct=det, det_factored=fac, scale=float(g.scale))


def double_root_h(freq: Frequency, left: FrozenCoefficients, right: FrozenCoefficients, law=None,
                  guard: float = 1e-300) -> complex:
    """h = det L / (k1r k1l) near the set where k1 vanishes."""
    L = lopatinskii_matrix(freq, left, right)
    det = L[0, 0] * L[1, 1] - L[0, 1] * L[1, 0]
    from .symbols import k1

    d = k1(freq, right) * k1(freq, left)
    if abs(d) <= guard:
        raise PoleProximity("k1r k1l vanishes; evaluate near the set, not on it", factor=abs(d), threshold=guard)
    return complex(det / d)


# ---------------------------------------------------------------------------
# neutral roots on gamma = 0


def _chart_freq_arrays(theta, delta, gamma=0.0):
    delta = np.asarray(delta, dtype=float)
    return gamma + 1j * delta, np.full_like(delta, math.cos(theta)), np.full_like(delta, math.sin(theta))


def bracket_on_axis(delta, theta: float, bg: PlanarBackground):
    """Real bracket factor on gamma = 0 in the chart (its imaginary part is roundoff)."""
    left, right = frozen_from_background(bg)
    tau, eta, eta_t = _chart_freq_arrays(theta, delta)
    outr = side_kernel(tau, eta, eta_t, right)
    outl = side_kernel(tau, eta, eta_t, left)
    _, bracket, _, _, _ = factored_parts(outr, outl, eta, eta_t, left, right)
    return bracket


def root_interval(theta: float, bg: PlanarBackground):
    """Half-width of the delta interval where both omega are real on gamma = 0."""
    from .classifier import g_theta

    g = g_theta(theta, bg.F1, bg.F2)
    return math.sqrt(g + bg.c ** 2) - abs(bg.vbar * math.cos(theta))


def find_roots_V(theta: float, bg: PlanarBackground, n_scan: int = 2000, xtol: float = 1e-12):
    """Neutral roots V1 <= V2 at direction theta (tau = i V on the chart).

    The bracket factor is real on the interval where both omega are real.
    Sign changes on a dense scan are refined with Brent's bracketed method.
    """
    a = root_interval(theta, bg)
    if not a > 0:
        raise RootCountAnomaly(f"empty search interval at theta={theta}", trace={"half_width": a})
    xs = np.linspace(-a, a, n_scan + 2)[1:-1]
    fx = bracket_on_axis(xs, theta, bg).real
    idx = np.nonzero(np.sign(fx[:-1]) * np.sign(fx[1:]) < 0)[0]
    exact = np.nonzero(fx == 0)[0]
    roots = [float(xs[i]) for i in exact]

    def f(d):
        return float(bracket_on_axis(np.array([d]), theta, bg).real[0])

    for i in idx:
        roots.append(optimize.brentq(f, xs[i], xs[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))
    roots.sort()
    if len(roots) != 2:
        raise RootCountAnomaly(f"expected two sign changes of the bracket at theta={theta}, found {len(roots)}",
                               trace={"delta": xs, "bracket": fx, "roots": roots})
    return roots[0], roots[1]


# ---------------------------------------------------------------------------
# hemisphere scan


@dataclass
class ScanReport:
    thetas: np.ndarray
    gammas: np.ndarray
    deltas: np.ndarray
    values: np.ndarray
    flags: np.ndarray
    row_min: np.ndarray
    neutral_zeros: list = field(default_factory=list)
    unstable_zeros: list = field(default_factory=list)
    verdict: str = "clean"
    gamma_min: float = 1e-4

    @property
    def unstable_mode_found(self) -> bool:
        return self.verdict == "unstable_mode_found"

    def rows(self):
        """CSV rows in theta-major, then gamma, then delta order."""
        for i, th in enumerate(self.thetas):
            for j, g in enumerate(self.gammas):
                for k, d in enumerate(self.deltas):
                    yield th, g, d, self.values[i, j, k], self.flags[i, j, k]


def hemisphere_gamma(gamma, delta):
    return gamma / np.sqrt(1.0 + gamma * gamma + delta * delta)


def _default_delta_max(bg: PlanarBackground) -> float:
    Fn2 = float(bg.F1 @ bg.F1 + bg.F2 @ bg.F2)
    return 1.5 * (bg.vbar + math.sqrt(Fn2 + bg.c ** 2))


def _eval_rows(thetas, gammas, deltas, left, right):
    TH, GA, DE = np.meshgrid(thetas, gammas, deltas, indexing="ij")
    g = det_grid(GA + 1j * DE, np.cos(TH), np.sin(TH), left, right)
    vals = g.normalized
    flags = np.full(vals.shape, "ok", dtype=object)
    flags[g.fallback] = "excluded"
    flags[g.pole] = "pole"
    vals = np.where(g.pole, np.nan, vals)
    return vals, flags


def _norm_det_point(theta, gamma, delta, left, right):
    g = det_grid(np.array([gamma + 1j * delta]), np.array([math.cos(theta)]), np.array([math.sin(theta)]),
                 left, right)
    return g.det[0] / g.scale[0], bool(g.pole[0])


def _local_minima_1d(v):
    inner = (v[1:-1] <= v[:-2]) & (v[1:-1] <= v[2:])
    return np.nonzero(inner)[0] + 1


def scan_hemisphere(bg: PlanarBackground, grid: dict | None = None, det_zero: float = 1e-6,
                    root_refine: float = 1e-12, threads: int = 1, newton_seeds: int = 8,
                    delta_max: float | None = None) -> ScanReport:
    """Search the closed hemisphere for zeros of the normalized determinant.

    ``grid`` holds ``theta_points``, ``delta_points`` and ``gamma_levels``.
    The gamma = 0 boundary is always scanned in addition to the levels.
    Zeros on the boundary are refined in delta by golden-section search;
    zeros inside (gamma > 0) are searched by a Newton-type solve in
    ``(theta, delta)`` at each fixed level, seeded from the grid minima, and
    only count when the solve drives the normalized determinant below
    ``min(det_zero, root_refine)``.  A small but nonzero local minimum (for
    instance next to a double zero on the boundary) is therefore not
    mistaken for an unstable mode.
    """
    grid = dict(grid or {})
    n_th = int(grid.get("theta_points", 360))
    n_de = int(grid.get("delta_points", 1201))
    levels = sorted(float(x) for x in grid.get("gamma_levels", [1e-2, 1e-3, 1e-4]))
    if n_th < 2 or n_de < 2 or not levels:
        raise ValueError("scan grid needs at least two theta points, two delta points and one gamma level")
    left, right = frozen_from_background(bg)
    dmax = _default_delta_max(bg) if delta_max is None else delta_max
    thetas = np.linspace(0.0, math.pi, n_th, endpoint=False)
    deltas = np.linspace(-dmax, dmax, n_de)
    gammas = np.array([0.0] + levels)

    chunks = np.array_split(np.arange(n_th), max(1, min(threads, n_th)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda ix: _eval_rows(thetas[ix], gammas, deltas, left, right), chunks))
    else:
        parts = [_eval_rows(thetas[ix], gammas, deltas, left, right) for ix in chunks]
    values = np.concatenate([p[0] for p in parts], axis=0)
    flags = np.concatenate([p[1] for p in parts], axis=0)
    row_min = np.nanmin(np.where(np.isnan(values), np.inf, values), axis=2)

    report = ScanReport(thetas=thetas, gammas=gammas, deltas=deltas, values=values, flags=flags,
                        row_min=row_min, gamma_min=levels[0])
    _refine_boundary(report, bg, left, right, det_zero, root_refine)
    _search_interior(report, left, right, det_zero, newton_seeds, root_refine)

    if report.unstable_zeros:
        report.verdict = "unstable_mode_found"
    elif report.neutral_zeros:
        report.verdict = "neutral_roots"
    else:
        report.verdict = "clean"
    return report


def batched_golden(f, lo, hi, xatol):
    """Golden-section minimization of many independent 1-D problems at once.

    ``f`` maps an array of abscissae (one per problem) to objective values.
    scipy minimizes one problem per call; batching keeps every iteration a
    single vectorized evaluation, which is what makes boundary refinement of
    a full scan cheap.
    """
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a = np.asarray(lo, dtype=float).copy()
    b = np.asarray(hi, dtype=float).copy()
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = f(c), f(d)
    width = float(np.max(b - a)) if a.size else 0.0
    n_iter = 0 if width <= xatol else int(math.ceil(math.log(xatol / width) / math.log(inv)))
    for _ in range(n_iter):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        keep = np.where(left, c, d)
        fkeep = np.where(left, fc, fd)
        new = np.where(left, b - inv * (b - a), a + inv * (b - a))
        fnew = f(new)
        c = np.where(left, new, keep)
        fc = np.where(left, fnew, fkeep)
        d = np.where(left, keep, new)
        fd = np.where(left, fkeep, fnew)
    x = np.where(fc < fd, c, d)
    return x, np.minimum(fc, fd)


def _refine_boundary(report, bg, left, right, det_zero, xatol):
    deltas = report.deltas
    rows, ths, los, his = [], [], [], []
    for i, th in enumerate(report.thetas):
        v = np.where(np.isnan(report.values[i, 0]), np.inf, report.values[i, 0])
        for k in _local_minima_1d(v):
            if np.isfinite(v[k]):
                rows.append(i)
                ths.append(th)
                los.append(deltas[k - 1])
                his.append(deltas[k + 1])
    if not rows:
        return
    ths = np.array(ths)
    cos_t, sin_t = np.cos(ths), np.sin(ths)

    def f(d):
        g = det_grid(1j * d, cos_t, sin_t, left, right)
        return np.where(g.pole, 0.0, g.normalized)

    xs, fs = batched_golden(f, np.array(los), np.array(his), xatol)
    from .classifier import g_theta

    u_all = bg.vbar * cos_t
    sw_all = np.sqrt(g_theta(ths, bg.F1, bg.F2) + bg.c ** 2)
    for i, th, d, val, u, sw in zip(rows, ths, xs, fs, u_all, sw_all):
        if not val < det_zero:
            continue
        d = float(d)
        if min(abs(d + u), abs(d - u)) < 1e-6:
            kind = "upsilon1"
        elif min(abs(abs(d) - abs(u + sw)), abs(abs(d) - abs(u - sw))) < 1e-6:
            # both omega vanish together here, so the factor (wr + wl) does too
            kind = "omega"
        else:
            kind = "root"
        if any(z[0] == th and abs(z[1] - d) < 1e-9 for z in report.neutral_zeros):
            continue
        report.neutral_zeros.append((float(th), d, kind, float(val)))
        kk = int(np.argmin(np.abs(deltas - d)))
        if report.flags[i, 0, kk] == "ok":
            report.flags[i, 0, kk] = "root"


def _fold_theta(theta, delta):
    """Map theta into [0, pi) using the symmetry (theta + pi, delta) ~ (theta, -delta)."""
    t = math.fmod(theta, 2 * math.pi)
    if t < 0:
        t += 2 * math.pi
    if t >= math.pi:
        return t - math.pi, -delta
    return t, delta


def _search_interior(report, left, right, det_zero, n_seeds, zero_tol):
    thetas, deltas = report.thetas, report.deltas
    for j in range(1, len(report.gammas)):
        gam = float(report.gammas[j])
        v = np.where(np.isnan(report.values[:, j]), np.inf, report.values[:, j])
        # 2-D local minima, periodic in theta up to the delta reflection being ignored
        up = np.roll(v, 1, axis=0)
        dn = np.roll(v, -1, axis=0)
        cand = (v <= up) & (v <= dn)
        cand[:, 1:-1] &= (v[:, 1:-1] <= v[:, :-2]) & (v[:, 1:-1] <= v[:, 2:])
        cand[:, [0, -1]] = False
        ii, kk = np.nonzero(cand & np.isfinite(v))
        order = np.argsort(v[ii, kk])[:n_seeds]
        for i, k in zip(ii[order], kk[order]):
            def F(x):
                val, _ = _norm_det_point(x[0], gam, x[1], left, right)
                return [val.real, val.imag]

            sol = optimize.root(F, [thetas[i], deltas[k]], method="hybr")
            val, pole = _norm_det_point(sol.x[0], gam, sol.x[1], left, right)
            if pole or not np.isfinite(val) or abs(val) >= min(det_zero, zero_tol):
                continue
            th, d = _fold_theta(float(sol.x[0]), float(sol.x[1]))
            if any(abs(z[0] - th) < 1e-7 and z[1] == gam and abs(z[2] - d) < 1e-7 for z in report.unstable_zeros):
                continue
            report.unstable_zeros.append((th, gam, d, float(hemisphere_gamma(gam, d)), float(abs(val))))
            ti = int(np.argmin(np.abs(thetas - th)))
            di = int(np.argmin(np.abs(deltas - d)))
            if report.flags[ti, j, di] == "ok":
                report.flags[ti, j, di] = "root"
            log.info("unstable zero at theta=%.6f gamma=%.1e delta=%.6f", th, gam, d)
