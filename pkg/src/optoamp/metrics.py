"""Gain-bandwidth metrics near the first instability.

Just below ``G1`` the power gain around ``-|omega1|`` takes the Lorentzian
form ``|1 + kappa / (x + a)|^2`` with ``x = omega + |omega1|``. ``|kappa|`` is
the gain-bandwidth product, ``2 Im[a]`` the bandwidth and ``-Re[a]`` the
shift of the peak. The numeric counterparts come from a direct search of
``|A(omega)|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import MultiplePeaks, NoPeakInBracket, NotStable, ParamError
from .model import SystemParams
from .scattering import COND_LIMIT, scattering_matrices
from .stability import blue_sideband, boundary_g1, is_stable

DEFAULT_DELTA = 1e-4
COARSE_POINTS = 2001
PEAK_XTOL = 1e-10
FWHM_XTOL = 1e-12


@dataclass(frozen=True)
class LorentzianFit:
    kappa_gbw: complex
    a_shift: complex
    xi: float
    sigma: float
    delta: float

    @property
    def gbw(self) -> float:
        return abs(self.kappa_gbw)

    @property
    def bandwidth(self) -> float:
        return 2 * self.a_shift.imag

    @property
    def peak_offset(self) -> float:
        """Peak position relative to ``-|omega1|``."""
        return -self.a_shift.real


@dataclass(frozen=True)
class PeakMetrics:
    omega_peak: float
    gain_max: float
    fwhm: float
    gbw_numeric: float
    half_max_left: float
    half_max_right: float


@dataclass(frozen=True)
class LorentzianComparison:
    analytic: LorentzianFit | None
    numeric: PeakMetrics
    center: float | None

    def rel_diff(self) -> dict | None:
        if self.analytic is None:
            return None
        num_offset = self.numeric.omega_peak - self.center
        return {
            "kappa_abs": _rel(self.numeric.gbw_numeric, self.analytic.gbw),
            "bandwidth": _rel(self.numeric.fwhm, self.analytic.bandwidth),
            "peak_offset": _rel(num_offset, self.analytic.peak_offset),
        }

    def to_dict(self) -> dict:
        out = {}
        if self.analytic is not None:
            out["analytic"] = {
                "kappa_abs": self.analytic.gbw,
                "bandwidth": self.analytic.bandwidth,
                "peak_offset": self.analytic.peak_offset,
                "kappa_re": self.analytic.kappa_gbw.real,
                "kappa_im": self.analytic.kappa_gbw.imag,
                "a_re": self.analytic.a_shift.real,
                "a_im": self.analytic.a_shift.imag,
                "xi": self.analytic.xi,
                "sigma": self.analytic.sigma,
                "delta": self.analytic.delta,
            }
        out["numeric"] = {
            "gbw": self.numeric.gbw_numeric,
            "fwhm": self.numeric.fwhm,
            "omega_peak": self.numeric.omega_peak,
            "gain_max": self.numeric.gain_max,
        }
        rel = self.rel_diff()
        if rel is not None:
            out["rel_diff"] = rel
        return out


def _rel(value: float, reference: float) -> float:
    return abs(value - reference) / abs(reference)


def lorentzian_params(j: float, kappa1: float, gamma: float, delta: float = DEFAULT_DELTA) -> LorentzianFit:
    """Analytic ``kappa`` and ``a`` for ``G = G1 - delta`` on the blue sideband."""
    if delta <= 0:
        raise ParamError(f"delta must be > 0, got {delta!r}")
    if kappa1 <= 0 or gamma <= 0:
        raise ParamError("kappa1 and gamma must be > 0")
    wm = 1.0
    J2 = j * j
    xi = gamma + 4 * J2 / (gamma + kappa1)
    sigma = math.sqrt(wm**2 + J2 * gamma / (gamma + kappa1))
    common = (gamma + kappa1) ** 2 * (4j * sigma + gamma) - 4 * J2 * (gamma - kappa1)
    kappa = (
        1j * kappa1 * J2 * gamma * (xi - 4j * wm) * (gamma * xi + 8 * wm**2 + 8 * wm * sigma)
        / (4 * wm * xi * sigma * common)
    )
    a = (
        -8 * J2 * wm * math.sqrt(gamma) * math.sqrt(kappa1) * math.sqrt(xi**2 + 16 * wm**2) * delta
        / (xi * sigma * common)
    )
    return LorentzianFit(complex(kappa), complex(a), xi, sigma, float(delta))


def center_frequency(j: float, kappa1: float, gamma: float) -> float:
    """Operating frequency ``-|omega1|`` of the amplifier."""
    if kappa1 <= 0 or gamma <= 0:
        raise ParamError("kappa1 and gamma must be > 0")
    return -math.sqrt(j * j * gamma / (gamma + kappa1) + 1.0)


def _gain(p: SystemParams, omegas) -> np.ndarray:
    U, cond, _ = scattering_matrices(p, omegas)
    gain = np.abs(U[:, 0, 0]) ** 2
    gain[~(cond <= COND_LIMIT)] = np.nan
    return gain


def find_peak(p: SystemParams, bracket: tuple[float, float], n_coarse: int = COARSE_POINTS) -> PeakMetrics:
    """Locate the gain maximum inside ``bracket`` and measure its FWHM.

    A coarse scan picks the best sample; bounded Brent refinement between
    its neighbours places the peak to ``1e-10``. The half-maximum crossings
    are found by root bracketing outward from the peak (they may lie outside
    ``bracket``, up to one bracket width away).
    """
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise ParamError(f"invalid bracket {bracket!r}")
    if not is_stable(p):
        raise NotStable("peak search requires a stable parameter set")
    ws = np.linspace(lo, hi, n_coarse)
    g = _gain(p, ws)
    if np.any(np.isnan(g)):
        raise NoPeakInBracket("near-singular frequencies inside the bracket")
    i = int(np.argmax(g))
    if i == 0 or i == n_coarse - 1:
        raise NoPeakInBracket(f"gain is maximal at the bracket edge ({ws[i]:.6g})")
    interior = (g[1:-1] > g[:-2]) & (g[1:-1] >= g[2:]) & (g[1:-1] > 0.5 * g[i])
    if np.count_nonzero(interior) > 1:
        raise MultiplePeaks(f"{np.count_nonzero(interior)} local maxima above half the peak")

    def neg_gain(w):
        return -float(_gain(p, [w])[0])

    res = minimize_scalar(neg_gain, bounds=(ws[i - 1], ws[i + 1]), method="bounded",
                          options={"xatol": PEAK_XTOL})
    w_peak = float(res.x)
    g_max = -neg_gain(w_peak)
    if g_max < g[i]:
        w_peak, g_max = float(ws[i]), float(g[i])
    half = g_max / 2

    def excess(w):
        return -neg_gain(w) - half

    width = hi - lo
    left = _half_crossing(excess, w_peak, -1.0, width)
    right = _half_crossing(excess, w_peak, +1.0, width)
    fwhm = right - left
    return PeakMetrics(w_peak, g_max, fwhm, math.sqrt(g_max) * fwhm / 2, left, right)


def _half_crossing(excess, start: float, direction: float, limit: float) -> float:
    step = 1e-9
    inner = start
    while step <= limit:
        outer = start + direction * step
        if excess(outer) < 0:
            a, b = sorted((inner, outer))
            return brentq(excess, a, b, xtol=FWHM_XTOL, rtol=4 * np.finfo(float).eps)
        inner = outer
        step *= 1.5
    raise NoPeakInBracket("gain does not fall to half maximum near the peak")


def peak_bracket(center: float, bandwidth: float = 0.0) -> tuple[float, float]:
    """Search window around an expected center frequency."""
    half = max(0.05, 20 * abs(bandwidth))
    return center - half, center + half


def lorentzian_vs_numeric(
    j: float,
    kappa1: float,
    gamma: float,
    delta: float = DEFAULT_DELTA,
    kappa2: float = 0.0,
) -> LorentzianComparison:
    """Compare the analytic Lorentzian against a direct peak search at ``G = G1 - delta``.

    With ``kappa2 > 0`` the closed forms do not apply; the analytic block is
    omitted and only the numeric metrics are returned.
    """
    fit = lorentzian_params(j, kappa1, gamma, delta)
    g = boundary_g1(j, kappa1, gamma).g_crit - delta
    if g < 0:
        raise ParamError("delta exceeds G1")
    p = blue_sideband(j, kappa1, gamma, g).replace(kappa2=float(kappa2))
    center = -fit.sigma
    numeric = find_peak(p, peak_bracket(center, fit.bandwidth))
    if kappa2 != 0:
        return LorentzianComparison(None, numeric, None)
    return LorentzianComparison(fit, numeric, center)


def compare_params(p: SystemParams, bracket: tuple[float, float] | None = None) -> LorentzianComparison:
    """Lorentzian comparison for an explicit parameter set.

    The analytic block is included only on the blue sideband with a lossless
    auxiliary cavity and ``G < G1``; ``delta`` is then ``G1 - G``.
    """
    b1 = boundary_g1(p.coupling_j, p.kappa1, p.gamma)
    analytic_ok = (
        p.kappa2 == 0 and p.delta1 == 1.0 and p.delta2 == -1.0 and p.coupling_g < b1.g_crit
    )
    fit = None
    if analytic_ok:
        fit = lorentzian_params(p.coupling_j, p.kappa1, p.gamma, b1.g_crit - p.coupling_g)
    if bracket is None:
        bracket = peak_bracket(-b1.omega_crit, fit.bandwidth if fit else 0.0)
    numeric = find_peak(p, bracket)
    return LorentzianComparison(fit, numeric, -b1.omega_crit if fit else None)
