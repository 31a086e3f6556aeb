"""Frequency-domain input-output scattering.

With the Fourier convention ``u(t) ~ u[omega] exp(-i omega t)`` the output
fields are ``u_out[omega] = U(omega) u_in[omega]`` with

    U(omega) = 1 + L (i omega + M)^{-1} L.

The first row of ``U`` holds the six coefficients A..F of the cavity-1
output. ``i omega + M`` is never inverted explicitly; each frequency is a
partial-pivoting solve against ``L``. The solve runs on the invariant
subspace reachable from the ports, which leaves ``U`` unchanged but keeps
modes with no port coupling from making the system singular.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DenominatorUnderflow, EmptyGrid, Kappa2NotZero, NearSingular, ParamError
from .model import COMMUTATOR_SIGNS, SystemParams, build_drift_matrix, build_noise_matrix, reachable_basis

#: condition number of ``i omega + M`` above which a result is void
COND_LIMIT = 1e12
#: allowed multiply-back residual, relative to ``||L||``
RESIDUAL_LIMIT = 1e-10

COEFFICIENT_NAMES = ("a", "b", "c", "d", "e", "f")


@dataclass(frozen=True)
class ScatteringMatrix:
    omega: float
    entries: np.ndarray
    cond: float
    residual: float


@dataclass(frozen=True)
class ScatteringCoefficients:
    """Coefficients of ``a1_in, a1_in^dag, a2_in, a2_in^dag, b_in, b_in^dag`` in ``a1_out``."""

    omega: float
    a: complex
    b: complex
    c: complex
    d: complex
    e: complex
    f: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d, self.e, self.f])

    def ratios(self) -> dict:
        """``|x|/|a|`` for x in b..f."""
        scale = abs(self.a)
        return {name: abs(getattr(self, name)) / scale for name in COEFFICIENT_NAMES[1:]}

    def commutator_sum(self) -> float:
        """``|a|^2 - |b|^2 + |c|^2 - |d|^2 + |e|^2 - |f|^2``; equals 1 for a valid row."""
        mags = np.abs(self.as_array()) ** 2
        return float(mags @ np.diag(COMMUTATOR_SIGNS))


@dataclass(frozen=True)
class ClosedFormGainTerms:
    alpha: complex
    beta: complex
    rho: complex
    numerator: complex


@dataclass(frozen=True)
class GainSpectrum:
    """Power gain on a frequency grid; ``flagged`` marks near-singular points (gain is NaN there)."""

    omega: np.ndarray
    gain: np.ndarray
    flagged: np.ndarray

    def peak(self) -> tuple[float, float]:
        i = int(np.nanargmax(self.gain))
        return float(self.omega[i]), float(self.gain[i])


@dataclass(frozen=True)
class CoefficientSpectrum:
    omega: np.ndarray
    coefficients: np.ndarray  # (n, 6) complex, rows are a..f
    flagged: np.ndarray

    def ratios(self) -> np.ndarray:
        """``(n, 5)`` array of ``|B|/|A| .. |F|/|A|``."""
        mags = np.abs(self.coefficients)
        return mags[:, 1:] / mags[:, :1]


def scattering_matrices(p: SystemParams, omegas) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized ``U`` over an array of frequencies.

    Returns
    -------
    U : (n, 6, 6) complex
    cond : (n,) 2-norm condition numbers of ``i omega + M`` on the port subspace
    residual : (n,) ``||(i omega + M) X - L|| / ||L||``
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    M = build_drift_matrix(p)
    L = build_noise_matrix(p)
    Q = reachable_basis(M, L)
    Mr = Q.conj().T @ M @ Q
    Lr = Q.conj().T @ L
    A = 1j * omegas[:, None, None] * np.eye(Q.shape[1]) + Mr
    sv = np.linalg.svd(A, compute_uv=False)
    with np.errstate(divide="ignore"):
        cond = sv[:, 0] / sv[:, -1]
    # exactly singular points still need a finite placeholder to keep the batch going
    bad = ~(sv[:, -1] > 0)
    A[bad] += np.eye(Q.shape[1])
    X = np.linalg.solve(A, np.broadcast_to(Lr, (len(omegas), *Lr.shape)))
    U = np.eye(6) + (L @ Q) @ X
    residual = np.linalg.norm(A @ X - Lr, axis=(1, 2)) / np.linalg.norm(L)
    cond[bad] = np.inf
    return U, cond, residual


def scattering_matrix(p: SystemParams, omega: float) -> ScatteringMatrix:
    """``U(omega)`` at a single frequency.

    Raises :class:`NearSingular` if ``cond(i omega + M) > 1e12`` or the solve
    fails its multiply-back check.
    """
    U, cond, residual = scattering_matrices(p, [omega])
    if not cond[0] <= COND_LIMIT or not residual[0] <= RESIDUAL_LIMIT:
        raise NearSingular(omega, float(cond[0]))
    return ScatteringMatrix(float(omega), U[0], float(cond[0]), float(residual[0]))


def coefficients(p: SystemParams, omega: float) -> ScatteringCoefficients:
    row = scattering_matrix(p, omega).entries[0]
    return ScatteringCoefficients(float(omega), *(complex(x) for x in row))


def power_gain(p: SystemParams, omega: float) -> float:
    return abs(coefficients(p, omega).a) ** 2


def closed_form_terms(p: SystemParams, omega: float) -> ClosedFormGainTerms:
    """Intermediate terms of the analytic power gain for ``kappa2 = 0``."""
    d1, d2, J, G = p.delta1, p.delta2, p.coupling_j, p.coupling_g
    k1, gm, wm = p.kappa1, p.gamma, p.omega_m
    w = omega
    alpha = 4 * wm**2 + (gm - 2j * w) ** 2
    beta = d1 * (d2**2 - w**2) - d2 * J**2
    numerator = 2j * k1 * (-d2 - w) * (
        (-2 * J**2 + (-d2 + w) * (-2 * d1 + 1j * k1 + 2 * w)) * alpha
        - 16 * G**2 * wm * (-d2 + w)
    )
    rho = (
        alpha
        * (
            4 * J**4
            + (d2**2 - w**2) * ((k1 - 2j * w) ** 2 + 4 * d1**2)
            - 4j * J**2 * w * (k1 - 2j * w)
            - 8 * d1 * d2 * J**2
        )
        + 64 * G**2 * wm * beta
    )
    return ClosedFormGainTerms(complex(alpha), complex(beta), complex(rho), complex(numerator))


def closed_form_gain(p: SystemParams, omega: float) -> float:
    """Analytic ``|A(omega)|^2`` valid for a lossless auxiliary cavity."""
    if p.kappa2 != 0:
        raise Kappa2NotZero(f"closed-form gain requires kappa2 = 0, got {p.kappa2!r}")
    t = closed_form_terms(p, omega)
    if abs(t.rho) < 1e-300:
        raise DenominatorUnderflow(f"|rho| = {abs(t.rho):.3g} at omega={omega!r}")
    return abs(1 + t.numerator / t.rho) ** 2


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise EmptyGrid("frequency grid is empty")
    if not np.all(np.isfinite(grid)):
        raise ParamError("frequency grid contains non-finite values")
    if np.any(np.diff(grid) < 0):
        raise ParamError("frequency grid must be sorted")
    return grid


def coefficient_spectrum(p: SystemParams, grid) -> CoefficientSpectrum:
    grid = _check_grid(grid)
    U, cond, residual = scattering_matrices(p, grid)
    flagged = ~((cond <= COND_LIMIT) & (residual <= RESIDUAL_LIMIT))
    coeffs = U[:, 0, :].copy()
    coeffs[flagged] = np.nan
    return CoefficientSpectrum(grid, coeffs, flagged)


def gain_spectrum(p: SystemParams, grid) -> GainSpectrum:
    """Power gain over a sorted grid; near-singular points are flagged, not fatal."""
    spec = coefficient_spectrum(p, grid)
    return GainSpectrum(spec.omega, np.abs(spec.coefficients[:, 0]) ** 2, spec.flagged)


def added_noise(p: SystemParams, omega: float, n_eff: float = 0.0) -> float:
    """Added noise quanta ``(|F|^2/|A|^2) (n_eff + 1/2)`` referred to the input."""
    if n_eff < 0:
        raise ParamError(f"n_eff must be >= 0, got {n_eff!r}")
    co = coefficients(p, omega)
    return abs(co.f) ** 2 / abs(co.a) ** 2 * (n_eff + 0.5)


def symplectic_defect(p: SystemParams, omega: float) -> float:
    """Max-abs entry of ``U K U^dag - K``; zero when commutators are preserved."""
    U = scattering_matrix(p, omega).entries
    K = COMMUTATOR_SIGNS
    return float(np.max(np.abs(U @ K @ U.conj().T - K)))
