"""Dynamical stability of the linearized amplifier.

Two independent routes decide stability: the eigenvalues of ``M`` and the
Routh-Hurwitz test on its characteristic polynomial, which is expanded with
the Faddeev-LeVerrier recursion so that it never touches an eigensolver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import partial

import numpy as np

from .errors import ComputeError, EigenSolverFailure
from .grid import SweepGrid, make_axis, ordered_map
from .model import SystemParams, build_drift_matrix

#: half-width of the marginal band on the largest real eigenvalue part
MARGINAL_TOL = 1e-9
#: relative size below which a Routh first-column entry counts as zero
ROUTH_ZERO_TOL = 1e-9


class Verdict(str, Enum):
    STABLE = "stable"
    MARGINAL = "marginal"
    UNSTABLE = "unstable"


class RouthVerdict(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    DEGENERATE = "degenerate"


# numeric encoding of Verdict inside a SweepGrid
VERDICT_CODES = {Verdict.STABLE: -1.0, Verdict.MARGINAL: 0.0, Verdict.UNSTABLE: 1.0}

_AGREES = {
    Verdict.STABLE: RouthVerdict.STABLE,
    Verdict.UNSTABLE: RouthVerdict.UNSTABLE,
    Verdict.MARGINAL: RouthVerdict.DEGENERATE,
}


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray
    max_real_part: float
    verdict: Verdict
    routh_verdict: RouthVerdict
    hurwitz_consistent: bool

    @property
    def is_stable(self) -> bool:
        return self.verdict is Verdict.STABLE


@dataclass(frozen=True)
class BoundaryPoint:
    g_crit: float
    omega_crit: float
    branch: str  # "G1" or "G2"


def classify(max_real_part: float, tol: float = MARGINAL_TOL) -> Verdict:
    if max_real_part < -tol:
        return Verdict.STABLE
    if max_real_part <= tol:
        return Verdict.MARGINAL
    return Verdict.UNSTABLE


def characteristic_polynomial(p: SystemParams) -> np.ndarray:
    """Coefficients of ``det(lambda I - M)``, highest power first, leading 1.

    The conjugate-pair structure of ``M`` makes every coefficient real; the
    imaginary residue is checked and discarded.
    """
    return _charpoly(build_drift_matrix(p))


def _charpoly(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    coeffs = [1.0 + 0j]
    Mk = np.zeros_like(A)
    eye = np.eye(n)
    for k in range(1, n + 1):
        Mk = A @ Mk + coeffs[-1] * eye
        coeffs.append(-np.trace(A @ Mk) / k)
    coeffs = np.array(coeffs)
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    if np.max(np.abs(coeffs.imag)) > 1e-10 * scale:
        raise ComputeError("characteristic polynomial has non-real coefficients")
    return coeffs.real.copy()


def routh_array(poly) -> list[np.ndarray]:
    """Routh table rows, stopping at the first row with a (near-)zero pivot.

    Returned rows are normalized so that the leading coefficient is positive.
    """
    c = np.asarray(poly, dtype=float)
    if c[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    if c[0] < 0:
        c = -c
    n = len(c) - 1
    width = n // 2 + 1
    first = np.zeros(width)
    second = np.zeros(width)
    first[: len(c[0::2])] = c[0::2]
    second[: len(c[1::2])] = c[1::2]
    rows = [first, second]
    for _ in range(n - 1):
        a, b = rows[-2], rows[-1]
        if b[0] == 0:
            break
        new = np.zeros(width)
        for j in range(width - 1):
            new[j] = (b[0] * a[j + 1] - a[0] * b[j + 1]) / b[0]
        # snap the pivot to zero when it is lost in cancellation
        cancel_scale = (abs(b[0] * a[1]) + abs(a[0] * b[1])) / abs(b[0])
        if abs(new[0]) <= ROUTH_ZERO_TOL * cancel_scale:
            new[0] = 0.0
        rows.append(new)
    return rows


def routh_hurwitz(poly) -> RouthVerdict:
    """Stable iff every entry of the Routh first column is strictly positive.

    A first-column entry that vanishes (relative to the cancellation in
    computing it) marks a boundary case and yields ``DEGENERATE``; no
    epsilon substitution is attempted.
    """
    rows = routh_array(poly)
    n = len(poly) - 1
    column = [row[0] for row in rows]
    if len(column) < n + 1 or any(x == 0 for x in column):
        return RouthVerdict.DEGENERATE
    if all(x > 0 for x in column):
        return RouthVerdict.STABLE
    return RouthVerdict.UNSTABLE


def eigen_spectrum(p: SystemParams) -> StabilityReport:
    M = build_drift_matrix(p)
    try:
        lam, vecs = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverFailure(str(exc)) from exc
    resid = np.linalg.norm(M @ vecs - vecs * lam, axis=0)
    if not np.all(resid <= 1e-10 * np.linalg.norm(M, 2)):
        raise EigenSolverFailure(f"eigenpair residual {resid.max():.3g} too large")
    max_re = float(lam.real.max())
    verdict = classify(max_re)
    routh = routh_hurwitz(_charpoly(M))
    return StabilityReport(lam, max_re, verdict, routh, _AGREES[verdict] is routh)


def is_stable(p: SystemParams) -> bool:
    return float(np.linalg.eigvals(build_drift_matrix(p)).real.max()) < -MARGINAL_TOL


def boundary_g1(j: float, kappa1: float, gamma: float) -> BoundaryPoint:
    """First instability boundary (blue sideband, lossless auxiliary cavity)."""
    wm = 1.0
    s = gamma + kappa1
    g = (
        math.sqrt(gamma * kappa1)
        * math.hypot(4 * j**2 + gamma**2 + gamma * kappa1, 4 * wm * s)
        / (8 * s * wm)
    )
    return BoundaryPoint(g, math.sqrt(j**2 * gamma / s + wm**2), "G1")


def boundary_g2(j: float, kappa1: float, gamma: float) -> BoundaryPoint:
    """Second root-crossing boundary; reported only, never used as a stability gate."""
    wm = 1.0
    g = (
        math.sqrt(kappa1)
        * math.hypot(4 * j**2 + gamma**2 + gamma * kappa1, 4 * gamma * wm)
        / (8 * math.sqrt(gamma) * wm)
    )
    return BoundaryPoint(g, math.sqrt(j**2 + gamma * kappa1 / 4 + wm**2), "G2")


def blue_sideband(j: float, kappa1: float, gamma: float, g: float) -> SystemParams:
    """Parameters with ``delta1 = omega_m``, ``delta2 = -omega_m`` and ``kappa2 = 0``."""
    return SystemParams(1.0, -1.0, j, g, kappa1, 0.0, gamma)


def _verdict_row(g: float, j: float, kappa1: float, gammas) -> list[tuple[float, str]]:
    out = []
    for gamma in gammas:
        try:
            report = eigen_spectrum(blue_sideband(j, kappa1, gamma, g))
        except EigenSolverFailure:
            out.append((math.nan, "eig_failure"))
            continue
        out.append((VERDICT_CODES[report.verdict], ""))
    return out


def stability_map(j: float, kappa1: float, gamma_range, g_range, jobs: int = 1) -> SweepGrid:
    """Eigenvalue verdict over the (gamma, G) plane.

    Cell values encode the verdict as -1 (stable), 0 (marginal), +1 (unstable).
    """
    gammas = make_axis(gamma_range, "gamma grid")
    gs = make_axis(g_range, "g grid")
    rows = ordered_map(partial(_verdict_row, j=j, kappa1=kappa1, gammas=gammas), gs, jobs)
    values = np.array([[v for v, _ in row] for row in rows], dtype=float)
    flags = np.array([[f for _, f in row] for row in rows], dtype=object)
    return SweepGrid("gamma", gammas, "g", gs, values, flags.astype(str), "verdict")


def verdict_name(code: float) -> str:
    for verdict, value in VERDICT_CODES.items():
        if code == value:
            return verdict.value
    return "invalid"
