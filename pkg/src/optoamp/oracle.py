"""Time-domain check of the scattering coefficients.

The linear Langevin equations are integrated with a classical coherent
probe ``amplitude * exp(-i omega t)`` in the ``a1_in`` slot (and its
conjugate in ``a1_in^dag``). The output ``a1_out = a1_in - sqrt(kappa1) a1``
is fitted with the two tones ``exp(-i omega t)`` and ``exp(+i omega t)``.
Their coefficients are ``A(omega)`` and ``B(-omega)`` respectively.

Close to the instability the slowest mode decays over ~1/|Re lambda|,
far longer than is practical to integrate. The periodic steady state is
therefore found by shooting: one period of the monodromy map ``Phi`` and of
the forced response ``r`` are integrated, and ``u0 = (1 - Phi)^{-1} r``.
Only the integrator touches ``M``; the frequency-domain resolvent is never
used.

Dynamics are restricted to the smallest invariant subspace of ``M`` that
the port-1 probe reaches, so undriven lossless modes (e.g. a decoupled,
undamped auxiliary cavity) do not spoil the shooting step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NearSingular, NotStable, ParamError, StepTooLarge
from .grid import ordered_map
from .model import SystemParams, build_drift_matrix, reachable_basis
from .scattering import coefficients

RTOL = 1e-10
ATOL = 1e-10
SAMPLES_PER_PERIOD = 64
DEFAULT_MEASURE_PERIODS = 4


@dataclass(frozen=True)
class ProbeResult:
    omega: float
    a_est: complex
    b_est: complex
    settle_time: float
    residual: float


@dataclass
class DefectReport:
    entries: list = field(default_factory=list)

    @property
    def max_defect(self) -> float:
        vals = [e["defect"] for e in self.entries if e["defect"] is not None]
        return max(vals) if vals else math.nan

    @property
    def mean_defect(self) -> float:
        vals = [e["defect"] for e in self.entries if e["defect"] is not None]
        return float(np.mean(vals)) if vals else math.nan

    def to_dict(self) -> dict:
        def cplx(z):
            return None if z is None else [z.real, z.imag]

        return {
            "entries": [
                {
                    "omega": e["omega"],
                    "a_fd": cplx(e["a_fd"]),
                    "a_td": cplx(e["a_td"]),
                    "b_fd": cplx(e["b_fd"]),
                    "b_td": cplx(e["b_td"]),
                    "defect": e["defect"],
                    "skipped": e["skipped"],
                }
                for e in self.entries
            ],
            "summary": {
                "max_defect": self.max_defect,
                "mean_defect": self.mean_defect,
                "n_compared": sum(e["defect"] is not None for e in self.entries),
                "n_skipped": sum(bool(e["skipped"]) for e in self.entries),
            },
        }


def max_step_bound(p: SystemParams, omega: float) -> float:
    """Largest admissible step: 1% of the fastest time scale."""
    fastest = max(abs(p.delta1), abs(p.delta2), p.kappa1, p.kappa2, p.gamma,
                  p.coupling_j, p.coupling_g, p.omega_m, abs(omega))
    return 0.01 / fastest


def probe_subspace(p: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """``(Q, M_r)``: reachable basis for the port-1 probe and the reduced drift matrix."""
    M = build_drift_matrix(p)
    B = np.zeros((6, 2))
    B[0, 0] = B[1, 1] = 1.0
    Q = reachable_basis(M, B)
    return Q, Q.conj().T @ M @ Q


def _integrate(rhs, t_span, y0, max_step, atol, t_eval=None):
    sol = solve_ivp(rhs, t_span, y0, method="RK45", rtol=RTOL, atol=atol,
                    max_step=max_step, t_eval=t_eval)
    if not sol.success:
        raise StepTooLarge(f"integration failed: {sol.message}")
    return sol


def free_evolution(p: SystemParams, u0, times) -> np.ndarray:
    """Unforced trajectory ``u(t)`` sampled at ``times`` (shape ``(len(times), 6)``)."""
    M = build_drift_matrix(p)
    times = np.asarray(times, dtype=float)
    sol = _integrate(lambda t, u: M @ u, (times[0], times[-1]), np.asarray(u0, dtype=complex),
                     max_step_bound(p, 0.0), ATOL, t_eval=times)
    return sol.y.T


def _monodromy(M: np.ndarray, period: float, max_step: float) -> np.ndarray:
    n = M.shape[0]

    def rhs(t, y):
        return (M @ y.reshape(n, n)).ravel()

    sol = _integrate(rhs, (0.0, period), np.eye(n, dtype=complex).ravel(), max_step, ATOL)
    return sol.y[:, -1].reshape(n, n)


def _steady_output(Q, Mr, sqrt_k1, phi, omega, amplitude, period, settle, measure, max_step):
    """Port-1 output on the measurement window, starting from the periodic state."""
    # input enters through the a1 and a1^dag slots only
    in_minus = sqrt_k1 * Q[0].conj()
    in_plus = sqrt_k1 * Q[1].conj()

    def rhs(t, z):
        return (Mr @ z + in_minus * (amplitude * np.exp(-1j * omega * t))
                + in_plus * (np.conj(amplitude) * np.exp(1j * omega * t)))

    n = Mr.shape[0]
    atol = ATOL * abs(amplitude)
    forced = _integrate(rhs, (0.0, period), np.zeros(n, dtype=complex), max_step, atol).y[:, -1]
    z0 = np.linalg.solve(np.eye(n) - phi, forced)
    n_samples = max(8, int(round(SAMPLES_PER_PERIOD * measure / period)))
    times = settle + np.linspace(0.0, measure, n_samples, endpoint=False)
    sol = _integrate(rhs, (0.0, settle + measure), z0, max_step, atol, t_eval=times)
    a1 = Q[0] @ sol.y
    out = amplitude * np.exp(-1j * omega * times) - sqrt_k1 * a1
    return times, out


def time_domain_probe(
    p: SystemParams,
    omega: float,
    amplitude: complex = 1.0,
    settle: float | None = None,
    measure: float | None = None,
    dt: float | None = None,
) -> ProbeResult:
    """Estimate ``A(omega)`` and ``B(-omega)`` by integrating the driven dynamics.

    Parameters
    ----------
    p : SystemParams
        The dynamics reachable from port 1 must be strictly stable.
    omega : float
        Probe frequency.
    amplitude : complex
        Probe amplitude in the ``a1_in`` slot.
    settle : float, optional
        Time integrated from the periodic steady state before measuring.
        Defaults to one probe period.
    measure : float, optional
        Length of the fitting window. Defaults to four probe periods.
    dt : float, optional
        Maximum integrator step; must not exceed :func:`max_step_bound`.

    Returns
    -------
    ProbeResult
        ``a_est`` is the ``exp(-i omega t)`` coefficient over ``amplitude``;
        ``b_est`` the ``exp(+i omega t)`` coefficient over ``conj(amplitude)``.

    Raises
    ------
    NotStable
        The probed subspace has an eigenvalue with nonnegative real part.
    StepTooLarge
        ``dt`` violates the step bound, or the integrated monodromy map grows.
    """
    if amplitude == 0:
        raise ParamError("probe amplitude must be nonzero")
    Q, Mr = probe_subspace(p)
    lam = np.linalg.eigvals(Mr)
    if lam.real.max() >= 0:
        raise NotStable(f"max Re(lambda) = {lam.real.max():.3g} >= 0 on the probed subspace")
    bound = max_step_bound(p, omega)
    if dt is None:
        dt = bound
    elif dt > bound * (1 + 1e-12):
        raise StepTooLarge(f"dt = {dt:.3g} exceeds the step bound {bound:.3g}")

    period = 2 * math.pi / abs(omega) if omega != 0 else 2 * math.pi
    settle = period if settle is None else float(settle)
    measure = DEFAULT_MEASURE_PERIODS * period if measure is None else float(measure)
    if settle < 0 or measure <= 0:
        raise ParamError("settle must be >= 0 and measure > 0")

    phi = _monodromy(Mr, period, dt)
    if np.max(np.abs(np.linalg.eigvals(phi))) >= 1:
        raise StepTooLarge("integrated monodromy map is not contracting for a stable system")
    run = partial(_steady_output, Q, Mr, math.sqrt(p.kappa1), phi, omega, period=period, settle=settle,
                  measure=measure, max_step=dt)

    if omega != 0:
        times, out = run(amplitude)
        basis = np.stack([np.exp(-1j * omega * times), np.exp(1j * omega * times)], axis=1)
        coef = np.linalg.lstsq(basis, out, rcond=None)[0]
        residual = np.linalg.norm(out - basis @ coef) / np.linalg.norm(out)
        return ProbeResult(float(omega), coef[0] / amplitude, coef[1] / np.conj(amplitude),
                           settle, float(residual))

    # at omega = 0 both tones coincide; separate them with a quadrature-shifted second run
    c = []
    residual = 0.0
    for amp in (amplitude, 1j * amplitude):
        _, out = run(amp)
        mean = out.mean()
        residual = max(residual, float(np.linalg.norm(out - mean) / np.linalg.norm(out)))
        c.append(mean)
    a_est = (c[0] - 1j * c[1]) / (2 * amplitude)
    b_est = (c[0] + 1j * c[1]) / (2 * np.conj(amplitude))
    return ProbeResult(0.0, complex(a_est), complex(b_est), settle, residual)


def _compare_one(omega, p, probe_kwargs):
    try:
        a_fd = coefficients(p, omega).a
        b_fd = coefficients(p, -omega).b
    except NearSingular:
        return {"omega": float(omega), "a_fd": None, "a_td": None, "b_fd": None, "b_td": None,
                "defect": None, "skipped": "near_singular"}
    res = time_domain_probe(p, omega, **probe_kwargs)
    defect = max(abs(res.a_est - a_fd), abs(res.b_est - b_fd))
    return {"omega": float(omega), "a_fd": a_fd, "a_td": complex(res.a_est), "b_fd": b_fd,
            "b_td": complex(res.b_est), "defect": float(defect), "skipped": ""}


def compare_scattering(p: SystemParams, omegas, jobs: int = 1, **probe_kwargs) -> DefectReport:
    """Time-domain vs frequency-domain coefficients at each probe frequency.

    The conjugate tone is compared with ``B(-omega)``. Frequencies where the
    frequency-domain solve is near-singular are skipped and marked.
    """
    if np.linalg.eigvals(probe_subspace(p)[1]).real.max() >= 0:
        raise NotStable("time-domain comparison requires a stable parameter set")
    worker = partial(_compare_one, p=p, probe_kwargs=probe_kwargs)
    return DefectReport(ordered_map(worker, [float(w) for w in omegas], jobs))
