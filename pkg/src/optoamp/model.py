"""Linearized two-cavity optomechanical model.

All frequencies and rates are in units of the mechanical frequency, so
``omega_m`` is pinned to 1. The fluctuation vector is ordered as

    (a1, a1^dag, a2, a2^dag, b, b^dag)

and the dynamics read ``du/dt = M u + L u_in``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeValue, NonPositiveRate, ParamError, UnknownParam

# JSON key -> dataclass field
JSON_KEYS = {
    "delta1": "delta1",
    "delta2": "delta2",
    "j": "coupling_j",
    "g": "coupling_g",
    "kappa1": "kappa1",
    "kappa2": "kappa2",
    "gamma": "gamma",
}

#: parameters that may be swept over a grid
SWEEPABLE = ("j", "kappa1", "kappa2", "gamma", "g")

# sign matrix K of the bosonic commutators in the doubled basis
COMMUTATOR_SIGNS = np.diag([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])


@dataclass(frozen=True)
class SystemParams:
    """Effective linearized parameters, in units of ``omega_m``.

    ``coupling_g`` is the pump-enhanced optomechanical coupling and is taken
    as a real, nonnegative amplitude.
    """

    delta1: float
    delta2: float
    coupling_j: float
    coupling_g: float
    kappa1: float
    kappa2: float
    gamma: float
    omega_m: float = 1.0

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def with_param(self, name: str, value: float) -> "SystemParams":
        """Return a copy with one parameter changed, addressed by its JSON key."""
        try:
            field = JSON_KEYS[name]
        except KeyError:
            raise UnknownParam(f"unknown parameter {name!r}") from None
        return dataclasses.replace(self, **{field: float(value)})

    def to_dict(self) -> dict:
        return {key: float(getattr(self, field)) for key, field in JSON_KEYS.items()}

    @classmethod
    def from_dict(cls, data: dict) -> "SystemParams":
        """Build from the flat JSON mapping and validate.

        All seven keys are required; extra keys are rejected.
        """
        extra = set(data) - set(JSON_KEYS)
        if extra:
            raise ParamError(f"unknown parameter keys: {sorted(extra)}")
        missing = set(JSON_KEYS) - set(data)
        if missing:
            raise ParamError(f"missing parameter keys: {sorted(missing)}")
        values = {}
        for key, field in JSON_KEYS.items():
            value = data[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ParamError(f"parameter {key!r} must be a number, got {value!r}")
            values[field] = float(value)
        return validate_params(cls(**values))


def validate_params(raw: SystemParams) -> SystemParams:
    """Return ``raw`` unchanged if it satisfies every parameter invariant.

    Raises
    ------
    NonPositiveRate
        ``kappa1 <= 0`` or ``gamma <= 0``.
    NegativeValue
        ``kappa2``, ``coupling_j`` or ``coupling_g`` is negative.
    ParamError
        Non-finite values, or ``omega_m`` different from 1.
    """
    for field in dataclasses.fields(raw):
        value = getattr(raw, field.name)
        if not math.isfinite(value):
            raise ParamError(f"{field.name} must be finite, got {value!r}")
    if raw.omega_m != 1.0:
        raise ParamError(f"omega_m is the unit of frequency and must be 1, got {raw.omega_m!r}")
    for name in ("kappa1", "gamma"):
        if getattr(raw, name) <= 0:
            raise NonPositiveRate(f"{name} must be > 0, got {getattr(raw, name)!r}")
    for name in ("kappa2", "coupling_j", "coupling_g"):
        if getattr(raw, name) < 0:
            raise NegativeValue(f"{name} must be >= 0, got {getattr(raw, name)!r}")
    return raw


def build_drift_matrix(p: SystemParams) -> np.ndarray:
    """Drift matrix ``M`` (6x6 complex) of the linearized Langevin equations."""
    d1, d2, J, G = p.delta1, p.delta2, p.coupling_j, p.coupling_g
    k1, k2, gm, wm = p.kappa1, p.kappa2, p.gamma, p.omega_m
    M = np.zeros((6, 6), dtype=complex)
    # cavity 1
    M[0, 0] = 1j * d1 - k1 / 2
    M[0, 2] = -1j * J
    M[0, 4] = M[0, 5] = 1j * G
    M[1, 1] = -1j * d1 - k1 / 2
    M[1, 3] = 1j * J
    M[1, 4] = M[1, 5] = -1j * G
    # cavity 2
    M[2, 0] = -1j * J
    M[2, 2] = 1j * d2 - k2 / 2
    M[3, 1] = 1j * J
    M[3, 3] = -1j * d2 - k2 / 2
    # mechanics
    M[4, 0] = M[4, 1] = 1j * G
    M[4, 4] = -1j * wm - gm / 2
    M[5, 0] = M[5, 1] = -1j * G
    M[5, 5] = 1j * wm - gm / 2
    return M


def build_noise_matrix(p: SystemParams) -> np.ndarray:
    """Diagonal input coupling ``L``: square roots of the decay rate of each slot."""
    return np.diag(np.sqrt(decay_rates(p)))


def decay_rates(p: SystemParams) -> np.ndarray:
    return np.array([p.kappa1, p.kappa1, p.kappa2, p.kappa2, p.gamma, p.gamma])


def reachable_basis(M: np.ndarray, B: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the smallest ``M``-invariant subspace containing ``range(B)``.

    Modes outside it are neither driven by nor visible through the ports
    spanned by ``B`` (e.g. a decoupled, lossless auxiliary cavity).
    """
    scale = max(np.linalg.norm(M, 2), 1.0)
    basis: list[np.ndarray] = []

    def add(v):
        for _ in range(2):  # re-orthogonalize once for stability
            for q in basis:
                v = v - (q.conj() @ v) * q
        norm = np.linalg.norm(v)
        if norm > tol * scale:
            basis.append(v / norm)
            return True
        return False

    queue = [B[:, k].astype(complex) for k in range(B.shape[1])]
    queue = [v / np.linalg.norm(v) for v in queue if np.linalg.norm(v) > 0]
    while queue:
        v = queue.pop(0)
        if add(v):
            queue.append(M @ basis[-1])
    if not basis:
        return np.zeros((M.shape[0], 0), dtype=complex)
    return np.stack(basis, axis=1)
