"""Reference operating points of the amplifier.

Couplings are quoted to four decimals, and the gain close to ``G1`` is
sensitive to that rounding: a shift of 3e-5 in G changes the bandwidth by
a third. ``resolved`` therefore keeps the rounded coupling while
``unresolved`` uses ``G1 - 1e-4`` at full precision.
"""

from __future__ import annotations

from .metrics import DEFAULT_DELTA
from .model import SystemParams
from .stability import boundary_g1


def resolved() -> SystemParams:
    """Resolved sideband: J=1, kappa1=gamma=0.1, lossless auxiliary cavity, G=0.2561."""
    return SystemParams(1.0, -1.0, 1.0, 0.2561, 0.1, 0.0, 0.1)


def resolved_lossy() -> SystemParams:
    """As :func:`resolved` with ``kappa2 = 0.01``."""
    return resolved().replace(kappa2=0.01)


def unresolved() -> SystemParams:
    """Unresolved sideband: kappa1=2, J=2, gamma=0.6, ``G = G1 - 1e-4`` exactly."""
    g = boundary_g1(2.0, 2.0, 0.6).g_crit - DEFAULT_DELTA
    return SystemParams(1.0, -1.0, 2.0, g, 2.0, 0.0, 0.6)


def unresolved_lossy() -> SystemParams:
    """Strongly lossy auxiliary cavity: kappa2=0.5, kappa1=3, J=1.49, gamma=0.2, G=0.5568."""
    return SystemParams(1.0, -1.0, 1.49, 0.5568, 3.0, 0.5, 0.2)


PRESETS = {
    "resolved": resolved,
    "resolved_lossy": resolved_lossy,
    "unresolved": unresolved,
    "unresolved_lossy": unresolved_lossy,
}
