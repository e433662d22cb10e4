"""Landau-Ginzburg constitutive model for a one-dimensional SMA rod.

Units are g, cm, ms and K throughout.  The local free energy density is

    F_l(eps, theta) = k1 (theta - theta1) / 2 * eps**2 - k2 / 4 * eps**4 + k3 / 6 * eps**6

whose strain derivative is the elastic stress.  Below the transformation
temperature F_l is a double well (martensite plus/minus); well above it only
the austenite minimum at ``eps = 0`` survives.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "MaterialParams",
    "StationaryPoint",
    "landau_energy",
    "stress",
    "effective_stress",
    "stress_slope",
    "stationary_strains",
    "transition_temperature",
]


@dataclass(frozen=True)
class MaterialParams:
    """Material constants.  Defaults are the Au23Cu30Zn47 alloy."""

    rho: float = 11.1          # g/cm^3
    k1: float = 480.0          # g/(ms^2 cm K)
    k2: float = 6.0e6          # g/(ms^2 cm)
    k3: float = 4.5e8          # g/(ms^2 cm)
    theta1: float = 208.0      # K
    cv: float = 3.1274         # g/(ms^2 cm K)
    kappa: float = 1.9e-2      # cm g/(ms^3 K)
    kg: float = 5.0            # g cm/ms^2
    nu: float = 10.0           # g/(ms cm)

    def __post_init__(self):
        bad = []
        for name, value in asdict(self).items():
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                bad.append(f"material.{name}: must be a finite number, got {value!r}")
            elif name in ("kg", "nu"):
                if value < 0:
                    bad.append(f"material.{name}: must be >= 0, got {value}")
            elif value <= 0:
                bad.append(f"material.{name}: must be > 0, got {value}")
        if bad:
            raise ConfigError("; ".join(bad))


def _check_theta(theta):
    if np.any(np.asarray(theta) <= 0):
        raise DomainError("temperature must be strictly positive")


def landau_energy(p: MaterialParams, strain, theta):
    """Local Landau free energy density, g/(ms^2 cm)."""
    _check_theta(theta)
    e2 = np.square(strain)
    return (0.5 * p.k1 * (theta - p.theta1) * e2
            - 0.25 * p.k2 * e2 * e2
            + p.k3 / 6.0 * e2 * e2 * e2)


def stress(p: MaterialParams, strain, theta):
    """Elastic stress ``dF_l/deps``."""
    _check_theta(theta)
    e2 = np.square(strain)
    return strain * (p.k1 * (theta - p.theta1) - p.k2 * e2 + p.k3 * e2 * e2)


def effective_stress(p: MaterialParams, strain, strain_rate, theta):
    """Elastic stress plus the viscous contribution ``nu * deps/dt``."""
    return stress(p, strain, theta) + p.nu * np.asarray(strain_rate)


def stress_slope(p: MaterialParams, strain, theta):
    """Isothermal tangent modulus ``d^2 F_l / deps^2``."""
    e2 = np.square(strain)
    return p.k1 * (theta - p.theta1) - 3.0 * p.k2 * e2 + 5.0 * p.k3 * e2 * e2


def transition_temperature(p: MaterialParams) -> float:
    """Temperature above which the nonzero wells disappear."""
    return p.theta1 + p.k2**2 / (4.0 * p.k1 * p.k3)


class StationaryPoint(NamedTuple):
    strain: float
    kind: str  # "minimum" or "maximum"


def _classify(p: MaterialParams, eps: float, theta: float) -> str:
    curvature = stress_slope(p, eps, theta)
    if curvature == 0.0:
        # Degenerate only at eps = 0 with theta = theta1; the quartic term decides.
        return "maximum" if p.k2 > 0 else "minimum"
    return "minimum" if curvature > 0 else "maximum"


def stationary_strains(p: MaterialParams, theta: float) -> list[StationaryPoint]:
    """All real zeros of the stress at fixed temperature, sorted ascending.

    The nonzero roots solve ``k3 z**2 - k2 z + k1 (theta - theta1) = 0`` for
    ``z = eps**2``; ``eps = 0`` is always stationary.

    >>> [round(s.strain, 6) for s in stationary_strains(MaterialParams(), 280.0)]
    [0.0]
    """
    _check_theta(theta)
    a, b, c = p.k3, -p.k2, p.k1 * (theta - p.theta1)
    disc = b * b - 4.0 * a * c
    zs = []
    if disc >= 0.0:
        root = math.sqrt(disc)
        # Stable quadratic formula; b < 0 so -b + root has no cancellation.
        q = 0.5 * (-b + root)
        zs = [q / a]
        if q != 0.0:
            zs.append(c / q)
    strains = {0.0}
    for z in zs:
        if z > 0.0:
            s = math.sqrt(z)
            strains.update((s, -s))
    return [StationaryPoint(e, _classify(p, e, theta)) for e in sorted(strains)]
