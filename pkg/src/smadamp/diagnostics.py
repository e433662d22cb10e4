"""Energy bookkeeping and phase/hysteresis post-processing."""

from __future__ import annotations

from dataclasses import asdict, dataclass
import numpy as np

from .grid import Grid
from .material import MaterialParams, landau_energy, stationary_strains
from .rod import BlockParams, RodState

__all__ = [
    "EnergyReport",
    "energy_report",
    "PHASE_PLUS",
    "PHASE_MINUS",
    "PHASE_AUSTENITE",
    "classify_phases",
    "switching_count",
    "loop_dissipation",
    "half_cycle_peaks",
]

PHASE_PLUS = "martensite-plus"
PHASE_MINUS = "martensite-minus"
PHASE_AUSTENITE = "austenite-like"

SWITCH_DEAD_BAND = 1e-4


@dataclass(frozen=True)
class EnergyReport:
    """Energy partition per unit cross-section (g/ms^2) at one time level.

    ``potential`` is the Landau-Ginzburg free energy plus the block spring,
    ``thermal`` is ``int cv theta dx`` and ``coupling`` is the entropic part
    ``-int theta dF_l/dtheta dx = -int k1 theta eps^2 / 2 dx`` that turns the
    free energy into internal energy.  ``total`` is the sum of the five
    energies and is the quantity conserved by the field equations when
    friction vanishes.
    """

    rod_kinetic: float
    block_kinetic: float
    potential: float
    thermal: float
    coupling: float
    avg_temperature: float
    total: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def energy_report(grid: Grid, p: MaterialParams, block: BlockParams,
                  state: RodState) -> EnergyReport:
    w = grid.quad_weights
    eps = grid.d1 @ state.u
    eps_x = grid.d1 @ eps
    rod_kinetic = float(w @ (0.5 * p.rho * state.v**2))
    block_kinetic = 0.5 * block.mass_per_area * float(state.v[-1]) ** 2
    potential = float(w @ (landau_energy(p, eps, state.theta) + 0.5 * p.kg * eps_x**2))
    potential += 0.5 * block.stiffness * float(state.u[-1]) ** 2
    thermal = float(w @ (p.cv * state.theta))
    coupling = float(w @ (-0.5 * p.k1 * state.theta * eps**2))
    avg_temperature = float(w @ state.theta) / grid.length
    total = rod_kinetic + block_kinetic + potential + thermal + coupling
    return EnergyReport(rod_kinetic, block_kinetic, potential, thermal, coupling,
                        avg_temperature, total)


def classify_phases(grid: Grid, p: MaterialParams, state: RodState) -> list[str]:
    """Label each node by comparing its strain with half the local well strain.

    Nodes whose temperature admits no nonzero well are austenite-like.
    """
    eps = grid.d1 @ state.u
    labels = []
    cache: dict[float, float | None] = {}
    for e, th in zip(eps, state.theta):
        th = float(th)
        if th not in cache:
            wells = [s.strain for s in stationary_strains(p, th)
                     if s.kind == "minimum" and s.strain > 0]
            cache[th] = max(wells) if wells else None
        well = cache[th]
        if well is None:
            labels.append(PHASE_AUSTENITE)
        elif e > 0.5 * well:
            labels.append(PHASE_PLUS)
        elif e < -0.5 * well:
            labels.append(PHASE_MINUS)
        else:
            labels.append(PHASE_AUSTENITE)
    return labels


def switching_count(trajectory, node_index: int | None = None,
                    dead_band: float = SWITCH_DEAD_BAND) -> int:
    """Count strain sign changes at one node, ignoring ``|eps| < dead_band``.

    Parameters
    ----------
    trajectory : Trajectory or sequence of float
        A trajectory from :func:`smadamp.integrator.run` (then ``node_index``
        selects the node) or a plain strain history.
    node_index : int, optional
        Required when ``trajectory`` is a ``Trajectory``.

    >>> switching_count([0.1, -0.1, 0.1])
    2
    """
    if hasattr(trajectory, "strain_history"):
        if node_index is None:
            raise ValueError("node_index is required for a Trajectory")
        strains = trajectory.strain_history(node_index)
    else:
        strains = trajectory
    if len(strains) == 0:
        raise ValueError("empty strain history")
    count = 0
    last = 0
    for e in strains:
        if abs(e) < dead_band:
            continue
        sign = 1 if e > 0 else -1
        if last and sign != last:
            count += 1
        last = sign
    return count


def loop_dissipation(path) -> float:
    """Closed-loop work integral ``oint sigma d eps`` by the trapezoid rule.

    ``path`` is a sequence of ``(strain, stress)`` pairs; the last point is
    joined back to the first.  Positive when the loop runs clockwise in the
    (strain, stress) plane, i.e. the loading branch lies above the
    unloading branch and the material absorbs work.
    """
    pts = np.asarray(path, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ValueError("path needs at least 3 (strain, stress) points")
    eps, sig = pts[:, 0], pts[:, 1]
    eps_next, sig_next = np.roll(eps, -1), np.roll(sig, -1)
    return float(np.sum(0.5 * (sig + sig_next) * (eps_next - eps)))


def half_cycle_peaks(signal) -> np.ndarray:
    """Peak ``|signal|`` within each run of constant sign.

    Exact zeros neither end nor start a run.  The last entry belongs to the
    run that is still open at the end of the signal.

    >>> half_cycle_peaks([1.0, 0.0, 2.0, -1.0]).tolist()
    [2.0, 1.0]
    """
    peaks = []
    current = 0.0
    sign = 0
    for s in np.asarray(signal, dtype=float):
        sgn = int(np.sign(s))
        if sgn == 0:
            continue
        if sign and sgn != sign:
            peaks.append(current)
            current = 0.0
        current = max(current, abs(s))
        sign = sgn
    if sign:
        peaks.append(current)
    return np.array(peaks)
