"""Semi-discrete field equations of the SMA rod coupled to a mass block.

The unknown vector is the stack ``y = [u | v | theta]`` of nodal
displacement, velocity and temperature (each of length n = N + 1).  The
residual has three blocks of n rows:

* kinematic  ``du/dt - v``                                         (all nodes)
* momentum   ``rho dv/dt - d/dx s``                                (nodes 1..N-1)
* thermal    ``cv dtheta/dt - d/dx (kappa q) - k1 theta eps eps_t - nu eps_t**2``  (all nodes)

with the total stress ``s = sigma* - kg eps_xx`` and heat gradient ``q``.
The boundary conditions ``eps_x = 0`` and ``theta_x = 0`` at both ends are
built into the fluxes: the end values of ``eps_x`` and ``q`` are zeroed
before the outer derivative is taken.  For fields that satisfy these
conditions, ``d/dx s = d/dx sigma* - kg u_xxxx``.

Two momentum rows are replaced:

===============  ==========================================================
row              equation
===============  ==========================================================
``n + 0``        ``u(0) = 0``
``n + N``        ``s(L) + (m/beta) dv(L)/dt + (mu/beta) v(L) + (k/beta) u(L)
                 + w_N (rho dv(L)/dt - (d/dx s)(L)) = 0``
===============  ==========================================================

The block row is Newton's law for the block under the rod force
``-beta s(L)``; the last term adds the rod's own quadrature mass at x = L so
the discrete energy balance closes.  The effective stress is substituted
directly, so the algebraic constitutive law never appears as an unknown.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, NonFiniteState
from .grid import Grid
from .material import MaterialParams

__all__ = [
    "RodState",
    "BlockParams",
    "TimeStencil",
    "initial_state",
    "strain",
    "strain_rate",
    "pack",
    "unpack",
    "residual",
    "assemble",
    "row_scales",
    "boundary_rows",
]


@dataclass(frozen=True)
class BlockParams:
    """Mass block attached at x = L, all quantities per unit rod cross-section."""

    mass_per_area: float = 200.0   # m / beta, g/cm^2
    friction: float = 0.0          # mu_m / beta, g/(cm^2 ms)
    stiffness: float = 0.0         # k_m / beta, g/(cm^2 ms^2)
    v0: float = -3.0               # initial block velocity, cm/ms

    def __post_init__(self):
        bad = []
        for name in ("mass_per_area", "friction", "stiffness", "v0"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                bad.append(f"block.{name}: must be a finite number, got {value!r}")
        if not bad:
            if self.mass_per_area <= 0:
                bad.append(f"block.mass_per_area: must be > 0, got {self.mass_per_area}")
            if self.friction < 0:
                bad.append(f"block.friction: must be >= 0, got {self.friction}")
            if self.stiffness < 0:
                bad.append(f"block.stiffness: must be >= 0, got {self.stiffness}")
        if bad:
            raise ConfigError("; ".join(bad))


@dataclass(frozen=True, eq=False)
class RodState:
    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        n = len(self.u)
        if len(self.v) != n or len(self.theta) != n:
            raise ValueError("u, v and theta must have equal length")

    @property
    def block_velocity(self) -> float:
        return float(self.v[-1])


@dataclass(frozen=True, eq=False)
class TimeStencil:
    """Linear time-derivative approximation ``dy/dt ~= a0 * y_new + offset``.

    ``offset`` collects the history terms of the backward-differentiation
    formula and has the shape of the stacked unknown vector.
    """

    a0: float
    offset: np.ndarray = field(repr=False)

    def derivative(self, y: np.ndarray) -> np.ndarray:
        if y.ndim == 2:
            return self.a0 * y + self.offset[:, None]
        return self.a0 * y + self.offset


def pack(state: RodState) -> np.ndarray:
    return np.concatenate([state.u, state.v, state.theta])


def unpack(y: np.ndarray, time: float) -> RodState:
    n = y.shape[0] // 3
    return RodState(y[:n].copy(), y[n:2 * n].copy(), y[2 * n:].copy(), float(time))


def _check_sizes(grid: Grid, state: RodState):
    if len(state.u) != grid.size:
        raise ValueError(f"state has {len(state.u)} nodes, grid has {grid.size}")


def initial_state(grid: Grid, strain0: float, theta0: float, block: BlockParams) -> RodState:
    """Uniform strain, uniform temperature and a linear velocity ramp.

    The velocity rises from 0 at the clamped end to the block velocity at
    x = L, so both ``u(0) = 0`` and ``v(L) = v_m`` hold at t = 0.
    """
    if not theta0 > 0:
        raise DomainError(f"theta0 must be positive, got {theta0}")
    x = grid.nodes
    return RodState(
        u=strain0 * x,
        v=block.v0 * x / grid.length,
        theta=np.full(grid.size, float(theta0)),
        time=0.0,
    )


def strain(grid: Grid, state: RodState) -> np.ndarray:
    _check_sizes(grid, state)
    return grid.d1 @ state.u


def strain_rate(grid: Grid, state: RodState) -> np.ndarray:
    _check_sizes(grid, state)
    return grid.d1 @ state.v


def boundary_rows(n_intervals: int) -> dict[str, int]:
    """Residual indices of the boundary rows (see module docstring)."""
    n = n_intervals + 1
    return {"u_left": n, "traction": n + n_intervals}


def assemble(grid: Grid, p: MaterialParams, block: BlockParams,
             y: np.ndarray, ydot: np.ndarray) -> np.ndarray:
    """Residual for stacked unknowns ``y`` and their time derivatives ``ydot``.

    Both arrays have shape ``(3n,)`` or ``(3n, k)``; in the latter case each
    column is an independent evaluation (used for batched Jacobians).
    """
    n = grid.size
    N = grid.n_intervals
    d1 = grid.d1
    u, v, th = y[:n], y[n:2 * n], y[2 * n:]
    udot, vdot, thdot = ydot[:n], ydot[n:2 * n], ydot[2 * n:]

    eps = d1 @ u
    eps_t = d1 @ v
    e2 = eps * eps
    eps_x = d1 @ eps
    eps_x[0] = 0.0
    eps_x[N] = 0.0
    s = (eps * (p.k1 * (th - p.theta1) - p.k2 * e2 + p.k3 * e2 * e2)
         + p.nu * eps_t - p.kg * (d1 @ eps_x))

    res = np.empty_like(y)
    res[:n] = udot - v

    mom = p.rho * vdot - d1 @ s
    mom[0] = u[0]
    mom[N] = (s[N] + block.mass_per_area * vdot[N] + block.friction * v[N]
              + block.stiffness * u[N] + grid.quad_weights[N] * mom[N])
    res[n:2 * n] = mom

    q = d1 @ th
    q[0] = 0.0
    q[N] = 0.0
    res[2 * n:] = (p.cv * thdot - p.kappa * (d1 @ q)
                   - p.k1 * th * eps * eps_t - p.nu * eps_t * eps_t)
    return res


def residual(grid: Grid, p: MaterialParams, block: BlockParams,
             state_new: RodState, history: TimeStencil) -> np.ndarray:
    """Residual of the discrete system at ``state_new``.

    Raises
    ------
    ValueError
        On size mismatch between state, grid and stencil.
    NonFiniteState
        If any residual entry is NaN or infinite.
    """
    _check_sizes(grid, state_new)
    y = pack(state_new)
    if history.offset.shape != y.shape:
        raise ValueError("time stencil does not match the unknown vector size")
    with np.errstate(over="ignore", invalid="ignore"):
        res = assemble(grid, p, block, y, history.derivative(y))
    if not np.all(np.isfinite(res)):
        raise NonFiniteState("non-finite residual entries", time=state_new.time)
    return res


def row_scales(grid: Grid, p: MaterialParams, block: BlockParams, a0: float) -> np.ndarray:
    """Row multipliers that express every residual row in unknown units.

    Kinematic rows become displacements, momentum and block rows velocities,
    thermal rows temperatures.  Newton tolerances are applied to the scaled
    residual so one absolute floor fits all three fields.
    """
    n = grid.size
    N = grid.n_intervals
    s = np.empty(3 * n)
    s[:n] = 1.0 / a0
    s[n:2 * n] = 1.0 / (p.rho * a0)
    s[n] = 1.0
    s[n + N] = 1.0 / ((block.mass_per_area + grid.quad_weights[N] * p.rho) * a0)
    s[2 * n:] = 1.0 / (p.cv * a0)
    return s
