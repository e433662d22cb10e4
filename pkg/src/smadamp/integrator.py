"""Implicit backward-differentiation time stepping with damped Newton.

Each step solves ``assemble(y, a0 * y + offset) = 0`` for the stacked
unknowns ``y = [u | v | theta]`` at the new time level.  The Newton matrix is
a dense one-sided finite-difference Jacobian evaluated in a single batched
residual call.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .diagnostics import EnergyReport, energy_report
from .errors import ConfigError, NonConvergence, NonFiniteState, SingularJacobian
from .grid import Grid
from .material import MaterialParams
from .rod import BlockParams, RodState, TimeStencil, assemble, pack, row_scales, unpack

__all__ = [
    "SolverConfig",
    "Trajectory",
    "NewtonResult",
    "bdf_stencil",
    "newton_solve",
    "fd_jacobian",
    "step",
    "run",
]

log = logging.getLogger(__name__)

_FD_REL_STEP = 1e-7
_PIVOT_RTOL = 1e-14
_MAX_HALVINGS = 8


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-4
    bdf_order: int = 2
    newton_tol: float = 1e-8
    newton_abs_tol: float = 1e-10
    max_newton_iters: int = 25
    jacobian_mode: Literal["finite-difference", "reuse-per-step"] = "finite-difference"
    # Increment-based acceptance once the residual sits at round-off level.
    newton_step_tol: float = 1e-10

    def __post_init__(self):
        bad = []
        if not (isinstance(self.dt, (int, float)) and self.dt > 0 and math.isfinite(self.dt)):
            bad.append(f"solver.dt: must be > 0, got {self.dt!r}")
        if self.bdf_order not in (1, 2):
            bad.append(f"solver.bdf_order: must be 1 or 2, got {self.bdf_order!r}")
        for name in ("newton_tol", "newton_abs_tol", "newton_step_tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0):
                bad.append(f"solver.{name}: must be > 0, got {value!r}")
        if not (isinstance(self.max_newton_iters, int) and self.max_newton_iters >= 1):
            bad.append(f"solver.max_newton_iters: must be an integer >= 1, "
                       f"got {self.max_newton_iters!r}")
        if self.jacobian_mode not in ("finite-difference", "reuse-per-step"):
            bad.append(f"solver.jacobian_mode: unknown mode {self.jacobian_mode!r}")
        if bad:
            raise ConfigError("; ".join(bad))


@dataclass
class Trajectory:
    """Samples recorded by :func:`run` every ``output_every`` steps."""

    grid: Grid | None = None
    times: list[float] = field(default_factory=list)
    states: list[RodState] = field(default_factory=list)
    energies: list[EnergyReport] = field(default_factory=list)
    newton_iterations: list[int] = field(default_factory=list)
    retries: int = 0

    def __len__(self) -> int:
        return len(self.times)

    def block_velocity(self) -> np.ndarray:
        return np.array([s.v[-1] for s in self.states])

    def strain_history(self, node_index: int) -> np.ndarray:
        """Strain at one node across all samples."""
        if self.grid is None:
            raise ValueError("trajectory has no grid attached")
        row = self.grid.d1[node_index]
        return np.array([row @ s.u for s in self.states])


@dataclass(frozen=True)
class NewtonResult:
    x: np.ndarray
    iterations: int
    residual_norm: float


def bdf_stencil(y_n: np.ndarray, h: float, y_prev: np.ndarray | None = None,
                h_prev: float | None = None) -> TimeStencil:
    """Variable-step BDF1 (``y_prev is None``) or BDF2 derivative stencil.

    With step ratio ``w = h / h_prev`` the BDF2 derivative is

        (1 + 2w)/(1 + w) y_{n+1} - (1 + w) y_n + w^2/(1 + w) y_{n-1}

    divided by ``h``, which reduces to ``(3 y_{n+1} - 4 y_n + y_{n-1}) / (2h)``
    for equal steps.
    """
    if y_prev is None:
        return TimeStencil(1.0 / h, -y_n / h)
    w = h / h_prev
    a0 = (1.0 + 2.0 * w) / ((1.0 + w) * h)
    offset = (-(1.0 + w) * y_n + w * w / (1.0 + w) * y_prev) / h
    return TimeStencil(a0, offset)


def fd_jacobian(residual_fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                r0: np.ndarray) -> np.ndarray:
    """Dense forward-difference Jacobian, all columns in one residual call.

    ``residual_fn`` must accept an ``(m, k)`` array of column vectors.
    """
    h = _FD_REL_STEP * (1.0 + np.abs(x))
    # Make the perturbation exactly representable.
    h = (x + h) - x
    cols = x[:, None] + np.diag(h)
    return (residual_fn(cols) - r0[:, None]) / h[None, :]


def _factor(jac: np.ndarray, iterations: int, rnorm: float):
    """Row-equilibrate and LU-factor; returns ``(lu, piv, row_scale)``."""
    if not np.all(np.isfinite(jac)):
        raise NonFiniteState("non-finite Jacobian entries")
    row_max = np.max(np.abs(jac), axis=1)
    if np.any(row_max == 0.0):
        raise SingularJacobian("Jacobian has an all-zero row",
                               iterations=iterations, residual_norm=rnorm)
    row_scale = 1.0 / row_max
    with warnings.catch_warnings():
        # Singularity is detected from the pivots below and raised explicitly.
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(jac * row_scale[:, None], check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= _PIVOT_RTOL * pivots.max():
        raise SingularJacobian("Jacobian is numerically singular",
                               iterations=iterations, residual_norm=rnorm)
    return lu, piv, row_scale


def _solve(factors, r: np.ndarray) -> np.ndarray:
    lu, piv, row_scale = factors
    return lu_solve((lu, piv), r * row_scale, check_finite=False)


def newton_solve(residual_fn: Callable[[np.ndarray], np.ndarray], guess,
                 cfg: SolverConfig, batched: bool = False,
                 reuse_jacobian: bool | None = None) -> NewtonResult:
    """Damped Newton-Raphson with a finite-difference Jacobian.

    Converged when ``max|r(x)| <= newton_abs_tol + newton_tol * max|r(guess)|``
    or when the Newton increment drops below
    ``newton_step_tol * (1 + max|x|)`` (residual at round-off level).
    A step that does not reduce ``|r|_2`` is halved up to 8 times.

    Parameters
    ----------
    residual_fn : callable
        Maps an ``(m,)`` vector to an ``(m,)`` residual.  With
        ``batched=True`` it must also accept ``(m, k)`` column stacks.
    reuse_jacobian : bool, optional
        Keep the first Jacobian for all iterations (modified Newton).
        Defaults to ``cfg.jacobian_mode == "reuse-per-step"``.

    Raises
    ------
    NonConvergence
        Iteration budget exhausted or the line search failed.
    SingularJacobian
        Negligible pivot in the LU factorisation.
    NonFiniteState
        NaN/inf in the residual.
    """
    if reuse_jacobian is None:
        reuse_jacobian = cfg.jacobian_mode == "reuse-per-step"
    x = np.array(guess, dtype=float, copy=True)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)

    def f(z):
        return np.atleast_1d(np.asarray(residual_fn(z[0] if scalar and z.ndim == 1 else z),
                                        dtype=float))

    def f_batch(cols):
        if batched:
            return f(cols)
        return np.column_stack([f(c) for c in cols.T])

    r = f(x)
    if not np.all(np.isfinite(r)):
        raise NonFiniteState("non-finite residual at the initial guess")
    rnorm = float(np.max(np.abs(r)))
    target = cfg.newton_abs_tol + cfg.newton_tol * rnorm

    def done(xv):
        return NewtonResult(xv[0] if scalar else xv, it, rnorm)

    it = 0
    if rnorm <= target:
        return done(x)
    factors = None
    stale = False
    while it < cfg.max_newton_iters:
        it += 1
        if factors is None or not reuse_jacobian:
            factors = _factor(fd_jacobian(f_batch, x, r), it, rnorm)
            stale = False
        delta = -_solve(factors, r)
        if np.max(np.abs(delta)) <= cfg.newton_step_tol * (1.0 + np.max(np.abs(x))):
            # Increment at round-off level: the residual cannot be reduced further.
            x = x + delta
            with np.errstate(over="ignore", invalid="ignore"):
                r = f(x)
            if not np.all(np.isfinite(r)):
                raise NonFiniteState("non-finite residual after the final Newton update")
            rnorm = float(np.max(np.abs(r)))
            return done(x)
        merit = float(np.dot(r, r))
        lam = 1.0
        for _ in range(_MAX_HALVINGS + 1):
            x_try = x + lam * delta
            with np.errstate(over="ignore", invalid="ignore"):
                r_try = f(x_try)
            # The Newton direction is a descent direction for |r|_2, not |r|_inf.
            if np.all(np.isfinite(r_try)) and float(np.dot(r_try, r_try)) < merit:
                rnorm_try = float(np.max(np.abs(r_try)))
                break
            lam *= 0.5
        else:
            if reuse_jacobian and stale:
                factors = None
                continue
            raise NonConvergence("line search failed to reduce the residual",
                                 iterations=it, residual_norm=rnorm)
        x, r, rnorm = x_try, r_try, rnorm_try
        stale = True
        if rnorm <= target:
            return done(x)
    raise NonConvergence(f"no convergence in {cfg.max_newton_iters} Newton iterations",
                         iterations=it, residual_norm=rnorm)


def _solve_step(grid, p, block, cfg, current: RodState, previous: RodState | None,
                h: float) -> tuple[RodState, int]:
    y_n = pack(current)
    if previous is not None and cfg.bdf_order == 2:
        y_prev = pack(previous)
        h_prev = current.time - previous.time
        stencil = bdf_stencil(y_n, h, y_prev, h_prev)
        guess = y_n + (h / h_prev) * (y_n - y_prev)
    else:
        stencil = bdf_stencil(y_n, h)
        guess = y_n.copy()
    scale = row_scales(grid, p, block, stencil.a0)

    def fn(y):
        with np.errstate(over="ignore", invalid="ignore"):
            res = assemble(grid, p, block, y, stencil.derivative(y))
        if y.ndim == 2:
            return res * scale[:, None]
        return res * scale

    t_new = current.time + h
    try:
        result = newton_solve(fn, guess, cfg, batched=True)
    except NonConvergence as exc:
        exc.time = t_new
        raise
    except NonFiniteState as exc:
        exc.time = t_new
        raise
    state = unpack(result.x, t_new)
    if not np.all(np.isfinite(result.x)) or np.any(state.theta <= 0):
        raise NonFiniteState("state left the admissible region", time=t_new)
    return state, result.iterations


def step(grid: Grid, p: MaterialParams, block: BlockParams, cfg: SolverConfig,
         current: RodState, previous: RodState | None = None,
         dt: float | None = None) -> RodState:
    """Advance ``current`` by one time step (``cfg.dt`` unless ``dt`` given).

    Uses BDF2 when ``cfg.bdf_order == 2`` and ``previous`` is available,
    otherwise BDF1.
    """
    h = cfg.dt if dt is None else dt
    return _solve_step(grid, p, block, cfg, current, previous, h)[0]


def run(grid: Grid, p: MaterialParams, block: BlockParams, cfg: SolverConfig,
        initial: RodState, t_end: float, output_every: int = 1,
        progress: Callable[[float], None] | None = None) -> Trajectory:
    """Integrate from ``initial.time`` to ``t_end`` with fixed steps.

    Samples are taken at the initial time and after every ``output_every``
    steps, so their spacing is uniform; a final partial interval is
    integrated but not recorded.

    A step that fails to converge is retried once as two half steps; a
    second failure propagates with ``exc.time`` set.
    """
    if not t_end > initial.time:
        raise ConfigError(f"t_end must exceed the initial time, got {t_end}")
    if int(output_every) != output_every or output_every < 1:
        raise ConfigError(f"output_every must be a positive integer, got {output_every}")
    n_steps = int(math.ceil((t_end - initial.time) / cfg.dt - 1e-9))
    traj = Trajectory(grid=grid)

    def record(state, iters):
        traj.times.append(state.time)
        traj.states.append(state)
        traj.energies.append(energy_report(grid, p, block, state))
        traj.newton_iterations.append(iters)

    record(initial, 0)
    previous, current = None, initial
    t0 = initial.time
    for k in range(1, n_steps + 1):
        t_target = t0 + k * cfg.dt
        h = t_target - current.time
        try:
            new, iters = _solve_step(grid, p, block, cfg, current, previous, h)
        except NonConvergence as exc:
            log.warning("step to t=%.6g ms failed (%s); retrying with two half steps",
                        t_target, exc)
            traj.retries += 1
            mid, it1 = _solve_step(grid, p, block, cfg, current, previous, h / 2)
            new, it2 = _solve_step(grid, p, block, cfg, mid, current, h - h / 2)
            current = mid
            iters = it1 + it2
        previous, current = current, new
        if k % output_every == 0:
            record(current, iters)
            if progress is not None:
                progress(current.time)
    return traj
