"""Chebyshev-Gauss-Lobatto collocation on the rod interval [0, L].

Nodes are ``x_i = L (1 - cos(pi i / N)) / 2`` so that ``x_0 = 0`` is the
clamped end and ``x_N = L`` carries the mass block.  Derivatives are taken
with dense spectral differentiation matrices built from the barycentric
weights of the Lagrange basis on these nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = ["Grid", "build_grid", "differentiate", "interpolate", "integrate"]


@dataclass(frozen=True, eq=False)
class Grid:
    """Collocation grid with its differentiation and quadrature operators.

    Attributes
    ----------
    n_intervals : int
        Polynomial degree N; the grid has N + 1 nodes.
    length : float
        Rod length L in cm.
    nodes : ndarray, shape (N+1,)
        Increasing node positions, ``nodes[0] == 0`` and ``nodes[N] == L``.
    d1, d2, d4 : ndarray, shape (N+1, N+1)
        First, second and fourth derivative operators (``d2 = d1 @ d1``,
        ``d4 = d2 @ d2``).
    quad_weights : ndarray, shape (N+1,)
        Clenshaw-Curtis weights on [0, L].
    bary_weights : ndarray, shape (N+1,)
        Barycentric interpolation weights.
    """

    n_intervals: int
    length: float
    nodes: np.ndarray = field(repr=False)
    d1: np.ndarray = field(repr=False)
    d2: np.ndarray = field(repr=False)
    d4: np.ndarray = field(repr=False)
    quad_weights: np.ndarray = field(repr=False)
    bary_weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.n_intervals + 1


def _clenshaw_curtis(n: int) -> np.ndarray:
    # Weights on [-1, 1] for nodes cos(pi j / n), j = 0..n (symmetric in j).
    theta = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    interior = np.arange(1, n)
    v = np.ones(n - 1)
    if n % 2 == 0:
        w[0] = w[n] = 1.0 / (n**2 - 1)
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * theta[interior]) / (4 * k**2 - 1)
        v -= np.cos(n * theta[interior]) / (n**2 - 1)
    else:
        w[0] = w[n] = 1.0 / n**2
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[interior]) / (4 * k**2 - 1)
    w[interior] = 2.0 * v / n
    return w


def build_grid(n_intervals: int, length: float) -> Grid:
    """Build the Chebyshev-Gauss-Lobatto grid with ``n_intervals + 1`` nodes.

    Raises
    ------
    ConfigError
        If ``n_intervals < 4`` or ``length <= 0``.
    """
    if int(n_intervals) != n_intervals or n_intervals < 4:
        raise ConfigError(f"n_intervals must be an integer >= 4, got {n_intervals!r}")
    if not (length > 0 and np.isfinite(length)):
        raise ConfigError(f"length must be positive, got {length!r}")
    n = int(n_intervals)
    length = float(length)

    theta = np.pi * np.arange(n + 1) / n
    nodes = length * (1.0 - np.cos(theta)) / 2.0
    nodes[0], nodes[n] = 0.0, length

    # x_i - x_j via a product of sines avoids cancellation near the ends.
    half_sum = (theta[:, None] + theta[None, :]) / 2.0
    half_diff = (theta[:, None] - theta[None, :]) / 2.0
    dx = length * np.sin(half_sum) * np.sin(half_diff)
    np.fill_diagonal(dx, 1.0)

    bary = (-1.0) ** np.arange(n + 1)
    bary[0] *= 0.5
    bary[n] *= 0.5

    d1 = (bary[None, :] / bary[:, None]) / dx
    np.fill_diagonal(d1, 0.0)
    np.fill_diagonal(d1, -d1.sum(axis=1))
    d2 = d1 @ d1
    d4 = d2 @ d2

    quad = _clenshaw_curtis(n) * length / 2.0

    for arr in (nodes, d1, d2, d4, quad, bary):
        arr.setflags(write=False)
    return Grid(n, length, nodes, d1, d2, d4, quad, bary)


def _check_values(grid: Grid, values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape[0] != grid.size:
        raise ValueError(f"expected {grid.size} nodal values, got {values.shape[0]}")
    return values


def differentiate(grid: Grid, values, order: int = 1) -> np.ndarray:
    """Apply the order-1, 2 or 4 differentiation matrix to nodal values."""
    values = _check_values(grid, values)
    try:
        op = {1: grid.d1, 2: grid.d2, 4: grid.d4}[order]
    except KeyError:
        raise ValueError(f"order must be 1, 2 or 4, got {order!r}") from None
    return op @ values


def interpolate(grid: Grid, values, x: float) -> float:
    """Evaluate the nodal interpolant at ``x`` (barycentric formula).

    No extrapolation: ``x`` must lie in ``[0, L]``.
    """
    values = _check_values(grid, values)
    x = float(x)
    if not 0.0 <= x <= grid.length:
        raise ValueError(f"x={x} outside [0, {grid.length}]")
    diff = x - grid.nodes
    hit = np.flatnonzero(diff == 0.0)
    if hit.size:
        return float(values[hit[0]])
    terms = grid.bary_weights / diff
    return float(terms @ values / terms.sum())


def integrate(grid: Grid, values) -> float:
    """Clenshaw-Curtis quadrature of nodal values over [0, L]."""
    values = _check_values(grid, values)
    return float(grid.quad_weights @ values)
