"""Uniform 1-D grid on (0, 1), difference operators and discrete norms.

Nodal fields have ``n_cells + 1`` entries; gradients live at cell
midpoints.  Quadrature is trapezoidal throughout, so the weights sum to
exactly one and the discrete L^q norms are power means (monotone in q).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Grid1D",
    "Field",
    "BCSpec",
    "node_weights",
    "gradient",
    "second_derivative",
    "cell_average",
    "lq_norm",
    "linf_norm",
    "h1_seminorm",
    "h1_norm",
    "cell_l2_norm",
    "bochner_norm",
    "llogl_deviation",
    "mass",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on the unit interval."""

    n_cells: int

    def __post_init__(self) -> None:
        if self.n_cells < 4:
            raise ValueError("grid needs at least 4 cells")

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_cells + 1)

    @property
    def cell_midpoints(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.h


@dataclass(frozen=True)
class Field:
    """Nodal values bound to a grid."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_nodes,):
            raise ValueError("field length does not match grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class BCSpec:
    """Boundary data: displacement pinned at x = 0, traction applied at
    x = 1 (carried by the loading), Robin flux data at both endpoints.

    ``zero_flux`` marks the homogeneous-Neumann regime used by the linear
    system; it forces kappa = 0.
    """

    dirichlet_value: float = 0.0
    kappa_left: float = 0.0
    kappa_right: float = 0.0
    mu_ext: Callable[[float], float] | float = 0.0
    zero_flux: bool = False

    def __post_init__(self) -> None:
        if self.dirichlet_value != 0.0:
            raise ValueError("the pinned end is the identity, so the stored displacement must vanish there")
        if self.kappa_left < 0.0 or self.kappa_right < 0.0:
            raise ValueError("boundary permeability kappa must be >= 0")
        if self.zero_flux and (self.kappa_left != 0.0 or self.kappa_right != 0.0):
            raise ValueError("(L1) zero-flux runs require kappa = 0")

    def mu_ext_value(self, t: float) -> float:
        if callable(self.mu_ext):
            return float(self.mu_ext(t))
        return float(self.mu_ext)


def _vals(grid: Grid1D, f) -> np.ndarray:
    v = f.values if isinstance(f, Field) else np.asarray(f, dtype=float)
    if v.shape != (grid.n_nodes,):
        raise ValueError("field length does not match grid")
    return v


def node_weights(grid: Grid1D) -> np.ndarray:
    """Trapezoidal quadrature weights; they sum to |Omega| = 1 exactly."""
    w = np.full(grid.n_nodes, grid.h)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def gradient(grid: Grid1D, f) -> np.ndarray:
    """First differences at cell midpoints; exact for affine fields."""
    v = _vals(grid, f)
    return (v[1:] - v[:-1]) / grid.h


def second_derivative(grid: Grid1D, f) -> np.ndarray:
    """Central second differences at interior nodes with natural end
    conditions (endpoint values forced to zero)."""
    v = _vals(grid, f)
    out = np.zeros_like(v)
    out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / grid.h ** 2
    return out


def cell_average(f) -> np.ndarray:
    v = np.asarray(f, dtype=float)
    return 0.5 * (v[1:] + v[:-1])


def lq_norm(grid: Grid1D, f, q) -> float:
    """Trapezoidal L^q norm; q = inf gives the max nodal absolute value."""
    v = _vals(grid, f)
    if q == np.inf or q == "inf":
        return float(np.max(np.abs(v)))
    q = float(q)
    if q < 1.0:
        raise ValueError("norm exponent q must be >= 1")
    peak = float(np.max(np.abs(v)))
    if peak == 0.0:
        return 0.0
    # factor out the peak so large q cannot overflow
    return peak * float(np.sum(node_weights(grid) * (np.abs(v) / peak) ** q)) ** (1.0 / q)


def linf_norm(grid: Grid1D, f) -> float:
    return lq_norm(grid, f, np.inf)


def h1_seminorm(grid: Grid1D, f) -> float:
    g = gradient(grid, f)
    return float(np.sqrt(np.sum(grid.h * g ** 2)))


def h1_norm(grid: Grid1D, f) -> float:
    return float(np.sqrt(lq_norm(grid, f, 2) ** 2 + h1_seminorm(grid, f) ** 2))


def cell_l2_norm(grid: Grid1D, cell_values) -> float:
    """L^2 norm of a piecewise-constant (cell) field."""
    v = np.asarray(cell_values, dtype=float)
    return float(np.sqrt(np.sum(grid.h * v ** 2)))


def bochner_norm(per_step_values: Sequence, tau: float, outer: str, inner: Callable) -> float:
    """Time norm of a trajectory: ``outer`` is "max" or "l2"; ``inner``
    maps one step's field to a spatial norm value."""
    vals = np.array([inner(v) for v in per_step_values], dtype=float)
    if outer == "max":
        return float(np.max(vals))
    if outer == "l2":
        return float(np.sqrt(np.sum(tau * vals ** 2)))
    raise ValueError("outer norm must be 'max' or 'l2'")


def llogl_deviation(grid: Grid1D, c, c_eq: float) -> float:
    """Integral of c log(c/c_eq) - c + c_eq; nonnegative, zero iff c = c_eq.

    Nodal concentrations must be nonnegative (0 log 0 := 0).
    """
    v = _vals(grid, c)
    if np.any(v < 0.0):
        raise ValueError("llogl deviation requires c >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        xlog = np.where(v > 0.0, v * np.log(np.maximum(v, 1e-300) / c_eq), 0.0)
    return float(np.sum(node_weights(grid) * (xlog - v + c_eq)))


def mass(grid: Grid1D, f) -> float:
    """Trapezoidal integral of a nodal field."""
    return float(np.sum(node_weights(grid) * _vals(grid, f)))
