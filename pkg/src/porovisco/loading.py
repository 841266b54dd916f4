"""Declarative loading descriptions and their compiled callable form.

Configs describe loads as a spatial profile times a scalar-in-time
amplitude (Lipschitz by construction); solvers and tests may also supply
arbitrary callables through :class:`BoundLoading` directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .discretization import Grid1D

__all__ = ["TimeAmplitude", "SpatialProfile", "LoadingSpec", "BoundLoading"]

_AMPLITUDE_KINDS = ("constant", "ramp", "linear", "sin")
_PROFILE_KINDS = ("zero", "constant", "sin_pi", "cos_pi", "hat", "array")


@dataclass(frozen=True)
class TimeAmplitude:
    """Scalar amplitude a(t): constant, linear ramp to ``scale`` at
    ``t_ramp``, affine ``scale*(1 + rate*t)``, or ``scale*sin(rate*t)``."""

    kind: str = "constant"
    scale: float = 0.0
    t_ramp: float = 1.0
    rate: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in _AMPLITUDE_KINDS:
            raise ValueError(f"unknown amplitude kind {self.kind!r}")
        if self.kind == "ramp" and self.t_ramp <= 0.0:
            raise ValueError("ramp time must be positive")

    def __call__(self, t: float) -> float:
        if self.kind == "constant":
            return self.scale
        if self.kind == "ramp":
            return self.scale * min(t / self.t_ramp, 1.0)
        if self.kind == "linear":
            return self.scale * (1.0 + self.rate * t)
        return self.scale * np.sin(self.rate * t)


@dataclass(frozen=True)
class SpatialProfile:
    """Nodal profile shape on (0, 1)."""

    kind: str = "zero"
    scale: float = 1.0
    values: Optional[tuple] = None

    def __post_init__(self) -> None:
        if self.kind not in _PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "array" and self.values is None:
            raise ValueError("array profile needs values")

    def sample(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "constant":
            return self.scale * np.ones_like(x)
        if self.kind == "sin_pi":
            return self.scale * np.sin(np.pi * x)
        if self.kind == "cos_pi":
            return self.scale * np.cos(np.pi * x)
        if self.kind == "hat":
            return self.scale * 2.0 * np.minimum(x, 1.0 - x)
        v = np.asarray(self.values, dtype=float)
        if v.shape != x.shape:
            raise ValueError("array profile length does not match grid")
        return self.scale * v


@dataclass(frozen=True)
class LoadingSpec:
    """Body force profile with time amplitude, boundary traction with time
    amplitude, and the small-load scale factor eps applied by the
    finite-strain solver."""

    f_profile: SpatialProfile = field(default_factory=SpatialProfile)
    f_amplitude: TimeAmplitude = field(default_factory=TimeAmplitude)
    g_amplitude: TimeAmplitude = field(default_factory=TimeAmplitude)
    eps: float = 1.0

    def __post_init__(self) -> None:
        if self.eps <= 0.0:
            raise ValueError("loading scale factor eps must be positive")

    def bind(self, grid: Grid1D) -> "BoundLoading":
        shape = self.f_profile.sample(grid.nodes)
        amp_f, amp_g = self.f_amplitude, self.g_amplitude
        return BoundLoading(
            f=lambda t: amp_f(t) * shape,
            g=lambda t: amp_g(t),
        )


class BoundLoading:
    """Loads ready for a solver: nodal body force f(t), traction scalar
    g(t), optional volumetric source s(t) in the species equation (used by
    manufactured-solution studies only)."""

    def __init__(
        self,
        f: Callable[[float], np.ndarray],
        g: Callable[[float], float],
        source: Optional[Callable[[float], np.ndarray]] = None,
    ):
        self.f = f
        self.g = g
        self.source = source

    def f_star(self, t: float) -> np.ndarray:
        return np.asarray(self.f(t), dtype=float)

    def g_star(self, t: float) -> float:
        return float(self.g(t))

    def source_values(self, t: float, n_nodes: int) -> np.ndarray:
        if self.source is None:
            return np.zeros(n_nodes)
        return np.asarray(self.source(t), dtype=float)
