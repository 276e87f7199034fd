"""Uniform time and detuning grids shared by solvers and quadratures.

All rates are in units of the Markov spontaneous decay rate gamma and all
times in 1/gamma. Frequencies are detunings from the atomic transition
(rotating frame), so grids are symmetric windows around zero unless stated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid t_k = t0 + k*dt, k = 0..n-1."""

    t0: float
    dt: float
    n: int

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n < 2:
            raise ValueError(f"need at least two samples, got n={self.n}")

    @classmethod
    def from_span(cls, t0: float, t_max: float, dt: float) -> "TimeGrid":
        """Grid covering [t0, t_max]; t_max is rounded up to a whole step."""
        if not t_max > t0:
            raise ValueError(f"t_max={t_max} must exceed t0={t0}")
        n = int(np.ceil((t_max - t0) / dt - 1e-12)) + 1
        return cls(t0=t0, dt=dt, n=n)

    @property
    def t_max(self) -> float:
        return self.t0 + (self.n - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    def half_step_times(self) -> np.ndarray:
        """All nodes and midpoints: 2n-1 samples at dt/2 spacing (RK4 stages)."""
        return self.t0 + 0.5 * self.dt * np.arange(2 * self.n - 1)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform detuning window [-half_width, half_width] with n points."""

    half_width: float
    n: int

    def __post_init__(self):
        if not self.half_width > 0.0:
            raise ValueError("half_width must be positive")
        if self.n < 3:
            raise ValueError("need at least three quadrature nodes")

    @property
    def deltas(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n - 1)

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n, self.spacing)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w
