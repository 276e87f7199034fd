"""Single-photon pulse family: spectral amplitudes and time envelopes.

Four shapes are supported: gaussian, decaying_exp, rising_exp and delta
(flat spectrum, unnormalizable). Everything is expressed in the rotating
frame of the atom, so spectral amplitudes are functions of the detuning
delta and envelopes are slowly varying (the optical carrier is removed).
A pulse with carrier detuning delta0 has its spectrum centered at delta0
and its envelope multiplied by exp(-1j*delta0*(t - t_a)).

Conventions (unit-norm shapes, t_a = 0, delta0 = 0):

    gaussian:     xi(d) = (2 tau_f^2/pi)^(1/4) exp(-tau_f^2 d^2)
                  u(t)  = (1/(2 pi tau_f^2))^(1/4) exp(-t^2/(4 tau_f^2))
    decaying_exp: xi(d) = sqrt(2 tau_f/pi) / (1 - 2i d tau_f)
                  u(t)  = sqrt(1/tau_f) exp(-t/(2 tau_f)),  t >= 0
    rising_exp:   xi(d) = sqrt(2 tau_f/pi) / (1 + 2i d tau_f)
                  u(t)  = sqrt(1/tau_f) exp(+t/(2 tau_f)),  t <= 0
    delta:        xi(d) = xi0 (constant); no square-integrable envelope.

The unit rate is the Markov spontaneous decay rate of the atom, so tau_f
is measured in 1/gamma.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grids import FrequencyGrid

GAUSSIAN = "gaussian"
DECAYING_EXP = "decaying_exp"
RISING_EXP = "rising_exp"
DELTA = "delta"

PULSE_SHAPES = (GAUSSIAN, DECAYING_EXP, RISING_EXP, DELTA)
NORMALIZABLE_SHAPES = (GAUSSIAN, DECAYING_EXP, RISING_EXP)


@dataclass(frozen=True)
class PulseSpec:
    """Immutable description of a single-photon pulse.

    Parameters
    ----------
    shape : str
        One of "gaussian", "decaying_exp", "rising_exp", "delta".
    tau_f : float
        Pulse length in 1/gamma (ignored for the delta shape).
    delta0 : float
        Carrier detuning from the atomic transition (default resonant).
    t_a : float
        Arrival/reference time: Gaussian peak, decaying-exp turn-on,
        rising-exp cut-off.
    xi0 : float
        Constant spectral amplitude of the delta shape. The delta pulse is
        unnormalizable; outputs driven by it scale as xi0**2 with an
        arbitrary overall prefactor.
    """

    shape: str
    tau_f: float = 1.0
    delta0: float = 0.0
    t_a: float = 0.0
    xi0: float = 0.1

    def __post_init__(self):
        if self.shape not in PULSE_SHAPES:
            raise ValueError(f"unknown pulse shape {self.shape!r}; expected one of {PULSE_SHAPES}")
        if self.shape != DELTA and not self.tau_f > 0.0:
            raise ValueError(f"tau_f must be positive, got {self.tau_f}")

    @property
    def is_normalizable(self) -> bool:
        return self.shape != DELTA

    def with_arrival(self, t_a: float) -> "PulseSpec":
        return replace(self, t_a=t_a)


@dataclass(frozen=True)
class CoherentPulseSpec:
    """Coherent-state pulse: sqrt(n_bar) times a unit-norm base spectrum."""

    base: PulseSpec
    n_bar: float = 1.0

    def __post_init__(self):
        if self.n_bar < 0.0:
            raise ValueError(f"mean photon number must be >= 0, got {self.n_bar}")
        if not self.base.is_normalizable:
            raise ValueError("coherent pulse needs a normalizable base shape")


def spectral_amplitude(spec: PulseSpec, delta) -> np.ndarray | complex:
    """Spectral amplitude xi evaluated at detuning(s) delta.

    The arrival time t_a does not enter here; it is applied as the phase
    reference of the driving term (drives are evaluated at t - t_a).
    """
    delta = np.asarray(delta, dtype=float)
    d = delta - spec.delta0
    tf = spec.tau_f
    if spec.shape == GAUSSIAN:
        out = (2.0 * tf**2 / np.pi) ** 0.25 * np.exp(-(tf**2) * d**2) + 0j
    elif spec.shape == DECAYING_EXP:
        out = np.sqrt(2.0 * tf / np.pi) / (1.0 - 2j * d * tf)
    elif spec.shape == RISING_EXP:
        out = np.sqrt(2.0 * tf / np.pi) / (1.0 + 2j * d * tf)
    else:  # delta
        out = np.full(delta.shape, spec.xi0, dtype=complex)
    return out if out.ndim else complex(out)


def envelope(spec: PulseSpec, t) -> np.ndarray | complex:
    """Slowly-varying time envelope u(t - t_a), unit L2 norm.

    Raises for the delta shape, which has no square-integrable envelope.
    """
    if spec.shape == DELTA:
        raise ValueError("delta pulse has no square-integrable envelope")
    t = np.asarray(t, dtype=float)
    x = t - spec.t_a
    tf = spec.tau_f
    if spec.shape == GAUSSIAN:
        mag = (1.0 / (2.0 * np.pi * tf**2)) ** 0.25 * np.exp(-(x**2) / (4.0 * tf**2))
    elif spec.shape == DECAYING_EXP:
        mag = np.where(x >= 0.0, np.sqrt(1.0 / tf) * np.exp(-np.abs(x) / (2.0 * tf)), 0.0)
    else:  # rising_exp
        mag = np.where(x <= 0.0, np.sqrt(1.0 / tf) * np.exp(-np.abs(x) / (2.0 * tf)), 0.0)
    out = mag * np.exp(-1j * spec.delta0 * x) if spec.delta0 != 0.0 else mag + 0j
    return out if out.ndim else complex(out)


def coherent_amplitude(spec: CoherentPulseSpec, delta) -> np.ndarray | complex:
    """Coherent-state spectral amplitude: sqrt(n_bar) * base amplitude."""
    return np.sqrt(spec.n_bar) * spectral_amplitude(spec.base, delta)


def default_window(spec: PulseSpec, n: int = 20001) -> FrequencyGrid:
    """Detuning window wide enough for norm checks: delta0 +- 50/tau_f."""
    if spec.shape == DELTA:
        raise ValueError("delta pulse has no finite normalization window")
    return FrequencyGrid(half_width=abs(spec.delta0) + 50.0 / spec.tau_f, n=n)


def validate_normalization(spec: PulseSpec, window: FrequencyGrid) -> float:
    """Residual |integral of |xi|^2 - 1| over the window.

    The window must reach at least 40/tau_f beyond the carrier on each side;
    a narrower window raises with the required width. The delta shape is
    rejected as unnormalizable.
    """
    if spec.shape == DELTA:
        raise ValueError("delta pulse is unnormalizable by definition")
    required = abs(spec.delta0) + 40.0 / spec.tau_f
    if window.half_width < required:
        raise ValueError(
            f"window half-width {window.half_width:g} too narrow; "
            f"need at least {required:g} (= |delta0| + 40/tau_f)"
        )
    xi = spectral_amplitude(spec, window.deltas)
    total = float(np.sum(window.trapezoid_weights() * np.abs(xi) ** 2))
    return abs(total - 1.0)
