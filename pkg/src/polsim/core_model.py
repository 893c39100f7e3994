"""Physical configuration and derived scales for the switching medium.

A single stationary Rydberg excitation (the gate) sits at position ``x_gate``
inside a one-dimensional atomic medium of length ``L``.  Probe photons are
coupled to two counterpropagating quantum fields by classical control beams
with Rabi frequencies ``Omega`` (both directions) and ``OmegaS`` (the second
Rydberg leg), with collective atom-photon coupling ``G`` and polarization
decay half-width ``gamma`` (the scattering rate off the intermediate state is
``2 * gamma``).  The gate excitation shifts the second Rydberg level of nearby
atoms through a van der Waals potential ``C6 / dz**6``.

All quantities are plain floats in any consistent unit system; the command
line layer uses SI (rad/s for rates, meters for lengths).  Internally the
numerical modules rescale lengths by the blockade radius ``z_b`` and rates by
``gamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridError, OversizedBlockadeError

__all__ = [
    "PhysicalConfig",
    "DerivedScales",
    "PulseSpec",
    "derive_scales",
    "vdw_potential",
    "gaussian_pulse_spectrum",
    "trapezoid_weights",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysicalConfig:
    """Static parameters of medium, control fields and gate.

    Parameters
    ----------
    G:
        Collective atom-photon coupling (rate units).
    Omega:
        Control Rabi frequency driving both propagation directions.
    OmegaS:
        Control Rabi frequency of the second (gate-sensitive) Rydberg leg.
    gamma:
        Polarization decay half-width; photons are scattered at rate
        ``2 * gamma``.
    phi:
        Relative phase between the two control beams, stored modulo 2*pi.
        Physical transmission and loss do not depend on it; the reflected
        amplitude picks up ``exp(-1j * phi)``.
    c:
        Speed of light in the chosen units.
    C6:
        Van der Waals coefficient of the gate-probe Rydberg interaction.
    L:
        Medium length.
    x_gate:
        Gate position, ``0 <= x_gate <= L``.
    """

    G: float
    Omega: float
    OmegaS: float
    gamma: float
    phi: float
    c: float
    C6: float
    L: float
    x_gate: float

    def __post_init__(self):
        for name in ("G", "Omega", "OmegaS", "gamma", "c", "C6", "L"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if not (0.0 <= self.x_gate <= self.L):
            raise ValueError(
                f"x_gate must lie inside the medium [0, {self.L}], got {self.x_gate!r}"
            )
        # Normalize the control phase; it only ever appears as exp(+-1j*phi).
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)


@dataclass(frozen=True)
class DerivedScales:
    """Characteristic scales computed once per configuration.

    Attributes
    ----------
    z_b:
        Blockade radius: separation at which the van der Waals shift equals
        the decoherence-broadened control linewidth ``OmegaS**2 / gamma``.
    l_abs:
        Resonant absorption length ``c * gamma / G**2`` of the bare medium.
    d_b:
        Optical depth per blockade radius, ``z_b / l_abs``.
    d:
        Half the total optical depth of the medium, ``L / l_abs`` (the full
        depth seen by a resonant photon with controls off is ``2 * d``).
    gamma_eit:
        Transparency-window rate ``Omega**2 / (gamma * sqrt(d))`` of the
        equivalent single-leg slow-light medium.
    delta_omega0:
        Transparency width of the full two-mode medium; never exceeds
        ``gamma_eit``.
    """

    z_b: float
    l_abs: float
    d_b: float
    d: float
    gamma_eit: float
    delta_omega0: float


def derive_scales(config: PhysicalConfig, allow_oversized_blockade: bool = False) -> DerivedScales:
    """Compute the derived scales of a configuration.

    Raises
    ------
    OversizedBlockadeError
        If ``z_b > L``: the blockade sphere does not fit inside the medium,
        so bulk formulas quietly lose accuracy.  Pass
        ``allow_oversized_blockade=True`` to proceed anyway.
    """
    z_b = (config.C6 * config.gamma / config.OmegaS**2) ** (1.0 / 6.0)
    l_abs = config.c * config.gamma / config.G**2
    d_b = z_b / l_abs
    d = config.L / l_abs
    gamma_eit = config.Omega**2 / (config.gamma * math.sqrt(d))
    r2 = (config.Omega / config.OmegaS) ** 2
    bracket = (1.0 + 2.0 * r2 + 2.0 * r2**2) + 0.5 * d * r2**2
    delta_omega0 = gamma_eit / math.sqrt(bracket)
    if z_b > config.L and not allow_oversized_blockade:
        raise OversizedBlockadeError(
            f"blockade radius z_b={z_b:.6g} exceeds the medium length L={config.L:.6g}; "
            "pass allow_oversized_blockade=True to override"
        )
    return DerivedScales(
        z_b=z_b,
        l_abs=l_abs,
        d_b=d_b,
        d=d,
        gamma_eit=gamma_eit,
        delta_omega0=delta_omega0,
    )


def vdw_potential(dz: float, config: PhysicalConfig) -> float:
    """Van der Waals shift ``C6 / |dz|**6`` at separation ``dz`` from the gate.

    The potential is singular at zero separation; ``dz == 0`` raises rather
    than being clamped, so callers must treat the gate point explicitly.
    """
    if dz == 0.0:
        raise ValueError("van der Waals potential is singular at dz = 0")
    return config.C6 / dz**6


@dataclass(frozen=True)
class PulseSpec:
    """Discretized single-photon amplitude spectrum.

    ``amplitudes[i]`` is the amplitude density at ``omega_grid[i]``; the
    discrete norm ``sum_i w_i |amplitudes[i]|**2`` equals one with trapezoid
    weights ``w``.
    """

    duration: float
    omega_grid: np.ndarray
    amplitudes: np.ndarray

    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.omega_grid)


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    """Trapezoid quadrature weights for a strictly increasing 1-d grid."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise GridError("grid must be one-dimensional with at least two points")
    dx = np.diff(grid)
    if np.any(dx <= 0.0):
        raise GridError("grid must be strictly increasing")
    w = np.zeros_like(grid)
    w[:-1] += 0.5 * dx
    w[1:] += 0.5 * dx
    return w


def gaussian_pulse_spectrum(duration: float, omega_grid: np.ndarray) -> PulseSpec:
    """Spectrum of a transform-limited Gaussian probe pulse.

    ``duration`` is the full width at half maximum of the temporal intensity
    profile, the number quoted by pulse generators.  The amplitude spectrum is
    the real Gaussian ``exp(-omega**2 * duration**2 / (8 ln 2))``, normalized
    so that ``sum w_i |E0(omega_i)|**2 = 1`` on the supplied grid.

    The grid should be symmetric about zero and wide enough to hold the
    spectral support; truncation silently reduces accuracy of downstream
    overlap integrals, so tests pin the discrete moments instead.
    """
    if not (duration > 0.0 and math.isfinite(duration)):
        raise ValueError(f"duration must be positive and finite, got {duration!r}")
    omega_grid = np.asarray(omega_grid, dtype=float)
    w = trapezoid_weights(omega_grid)
    amp = np.exp(-(omega_grid**2) * duration**2 / (8.0 * math.log(2.0)))
    norm = np.sum(w * amp**2)
    if norm <= 0.0:
        raise GridError("pulse spectrum vanishes on the supplied grid")
    amp = amp / math.sqrt(norm)
    return PulseSpec(duration=duration, omega_grid=omega_grid, amplitudes=amp)
