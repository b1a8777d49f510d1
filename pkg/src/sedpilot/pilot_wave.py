"""Relativistic kinematics of the particle/background-field coupling and the
superposed traveling wave it produces.

All arithmetic runs in natural units (hbar = c = 1). SI quantities enter and
leave only through :class:`Units`, which fixes a reference mass so that the
three natural scales (mass, length, time) are pinned.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import constants as _const

from .errors import DegenerateInputError, DomainError
from .fields import Grid1D, SampledField

TWO_PI = 2.0 * math.pi


class UnitSystem(enum.Enum):
    NATURAL = "natural"
    SI = "si"


@dataclass(frozen=True)
class Units:
    """Conversion between SI and natural units (hbar = c = 1).

    A natural mass of 1 corresponds to ``reference_mass`` kilograms; the
    natural length and time units follow as hbar/(M c) and hbar/(M c^2).
    """

    reference_mass: float = _const.m_e

    hbar = _const.hbar
    c = _const.c
    h = _const.h

    @property
    def length_unit(self) -> float:
        return self.hbar / (self.reference_mass * self.c)

    @property
    def time_unit(self) -> float:
        return self.hbar / (self.reference_mass * self.c ** 2)

    def mass_to_natural(self, m_kg):
        return m_kg / self.reference_mass

    def mass_to_si(self, m):
        return m * self.reference_mass

    def velocity_to_natural(self, v_si):
        return v_si / self.c

    def velocity_to_si(self, v):
        return v * self.c

    def length_to_natural(self, x_si):
        return x_si / self.length_unit

    def length_to_si(self, x):
        return x * self.length_unit

    def time_to_natural(self, t_si):
        return t_si / self.time_unit

    def time_to_si(self, t):
        return t * self.time_unit

    def frequency_to_natural(self, w_si):
        return w_si * self.time_unit

    def frequency_to_si(self, w):
        return w / self.time_unit

    def wavenumber_to_natural(self, k_si):
        return k_si * self.length_unit

    def wavenumber_to_si(self, k):
        return k / self.length_unit


DEFAULT_UNITS = Units()


@dataclass(frozen=True)
class PhysicalParticle:
    """A massive particle moving along x. ``velocity`` is signed.

    Mass and velocity are natural-unit numbers (velocity as a fraction of c)
    unless the particle was built with :meth:`from_si`.
    """

    mass: float
    velocity: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.mass) or self.mass <= 0:
            raise DomainError(f"mass must be positive, got {self.mass}")
        if not np.isfinite(self.velocity) or abs(self.velocity) >= 1.0:
            raise DomainError(f"|velocity| must be below c, got {self.velocity}")

    @classmethod
    def from_si(cls, mass_kg: float, velocity_m_s: float, units: Units = DEFAULT_UNITS):
        if not mass_kg > 0:
            raise DomainError(f"mass must be positive, got {mass_kg}")
        return cls(units.mass_to_natural(mass_kg), units.velocity_to_natural(velocity_m_s))

    @classmethod
    def from_beta(cls, beta: float, mass: float = 1.0):
        return cls(mass, beta)

    @property
    def beta(self) -> float:
        return abs(self.velocity)

    @property
    def gamma(self) -> float:
        b = self.beta
        # (1-b)(1+b) keeps precision as b -> 1
        return 1.0 / math.sqrt((1.0 - b) * (1.0 + b))

    @property
    def momentum(self) -> float:
        return self.gamma * self.mass * self.beta

    @property
    def direction(self) -> int:
        return -1 if self.velocity < 0 else 1


def _check_units(units) -> UnitSystem:
    try:
        return UnitSystem(units)
    except ValueError:
        raise DomainError(f"unknown unit system {units!r}") from None


def compton_frequency(particle: PhysicalParticle, units=UnitSystem.NATURAL,
                      converter: Units = DEFAULT_UNITS) -> float:
    """Angular frequency m c^2 / hbar of the intrinsic oscillation."""
    if not particle.mass > 0:
        raise DomainError("mass must be positive")
    w = particle.mass  # hbar = c = 1
    if _check_units(units) is UnitSystem.SI:
        return converter.frequency_to_si(w)
    return w


def compton_wavelength(particle: PhysicalParticle, units=UnitSystem.NATURAL,
                       converter: Units = DEFAULT_UNITS) -> float:
    lam = TWO_PI / particle.mass
    if _check_units(units) is UnitSystem.SI:
        return converter.length_to_si(lam)
    return lam


def doppler_frequencies(particle: PhysicalParticle) -> tuple[float, float]:
    """Frequencies (w_z + w_B, w_z - w_B) of the two Doppler-split modes.

    The difference is evaluated as w_c / (gamma (1 + beta)), which equals
    gamma (1 - beta) w_c without the cancellation near beta -> 1.
    """
    _require_subluminal(particle)
    w_c = particle.mass
    g, b = particle.gamma, particle.beta
    return g * (1.0 + b) * w_c, w_c / (g * (1.0 + b))


def wave_numbers(particle: PhysicalParticle) -> tuple[float, float]:
    """Wavenumbers (gamma k_c + k_B, gamma k_c - k_B), with k_z taken as k_c."""
    _require_subluminal(particle)
    k_c = particle.mass  # omega_c / c
    g, b = particle.gamma, particle.beta
    return g * (1.0 + b) * k_c, k_c / (g * (1.0 + b))


def _require_subluminal(particle):
    if abs(particle.velocity) >= 1.0:
        raise DomainError("|v| must be below c")


@dataclass(frozen=True)
class PilotWaveParams:
    """Frequencies, wavenumbers and phases of the two-factor pilot wave.

    Natural units throughout. ``direction`` mirrors x for negative velocity.
    """

    omega_c: float
    omega_z: float
    omega_b: float
    k_c: float
    k_b: float
    lambda_c: float
    lambda_b: float
    theta1: float = 0.0
    theta2: float = 0.0
    amplitude: float = 2.0
    direction: int = 1

    def __post_init__(self):
        for name in ("theta1", "theta2"):
            th = getattr(self, name)
            if not 0.0 <= th < TWO_PI:
                raise DomainError(f"{name} must lie in [0, 2pi), got {th}")

    @property
    def gamma(self) -> float:
        return self.omega_z / self.omega_c

    @property
    def beta(self) -> float:
        return self.omega_b / self.omega_z

    @property
    def envelope_k(self) -> float:
        """Spatial wavenumber gamma k_c of the second (fast in x) factor."""
        return self.gamma * self.k_c

    @property
    def carrier_phase_velocity(self) -> float:
        return self.omega_z / self.k_b

    @property
    def envelope_velocity(self) -> float:
        return self.omega_b / (self.gamma * self.k_c)

    @property
    def omega_plus(self) -> float:
        return self.omega_z + self.omega_b

    @property
    def omega_minus(self) -> float:
        return self.omega_c / (self.gamma * (1.0 + self.beta))

    @property
    def k_plus(self) -> float:
        return self.envelope_k + self.k_b

    @property
    def k_minus(self) -> float:
        return self.k_c / (self.gamma * (1.0 + self.beta))

    def with_phases(self, theta1: float, theta2: float) -> "PilotWaveParams":
        return PilotWaveParams(self.omega_c, self.omega_z, self.omega_b, self.k_c, self.k_b,
                               self.lambda_c, self.lambda_b, theta1 % TWO_PI, theta2 % TWO_PI,
                               self.amplitude, self.direction)


def pilot_wave_params(particle: PhysicalParticle, theta1: float = 0.0, theta2: float = 0.0,
                      amplitude: float = 2.0) -> PilotWaveParams:
    """Build the parameter set for ``particle``.

    ``lambda_b`` is infinite for a particle at rest; that value never reaches
    field data because :func:`de_broglie_wavelength` refuses v = 0.
    """
    w_c = compton_frequency(particle)
    g, b = particle.gamma, particle.beta
    k_c = w_c  # c = 1
    k_b = g * b * k_c
    return PilotWaveParams(
        omega_c=w_c,
        omega_z=g * w_c,
        omega_b=g * b * w_c,
        k_c=k_c,
        k_b=k_b,
        lambda_c=TWO_PI / w_c,
        lambda_b=TWO_PI / k_b if k_b > 0 else math.inf,
        theta1=theta1 % TWO_PI,
        theta2=theta2 % TWO_PI,
        amplitude=amplitude,
        direction=particle.direction,
    )


def random_pilot_wave_params(particle: PhysicalParticle, rng: np.random.Generator,
                             amplitude: float = 2.0) -> PilotWaveParams:
    """Parameters with theta1, theta2 drawn independently from U[0, 2pi)."""
    th1, th2 = rng.uniform(0.0, TWO_PI, size=2)
    return pilot_wave_params(particle, th1, th2, amplitude)


def pilot_wave_value(params: PilotWaveParams, x, t):
    """A cos(w_z t - k_B x + th1) cos(w_B t - gamma k_c x + th2).

    Accepts scalars or broadcastable arrays for ``x`` and ``t``.
    """
    xs = params.direction * np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    carrier = np.cos(params.omega_z * t - params.k_b * xs + params.theta1)
    envelope = np.cos(params.omega_b * t - params.envelope_k * xs + params.theta2)
    out = params.amplitude * carrier * envelope
    return float(out) if out.ndim == 0 else out


def component_waves(params: PilotWaveParams, x, t):
    """The two counter-propagating unit waves whose sum is the pilot wave.

    Returns ``(phi_plus, phi_minus)`` scaled by ``amplitude / 2``. ``phi_plus``
    travels along the direction of motion, ``phi_minus`` against it.
    """
    xs = params.direction * np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    half = 0.5 * params.amplitude
    plus = half * np.cos(params.omega_plus * t - params.k_plus * xs + (params.theta1 + params.theta2))
    minus = half * np.cos(params.omega_minus * t + params.k_minus * xs + (params.theta1 - params.theta2))
    return plus, minus


def synthesize_field(params: PilotWaveParams, grid, t: float = 0.0) -> SampledField:
    """Sample the pilot wave on ``grid`` at time ``t``.

    ``grid`` is a :class:`Grid1D` or an explicit 1D coordinate array with
    uniform spacing.
    """
    if isinstance(grid, Grid1D):
        x = grid.points()
        x0, h = grid.x_min, grid.spacing
    else:
        x = np.asarray(grid, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise DomainError("grid needs at least 2 points")
        steps = np.diff(x)
        h = float(steps.mean())
        if not h > 0 or not np.allclose(steps, h, rtol=1e-9, atol=0.0):
            raise DomainError("grid spacing must be uniform and positive")
        x0 = float(x[0])
    return SampledField(pilot_wave_value(params, x, t), (x0,), (h,), float(t))


def synthesize_spacetime(params: PilotWaveParams, xgrid: Grid1D, tgrid: Grid1D) -> SampledField:
    """2D field with axis 0 = time, axis 1 = space."""
    t = tgrid.points()[:, None]
    x = xgrid.points()[None, :]
    return SampledField(pilot_wave_value(params, x, t), (tgrid.x_min, xgrid.x_min),
                        (tgrid.spacing, xgrid.spacing), tgrid.x_min)


def de_broglie_wavelength(particle: PhysicalParticle, units=UnitSystem.NATURAL,
                          converter: Units = DEFAULT_UNITS) -> float:
    """h / p with the relativistic momentum p = gamma m |v|."""
    p = particle.momentum
    if p == 0.0:
        raise DegenerateInputError("infinite wavelength: the modulation vanishes for a particle at rest")
    lam = TWO_PI / p  # h = 2 pi hbar = 2 pi
    if _check_units(units) is UnitSystem.SI:
        return converter.length_to_si(lam)
    return lam
