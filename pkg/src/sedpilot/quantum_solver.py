"""Wave-equation and Klein-Gordon residual checks, and a finite-difference
eigensolver for the 1D time-independent Schroedinger equation.

Natural units (hbar = c = 1) throughout. The Schroedinger operator is the
dimensionally consistent ``-(1/2m) d2/dx2 + V``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError, ResolutionError
from .fields import Grid1D, SampledField
from .pilot_wave import PilotWaveParams, pilot_wave_value

KINDS = ("infinite_well", "harmonic", "free", "tabulated")


@dataclass(frozen=True)
class Potential:
    """External potential V(x).

    ``infinite_well`` is V = 0 with Dirichlet walls at the domain edges, so
    its ``width`` must match the grid span. ``harmonic`` is
    ``0.5 * stiffness * (x - center)**2``.
    """

    kind: str
    parameters: dict = field(default_factory=dict)
    samples: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown potential kind {self.kind!r}")
        if self.kind == "harmonic" and not self.parameters.get("stiffness", 0) > 0:
            raise DomainError("harmonic stiffness must be positive")
        if self.kind == "infinite_well" and not self.parameters.get("width", 0) > 0:
            raise DomainError("well width must be positive")
        if self.kind == "tabulated":
            if self.samples is None:
                raise DomainError("tabulated potential needs samples")
            s = np.asarray(self.samples, dtype=float)
            if s.ndim != 1 or not np.all(np.isfinite(s)):
                raise DomainError("tabulated samples must be a finite 1D array")
            object.__setattr__(self, "samples", s)

    @classmethod
    def infinite_well(cls, width: float):
        return cls("infinite_well", {"width": float(width)})

    @classmethod
    def harmonic(cls, stiffness: float = 1.0, center: float = 0.0):
        return cls("harmonic", {"stiffness": float(stiffness), "center": float(center)})

    @classmethod
    def free(cls):
        return cls("free")

    @classmethod
    def tabulated(cls, samples):
        return cls("tabulated", samples=np.asarray(samples, dtype=float))

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "harmonic":
            k = self.parameters["stiffness"]
            c = self.parameters.get("center", 0.0)
            return 0.5 * k * (x - c) ** 2
        if self.kind == "tabulated":
            if self.samples.size != x.size:
                raise DomainError(f"tabulated potential has {self.samples.size} samples, grid has {x.size}")
            return self.samples
        return np.zeros_like(x)


@dataclass
class EnergySpectrum:
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray  # shape (n_states, n_points), grid aligned
    grid: Grid1D
    mass: float
    sigma: Optional[np.ndarray] = None

    def inner(self, i: int, j: int) -> float:
        return float(np.sum(self.eigenfunctions[i] * self.eigenfunctions[j]) * self.grid.spacing)


def _d2(values: np.ndarray, h: float) -> np.ndarray:
    """Central second difference on interior points."""
    return (values[2:] - 2.0 * values[1:-1] + values[:-2]) / (h * h)


def _rms(a) -> float:
    return float(np.sqrt(np.mean(np.square(a))))


def _carrier(params, x, t):
    xs = params.direction * x
    return params.amplitude * np.cos(params.omega_z * t - params.k_b * xs + params.theta1)


def wave_equation_residual(params: PilotWaveParams, grid: Grid1D, t: float = 0.0,
                           speed: float = 1.0, min_points_per_wavelength: int = 16,
                           part: str = "full") -> float:
    """Normalized RMS of phi_xx - phi_tt / speed**2 for the synthesized field.

    Time derivatives come from snapshots at t +- dt with dt = h / 10. The
    result is divided by the RMS of phi_xx.

    ``part="full"`` uses the whole product wave, whose two components move
    at c: with speed = c the residual is pure truncation error, with any
    other speed u it tends to |1 - c^2/u^2|. ``part="carrier"`` keeps only
    the factor cos(w_z t - k_B x + th1), the one that moves at c^2/v.
    """
    if not speed > 0:
        raise DomainError("speed must be positive")
    if part not in ("full", "carrier"):
        raise DomainError(f"unknown part {part!r}")
    wave = pilot_wave_value if part == "full" else _carrier
    h = grid.spacing
    shortest = 2.0 * math.pi / (params.k_plus if part == "full" else params.k_b)
    if shortest / h < min_points_per_wavelength:
        raise ResolutionError(f"grid spacing {h:.3g} gives {shortest / h:.1f} points per carrier wavelength, "
                              f"need {min_points_per_wavelength}")
    x = grid.points()
    dt = h / 10.0  # c = 1
    now = wave(params, x, t)
    later = wave(params, x, t + dt)
    earlier = wave(params, x, t - dt)
    phi_xx = _d2(now, h)
    phi_tt = (later - 2.0 * now + earlier)[1:-1] / (dt * dt)
    scale = _rms(phi_xx)
    if scale == 0.0:
        raise DomainError("field has no spatial curvature on this grid")
    return _rms(phi_xx - phi_tt / speed ** 2) / scale


def klein_gordon_residual(phi: SampledField, sigma: float, potential: Potential, mass: float) -> float:
    """Normalized RMS of phi'' + [(sigma - V)**2 - m**2] phi on interior points.

    Normalized by the RMS of phi on the same points, so scaling phi leaves
    the value unchanged.
    """
    if phi.ndim != 1:
        raise DomainError("klein_gordon_residual needs a 1D field")
    x = phi.axis(0)
    v = potential.evaluate(x)
    if v.shape != phi.values.shape:
        raise DomainError("potential and field are not grid-aligned")
    vals = phi.values
    inner = vals[1:-1]
    scale = _rms(inner)
    if scale == 0.0:
        raise DomainError("phi vanishes on the interior")
    r = _d2(vals, phi.spacing[0]) + ((sigma - v[1:-1]) ** 2 - mass ** 2) * inner
    return _rms(r) / scale


def solve_tise(potential: Potential, grid: Grid1D, mass: float = 1.0, n_states: int = 5) -> EnergySpectrum:
    """Lowest ``n_states`` eigenpairs of -(1/2m) D2 + V with Dirichlet walls.

    Eigenfunctions carry unit discrete norm (sum psi**2 * h = 1) and are
    signed so that the first lobe is positive.
    """
    if not mass > 0:
        raise DomainError("mass must be positive")
    if n_states < 1 or n_states >= grid.n_points / 4:
        raise ResolutionError(f"n_states={n_states} needs more than {4 * n_states} grid points, "
                              f"grid has {grid.n_points}")
    if potential.kind == "infinite_well" and not math.isclose(potential.parameters["width"], grid.span,
                                                              rel_tol=1e-12):
        raise DomainError("infinite well width must equal the grid span (walls sit on the domain edges)")
    h = grid.spacing
    x = grid.points()
    v = potential.evaluate(x)[1:-1]
    if not np.all(np.isfinite(v)):
        raise DomainError("potential must be bounded on the interior")
    kin = 1.0 / (2.0 * mass * h * h)
    diag = 2.0 * kin + v
    off = np.full(diag.size - 1, -kin)
    e, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_states - 1))
    psi = np.zeros((n_states, grid.n_points))
    psi[:, 1:-1] = vecs.T
    psi /= np.sqrt(np.sum(psi ** 2, axis=1, keepdims=True) * h)
    for row in psi:
        first = row[np.flatnonzero(np.abs(row) > 1e-8 * np.abs(row).max())[0]]
        if first < 0:
            row *= -1.0
    return EnergySpectrum(e, psi, grid, mass)


def sign_changes(values: np.ndarray, rel_tol: float = 1e-10) -> int:
    """Sign changes along ``values``, skipping near-zero samples."""
    v = np.asarray(values)
    v = v[np.abs(v) > rel_tol * np.abs(v).max()]
    return int(np.count_nonzero(np.signbit(v[1:]) != np.signbit(v[:-1])))


@dataclass(frozen=True)
class LimitRow:
    mass: float
    e0: float
    residual: float

    @property
    def beta_sq(self) -> float:
        return 2.0 * self.e0 / self.mass


def nonrelativistic_limit_study(potential: Potential, grid: Grid1D, mass_scale_list) -> list[LimitRow]:
    """Ground-state Klein-Gordon residual at sigma = m + E0 for each mass."""
    masses = [float(m) for m in mass_scale_list]
    if any(m <= 0 for m in masses):
        raise DomainError("masses must be positive")
    if any(b <= a for a, b in zip(masses, masses[1:])):
        raise DomainError("masses must be strictly ascending")
    rows = []
    for m in masses:
        spec = solve_tise(potential, grid, m, 1)
        e0 = float(spec.eigenvalues[0])
        phi = SampledField.on_grid(spec.eigenfunctions[0], grid)
        rows.append(LimitRow(m, e0, klein_gordon_residual(phi, m + e0, potential, m)))
    return rows
