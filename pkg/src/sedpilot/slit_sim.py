"""Monte Carlo double slit driven by per-particle stochastic fields.

Every particle gets its own field realization: a handful of unit plane waves
at the de Broglie wavelength with random phases and small random incidence
angles. The realization is propagated through the slits by Huygens-Fresnel
summation (2D geometry, cylindrical 1/sqrt(r) spreading) and the particle's
arrival point is drawn from that realization's own intensity.

Per-particle seeds come from the splitmix64 sequence started at the master
seed, so particle ``i`` can be recomputed without touching the others.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, StatisticsError
from .fields import Grid1D, SampledField
from .pilot_wave import PhysicalParticle, de_broglie_wavelength

TWO_PI = 2.0 * math.pi
MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
FRAUNHOFER_FACTOR = 10.0


def splitmix64(state: int) -> int:
    """One splitmix64 output for the given (already advanced) state."""
    z = state & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def particle_seed(master_seed: int, index: int) -> int:
    """Seed of particle ``index``: output ``index + 1`` of splitmix64(master_seed)."""
    if not 0 <= master_seed <= MASK64:
        raise DomainError("master_seed must be an unsigned 64-bit integer")
    return splitmix64((master_seed + (index + 1) * GOLDEN_GAMMA) & MASK64)


@dataclass(frozen=True)
class SlitGeometry:
    """Two slits centred at +-d/2 on the aperture line, screen at distance L.

    ``open_slits`` covers a slit when its entry is False; slit 1 is at -d/2.
    """

    slit_separation: float
    slit_width: float
    screen_distance: float
    detector_half_width: float
    aperture_samples_per_slit: int = 64
    open_slits: tuple = (True, True)

    def __post_init__(self):
        if not self.slit_width > 0:
            raise DomainError("slit width must be positive")
        if not self.slit_separation > self.slit_width:
            raise DomainError("slits overlap: separation must exceed width")
        if not self.screen_distance > 0:
            raise DomainError("screen distance must be positive")
        if not self.detector_half_width > 0:
            raise DomainError("detector half width must be positive")
        if self.aperture_samples_per_slit < 1:
            raise DomainError("need at least one aperture sample per slit")
        if len(self.open_slits) != 2:
            raise DomainError("open_slits needs one flag per slit")

    @classmethod
    def in_wavelengths(cls, wavelength, d=10.0, a=1.0, L=1000.0, half_width=400.0, **kw):
        """Geometry with every length given in units of ``wavelength``."""
        return cls(d * wavelength, a * wavelength, L * wavelength, half_width * wavelength, **kw)

    def covered(self, slit: int) -> "SlitGeometry":
        flags = [True, True]
        flags[slit - 1] = False
        return SlitGeometry(self.slit_separation, self.slit_width, self.screen_distance,
                            self.detector_half_width, self.aperture_samples_per_slit, tuple(flags))

    @property
    def both_open(self) -> bool:
        return all(self.open_slits)

    def is_fraunhofer(self, wavelength: float) -> bool:
        """Far-field diagnostic: L >= 10 d^2 / lambda."""
        return self.screen_distance >= FRAUNHOFER_FACTOR * self.slit_separation ** 2 / wavelength

    def sources(self):
        """Secondary-source positions and quadrature weights on the open slits."""
        n = self.aperture_samples_per_slit
        offsets = self.slit_width * ((np.arange(n) + 0.5) / n - 0.5)
        ys = []
        for centre, is_open in zip((-0.5 * self.slit_separation, 0.5 * self.slit_separation), self.open_slits):
            if is_open:
                ys.append(centre + offsets)
        if not ys:
            return np.empty(0), np.empty(0)
        y = np.concatenate(ys)
        return y, np.full(y.size, self.slit_width / n)

    def detector_grid(self, n_points: int) -> Grid1D:
        return Grid1D(-self.detector_half_width, self.detector_half_width, n_points)


@dataclass(frozen=True)
class FieldRealization:
    mode_phases: np.ndarray
    mode_angles: np.ndarray
    n_modes: int
    seed: int


def _draw(rng: np.random.Generator, n_modes: int, angular_spread: float):
    phases = rng.uniform(0.0, TWO_PI, n_modes) % TWO_PI
    angles = rng.uniform(-angular_spread, angular_spread, n_modes)
    return phases, angles


def draw_realization(seed: int, n_modes: int = 16, angular_spread: float = 0.0) -> FieldRealization:
    if n_modes < 1:
        raise DomainError("need at least one field mode")
    if angular_spread < 0:
        raise DomainError("angular spread must be non-negative")
    phases, angles = _draw(np.random.default_rng(seed), n_modes, angular_spread)
    return FieldRealization(phases, angles, n_modes, seed)


@dataclass
class ArrivalHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    total: int
    seed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if np.any(np.diff(self.bin_edges) <= 0):
            raise DomainError("bin edges must be strictly ascending")
        if self.counts.size != self.bin_edges.size - 1:
            raise DomainError("counts/bin_edges size mismatch")
        if np.any(self.counts < 0) or int(self.counts.sum()) != self.total:
            raise DomainError("counts must be non-negative and sum to total")

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    def merge(self, other: "ArrivalHistogram") -> "ArrivalHistogram":
        """Add counts of a histogram with identical bins (order independent)."""
        if not np.array_equal(self.bin_edges, other.bin_edges):
            raise DomainError("cannot merge histograms with different bins")
        return ArrivalHistogram(self.bin_edges.copy(), self.counts + other.counts,
                                self.total + other.total, self.seed, dict(self.meta))


def _setup(geometry: SlitGeometry, wavelength: float, detector_grid: Grid1D):
    if not wavelength > 0:
        raise DomainError("wavelength must be positive")
    if detector_grid.x_min < -geometry.detector_half_width * (1 + 1e-12) or \
            detector_grid.x_max > geometry.detector_half_width * (1 + 1e-12):
        raise DomainError("detector grid extends beyond the detector")
    src_y, src_w = geometry.sources()
    if src_y.size == 0:
        raise DomainError("both slits are covered")
    k = TWO_PI / wavelength
    K = kernels.propagator(src_y, src_w, detector_grid.points(), geometry.screen_distance, k)
    return src_y, k, K


def diffracted_intensity(geometry: SlitGeometry, wavelength: float, realization: FieldRealization,
                         detector_grid: Grid1D) -> SampledField:
    """|sum over aperture sources of incident * exp(i k r) / sqrt(r)|^2 on the detector."""
    if realization.n_modes < 1 or np.size(realization.mode_phases) == 0:
        raise DomainError("field realization has no modes")
    src_y, k, K = _setup(geometry, wavelength, detector_grid)
    phases = np.ascontiguousarray(realization.mode_phases, dtype=float)[None, :]
    sins = np.ascontiguousarray(np.sin(realization.mode_angles), dtype=float)[None, :]
    values = kernels.intensity(K, src_y, k, phases, sins)[0]
    return SampledField.on_grid(values, detector_grid, seed=realization.seed)


def sample_arrival(intensity: SampledField, rng: np.random.Generator) -> float:
    """One draw from the intensity read as a piecewise-linear density."""
    return _sample(intensity, rng.random())


def _sample(intensity: SampledField, u: float) -> float:
    vals = intensity.values
    if intensity.ndim != 1 or vals.size < 2:
        raise DomainError("need a 1D intensity with at least 2 samples")
    if np.any(vals < 0):
        raise DomainError("intensity must be non-negative")
    if not np.any(vals > 0):
        raise DomainError("intensity is identically zero")
    return float(kernels.inverse_cdf(vals, intensity.origin[0], intensity.spacing[0], u)[0])


def simulate_arrivals(geometry: SlitGeometry, wavelength: float, n_particles: int, n_modes: int = 16,
                      angular_spread: float = 0.0, master_seed: int = 0, detector_points: int = 801,
                      start: int = 0, chunk: int = 2048) -> np.ndarray:
    """Arrival coordinates of particles ``start .. start + n_particles - 1``.

    Splitting the index range across workers and concatenating gives the
    same arrivals as one call.
    """
    if n_particles < 1:
        raise DomainError("need at least one particle")
    if n_modes < 1:
        raise DomainError("need at least one field mode")
    if angular_spread < 0:
        raise DomainError("angular spread must be non-negative")
    grid = geometry.detector_grid(detector_points)
    src_y, k, K = _setup(geometry, wavelength, grid)
    out = np.empty(n_particles)
    for lo in range(0, n_particles, chunk):
        hi = min(lo + chunk, n_particles)
        phases = np.empty((hi - lo, n_modes))
        sins = np.empty((hi - lo, n_modes))
        u = np.empty(hi - lo)
        for row, i in enumerate(range(start + lo, start + hi)):
            rng = np.random.default_rng(particle_seed(master_seed, i))
            ph, ang = _draw(rng, n_modes, angular_spread)
            phases[row] = ph
            sins[row] = np.sin(ang)
            u[row] = rng.random()
        out[lo:hi] = kernels.arrivals(K, src_y, k, phases, sins, u, grid.x_min, grid.spacing)
    if np.any(np.isnan(out)):
        raise DomainError("a field realization produced zero intensity on the detector")
    return out


def bin_arrivals(arrivals: np.ndarray, geometry: SlitGeometry, bins: int, seed: int, **meta) -> ArrivalHistogram:
    edges = np.linspace(-geometry.detector_half_width, geometry.detector_half_width, bins + 1)
    counts, _ = np.histogram(arrivals, bins=edges)
    return ArrivalHistogram(edges, counts, int(counts.sum()), seed, dict(meta))


def run_double_slit(geometry: SlitGeometry, particle: PhysicalParticle, n_particles: int, n_modes: int = 16,
                    angular_spread: float = 0.0, master_seed: int = 0, bins: int = 200,
                    detector_points: int = 801) -> ArrivalHistogram:
    """Fire ``n_particles`` one at a time, each with its own field, and bin the arrivals."""
    if bins < 1:
        raise DomainError("need at least one bin")
    wavelength = de_broglie_wavelength(particle)
    arr = simulate_arrivals(geometry, wavelength, n_particles, n_modes, angular_spread, master_seed,
                            detector_points)
    return bin_arrivals(arr, geometry, bins, master_seed, wavelength=wavelength)


# ---------------------------------------------------------------- analytic oracles

def projected(y, screen_distance):
    """Screen coordinate mapped to L sin(theta); equals y in the paraxial limit."""
    y = np.asarray(y, dtype=float)
    return screen_distance * y / np.sqrt(y * y + screen_distance * screen_distance)


def unprojected(u, screen_distance):
    u = np.asarray(u, dtype=float)
    return screen_distance * u / np.sqrt(screen_distance * screen_distance - u * u)


def far_field_intensity(y, geometry: SlitGeometry, wavelength: float):
    """Fraunhofer pattern cos^2(pi d s / lam) sinc^2(pi a s / lam) / r, s = sin(theta).

    The 1/r factor is the cylindrical spreading of the Huygens sum. With one
    slit covered the cos^2 factor drops out.
    """
    y = np.asarray(y, dtype=float)
    L = geometry.screen_distance
    r = np.sqrt(y * y + L * L)
    s = y / r
    env = np.sinc(geometry.slit_width * s / wavelength) ** 2  # np.sinc(x) = sin(pi x)/(pi x)
    if geometry.both_open:
        env = env * np.cos(math.pi * geometry.slit_separation * s / wavelength) ** 2
    return env / r


def far_field_minima(geometry: SlitGeometry, wavelength: float, orders: int = 3) -> np.ndarray:
    """Screen positions of the two-slit zeros d sin(theta) = (m + 1/2) lam, |m| <= orders."""
    m = np.arange(-orders - 1, orders + 1) + 0.5
    return unprojected(m * wavelength * geometry.screen_distance / geometry.slit_separation,
                       geometry.screen_distance)


def expected_counts(histogram: ArrivalHistogram, geometry: SlitGeometry, wavelength: float,
                    nodes: int = 16) -> np.ndarray:
    """Far-field pattern integrated over each bin, scaled to the histogram total."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    lo, hi = histogram.bin_edges[:-1], histogram.bin_edges[1:]
    half = 0.5 * (hi - lo)
    pts = 0.5 * (hi + lo)[:, None] + half[:, None] * x[None, :]
    mass = (far_field_intensity(pts, geometry, wavelength) * w[None, :]).sum(axis=1) * half
    return histogram.total * mass / mass.sum()


def chi2_per_dof(histogram: ArrivalHistogram, expected: np.ndarray, min_expected: float = 20.0) -> float:
    """Pearson chi^2 per degree of freedom after fitting one overall amplitude."""
    use = expected >= min_expected
    if np.count_nonzero(use) < 2:
        raise StatisticsError("fewer than two bins with enough expected counts")
    obs = histogram.counts[use].astype(float)
    exp = expected[use]
    amp = obs.sum() / exp.sum()
    chi2 = np.sum((obs - amp * exp) ** 2 / (amp * exp))
    return float(chi2 / (np.count_nonzero(use) - 1))


def _local_harmonic_fit(u, counts, period, center, halfwidth, quadratic=False):
    sel = np.abs(u - center) <= halfwidth
    uu = u[sel] - center
    phase = TWO_PI * uu / period
    cols = [np.ones_like(uu), np.cos(phase), np.sin(phase)]
    if quadratic:
        cols.append((uu / period) ** 2)
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), counts[sel].astype(float), rcond=None)
    return coef


def fringe_visibility(histogram: ArrivalHistogram, expected_spacing: float, min_total: int = 10_000) -> float:
    """Fringe contrast (I_max - I_min) / (I_max + I_min) over the central three fringes.

    Counts within 1.5 fringe spacings of the centre are fitted by
    ``c0 + c3 (y/D)^2 + c1 cos(2 pi y / D) + c2 sin(2 pi y / D)``; the
    quadratic term absorbs the single-slit envelope. The contrast of that
    fit is ``hypot(c1, c2) / c0``, clipped to [0, 1].
    """
    if histogram.total < min_total:
        raise StatisticsError(f"visibility needs at least {min_total} counts, got {histogram.total}")
    if not expected_spacing > 0:
        raise DomainError("expected spacing must be positive")
    centers = histogram.centers
    if min(-histogram.bin_edges[0], histogram.bin_edges[-1]) < 1.5 * expected_spacing:
        raise StatisticsError("fewer than three expected fringes inside the detector")
    c0, c1, c2, _ = _local_harmonic_fit(centers, histogram.counts, expected_spacing, 0.0,
                                        1.5 * expected_spacing, quadratic=True)
    if not c0 > 0:
        return 0.0
    return float(min(1.0, math.hypot(c1, c2) / c0))


def fringe_peaks(histogram: ArrivalHistogram, expected_spacing: float, orders: int = 3,
                 screen_distance: float | None = None) -> np.ndarray:
    """Located interference maxima for m = -orders .. orders.

    With ``screen_distance`` the bins are first mapped to L sin(theta), where
    the maxima are equally spaced, and the returned peaks are in that
    coordinate. Each peak is the phase of a local harmonic fit over one
    fringe centred on the nominal position.
    """
    u = histogram.centers if screen_distance is None else projected(histogram.centers, screen_distance)
    lo = u.min()
    hi = u.max()
    if (orders + 0.5) * expected_spacing > min(-lo, hi):
        raise StatisticsError(f"detector does not cover {orders} fringes on each side")
    peaks = []
    for m in range(-orders, orders + 1):
        c = m * expected_spacing
        _, c1, c2 = _local_harmonic_fit(u, histogram.counts, expected_spacing, c, 0.5 * expected_spacing)
        peaks.append(c + math.atan2(c2, c1) * expected_spacing / TWO_PI)
    return np.asarray(peaks)


def fringe_spacing(histogram: ArrivalHistogram, expected_spacing: float, orders: int = 3,
                   screen_distance: float | None = None) -> float:
    """Mean distance between neighbouring located maxima."""
    peaks = fringe_peaks(histogram, expected_spacing, orders, screen_distance)
    return float(np.mean(np.diff(peaks)))
