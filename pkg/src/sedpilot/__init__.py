"""Pilot-wave laboratory: Doppler-split background-field waves, de Broglie
wavelength recovery, Schroedinger/Klein-Gordon checks and a Monte Carlo
double slit."""
__version__ = "0.1.0"

from .errors import (ConfigError, DegenerateInputError, DomainError, ResolutionError, SedPilotError,
                     StatisticsError)
from .fields import Grid1D, SampledField
from .pilot_wave import (PhysicalParticle, PilotWaveParams, UnitSystem, Units, compton_frequency,
                         de_broglie_wavelength, doppler_frequencies, pilot_wave_params, pilot_wave_value,
                         synthesize_field, wave_numbers)
