"""Spectroscopy of a transverse-field Ising chain through a dispersively coupled resonator.

The chain is solved as free fermions (analytic Bogoliubov modes on a ring,
numerical diagonalization for open ends). The coupling operator's spectral
density is turned into the resonator output spectrum, and everything small
enough is cross-checked against brute-force exact diagonalization.
"""

__version__ = "0.1.0"

from .model import (Boundary, ChainModel, CouplingProfile, ProbeModel, Statistics, ThermalState,
                    reference_probe, thermal_state)
from .fermionization import solve
from .spectral import SpectralDensity, density, equal_time_qq
from .response import (SpectrumSeries, bath_spectrum, extract_peaks, kernel_response, lorentzian,
                       total_spectrum)
from .backaction import max_array_size

__all__ = [
    "Boundary", "ChainModel", "CouplingProfile", "ProbeModel", "Statistics", "ThermalState",
    "reference_probe", "thermal_state", "solve", "SpectralDensity", "density", "equal_time_qq",
    "SpectrumSeries", "bath_spectrum", "extract_peaks", "kernel_response", "lorentzian",
    "total_spectrum", "max_array_size",
]
