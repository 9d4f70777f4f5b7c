"""Resonator spectrum C(ω) = C_b(ω) + C_QQ(ω) built from a delta-peak density.

All spectra carry the √(2π) of the Fourier convention, so the bath peak of an
undriven resonator at zero temperature is √(2π) f_L(ω - ω_c, κ + ε).
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.signal import find_peaks, peak_widths

from .fermionization import solve
from .model import ChainModel, ProbeModel, ThermalState
from .spectral import SpectralDensity, density, equal_time_qq

log = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)

#: Samples per linewidth inside the dense windows.
SAMPLES_PER_WIDTH = 16
#: Half-width of each dense window, in linewidths.
WINDOW_WIDTHS = 10
#: Minimum samples per ε demanded by ``extract_peaks``.
MIN_SAMPLES_PER_EPSILON = 8
#: Grid points evaluated per block in ``kernel_response``.
CHUNK = 4096


@dataclass(frozen=True)
class SpectrumSeries:
    grid: NDArray[np.float64]
    bath: NDArray[np.float64]
    zero_part: NDArray[np.float64]
    finite_part: NDArray[np.float64]
    epsilon: float
    kappa_tilde: float

    @property
    def total(self) -> NDArray[np.float64]:
        return self.bath + self.zero_part + self.finite_part

    @property
    def chain_part(self) -> NDArray[np.float64]:
        """C_QQ = zero + finite."""
        return self.zero_part + self.finite_part

    def component(self, name: str) -> NDArray[np.float64]:
        table = {"total": self.total, "bath": self.bath, "zero": self.zero_part,
                 "finite": self.finite_part, "qq": self.chain_part}
        if name not in table:
            raise ValueError(f"unknown component {name!r}; choose from {sorted(table)}")
        return table[name]


@dataclass(frozen=True)
class Peak:
    center: float
    height: float
    width: float


class PeakList(tuple):
    """Peaks sorted by center."""

    def __new__(cls, peaks=()):
        return super().__new__(cls, sorted(peaks, key=lambda p: p.center))

    @property
    def centers(self) -> NDArray[np.float64]:
        return np.array([p.center for p in self])

    @property
    def heights(self) -> NDArray[np.float64]:
        return np.array([p.height for p in self])

    @property
    def widths(self) -> NDArray[np.float64]:
        return np.array([p.width for p in self])

    def positive(self) -> "PeakList":
        return PeakList(p for p in self if p.center > 0)

    def negative(self) -> "PeakList":
        return PeakList(p for p in self if p.center < 0)


def lorentzian(omega, x: float):
    """f_L(ω, x) = x / (2π(ω² + x²/4)), unit area, full width x at half maximum."""
    if not x > 0:
        raise ValueError(f"Lorentzian width must be positive, got {x}")
    w = np.asarray(omega, dtype=float)
    out = x / (2.0 * np.pi * (w * w + 0.25 * x * x))
    return float(out) if out.ndim == 0 else out


def bath_spectrum(probe: ProbeModel, grid) -> NDArray[np.float64]:
    """C_b(ω) = √(2π)[(n_th+1) f_L(ω-ω_c, κ̃) + n_th f_L(ω+ω_c, κ̃)]."""
    w = np.asarray(grid, dtype=float)
    kt = probe.kappa_tilde
    out = (probe.n_th + 1.0) * lorentzian(w - probe.omega_c, kt)
    if probe.n_th > 0:
        out = out + probe.n_th * lorentzian(w + probe.omega_c, kt)
    return SQRT_2PI * np.asarray(out, dtype=float)


def _filter_weights(probe: ProbeModel, centers: NDArray) -> NDArray:
    """Resonator filter 4λ²ω_c² / ((κ²/4 + ω_c² - c²)² + κ²c²) at each center."""
    c2 = centers * centers
    wc2, k2 = probe.omega_c**2, probe.kappa**2
    return 4.0 * probe.lam**2 * wc2 / ((0.25 * k2 + wc2 - c2) ** 2 + k2 * c2)


def _convolve(centers: NDArray, amps: NDArray, grid: NDArray, eps: float) -> NDArray:
    out = np.zeros_like(grid)
    if len(centers) == 0:
        return out
    for start in range(0, len(grid), CHUNK):
        block = grid[start:start + CHUNK]
        out[start:start + CHUNK] = lorentzian(block[:, None] - centers[None, :], eps) @ amps
    return out


def kernel_response(probe: ProbeModel, density: SpectralDensity, grid,
                    split: bool = False):
    """C_QQ(ω) for a delta-peak density.

    The ω₁ integral collapses onto the components: each (center c, weight w)
    contributes √(2π)·4λ²ω_c²·w·f_L(ω - c, ε)/((κ²/4 + ω_c² - c²)² + κ²c²).
    With ``split=True`` returns (zero part, finite part) separately.
    """
    w = np.asarray(grid, dtype=float)
    eps = probe.epsilon
    amps = SQRT_2PI * _filter_weights(probe, density.centers) * density.weights
    finite = _convolve(density.centers, amps, w, eps)
    zero_amp = SQRT_2PI * float(_filter_weights(probe, np.zeros(1))[0]) * density.zero_weight
    zero = zero_amp * lorentzian(w, eps) if density.zero_weight != 0 else np.zeros_like(w)
    zero = np.asarray(zero, dtype=float)
    if split:
        return zero, finite
    return zero + finite


def build_grid(probe: ProbeModel, chain: ChainModel | None = None,
               density: SpectralDensity | None = None, n_base: int = 2001) -> NDArray[np.float64]:
    """Adaptive frequency grid.

    A uniform base over ±(band edge + 10ε), dense windows of ±10ε (16 samples
    per ε) around every density center and around 0, and ±10κ̃ windows around
    ±ω_c. The base extends to cover ±ω_c.
    """
    eps, kt = probe.epsilon, probe.kappa_tilde
    edge = chain.bandwidth if chain is not None else 0.0
    if density is not None and len(density):
        edge = max(edge, float(np.abs(density.centers).max()))
    reach = max(edge + WINDOW_WIDTHS * eps, probe.omega_c + WINDOW_WIDTHS * kt)
    pieces = [np.linspace(-reach, reach, n_base)]

    def window(center, width):
        half = WINDOW_WIDTHS * width
        n = 2 * WINDOW_WIDTHS * SAMPLES_PER_WIDTH + 1
        return np.linspace(center - half, center + half, n)

    centers = [0.0]
    if density is not None:
        centers.extend(density.centers.tolist())
    pieces.extend(window(c, eps) for c in centers)
    pieces.extend(window(s * probe.omega_c, kt) for s in (1.0, -1.0))
    grid = np.unique(np.concatenate(pieces))
    # drop near-duplicates produced by overlapping windows
    keep = np.concatenate([[True], np.diff(grid) > 1e-12 * max(reach, 1.0)])
    return grid[keep]


def spectrum_from_density(probe: ProbeModel, density: SpectralDensity, grid) -> SpectrumSeries:
    w = np.asarray(grid, dtype=float)
    if w.ndim != 1 or len(w) < 2 or np.any(np.diff(w) <= 0):
        raise ValueError("grid must be a strictly increasing 1-d array")
    zero, finite = kernel_response(probe, density, w, split=True)
    return SpectrumSeries(grid=w, bath=bath_spectrum(probe, w), zero_part=zero,
                          finite_part=finite, epsilon=probe.epsilon,
                          kappa_tilde=probe.kappa_tilde)


def chain_density(chain: ChainModel, state: ThermalState) -> SpectralDensity:
    return density(solve(chain), state)


def total_spectrum(probe: ProbeModel, chain: ChainModel, state: ThermalState,
                   grid=None) -> SpectrumSeries:
    """Full C(ω) for the chain; builds an adaptive grid when none is given."""
    dens = chain_density(chain, state)
    if grid is None:
        grid = build_grid(probe, chain, dens)
    return spectrum_from_density(probe, dens, grid)


def equal_time_spectrum(probe: ProbeModel, chain: ChainModel, state: ThermalState,
                        pair: tuple[int, int] | None = None) -> float:
    """C(t=0) ≈ (2n_th + 1) + 4λ²⟨QQ⟩/ω_c², valid when ω_c dominates the chain scales."""
    if probe.omega_c < 5.0 * chain.bandwidth:
        warnings.warn(
            f"omega_c = {probe.omega_c:g} is not much larger than the chain band edge "
            f"{chain.bandwidth:g}; the equal-time approximation may be poor",
            RuntimeWarning, stacklevel=2)
    qq = equal_time_qq(solve(chain), state, pair)
    return 2.0 * probe.n_th + 1.0 + 4.0 * probe.lam**2 / probe.omega_c**2 * qq


def extract_peaks(series: SpectrumSeries, floor: float = 0.0,
                  component: str = "total") -> PeakList:
    """Local maxima of ``component`` above ``floor`` with their full width at half maximum.

    Every maximum must sit on a grid resolving ε with at least
    ``MIN_SAMPLES_PER_EPSILON`` samples, otherwise ValueError is raised.
    """
    y = series.component(component)
    x = series.grid
    idx, _ = find_peaks(y, height=floor if floor > 0 else None)
    idx = idx[y[idx] > floor]
    if len(idx) == 0:
        return PeakList()
    need = series.epsilon / MIN_SAMPLES_PER_EPSILON
    local = np.maximum(x[idx] - x[idx - 1], x[idx + 1] - x[idx])
    bad = local > need * (1.0 + 1e-9)
    if np.any(bad):
        where = x[idx[bad][0]]
        raise ValueError(
            f"grid under-resolved near omega = {where:.6g}: spacing {local[bad][0]:.3g} "
            f"exceeds epsilon/{MIN_SAMPLES_PER_EPSILON} = {need:.3g}")
    _, _, left, right = peak_widths(y, idx, rel_height=0.5)
    positions = np.arange(len(x))
    widths = np.interp(right, positions, x) - np.interp(left, positions, x)
    return PeakList(Peak(float(x[i]), float(y[i]), float(wd)) for i, wd in zip(idx, widths))
