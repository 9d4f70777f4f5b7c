from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from cqedprobe.fermionization import solve
from cqedprobe.model import ChainModel, ThermalState, thermal_state
from cqedprobe.oracle import Coupling, lehmann_density, oracle_spectrum, thermal_q_squared
from cqedprobe.response import (SQRT_2PI, bath_spectrum, build_grid, equal_time_spectrum,
                                extract_peaks, kernel_response, lorentzian, spectrum_from_density,
                                total_spectrum)
from cqedprobe.spectral import SpectralDensity, density


def test_lorentzian_peak_and_half_width():
    x = 0.3
    assert lorentzian(0.0, x) == pytest.approx(2 / (math.pi * x))
    assert lorentzian(x / 2, x) == pytest.approx(lorentzian(0.0, x) / 2)
    with pytest.raises(ValueError):
        lorentzian(0.0, 0.0)


def test_lorentzian_normalization():
    x = 1e-3
    area, _ = integrate.quad(lorentzian, -1e4 * x, 1e4 * x, args=(x,), points=[0.0], limit=200)
    assert area == pytest.approx(1.0, abs=1e-3)


def test_bath_peaks(probe):
    grid = np.array([probe.omega_c, -probe.omega_c, probe.omega_c + 2e3 * probe.kappa_tilde])
    cold = bath_spectrum(probe, grid)
    assert cold[0] == pytest.approx(SQRT_2PI * lorentzian(0.0, probe.kappa_tilde))
    assert cold[2] < 1e-6 * cold[0]
    warm = bath_spectrum(probe.replace(n_th=1.0), grid)
    assert warm[0] / warm[1] == pytest.approx(2.0, rel=1e-6)


def test_empty_density_gives_zero(probe):
    grid = np.linspace(-5, 5, 11)
    assert np.all(kernel_response(probe, SpectralDensity(), grid) == 0.0)


def test_zero_frequency_component_is_closed_form(probe):
    grid = np.linspace(-0.01, 0.01, 201)
    y0 = 3.7
    got = kernel_response(probe, SpectralDensity(zero_weight=y0), grid)
    lam, wc, k = probe.lam, probe.omega_c, probe.kappa
    want = 4 * SQRT_2PI * lam**2 * wc**2 * y0 * lorentzian(grid, probe.epsilon) / (k**2 / 4 + wc**2) ** 2
    assert np.allclose(got, want, rtol=1e-12, atol=0)


def test_series_components_add_up(probe, ring20):
    s = total_spectrum(probe, ring20, thermal_state(ring20, 20.0))
    assert np.array_equal(s.total, s.bath + s.zero_part + s.finite_part)
    assert np.all(s.total >= 0)
    with pytest.raises(ValueError):
        s.component("nope")


def test_decoupled_probe_leaves_only_bath(probe, ring20):
    s = total_spectrum(probe.replace(lam=0.0), ring20, thermal_state(ring20, 20.0))
    assert np.array_equal(s.total, s.bath)


def test_periodic_spectrum_matches_ed_kernel(probe):
    chain = ChainModel.from_ratio(4, 0.6)
    state = thermal_state(chain, 100.0)
    dens = density(solve(chain), state)
    grid = build_grid(probe, chain, dens)
    ours = spectrum_from_density(probe, dens, grid)
    ref = oracle_spectrum(chain, probe, state, Coupling.UNIFORM, grid, hamiltonian="fermion")
    idx = [np.argmin(np.abs(grid - c)) for c in dens.centers]
    assert np.allclose(ours.chain_part[idx], ref.chain_part[idx], rtol=1e-5)


def test_equal_time_values(probe):
    chain = ChainModel.from_ratio(6, 0.5, boundary="open")
    with pytest.warns(RuntimeWarning):
        assert equal_time_spectrum(probe.replace(lam=0.0, n_th=0.5), chain, ThermalState()) == 2.0
    with pytest.warns(RuntimeWarning):
        same_site = equal_time_spectrum(probe, chain, ThermalState(), pair=(2, 2))
    assert same_site == pytest.approx(1 + 16 * probe.lam**2 / probe.omega_c**2)
    big_cavity = probe.replace(omega_c=100.0)
    qq = thermal_q_squared(chain, ThermalState(), Coupling.PAIR, pair=(1, 4))
    want = 1 + 4 * big_cavity.lam**2 / big_cavity.omega_c**2 * qq
    assert equal_time_spectrum(big_cavity, chain, ThermalState(), pair=(1, 4)) == pytest.approx(
        want, rel=1e-8)


def test_bath_only_single_peak(probe):
    grid = build_grid(probe)
    s = spectrum_from_density(probe.replace(lam=0.0), SpectralDensity(), grid)
    peaks = extract_peaks(s, 1e-6 * s.total.max())
    assert len(peaks) == 1
    assert peaks[0].center == pytest.approx(probe.omega_c, abs=probe.kappa_tilde / 16)
    assert peaks[0].width == pytest.approx(probe.kappa_tilde, rel=0.02)


def test_peak_round_trip(probe):
    centers = np.array([-2.3, 0.7, 1.05, 3.9])
    dens = SpectralDensity(centers, np.array([0.2, 1.0, 0.5, 2.0]))
    grid = build_grid(probe, None, dens)
    s = spectrum_from_density(probe, dens, grid)
    peaks = extract_peaks(s, 1e-12, component="finite")
    step = probe.epsilon / 16
    assert len(peaks) == 4
    assert np.allclose(peaks.centers, centers, atol=step)
    assert np.allclose(peaks.widths, probe.epsilon, rtol=0.02)


def test_under_resolved_grid_rejected(probe):
    dens = SpectralDensity([1.0], [1.0])
    s = spectrum_from_density(probe, dens, np.linspace(-2, 2, 101))
    with pytest.raises(ValueError, match="under-resolved"):
        extract_peaks(s, 0.0, component="finite")


def test_grid_must_increase(probe):
    with pytest.raises(ValueError):
        spectrum_from_density(probe, SpectralDensity(), np.array([1.0, 0.0]))


def test_negative_peaks_shrink_on_cooling(probe):
    chain = ChainModel.from_ratio(8, 0.8)
    modes = solve(chain)
    heights = []
    for t in (200.0, 100.0, 50.0):
        d = density(modes, thermal_state(chain, t))
        heights.append(d.weights[d.centers < 0].max())
    assert heights[0] > heights[1] > heights[2]


def test_bath_is_negligible_at_chain_peaks(probe, ring20):
    s = total_spectrum(probe, ring20, thermal_state(ring20, 20.0))
    peaks = extract_peaks(s, 1e-6 * s.finite_part.max(), component="finite").positive()
    idx = [np.argmin(np.abs(s.grid - c)) for c in peaks.centers]
    assert np.all(s.bath[idx] < 1e-3 * s.total[idx])
