from __future__ import annotations

import numpy as np
import pytest

from cqedprobe.circuit import (FluxQubitCircuit, Geometry, build_models, coupling_strength,
                               josephson_flux_derivative, josephson_potential)
from cqedprobe.model import ThermalState
from cqedprobe.response import build_grid, total_spectrum


@pytest.fixture
def circuit():
    return FluxQubitCircuit(e_j=200e9, alpha=0.8, s2=0.2, delta_phi_sq=1e-3)


def test_coupling_strength(circuit):
    assert coupling_strength(circuit) == 40e6
    assert coupling_strength(FluxQubitCircuit(e_j=200e9, delta_phi_sq=0.0)) == 0.0
    half = FluxQubitCircuit(e_j=200e9, delta_phi_sq=0.5e-3)
    assert coupling_strength(half) == pytest.approx(coupling_strength(circuit) / 2)
    flipped = FluxQubitCircuit(e_j=200e9, delta_phi_sq=-1e-3)
    assert coupling_strength(flipped) == coupling_strength(circuit)


@pytest.mark.parametrize("kwargs", [dict(e_j=0.0), dict(e_j=1e9, alpha=2.0),
                                    dict(e_j=1e9, delta_phi_sq=1.0)])
def test_invalid_circuit(kwargs):
    with pytest.raises(ValueError):
        FluxQubitCircuit(**kwargs)


def test_potential_special_points(circuit):
    ej, a = circuit.e_j, circuit.alpha
    assert josephson_potential(circuit, 0.0, 0.0) == pytest.approx(-2 * ej + 2 * a * ej)
    frustrated = josephson_potential(circuit, 0.3, -0.2, f_sq=0.5)
    assert frustrated == pytest.approx(-ej * (np.cos(0.3) + np.cos(-0.2)))


def test_potential_flux_periodicity(circuit):
    phases = (0.4, 1.1)
    for f in (0.1, 0.37):
        base = josephson_potential(circuit, *phases, f_sq=f, f_d=1.0)
        assert josephson_potential(circuit, *phases, f_sq=f + 2, f_d=1.0) == pytest.approx(base)
        assert josephson_potential(circuit, *phases, f_sq=f, f_d=3.0) == pytest.approx(base)


def test_flux_derivative_matches_finite_difference(circuit):
    f0, h = 0.3, 1e-6
    phases = (0.7, -0.2)
    fd = (josephson_potential(circuit, *phases, f_sq=f0 + h)
          - josephson_potential(circuit, *phases, f_sq=f0 - h)) / (2 * h)
    exact = josephson_flux_derivative(circuit, *phases, f_sq=f0)
    assert fd == pytest.approx(exact, rel=1e-8)


def test_build_models_defaults(circuit):
    chain, probe = build_models(circuit, Geometry(n_sites=20, hx_hz=0.4e9))
    assert chain.J == pytest.approx(1.0)
    assert chain.hx_over_2j == pytest.approx(0.2)
    assert probe.lam == pytest.approx(0.04)
    assert probe.omega_c == pytest.approx(12.0)


def test_strong_coupling_warns():
    loud = FluxQubitCircuit(e_j=200e9, delta_phi_sq=5e-3)
    with pytest.warns(RuntimeWarning, match="weak-probe"):
        build_models(loud, Geometry(n_sites=4, hx_hz=1e9))


def test_degeneracy_bias_required():
    with pytest.raises(ValueError):
        build_models(FluxQubitCircuit(e_j=200e9, f_d=0.5), Geometry(n_sites=4, hx_hz=1e9))


def test_zero_coupling_reduces_to_bath():
    chain, probe = build_models(FluxQubitCircuit(e_j=200e9, delta_phi_sq=0.0),
                                Geometry(n_sites=8, hx_hz=1e9))
    s = total_spectrum(probe, chain, ThermalState(), build_grid(probe, chain))
    assert np.array_equal(s.total, s.bath)
