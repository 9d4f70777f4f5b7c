"""Probe parameters from flux-qubit circuit constants.

Each simulator site is a four-junction flux qubit whose SQUID loop threads the
resonator's magnetic flux. Modulating the SQUID flux by δΦ_sq couples the
resonator to σˣ on every qubit with strength ħλ = -s₂E_J δΦ_sq/Φ₀.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import DEFAULT_UNIT_HZ, Boundary, ChainModel, CouplingProfile, ProbeModel, to_units

WEAK_PROBE_RATIO = 0.1


@dataclass(frozen=True)
class FluxQubitCircuit:
    """Device constants; energies are quoted as frequencies E/h in Hz.

    ``mutual_coupling_energy`` is ħJ = M_qq I_cir² expressed as J/2π in Hz.
    ``delta_phi_sq`` is the SQUID flux modulation in units of Φ₀.
    """

    e_j: float
    alpha: float = 0.8
    s2: float = 0.2
    delta_phi_sq: float = 1e-3
    mutual_coupling_energy: float = 1e9
    f_d: float = 1.0
    f_sq: float = 0.0

    def __post_init__(self):
        if not self.e_j > 0:
            raise ValueError("Josephson energy must be positive")
        if not 0 < self.alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")
        if not abs(self.delta_phi_sq) < 1:
            raise ValueError("|delta_phi_sq| must be below one flux quantum")
        if self.mutual_coupling_energy < 0:
            raise ValueError("mutual coupling energy must be nonnegative")

    def require_degeneracy_bias(self):
        if not math.isclose(self.f_d, 1.0):
            raise ValueError(f"qubits must be biased at the degeneracy point f_d = 1, got {self.f_d}")


@dataclass(frozen=True)
class Geometry:
    """Array and resonator settings that the circuit does not fix (frequencies in Hz)."""

    n_sites: int
    hx_hz: float
    omega_c_hz: float = 12e9
    kappa_hz: float = 100e3
    epsilon_hz: float = 600e3
    temperature_mk: float = 20.0
    n_th: float = 0.0
    boundary: Boundary = Boundary.PERIODIC
    coupling_profile: CouplingProfile = CouplingProfile.UNIFORM


def coupling_strength(circuit: FluxQubitCircuit) -> float:
    """|s₂ E_J δΦ_sq| in Hz (λ/2π); the sign drops out of every observable."""
    return abs(circuit.s2 * circuit.e_j * circuit.delta_phi_sq)


def josephson_potential(circuit: FluxQubitCircuit, phi_t, phi_b, f_sq=None, f_d=None):
    """U_J/h in Hz: -E_J[cos φ_t + cos φ_b] - 2αE_J cos(πf_sq) cos(φ_t + φ_b + πf_d)."""
    fs = circuit.f_sq if f_sq is None else f_sq
    fd = circuit.f_d if f_d is None else f_d
    ej = circuit.e_j
    return (-ej * (np.cos(phi_t) + np.cos(phi_b))
            - 2.0 * circuit.alpha * ej * np.cos(np.pi * fs) * np.cos(phi_t + phi_b + np.pi * fd))


def josephson_flux_derivative(circuit: FluxQubitCircuit, phi_t, phi_b, f_sq=None):
    """∂U_J/∂f_sq = 2παE_J sin(πf_sq) cos(φ_t + φ_b + πf_d)."""
    fs = circuit.f_sq if f_sq is None else f_sq
    return (2.0 * np.pi * circuit.alpha * circuit.e_j * np.sin(np.pi * fs)
            * np.cos(phi_t + phi_b + np.pi * circuit.f_d))


def build_models(circuit: FluxQubitCircuit, geometry: Geometry,
                 unit_hz: float = DEFAULT_UNIT_HZ) -> tuple[ChainModel, ProbeModel]:
    """Chain and probe models in internal units of ``unit_hz``.

    Warns when λ exceeds a tenth of J, where the probe is no longer weak.
    """
    circuit.require_degeneracy_bias()
    lam_hz = coupling_strength(circuit)
    j_hz = circuit.mutual_coupling_energy
    if j_hz > 0 and lam_hz > WEAK_PROBE_RATIO * j_hz:
        warnings.warn(
            f"coupling lambda/2pi = {lam_hz:.3g} Hz exceeds J/10 = {WEAK_PROBE_RATIO * j_hz:.3g} Hz; "
            "the weak-probe treatment assumes a coupling far below the chain's energy scales",
            RuntimeWarning, stacklevel=2)
    chain = ChainModel(
        n_sites=geometry.n_sites,
        hx=to_units(geometry.hx_hz, unit_hz),
        J=to_units(j_hz, unit_hz),
        boundary=geometry.boundary,
        coupling_profile=geometry.coupling_profile,
        unit_hz=unit_hz,
    )
    probe = ProbeModel(
        omega_c=to_units(geometry.omega_c_hz, unit_hz),
        kappa=to_units(geometry.kappa_hz, unit_hz),
        lam=to_units(lam_hz, unit_hz),
        epsilon=to_units(geometry.epsilon_hz, unit_hz),
        n_th=geometry.n_th,
    )
    return chain, probe
