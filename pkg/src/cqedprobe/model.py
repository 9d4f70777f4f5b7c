"""Physical configuration shared by every other module.

Internally every angular frequency is a plain float measured in units of a
reference frequency ``unit_hz`` (normally J/2π, so the Ising coupling is 1.0).
Externally, parameters are quoted as ordinary frequencies ν = ω/2π in Hz and
temperatures in kelvin or millikelvin, matching how device parameters are
usually reported.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import constants
from scipy.special import expit

#: Modes with |ω| below this (in internal units) count as exact zero modes.
ZERO_MODE_TOL = 1e-9

#: Bose occupancy is rejected below this frequency at T > 0.
BOSE_OMEGA_FLOOR = 1e-9

DEFAULT_UNIT_HZ = 1e9


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class CouplingProfile(str, enum.Enum):
    UNIFORM = "uniform"
    SINE = "sine"


class Statistics(str, enum.Enum):
    FERMI_DIRAC = "fermi-dirac"
    BOSE = "bose"


@dataclass(frozen=True)
class ChainModel:
    """Transverse-field Ising chain H = -J Σ σᶻσᶻ - (h_x/2) Σ σˣ.

    ``J`` and ``hx`` are angular frequencies in units of ``unit_hz``.
    """

    n_sites: int
    hx: float
    J: float = 1.0
    boundary: Boundary = Boundary.PERIODIC
    coupling_profile: CouplingProfile = CouplingProfile.UNIFORM
    unit_hz: float = DEFAULT_UNIT_HZ

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        object.__setattr__(self, "coupling_profile", CouplingProfile(self.coupling_profile))
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ValueError(f"n_sites must be an integer >= 2, got {self.n_sites}")
        if self.J < 0:
            raise ValueError(f"Ising coupling must be nonnegative, got {self.J}")
        if self.hx < 0:
            raise ValueError(f"transverse field must be nonnegative, got {self.hx}")
        if self.unit_hz <= 0:
            raise ValueError("unit_hz must be positive")
        if (self.coupling_profile is CouplingProfile.SINE
                and self.boundary is not Boundary.PERIODIC):
            raise ValueError("sine coupling profile is only defined for periodic chains")

    @classmethod
    def from_ratio(cls, n_sites: int, hx_over_2j: float, **kwargs) -> "ChainModel":
        J = kwargs.pop("J", 1.0)
        return cls(n_sites=n_sites, hx=2.0 * J * hx_over_2j, J=J, **kwargs)

    @property
    def hx_over_2j(self) -> float:
        return self.hx / (2.0 * self.J)

    @property
    def bandwidth(self) -> float:
        """Upper edge 4J + 2h_x of the pair-excitation band."""
        return 4.0 * self.J + 2.0 * self.hx

    def replace(self, **changes) -> "ChainModel":
        fields = dict(n_sites=self.n_sites, hx=self.hx, J=self.J, boundary=self.boundary,
                      coupling_profile=self.coupling_profile, unit_hz=self.unit_hz)
        fields.update(changes)
        return ChainModel(**fields)


@dataclass(frozen=True)
class ProbeModel:
    """Damped resonator probing the chain, frequencies in internal units."""

    omega_c: float
    kappa: float
    lam: float
    epsilon: float
    n_th: float = 0.0

    def __post_init__(self):
        if self.omega_c <= 0:
            raise ValueError("omega_c must be positive")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.n_th < 0:
            raise ValueError("n_th must be nonnegative")

    @property
    def kappa_tilde(self) -> float:
        return self.kappa + self.epsilon

    def replace(self, **changes) -> "ProbeModel":
        fields = dict(omega_c=self.omega_c, kappa=self.kappa, lam=self.lam,
                      epsilon=self.epsilon, n_th=self.n_th)
        fields.update(changes)
        return ProbeModel(**fields)


def reference_probe(unit_hz: float = DEFAULT_UNIT_HZ, n_th: float = 0.0) -> ProbeModel:
    """Probe parameters ω_c/2π=12 GHz, κ/2π=100 kHz, ε/2π=600 kHz, λ/2π=40 MHz."""
    return ProbeModel(
        omega_c=to_units(12e9, unit_hz),
        kappa=to_units(100e3, unit_hz),
        lam=to_units(40e6, unit_hz),
        epsilon=to_units(600e3, unit_hz),
        n_th=n_th,
    )


@dataclass(frozen=True)
class ThermalState:
    """Thermal state of the chain at ``temperature`` kelvin.

    ``unit_hz`` must match the chain's so that internal frequencies can be
    turned into energies.
    """

    temperature: float = 0.0
    statistics: Statistics = Statistics.FERMI_DIRAC
    unit_hz: float = DEFAULT_UNIT_HZ

    def __post_init__(self):
        object.__setattr__(self, "statistics", Statistics(self.statistics))
        if self.temperature < 0 or not math.isfinite(self.temperature):
            raise ValueError("temperature must be finite and >= 0")
        if self.unit_hz <= 0:
            raise ValueError("unit_hz must be positive")

    @classmethod
    def from_mk(cls, temperature_mk: float, **kwargs) -> "ThermalState":
        return cls(temperature=temperature_mk * 1e-3, **kwargs)

    @property
    def beta(self) -> float:
        """ħ/(k_B T) in inverse internal frequency units (inf at T=0)."""
        if self.temperature == 0:
            return math.inf
        return constants.h * self.unit_hz / (constants.k * self.temperature)


def thermal_state(chain: ChainModel, temperature_mk: float,
                  statistics: Statistics | str = Statistics.FERMI_DIRAC) -> ThermalState:
    return ThermalState(temperature=temperature_mk * 1e-3, statistics=Statistics(statistics),
                        unit_hz=chain.unit_hz)


def occupancy(state: ThermalState, omega):
    """Mode occupation n(ω) for excitations of frequency ``omega``.

    FermiDirac gives 1/(e^{βω}+1); Bose gives 1/(e^{βω}-1).
    At T = 0 the result is 0 for ω > 0. A FermiDirac mode with |ω| below
    ``ZERO_MODE_TOL`` is half filled at every temperature, which is the
    T → 0⁺ limit of the degenerate ground manifold.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < -ZERO_MODE_TOL):
        raise ValueError("occupancy is defined for nonnegative frequencies")
    zero = np.abs(w) < ZERO_MODE_TOL
    if state.statistics is Statistics.BOSE:
        if state.temperature == 0:
            out = np.zeros_like(w)
        else:
            if np.any(w < BOSE_OMEGA_FLOOR):
                raise ValueError(
                    f"Bose occupancy diverges as ω → 0; got ω below {BOSE_OMEGA_FLOOR}")
            out = 1.0 / np.expm1(state.beta * w)
    else:
        if state.temperature == 0:
            out = np.where(zero, 0.5, 0.0)
        else:
            out = np.where(zero, 0.5, expit(-state.beta * w))
    return float(out) if out.ndim == 0 else out


def momentum_grid(chain: ChainModel) -> NDArray[np.float64]:
    """Momenta k = 2π m/N with -N/2 < m <= N/2, ascending."""
    if chain.boundary is not Boundary.PERIODIC:
        raise ValueError("momentum grid is only defined for periodic chains")
    return 2.0 * np.pi * momentum_indices(chain.n_sites) / chain.n_sites


def momentum_indices(n_sites: int) -> NDArray[np.int64]:
    lo = -((n_sites - 1) // 2)
    return np.arange(lo, lo + n_sites)


def to_units(value_hz, unit_hz: float):
    """Ordinary frequency ν (Hz) → angular frequency in units of 2π·unit_hz."""
    if unit_hz <= 0:
        raise ValueError("reference frequency must be positive")
    return value_hz / unit_hz


def from_units(value, unit_hz: float):
    if unit_hz <= 0:
        raise ValueError("reference frequency must be positive")
    return value * unit_hz


def frequency_conversion(chain: ChainModel, value_hz):
    """Convert ν in Hz to an angular frequency in units of the chain's J."""
    j_hz = chain.J * chain.unit_hz
    if j_hz <= 0:
        raise ValueError("frequency conversion needs a positive Ising coupling")
    return value_hz / j_hz
