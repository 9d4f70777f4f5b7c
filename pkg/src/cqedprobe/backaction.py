"""Second-order self-consistency checks for the probe acting back on the chain.

Integrating out the resonator to second order in λ shifts each mode by
roughly |δω_k| ~ 2λ²N/ω_c (setting q₀ ~ N/2). The probe can be ignored as
long as that shift stays below the spacing Δω_k between neighbouring modes,
which caps the array size N.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .fermionization import bogoliubov_angle, dispersion
from .model import Boundary, ChainModel, ProbeModel

#: h_x/2J below which the weak-field formula applies, and above which the strong-field one does.
WEAK_FIELD_LIMIT = 0.75
STRONG_FIELD_LIMIT = 1.25
#: Largest N examined by the numerical (General) search.
GENERAL_SEARCH_LIMIT = 10**7


class Regime(str, enum.Enum):
    WEAK_FIELD = "weak-field"
    CRITICAL = "critical"
    STRONG_FIELD = "strong-field"
    GENERAL = "general"


@dataclass(frozen=True)
class BackactionReport:
    """Backaction summary for one chain size.

    ``shift`` and ``spacing`` are evaluated at the chain's N; ``valid`` is
    ``shift < spacing``. ``max_n`` is the largest N obeying the regime
    inequality (None when unbounded, e.g. λ = 0).
    """

    photon_bound: float
    shift: float
    spacing: float
    regime: Regime
    max_n: int | None
    valid: bool
    q0_half: float
    q0_exact: float
    quartic_scale: float


def photon_number_bound(probe: ProbeModel, chain: ChainModel) -> float:
    """Upper bound 1 + (λN/ω_c)² on ⟨aa†⟩."""
    return 1.0 + (probe.lam * chain.n_sites / probe.omega_c) ** 2


def perturbative_validity(probe: ProbeModel, chain: ChainModel) -> bool:
    """True iff λN/2 < ω_c - (4J + 2h_x)."""
    return probe.lam * chain.n_sites / 2.0 < probe.omega_c - chain.bandwidth


def frequency_shift_estimate(probe: ProbeModel, chain: ChainModel) -> float:
    """|δω_k| ~ 2λ²N/ω_c."""
    return 2.0 * probe.lam**2 * chain.n_sites / probe.omega_c


def exact_q0(chain: ChainModel) -> float:
    """q₀ = Σ_k cos 2θ_k on the periodic momentum grid."""
    k = 2.0 * np.pi * np.arange(chain.n_sites) / chain.n_sites
    return float(np.sum(np.cos(2.0 * bogoliubov_angle(chain, k))))


def quartic_scale(probe: ProbeModel, chain: ChainModel) -> float:
    """Size 4λ²max(cos²2θ_k)/ω_c of the quadratic-in-occupation term, per excitation."""
    k = 2.0 * np.pi * np.arange(chain.n_sites) / chain.n_sites
    c2 = np.cos(2.0 * bogoliubov_angle(chain, k))
    return float(4.0 * probe.lam**2 * np.max(c2 * c2) / probe.omega_c)


def classify_regime(chain: ChainModel) -> Regime:
    g = chain.hx_over_2j
    if g < WEAK_FIELD_LIMIT:
        return Regime.WEAK_FIELD
    if g <= STRONG_FIELD_LIMIT:
        return Regime.CRITICAL
    return Regime.STRONG_FIELD


def numerical_spacing(chain: ChainModel, n_sites: int | None = None) -> float:
    """Δω at k = 0: ω(2π/N) - ω(0) from the exact dispersion."""
    n = chain.n_sites if n_sites is None else n_sites
    return float(abs(dispersion(chain, 2.0 * np.pi / n) - dispersion(chain, 0.0)))


def regime_spacing(chain: ChainModel, regime: Regime, n_sites: int | None = None) -> float:
    """Minimal mode spacing Δω for ``regime`` at size N."""
    n = chain.n_sites if n_sites is None else n_sites
    dk = 2.0 * np.pi / n
    if regime is Regime.WEAK_FIELD:
        return chain.hx * dk * dk / 2.0
    if regime is Regime.CRITICAL:
        return 4.0 * np.pi * chain.J / n
    if regime is Regime.STRONG_FIELD:
        # as quoted for h_x >> 2J; ω ≈ h_x - 2J cos k itself gives JΔk², twice this
        return chain.J * dk * dk / 2.0
    return numerical_spacing(chain, n)


def _largest_below(bound: float, power: int) -> int:
    """Largest integer N with N**power < bound (strict)."""
    if bound <= 0:
        return 0
    n = int(math.floor(bound ** (1.0 / power)))
    while n > 0 and n**power >= bound:
        n -= 1
    while (n + 1) ** power < bound:
        n += 1
    return n


def _general_max_n(probe: ProbeModel, chain: ChainModel) -> int | None:
    """Largest N with λ²N/ω_c < Δω(N), found by doubling then bisection."""
    if probe.lam == 0:
        return None

    def ok(n):
        return probe.lam**2 * n / probe.omega_c < numerical_spacing(chain, n)

    if not ok(2):
        return 1
    lo, hi = 2, 4
    while ok(hi):
        lo, hi = hi, 2 * hi
        if hi > GENERAL_SEARCH_LIMIT:
            return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def max_array_size(probe: ProbeModel, chain: ChainModel,
                   regime: Regime | str = Regime.GENERAL) -> BackactionReport:
    """Largest array size for which the probe-induced shift stays below the mode spacing.

    The named regimes use the asymptotic spacings with the criterion
    λ²N/ω_c < Δω(N):

      weak field    Δω = h_xΔk²/2   →  N³ < π²h_xω_c/λ²
      critical      Δω = 4πJ/N      →  N² < 2πJω_c/λ²
      strong field  Δω = JΔk²/2     →  N³ < 2π²Jω_c/λ²

    ``general`` evaluates ω(2π/N) - ω(0) from the exact dispersion for each N;
    ``auto`` picks a named regime from h_x/2J.
    """
    if isinstance(regime, str) and regime == "auto":
        regime = classify_regime(chain)
    regime = Regime(regime)
    lam2 = probe.lam**2
    if regime is Regime.GENERAL:
        max_n = _general_max_n(probe, chain)
    elif lam2 == 0:
        max_n = None
    elif regime is Regime.WEAK_FIELD:
        max_n = _largest_below(np.pi**2 * chain.hx * probe.omega_c / lam2, 3)
    elif regime is Regime.CRITICAL:
        max_n = _largest_below(2.0 * np.pi * chain.J * probe.omega_c / lam2, 2)
    else:
        max_n = _largest_below(2.0 * np.pi**2 * chain.J * probe.omega_c / lam2, 3)

    shift = frequency_shift_estimate(probe, chain)
    spacing = regime_spacing(chain, regime)
    if chain.boundary is Boundary.PERIODIC:
        q0 = exact_q0(chain)
    else:
        q0 = exact_q0(chain.replace(boundary=Boundary.PERIODIC))
    return BackactionReport(
        photon_bound=photon_number_bound(probe, chain),
        shift=shift,
        spacing=spacing,
        regime=regime,
        max_n=max_n,
        valid=bool(shift < spacing),
        q0_half=chain.n_sites / 2.0,
        q0_exact=q0,
        quartic_scale=quartic_scale(probe, chain),
    )
