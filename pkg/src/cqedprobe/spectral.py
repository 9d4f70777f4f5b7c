"""Spectral densities ⟨Q²(ω)⟩ of the coupling operator as lists of delta peaks.

Convention: ⟨Q(ω₁)Q(ω₂)⟩ = 2π⟨Q²(ω₁)⟩δ(ω₁+ω₂) and

    ⟨Q²(ω)⟩ = zero_weight·δ(ω) + Σ_c weight_c·δ(ω - center_c),

so positive centers are processes that hand energy to the chain (pair
creation at T = 0) and the total weight is the equal-time ⟨Q²⟩.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .fermionization import OpenModes, PeriodicModes, canonical_residuals, mode_occupations, site_correlators
from .model import CouplingProfile, ThermalState

MERGE_TOL = 1e-9
ROUNDOFF_AMPLITUDE = 1e-13


@dataclass(frozen=True)
class SpectralDensity:
    centers: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    weights: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    zero_weight: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float).reshape(-1)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if c.shape != w.shape:
            raise ValueError("centers and weights must have the same length")
        order = np.argsort(c, kind="stable")
        object.__setattr__(self, "centers", c[order])
        object.__setattr__(self, "weights", w[order])
        object.__setattr__(self, "zero_weight", float(self.zero_weight))

    def __len__(self):
        return len(self.centers)

    @property
    def components(self) -> list[tuple[float, float]]:
        return list(zip(self.centers.tolist(), self.weights.tolist()))

    @property
    def total_weight(self) -> float:
        return self.zero_weight + float(self.weights.sum())

    @property
    def negative_weight(self) -> float:
        return float(self.weights[self.centers < 0].sum())

    def pruned(self, floor: float) -> "SpectralDensity":
        """Drop components whose weight is at or below ``floor``."""
        keep = self.weights > floor
        return SpectralDensity(self.centers[keep], self.weights[keep], self.zero_weight)

    def scaled(self, factor: float) -> "SpectralDensity":
        return SpectralDensity(self.centers, factor * self.weights, factor * self.zero_weight)

    def __add__(self, other: "SpectralDensity") -> "SpectralDensity":
        return merge_components(
            np.concatenate([self.centers, other.centers, [0.0]]),
            np.concatenate([self.weights, other.weights, [self.zero_weight + other.zero_weight]]),
        )


def merge_components(centers, weights, tol: float = MERGE_TOL) -> SpectralDensity:
    """Sum weights of centers closer than ``tol``; everything within ``tol`` of 0 → zero_weight."""
    c = np.asarray(centers, dtype=float).reshape(-1)
    w = np.asarray(weights, dtype=float).reshape(-1)
    at_zero = np.abs(c) < tol
    zero_weight = float(w[at_zero].sum())
    c, w = c[~at_zero], w[~at_zero]
    keep = w != 0.0
    c, w = c[keep], w[keep]
    if len(c) == 0:
        return SpectralDensity(zero_weight=zero_weight)
    order = np.argsort(c, kind="stable")
    c, w = c[order], w[order]
    starts = np.concatenate([[0], np.flatnonzero(np.diff(c) >= tol) + 1])
    summed = np.add.reduceat(w, starts)
    # weighted position inside each cluster; fall back to the plain mean for zero-sum clusters
    num = np.add.reduceat(w * c, starts)
    counts = np.diff(np.concatenate([starts, [len(c)]]))
    mean = np.add.reduceat(c, starts) / counts
    merged_c = np.where(summed != 0, num / np.where(summed != 0, summed, 1.0), mean)
    return SpectralDensity(merged_c, summed, zero_weight)


def density_uniform_periodic(modes: PeriodicModes, state: ThermalState) -> SpectralDensity:
    """Q = Σσˣ on the ring.

    Zero-frequency weight is
    Y₀ = q₀² + 4Σ_k[(cos2θ_k)² - q₀ cos2θ_k] n_k + 4Σ_{k≠k'} cos2θ_k cos2θ_k' n_k n_k'
    with q₀ = N - 2Σ v_k². Each momentum with u_k v_k ≠ 0 contributes
    8u_k²v_k²(1-n_k)² at +2ω_k and 8u_k²v_k² n_k² at -2ω_k; the ±k pair thus
    carries 16u²v²(...)², which reproduces the 32λ²ω_c² prefactor of the
    finite-frequency response from the 4λ²ω_c² kernel.
    """
    if modes.chain.coupling_profile is not CouplingProfile.UNIFORM:
        raise ValueError("density_uniform_periodic needs the uniform coupling profile")
    u, v = modes.u, modes.v
    n = mode_occupations(modes, state)
    c2 = u * u - v * v
    q0 = modes.chain.n_sites - 2.0 * np.sum(v * v)
    cn = c2 * n
    y0 = (q0 * q0 + 4.0 * np.sum((c2 * c2 - q0 * c2) * n)
          + 4.0 * (cn.sum() ** 2 - np.sum(cn * cn)))
    uv2 = (u * v) ** 2
    active = uv2 > 1e-30
    w_up = 8.0 * uv2 * (1.0 - n) ** 2
    w_down = 8.0 * uv2 * n**2
    centers = np.concatenate([2.0 * modes.omega[active], -2.0 * modes.omega[active]])
    weights = np.concatenate([w_up[active], w_down[active]])
    density = merge_components(centers, weights)
    return SpectralDensity(density.centers, density.weights, density.zero_weight + y0)


def density_sine_coupling(modes: PeriodicModes, state: ThermalState,
                          literal: bool = False) -> SpectralDensity:
    """Q = Σ_j sin(2πj/N) σˣ_j on the ring.

    Q only connects momentum k to its neighbour k̄ = k - 2π/N (wrapping around
    the zone). For each k, with n the occupations:

      ±(ω_k - ω_k̄): weight (u_k u_k̄ - v_k v_k̄)² n_k̄(1-n_k) at +, n_k(1-n_k̄) at -
      ±(ω_k + ω_k̄): weight (u_k v_k̄ + v_k u_k̄)² (1-n_k)(1-n_k̄) at +, n_k n_k̄ at -

    The transfer amplitude is cos(θ_k + θ_k̄): the γ†_k γ_k̄ piece and the
    γ_{-k̄} γ†_{-k} piece of the neighbouring momentum act on the same pair of
    modes and interfere. ``literal=True`` swaps in the incoherent sum
    u_k²u_k̄² + v_k²v_k̄², which disagrees with exact diagonalization at T > 0
    and is kept only to reproduce published curves.
    """
    chain = modes.chain
    if chain.coupling_profile is not CouplingProfile.SINE:
        raise ValueError("density_sine_coupling needs the sine coupling profile")
    if chain.n_sites == 2:
        # sin(πj) vanishes on every site: Q is identically zero.
        return SpectralDensity()
    bar = np.array([modes.index_of(m - 1) for m in modes.m])
    u, v, w = modes.u, modes.v, modes.omega
    ub, vb, wb = u[bar], v[bar], w[bar]
    n = mode_occupations(modes, state)
    nb = n[bar]
    if literal:
        M = u * u * ub * ub + v * v * vb * vb
        P = (u * vb + v * ub) ** 2
    else:
        M = (u * ub - v * vb) ** 2
        P = (u * vb + v * ub) ** 2
    centers = np.concatenate([w - wb, wb - w, w + wb, -(w + wb)])
    weights = np.concatenate([
        M * nb * (1.0 - n),
        M * n * (1.0 - nb),
        P * (1.0 - n) * (1.0 - nb),
        P * n * nb,
    ])
    return merge_components(centers, weights)


def quadratic_decomposition(modes: PeriodicModes | OpenModes, site_weights):
    """Write Q = Σ_i w_i σˣ_i as q + Σ K_mn η†_m η_n + Σ_{m<n} (D_mn η†_m η†_n + h.c.).

    Returns (q, K, D) with D antisymmetric. Uses c_i = Σ_m (G*_mi η_m + H_mi η†_m).
    """
    G, H = modes.quasiparticle_matrices()
    w = np.asarray(site_weights, dtype=float)
    GW, HW = G * w, H * w
    hop = GW @ G.conj().T - HW @ H.conj().T
    pair = GW @ H.T
    const = np.sum(w) - 2.0 * np.trace(HW @ H.conj().T).real
    return const, -2.0 * hop, -2.0 * (pair - pair.T)


def density_quadratic(modes: PeriodicModes | OpenModes, state: ThermalState,
                      site_weights) -> SpectralDensity:
    """Wick-contracted ⟨Q²(ω)⟩ for any Q = Σ_i w_i σˣ_i over a Gaussian thermal state."""
    q, K, D = quadratic_decomposition(modes, site_weights)
    n = mode_occupations(modes, state)
    w = modes.omega
    kd = np.diag(K).real
    zero = (q + np.sum(kd * n)) ** 2 + np.sum(kd * kd * n * (1.0 - n))
    # amplitudes at rounding level belong to symmetry-forbidden transitions
    roundoff = ROUNDOFF_AMPLITUDE * max(1.0, float(np.abs(K).max(initial=0.0)),
                                        float(np.abs(D).max(initial=0.0)))

    def strength(amps):
        a = np.abs(amps)
        return np.where(a > roundoff, a * a, 0.0)

    m_idx, n_idx = np.nonzero(~np.eye(len(w), dtype=bool))
    hop_c = w[m_idx] - w[n_idx]
    hop_w = strength(K[m_idx, n_idx]) * n[n_idx] * (1.0 - n[m_idx])

    a_idx, b_idx = np.triu_indices(len(w), k=1)
    amp = strength(D[a_idx, b_idx])
    pair_c = w[a_idx] + w[b_idx]
    up = amp * (1.0 - n[a_idx]) * (1.0 - n[b_idx])
    down = amp * n[a_idx] * n[b_idx]

    density = merge_components(
        np.concatenate([hop_c, pair_c, -pair_c]),
        np.concatenate([hop_w, up, down]),
    )
    return SpectralDensity(density.centers, density.weights, density.zero_weight + zero)


def density_open(modes: OpenModes, state: ThermalState) -> SpectralDensity:
    """Q = Σσˣ on the open chain, by full Wick contraction over the η modes."""
    r1, r2 = canonical_residuals(modes.g, modes.h)
    if max(r1, r2) > 1e-10:
        raise ValueError(f"modes are not canonical (residuals {r1:.2e}, {r2:.2e})")
    return density_quadratic(modes, state, np.ones(modes.chain.n_sites))


def density(modes: PeriodicModes | OpenModes, state: ThermalState) -> SpectralDensity:
    """Dispatch on boundary and coupling profile."""
    if isinstance(modes, OpenModes):
        return density_open(modes, state)
    if modes.chain.coupling_profile is CouplingProfile.SINE:
        return density_sine_coupling(modes, state)
    return density_uniform_periodic(modes, state)


def profile_site_weights(chain, pair=None) -> NDArray[np.float64]:
    n = chain.n_sites
    if pair is not None:
        i, j = pair
        for s in (i, j):
            if not 1 <= s <= n:
                raise IndexError(f"site {s} outside 1..{n}")
        w = np.zeros(n)
        w[i - 1] += 1.0
        w[j - 1] += 1.0
        return w
    if chain.coupling_profile is CouplingProfile.SINE:
        if n == 2:
            return np.zeros(2)
        return np.sin(2.0 * np.pi * np.arange(1, n + 1) / n)
    return np.ones(n)


def sigma_x_matrix(modes: PeriodicModes | OpenModes, state: ThermalState) -> NDArray[np.float64]:
    """All ⟨σˣ_i σˣ_j⟩ at once (diagonal = 1)."""
    hop, pair = site_correlators(modes, state)
    occ = np.diag(hop).real
    nn = (np.outer(occ, occ) - pair.T.conj() * pair - hop * hop.T).real
    corr = 1.0 - 2.0 * occ[:, None] - 2.0 * occ[None, :] + 4.0 * nn
    np.fill_diagonal(corr, 1.0)
    return corr


def equal_time_qq(modes: PeriodicModes | OpenModes, state: ThermalState,
                  pair: tuple[int, int] | None = None) -> float:
    """⟨QQ⟩ by equal-time Wick contraction: Σ_ij w_i w_j ⟨σˣ_i σˣ_j⟩."""
    w = profile_site_weights(modes.chain, pair)
    return float(w @ sigma_x_matrix(modes, state) @ w)
