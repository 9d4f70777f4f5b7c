"""Free-fermion solution of the transverse-field Ising chain.

With σˣ_i = 1 - 2c†_i c_i the chain becomes the quadratic Hamiltonian

    H = Σ_ij [c†_i A_ij c_j + ½ (c†_i B_ij c†_j + h.c.)]

Periodic chains are solved analytically by a Bogoliubov rotation in momentum
space (the Jordan-Wigner parity term on the closing bond is dropped, i.e. the
fermions obey c_{N+1} = c_1). Open chains are diagonalized numerically in real
space.

Both solvers describe their quasiparticles the same way,

    η_m = Σ_i (G_mi c_i + H_mi c†_i),

which is what the correlators and the generic spectral engine consume.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .model import Boundary, ChainModel, ThermalState, momentum_grid, momentum_indices, occupancy

log = logging.getLogger(__name__)

CANONICAL_TOL = 1e-10
NEAR_ZERO_MODE = 1e-6


class DiagonalizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class PeriodicModes:
    """Bogoliubov modes γ_k, one per momentum, ordered like ``momentum_grid``."""

    chain: ChainModel
    k: NDArray[np.float64]
    m: NDArray[np.int64]
    omega: NDArray[np.float64]
    theta: NDArray[np.float64]

    @property
    def u(self) -> NDArray[np.float64]:
        return np.cos(self.theta)

    @property
    def v(self) -> NDArray[np.float64]:
        return np.sin(self.theta)

    @property
    def n_modes(self) -> int:
        return len(self.k)

    def index_of(self, m: int) -> int:
        """Grid position of momentum index ``m`` (taken modulo N)."""
        n = self.chain.n_sites
        lo = self.m[0]
        return int((m - lo) % n)

    def quasiparticle_matrices(self) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
        """(G, H) with γ_k = Σ_j G_kj c_j + H_kj c†_j, sites j = 1..N.

        Follows from c_k = u_k γ_k + i v_k γ†_{-k} and c_k = Σ_j e^{-ikj} c_j/√N.
        """
        n = self.chain.n_sites
        sites = np.arange(1, n + 1)
        phase = np.exp(-1j * np.outer(self.k, sites)) / np.sqrt(n)
        G = self.u[:, None] * phase
        H = -1j * self.v[:, None] * phase
        return G, H


@dataclass(frozen=True)
class OpenModes:
    """Real-space quasiparticles η_m = Σ_i (g_mi c_i + h_mi c†_i), ω ascending."""

    chain: ChainModel
    omega: NDArray[np.float64]
    g: NDArray[np.float64]
    h: NDArray[np.float64]
    A: NDArray[np.float64]
    B: NDArray[np.float64]

    @property
    def n_modes(self) -> int:
        return len(self.omega)

    def quasiparticle_matrices(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        return self.g, self.h


def dispersion(chain: ChainModel, k):
    """ω_k = 2J sqrt(1 + (h_x/2J)² - (h_x/J) cos k), written to stay >= 0 for J = 0."""
    J, hx = chain.J, chain.hx
    arg = 4.0 * J * J + hx * hx - 4.0 * J * hx * np.cos(k)
    return np.sqrt(np.maximum(arg, 0.0))


def bogoliubov_angle(chain: ChainModel, k):
    """θ_k with 2θ_k = atan2(2J sin k, h_x - 2J cos k)."""
    J, hx = chain.J, chain.hx
    s = 2.0 * J * np.sin(k)
    # sin(±π) is not exactly zero in floating point; the pairing amplitude there is.
    s = np.where(np.abs(s) < 1e-14 * max(J, 1.0), 0.0, s)
    return 0.5 * np.arctan2(s, hx - 2.0 * J * np.cos(k))


def solve_periodic(chain: ChainModel) -> PeriodicModes:
    if chain.boundary is not Boundary.PERIODIC:
        raise ValueError("solve_periodic needs a periodic chain")
    k = momentum_grid(chain)
    return PeriodicModes(
        chain=chain,
        k=k,
        m=momentum_indices(chain.n_sites),
        omega=dispersion(chain, k),
        theta=bogoliubov_angle(chain, k),
    )


def build_open_matrices(chain: ChainModel) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Tridiagonal A (h_x on the diagonal, -J beside it) and antisymmetric B."""
    n = chain.n_sites
    if n < 2:
        raise ValueError("need at least two sites")
    off = np.full(n - 1, -chain.J)
    A = np.diag(np.full(n, chain.hx)) + np.diag(off, 1) + np.diag(off, -1)
    B = np.diag(off, 1) - np.diag(off, -1)
    return A, B


def build_ring_matrices(chain: ChainModel) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """A and B for the ring with the closing bond c_N ↔ c_1 added (no parity sign)."""
    A, B = build_open_matrices(chain)
    n = chain.n_sites
    A[n - 1, 0] += -chain.J
    A[0, n - 1] += -chain.J
    B[n - 1, 0] += -chain.J
    B[0, n - 1] += chain.J
    return A, B


def diagonalize_bilinear(A: NDArray, B: NDArray) -> tuple[NDArray, NDArray, NDArray]:
    """Diagonalize a real quadratic fermion form in the Lieb-Schultz-Mattis way.

    The φ vectors are eigenvectors of (A-B)(A+B) = (A+B)ᵀ(A+B) with eigenvalue
    ω², and ψ = (A+B)φ/ω. Taking the SVD A+B = U S Vᵀ yields φ (columns of V),
    ψ (columns of U) and ω (singular values) together; for ω → 0 the columns
    of U span the null space of (A+B)ᵀ, so near-zero modes need no division.
    Returns (omega ascending, g, h) with rows indexing modes.
    """
    M = A + B
    try:
        U, s, Vt = np.linalg.svd(M)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(M)
        raise DiagonalizationError(f"SVD of A+B failed (cond={cond:.3e})") from exc
    order = np.argsort(s, kind="stable")
    omega = s[order]
    phi = Vt[order]
    psi = U[:, order].T
    scale = max(np.abs(M).max(), 1.0)
    for m in np.flatnonzero(omega < NEAR_ZERO_MODE * scale):
        # Sign of ψ is free for a zero mode; fix it so the φ·ψ overlap is >= 0.
        if phi[m] @ psi[m] < 0:
            psi[m] = -psi[m]
    g = 0.5 * (phi + psi)
    h = 0.5 * (phi - psi)
    return omega, g, h


def canonical_residuals(g: NDArray, h: NDArray) -> tuple[float, float]:
    """Max deviation from {η_m, η†_n} = δ_mn and {η_m, η_n} = 0."""
    n = g.shape[0]
    anti_dag = g @ g.conj().T + h @ h.conj().T - np.eye(n)
    anti = g @ h.T + h @ g.T
    return float(np.abs(anti_dag).max()), float(np.abs(anti).max())


def solve_open(chain: ChainModel) -> OpenModes:
    if chain.boundary is not Boundary.OPEN:
        raise ValueError("solve_open needs an open chain")
    A, B = build_open_matrices(chain)
    omega, g, h = diagonalize_bilinear(A, B)
    r1, r2 = canonical_residuals(g, h)
    if max(r1, r2) > CANONICAL_TOL:
        raise DiagonalizationError(
            f"non-canonical transformation (residuals {r1:.2e}, {r2:.2e}); "
            f"cond(A+B)={np.linalg.cond(A + B):.3e}")
    return OpenModes(chain=chain, omega=omega, g=g, h=h, A=A, B=B)


def solve(chain: ChainModel) -> PeriodicModes | OpenModes:
    if chain.boundary is Boundary.PERIODIC:
        return solve_periodic(chain)
    return solve_open(chain)


def mode_occupations(modes: PeriodicModes | OpenModes, state: ThermalState) -> NDArray[np.float64]:
    return np.asarray(occupancy(state, modes.omega), dtype=float).reshape(-1)


def site_correlators(modes: PeriodicModes | OpenModes, state: ThermalState):
    """Real-space Gaussian correlators (⟨c†_i c_j⟩, ⟨c_i c_j⟩) of the thermal state."""
    G, H = modes.quasiparticle_matrices()
    n = mode_occupations(modes, state)
    hop = (G.T * n) @ G.conj() + (H.conj().T * (1.0 - n)) @ H
    pair = (G.conj().T * (1.0 - n)) @ H + (H.T * n) @ G.conj()
    return hop, pair


def sigma_x_expectation(modes: PeriodicModes | OpenModes, state: ThermalState,
                        i: int, j: int) -> float:
    """⟨σˣ_i σˣ_j⟩ for sites 1..N (equals 1 when i == j).

    Uses σˣ = 1 - 2n and Wick's theorem
    ⟨n_i n_j⟩ = n_i n_j - ⟨c†_i c†_j⟩⟨c_i c_j⟩ + ⟨c†_i c_j⟩⟨c_i c†_j⟩.
    """
    n_sites = modes.chain.n_sites
    for site in (i, j):
        if not 1 <= site <= n_sites:
            raise IndexError(f"site {site} outside 1..{n_sites}")
    if i == j:
        return 1.0
    hop, pair = site_correlators(modes, state)
    a, b = i - 1, j - 1
    ni, nj = hop[a, a].real, hop[b, b].real
    cdag_cdag = np.conj(pair[b, a])
    nn = ni * nj - cdag_cdag * pair[a, b] + hop[a, b] * (-hop[b, a])
    return float((1.0 - 2.0 * ni - 2.0 * nj + 4.0 * nn).real)
