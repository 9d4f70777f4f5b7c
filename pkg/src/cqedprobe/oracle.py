"""Brute-force reference: exact diagonalization of the 2^N-dimensional chain.

Nothing here uses momentum space or Bogoliubov rotations. The spin Hamiltonian
is assembled from Pauli matrices; the free-fermion model (the ring whose
closing bond ignores the Jordan-Wigner parity sign) is assembled from explicit
fermion matrices, and is the reference for the periodic closed forms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
from numpy.typing import NDArray

from .model import Boundary, ChainModel, ThermalState
from .spectral import SpectralDensity, merge_components

ED_MAX_SITES = 12
LEHMANN_MAX_SITES = 10
DEGENERACY_TOL = 1e-9

_I2 = np.eye(2)
_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
# annihilates an occupied site: |1> -> |0>
_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])


class ResourceGuardError(ValueError):
    pass


class Coupling(str, enum.Enum):
    UNIFORM = "uniform"
    SINE = "sine"
    PAIR = "pair"


class Hamiltonian(str, enum.Enum):
    SPIN = "spin"
    FERMION = "fermion"


@dataclass(frozen=True)
class EigenSystem:
    energies: NDArray[np.float64]
    states: NDArray[np.float64]
    partition_weights: NDArray[np.float64]


def _site_operator(op: NDArray, site: int, n: int) -> NDArray:
    """``op`` on 0-based ``site`` of an n-site chain, site 0 the leftmost factor."""
    return reduce(np.kron, [op if s == site else _I2 for s in range(n)])


def _guard(n: int, limit: int):
    if n > limit:
        raise ResourceGuardError(f"exact diagonalization limited to N <= {limit}, got {n}")


def pauli_x(n: int, site: int) -> NDArray:
    return _site_operator(_X, site, n)


def pauli_z(n: int, site: int) -> NDArray:
    return _site_operator(_Z, site, n)


def ed_hamiltonian(chain: ChainModel) -> NDArray[np.float64]:
    """H = -J Σ σᶻ_i σᶻ_{i+1} - (h_x/2) Σ σˣ_i in the σᶻ product basis."""
    n = chain.n_sites
    _guard(n, ED_MAX_SITES)
    H = np.zeros((2**n, 2**n))
    last = n if chain.boundary is Boundary.PERIODIC else n - 1
    for i in range(last):
        H -= chain.J * pauli_z(n, i) @ pauli_z(n, (i + 1) % n)
    for i in range(n):
        H -= 0.5 * chain.hx * pauli_x(n, i)
    return H


def fermion_operators(n: int) -> list[NDArray]:
    """Annihilators c_i in the occupation basis, c_i = (Π_{j<i} Z_j) ⊗ lower_i."""
    ops = []
    for i in range(n):
        factors = [_Z] * i + [_LOWER] + [_I2] * (n - i - 1)
        ops.append(reduce(np.kron, factors))
    return ops


def ed_fermion_hamiltonian(chain: ChainModel) -> NDArray[np.float64]:
    """-J Σ (c†_i c†_{i+1} + c†_i c_{i+1} + h.c.) + h_x Σ n_i, with c_{N+1} = c_1 if periodic.

    Occupation n_i = 1 corresponds to σˣ_i = -1; the constant -N h_x/2 is added so
    open chains coincide with ``ed_hamiltonian`` up to a basis change.
    """
    n = chain.n_sites
    _guard(n, ED_MAX_SITES)
    c = fermion_operators(n)
    dim = 2**n
    H = np.zeros((dim, dim))
    last = n if chain.boundary is Boundary.PERIODIC else n - 1
    for i in range(last):
        a, b = c[i], c[(i + 1) % n]
        term = a.T @ b.T + a.T @ b
        H -= chain.J * (term + term.T)
    for i in range(n):
        H += chain.hx * (c[i].T @ c[i])
    H -= 0.5 * chain.hx * n * np.eye(dim)
    return H


def hadamard_all(n: int) -> NDArray:
    """Basis change mapping σˣ to diagonal form (occupation basis of the fermions)."""
    had = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    return reduce(np.kron, [had] * n)


def coupling_site_weights(chain: ChainModel, coupling: Coupling | str,
                          pair: tuple[int, int] | None = None) -> NDArray[np.float64]:
    """w_i such that Q = Σ_i w_i σˣ_i (sites 1..N)."""
    coupling = Coupling(coupling)
    n = chain.n_sites
    if coupling is Coupling.UNIFORM:
        return np.ones(n)
    if coupling is Coupling.SINE:
        sites = np.arange(1, n + 1)
        w = np.sin(2.0 * np.pi * sites / n)
        # sin(πj) etc. are exact zeros analytically.
        w[np.abs(w) < 1e-14] = 0.0
        return w
    if pair is None:
        raise ValueError("pair coupling needs a (site_i, site_j) pair")
    i, j = pair
    for s in (i, j):
        if not 1 <= s <= n:
            raise IndexError(f"site {s} outside 1..{n}")
    w = np.zeros(n)
    w[i - 1] += 1.0
    w[j - 1] += 1.0
    return w


def coupling_operator(chain: ChainModel, coupling: Coupling | str,
                      pair: tuple[int, int] | None = None,
                      hamiltonian: Hamiltonian | str = Hamiltonian.SPIN) -> NDArray:
    """Q = Σ w_i σˣ_i in the basis used by the matching Hamiltonian."""
    n = chain.n_sites
    w = coupling_site_weights(chain, coupling, pair)
    if Hamiltonian(hamiltonian) is Hamiltonian.SPIN:
        return sum(w[i] * pauli_x(n, i) for i in range(n))
    # occupation basis: σˣ_i = 1 - 2 n_i = Z_i
    return sum(w[i] * pauli_z(n, i) for i in range(n))


def hamiltonian_matrix(chain: ChainModel, hamiltonian: Hamiltonian | str) -> NDArray:
    if Hamiltonian(hamiltonian) is Hamiltonian.SPIN:
        return ed_hamiltonian(chain)
    return ed_fermion_hamiltonian(chain)


def thermal_weights(energies: NDArray, state: ThermalState) -> NDArray[np.float64]:
    """Boltzmann weights; at T = 0 the degenerate ground manifold is weighted uniformly."""
    shifted = energies - energies.min()
    if state.temperature == 0:
        p = (shifted < DEGENERACY_TOL).astype(float)
    else:
        p = np.exp(-state.beta * shifted)
    return p / p.sum()


def eigensystem(chain: ChainModel, state: ThermalState,
                hamiltonian: Hamiltonian | str = Hamiltonian.SPIN) -> EigenSystem:
    energies, states = np.linalg.eigh(hamiltonian_matrix(chain, hamiltonian))
    return EigenSystem(energies=energies, states=states,
                       partition_weights=thermal_weights(energies, state))


def lehmann_density(chain: ChainModel, state: ThermalState, coupling: Coupling | str,
                    pair: tuple[int, int] | None = None,
                    hamiltonian: Hamiltonian | str = Hamiltonian.SPIN) -> SpectralDensity:
    """⟨Q²(ω)⟩ = Σ_ab p_b |⟨a|Q|b⟩|² δ(ω - (E_a - E_b)), merged within 1e-9."""
    _guard(chain.n_sites, LEHMANN_MAX_SITES)
    es = eigensystem(chain, state, hamiltonian)
    Q = coupling_operator(chain, coupling, pair, hamiltonian)
    Qe = es.states.T @ Q @ es.states
    weights = (Qe**2) * es.partition_weights[None, :]
    centers = es.energies[:, None] - es.energies[None, :]
    return merge_components(centers.ravel(), weights.ravel())


def thermal_q_squared(chain: ChainModel, state: ThermalState, coupling: Coupling | str,
                      pair: tuple[int, int] | None = None,
                      hamiltonian: Hamiltonian | str = Hamiltonian.SPIN) -> float:
    """Tr(ρ Q²) evaluated directly in the energy eigenbasis."""
    es = eigensystem(chain, state, hamiltonian)
    Q = coupling_operator(chain, coupling, pair, hamiltonian)
    Qe = es.states.T @ Q @ es.states
    return float(np.einsum("b,ab,ab->", es.partition_weights, Qe, Qe))


def sigma_x_correlation(chain: ChainModel, state: ThermalState, i: int, j: int,
                        hamiltonian: Hamiltonian | str = Hamiltonian.SPIN) -> float:
    """⟨σˣ_i σˣ_j⟩ from the thermal density matrix."""
    es = eigensystem(chain, state, hamiltonian)
    n = chain.n_sites
    basis_op = pauli_x if Hamiltonian(hamiltonian) is Hamiltonian.SPIN else pauli_z
    op = basis_op(n, i - 1) @ basis_op(n, j - 1)
    ope = es.states.T @ op @ es.states
    return float(es.partition_weights @ np.diag(ope))


def oracle_spectrum(chain: ChainModel, probe, state: ThermalState, coupling: Coupling | str,
                    grid, pair=None, hamiltonian: Hamiltonian | str = Hamiltonian.SPIN):
    """Resonator spectrum built from the Lehmann density instead of a closed form."""
    from .response import spectrum_from_density

    density = lehmann_density(chain, state, coupling, pair, hamiltonian)
    return spectrum_from_density(probe, density, grid)
