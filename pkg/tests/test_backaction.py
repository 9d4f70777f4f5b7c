from __future__ import annotations

import numpy as np
import pytest

from cqedprobe.backaction import (Regime, classify_regime, exact_q0, frequency_shift_estimate,
                                  max_array_size, numerical_spacing, perturbative_validity,
                                  photon_number_bound, regime_spacing)
from cqedprobe.model import ChainModel


def test_photon_bound(probe, ring20):
    assert photon_number_bound(probe.replace(lam=0.0), ring20) == 1.0
    assert photon_number_bound(probe, ring20) == pytest.approx(1 + (0.8 / 12) ** 2)
    equal = probe.replace(lam=probe.omega_c / ring20.n_sites)
    assert photon_number_bound(equal, ring20) == pytest.approx(2.0)


def test_validity_flips_near_300_at_hx_equal_j(probe):
    chain = ChainModel.from_ratio(299, 0.5)
    assert perturbative_validity(probe, chain)
    assert not perturbative_validity(probe, chain.replace(n_sites=301))
    assert perturbative_validity(probe.replace(lam=0.0), chain.replace(n_sites=10**6))


def test_shift_is_linear_in_n(probe):
    a = frequency_shift_estimate(probe, ChainModel.from_ratio(40, 0.5))
    b = frequency_shift_estimate(probe, ChainModel.from_ratio(80, 0.5))
    assert a == pytest.approx(2 * 0.04**2 * 40 / 12)
    assert b == pytest.approx(2 * a)
    assert frequency_shift_estimate(probe.replace(lam=0.0), ChainModel.from_ratio(40, 0.5)) == 0.0


def test_named_regime_bounds_follow_their_inequalities(probe):
    lam2, wc = probe.lam**2, probe.omega_c
    weak = max_array_size(probe, ChainModel.from_ratio(20, 0.5), "weak-field").max_n
    assert weak**3 < np.pi**2 * 1.0 * wc / lam2 <= (weak + 1) ** 3
    crit = max_array_size(probe, ChainModel.from_ratio(20, 1.0), "critical").max_n
    assert crit**2 < 2 * np.pi * wc / lam2 <= (crit + 1) ** 2
    strong = max_array_size(probe, ChainModel.from_ratio(20, 3.0), "strong-field").max_n
    assert strong**3 < 2 * np.pi**2 * wc / lam2 <= (strong + 1) ** 3


def test_general_bound_is_tight(probe):
    chain = ChainModel.from_ratio(20, 0.5)
    n = max_array_size(probe, chain).max_n
    lam2, wc = probe.lam**2, probe.omega_c
    assert lam2 * n / wc < numerical_spacing(chain, n)
    assert lam2 * (n + 1) / wc >= numerical_spacing(chain, n + 1)


def test_report_invariants(probe, ring20):
    r = max_array_size(probe, ring20, "auto")
    assert r.regime is Regime.WEAK_FIELD
    assert r.photon_bound >= 1 and r.shift >= 0
    assert r.valid == (r.shift < r.spacing)
    assert r.q0_half == 10.0
    assert 0 < r.q0_exact < ring20.n_sites
    assert max_array_size(probe.replace(lam=0.0), ring20).max_n is None


def test_regime_classification():
    assert classify_regime(ChainModel.from_ratio(4, 0.5)) is Regime.WEAK_FIELD
    assert classify_regime(ChainModel.from_ratio(4, 1.0)) is Regime.CRITICAL
    assert classify_regime(ChainModel.from_ratio(4, 1.25)) is Regime.CRITICAL
    assert classify_regime(ChainModel.from_ratio(4, 2.0)) is Regime.STRONG_FIELD


def test_numerical_spacing_limits():
    # critical point: exact spacing 4 sin(π/N) → 4π/N
    crit = ChainModel.from_ratio(200, 1.0)
    assert numerical_spacing(crit) == pytest.approx(regime_spacing(crit, Regime.CRITICAL), rel=0.05)
    # weak field: exact spacing is h_xΔk²/(2(1 - h_x/2J)), so the asymptotic
    # formula is reached only as h_x/2J → 0
    weak = ChainModel.from_ratio(200, 0.02)
    assert numerical_spacing(weak) == pytest.approx(regime_spacing(weak, Regime.WEAK_FIELD), rel=0.05)
    g = 0.1
    mid = ChainModel.from_ratio(200, g)
    ratio = numerical_spacing(mid) / regime_spacing(mid, Regime.WEAK_FIELD)
    assert ratio == pytest.approx(1 / (1 - g), rel=1e-3)


def test_q0_runs_from_zero_to_n():
    assert exact_q0(ChainModel.from_ratio(50, 20.0)) == pytest.approx(50, rel=0.05)
    assert abs(exact_q0(ChainModel.from_ratio(50, 0.0))) < 1e-9


def test_max_n_decreases_with_lambda(probe):
    chain = ChainModel.from_ratio(20, 0.5)
    sizes = [max_array_size(probe.replace(lam=l), chain).max_n for l in (0.01, 0.02, 0.04, 0.08)]
    assert sizes == sorted(sizes, reverse=True)


@pytest.mark.parametrize("g,regime", [(0.5, "weak-field"), (3.0, "strong-field")])
def test_cube_scaling(probe, g, regime):
    chain = ChainModel.from_ratio(20, g)
    full = max_array_size(probe, chain, regime).max_n
    half = max_array_size(probe.replace(lam=probe.lam / 2), chain, regime).max_n
    assert abs(half - full * 2 ** (2 / 3)) <= 1
