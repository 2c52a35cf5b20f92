import math

import numpy as np
import pytest

from dwlab import thermo
from dwlab.thermo import (MarkovModel, NEG_INF, abramov_timechange,
                          birkhoff_ld_montecarlo, bowen_root, full_shift,
                          golden_mean_shift, ld_rate_prediction, legendre_rate,
                          legendre_roundtrip, periodic_orbits, pressure_curve,
                          pressure_orbit_sum, pressure_transfer, q_extremes,
                          stable_norm, topological_entropy)

import oracles

GOLDEN_ENTROPY = math.log((1.0 + math.sqrt(5.0)) / 2.0)


@pytest.fixture(scope="module")
def coin():
    return full_shift(2, q_by_symbol=(0.0, 1.0))


@pytest.fixture(scope="module")
def coin_curve(coin):
    return pressure_curve(coin)


@pytest.fixture(scope="module")
def coin_rate(coin_curve):
    return legendre_rate(coin_curve, alphas=np.linspace(0.0, 1.0, 401))


# ---------------------------------------------------------------------------
# model validation

def test_model_rejects_reducible():
    A = np.array([[1, 1], [0, 1]])
    with pytest.raises(ValueError, match="irreducible"):
        MarkovModel(adjacency=A, q_edge=0.0, roof_edge=1.0)


def test_model_rejects_nonpositive_roof():
    with pytest.raises(ValueError, match="roof"):
        full_shift(2, roof_by_symbol=(1.0, 0.0))


# ---------------------------------------------------------------------------
# pressure

def test_pressure_full_shift_entropy(coin):
    for beta in (-3.0, 0.0, 1.7):
        model = full_shift(2)  # q = 0
        assert abs(pressure_transfer(model, beta) - math.log(2)) < 1e-12


def test_pressure_full_shift_weighted(coin):
    assert abs(pressure_transfer(coin, 1.0) - math.log(1 + math.e)) < 1e-12


def test_pressure_golden_mean():
    assert abs(pressure_transfer(golden_mean_shift(), 0.0) - GOLDEN_ENTROPY) < 1e-12


def test_pressure_curve_convex(coin_curve):
    d2 = np.diff(coin_curve.values, 2)
    assert d2.min() >= -1e-9


def test_roof_pressure_reduces_to_unit_case(coin):
    # Bowen route on a unit roof must match the eigenvalue route
    m = MarkovModel(adjacency=coin.adjacency, q_edge=coin.q_edge,
                    roof_edge=np.ones((2, 2)))
    direct = pressure_transfer(m, 1.0)
    via_root = bowen_root(m, 1.0)
    assert abs(direct - via_root) < 1e-10


def test_bowen_root_golden_closed_form():
    # roof (1, 2) by target symbol on the 2-shift: e^-s + e^-2s = 1
    model = full_shift(2, roof_by_symbol=(1.0, 2.0))
    assert abs(bowen_root(model) - GOLDEN_ENTROPY) < 1e-12


# ---------------------------------------------------------------------------
# orbit sums

def test_orbit_sum_single_family():
    orbits = [(k, 0.0) for k in range(1, 60)]
    got = pressure_orbit_sum(orbits, 20.0)
    assert abs(got - math.log(20) / 20) < 1e-12


def test_orbit_sum_requires_orbits():
    with pytest.raises(ValueError, match="no orbits"):
        pressure_orbit_sum([(30.0, 0.0)], 20.0)


def test_orbit_sum_matches_transfer_2shift(coin):
    orbits = periodic_orbits(full_shift(2), 14)
    got = pressure_orbit_sum(orbits, 14.0, length_weighted=True)
    assert abs(got - math.log(2)) < 0.05
    # the unweighted estimator carries the counting prefactor's bias
    raw = pressure_orbit_sum(orbits, 14.0)
    assert raw < math.log(2) and abs(raw - math.log(2)) < 0.2


def test_orbit_sum_matches_transfer_weighted(coin):
    orbits = periodic_orbits(coin, 14)
    got = pressure_orbit_sum(orbits, 14.0, length_weighted=True)
    assert abs(got - math.log(1 + math.e)) < 0.05


def test_periodic_orbit_counts():
    # primitive orbit counts of the full 2-shift: necklace numbers
    orbits = periodic_orbits(full_shift(2), 5)
    by_period = {}
    for _, _, k in orbits:
        by_period[k] = by_period.get(k, 0) + 1
    assert by_period == {1: 2, 2: 1, 3: 2, 4: 3, 5: 6}


# ---------------------------------------------------------------------------
# Legendre rate function

def test_rate_function_peak(coin_rate):
    assert abs(coin_rate.at(0.5) - math.log(2)) < 1e-9


def test_rate_function_endpoints(coin_rate):
    assert abs(coin_rate.at(0.0)) < 1e-9
    assert abs(coin_rate.at(1.0)) < 1e-9
    assert coin_rate.at(-0.1) == NEG_INF
    assert coin_rate.at(1.1) == NEG_INF


def test_rate_function_bernoulli_oracle(coin_rate):
    oracle = -(0.6 * math.log(0.6) + 0.4 * math.log(0.4))
    assert abs(coin_rate.at(0.6) - oracle) < 1e-6


def test_rate_endpoints_estimated(coin_rate):
    assert abs(coin_rate.q_minus - 0.0) < 1e-9
    assert abs(coin_rate.q_plus - 1.0) < 1e-9


def test_legendre_roundtrip(coin, coin_curve, coin_rate):
    for beta in (-2.0, -0.5, 0.0, 0.5, 2.0):
        back = legendre_roundtrip(coin_curve, coin_rate, beta)
        assert abs(back - pressure_transfer(coin, beta)) < 1e-6


def test_legendre_rejects_narrow_grid(coin):
    curve = pressure_curve(coin, np.linspace(-1.0, 1.0, 41))
    with pytest.raises(ValueError, match="not converged"):
        legendre_rate(curve)


def test_rate_peak_at_max_entropy_mean():
    for model in (full_shift(2, q_by_symbol=(0.0, 1.0)),
                  full_shift(3, q_by_symbol=(0.0, 0.5, 2.0)),
                  golden_mean_shift(q_edge=np.array([[0.0, 1.0], [2.0, 0.0]]))):
        qbar = thermo.mean_under_max_entropy(model)
        curve = pressure_curve(model)
        rate = legendre_rate(curve, alphas=[qbar])
        assert abs(rate.values[0] - topological_entropy(model)) < 1e-8


def test_pressure_minus_slope_limit(coin, coin_curve, coin_rate):
    # P(beta) - beta*q_plus decreases to H(q_plus) along beta >= 0
    sel = coin_curve.betas >= 0
    g = coin_curve.values[sel] - coin_curve.betas[sel] * coin_rate.q_plus
    assert np.all(np.diff(g) <= 1e-12)
    assert g[-1] >= -1e-12
    assert abs(g[-1] - coin_rate.at(coin_rate.q_plus)) < 1e-4


# ---------------------------------------------------------------------------
# extreme means (Karp vs exhaustive cycles)

def test_q_extremes_full_shift(coin):
    assert q_extremes(coin) == (0.0, 1.0)


def test_q_extremes_self_loops():
    A = np.ones((2, 2), dtype=int)
    q = np.array([[1.0, 2.0], [2.0, 3.0]])
    model = MarkovModel(adjacency=A, q_edge=q, roof_edge=1.0)
    assert q_extremes(model) == (1.0, 3.0)
    assert oracles.simple_cycle_mean_extremes(A, q) == (1.0, 3.0)


def test_q_extremes_single_cycle():
    A = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    q = np.zeros((3, 3))
    q[0, 1], q[1, 2], q[2, 0] = 1.0, 2.0, 3.0
    model = MarkovModel(adjacency=A, q_edge=q, roof_edge=1.0)
    assert q_extremes(model) == (2.0, 2.0)


def test_q_extremes_matches_exhaustive_oracle():
    rng = np.random.default_rng(42)
    checked = 0
    while checked < 25:
        n = int(rng.integers(2, 7))
        A = (rng.random((n, n)) < 0.55).astype(int)
        q = np.round(rng.integers(-5, 6, (n, n)).astype(float) / 2.0, 6)
        try:
            model = MarkovModel(adjacency=A, q_edge=q, roof_edge=1.0)
        except ValueError:
            continue
        lo, hi = q_extremes(model)
        olo, ohi = oracles.simple_cycle_mean_extremes(A, q)
        assert abs(lo - olo) < 1e-12 and abs(hi - ohi) < 1e-12
        checked += 1


# ---------------------------------------------------------------------------
# Monte Carlo large deviations

def test_mc_matches_exact_binomial_tail(coin):
    res = birkhoff_ld_montecarlo(coin, T=50, interval=(0.6, 1.0),
                                 nsamples=200_000, seed=7)
    oracle = oracles.exact_binomial_interval_rate(50, 0.6, 1.0)
    assert abs(res.empirical_rate - oracle) <= 4 * res.se_rate


def test_mc_full_interval_rate_zero(coin):
    res = birkhoff_ld_montecarlo(coin, T=20, interval=(0.0, 1.0),
                                 nsamples=10_000, seed=1)
    assert res.hits == res.nsamples
    assert res.empirical_rate == 0.0


def test_mc_zero_hits_sentinel(coin):
    res = birkhoff_ld_montecarlo(coin, T=20, interval=(2.0, 3.0),
                                 nsamples=10_000, seed=1)
    assert res.hits == 0
    assert res.empirical_rate == NEG_INF


def test_mc_typical_window_rate_vanishes(coin):
    rates = []
    for T in (50, 200, 800):
        res = birkhoff_ld_montecarlo(coin, T=T, interval=(0.49, 0.51),
                                     nsamples=50_000, seed=3)
        rates.append(res.empirical_rate)
    assert rates[0] < rates[1] < rates[2] <= 0.0
    assert abs(rates[-1]) < 0.01


def test_mc_deterministic_given_seed(coin):
    a = birkhoff_ld_montecarlo(coin, T=30, interval=(0.6, 1.0),
                               nsamples=50_000, seed=11)
    b = birkhoff_ld_montecarlo(coin, T=30, interval=(0.6, 1.0),
                               nsamples=50_000, seed=11)
    assert a.hits == b.hits


def test_mc_prediction_matches_closed_form(coin, coin_rate):
    pred = ld_rate_prediction(coin, (0.6, 1.0), coin_rate)
    oracle = -(0.6 * math.log(0.6) + 0.4 * math.log(0.4)) - math.log(2)
    assert abs(pred - oracle) < 1e-6


def test_mc_finite_T_rate_converges_to_prediction():
    # exact binomial rates increase monotonically toward H(0.6) - log 2
    target = -(0.6 * math.log(0.6) + 0.4 * math.log(0.4)) - math.log(2)
    rates = [oracles.exact_binomial_interval_rate(T, 0.6, 1.0)
             for T in (50, 200, 800, 3200)]
    gaps = [abs(r - target) for r in rates]
    assert all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:]))


# ---------------------------------------------------------------------------
# time change

def test_abramov_unit_roof():
    model = full_shift(2, q_by_symbol=(0.0, 1.0))
    chk = abramov_timechange(model)
    assert abs(chk.h_timechanged - chk.h_base) < 1e-12
    assert abs(chk.h_base - math.log(2)) < 1e-12


def test_abramov_constant_roof_two():
    model = full_shift(2, roof_by_symbol=(2.0, 2.0))
    chk = abramov_timechange(model)
    assert abs(chk.h_timechanged - chk.h_base / 2.0) < 1e-12


def test_abramov_matches_bowen_root():
    model = full_shift(2, roof_by_symbol=(1.0, 2.0))
    chk = abramov_timechange(model)
    assert abs(chk.h_timechanged - GOLDEN_ENTROPY) < 1e-8
    assert chk.abramov_residual < 1e-8


def test_abramov_d_minus_1_scaling():
    model = full_shift(2, roof_by_symbol=(1.0, 2.0), d_minus_1=3.0)
    chk = abramov_timechange(model)
    assert abs(chk.h_timechanged - 3.0 * chk.bowen_root) < 1e-8


# ---------------------------------------------------------------------------
# stable norm

def test_stable_norm_proportional():
    orbits = [(l, 0.8 * l) for l in (1.0, 2.5, 7.0)]
    assert abs(stable_norm(orbits) - 0.8) < 1e-15


def test_stable_norm_zero_form():
    assert stable_norm([(2.0, 0.0), (3.0, 0.0)]) == 0.0


def test_stable_norm_planted_max():
    orbits = [(2.0, 0.4), (3.0, 0.95 * 3.0), (5.0, 1.0)]
    assert abs(stable_norm(orbits) - 0.95) < 1e-15


def test_stable_norm_empty():
    with pytest.raises(ValueError, match="empty"):
        stable_norm([])
