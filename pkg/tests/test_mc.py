import math

import numpy as np
import pytest

import exitdom as ed
from exitdom.bm import DriftSpec
from exitdom.mc import ExitSamples, RngStreamSpec

SEED = 20240817


@pytest.fixture(scope="module")
def samples0():
    return ed.simulate_exit_bm(DriftSpec(0.0, 1.0), 1e-3, 30.0, 20_000,
                               RngStreamSpec(SEED, 1))


@pytest.fixture(scope="module")
def samples1():
    return ed.simulate_exit_bm(DriftSpec(1.0, 1.0), 1e-3, 30.0, 20_000,
                               RngStreamSpec(SEED, 2))


def test_rng_stream_children():
    assert RngStreamSpec(7, 3).child(4).substream == 7  # offsets are additive
    a = RngStreamSpec(7, 3).generator().standard_normal(4)
    b = RngStreamSpec(7, 3).generator().standard_normal(4)
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        RngStreamSpec(7, algorithm="mt19937")


def test_thread_count_does_not_change_output(samples0):
    redo = ed.simulate_exit_bm(DriftSpec(0.0, 1.0), 1e-3, 30.0, 20_000,
                               RngStreamSpec(SEED, 1), threads=4)
    assert np.array_equal(samples0.times, redo.times)
    assert np.array_equal(samples0.sides, redo.sides)
    assert np.array_equal(samples0.terminal, redo.terminal)


def test_mean_exit_time_driftless(samples0):
    # E[tau] = b^2 = 1
    et = samples0.exit_times()
    se = et.std(ddof=1) / math.sqrt(et.size)
    assert abs(et.mean() - 1.0) < 4 * se
    assert samples0.censored_fraction < 1e-3


def test_side_symmetry_driftless(samples0):
    frac_up = np.mean(samples0.sides == 1)
    assert abs(frac_up - 0.5) < 4 * math.sqrt(0.25 / samples0.n)


def test_drifted_exit_side_split(samples1):
    # P(exit at +b) = e^(lam b) / (e^(lam b) + e^(-lam b))
    target = 1.0 / (1.0 + math.exp(-2.0))
    frac_up = np.mean(samples1.sides == 1)
    se = math.sqrt(target * (1 - target) / samples1.n)
    assert abs(frac_up - target) < 4 * se


def test_empirical_matches_analytic(samples0, samples1):
    for s, lam in ((samples0, 0.0), (samples1, 1.0)):
        for t in (0.5, 1.0, 2.0):
            emp = s.empirical_survival(t)
            an = ed.drifted_survival(DriftSpec(lam, 1.0), t)
            se = math.sqrt(max(an * (1 - an), 1e-9) / s.n)
            assert abs(emp - an) < 4 * se


def test_likelihood_ratio_bm_values():
    spec = DriftSpec(0.0, 1.0)
    samples = ExitSamples(spec, 1e-3, 30.0,
                          np.array([1.0, 2.0]),
                          np.array([1, -1], dtype=np.int8),
                          np.array([1.0, -1.0]))
    w = ed.likelihood_ratio_bm(samples, 0.0, 1.0)
    # exp(lam * B_tau - lam^2 tau / 2) at (tau=1, B=+1) and (tau=2, B=-1)
    assert w[0] == pytest.approx(math.exp(1.0 - 0.5), abs=1e-12)
    assert w[1] == pytest.approx(math.exp(-1.0 - 1.0), abs=1e-12)


def test_likelihood_ratio_rejects_censored():
    spec = DriftSpec(0.0, 1.0)
    samples = ExitSamples(spec, 1e-3, 30.0,
                          np.array([1.0, 30.0]),
                          np.array([1, 0], dtype=np.int8),
                          np.array([1.0, 0.2]))
    with pytest.raises(ValueError):
        ed.likelihood_ratio_bm(samples, 0.0, 1.0)


def test_reweight_identity_equals_empirical(samples0):
    for t in (0.5, 1.0, 3.0):
        est, _, _ = ed.reweighted_survival_bm(samples0, 0.0, t)
        assert est == samples0.empirical_survival(t)


def test_reweight_weights_normalize(samples0):
    # E0[LR] = 1, so reweighting at t = 0 is close to 1 within a few se
    est, se, frac = ed.reweighted_survival_bm(samples0, 1.0, samples0.dt)
    assert abs(est - 1.0) < 4 * se + frac


def test_reweight_matches_analytic(samples0):
    for t in (0.5, 1.0, 2.0):
        est, se, frac = ed.reweighted_survival_bm(samples0, 1.0, t)
        an = ed.drifted_survival(DriftSpec(1.0, 1.0), t)
        assert abs(est - an) < 4 * se + frac


def test_reweight_censored_tolerance():
    short = ed.simulate_exit_bm(DriftSpec(0.0, 1.0), 1e-3, 1.0, 2000,
                                RngStreamSpec(SEED, 5))
    assert short.censored_fraction > 0.1
    with pytest.raises(RuntimeError):
        ed.reweighted_survival_bm(short, 1.0, 0.5, censored_tol=1e-3)


def test_independence_chi_square(samples1):
    res = ed.check_independence_continuous(samples1, time_bins=10)
    assert res.p_value > 1e-3
    assert res.dof == res.table.shape[0] - 1
    assert res.table.sum() == np.count_nonzero(samples1.sides)


def test_independence_detects_dependence(samples1):
    control = ExitSamples(samples1.spec, samples1.dt, samples1.horizon,
                          samples1.times.copy(), samples1.sides.copy(),
                          samples1.terminal.copy())
    nc = control.sides != 0
    med = np.median(control.times[nc])
    control.sides[nc] = np.where(control.times[nc] > med, 1, -1).astype(np.int8)
    res = ed.check_independence_continuous(control, time_bins=10)
    assert res.p_value < 1e-10


def test_independence_rejects_tiny_sample():
    spec = DriftSpec(0.0, 1.0)
    samples = ExitSamples(spec, 1e-3, 30.0, np.ones(10),
                          np.ones(10, dtype=np.int8), np.ones(10))
    with pytest.raises(ValueError):
        ed.check_independence_continuous(samples)


def test_bridge_correction_reduces_coarse_grid_bias():
    # at coarse dt, endpoint monitoring overestimates survival; the bridge fixes most of it
    t, n = 0.5, 40_000
    an = ed.drifted_survival(DriftSpec(0.0, 1.0), t)
    with_b = ed.simulate_exit_bm(DriftSpec(0.0, 1.0), 0.02, 8.0, n,
                                 RngStreamSpec(SEED, 7), bridge_correction=True)
    without = ed.simulate_exit_bm(DriftSpec(0.0, 1.0), 0.02, 8.0, n,
                                  RngStreamSpec(SEED, 7), bridge_correction=False)
    err_with = abs(with_b.empirical_survival(t) - an)
    err_without = abs(without.empirical_survival(t) - an)
    assert err_with < err_without
    assert err_without > 0.01  # the coarse-grid bias is real
    assert err_with < 0.01


def test_coupled_identical_drifts_are_bit_equal():
    stats = ed.simulate_y_coupled([1.0, 1.0], 0.0, 1e-3, 0.5, 200,
                                  RngStreamSpec(SEED, 11))
    assert np.array_equal(stats.final_values[0], stats.final_values[1])
    assert stats.violation_fraction == 0.0


def test_coupled_ordering_small_violation_fraction():
    stats = ed.simulate_y_coupled([0.0, 0.5, 1.0], 0.0, 1e-4, 1.0, 400,
                                  RngStreamSpec(SEED, 12))
    assert stats.violation_fraction <= 1e-3
    assert len(stats.pair_violation_fractions) == 2


def test_coupled_hitting_times_ordered_by_drift():
    stats = ed.simulate_y_coupled([0.0, 2.0], 0.0, 1e-3, 4.0, 2000,
                                  RngStreamSpec(SEED, 13))
    m0, se0, f0 = stats.hit_summary(0)
    m1, se1, f1 = stats.hit_summary(1)
    assert f0 > 0.95 and f1 > 0.95
    # stronger drift pushes the squared modulus up sooner
    assert m1 + 3 * (se0 + se1) < m0


def test_simulation_input_validation():
    rng = RngStreamSpec(SEED)
    with pytest.raises(ValueError):
        ed.simulate_exit_bm(DriftSpec(0.0, 1.0), 0.0, 1.0, 10, rng)
    with pytest.raises(ValueError):
        ed.simulate_exit_bm(DriftSpec(0.0, 1.0), 2.0, 1.0, 10, rng)
    with pytest.raises(ValueError):
        ed.simulate_exit_bm(DriftSpec(0.0, 1.0), 0.1, 1.0, 0, rng)
    with pytest.raises(ValueError):
        ed.simulate_y_coupled([1.0, 0.0], 0.0, 1e-3, 1.0, 10, rng)
    with pytest.raises(ValueError):
        ed.simulate_y_coupled([0.0, 1.0], -1.0, 1e-3, 1.0, 10, rng)
