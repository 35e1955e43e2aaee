import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import exitdom as ed
from exitdom.walk import MODE_FLOAT, MODE_RATIONAL, WalkSpec, exact_fraction


def brute_force_tables(p, k, horizon):
    """Path-enumeration oracle for the exit law: O(2^horizon), exact rationals."""
    p = Fraction(p)
    q = 1 - p
    up = [Fraction(0)] * (horizon + 1)
    down = [Fraction(0)] * (horizon + 1)
    survival = [Fraction(0)] * (horizon + 1)
    survival[0] = Fraction(1)
    for n in range(1, horizon + 1):
        alive = Fraction(0)
        for steps in itertools.product((1, -1), repeat=n):
            prob = Fraction(1)
            pos = 0
            for x in steps:
                prob *= p if x == 1 else q
                pos += x
                if abs(pos) >= k:
                    break
            else:
                alive += prob
        survival[n] = alive
    for n in range(1, horizon + 1):
        for steps in itertools.product((1, -1), repeat=n):
            prob = Fraction(1)
            pos = 0
            hit_step = None
            for i, x in enumerate(steps, 1):
                prob *= p if x == 1 else q
                pos += x
                if abs(pos) >= k:
                    hit_step = i
                    break
            if hit_step == n:
                if pos == k:
                    up[n] += prob
                else:
                    down[n] += prob
    return up, down, survival


@pytest.mark.parametrize("p,k,horizon", [
    (Fraction(1, 2), 1, 8),
    (Fraction(3, 5), 2, 10),
    (Fraction(7, 20), 3, 12),
])
def test_dp_matches_path_enumeration(p, k, horizon):
    up, down, survival = brute_force_tables(p, k, horizon)
    table = ed.exit_joint(WalkSpec(p, k), horizon, MODE_RATIONAL)
    for n in range(horizon + 1):
        assert table.up[n] == up[n]
        assert table.down[n] == down[n]
        assert table.residual[n] == survival[n]


def test_survival_examples():
    assert ed.survival_pmf(WalkSpec(0.5, 1), 3).values == [1, 0, 0, 0]
    assert ed.survival_pmf(WalkSpec(0.6, 2), 2).values[2] == pytest.approx(0.48)
    assert ed.survival_pmf(WalkSpec(0.5, 2), 4).values[4] == pytest.approx(0.25)


def test_exit_joint_examples():
    t = ed.exit_joint(WalkSpec(0.5, 1), 1)
    assert t.up[1] == pytest.approx(0.5) and t.down[1] == pytest.approx(0.5)
    t = ed.exit_joint(WalkSpec(0.6, 2), 3)
    assert t.up[2] == pytest.approx(0.36)
    assert t.down[2] == pytest.approx(0.16)
    assert t.up[3] == 0 and t.down[3] == 0  # parity


def test_parity_and_mass_conservation():
    t = ed.exit_joint(WalkSpec(0.7, 3), 40)
    absorbed = 0.0
    for n in range(41):
        if n < 3 or (n - 3) % 2:
            assert t.exit_pmf(n) == 0
        absorbed += t.exit_pmf(n)
        assert absorbed + t.residual[n] == pytest.approx(1.0, abs=1e-12)


def test_mass_conservation_exact():
    t = ed.exit_joint(WalkSpec("7/10", 2), 30, MODE_RATIONAL)
    absorbed = Fraction(0)
    for n in range(31):
        absorbed += t.exit_pmf(n)
        assert absorbed + t.residual[n] == 1


def test_sign_flip_symmetry_exact():
    a = ed.survival_pmf(WalkSpec("3/10", 3), 60, MODE_RATIONAL).values
    b = ed.survival_pmf(WalkSpec("7/10", 3), 60, MODE_RATIONAL).values
    assert a == b


def test_dominance_above_half_exact():
    ps = [Fraction(1, 2), Fraction(3, 5), Fraction(7, 10), Fraction(9, 10)]
    curves = [ed.survival_pmf(WalkSpec(p, 3), 80, MODE_RATIONAL).values
              for p in ps]
    for lo, hi in zip(curves, curves[1:]):
        assert all(a >= b for a, b in zip(lo, hi))


def test_mean_exit():
    assert ed.mean_exit(WalkSpec(0.37, 1)) == pytest.approx(1.0)
    assert ed.mean_exit(WalkSpec(0.5, 3)) == pytest.approx(9.0)
    assert ed.mean_exit(WalkSpec(0.6, 2)) == pytest.approx(2 / 0.52)
    assert ed.mean_exit(WalkSpec("3/5", 2), MODE_RATIONAL) == Fraction(50, 13)


def test_mean_exit_matches_table_tail():
    # E[sigma] from the pmf plus a residual-mass sanity bound
    spec = WalkSpec(0.6, 3)
    t = ed.exit_joint(spec, 400)
    approx = sum(n * t.exit_pmf(n) for n in range(401))
    assert approx == pytest.approx(ed.mean_exit(spec), abs=1e-9)


def test_modulus_chain_up_prob():
    assert ed.modulus_chain_up_prob(WalkSpec(0.5, 5), 3) == pytest.approx(0.5)
    assert ed.modulus_chain_up_prob(WalkSpec(0.8, 5), 0) == 1.0
    assert ed.modulus_chain_up_prob(WalkSpec(0.6, 5), 2) == pytest.approx(0.28 / 0.52)


def test_modulus_chain_oracle():
    # conditional-probability enumeration: P(|S_{n+1}|=r+1 and |S_n|=r) / P(|S_n|=r)
    # for the free walk (k large enough that no absorption interferes)
    p, r, n = Fraction(3, 5), 2, 6
    q = 1 - p
    num = Fraction(0)
    den = Fraction(0)
    for steps in itertools.product((1, -1), repeat=n + 1):
        prob = Fraction(1)
        for x in steps:
            prob *= p if x == 1 else q
        pos_n = sum(steps[:n])
        pos_n1 = sum(steps)
        if abs(pos_n) == r:
            den += prob
            if abs(pos_n1) == r + 1:
                num += prob
    assert ed.modulus_chain_up_prob(WalkSpec(p, 10), r, MODE_RATIONAL) == num / den


def test_modulus_chain_monotone_and_limit():
    spec = WalkSpec(0.6, 60)
    vals = [ed.modulus_chain_up_prob(spec, r) for r in range(1, 55)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert abs(ed.modulus_chain_up_prob(spec, 50) - 0.6) < 1e-9


def test_invalid_inputs():
    with pytest.raises(ValueError):
        WalkSpec(0.0, 2)
    with pytest.raises(ValueError):
        WalkSpec(1.2, 2)
    with pytest.raises(ValueError):
        WalkSpec(0.5, 0)
    with pytest.raises(ValueError):
        ed.survival_pmf(WalkSpec(0.5, 2), -1)
    with pytest.raises(ValueError):
        ed.exit_joint(WalkSpec(0.5, 3), 2)  # horizon < k
    with pytest.raises(ValueError):
        ed.modulus_chain_up_prob(WalkSpec(0.5, 3), 3)
    with pytest.raises(ValueError):
        ed.survival_pmf(WalkSpec(0.5, 2), 5, "decimal")


def test_exact_mode_rejects_unrepresentable():
    with pytest.raises(ValueError):
        exact_fraction(0.1 + 0.2)
    assert exact_fraction(0.55) == Fraction(11, 20)
    assert exact_fraction("11/20") == Fraction(11, 20)


def test_rational_mode_is_exact():
    vals = ed.survival_pmf(WalkSpec("3/5", 2), 6, MODE_RATIONAL).values
    assert vals[2] == Fraction(12, 25)
    assert all(isinstance(v, Fraction) for v in vals)


@settings(max_examples=40, deadline=None)
@given(num=st.integers(1, 99), k=st.integers(1, 4), horizon=st.integers(0, 40))
def test_survival_curve_properties(num, k, horizon):
    curve = ed.survival_pmf(WalkSpec(num / 100, k), horizon)
    vals = curve.as_floats()
    assert vals[0] == 1.0
    assert np.all(vals >= -1e-15) and np.all(vals <= 1 + 1e-15)
    assert np.all(np.diff(vals) <= 1e-15)


def test_serialization_roundtrip(tmp_path):
    import io as _io
    curve = ed.survival_pmf(WalkSpec(0.6, 2), 4)
    buf = _io.StringIO()
    curve.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "n,value"
    assert lines[3] == "2,0.48"
    obj = ed.exit_joint(WalkSpec("3/5", 2), 4, MODE_RATIONAL).to_json_obj()
    assert obj["up"][2] == "9/25"
