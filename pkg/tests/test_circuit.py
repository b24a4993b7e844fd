import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motorparams import CircuitParams, DegenerateError, DomainError, MultimodalWarning, circuit
from motorparams.circuit import breakdown_torque, input_impedance, operating_point

from conftest import random_feasible

FIELDS = ("p_mech", "q_in", "p_in", "torque", "i_stator", "efficiency")
GOLDEN = CircuitParams(0.031, 0.10, 3.1, 0.018, 0.18, 0.12, 0.09, 42.0)


def _close(got, want, rel=1e-10, abs_=1e-14):
    return abs(got - want) <= max(rel * abs(want), abs_)


def test_operating_points_match_high_precision_goldens(goldens):
    rows = goldens["operating_points"]
    assert len({tuple(r["params"]) for r in rows}) == 20
    for r in rows:
        op = operating_point(r["params"], r["slip"])
        for name in FIELDS:
            assert _close(getattr(op, name), float(r[name])), (r["params"], r["slip"], name)
        z = input_impedance(r["params"], r["slip"])
        assert _close(z.real, float(r["z_in"][0])) and _close(z.imag, float(r["z_in"][1]))


def test_golden_machine_at_two_percent_slip(goldens):
    row = next(r for r in goldens["operating_points"] if r["params"] == list(GOLDEN.as_array()) and r["slip"] == 0.02)
    op = operating_point(GOLDEN, 0.02)
    assert op.i_stator == pytest.approx(float(row["i_stator"]), rel=1e-12)
    assert op.efficiency == pytest.approx(0.91903124089994927, rel=1e-12)


def test_input_impedance_open_shunt_example(goldens):
    ex = goldens["hand_example"]
    z = input_impedance(ex["params"], 1.0)
    assert z.real == pytest.approx(float(ex["z_in"][0]), rel=1e-10)
    assert z.imag == pytest.approx(float(ex["z_in"][1]), rel=1e-10)
    # Same value by plain complex arithmetic with the shunt removed.
    a, b = 0.02 + 0.12j, 0.10 + 0.04j
    assert abs(z - ((0.02 + 0.08j) + a * b / (a + b))) < 1e-8


def test_identical_cages_halve_the_branch():
    x = CircuitParams(0.0, 0.0, 1e9, 0.05, 0.05, 0.05, 0.05, 1e9).as_array()
    z = complex(circuit.rotor_impedance(x, 1.0))
    assert z == pytest.approx(0.025 + 0.025j, abs=1e-15)


def test_rotor_opens_at_vanishing_slip():
    x = GOLDEN.as_array()
    shunt = 1.0 / (1.0 / x[7] + 1.0 / (1j * x[2]))
    z = input_impedance(x, 1e-12)
    assert abs(z - (x[0] + 1j * x[1] + shunt)) < 1e-8


def test_locked_rotor_does_no_mechanical_work():
    op = operating_point([0.02, 0.08, 1e9, 0.02, 0.12, 0.10, 0.04, 1e9], 1.0)
    assert op.p_mech == 0.0
    assert op.torque > 0


def test_power_balance_on_random_points():
    rng = np.random.default_rng(11)
    x = random_feasible(rng, 1000, floor=1e-6)
    slips = rng.uniform(1e-3, 1.0, size=(1000, 10))
    out = circuit.evaluate(x[:, None, :], slips)
    losses = out["p_mech"] + out["stator_loss"] + out["rotor_loss"] + out["core_loss"]
    assert np.max(np.abs(losses - out["p_in"]) / np.abs(out["p_in"])) < 1e-10
    balance = out["p_in"] - out["stator_loss"] - out["core_loss"]
    assert np.max(np.abs(balance - out["p_airgap"]) / out["p_in"]) < 1e-10
    assert np.max(np.abs(out["torque"] * (1 - slips) - out["p_mech"])) < 1e-12


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(1e-3, 0.3), min_size=8, max_size=8),
    st.floats(1e-3, 1.0),
)
def test_torque_times_speed_is_mechanical_power(vals, slip):
    vals[2] *= 20
    vals[7] *= 300
    op = operating_point(vals, slip)
    assert abs(op.torque * (1 - slip) - op.p_mech) < 1e-12


def test_series_limit_when_shunt_opens():
    base = GOLDEN.as_array()
    z1 = base[3] + 1j * base[4]
    z2 = base[5] + 1j * base[6]
    series = abs(1.0 / (base[0] + 1j * base[1] + z1 * z2 / (z1 + z2)))
    gaps = []
    for big in (1e3, 1e5, 1e7, 1e9):
        x = base.copy()
        x[2] = x[7] = big
        gaps.append(abs(operating_point(x, 1.0).i_stator - series))
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-8


def test_impedance_continuous_in_slip():
    rng = np.random.default_rng(5)
    x = random_feasible(rng, 200)
    s = rng.uniform(1e-3, 1 - 1e-8, size=200)
    d = np.abs(circuit.impedance_array(x, s) - circuit.impedance_array(x, s + 1e-9))
    assert d.max() < 1e-6


@pytest.mark.parametrize("slip", [0.0, -0.1, 1.5, math.nan])
def test_slip_outside_domain(slip):
    with pytest.raises(DomainError):
        operating_point(GOLDEN, slip)
    with pytest.raises(DomainError):
        input_impedance(GOLDEN, slip)


def test_degenerate_zero_impedance():
    with pytest.raises(DegenerateError):
        operating_point([0.0, 0.0, 1.0, 0.01, 0.1, 0.02, 0.05, 1e-300], 0.5)


def test_breakdown_matches_high_precision_and_dense_sweep(goldens):
    g = goldens["breakdown"]
    with pytest.warns(MultimodalWarning):
        s_max, t_b = breakdown_torque(GOLDEN)
    assert s_max == pytest.approx(float(g["s_max"]), rel=1e-7)
    assert t_b == pytest.approx(float(g["t_b"]), rel=1e-12)
    # The 10^6-point sweep brackets the same peak to within one grid step.
    assert abs(s_max / float(g["sweep_s_max"]) - 1) < float(g["sweep_spacing"])
    assert t_b >= float(g["sweep_t_b"]) - 1e-13


def test_mpmath_oracle_reproduces_frozen_breakdown(goldens):
    import oracle

    s_max, t_b = oracle.breakdown(GOLDEN.as_array())
    assert mp.nstr(t_b, 30) == mp.nstr(mp.mpf(goldens["breakdown"]["t_b"]), 30)


def thevenin_slip(x):
    z_s = x[..., 0] + 1j * x[..., 1]
    z_p = 1.0 / (1.0 / x[..., 7] + 1.0 / (1j * x[..., 2]))
    z_th = z_s * z_p / (z_s + z_p)
    return x[..., 3] / np.sqrt(z_th.real**2 + (z_th.imag + x[..., 4]) ** 2)


def single_cage_machines(n, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        x = circuit.sample_uniform(rng, circuit.INIT_RANGES, 1)[0]
        x[[0, 1, 3, 4]] = np.maximum(x[[0, 1, 3, 4]], 1e-3)
        x[2] = max(x[2], 0.5)
        x[5] = 1e9
        x[7] = 1e9
        if 2e-3 < thevenin_slip(x) < 0.9:
            out.append(x)
    return np.array(out)


def test_single_cage_breakdown_slip_matches_thevenin_formula():
    x = single_cage_machines(100, 3)
    s_max, _, _ = circuit.breakdown_array(x)
    assert np.max(np.abs(s_max / thevenin_slip(x) - 1)) < 1e-6


def test_breakdown_is_a_local_and_sweep_maximum():
    rng = np.random.default_rng(8)
    x = random_feasible(rng, 200)
    s_max, t_b, _ = circuit.breakdown_array(x)
    for f in (1 - 1e-3, 1 + 1e-3):
        s = np.minimum(s_max * f, 1.0)
        assert np.all(t_b >= circuit.torque(x, s) - 1e-15)
    assert np.all(t_b >= circuit.torque(x, 1.0))
    grid = np.logspace(-4, 0, 200)
    assert np.all(t_b[:, None] >= circuit.torque(x[:, None, :], grid[None, :]) - 1e-15)


def test_two_humped_curve_warns_and_returns_global_peak():
    x = np.array([0.01, 0.01, 50, 0.002, 0.3, 0.5, 0.005, 1e6])
    with pytest.warns(MultimodalWarning):
        s_max, t_b = breakdown_torque(x)
    assert s_max == 1.0
    assert t_b == pytest.approx(float(circuit.torque(x, 1.0)))


def test_golden_machine_has_a_second_lower_hump():
    with pytest.warns(MultimodalWarning):
        s_max, _ = breakdown_torque(GOLDEN)
    assert s_max < 0.1


def test_single_hump_is_quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        breakdown_torque(single_cage_machines(1, 0)[0])


def test_params_roundtrip_and_feasibility():
    p = CircuitParams.from_array(GOLDEN.as_array())
    assert p == GOLDEN
    assert p.is_feasible() and p.is_positive()
    assert not p.replace(x_r2=0.5).is_feasible()
    assert set(p.as_dict()) == set(circuit.PARAM_NAMES)
