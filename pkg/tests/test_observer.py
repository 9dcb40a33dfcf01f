import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import max_real_root, scalar_power_sign

from intderiv import (
    ConfigError,
    Constant,
    ObserverConfig,
    StepScheme,
    Variant,
    check,
    experiment1_spec,
    make_variant,
    observer_char_poly,
    observer_rhs,
    run_signal_tracking,
    validate,
)
from intderiv.observer import fast_rhs, gain_inequalities
from intderiv.scenarios import ScenarioSpec

REFERENCE = dict(n=3, p=2, gains=(0.1, 2.0, 1.0), epsilon=0.5, alpha_n=0.8, initial_state=(0.0, 1.0, 0.0))


def codes(cfg):
    return [d.code for d in check(cfg)]


def test_reference_config_valid():
    cfg = ObserverConfig(**REFERENCE)
    assert validate(cfg) is cfg
    assert check(cfg) == []


def test_fifth_order_infeasible_message():
    cfg = ObserverConfig(n=5, p=3, gains=(1.0,) * 5, epsilon=0.5, alpha_n=0.8)
    diags = check(cfg)
    assert diags[0].code == "infeasible"
    assert diags[0].message.startswith("infeasible (n,p)=(5,3)")
    with pytest.raises(ConfigError) as err:
        validate(cfg)
    assert "infeasible (n,p)" in str(err.value)


def test_all_violations_reported():
    cfg = ObserverConfig(n=3, p=2, gains=(0.1, -2.0, 1.0, 4.0), epsilon=1.5, alpha_n=1.2)
    got = set(codes(cfg))
    assert {"shape", "gain", "epsilon", "alpha"} <= got


@pytest.mark.parametrize("p", [1, 4])
def test_slot_out_of_range(p):
    assert "slot" in codes(ObserverConfig(n=3, p=p, gains=(1.0,) * 3, epsilon=0.5, alpha_n=0.8))


def test_inequality_threshold_example():
    cfg = ObserverConfig(**REFERENCE)
    [(desc, lhs, rhs)] = gain_inequalities(3, 2, cfg.gains, cfg.epsilon, cfg.alphas)
    assert rhs == pytest.approx(0.5 ** (4 / 3) * 0.1, rel=1e-14)
    assert rhs == pytest.approx(0.0397, abs=5e-5)
    assert lhs == 2.0 > rhs


def test_inequality_violation_is_reported():
    cfg = ObserverConfig(n=3, p=2, gains=(1.0, 0.01, 0.1), epsilon=0.5, alpha_n=0.8)
    assert {"gain_inequality", "not_hurwitz"} <= set(codes(cfg))


def test_double_integral_threshold():
    cfg = make_variant("double_integral", (0.1, 2.0, 1.0), 0.5, 0.8)
    [(_, _, rhs)] = gain_inequalities(3, 3, cfg.gains, cfg.epsilon, cfg.alphas)
    assert rhs == pytest.approx(0.5**2.4 * 0.1, rel=1e-14)
    assert rhs == pytest.approx(0.0190, abs=1e-4)


@pytest.mark.parametrize(
    "tag, labels",
    [
        ("deriv_integral", ("∫a", "a", "ȧ")),
        ("double_integral", ("∬a", "∫a", "a")),
        ("fold_integral", ("∫a", "a")),
        ("deriv_double_integral", ("∬a", "∫a", "a", "ȧ")),
    ],
)
def test_make_variant_labels(tag, labels):
    n, _ = Variant(tag).order
    gains = {2: (0.1, 2.0), 3: (0.1, 2.0, 1.0), 4: (0.1, 1.0, 3.0, 2.0)}[n]
    cfg = make_variant(tag, gains, 0.5, 0.8)
    assert cfg.channel_labels == labels
    assert cfg.variant is Variant(tag)


def test_fold_integral_linear_exponents():
    cfg = make_variant("fold_integral", (1.0, 1.0), 0.5, 1.0)
    assert cfg.alphas == (1.0, 1.0)


def test_make_variant_rejects_bad_gains():
    with pytest.raises(ConfigError):
        make_variant("deriv_integral", (1.0, 0.01, 0.1), 0.5, 0.8)


def test_variant_shape_mismatch():
    cfg = ObserverConfig(n=3, p=3, gains=(0.1, 2.0, 1.0), epsilon=0.5, alpha_n=0.8, variant="deriv_integral")
    assert "variant" in codes(cfg)


# -- right-hand side --------------------------------------------------------------


def test_rhs_at_rest():
    cfg = ObserverConfig(**REFERENCE)
    assert observer_rhs(cfg, (0.0, 1.0, 0.0), 1.0) == pytest.approx([1.0, 0.0, 0.0], abs=0)


def test_rhs_second_order_example():
    cfg = ObserverConfig(n=2, p=2, gains=(1.0, 1.0), epsilon=0.5, alpha_n=0.8)
    expected = 8.0 * (-scalar_power_sign(0.5 * 1.0, 2 / 3) - scalar_power_sign(2.0, 0.8))
    got = observer_rhs(cfg, (1.0, 2.0), 0.0)
    assert got[0] == 2.0
    assert got[1] == pytest.approx(expected, rel=1e-14)
    assert got[1] == pytest.approx(-18.968, abs=1e-3)


def test_rhs_unit_epsilon_reduces_to_plain_sum():
    cfg = ObserverConfig(n=3, p=2, gains=(0.1, 2.0, 1.0), epsilon=1.0 - 1e-15, alpha_n=0.8)
    x = (0.3, 1.2, -0.7)
    a = cfg.alphas
    plain = -(0.1 * scalar_power_sign(x[0], a[0]) + 1.0 * scalar_power_sign(x[2], a[2]))
    assert observer_rhs(cfg, x, x[1])[2] == pytest.approx(plain, rel=1e-12)


states = st.lists(st.floats(-50, 50), min_size=3, max_size=3)


@given(states, st.floats(-50, 50))
def test_rhs_odd(x, a):
    cfg = ObserverConfig(**REFERENCE)
    assert np.array_equal(observer_rhs(cfg, np.negative(x), -a), -observer_rhs(cfg, x, a))


@given(states, st.floats(-50, 50))
def test_rhs_continuous(x, a):
    cfg = ObserverConfig(**REFERENCE)
    base = observer_rhs(cfg, x, a)
    near = observer_rhs(cfg, np.asarray(x) + 1e-10, a)
    # Hölder modulus of the sum with the smallest exponent
    bound = sum(cfg.gains) * 2 * (1e-10) ** min(cfg.alphas) / cfg.epsilon**4
    assert np.all(np.abs(near - base) <= bound + 1e-9)


def test_compiled_rhs_matches_reference():
    rng = np.random.default_rng(2)
    for cfg in (ObserverConfig(**REFERENCE), make_variant("deriv_double_integral", (0.1, 1.0, 3.0, 2.0), 0.3, 0.7)):
        for _ in range(200):
            x = rng.normal(0, 3, cfg.n)
            a = float(rng.normal())
            assert np.allclose(fast_rhs(cfg, x, a), observer_rhs(cfg, x, a), rtol=1e-13, atol=1e-13)


# -- dynamics ------------------------------------------------------------------------


def test_linear_decay_rate_matches_dominant_root():
    eps = 0.5
    cfg = make_variant("fold_integral", (1.0, 1.0), eps, 1.0, initial_state=(1.0, 0.0))
    rate = max_real_root(observer_char_poly(cfg)) / eps
    spec = ScenarioSpec(
        tag="signal_tracking",
        observer=cfg,
        signal=Constant(0.0),
        scheme=StepScheme("rk4", 1e-3),
        horizon=20.0,
        settle_time=0.0,
    )
    trace, _ = run_signal_tracking(spec)
    mask = (trace.times >= 5.0) & (trace.times <= 15.0)
    slope = np.polyfit(trace.times[mask], np.log(np.abs(trace.states[mask, 0])), 1)[0]
    assert slope == pytest.approx(rate, rel=0.01)
    assert rate == pytest.approx((-2 + math.sqrt(3)) / eps, rel=1e-12)


@pytest.mark.slow
def test_errors_shrink_with_epsilon():
    sups = []
    for eps, dt in ((0.9, 1e-3), (0.5, 1e-3), (0.25, 2.5e-4)):
        _, metrics = run_signal_tracking(experiment1_spec(horizon=60.0, epsilon=eps, dt=dt))
        sups.append([metrics.sup[f"e{i}"] for i in (1, 2, 3)])
    sups = np.array(sups)
    assert np.all(np.diff(sups, axis=0) < 0), sups
