import numpy as np
import pytest
from scipy import integrate

from intderiv import ConfigError, cumulative_simpson, cumulative_trapezoid, drift_fit, experiment1_spec
from intderiv import run_signal_tracking
from intderiv.analysis import compute_metrics
from intderiv.ode import StateTrace


def test_trapezoid_examples():
    assert cumulative_trapezoid([0, 1, 2], [1, 1, 1]).tolist() == [0, 1, 2]
    t = np.linspace(0, 3, 31)
    assert cumulative_trapezoid(t, 2 * t - 1)[-1] == pytest.approx(6.0, abs=1e-12)


def test_simpson_cubic_exact():
    t = np.linspace(0, 2, 21)
    y = t**3 - 2 * t + 1
    exact = t**4 / 4 - t**2 + t
    got = cumulative_simpson(t, y)
    assert got[::2] == pytest.approx(exact[::2], abs=1e-12)


def test_cosine_final_values():
    t = np.linspace(0, np.pi, 1001)
    assert cumulative_trapezoid(t, np.cos(t))[-1] == pytest.approx(0.0, abs=1e-5)
    assert cumulative_simpson(t, np.cos(t))[-1] == pytest.approx(0.0, abs=1e-10)


def test_matches_scipy():
    rng = np.random.default_rng(4)
    t = np.cumsum(rng.uniform(0.01, 0.1, 200))
    y = rng.normal(size=200)
    assert cumulative_trapezoid(t, y)[1:] == pytest.approx(integrate.cumulative_trapezoid(y, x=t), rel=1e-12)
    tu = np.linspace(0, 4, 201)
    yu = np.exp(-tu) * np.sin(3 * tu)
    ours = cumulative_simpson(tu, yu)
    for k in (2, 50, 200):
        assert ours[k] == pytest.approx(integrate.simpson(yu[: k + 1], x=tu[: k + 1]), rel=1e-12)


def test_simpson_odd_nodes_add_trapezoid_panel():
    t = np.linspace(0, 1, 11)
    y = np.exp(t)
    s = cumulative_simpson(t, y)
    assert s[3] == pytest.approx(s[2] + 0.05 * (y[2] + y[3]))


def test_baselines_converge():
    def gap(n):
        t = np.linspace(0, 2, n)
        y = np.cos(3 * t)
        return abs(cumulative_trapezoid(t, y)[-1] - cumulative_simpson(t, y)[-1])

    assert gap(201) / gap(401) >= 4.0 * 0.95


def test_quadrature_errors():
    with pytest.raises(ConfigError):
        cumulative_trapezoid([0, 2, 1], [1, 1, 1])
    with pytest.raises(ConfigError):
        cumulative_trapezoid([0, 1], [1, 1, 1])
    with pytest.raises(ConfigError):
        cumulative_simpson([0, 1, 3], [1, 1, 1])
    assert cumulative_trapezoid([1.0], [5.0]).tolist() == [0.0]


def test_drift_fit_recovers_line():
    t = np.linspace(0, 100, 1001)
    slope, icpt, resid = drift_fit(t, 0.005 * t - 2.0)
    assert slope == pytest.approx(0.005, rel=1e-12)
    assert icpt == pytest.approx(-2.0, rel=1e-12)
    assert resid == pytest.approx(0.0, abs=1e-12)


def _trace(t, err):
    return StateTrace(times=t, states=err[:, None], refs=np.zeros_like(err)[:, None])


def test_metrics_zero_error():
    t = np.linspace(0, 10, 101)
    m = compute_metrics(_trace(t, np.zeros_like(t)), 2.0)
    assert m.sup["e1"] == m.rmse["e1"] == m.slope["e1"] == 0.0


def test_metrics_linear_error():
    t = np.linspace(0, 10, 101)
    m = compute_metrics(_trace(t, 0.005 * t), 0.0)
    assert m.slope["e1"] == pytest.approx(0.005)
    assert m.sup["e1"] == pytest.approx(0.05)


def test_metrics_empty_window():
    t = np.linspace(0, 10, 11)
    with pytest.raises(ConfigError):
        compute_metrics(_trace(t, t), 20.0)


def test_report_lines_format():
    t = np.linspace(0, 10, 101)
    lines = compute_metrics(_trace(t, np.sin(t)), 1.0).lines()
    keys = [ln.split(" = ")[0] for ln in lines]
    assert keys[:2] == ["settle_time", "diverged"]
    assert "sup.e1" in keys and "slope.e1" in keys
    assert all(" = " in ln for ln in lines)


@pytest.mark.slow
def test_metrics_stable_under_decimation():
    trace, full = run_signal_tracking(experiment1_spec(horizon=60.0))
    for m in (2, 5, 10):
        dec = compute_metrics(trace.decimate(m), full.settle_time)
        for ch in ("e1", "e2", "e3"):
            assert dec.sup[ch] == pytest.approx(full.sup[ch], rel=0.02)
            assert dec.rmse[ch] == pytest.approx(full.rmse[ch], rel=0.02)
            assert dec.slope[ch] == pytest.approx(full.slope[ch], rel=0.02, abs=1e-6)
