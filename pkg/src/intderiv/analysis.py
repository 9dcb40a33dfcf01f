"""Classical quadrature baselines and trace metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


def _check_increasing(t):
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ConfigError("times must be a non-empty 1-D sequence")
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise ConfigError("times must be strictly increasing")
    return t


def cumulative_trapezoid(t, y):
    """Running trapezoid integral of samples ``y(t)``, starting at 0."""
    t = _check_increasing(t)
    y = np.asarray(y, dtype=float)
    if y.shape != t.shape:
        raise ConfigError("t and y must have the same length")
    out = np.zeros_like(y)
    if t.size > 1:
        out[1:] = np.cumsum(0.5 * np.diff(t) * (y[1:] + y[:-1]))
    return out


def cumulative_simpson(t, y):
    """Running composite Simpson integral on a uniform grid.

    Even nodes carry the composite Simpson value over ``[t0, t_2m]``; an odd
    node adds one trapezoid panel to the preceding even node.
    """
    t = _check_increasing(t)
    y = np.asarray(y, dtype=float)
    if y.shape != t.shape:
        raise ConfigError("t and y must have the same length")
    out = np.zeros_like(y)
    if t.size < 2:
        return out
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        raise ConfigError("cumulative_simpson requires uniform spacing")
    h = h[0]
    pairs = (y[0:-2:2] + 4.0 * y[1:-1:2] + y[2::2]) * (h / 3.0)
    out[2::2] = np.cumsum(pairs)
    out[1::2] = out[0:-1:2] + 0.5 * h * (y[0:-1:2] + y[1::2])
    return out


def drift_fit(t, e):
    """Least-squares line through ``e(t)``: returns (slope, intercept, rms residual)."""
    t = np.asarray(t, dtype=float)
    e = np.asarray(e, dtype=float)
    if t.size < 2:
        return 0.0, float(e[0]) if e.size else 0.0, 0.0
    tm = t.mean()
    em = e.mean()
    tc = t - tm
    slope = float(np.dot(tc, e - em) / np.dot(tc, tc))
    intercept = float(em - slope * tm)
    resid = e - (intercept + slope * t)
    return slope, intercept, float(np.sqrt(np.mean(resid**2)))


@dataclass
class RunMetrics:
    """Windowed error statistics per channel (window ``t >= settle_time``)."""

    settle_time: float
    sup: dict = field(default_factory=dict)
    rmse: dict = field(default_factory=dict)
    slope: dict = field(default_factory=dict)
    residual: dict = field(default_factory=dict)
    diverged: bool = False
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        out = {"settle_time": self.settle_time, "diverged": int(self.diverged)}
        for name in self.sup:
            out[f"sup.{name}"] = self.sup[name]
            out[f"rmse.{name}"] = self.rmse[name]
            out[f"slope.{name}"] = self.slope[name]
            out[f"residual.{name}"] = self.residual[name]
        out.update(self.extra)
        return out

    def lines(self):
        """Flat ``key = value`` report, one metric per line."""
        return [f"{k} = {_fmt(v)}" for k, v in self.as_dict().items()]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def compute_metrics(trace, settle_time, diverged=False):
    """Sup error, RMSE and drift slope for every error channel of ``trace``.

    Raises:
        ConfigError: when no sample lies in the window ``t >= settle_time``.
    """
    mask = trace.times >= settle_time
    if not np.any(mask):
        raise ConfigError(f"empty analysis window: settle_time={settle_time} beyond trace end {trace.times[-1]}")
    t = trace.times[mask]
    m = RunMetrics(settle_time=float(settle_time), diverged=bool(diverged))
    for name, series in trace.error_channels().items():
        e = np.asarray(series)[mask]
        m.sup[name] = float(np.max(np.abs(e)))
        m.rmse[name] = float(np.sqrt(np.mean(e**2)))
        slope, _, resid = drift_fit(t, e)
        m.slope[name] = slope
        m.residual[name] = resid
    return m
