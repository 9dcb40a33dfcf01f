"""Scenario definitions and runners.

A scenario document is a JSON object (``schema_version`` 1)::

    {
      "schema_version": 1,
      "name": "experiment1",
      "scenario": "signal_tracking",      # | pid_closed_loop | drift_study | epsilon_sweep
      "observer": {"variant": "deriv_integral", "gains": [0.1, 2, 1],
                   "epsilon": 0.5, "alpha_n": 0.8, "initial_state": [0, 1, 0]},
      "signal": {"type": "cosine", "omega": 1, "amplitude": 1},
      "noise": null,                      # or a NoiseSpec mapping
      "scheme": {"method": "rk4", "dt": 0.001},
      "horizon": 100, "settle_time": 20, "record_every": 1,
      "pid": {"kp": -2, "ki": -1, "kd": -1},          # pid_closed_loop only
      "plant": {"z1": 0.5, "z2": -0.5},               # pid_closed_loop only
      "sweep": {"epsilons": [0.5, 0.25, 0.125]}       # epsilon_sweep only
    }

For ``pid_closed_loop`` the ``signal`` section is the reference trajectory
``z_d``; its integral, derivative and second derivative feed the controller.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import kernels
from .analysis import compute_metrics, cumulative_simpson, cumulative_trapezoid
from .errors import ConfigError
from .observer import ObserverConfig, Variant, check
from .ode import StateTrace, StepScheme, grid, simulate
from .signals import (
    NOISE_GENERATOR,
    Cosine,
    NoiseSpec,
    eval_signal,
    flatten,
    noise_from_dict,
    sample_noise,
    signal_from_dict,
    signal_to_dict,
)
from .stability import routh_hurwitz

SCHEMA_VERSION = 1
TAGS = ("signal_tracking", "pid_closed_loop", "drift_study", "epsilon_sweep")


@dataclass(frozen=True)
class PidGains:
    kp: float = -2.0
    ki: float = -1.0
    kd: float = -1.0

    def closed_loop_poly(self):
        """Ideal-error characteristic polynomial of ``w''' = K_I w + K_P w' + K_D w''``."""
        return [1.0, -self.kd, -self.kp, -self.ki]


@dataclass(frozen=True)
class PlantState:
    z1: float = 0.5
    z2: float = -0.5


@dataclass(frozen=True)
class ScenarioSpec:
    tag: str
    observer: ObserverConfig
    signal: object = field(default_factory=Cosine)
    noise: NoiseSpec = None
    scheme: StepScheme = field(default_factory=StepScheme)
    horizon: float = 100.0
    settle_time: float = 20.0
    record_every: int = 1
    pid: PidGains = field(default_factory=PidGains)
    plant: PlantState = field(default_factory=PlantState)
    sweep: tuple = ()
    name: str = "scenario"

    def to_dict(self):
        doc = {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "scenario": self.tag,
            "observer": self.observer.to_dict(),
            "signal": signal_to_dict(self.signal),
            "noise": None if self.noise is None else self.noise.to_dict(),
            "scheme": {"method": self.scheme.method, "dt": self.scheme.dt},
            "horizon": self.horizon,
            "settle_time": self.settle_time,
            "record_every": self.record_every,
        }
        if self.tag == "pid_closed_loop":
            doc["pid"] = {"kp": self.pid.kp, "ki": self.pid.ki, "kd": self.pid.kd}
            doc["plant"] = {"z1": self.plant.z1, "z2": self.plant.z2}
        if self.tag == "epsilon_sweep":
            doc["sweep"] = {"epsilons": list(self.sweep)}
        return doc


# -- parsing -------------------------------------------------------------------


def _observer_from_dict(doc, errors):
    try:
        variant = doc.get("variant")
        variant = Variant(variant) if variant else None
    except ValueError:
        errors.append(f"observer: unknown variant {doc.get('variant')!r}; choose from {[v.value for v in Variant]}")
        variant = None
    n = doc.get("n")
    p = doc.get("p")
    if variant is not None:
        vn, vp = variant.order
        n = vn if n is None else n
        p = vp if p is None else p
    if n is None or p is None:
        errors.append("observer: give either a variant or both n and p")
        return None
    try:
        return ObserverConfig(
            n=int(n),
            p=int(p),
            gains=tuple(doc["gains"]),
            epsilon=float(doc.get("epsilon", 0.5)),
            alpha_n=float(doc["alpha_n"]),
            initial_state=doc.get("initial_state"),
            variant=variant,
        )
    except KeyError as exc:
        errors.append(f"observer: missing field {exc.args[0]!r}")
    except (TypeError, ValueError) as exc:
        errors.append(f"observer: {exc}")
    return None


def _section(doc, key, fn, errors, default=None):
    if key not in doc or doc[key] is None:
        return default
    try:
        return fn(doc[key])
    except ConfigError as exc:
        errors.extend(f"{key}: {d}" for d in exc.diagnostics)
    except (KeyError, TypeError, ValueError) as exc:
        errors.append(f"{key}: {exc}")
    return default


def parse_scenario(doc):
    """Build and validate a :class:`ScenarioSpec` from a document mapping.

    Raises:
        ConfigError: listing every parse and validation problem found.
    """
    errors = []
    if not isinstance(doc, dict):
        raise ConfigError("scenario document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        errors.append(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    tag = doc.get("scenario")
    if tag not in TAGS:
        errors.append(f"scenario must be one of {list(TAGS)}, got {tag!r}")

    obs_doc = doc.get("observer")
    observer = None
    if not isinstance(obs_doc, dict):
        errors.append("observer section is required")
    else:
        observer = _observer_from_dict(obs_doc, errors)

    signal = _section(doc, "signal", signal_from_dict, errors, default=Cosine())
    noise = _section(doc, "noise", noise_from_dict, errors)
    scheme = _section(doc, "scheme", lambda d: StepScheme(**d), errors, default=StepScheme())
    pid = _section(doc, "pid", lambda d: PidGains(**d), errors, default=PidGains())
    plant = _section(doc, "plant", lambda d: PlantState(**d), errors, default=PlantState())
    sweep = _section(doc, "sweep", lambda d: tuple(float(e) for e in d["epsilons"]), errors, default=())

    horizon = doc.get("horizon", 100.0)
    settle = doc.get("settle_time", 20.0)
    record_every = doc.get("record_every", 1)
    try:
        horizon = float(horizon)
        settle = float(settle)
        if not horizon > settle:
            errors.append(f"horizon ({horizon}) must exceed settle_time ({settle})")
        if settle < 0:
            errors.append("settle_time must be >= 0")
    except (TypeError, ValueError):
        errors.append("horizon and settle_time must be numbers")
    if not (isinstance(record_every, int) and record_every >= 1):
        errors.append(f"record_every must be a positive integer, got {record_every!r}")
    known = {
        "schema_version", "name", "scenario", "observer", "signal", "noise", "scheme",
        "horizon", "settle_time", "record_every", "pid", "plant", "sweep",
    }
    extra = sorted(set(doc) - known)
    if extra:
        errors.append(f"unknown top-level fields: {extra}")

    if tag == "epsilon_sweep":
        if not sweep:
            errors.append("epsilon_sweep requires sweep.epsilons")
        elif any(not 0 < e < 1 for e in sweep) or any(b >= a for a, b in zip(sweep, sweep[1:])):
            errors.append(f"sweep epsilons must lie in (0,1) and be strictly decreasing, got {list(sweep)}")
        if noise is not None:
            errors.append("epsilon_sweep runs noise-free; remove the noise section")
        if observer is not None and sweep:
            observer = observer.with_epsilon(sweep[0])
    if observer is not None:
        errors.extend(f"observer: {d}" for d in check(observer))
        if tag == "pid_closed_loop" and (observer.n, observer.p) != (3, 2):
            errors.append("observer: pid_closed_loop needs the (n,p)=(3,2) layout (integral, value, derivative)")
    if observer is not None and signal is not None and tag != "pid_closed_loop":
        # refs must exist for every observer channel
        unavailable = [o for o in observer.channel_orders if o < -2 or o > 2]
        if unavailable:
            errors.append(f"signal: no closed form for channel orders {unavailable}")
    if scheme is not None and not errors:
        try:
            grid(0.0, horizon, scheme.dt)
        except ConfigError as exc:
            errors.extend(exc.diagnostics)

    if errors:
        raise ConfigError(errors)
    return ScenarioSpec(
        tag=tag,
        observer=observer,
        signal=signal,
        noise=noise,
        scheme=scheme,
        horizon=horizon,
        settle_time=settle,
        record_every=record_every,
        pid=pid,
        plant=plant,
        sweep=sweep,
        name=str(doc.get("name", "scenario")),
    )


def load_scenario(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_scenario(doc)


# -- reference set-ups -----------------------------------------------------------


def reference_noise(seed=0):
    """Gaussian (mean 0, variance 0.01) plus 0.5-amplitude, 1 s, 1 %-width pulses."""
    return NoiseSpec(seed=seed)


def experiment1_spec(noise=None, horizon=100.0, settle_time=20.0, dt=1e-3, record_every=1, epsilon=0.5):
    """Signal tracking of cos t with the (3,2) observer, eps=1/2, k=(0.1, 2, 1), alpha_3=0.8."""
    obs = ObserverConfig(
        n=3, p=2, gains=(0.1, 2.0, 1.0), epsilon=epsilon, alpha_n=0.8,
        initial_state=(0.0, 1.0, 0.0), variant=Variant.DERIV_INTEGRAL,
    )
    return ScenarioSpec(
        tag="signal_tracking", observer=obs, signal=Cosine(1.0, 1.0), noise=noise,
        scheme=StepScheme("rk4", dt), horizon=horizon, settle_time=settle_time,
        record_every=record_every, name="experiment1",
    )


def experiment2_spec(noise=None, horizon=60.0, settle_time=30.0, dt=1e-3):
    """PID tracking of z_d = cos t on a double integrator, eps=1/3, alpha_3=0.9."""
    obs = ObserverConfig(
        n=3, p=2, gains=(0.1, 2.0, 1.0), epsilon=1.0 / 3.0, alpha_n=0.9,
        initial_state=(0.0, 0.5, -0.5), variant=Variant.DERIV_INTEGRAL,
    )
    return ScenarioSpec(
        tag="pid_closed_loop", observer=obs, signal=Cosine(1.0, 1.0), noise=noise,
        scheme=StepScheme("rk4", dt), horizon=horizon, settle_time=settle_time,
        pid=PidGains(-2.0, -1.0, -1.0), plant=PlantState(0.5, -0.5), name="experiment2",
    )


# -- runners -----------------------------------------------------------------------


def _noise_column(spec, times):
    if spec.noise is None:
        return np.zeros_like(times)
    return sample_noise(spec.noise, times)


def _meta(spec, trace):
    trace.meta["scenario"] = spec.tag
    trace.meta["settle_time"] = spec.settle_time
    if spec.noise is not None:
        trace.meta["noise_generator"] = NOISE_GENERATOR
        trace.meta["noise_seed"] = spec.noise.seed


def run_signal_tracking(spec, simpson=False):
    """Observer driven by ``signal + noise``; refs are the exact signal channels.

    A trapezoid integral of the same measured samples is recorded as the
    ``baseline`` channel (``simpson=True`` adds a Simpson one) for drift comparison.

    Returns:
        (StateTrace, RunMetrics)
    """
    cfg = spec.observer
    scheme = spec.scheme
    n_steps, times = grid(0.0, spec.horizon, scheme.dt)
    noise = _noise_column(spec, times)
    amps, omegas, table = flatten(spec.signal)
    params = cfg.kernel_params() + (amps, omegas, table)
    trace = simulate(
        scheme, kernels.tracking_rhs, 0.0, spec.horizon, cfg.initial_state,
        inputs=noise, params=params, record_every=spec.record_every,
        max_dt=cfg.suggested_max_dt, hold_names=["noise"],
    )
    m = spec.record_every
    t = trace.times
    trace.refs = np.column_stack([eval_signal(spec.signal, t, o) for o in cfg.channel_orders])
    measured = eval_signal(spec.signal, times, "value") + noise
    trace.inputs = measured[::m]
    if -1 in cfg.channel_orders:
        truth_int = eval_signal(spec.signal, t, "integral")
        base = cumulative_trapezoid(times, measured)[::m]
        trace.extras["baseline"] = base
        trace.extras["err_baseline"] = base - truth_int
        if simpson:
            simp = cumulative_simpson(times, measured)[::m]
            trace.extras["simpson"] = simp
            trace.extras["err_simpson"] = simp - truth_int
    _meta(spec, trace)
    metrics = compute_metrics(trace, spec.settle_time)
    return trace, metrics


def run_pid_closed_loop(spec):
    """Co-simulate the double integrator, observer and observer-based PID law.

    The observer sees ``y = z1 + noise``; the control is recomputed once per
    step from the observer channels and held through the step.

    Returns:
        (StateTrace, RunMetrics); ``states`` are the observer channels, refs are
        ``(int z1, z1, z2)`` and the extras hold ``z1, z2, u`` and tracking errors.
    """
    cfg = spec.observer
    if (cfg.n, cfg.p) != (3, 2):
        raise ConfigError("pid_closed_loop needs the (n,p)=(3,2) observer layout")
    scheme = spec.scheme
    n_steps, times = grid(0.0, spec.horizon, scheme.dt)
    noise = _noise_column(spec, times)
    amps, omegas, table = flatten(spec.signal)
    pid = np.array([spec.pid.kp, spec.pid.ki, spec.pid.kd], dtype=float)
    params = cfg.kernel_params() + (pid, amps, omegas, table)
    x0 = [spec.plant.z1, spec.plant.z2, *cfg.initial_state, 0.0]
    raw = simulate(
        scheme, kernels.closed_loop_rhs, 0.0, spec.horizon, x0,
        inputs=noise, hold=kernels.closed_loop_hold, params=params,
        record_every=spec.record_every, max_dt=cfg.suggested_max_dt, hold_names=["noise", "u"],
    )
    t = raw.times
    s = raw.states
    z1, z2, zint = s[:, 0], s[:, 1], s[:, 2 + cfg.n]
    y = z1 + raw.extras["noise"]
    trace = StateTrace(
        times=t,
        states=s[:, 2 : 2 + cfg.n].copy(),
        refs=np.column_stack([zint, z1, z2]),
        inputs=y,
        meta=raw.meta,
    )
    base = cumulative_trapezoid(t, y)
    trace.extras.update(
        {
            "u": raw.extras["u"],
            "noise": raw.extras["noise"],
            "baseline": base,
            "err_baseline": base - zint,
            "z1": z1,
            "z2": z2,
            "err_z1": z1 - eval_signal(spec.signal, t, "value"),
            "err_z2": z2 - eval_signal(spec.signal, t, "derivative"),
        }
    )
    _meta(spec, trace)
    metrics = compute_metrics(trace, spec.settle_time)
    u = raw.extras["u"]
    table_cl = routh_hurwitz(spec.pid.closed_loop_poly())
    metrics.extra["max_abs_u"] = float(np.max(np.abs(u)))
    metrics.extra["closed_loop_poly"] = " ".join(f"{c:g}" for c in table_cl.coefficients)
    metrics.extra["closed_loop_verdict"] = str(table_cl.verdict)
    return trace, metrics


@dataclass
class DriftReport:
    observer_slope: float
    trapezoid_slope: float
    simpson_slope: float
    noise_mean: float
    empirical_noise_mean: float
    metrics: object = None

    @property
    def separation(self):
        if self.observer_slope == 0.0:
            return math.inf
        return abs(self.trapezoid_slope) / abs(self.observer_slope)

    def lines(self):
        rows = [
            ("drift.observer_e1_slope", self.observer_slope),
            ("drift.trapezoid_slope", self.trapezoid_slope),
            ("drift.simpson_slope", self.simpson_slope),
            ("drift.noise_mean_configured", self.noise_mean),
            ("drift.noise_mean_empirical", self.empirical_noise_mean),
            ("drift.separation", self.separation),
        ]
        return [f"{k} = {v:.17g}" for k, v in rows]


def run_drift_study(spec):
    """Observer integral channel versus trapezoid/Simpson on the same noisy samples.

    Returns:
        (StateTrace, DriftReport)
    """
    cfg = spec.observer
    if -1 not in cfg.channel_orders:
        raise ConfigError("drift study needs an observer with a 1-fold integral channel")
    trace, metrics = run_signal_tracking(spec, simpson=True)
    idx = cfg.channel_orders.index(-1) + 1
    name = f"e{idx}"
    noise = trace.extras["noise"]
    mask = trace.times >= spec.settle_time
    report = DriftReport(
        observer_slope=metrics.slope[name],
        trapezoid_slope=metrics.slope["err_baseline"],
        simpson_slope=metrics.slope["err_simpson"],
        noise_mean=0.0 if spec.noise is None else spec.noise.mean,
        empirical_noise_mean=float(np.mean(noise[mask])),
        metrics=metrics,
    )
    return trace, report


@dataclass
class SweepRow:
    epsilon: float
    dt: float
    diagnostics: list
    metrics: object = None
    trace: object = None


@dataclass
class SweepReport:
    rows: list

    def sup_series(self, channel):
        return [r.metrics.sup[channel] for r in self.rows if r.metrics is not None]

    def strictly_decreasing(self, channel):
        s = self.sup_series(channel)
        return all(b < a for a, b in zip(s, s[1:]))

    def reduction(self, channel):
        s = self.sup_series(channel)
        return s[0] / s[-1] if len(s) >= 2 and s[-1] > 0 else 1.0

    def lines(self):
        out = []
        channels = []
        for r in self.rows:
            if r.metrics is not None:
                channels = [c for c in r.metrics.sup if c[0] == "e" and c[1:].isdigit()]
                break
        for r in self.rows:
            key = f"sweep[eps={r.epsilon:g}]"
            if r.diagnostics:
                out.append(f"{key}.invalid = {'; '.join(r.diagnostics)}")
                continue
            out.append(f"{key}.dt = {r.dt:.17g}")
            for c in channels:
                out.append(f"{key}.sup.{c} = {r.metrics.sup[c]:.17g}")
        for c in channels:
            out.append(f"sweep.strictly_decreasing.{c} = {int(self.strictly_decreasing(c))}")
            out.append(f"sweep.reduction.{c} = {self.reduction(c):.17g}")
        return out


def _member_grid(horizon, dt_max):
    n = horizon / dt_max
    n = int(round(n)) if abs(n - round(n)) < 1e-9 * n else math.ceil(n)
    return horizon / n


def run_epsilon_sweep(spec, keep_traces=False, max_workers=None):
    """Run noise-free signal tracking for each epsilon of ``spec.sweep``.

    Each member uses ``dt = min(scheme.dt, eps^(n+1)/10)`` (rounded so the
    horizon is a whole number of steps) and records at roughly ``scheme.dt``
    spacing.  Members that fail validation are reported and skipped.
    """
    eps_list = spec.sweep or (spec.observer.epsilon,)
    jobs = []
    rows = []
    for eps in eps_list:
        cfg = spec.observer.with_epsilon(eps)
        diags = [str(d) for d in check(cfg)]
        dt = _member_grid(spec.horizon, min(spec.scheme.dt, cfg.suggested_max_dt))
        row = SweepRow(epsilon=eps, dt=dt, diagnostics=diags)
        rows.append(row)
        if not diags:
            every = max(1, int(round(spec.scheme.dt / dt)))
            member = replace(
                spec, tag="signal_tracking", observer=cfg, noise=None,
                scheme=StepScheme(spec.scheme.method, dt), record_every=every,
            )
            jobs.append((row, member))

    def work(job):
        row, member = job
        trace, metrics = run_signal_tracking(member)
        return row, trace, metrics

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(work, jobs))
    for row, trace, metrics in results:
        row.metrics = metrics
        if keep_traces:
            row.trace = trace
    return SweepReport(rows=rows)


def run_scenario(spec):
    """Dispatch on ``spec.tag``; returns (trace or None, report lines, extra object)."""
    if spec.tag == "signal_tracking":
        trace, metrics = run_signal_tracking(spec)
        return trace, metrics.lines(), metrics
    if spec.tag == "pid_closed_loop":
        trace, metrics = run_pid_closed_loop(spec)
        return trace, metrics.lines(), metrics
    if spec.tag == "drift_study":
        trace, report = run_drift_study(spec)
        return trace, report.metrics.lines() + report.lines(), report
    if spec.tag == "epsilon_sweep":
        report = run_epsilon_sweep(spec, keep_traces=True)
        return None, report.lines(), report
    raise ConfigError(f"unknown scenario tag {spec.tag!r}")


# -- output --------------------------------------------------------------------------


def _extra_order(names):
    head = [n for n in ("u", "baseline") if n in names]
    return head + sorted(n for n in names if n not in head)


def trace_columns(trace):
    """Column names and matrix for CSV emission."""
    n = trace.n
    cols = ["t"] + [f"x{i}" for i in range(1, n + 1)]
    data = [trace.times, *trace.states.T]
    if trace.refs is not None:
        cols += [f"ref{i}" for i in range(1, n + 1)] + [f"e{i}" for i in range(1, n + 1)]
        data += [*trace.refs.T, *trace.errors.T]
    if trace.inputs is not None:
        cols.append("input")
        data.append(trace.inputs)
    for name in _extra_order(list(trace.extras)):
        cols.append(name)
        data.append(trace.extras[name])
    return cols, np.column_stack(data)


def write_trace_csv(path, trace, report_lines=(), config=None):
    """CSV with ``#`` comment header (config echo + metrics), then a header row.

    Numbers carry 17 significant digits; output is byte-identical for
    identical inputs.
    """
    cols, mat = trace_columns(trace)
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n")
        if config is not None:
            fh.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        for key in sorted(trace.meta):
            fh.write(f"# meta.{key}: {trace.meta[key]}\n")
        for line in report_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(cols) + "\n")
        np.savetxt(fh, mat, fmt="%.17g", delimiter=",")
    return path


def write_report(path, report_lines):
    path = Path(path)
    path.write_text("".join(f"{line}\n" for line in report_lines))
    return path


def plot_trace(path, trace, labels=None):
    """One panel per state channel (estimate vs truth) and per error channel, as SVG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    errs = trace.error_channels()
    n_panels = trace.n + len(errs)
    fig, axes = plt.subplots(n_panels, 1, figsize=(8, 2.2 * n_panels), sharex=True)
    axes = np.atleast_1d(axes)
    for i in range(trace.n):
        ax = axes[i]
        lab = labels[i] if labels else f"x{i + 1}"
        ax.plot(trace.times, trace.states[:, i], lw=0.8, label=f"x{i + 1} ({lab})")
        if trace.refs is not None:
            ax.plot(trace.times, trace.refs[:, i], lw=0.8, ls="--", label="truth")
        ax.legend(loc="upper right", fontsize=7)
    for ax, (name, series) in zip(axes[trace.n :], errs.items()):
        ax.plot(trace.times, series, lw=0.8)
        ax.set_ylabel(name, fontsize=8)
    axes[-1].set_xlabel("t [s]")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(path)
