"""Deterministic fixed-step time integration with trace recording.

Two execution paths share one contract:

* plain Python callables are stepped by :func:`step` in a Python loop;
* ``numba.njit`` callables are handed to a compiled loop
  (:func:`intderiv.kernels.integrate`).

Right-hand sides have the signature ``rhs(t, x, u, params)`` where ``u`` is a
vector held constant over the step (zero-order hold of sampled inputs and of
anything computed by ``hold``).  Quantities that are analytic in ``t`` should
be evaluated inside ``rhs`` so they are seen at the stage times.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numba.core.registry import CPUDispatcher

from . import kernels
from .errors import ConfigError, IntegrationDiverged

METHODS = {"euler": kernels.EULER, "rk4": kernels.RK4}


@dataclass(frozen=True)
class StepScheme:
    method: str = "rk4"
    dt: float = 1e-3

    def __post_init__(self):
        m = str(self.method).lower()
        if m not in METHODS:
            raise ConfigError(f"unknown step method {self.method!r}; choose from {sorted(METHODS)}")
        object.__setattr__(self, "method", m)
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"step size dt must be finite and > 0, got {self.dt!r}")
        object.__setattr__(self, "dt", float(self.dt))


@dataclass
class StateTrace:
    """Time-indexed record of a simulation.

    Attributes:
        times: grid times, ``t0 + k * spacing``.
        states: array (len(times), n).
        refs: reference truth per state channel, same shape as ``states`` (or None).
        inputs: the measurement sample at each grid time (or None).
        extras: named auxiliary 1-D channels (control, baselines, plant states...).
            Names starting with ``err_`` are treated as error channels by the metrics.
        meta: free-form provenance (scheme, generator, decimation...).
    """

    times: np.ndarray
    states: np.ndarray
    refs: np.ndarray = None
    inputs: np.ndarray = None
    extras: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    @property
    def n(self):
        return self.states.shape[1]

    @property
    def errors(self):
        if self.refs is None:
            return None
        return self.states - self.refs

    def error_channels(self):
        """Mapping name -> error series: ``e1..en`` then every ``err_*`` extra."""
        out = {}
        errs = self.errors
        if errs is not None:
            for i in range(self.n):
                col = errs[:, i]
                if not np.all(np.isnan(col)):
                    out[f"e{i + 1}"] = col
        for name in sorted(self.extras):
            if name.startswith("err_"):
                out[name] = self.extras[name]
        return out

    def decimate(self, m):
        """Keep every ``m``-th point (output thinning only)."""
        m = int(m)
        if m < 1:
            raise ValueError("decimation factor must be >= 1")
        if m == 1:
            return self
        sl = slice(None, None, m)
        return StateTrace(
            times=self.times[sl],
            states=self.states[sl],
            refs=None if self.refs is None else self.refs[sl],
            inputs=None if self.inputs is None else self.inputs[sl],
            extras={k: v[sl] for k, v in self.extras.items()},
            meta={**self.meta, "decimation": self.meta.get("decimation", 1) * m},
        )


def _finite(x):
    return bool(np.all(np.isfinite(x)))


def step(scheme, rhs, t, state):
    """Advance ``state`` by one step of ``scheme`` for ``dx/dt = rhs(t, x)``.

    Raises:
        IntegrationDiverged: if the result has a non-finite component.
    """
    dt = scheme.dt
    x = np.asarray(state, dtype=float)
    if scheme.method == "rk4":
        k1 = np.asarray(rhs(t, x), dtype=float)
        k2 = np.asarray(rhs(t + 0.5 * dt, x + (0.5 * dt) * k1), dtype=float)
        k3 = np.asarray(rhs(t + 0.5 * dt, x + (0.5 * dt) * k2), dtype=float)
        k4 = np.asarray(rhs(t + dt, x + dt * k3), dtype=float)
        xn = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    else:
        xn = x + dt * np.asarray(rhs(t, x), dtype=float)
    if not _finite(xn):
        raise IntegrationDiverged(t + dt, xn)
    return xn


def grid(t0, t_end, dt):
    """Number of steps and grid times; ``t_end - t0`` must be a whole number of steps."""
    if not t_end > t0:
        raise ConfigError(f"t_end ({t_end}) must exceed t0 ({t0})")
    span = t_end - t0
    n_steps = int(round(span / dt))
    if n_steps < 1 or abs(n_steps * dt - span) > 1e-9 * max(1.0, span):
        raise ConfigError(f"horizon {span} is not an integer multiple of dt={dt}")
    times = t0 + np.arange(n_steps + 1) * dt
    return n_steps, times


def _python_hold(t, x, row, params):
    return np.array(row, dtype=float)


def simulate(
    scheme,
    rhs,
    t0,
    t_end,
    x0,
    inputs=None,
    hold=None,
    params=(),
    record_every=1,
    max_dt=None,
    hold_names=None,
):
    """Integrate on the uniform grid ``t0 + k*dt`` and record a trace.

    Args:
        scheme: StepScheme.
        rhs: ``rhs(t, x, u, params) -> dx``.  A ``numba.njit`` function selects
            the compiled loop (then ``hold`` must be compiled too, or None).
        t0, t_end: horizon; ``t_end - t0`` must be a multiple of ``scheme.dt``.
        x0: initial state.
        inputs: exogenous samples at grid times, either an array of shape
            (n_steps + 1, m) / (n_steps + 1,) or a list of samplers
            ``f(times) -> array`` evaluated on the grid.
        hold: ``hold(t, x, row, params) -> u`` computed once per step at its
            left endpoint; default passes ``row`` through.
        params: passed verbatim to ``rhs`` and ``hold``.
        record_every: record every m-th grid point (integration still uses every step).
        max_dt: advisory step bound; a larger ``dt`` only emits a warning.
        hold_names: names for the held columns stored in ``trace.extras``.

    Raises:
        IntegrationDiverged: with the partial trace attached.
    """
    dt = scheme.dt
    n_steps, times = grid(t0, t_end, dt)
    if max_dt is not None and dt > max_dt:
        warnings.warn(f"dt={dt} exceeds the suggested maximum {max_dt:.3g}; results may be inaccurate", stacklevel=2)
    x0 = np.array(x0, dtype=float)
    if x0.ndim != 1:
        raise ConfigError("initial state must be a 1-D vector")
    record_every = int(record_every)
    if record_every < 1:
        raise ConfigError("record_every must be >= 1")

    if inputs is None:
        in_arr = np.zeros((n_steps + 1, 0))
    elif callable(inputs) or (isinstance(inputs, (list, tuple)) and inputs and callable(inputs[0])):
        samplers = [inputs] if callable(inputs) else list(inputs)
        in_arr = np.column_stack([np.asarray(s(times), dtype=float) for s in samplers])
    else:
        in_arr = np.asarray(inputs, dtype=float)
        if in_arr.ndim == 1:
            in_arr = in_arr[:, None]
    if in_arr.shape[0] != n_steps + 1:
        raise ConfigError(f"inputs have {in_arr.shape[0]} rows, grid has {n_steps + 1} points")
    in_arr = np.ascontiguousarray(in_arr)

    compiled = isinstance(rhs, CPUDispatcher)
    if compiled:
        h = kernels.identity_hold if hold is None else hold
        states, held, n_rec, fail, last = kernels.integrate(
            rhs, h, METHODS[scheme.method], float(t0), dt, x0, in_arr, params, n_steps, record_every
        )
    else:
        h = _python_hold if hold is None else hold
        states, held, n_rec, fail, last = _integrate_py(
            rhs, h, scheme, float(t0), x0, in_arr, params, n_steps, record_every
        )

    rec_times = times[::record_every][:n_rec]
    trace = StateTrace(
        times=rec_times,
        states=states[:n_rec],
        meta={"method": scheme.method, "dt": dt, "record_every": record_every, "compiled": compiled},
    )
    names = hold_names or [f"u{j}" for j in range(held.shape[1])]
    for j, name in enumerate(names):
        trace.extras[name] = held[:n_rec, j]
    if fail >= 0:
        raise IntegrationDiverged(t0 + (fail + 1) * dt, last, trace)
    return trace


def _integrate_py(rhs, hold, scheme, t0, x0, inputs, params, n_steps, record_every):
    dt = scheme.dt
    n_rec = n_steps // record_every + 1
    u0 = np.asarray(hold(t0, x0, inputs[0], params), dtype=float)
    states = np.empty((n_rec, x0.size))
    held = np.empty((n_rec, u0.size))
    x = x0.copy()
    r = 0
    for k in range(n_steps):
        t = t0 + k * dt
        u = u0 if k == 0 else np.asarray(hold(t, x, inputs[k], params), dtype=float)
        if k % record_every == 0:
            states[r] = x
            held[r] = u
            r += 1
        try:
            x = step(scheme, lambda tt, xx: rhs(tt, xx, u, params), t, x)
        except IntegrationDiverged as exc:
            return states, held, r, k, exc.state
    if n_steps % record_every == 0:
        t = t0 + n_steps * dt
        states[r] = x
        held[r] = hold(t, x, inputs[n_steps], params)
        r += 1
    return states, held, r, -1, x
