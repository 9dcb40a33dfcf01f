"""Reference signals with exact integrals/derivatives, and seeded disturbances.

Channels are addressed by name or by derivative order relative to the signal:

    double_integral (-2), integral (-1), value (0), derivative (1),
    second_derivative (2)

Integrals have zero lower limit at ``t = 0``.

Noise is counter-based: sample ``k`` of the Gaussian component is a pure
function of ``(seed, k)`` (Philox-4x64 keyed by the seed, two 64-bit words per
sample, Box-Muller cosine branch), so evaluation order and concurrency do not
change any value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ConfigError

CHANNELS = {
    "double_integral": -2,
    "integral": -1,
    "value": 0,
    "derivative": 1,
    "second_derivative": 2,
}

NOISE_GENERATOR = "philox4x64(key=seed) words[2k:2k+2] -> box-muller cos branch"

# grid times within this relative distance of a sample instant or pulse edge
# are snapped onto it, so k*dt rounding cannot move a point across a boundary
_SNAP = 1e-9


def _order(channel):
    if isinstance(channel, str):
        try:
            return CHANNELS[channel]
        except KeyError:
            raise ConfigError(f"unknown signal channel {channel!r}; choose from {sorted(CHANNELS)}") from None
    order = int(channel)
    if order not in CHANNELS.values():
        raise ConfigError(f"signal channel order {order} unavailable (supported: -2..2)")
    return order


@dataclass(frozen=True)
class Cosine:
    omega: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.omega) or self.omega == 0.0:
            raise ConfigError("cosine frequency must be finite and non-zero (use Constant for omega = 0)")

    def channel(self, t, order):
        A, w = self.amplitude, self.omega
        wt = w * t
        if order == -2:
            return A * (1.0 - np.cos(wt)) / w**2
        if order == -1:
            return A * np.sin(wt) / w
        if order == 0:
            return A * np.cos(wt)
        if order == 1:
            return -A * w * np.sin(wt)
        return -A * w**2 * np.cos(wt)

    def flatten(self):
        return [(self.amplitude, self.omega)], np.zeros(1)


@dataclass(frozen=True)
class Polynomial:
    """``sum_j coeffs[j] * t**j`` (ascending powers)."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise ConfigError("polynomial needs at least one coefficient")

    def table_row(self, order):
        c = np.asarray(self.coeffs)
        if order < 0:
            return P.polyint(c, -order)
        if order > 0:
            return P.polyder(c, order)
        return c

    def channel(self, t, order):
        return P.polyval(t, self.table_row(order))

    def flatten(self):
        return [], np.asarray(self.coeffs)


@dataclass(frozen=True)
class Constant:
    value: float

    def channel(self, t, order):
        return Polynomial((self.value,)).channel(t, order)

    def flatten(self):
        return [], np.array([float(self.value)])


@dataclass(frozen=True)
class Sum:
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def channel(self, t, order):
        total = 0.0
        for term in self.terms:
            total = total + term.channel(t, order)
        return total

    def flatten(self):
        cos_terms = []
        poly = np.zeros(1)
        for term in self.terms:
            c, p = term.flatten()
            cos_terms.extend(c)
            poly = P.polyadd(poly, p)
        return cos_terms, poly


def eval_signal(spec, t, channel="value"):
    """Exact value of ``channel`` of ``spec`` at time(s) ``t``."""
    order = _order(channel)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ConfigError("signals are defined for t >= 0")
    out = spec.channel(t_arr, order)
    out = np.broadcast_to(np.asarray(out, dtype=float), t_arr.shape)
    if out.ndim == 0:
        return float(out)
    return np.array(out)


def flatten(spec):
    """Kernel representation ``(amps, omegas, poly_table)`` of a signal.

    ``poly_table[order + 2]`` holds the polynomial part at derivative order
    ``order`` (zero-padded to a common width).
    """
    cos_terms, poly = spec.flatten()
    amps = np.array([a for a, _ in cos_terms], dtype=float)
    omegas = np.array([w for _, w in cos_terms], dtype=float)
    base = Polynomial(tuple(poly))
    rows = [base.table_row(order) for order in range(-2, 3)]
    width = max(len(r) for r in rows)
    table = np.zeros((5, width))
    for i, r in enumerate(rows):
        table[i, : len(r)] = r
    return amps, omegas, table


def signal_from_dict(doc):
    kind = str(doc.get("type", "")).lower()
    if kind == "cosine":
        return Cosine(omega=float(doc.get("omega", 1.0)), amplitude=float(doc.get("amplitude", 1.0)))
    if kind == "constant":
        return Constant(float(doc["value"]))
    if kind == "polynomial":
        return Polynomial(tuple(doc["coeffs"]))
    if kind == "sum":
        return Sum(tuple(signal_from_dict(d) for d in doc["terms"]))
    raise ConfigError(f"unknown signal type {doc.get('type')!r}")


def signal_to_dict(spec):
    if isinstance(spec, Cosine):
        return {"type": "cosine", "omega": spec.omega, "amplitude": spec.amplitude}
    if isinstance(spec, Constant):
        return {"type": "constant", "value": spec.value}
    if isinstance(spec, Polynomial):
        return {"type": "polynomial", "coeffs": list(spec.coeffs)}
    if isinstance(spec, Sum):
        return {"type": "sum", "terms": [signal_to_dict(s) for s in spec.terms]}
    raise TypeError(f"not a signal spec: {spec!r}")


# -- noise --------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian samples (zero-order hold at ``sample_rate``) plus a pulse train.

    The pulse equals ``pulse_amplitude`` while ``(t - phase) mod period`` is below
    ``pulse_width_fraction * period``; the long-run mean of the noise is
    therefore ``gaussian_mean + pulse_amplitude * pulse_width_fraction``.
    """

    gaussian_variance: float = 0.01
    gaussian_mean: float = 0.0
    pulse_amplitude: float = 0.5
    pulse_period: float = 1.0
    pulse_width_fraction: float = 0.01
    pulse_phase: float = 0.0
    sample_rate: float = 1000.0
    seed: int = 0

    def __post_init__(self):
        problems = []
        if not self.gaussian_variance >= 0:
            problems.append(f"gaussian_variance must be >= 0, got {self.gaussian_variance}")
        if not self.pulse_period > 0:
            problems.append(f"pulse_period must be > 0, got {self.pulse_period}")
        if not 0 < self.pulse_width_fraction <= 1:
            problems.append(f"pulse_width_fraction must lie in (0,1], got {self.pulse_width_fraction}")
        if not self.sample_rate > 0:
            problems.append(f"sample_rate must be > 0, got {self.sample_rate}")
        if int(self.seed) != self.seed:
            problems.append(f"seed must be an integer, got {self.seed!r}")
        if problems:
            raise ConfigError(problems)
        object.__setattr__(self, "seed", int(self.seed) & 0xFFFFFFFFFFFFFFFF)

    @property
    def mean(self):
        return self.gaussian_mean + self.pulse_amplitude * self.pulse_width_fraction

    def to_dict(self):
        return {
            "gaussian_variance": self.gaussian_variance,
            "gaussian_mean": self.gaussian_mean,
            "pulse_amplitude": self.pulse_amplitude,
            "pulse_period": self.pulse_period,
            "pulse_width_fraction": self.pulse_width_fraction,
            "pulse_phase": self.pulse_phase,
            "sample_rate": self.sample_rate,
            "seed": self.seed,
        }


def _snap_floor(x):
    r = np.round(x)
    close = np.abs(x - r) <= _SNAP * np.maximum(1.0, np.abs(x))
    return np.where(close, r, np.floor(x))


def standard_normals(seed, start, count):
    """Standard normal samples with indices ``start .. start+count-1``."""
    if count <= 0:
        return np.zeros(0)
    first_word = 2 * int(start)
    bitgen = np.random.Philox(key=int(seed))
    bitgen.advance(first_word // 4)
    skip = first_word % 4
    words = bitgen.random_raw(skip + 2 * int(count))[skip:]
    w1 = words[0::2]
    w2 = words[1::2]
    u1 = ((w1 >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53  # (0, 1]
    u2 = (w2 >> np.uint64(11)).astype(np.float64) * 2.0**-53  # [0, 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def sample_index(spec, t):
    return _snap_floor(np.asarray(t, dtype=float) * spec.sample_rate).astype(np.int64)


def gaussian_component(spec, t):
    t_arr = np.asarray(t, dtype=float)
    if spec.gaussian_variance == 0.0:
        return np.full(t_arr.shape, float(spec.gaussian_mean))
    idx = sample_index(spec, t_arr)
    if idx.size == 0:
        return np.zeros(t_arr.shape)
    lo, hi = int(idx.min()), int(idx.max())
    if lo < 0:
        raise ConfigError("noise is defined for t >= 0")
    z = standard_normals(spec.seed, lo, hi - lo + 1)[idx - lo]
    return spec.gaussian_mean + np.sqrt(spec.gaussian_variance) * z


def pulse_component(spec, t):
    if spec.pulse_amplitude == 0.0:
        return np.zeros(np.shape(t))
    pos = (np.asarray(t, dtype=float) - spec.pulse_phase) / spec.pulse_period
    frac = pos - _snap_floor(pos)
    on = frac < spec.pulse_width_fraction - _SNAP
    return np.where(on, spec.pulse_amplitude, 0.0)


def sample_noise(spec, t):
    """Noise value(s) at time(s) ``t`` (scalar in, float out)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ConfigError("noise is defined for t >= 0")
    out = gaussian_component(spec, t_arr) + pulse_component(spec, t_arr)
    if out.ndim == 0:
        return float(out)
    return out


def noise_from_dict(doc):
    known = set(NoiseSpec.__dataclass_fields__)
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown noise fields: {sorted(unknown)}")
    return NoiseSpec(**doc)
