"""Integral-derivative observer: configuration, validation and dynamics.

The observer is a chain of integrators ``dx_i/dt = x_{i+1}`` closed by

    eps^(n+1) dx_n/dt = - sum_{i != p} k_i |eps^i x_i|^a_i sign(x_i)
                        - k_p |x_p - a(t)|^a_p sign(x_p - a(t))

State ``x_p`` tracks the measured signal ``a``; the channels below ``p`` are
its successive integrals and the channels above ``p`` its derivatives.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from . import kernels
from .errors import ConfigError
from .stability import (
    FEASIBLE_PAIRS,
    alpha_chain,
    char_poly,
    lemma1_feasible,
    power_sign,
    routh_hurwitz,
)


class Variant(enum.Enum):
    """The four admissible observer layouts, tagged by (n, p)."""

    FOLD_INTEGRAL = "fold_integral"
    DERIV_INTEGRAL = "deriv_integral"
    DOUBLE_INTEGRAL = "double_integral"
    DERIV_DOUBLE_INTEGRAL = "deriv_double_integral"

    @property
    def order(self):
        return _VARIANT_SHAPE[self]

    @classmethod
    def from_shape(cls, n, p):
        for v, shape in _VARIANT_SHAPE.items():
            if shape == (n, p):
                return v
        return None


_VARIANT_SHAPE = {
    Variant.FOLD_INTEGRAL: (2, 2),
    Variant.DERIV_INTEGRAL: (3, 2),
    Variant.DOUBLE_INTEGRAL: (3, 3),
    Variant.DERIV_DOUBLE_INTEGRAL: (4, 3),
}


def channel_label(i, p):
    """Semantic label of 1-based channel ``i`` when ``x_p`` tracks ``a``."""
    order = i - p
    if order == 0:
        return "a"
    if order == -1:
        return "∫a"
    if order == -2:
        return "∬a"
    if order < 0:
        return f"∫^{-order}a"
    if order == 1:
        return "ȧ"
    if order == 2:
        return "ä"
    return f"a^({order})"


@dataclass(frozen=True)
class ObserverConfig:
    """Observer parameters.

    Construction only normalises types; call :func:`validate` (or
    :func:`check`) to test the stability conditions.
    """

    n: int
    p: int
    gains: tuple
    epsilon: float
    alpha_n: float
    initial_state: tuple = None
    variant: Variant = None

    def __post_init__(self):
        object.__setattr__(self, "gains", tuple(float(k) for k in self.gains))
        init = self.initial_state
        if init is None:
            init = (0.0,) * int(self.n)
        object.__setattr__(self, "initial_state", tuple(float(v) for v in init))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "alpha_n", float(self.alpha_n))
        if self.variant is not None and not isinstance(self.variant, Variant):
            object.__setattr__(self, "variant", Variant(self.variant))

    @cached_property
    def chain(self):
        return alpha_chain(self.n, self.alpha_n)

    @property
    def alphas(self):
        return self.chain.alphas

    @property
    def channel_labels(self):
        return tuple(channel_label(i, self.p) for i in range(1, self.n + 1))

    @property
    def channel_orders(self):
        """Derivative order of each channel relative to ``a`` (negative = integral)."""
        return tuple(i - self.p for i in range(1, self.n + 1))

    @property
    def suggested_max_dt(self):
        """Step-size heuristic ``eps^(n+1) / 10`` for explicit fixed-step schemes."""
        return self.epsilon ** (self.n + 1) / 10.0

    def with_epsilon(self, epsilon):
        return replace(self, epsilon=epsilon)

    def kernel_params(self):
        return (
            self.epsilon,
            np.asarray(self.gains, dtype=float),
            np.asarray(self.alphas, dtype=float),
            int(self.p),
        )

    def to_dict(self):
        return {
            "variant": self.variant.value if self.variant else None,
            "n": self.n,
            "p": self.p,
            "gains": list(self.gains),
            "epsilon": self.epsilon,
            "alpha_n": self.alpha_n,
            "initial_state": list(self.initial_state),
        }


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.message}"


def gain_inequalities(n, p, gains, epsilon, alphas):
    """Sufficient gain conditions for each feasible layout.

    Returns a list of ``(description, lhs, rhs)`` with the requirement
    ``lhs > rhs``.  Empty for (2, 2), where positivity is enough.
    """
    k = (None,) + tuple(gains)  # 1-based
    if (n, p) == (3, 2):
        thr = epsilon ** (2 * alphas[1]) * k[1] / k[3]
        return [("k2 > eps^(2 a2) k1/k3", k[2], thr)]
    if (n, p) == (3, 3):
        thr = epsilon ** (3 * alphas[2]) * k[1] / k[3]
        return [("k2 > eps^(3 a3) k1/k3", k[2], thr)]
    if (n, p) == (4, 3):
        s = epsilon ** (3 * alphas[2])
        return [
            ("k3 > eps^(3 a3) k2/k4", k[3], s * k[2] / k[4]),
            ("k2 > eps^(3 a3) (k4^2 k1 + k2^2)/(k4 k3)", k[2], s * (k[4] ** 2 * k[1] + k[2] ** 2) / (k[4] * k[3])),
        ]
    return []


def check(config):
    """List every violated condition of ``config`` (empty when valid)."""
    diags = []
    n, p = config.n, config.p
    if int(n) != n or n < 2:
        return [Diagnostic("order", f"order n must be an integer >= 2, got {n!r}")]
    if not 2 <= p <= n:
        diags.append(Diagnostic("slot", f"measurement slot p must lie in 2..{n}, got {p}"))
    elif not lemma1_feasible(n, p):
        pairs = ", ".join(str(pr) for pr in sorted(FEASIBLE_PAIRS))
        diags.append(
            Diagnostic(
                "infeasible",
                f"infeasible (n,p)=({n},{p}): the scaled characteristic polynomial cannot stay "
                f"Hurwitz for every eps in (0,1); feasible pairs are {pairs}",
            )
        )
    if config.variant is not None and config.variant.order != (n, p):
        diags.append(
            Diagnostic("variant", f"variant {config.variant.value} requires (n,p)={config.variant.order}, got ({n},{p})")
        )
    shape_ok = True
    if len(config.gains) != n:
        diags.append(Diagnostic("shape", f"expected {n} gains, got {len(config.gains)}"))
        shape_ok = False
    if len(config.initial_state) != n:
        diags.append(Diagnostic("shape", f"expected {n} initial states, got {len(config.initial_state)}"))
    if not all(np.isfinite(config.initial_state)):
        diags.append(Diagnostic("initial_state", "initial state must be finite"))
    for i, kv in enumerate(config.gains, start=1):
        if not (np.isfinite(kv) and kv > 0.0):
            diags.append(Diagnostic("gain", f"gain k{i} must be > 0, got {kv}"))
    eps = config.epsilon
    eps_ok = 0.0 < eps < 1.0
    if not eps_ok:
        diags.append(Diagnostic("epsilon", f"epsilon must lie in (0,1), got {eps}"))
    alpha_ok = 0.0 < config.alpha_n <= 1.0
    if not alpha_ok:
        diags.append(Diagnostic("alpha", f"alpha_n must lie in (0,1], got {config.alpha_n}"))

    if shape_ok and eps_ok and alpha_ok and 2 <= p <= n and all(kv > 0 for kv in config.gains):
        alphas = config.alphas
        for desc, lhs, rhs in gain_inequalities(n, p, config.gains, eps, alphas):
            if not lhs > rhs:
                diags.append(Diagnostic("gain_inequality", f"{desc} violated: {lhs:.6g} <= {rhs:.6g}"))
        table = routh_hurwitz(char_poly(config.gains, p, eps, alphas[p - 1]))
        if not table.is_hurwitz:
            diags.append(
                Diagnostic(
                    "not_hurwitz",
                    f"characteristic polynomial {list(table.coefficients)} is {table.verdict}",
                )
            )
    return diags


def validate(config):
    """Return ``config`` if it satisfies every condition, else raise.

    Raises:
        ConfigError: carrying the complete list of diagnostics.
    """
    diags = check(config)
    if diags:
        raise ConfigError(diags)
    return config


def make_variant(tag, gains, epsilon, alpha_n, initial_state=None):
    """Validated configuration for one of the four named observer layouts."""
    tag = Variant(tag)
    n, p = tag.order
    cfg = ObserverConfig(
        n=n, p=p, gains=gains, epsilon=epsilon, alpha_n=alpha_n, initial_state=initial_state, variant=tag
    )
    return validate(cfg)


def observer_rhs(config, state, measurement):
    """Time derivative of the observer state for a measured value ``a``.

    Pure function; the configuration is not re-validated here.
    """
    x = np.asarray(state, dtype=float)
    n, p, eps = config.n, config.p, config.epsilon
    alphas = config.alphas
    dx = np.empty(n)
    dx[:-1] = x[1:]
    acc = 0.0
    for i in range(1, n + 1):
        if i == p:
            acc -= config.gains[i - 1] * power_sign(x[i - 1] - measurement, alphas[i - 1])
        else:
            acc -= config.gains[i - 1] * power_sign(eps**i * x[i - 1], alphas[i - 1])
    dx[-1] = acc / eps ** (n + 1)
    return dx


def fast_rhs(config, state, measurement):
    """Compiled counterpart of :func:`observer_rhs` (same arithmetic)."""
    x = np.asarray(state, dtype=float)
    out = np.empty_like(x)
    eps, gains, alphas, p = config.kernel_params()
    kernels.observer_deriv(x, float(measurement), eps, gains, alphas, p, out)
    return out
