"""Scalar nonlinearities, exponent chains and Routh-Hurwitz analysis.

The observer's correction terms all use the power-sign function
``|x|**alpha * sign(x)``; its exponents come from a chain alpha_1..alpha_n
fixed by the terminal exponent alpha_n.  Whether a gain/epsilon combination
is admissible is decided on a characteristic polynomial with a Routh table.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

#: Pivots with magnitude below this fraction of the largest coefficient are singular.
SINGULAR_RTOL = 1e-12

#: (n, p) pairs for which the scaled characteristic polynomial can stay Hurwitz
#: for every epsilon in (0, 1) with bounded gains.
FEASIBLE_PAIRS = frozenset({(2, 2), (3, 2), (3, 3), (4, 3)})


def power_sign(x, alpha):
    """Return ``|x|**alpha * sign(x)``.

    Works on scalars and arrays (``alpha`` broadcasts against ``x``); scalar
    inputs give a Python float.  The value at ``x == 0`` is exactly zero for
    every admissible ``alpha``.

    Raises:
        ConfigError: if any ``alpha`` is not in (0, 1].
    """
    a = np.asarray(alpha, dtype=float)
    if not np.all((a > 0.0) & (a <= 1.0)):
        raise ConfigError(f"power_sign exponent must lie in (0, 1], got {alpha!r}")
    arr = np.asarray(x, dtype=float)
    out = np.sign(arr) * np.abs(arr) ** alpha
    if out.ndim == 0:
        return float(out)
    return out


def holder_bound(x, y, alpha):
    """Upper bound ``2**(1-alpha) * |x-y|**alpha`` on ``|power_sign(x) - power_sign(y)|``."""
    return 2.0 ** (1.0 - alpha) * np.abs(np.asarray(x, float) - np.asarray(y, float)) ** alpha


@dataclass(frozen=True)
class ExponentChain:
    """Exponents alpha_1..alpha_n generated from a terminal exponent alpha_n."""

    n: int
    alphas: tuple

    def __getitem__(self, i):
        """1-based access, ``chain[i] == alpha_i``."""
        if not 1 <= i <= self.n:
            raise IndexError(f"exponent index {i} outside 1..{self.n}")
        return self.alphas[i - 1]

    @property
    def alpha_n(self):
        return self.alphas[-1]

    def recursive(self):
        """Recompute the chain downward from alpha_{n+1} = 1 with the recursion
        ``alpha_{i-1} = alpha_i * alpha_{i+1} / (2 alpha_{i+1} - alpha_i)``."""
        return _recursive_chain(self.n, self.alpha_n)


def _closed_form_chain(n, alpha_n):
    return tuple(alpha_n / ((n - i + 1) - (n - i) * alpha_n) for i in range(1, n + 1))


def _recursive_chain(n, alpha_n):
    chain = [0.0] * (n + 2)
    chain[n + 1] = 1.0
    chain[n] = alpha_n
    for i in range(n, 1, -1):
        denom = 2.0 * chain[i + 1] - chain[i]
        if denom <= 0.0:
            raise RuntimeError(
                f"exponent recursion hit non-positive denominator at i={i} (alpha_n={alpha_n})"
            )
        chain[i - 1] = chain[i] * chain[i + 1] / denom
    return tuple(chain[1 : n + 1])


def alpha_chain(n, alpha_n):
    """Build the exponent chain for an order-``n`` observer.

    Uses the closed form ``alpha_i = alpha_n / ((n-i+1) - (n-i) alpha_n)`` and
    cross-checks it against the downward recursion to 1e-12 relative.

    Args:
        n: observer order, at least 2.
        alpha_n: terminal exponent in (0, 1].

    Returns:
        ExponentChain with ``alphas[i-1] == alpha_i``.
    """
    if int(n) != n or n < 2:
        raise ConfigError(f"observer order n must be an integer >= 2, got {n!r}")
    if not 0.0 < alpha_n <= 1.0:
        raise ConfigError(f"alpha_n must lie in (0, 1], got {alpha_n!r}")
    n = int(n)
    closed = _closed_form_chain(n, float(alpha_n))
    rec = _recursive_chain(n, float(alpha_n))
    for a, b in zip(closed, rec):
        if abs(a - b) > 1e-12 * abs(a):
            raise RuntimeError(f"exponent chain mismatch: closed form {closed} vs recursion {rec}")
    return ExponentChain(n=n, alphas=closed)


class Verdict(enum.Enum):
    HURWITZ = "Hurwitz"
    NOT_HURWITZ = "NotHurwitz"
    SINGULAR = "Singular"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class RouthTable:
    """First column of a Routh array and the stability verdict.

    ``first_column`` has ``degree + 1`` entries; entries after a singular pivot
    cannot be formed and are NaN.
    """

    degree: int
    coefficients: tuple
    first_column: tuple
    rows: tuple
    verdict: Verdict

    @property
    def is_hurwitz(self):
        return self.verdict is Verdict.HURWITZ

    def format(self):
        lines = []
        for k, row in enumerate(self.rows):
            cells = "  ".join(f"{v: .10g}" for v in row)
            lines.append(f"s^{self.degree - k:<2d} | {cells}")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)


def routh_hurwitz(coefficients):
    """Routh array of a real polynomial given in descending powers.

    A pivot whose magnitude is below ``SINGULAR_RTOL * max|coefficient|`` stops
    the construction.  The verdict is then ``NotHurwitz`` if a negative
    coefficient or first-column entry has already been seen, else ``Singular``;
    no epsilon substitution is attempted, so borderline polynomials are never
    reported Hurwitz.

    Raises:
        ConfigError: degree < 1 or non-positive leading coefficient.
    """
    coeffs = [float(c) for c in coefficients]
    if len(coeffs) < 2:
        raise ConfigError("polynomial degree must be at least 1")
    if not coeffs[0] > 0.0:
        raise ConfigError(f"leading coefficient must be positive, got {coeffs[0]!r}")
    if not all(np.isfinite(coeffs)):
        raise ConfigError("polynomial coefficients must be finite")
    degree = len(coeffs) - 1
    tol = SINGULAR_RTOL * max(abs(c) for c in coeffs)
    width = degree // 2 + 1

    def pad(row):
        return list(row) + [0.0] * (width - len(row))

    rows = [pad(coeffs[0::2]), pad(coeffs[1::2])]
    while len(rows) < degree + 1:
        upper, lower = rows[-2], rows[-1]
        pivot = lower[0]
        if abs(pivot) < tol:
            break
        new = [(pivot * upper[j + 1] - upper[0] * lower[j + 1]) / pivot for j in range(width - 1)]
        rows.append(pad(new))

    first = [r[0] for r in rows]
    # a negative coefficient or a sign change ahead of a vanishing pivot
    # already proves a right-half-plane root
    decided_unstable = any(c < -tol for c in coeffs) or any(v < -tol for v in first)
    if decided_unstable:
        verdict = Verdict.NOT_HURWITZ
        cut = next((k for k, v in enumerate(first) if abs(v) < tol), None)
        if cut is not None:
            first = first[: cut + 1] + [float("nan")] * (degree - cut)
            rows = rows[: cut + 1]
    elif len(rows) < degree + 1 or any(abs(v) < tol for v in first):
        verdict = Verdict.SINGULAR
        # everything after the first singular pivot is undefined
        cut = next((k for k, v in enumerate(first) if abs(v) < tol), len(first))
        first = first[: cut + 1] + [float("nan")] * (degree - cut)
        rows = rows[: cut + 1]
    elif all(v > 0.0 for v in first):
        verdict = Verdict.HURWITZ
    else:
        verdict = Verdict.NOT_HURWITZ
    return RouthTable(
        degree=degree,
        coefficients=tuple(coeffs),
        first_column=tuple(first),
        rows=tuple(tuple(r) for r in rows),
        verdict=verdict,
    )


def char_poly(gains, p, epsilon, alpha_p):
    """Scaled characteristic polynomial, descending powers.

    ``s^n + k_n s^(n-1) + ... + (k_p / eps^(p alpha_p)) s^(p-1) + ... + k_1``
    where ``gains = (k_1, ..., k_n)``.
    """
    gains = [float(k) for k in gains]
    n = len(gains)
    if not 1 <= p <= n:
        raise ConfigError(f"measurement slot p={p} outside 1..{n}")
    coeffs = [1.0] + gains[::-1]
    coeffs[n - p + 1] = gains[p - 1] / epsilon ** (p * alpha_p)
    return coeffs


def observer_char_poly(config):
    """Characteristic polynomial of an observer configuration (any object with
    ``n``, ``p``, ``gains``, ``epsilon`` and ``alpha_n`` attributes)."""
    chain = alpha_chain(config.n, config.alpha_n)
    return char_poly(config.gains, config.p, config.epsilon, chain[config.p])


def lemma1_feasible(n, p):
    """True when (n, p) is one of (2,2), (3,2), (3,3), (4,3).

    Only these pairs keep the scaled polynomial Hurwitz for every epsilon in
    (0, 1) with bounded positive gains; n >= 5 never does.
    """
    if n < 2:
        raise ConfigError(f"order n must be >= 2, got {n}")
    if not 2 <= p <= n:
        raise ConfigError(f"measurement slot p must lie in 2..{n}, got {p}")
    return (int(n), int(p)) in FEASIBLE_PAIRS

