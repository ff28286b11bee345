"""Edgeworth-type skewed densities built on a symmetric reference density.

For ``z = (x - theta)/sigma`` and ``xi > 0`` the density is::

    f(x) = sigma^-1 f1(z) * (1 + xi * phi(z) * (z**2 - kappa))   |z| <= z*
    f(x) = 0                                                     z < -z*
    f(x) = 2 sigma^-1 f1(z)                                      z > z*

where ``phi`` is the score of ``f1``, ``kappa = J/I`` and ``z*`` is where the
bracket first reaches zero on the left.  Negative ``xi`` mirrors the picture
about ``theta``.  The two perturbation terms have absolute value at most
``f1``, so the density is bounded by ``2 f1`` and a rejection sampler with
proposal ``f1`` and envelope constant 2 is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .densities import ReferenceDensity, parse_family
from .errors import XiTooLarge

__all__ = ["EdgeworthModel", "solve_z_star", "truncation_ratio"]

ENVELOPE = 2.0
VALIDITY_GRID = 10_000


def _bracket_gap(f1, xi_abs):
    kappa = f1.kappa

    def gap(u):
        return xi_abs * f1.score(u) * (u * u - kappa) - 1.0

    return gap


def solve_z_star(f1, xi):
    """Return ``|z*|`` for a nonzero skewness parameter ``xi``.

    ``|z*|`` is the smallest ``u > sqrt(kappa)`` with
    ``f1(u) = |xi| |f1'(u)| (u**2 - kappa)``.  Raises :class:`XiTooLarge`
    when ``xi`` is so large that the skewed density would go negative.
    """
    xi_abs = abs(float(xi))
    if xi_abs == 0.0:
        raise ValueError("z* is only defined for xi != 0")
    kappa = f1.kappa
    root_k = math.sqrt(kappa)

    # the positive-z half of the bracket must stay nonnegative on [0, sqrt(kappa)]
    u = np.linspace(0.0, root_k, VALIDITY_GRID)
    worst = np.min(1.0 - xi_abs * f1.score(u) * (kappa - u * u))
    if worst < 0.0:
        raise XiTooLarge(
            f"xi={xi} gives a negative density for {f1} (min bracket {worst:.3g})"
        )

    gap = _bracket_gap(f1, xi_abs)
    lo = root_k
    step = max(root_k, 1e-3) * 0.05
    hi = lo + step
    for _ in range(2000):
        if gap(hi) > 0.0:
            break
        lo, hi = hi, hi + step
        step *= 1.2
    else:
        raise XiTooLarge(f"no truncation point found for xi={xi} and {f1}")
    return optimize.brentq(gap, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                           maxiter=200)


def truncation_ratio(f1, xi, z_star, z):
    """Ratio ``f(z)/f1(z)`` of the standardized skewed density; lies in ``[0, 2]``."""
    z = np.asarray(z, dtype=float)
    if xi == 0.0:
        return np.ones_like(z)
    s = 1.0 if xi > 0 else -1.0
    w = s * z
    inner = 1.0 + abs(xi) * f1.score(w) * (w * w - f1.kappa)
    return np.where(w > z_star, 2.0, np.where(w < -z_star, 0.0, inner))


@dataclass(frozen=True)
class EdgeworthModel:
    """Skewed density with location ``theta``, scale ``sigma`` and skewness ``xi``."""

    f1: ReferenceDensity
    theta: float = 0.0
    sigma: float = 1.0
    xi: float = 0.0
    z_star: float = field(init=False)

    def __post_init__(self):
        if isinstance(self.f1, str):
            object.__setattr__(self, "f1", parse_family(self.f1))
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        for name in ("theta", "sigma", "xi"):
            object.__setattr__(self, name, float(getattr(self, name)))
        z_star = math.inf if self.xi == 0.0 else solve_z_star(self.f1, self.xi)
        object.__setattr__(self, "z_star", z_star)

    @property
    def center(self):
        return self.theta

    @property
    def label(self):
        return f"edgeworth({self.f1},xi={self.xi:g})"

    def _standardize(self, x):
        return (np.asarray(x, dtype=float) - self.theta) / self.sigma

    def ratio(self, z):
        return truncation_ratio(self.f1, self.xi, self.z_star, z)

    def pdf(self, x):
        z = self._standardize(x)
        return self.f1.pdf(z) * self.ratio(z) / self.sigma

    def cdf(self, x):
        z = self._standardize(x)
        if self.xi == 0.0:
            return self.f1.cdf(z)
        if self.xi > 0:
            return self._cdf_right_skewed(z)
        return 1.0 - self._cdf_right_skewed(-z)

    def _cdf_right_skewed(self, z):
        # Antiderivative of f1(t)(1 + |xi| phi(t)(t^2 - kappa)):
        #   F1(t) + |xi| H(t),  H(t) = -f1(t)(t^2 - kappa) + 2 M1(t),
        # with M1(t) the partial first moment; H is even.
        f1, u, xi, kappa = self.f1, self.z_star, abs(self.xi), self.f1.kappa

        def H(t):
            return -f1.pdf(t) * (t * t - kappa) + 2.0 * f1.partial_first_moment(t)

        zc = np.clip(z, -u, u)
        inner = f1.cdf(zc) - f1.cdf(-u) + xi * (H(zc) - H(-u))
        upper = 2.0 * (f1.cdf(np.maximum(z, u)) - f1.cdf(u))
        out = np.where(z < -u, 0.0, inner + upper)
        return np.clip(out, 0.0, 1.0)

    def rvs(self, size, rng):
        """Draw ``size`` variates by rejection from ``f1`` with envelope 2."""
        out = np.empty(size)
        filled = 0
        while filled < size:
            need = size - filled
            m = int(need * ENVELOPE * 1.1) + 16
            z = self.f1.rvs(m, rng)
            keep = z[ENVELOPE * rng.random(m) < self.ratio(z)]
            take = min(need, keep.size)
            out[filled:filled + take] = keep[:take]
            filled += take
        return self.theta + self.sigma * out

    def acceptance_rate(self, proposals, rng):
        z = self.f1.rvs(proposals, rng)
        return float(np.mean(ENVELOPE * rng.random(proposals) < self.ratio(z)))

    def to_dict(self):
        return {
            "family": str(self.f1),
            "theta": self.theta,
            "sigma": self.sigma,
            "xi": self.xi,
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        return cls(
            parse_family(data["family"]),
            theta=data.get("theta", 0.0),
            sigma=data.get("sigma", 1.0),
            xi=data.get("xi", 0.0),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))
