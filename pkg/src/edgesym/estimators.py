"""Nuisance estimators: median, MAD scale, lattice discretization, moments, KDE."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSample

__all__ = [
    "as_sample",
    "median",
    "mad_scale",
    "discretize",
    "empirical_moment",
    "kde_at_zero",
    "NuisanceEstimates",
    "estimate_nuisance",
    "DEFAULT_DISCRETIZATION",
]

DEFAULT_DISCRETIZATION = 100.0
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def as_sample(values, min_size=2):
    """Validate observations and return them as a float array."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size < min_size:
        raise DegenerateSample(f"need at least {min_size} observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DegenerateSample("sample contains non-finite values")
    return x


def median(x):
    """Order-statistic median; the midpoint of the two central values for even n."""
    return float(np.median(np.asarray(x, dtype=float)))


def mad_scale(x, theta):
    """Median of absolute deviations ``|x_i - theta|``."""
    dev = np.abs(np.asarray(x, dtype=float) - theta)
    s = float(np.median(dev))
    if not s > 0.0:
        if np.all(dev == 0.0):
            raise DegenerateSample("all observations equal the center")
        raise DegenerateSample("more than half of the observations equal the center")
    return s


def discretize(value, n, c=DEFAULT_DISCRETIZATION):
    """Round ``value`` away from zero onto the lattice of step ``1/(c sqrt(n))``."""
    if not c > 0:
        raise ValueError("discretization constant must be positive")
    if value == 0:
        return 0.0
    scale = c * math.sqrt(n)
    v = scale * abs(value)
    k = round(v)
    # snap float noise so lattice points map to themselves
    steps = k if abs(v - k) <= 1e-9 * max(1.0, k) else math.ceil(v)
    return math.copysign(steps / scale, value)


def empirical_moment(x, k, center=0.0):
    """``n^-1 sum (x_i - center)**k``."""
    d = np.asarray(x, dtype=float) - center
    return float(np.mean(d**k))


def kde_at_zero(z):
    """Gaussian-kernel density estimate at 0 with Silverman's bandwidth.

    ``h = 1.06 * min(sd, IQR/1.349) * n**(-1/5)``.  Falls back to ``sd`` when
    the IQR is zero.
    """
    z = np.asarray(z, dtype=float)
    n = z.size
    if n < 10:
        raise DegenerateSample(f"kernel estimate needs n >= 10, got {n}")
    sd = float(np.std(z, ddof=1))
    q75, q25 = np.percentile(z, [75.0, 25.0])
    spread = min(sd, (q75 - q25) / 1.349) or sd
    if not spread > 0:
        raise DegenerateSample("zero spread in residuals")
    h = 1.06 * spread * n ** -0.2
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        u = z / h
        value = float(np.mean(np.exp(-0.5 * u * u)) / (h * _SQRT_2PI))
    if not math.isfinite(value):
        raise DegenerateSample(f"bandwidth {h:.3g} too small for a finite estimate")
    return value


@dataclass(frozen=True)
class NuisanceEstimates:
    theta_hat: float
    sigma_hat: float
    theta_specified: bool
    discretized: bool
    c: float | None = None


def estimate_nuisance(x, theta=None, location="median", discretized=True,
                      c=DEFAULT_DISCRETIZATION, discretize_theta=True):
    """Location and MAD scale used by the statistics.

    ``theta`` given means a specified center; otherwise it is estimated by
    ``location`` (``"median"`` or ``"mean"``).  With ``discretized`` the
    estimates are moved onto the ``1/(c sqrt(n))`` lattice.
    """
    n = len(x)
    specified = theta is not None
    if specified:
        theta_hat = float(theta)
    else:
        if location == "median":
            theta_hat = median(x)
        elif location == "mean":
            theta_hat = float(np.mean(x))
        else:
            raise ValueError(f"unknown location estimator {location!r}")
        if discretized and discretize_theta:
            theta_hat = discretize(theta_hat, n, c)
    sigma_hat = mad_scale(x, theta_hat)
    if discretized:
        sigma_hat = discretize(sigma_hat, n, c)
    return NuisanceEstimates(theta_hat, sigma_hat, specified, discretized,
                             c if discretized else None)
