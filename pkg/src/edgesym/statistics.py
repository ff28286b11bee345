"""Symmetry test statistics, the central sequence and p-values.

All statistics are asymptotically standard normal under the null of
symmetry (within each statistic's validity class) and reject for large
positive values against right-skewed alternatives.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .densities import Family, ReferenceDensity, parse_family
from .errors import (
    DegenerateSample,
    NonPositiveVariance,
    TiesAtCenter,
    UnsupportedScoreDerivative,
    ZeroDenominator,
)
from .estimators import (
    DEFAULT_DISCRETIZATION,
    NuisanceEstimates,
    as_sample,
    estimate_nuisance,
    kde_at_zero,
)

__all__ = [
    "TEST_IDS",
    "TestOutcome",
    "CentralSequence",
    "p_values",
    "central_sequence",
    "s1",
    "s2_b1",
    "t_f1",
    "t_hat_f1",
    "kappa_circ",
    "t_circ_f1",
    "t_dagger",
    "t_laplace",
    "vdw_signed_rank",
    "vdw_scores",
    "run_test",
]

TEST_IDS = (
    "S1",
    "S2_b1",
    "T_f1",
    "T_hat_f1",
    "T_circ_f1",
    "T_dagger",
    "T_laplace",
    "T_logistic",
    "VdW",
)


def p_values(statistic):
    """Return ``(p_one, p_two)``; the one-sided test rejects for large values."""
    p_one = float(special.ndtr(-statistic))
    p_two = 2.0 * min(p_one, 1.0 - p_one)
    return p_one, min(p_two, 1.0)


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False  # keep pytest from collecting this class

    test_id: str
    statistic: float
    p_one_sided: float
    p_two_sided: float
    theta_hat: float | None = None
    sigma_hat: float | None = None
    reference_family: str | None = None
    extras: dict = field(default_factory=dict)

    @classmethod
    def build(cls, test_id, statistic, theta=None, sigma=None, f1=None, **extras):
        statistic = float(statistic)
        p_one, p_two = p_values(statistic)
        return cls(test_id, statistic, p_one, p_two,
                   None if theta is None else float(theta),
                   None if sigma is None else float(sigma),
                   None if f1 is None else str(f1), dict(extras))

    def rejects(self, alpha=0.05, sided="two"):
        p = self.p_one_sided if sided == "one" else self.p_two_sided
        return p < alpha

    def to_dict(self):
        out = {
            "test_id": self.test_id,
            "statistic": self.statistic,
            "p_one_sided": self.p_one_sided,
            "p_two_sided": self.p_two_sided,
            "theta_hat": self.theta_hat,
            "sigma_hat": self.sigma_hat,
        }
        if self.reference_family is not None:
            out["reference_family"] = self.reference_family
        out.update(self.extras)
        return out


@dataclass(frozen=True)
class CentralSequence:
    delta_loc: float
    delta_scale: float
    delta_skew: float

    def as_array(self):
        return np.array([self.delta_loc, self.delta_scale, self.delta_skew])


def _f1(f1):
    return parse_family(f1) if isinstance(f1, str) else f1


def _standardized(x, theta, sigma):
    if not sigma > 0:
        raise DegenerateSample(f"scale must be positive, got {sigma}")
    return (np.asarray(x, dtype=float) - theta) / sigma


def central_sequence(x, theta, sigma, f1):
    """Location, scale and skewness components of the central sequence."""
    f1 = _f1(f1)
    z = _standardized(x, theta, sigma)
    phi = f1.score(z)
    root_n = math.sqrt(z.size)
    return CentralSequence(
        float(np.sum(phi) / (sigma * root_n)),
        float(np.sum(phi * z - 1.0) / (sigma * root_n)),
        float(np.sum(phi * (z * z - f1.kappa)) / root_n),
    )


def s1(x, theta):
    """Classical specified-location statistic ``sqrt(n) m3(theta)/sqrt(m6(theta))``."""
    x = as_sample(x)
    d = x - theta
    d2 = d * d
    m3 = np.mean(d2 * d)
    m6 = np.mean(d2 * d2 * d2)
    if not m6 > 0:
        raise DegenerateSample("m6(theta) is zero")
    return TestOutcome.build("S1", math.sqrt(x.size) * m3 / math.sqrt(m6), theta=theta)


def s2_b1(x):
    """Standardized sample skewness ``S2``; ``b1 = m3/s**3`` rides along in extras."""
    x = as_sample(x)
    d = x - np.mean(x)
    d2 = d * d
    m2 = np.mean(d2)
    m3 = np.mean(d2 * d)
    m4 = np.mean(d2 * d2)
    m6 = np.mean(d2 * d2 * d2)
    var = m6 - 6.0 * m2 * m4 + 9.0 * m2**3
    if not (m2 > 0 and var > 0):
        raise DegenerateSample("degenerate moments for S2")
    b1 = m3 / m2**1.5
    stat = math.sqrt(x.size) * m3 / math.sqrt(var)
    return TestOutcome.build("S2_b1", stat, theta=float(np.mean(x)), b1=float(b1))


def t_f1(x, theta, sigma, f1):
    """Optimal statistic at a specified reference density ``f1``."""
    f1 = _f1(f1)
    x = as_sample(x)
    z = _standardized(x, theta, sigma)
    info = f1.information
    total = np.sum(f1.score(z) * (z * z - info.kappa))
    return TestOutcome.build("T_f1", total / math.sqrt(x.size * info.gamma),
                             theta=theta, sigma=sigma, f1=f1)


def _empirical_information(phi, z):
    phi2 = phi * phi
    z2 = z * z
    return np.mean(phi2), np.mean(z2 * phi2), np.mean(z2 * z2 * phi2)


def t_hat_f1(x, theta, sigma, f1):
    """``T_f1`` with its variance estimated from the data (``kappa`` kept at ``kappa(f1)``)."""
    f1 = _f1(f1)
    x = as_sample(x)
    z = _standardized(x, theta, sigma)
    phi = f1.score(z)
    kappa = f1.kappa
    i_n, j_n, k_n = _empirical_information(phi, z)
    gamma_n = k_n - 2.0 * kappa * j_n + kappa * kappa * i_n
    if not gamma_n > 0:
        raise NonPositiveVariance(f"estimated variance {gamma_n:.3g} is not positive")
    total = np.sum(phi * (z * z - kappa))
    return TestOutcome.build("T_hat_f1", total / math.sqrt(x.size * gamma_n),
                             theta=theta, sigma=sigma, f1=f1, gamma_n=float(gamma_n))


def kappa_circ(x, theta, sigma, f1):
    """Data-driven centering ``J°/I°`` built from the score derivative."""
    f1 = _f1(f1)
    if not f1.has_score_derivative:
        raise UnsupportedScoreDerivative(
            f"{f1} has no score derivative; use t_laplace for the Laplace reference"
        )
    z = _standardized(x, theta, sigma)
    dphi = f1.score_derivative(z)
    i_circ = np.mean(dphi)
    j_circ = 2.0 * np.mean(z * f1.score(z)) + np.mean(z * z * dphi)
    if i_circ == 0.0:
        raise ZeroDenominator("I° vanishes")
    return float(j_circ / i_circ)


def t_circ_f1(x, theta, sigma, f1, test_id="T_circ_f1"):
    """Statistic whose centering ``kappa°`` makes it insensitive to the scale convention.

    ``theta`` may be the specified center or any (discretized) estimate.
    """
    f1 = _f1(f1)
    x = as_sample(x)
    z = _standardized(x, theta, sigma)
    kappa = kappa_circ(x, theta, sigma, f1)
    phi = f1.score(z)
    i_n, j_n, k_n = _empirical_information(phi, z)
    gamma_n = k_n - 2.0 * kappa * j_n + kappa * kappa * i_n
    if not gamma_n > 0:
        raise NonPositiveVariance(f"estimated variance {gamma_n:.3g} is not positive")
    total = np.sum(phi * (z * z - kappa))
    return TestOutcome.build(test_id, total / math.sqrt(x.size * gamma_n),
                             theta=theta, sigma=sigma, f1=f1,
                             kappa_circ=kappa, gamma_n=float(gamma_n))


def t_dagger(x, theta):
    """Pseudo-Gaussian statistic; scale free, valid under finite sixth moments."""
    x = as_sample(x)
    d = x - theta
    d2 = d * d
    m2 = np.mean(d2)
    m4 = np.mean(d2 * d2)
    m6 = np.mean(d2 * d2 * d2)
    gamma_n = m6 - 6.0 * m2 * m4 + 9.0 * m2**3
    if not gamma_n > 0:
        raise NonPositiveVariance(f"gamma-dagger {gamma_n:.3g} is not positive")
    total = np.sum(d * (d2 - 3.0 * m2))
    return TestOutcome.build("T_dagger", total / math.sqrt(x.size * gamma_n), theta=theta)


def t_laplace(x, theta, sigma):
    """Laplace (sign-score) statistic with a kernel estimate of ``g1(0)``."""
    x = as_sample(x, min_size=10)
    z = _standardized(x, theta, sigma)
    g0 = kde_at_zero(z)
    if g0 == 0.0:
        raise ZeroDenominator("kernel estimate of g1(0) underflowed to zero")
    abs_z = np.abs(z)
    z2 = z * z
    kappa = float(np.mean(abs_z) / g0)
    gamma_n = np.mean(z2 * z2) - 2.0 * np.mean(z2) * kappa + kappa * kappa
    if not gamma_n > 0:
        raise NonPositiveVariance(f"estimated variance {gamma_n:.3g} is not positive")
    total = np.sum(np.sign(z) * (z2 - kappa))
    return TestOutcome.build("T_laplace", total / math.sqrt(x.size * gamma_n),
                             theta=theta, sigma=sigma, f1="laplace",
                             kappa_circ=kappa, g1_at_zero=g0)


def vdw_scores(n):
    """``J(r) = c_r (c_r**2 - 3)`` with ``c_r = Phi^-1((n + 1 + r) / (2(n + 1)))``."""
    r = np.arange(1, n + 1, dtype=float)
    c = special.ndtri((n + 1 + r) / (2.0 * (n + 1)))
    return c * (c * c - 3.0)


def _vdw_normalizer(n):
    return math.sqrt(n * np.mean(vdw_scores(n) ** 2))


def vdw_signed_rank(x, theta):
    """van der Waerden signed-rank statistic for symmetry about a specified ``theta``.

    Ties in ``|x - theta|`` get average ranks; observations equal to ``theta``
    contribute sign zero and trigger a :class:`TiesAtCenter` warning.
    """
    x = as_sample(x)
    d = x - theta
    n = x.size
    signs = np.sign(d)
    if np.any(signs == 0):
        warnings.warn(f"{int(np.sum(signs == 0))} observation(s) equal theta",
                      TiesAtCenter, stacklevel=2)
    ranks = stats.rankdata(np.abs(d), method="average")
    c = special.ndtri((n + 1 + ranks) / (2.0 * (n + 1)))
    total = np.sum(signs * c * (c * c - 3.0))
    return TestOutcome.build("VdW", total / _vdw_normalizer(n), theta=theta)


def run_test(test_id, x, theta=None, f1=None, location=None, discretized=True,
             c=DEFAULT_DISCRETIZATION):
    """Run a statistic with the estimator choices each test calls for.

    ``theta`` given means symmetry about a specified center; otherwise the
    center is estimated (median by default, sample mean for ``T_dagger``).
    ``S1`` and ``VdW`` need a specified ``theta``.  The scale is the MAD about
    the center, discretized when ``discretized`` except for Gaussian
    references where no discretization is needed.
    """
    x = as_sample(x)
    if test_id == "S2_b1":
        return s2_b1(x)
    if test_id in ("S1", "VdW"):
        if theta is None:
            raise ValueError(f"{test_id} requires a specified theta")
        return s1(x, theta) if test_id == "S1" else vdw_signed_rank(x, theta)
    if test_id == "T_dagger":
        center = theta if theta is not None else (
            float(np.mean(x)) if location in (None, "mean") else float(np.median(x))
        )
        return t_dagger(x, center)

    if test_id == "T_laplace":
        # the median is not discretized: the statistic is written with theta-hat
        nuis = estimate_nuisance(x, theta, location or "median", discretized, c,
                                 discretize_theta=False)
        return _with_location(t_laplace(x, nuis.theta_hat, nuis.sigma_hat), nuis)

    if test_id == "T_logistic":
        f1 = parse_family("logistic")
    elif test_id in ("T_f1", "T_hat_f1", "T_circ_f1"):
        f1 = _f1(f1) if f1 is not None else parse_family("gaussian")
    else:
        raise ValueError(f"unknown test id {test_id!r}")
    disc = discretized and f1.family is not Family.GAUSSIAN
    nuis = estimate_nuisance(x, theta, location or "median", disc, c)
    if test_id == "T_f1":
        out = t_f1(x, nuis.theta_hat, nuis.sigma_hat, f1)
    elif test_id == "T_hat_f1":
        out = t_hat_f1(x, nuis.theta_hat, nuis.sigma_hat, f1)
    else:
        out = t_circ_f1(x, nuis.theta_hat, nuis.sigma_hat, f1, test_id=test_id)
    return _with_location(out, nuis)


def _with_location(outcome, nuis: NuisanceEstimates):
    extras = dict(outcome.extras)
    extras["theta_specified"] = nuis.theta_specified
    extras["discretized"] = nuis.discretized
    return TestOutcome(outcome.test_id, outcome.statistic, outcome.p_one_sided,
                       outcome.p_two_sided, outcome.theta_hat, outcome.sigma_hat,
                       outcome.reference_family, extras)
