"""Standardized symmetric reference densities.

Every density here is standardized so that its scale is the median of
absolute deviations: ``P(|Z| <= 1) = 1/2``, equivalently
``integral_{-inf}^{1} f1 = 0.75``.  Supported families are the Gaussian,
Laplace, logistic, power-exponential (integer ``eta`` in 1..5) and Student
``t`` (``nu > 2``).

Each :class:`ReferenceDensity` exposes the density, CDF, location score
``phi = -f1'/f1``, its derivative, a sampler and the information quantities
``I``, ``J``, ``K`` together with ``kappa = J/I`` and ``gamma = K - J**2/I``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate, optimize, special, stats

from .errors import GrammarError, MomentDoesNotExist, UnsupportedScoreDerivative

__all__ = [
    "Family",
    "ReferenceDensity",
    "InformationSet",
    "standardization_constant",
    "information_set",
    "moment",
    "half_line_integral",
    "parse_family",
    "gaussian",
    "laplace",
    "logistic",
    "power_exponential",
    "student",
]

QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-12
MAX_POWEREXP_ETA = 5


class Family(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"
    LOGISTIC = "logistic"
    POWEREXP = "powerexp"
    STUDENT = "student"


def half_line_integral(fn, lower=0.0, upper=np.inf):
    """Adaptive quadrature of ``fn`` over ``[lower, upper]``.

    Integrands over the real line are even in every use here, so callers
    integrate over the half line and double; this also puts the Laplace kink
    at an endpoint.
    """
    value, _ = integrate.quad(
        fn, lower, upper, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=500
    )
    return value


def _quantile_condition(family, shape):
    """Return ``c -> integral_{-inf}^{1} f1_c - 0.75`` for a family."""
    if family is Family.GAUSSIAN:
        return lambda c: special.ndtr(math.sqrt(c)) - 0.75
    if family is Family.LAPLACE:
        return lambda c: 0.25 - 0.5 * math.exp(-1.0 / c)
    if family is Family.LOGISTIC:
        return lambda c: special.expit(math.sqrt(c)) - 0.75
    if family is Family.STUDENT:
        return lambda c: special.stdtr(shape, math.sqrt(c)) - 0.75
    if family is Family.POWEREXP:
        p = 2.0 * shape
        return lambda c: 0.5 * special.gammainc(1.0 / p, c**p) - 0.25
    raise ValueError(f"unknown family {family!r}")


def _check_shape(family, shape):
    if family is Family.STUDENT:
        if shape is None or not shape > 2:
            raise ValueError(
                f"Student family needs nu > 2 degrees of freedom, got {shape}"
            )
        return float(shape)
    if family is Family.POWEREXP:
        if shape is None or int(shape) != shape or not 1 <= shape <= MAX_POWEREXP_ETA:
            raise ValueError(
                f"power-exponential eta must be an integer in 1..{MAX_POWEREXP_ETA}, got {shape}"
            )
        return int(shape)
    if shape is not None:
        raise ValueError(f"{family.value} takes no shape parameter")
    return None


def standardization_constant(family, shape=None, rtol=1e-14):
    """Solve for the constant that puts a family's density in the MAD class.

    The constant is ``a`` (Gaussian), ``d`` (Laplace), ``b`` (logistic),
    ``g_eta`` (power-exponential) or ``a_nu`` (Student).  It is found by
    bracketed root finding on ``integral_{-inf}^{1} f1 = 0.75``.
    """
    family = Family(family)
    shape = _check_shape(family, shape)
    objective = _quantile_condition(family, shape)
    lo, hi = 0.5, 2.0
    for _ in range(200):
        if objective(lo) * objective(hi) < 0:
            break
        lo, hi = lo / 2.0, hi * 2.0
    else:
        raise RuntimeError("could not bracket standardization constant")
    return optimize.brentq(objective, lo, hi, xtol=1e-300, rtol=rtol, maxiter=200)


def _norm_constant(family, shape, c):
    if family is Family.GAUSSIAN:
        return math.sqrt(c / (2.0 * math.pi))
    if family is Family.LAPLACE:
        return 1.0 / (2.0 * c)
    if family is Family.LOGISTIC:
        return math.sqrt(c)
    if family is Family.STUDENT:
        nu = shape
        return math.sqrt(c / nu) * math.exp(
            special.gammaln((nu + 1) / 2) - special.gammaln(nu / 2)
        ) / math.sqrt(math.pi)
    p = 2.0 * shape
    return c * p / (2.0 * math.gamma(1.0 / p))


@dataclass(frozen=True)
class InformationSet:
    i_loc: float
    j_scale: float
    k_skew: float
    kappa: float = field(init=False)
    gamma: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "kappa", self.j_scale / self.i_loc)
        object.__setattr__(
            self, "gamma", self.k_skew - self.j_scale**2 / self.i_loc
        )

    def as_tuple(self):
        return (self.i_loc, self.j_scale, self.k_skew, self.kappa, self.gamma)


@dataclass(frozen=True)
class ReferenceDensity:
    """A MAD-standardized symmetric density ``f1``.

    Build instances with the module helpers (:func:`gaussian`,
    :func:`student`, ...) or :func:`parse_family`; the constructor computes
    the standardization and normalizing constants.
    """

    family: Family
    shape: float | int | None = None
    std_constant: float = field(init=False)
    norm_constant: float = field(init=False)

    def __post_init__(self):
        family = Family(self.family)
        shape = _check_shape(family, self.shape)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "shape", shape)
        c = standardization_constant(family, shape)
        object.__setattr__(self, "std_constant", c)
        object.__setattr__(self, "norm_constant", _norm_constant(family, shape, c))

    def __str__(self):
        if self.shape is None:
            return self.family.value
        shape = self.shape
        if isinstance(shape, float) and shape.is_integer():
            shape = int(shape)
        return f"{self.family.value}:{shape}"

    @property
    def descriptor(self):
        return str(self)

    # -- pointwise functions -------------------------------------------------

    def pdf(self, z):
        z = np.asarray(z, dtype=float)
        c, C = self.std_constant, self.norm_constant
        fam = self.family
        if fam is Family.GAUSSIAN:
            return C * np.exp(-0.5 * c * z * z)
        if fam is Family.LAPLACE:
            return C * np.exp(-np.abs(z) / c)
        if fam is Family.LOGISTIC:
            # sqrt(b) e^{-s|z|} / (1 + e^{-s|z|})^2, written to avoid overflow
            e = np.exp(-C * np.abs(z))
            return C * e / (1.0 + e) ** 2
        if fam is Family.STUDENT:
            nu = self.shape
            return C * (1.0 + c * z * z / nu) ** (-(nu + 1) / 2)
        p = 2 * self.shape
        return C * np.exp(-np.abs(c * z) ** p)

    def logpdf(self, z):
        z = np.asarray(z, dtype=float)
        c, C = self.std_constant, self.norm_constant
        fam = self.family
        if fam is Family.GAUSSIAN:
            return math.log(C) - 0.5 * c * z * z
        if fam is Family.LAPLACE:
            return math.log(C) - np.abs(z) / c
        if fam is Family.LOGISTIC:
            u = C * np.abs(z)
            return math.log(C) - u - 2.0 * np.log1p(np.exp(-u))
        if fam is Family.STUDENT:
            nu = self.shape
            return math.log(C) - (nu + 1) / 2 * np.log1p(c * z * z / nu)
        p = 2 * self.shape
        return math.log(C) - np.abs(c * z) ** p

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        c = self.std_constant
        fam = self.family
        if fam is Family.GAUSSIAN:
            return special.ndtr(math.sqrt(c) * z)
        if fam is Family.LAPLACE:
            tail = 0.5 * np.exp(-np.abs(z) / c)
            return np.where(z < 0, tail, 1.0 - tail)
        if fam is Family.LOGISTIC:
            return special.expit(self.norm_constant * z)
        if fam is Family.STUDENT:
            return special.stdtr(self.shape, math.sqrt(c) * z)
        p = 2.0 * self.shape
        tail = 0.5 * special.gammaincc(1.0 / p, np.abs(c * z) ** p)
        return np.where(z < 0, tail, 1.0 - tail)

    def partial_first_moment(self, z):
        """``integral_{-inf}^{z} t f1(t) dt`` in closed form (an even function)."""
        w = np.abs(np.asarray(z, dtype=float))
        c, C = self.std_constant, self.norm_constant
        fam = self.family
        if fam is Family.GAUSSIAN:
            return -self.pdf(w) / c
        if fam is Family.LAPLACE:
            return -0.5 * (w + c) * np.exp(-w / c)
        if fam is Family.LOGISTIC:
            s = C
            # t F(t) - log(1 + e^{s t}) / s evaluated at t = -w
            return -w * special.expit(-s * w) - np.logaddexp(0.0, -s * w) / s
        if fam is Family.STUDENT:
            nu = self.shape
            return -C * nu / (c * (nu - 1)) * (1.0 + c * w * w / nu) ** (-(nu - 1) / 2)
        p = 2.0 * self.shape
        return -C / (c * c * p) * special.gamma(2.0 / p) * special.gammaincc(
            2.0 / p, (c * w) ** p
        )

    def score(self, z):
        """Location score ``phi(z) = -f1'(z)/f1(z)`` (odd in ``z``)."""
        z = np.asarray(z, dtype=float)
        c = self.std_constant
        fam = self.family
        if fam is Family.GAUSSIAN:
            return c * z
        if fam is Family.LAPLACE:
            return np.sign(z) / c
        if fam is Family.LOGISTIC:
            s = self.norm_constant
            return s * np.tanh(0.5 * s * z)
        if fam is Family.STUDENT:
            nu = self.shape
            return (nu + 1) * c * z / (nu + c * z * z)
        p = 2 * self.shape
        return p * c**p * np.sign(z) * np.abs(z) ** (p - 1)

    def pdf_derivative(self, z):
        """``f1'(z)``; for Laplace the one-sided derivative with the sign of ``z``."""
        return -self.score(z) * self.pdf(z)

    def score_derivative(self, z):
        z = np.asarray(z, dtype=float)
        c = self.std_constant
        fam = self.family
        if fam is Family.LAPLACE:
            raise UnsupportedScoreDerivative(
                "the Laplace score sign(z)/d is not differentiable"
            )
        if fam is Family.GAUSSIAN:
            return np.full_like(z, c)
        if fam is Family.LOGISTIC:
            s = self.norm_constant
            e = np.exp(-np.abs(s * z))
            return 2.0 * s * s * e / (1.0 + e) ** 2
        if fam is Family.STUDENT:
            nu = self.shape
            return (nu + 1) * c * (nu - c * z * z) / (nu + c * z * z) ** 2
        p = 2 * self.shape
        return p * (p - 1) * c**p * np.abs(z) ** (p - 2)

    @property
    def has_score_derivative(self):
        return self.family is not Family.LAPLACE

    # -- sampling ----------------------------------------------------------------

    def rvs(self, size, rng):
        """Draw ``size`` variates using the numpy ``Generator`` ``rng``."""
        c = self.std_constant
        fam = self.family
        if fam is Family.GAUSSIAN:
            return rng.standard_normal(size) / math.sqrt(c)
        if fam is Family.LAPLACE:
            return rng.laplace(0.0, c, size)
        if fam is Family.LOGISTIC:
            return rng.logistic(0.0, 1.0 / self.norm_constant, size)
        if fam is Family.STUDENT:
            return rng.standard_t(self.shape, size) / math.sqrt(c)
        p = 2.0 * self.shape
        mag = rng.standard_gamma(1.0 / p, size) ** (1.0 / p) / c
        return np.where(rng.random(size) < 0.5, -mag, mag)

    # -- derived quantities ------------------------------------------------------

    @cached_property
    def information(self):
        return information_set(self)

    @property
    def kappa(self):
        return self.information.kappa

    @property
    def gamma(self):
        return self.information.gamma

    def max_finite_moment(self):
        """Moments of order strictly below this value exist."""
        return self.shape if self.family is Family.STUDENT else math.inf

    def tail_polynomial_degree(self):
        """Growth degree of the score at infinity (``phi(z) ~ z**deg``)."""
        fam = self.family
        if fam is Family.GAUSSIAN:
            return 1
        if fam in (Family.LAPLACE, Family.LOGISTIC):
            return 0
        if fam is Family.STUDENT:
            return -1
        return 2 * self.shape - 1


def _closed_form_information(f1):
    c = f1.std_constant
    fam = f1.family
    if fam is Family.GAUSSIAN:
        return c, 3.0, 15.0 / c
    if fam is Family.LAPLACE:
        return 1.0 / c**2, 2.0, 24.0 * c**2
    if fam is Family.LOGISTIC:
        pi2 = math.pi**2
        return c / 3.0, (12.0 + pi2) / 9.0, pi2 * (120.0 + 7.0 * pi2) / (45.0 * c)
    if fam is Family.STUDENT:
        nu = f1.shape
        return (
            c * (nu + 1) / (nu + 3),
            3.0 * (nu + 1) / (nu + 3),
            15.0 * nu * (nu + 1) / (c * (nu - 2) * (nu + 3)),
        )
    p = 2.0 * f1.shape
    g1p = math.gamma(1.0 / p)
    return (
        p * p * c * c * math.gamma(2.0 - 1.0 / p) / g1p,
        1.0 + p,
        p * p * math.gamma(2.0 + 3.0 / p) / (c * c * g1p),
    )


def _quadrature_information(f1):
    def expect(weight):
        return 2.0 * half_line_integral(
            lambda z: weight(z) * f1.score(z) ** 2 * f1.pdf(z)
        )

    return (
        expect(lambda z: 1.0),
        expect(lambda z: z * z),
        expect(lambda z: z**4),
    )


def information_set(f1, method="closed"):
    """Information quantities of ``f1``.

    ``method="closed"`` uses the analytic expressions, ``"quadrature"``
    integrates ``phi**2 f1`` weighted by ``1, z**2, z**4`` numerically.
    """
    if method == "closed":
        i, j, k = _closed_form_information(f1)
    elif method == "quadrature":
        i, j, k = _quadrature_information(f1)
    else:
        raise ValueError(f"unknown method {method!r}")
    return InformationSet(i, j, k)


def moment(f1, k, absolute=False):
    """``mu_k = E z**k`` (or ``E |z|**k`` when ``absolute``) by quadrature."""
    k = int(k)
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    if not absolute and k % 2 == 1:
        return 0.0
    if k >= f1.max_finite_moment():
        raise MomentDoesNotExist(
            f"mu_{k} does not exist for {f1} (moments exist below order {f1.shape:g})"
        )
    return 2.0 * half_line_integral(lambda z: z**k * f1.pdf(z))


def gaussian():
    return ReferenceDensity(Family.GAUSSIAN)


def laplace():
    return ReferenceDensity(Family.LAPLACE)


def logistic():
    return ReferenceDensity(Family.LOGISTIC)


def power_exponential(eta):
    return ReferenceDensity(Family.POWEREXP, eta)


def student(nu):
    return ReferenceDensity(Family.STUDENT, nu)


def parse_family(text):
    """Parse ``gaussian``, ``laplace``, ``logistic``, ``powerexp:<eta>`` or ``student:<nu>``."""
    if isinstance(text, ReferenceDensity):
        return text
    raw = text
    parts = text.strip().lower().split(":")
    try:
        family = Family(parts[0])
    except ValueError:
        raise GrammarError(raw, parts[0]) from None
    if family in (Family.POWEREXP, Family.STUDENT):
        if len(parts) != 2:
            raise GrammarError(raw, text)
        try:
            shape = float(parts[1])
        except ValueError:
            raise GrammarError(raw, parts[1]) from None
        if family is Family.POWEREXP:
            if not shape.is_integer():
                raise GrammarError(raw, parts[1])
            shape = int(shape)
        try:
            return ReferenceDensity(family, shape)
        except ValueError:
            raise GrammarError(raw, parts[1]) from None
    if len(parts) != 1:
        raise GrammarError(raw, parts[1])
    return ReferenceDensity(family)
