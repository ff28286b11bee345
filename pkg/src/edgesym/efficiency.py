"""Cross-information integrals, local shifts and Pitman efficiencies.

Each symmetry statistic is asymptotically ``N(shift, 1)`` under local
Edgeworth alternatives ``xi = tau / sqrt(n)`` built on a density ``g1``.
The shift formulas below take ``tau`` and the pair ``(f1, g1)``.

``g_scale`` lets callers re-express ``g1`` in another scale convention: the
density becomes that of ``g_scale * Z``.  The same physical alternative then
corresponds to ``tau / g_scale``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .densities import Family, half_line_integral, moment, parse_family
from .errors import DivergentIntegral, MomentDoesNotExist, ZeroShift

__all__ = [
    "CrossInformation",
    "cross_information",
    "shift_t_f1",
    "shift_t_hat",
    "shift_t_circ",
    "shift_s1",
    "shift_t_dagger",
    "shift_laplace",
    "are",
]


@dataclass(frozen=True)
class CrossInformation:
    i_fg: float
    j_fg: float
    k_fg: float
    i_gf: float
    j_gf: float
    k_gf: float
    kappa_g: float  # kappa of g1 itself, in the chosen scale convention

    @property
    def kappa_fg(self):
        return self.j_fg / self.i_fg


def _f(x):
    return parse_family(x) if isinstance(x, str) else x


def _check_pair(f1, g1):
    """Fail fast when a defining integral diverges (polynomial tails of ``g1``)."""
    limit = g1.max_finite_moment()
    if math.isinf(limit):
        return
    deg = f1.tail_polynomial_degree()
    # K_g(f1) integrates z**4 phi_f**2 g1 ~ |z|**(4 + 2 deg) g1
    order = 4 + 2 * deg
    if order >= limit:
        raise DivergentIntegral(
            f"K_g1(f1) for f1={f1}, g1={g1} needs mu_{order}(g1), which is infinite "
            f"(g1 not in the class F_f1 of densities with K_g1(f1) < inf)"
        )


def cross_information(f1, g1, g_scale=1.0):
    """Quadrature values of the six cross-information integrals."""
    f1, g1 = _f(f1), _f(g1)
    _check_pair(f1, g1)
    s = float(g_scale)

    def g(z):
        return g1.pdf(z / s) / s

    def phi_g(z):
        return g1.score(z / s) / s

    def integral(h):
        value = 2.0 * half_line_integral(h)
        if not math.isfinite(value):
            raise DivergentIntegral(f"cross-information integral diverged for {f1}, {g1}")
        return value

    def mixed(power):
        return integral(lambda z: z**power * f1.score(z) * phi_g(z) * g(z))

    def own(power):
        return integral(lambda z: z**power * f1.score(z) ** 2 * g(z))

    info_g = g1.information
    kappa_g = info_g.kappa * s * s
    return CrossInformation(mixed(0), mixed(2), mixed(4), own(0), own(2), own(4), kappa_g)


def shift_t_f1(f1, tau):
    """Shift of the optimal statistic at its own density: ``tau sqrt(gamma(f1))``."""
    return tau * math.sqrt(_f(f1).gamma)


def shift_t_hat(f1, g1, tau, g_scale=1.0):
    f1 = _f(f1)
    ci = cross_information(f1, g1, g_scale)
    kf, kg = f1.kappa, ci.kappa_g
    num = ci.k_fg - ci.j_fg * (kf + kg) + ci.i_fg * kf * kg
    den = ci.k_gf - 2.0 * ci.j_gf * kf + ci.i_gf * kf * kf
    return tau * num / math.sqrt(den)


def shift_t_circ(f1, g1, tau, g_scale=1.0):
    ci = cross_information(f1, g1, g_scale)
    k = ci.kappa_fg
    num = ci.k_fg - ci.j_fg * k
    den = ci.k_gf - 2.0 * ci.j_gf * k + ci.i_gf * k * k
    return tau * num / math.sqrt(den)


def _mu(g1, k, absolute=False, g_scale=1.0):
    try:
        return moment(g1, k, absolute) * g_scale**k
    except MomentDoesNotExist as exc:
        raise MomentDoesNotExist(f"{exc} (needed for this shift)") from None


def shift_t_dagger(g1, tau, g_scale=1.0):
    """Pseudo-Gaussian shift ``tau (5 mu4 - 9 mu2^2) / sqrt(mu6 - 6 mu2 mu4 + 9 mu2^3)``."""
    g1 = _f(g1)
    m2, m4, m6 = (_mu(g1, k, g_scale=g_scale) for k in (2, 4, 6))
    return tau * (5.0 * m4 - 9.0 * m2 * m2) / math.sqrt(m6 - 6.0 * m2 * m4 + 9.0 * m2**3)


def shift_s1(g1, tau, g_scale=1.0):
    """Shift of ``S1``: ``tau (5 mu4 - 3 kappa(g1) mu2) / sqrt(mu6)``."""
    g1 = _f(g1)
    m2, m4, m6 = (_mu(g1, k, g_scale=g_scale) for k in (2, 4, 6))
    kappa_g = g1.kappa * g_scale**2
    return tau * (5.0 * m4 - 3.0 * kappa_g * m2) / math.sqrt(m6)


def shift_laplace(g1, tau, g_scale=1.0):
    """Shift of the Laplace statistic, from absolute moments and ``g1(0)``."""
    g1 = _f(g1)
    a1 = _mu(g1, 1, True, g_scale)
    a3 = _mu(g1, 3, True, g_scale)
    m2 = _mu(g1, 2, g_scale=g_scale)
    m4 = _mu(g1, 4, g_scale=g_scale)
    g0 = float(g1.pdf(0.0)) / g_scale
    num = 4.0 * a3 - 2.0 * a1 * a1 / g0
    den = m4 - 2.0 * m2 * a1 / g0 + (a1 / g0) ** 2
    return tau * num / math.sqrt(den)


def are(shift_a, shift_b):
    """Pitman efficiency of test a relative to test b: ``(shift_a / shift_b)**2``."""
    if shift_b == 0 or shift_a == 0:
        raise ZeroShift("asymptotic relative efficiency needs nonzero shifts")
    return (shift_a / shift_b) ** 2


def optimal_shift(f1, g1, tau, g_scale=1.0):
    """Shift of the scale-robust test built at ``f1``, evaluated under ``g1``.

    Gaussian ``f1`` gives the pseudo-Gaussian statistic, Laplace the sign
    statistic, anything else the ``kappa°``-centred statistic.
    """
    f1 = _f(f1)
    if f1.family is Family.GAUSSIAN:
        # same integrability requirement as the general statistic (mu_6)
        _check_pair(f1, _f(g1))
        return shift_t_dagger(g1, tau, g_scale)
    if f1.family is Family.LAPLACE:
        _check_pair(f1, _f(g1))
        return shift_laplace(g1, tau, g_scale)
    return shift_t_circ(f1, g1, tau, g_scale)
