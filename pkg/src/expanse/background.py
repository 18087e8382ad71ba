"""Closed-form expanding backgrounds and the conformal-like time change.

The background family is parameterized by the spatial dimension ``n``, an
equation-of-state parameter ``sigma``, the initial scale ``a0 = a(0)`` and the
initial rate ``a1 = da/dt(0)``:

    a(t) = a0 * (1 + n*(1+sigma)*a1*t / (2*a0)) ** (2 / (n*(1+sigma)))   sigma != -1
    a(t) = a0 * exp(a1*t / a0)                                           sigma == -1

Every derived quantity used by the solver is available in closed form: the
weight ``w(t) = (a0/a(t))**(n/2)``, the rescaled evolution time
``s(t) = integral_0^t a(tau)**-2 dtau`` together with its exact inverse, and
the two horizons ``t_horizon`` (where a(t) itself stops existing) and
``s_horizon`` (the supremum of s, finite exactly when a1*(4-n*(1+sigma)) > 0).

All functions accept scalars or numpy arrays and raise ``ValueError`` outside
the domain of definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ScaleFactorParams", "ScaleFactor"]

# |1 - 2*beta| below this selects the logarithmic antiderivative of a^-2
_LOG_BRANCH_TOL = 1e-12


def _log1p_floor(x):
    """log1p clipped to the last representable point above the t = T0 pole.

    In-domain times satisfy 1 + kappa*t > 0 exactly, but the product can
    round to -1 or below at the final representable t before the horizon.
    """
    return np.log1p(np.maximum(x, np.nextafter(-1.0, 0.0)))


@dataclass(frozen=True)
class ScaleFactorParams:
    """Background parameters (n, sigma, a0, a1).

    ``sigma`` relates pressure and energy density; ``sigma == -1`` gives the
    exponential branch, ``sigma < -1`` with ``a1 > 0`` a finite-time blow-up
    of the scale itself (Big-Rip).
    """

    n: int
    sigma: float
    a0: float
    a1: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("spatial dimension n must be >= 1")
        if not self.a0 > 0:
            raise ValueError("initial scale a0 must be positive")

    @property
    def t_horizon(self) -> float:
        """Largest time T0 up to which a(t) exists; inf iff (1+sigma)*a1 >= 0."""
        if (1.0 + self.sigma) * self.a1 >= 0:
            return math.inf
        return -2.0 * self.a0 / (self.n * (1.0 + self.sigma) * self.a1)

    @property
    def kappa_rate(self) -> float:
        """Expansion rate n*(1+sigma)*a1/(2*a0) entering the power-law branch."""
        return self.n * (1.0 + self.sigma) * self.a1 / (2.0 * self.a0)

    @property
    def beta_exp(self) -> float:
        """Power-law exponent 2/(n*(1+sigma)); undefined for sigma == -1."""
        if self.sigma == -1.0:
            raise ValueError("beta_exp is undefined for sigma == -1")
        return 2.0 / (self.n * (1.0 + self.sigma))


def _horizon_s(params: ScaleFactorParams) -> float:
    gate = params.a1 * (4.0 - params.n * (1.0 + params.sigma))
    if gate > 0:
        return 2.0 / (params.a0 * params.a1 * (4.0 - params.n * (1.0 + params.sigma)))
    return math.inf


class ScaleFactor:
    """Closed-form evaluation of a(t), w(t), s(t), the inverse t(s) and horizons."""

    def __init__(self, params: ScaleFactorParams):
        self.params = params
        self.t_horizon = params.t_horizon
        self.s_horizon = _horizon_s(params)
        if params.sigma != -1.0:
            self.kappa_rate = params.kappa_rate
            self.beta_exp = params.beta_exp
        else:
            self.kappa_rate = params.a1 / params.a0  # log-derivative of a at t=0
            self.beta_exp = None

    # -- time-domain quantities ------------------------------------------------

    def _check_t(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t >= self.t_horizon):
            raise ValueError(
                f"time outside background domain [0, {self.t_horizon})"
            )
        return t

    def a(self, t):
        """Scale a(t) on [0, t_horizon)."""
        p = self.params
        t = self._check_t(t)
        with np.errstate(over="ignore"):
            if p.sigma == -1.0:
                out = p.a0 * np.exp(p.a1 * t / p.a0)
            else:
                out = p.a0 * np.exp(self.beta_exp * _log1p_floor(self.kappa_rate * t))
        return out if out.ndim else float(out)

    def da_dt(self, t):
        """Time derivative of the scale; equals a1 at t = 0 on both branches."""
        p = self.params
        t = self._check_t(t)
        with np.errstate(over="ignore"):
            if p.sigma == -1.0:
                out = p.a1 * np.exp(p.a1 * t / p.a0)
            else:
                out = p.a1 * np.exp(
                    (self.beta_exp - 1.0) * _log1p_floor(self.kappa_rate * t))
        return out if out.ndim else float(out)

    def w(self, t):
        """Weight w(t) = (a0/a(t))**(n/2), positive on the whole domain."""
        p = self.params
        t = self._check_t(t)
        if p.sigma == -1.0:
            out = np.exp(-0.5 * p.n * p.a1 * t / p.a0)
        else:
            out = np.exp(-0.5 * p.n * self.beta_exp * _log1p_floor(self.kappa_rate * t))
        return out if out.ndim else float(out)

    def s_of_t(self, t):
        """Rescaled time s(t) = integral_0^t a(tau)**-2 dtau, exactly integrated.

        expm1/log1p keep every branch accurate when kappa_rate*t is tiny, so
        no series fallback is needed near the degenerate parameter surfaces.
        """
        p = self.params
        t = self._check_t(t)
        a0sq = p.a0 * p.a0
        if p.a1 == 0.0:
            out = t / a0sq
        elif p.sigma == -1.0:
            out = -np.expm1(-2.0 * p.a1 * t / p.a0) / (2.0 * p.a0 * p.a1)
        else:
            kappa = self.kappa_rate
            one_m2b = 1.0 - 2.0 * self.beta_exp
            if abs(one_m2b) < _LOG_BRANCH_TOL:
                out = _log1p_floor(kappa * t) / (a0sq * kappa)
            else:
                out = np.expm1(one_m2b * _log1p_floor(kappa * t)) / (a0sq * kappa * one_m2b)
        return out if np.ndim(out) else float(out)

    # -- s-domain quantities ---------------------------------------------------

    def _check_s(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0) or np.any(s >= self.s_horizon):
            raise ValueError(
                f"s-time outside background domain [0, {self.s_horizon})"
            )
        return s

    def t_of_s(self, s):
        """Exact branch-by-branch inverse of ``s_of_t``."""
        p = self.params
        s = self._check_s(s)
        a0sq = p.a0 * p.a0
        with np.errstate(over="ignore"):
            if p.a1 == 0.0:
                out = a0sq * s
            elif p.sigma == -1.0:
                out = -0.5 * (p.a0 / p.a1) * _log1p_floor(-2.0 * p.a0 * p.a1 * s)
            else:
                kappa = self.kappa_rate
                one_m2b = 1.0 - 2.0 * self.beta_exp
                if abs(one_m2b) < _LOG_BRANCH_TOL:
                    out = np.expm1(a0sq * kappa * s) / kappa
                else:
                    y = a0sq * kappa * one_m2b * s
                    out = np.expm1(_log1p_floor(y) / one_m2b) / kappa
        return out if np.ndim(out) else float(out)

    def a_of_s(self, s):
        return self.a(self.t_of_s(s))

    def w_of_s(self, s):
        return self.w(self.t_of_s(s))

    def da_ds(self, s):
        """da/ds = a(t)**2 * da/dt evaluated at t(s)."""
        t = self.t_of_s(s)
        return self.a(t) ** 2 * self.da_dt(t)

    def coefficient(self, s, p_power: float):
        """Nonlinear-term weight a(s)**2 * w(s)**(p-1).

        Equals a0**(n*(p-1)/2) * a(s)**(2 - n*(p-1)/2); constant a0**2 at the
        conformal power p = 1 + 4/n.
        """
        t = self.t_of_s(s)
        return self.a(t) ** 2 * self.w(t) ** (p_power - 1.0)
