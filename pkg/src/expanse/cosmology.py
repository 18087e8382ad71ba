"""Homogeneous-isotropic scale solutions and their field-equation residuals.

Every model in the catalogue solves the first-order constraint

    (db/dx0)**2 = R * b**(2-m) + L * b**2 - curvature

where ``R`` collects the matter density, ``L`` the cosmological-constant
contribution, ``curvature`` the spatial curvature ratio k^2/q^2, and the
matter exponent ``m`` is the spatial dimension ``n`` for dust and
``n*(1+sigma)`` for a general linear equation of state.  The catalogue covers
the kinematic (R = L = 0), pure-Lambda, pure-matter (flat and curved,
parametric), matter-plus-Lambda and equation-of-state families; residual
checkers verify the constraint, the acceleration equation and mass
conservation by high-order finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gamma as _gamma

from .background import ScaleFactor, ScaleFactorParams

__all__ = [
    "eval_kappa",
    "IsotropyProfile",
    "isotropy_residual",
    "CosmologyModel",
    "EquationOfStateModel",
    "LinearScaleModel",
    "SineScaleModel",
    "ExpScaleModel",
    "CoshScaleModel",
    "SinhScaleModel",
    "PowerMatterModel",
    "ClosedMatterModel",
    "OpenMatterModel",
    "StaticBalanceModel",
    "MatterLambdaModel",
    "UnsupportedCaseError",
    "friedmann_residual",
    "raychaudhuri_residual",
    "mass_conservation_residual",
    "model_catalogue",
    "static_threshold",
]


class UnsupportedCaseError(ValueError):
    """Model regime with no closed-form scale solution."""


def eval_kappa(n: int, G: float, c: float) -> float:
    """Gravitational coupling 2*(n-1)*pi**(n/2)*G / ((n-2)*Gamma(n/2)*c**4).

    Reduces to the familiar 8*pi*G/c**4 at n = 3.  Only defined for n >= 3.
    """
    if n < 3:
        raise ValueError("gravitational coupling requires n >= 3")
    if G <= 0 or c <= 0:
        raise ValueError("G and c must be positive")
    return 2.0 * (n - 1) * math.pi ** (n / 2.0) * G / ((n - 2) * _gamma(n / 2.0) * c**4)


# ---------------------------------------------------------------------------
# isotropy profile
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IsotropyProfile:
    """Radial conformal profile exp(f(r)) = q**2 * (1 + k**2 r**2 / 4)**-2.

    ``q`` and ``k`` may be complex; the profile solves
    f'' - f'/r - (f')**2/2 = 0 away from zeros of 1 + k**2 r**2 / 4.
    """

    q: complex
    k: complex

    def __post_init__(self) -> None:
        if self.q == 0:
            raise ValueError("q must be nonzero")

    def _denom(self, r: float) -> complex:
        d = 1.0 + self.k**2 * r * r / 4.0
        if d == 0:
            raise ValueError(f"profile singular at r = {r}: 1 + k^2 r^2/4 = 0")
        return d

    def exp_f(self, r: float) -> complex:
        return self.q**2 * self._denom(r) ** -2

    def f_prime(self, r: float) -> complex:
        return -self.k**2 * r / self._denom(r)

    def f_second(self, r: float) -> complex:
        d = self._denom(r)
        return -self.k**2 / d + self.k**4 * r * r / (2.0 * d * d)


def isotropy_residual(profile: IsotropyProfile, r: float) -> float:
    """|f'' - f'/r - (f')**2 / 2| from analytic derivatives; zero up to roundoff."""
    if r <= 0:
        raise ValueError("r must be positive")
    fp = profile.f_prime(r)
    fpp = profile.f_second(r)
    return abs(fpp - fp / r - 0.5 * fp * fp)


# ---------------------------------------------------------------------------
# scale-solution catalogue
# ---------------------------------------------------------------------------


class CosmologyModel:
    """Base class: a positive scale b(x0) plus its constraint constants."""

    name: str = "model"
    n: int
    matter_const: float  # R
    lambda_const: float  # L
    curvature: float  # k^2/q^2 (real)
    matter_exponent: float  # m in R * b**(2-m)
    domain: tuple[float, float]  # open interval of validity
    sample_window: tuple[float, float]  # interior window used by checks

    def b(self, x0: float) -> float:
        raise NotImplementedError

    def _check_x0(self, x0: float) -> float:
        lo, hi = self.domain
        if not lo <= x0 < hi:
            raise ValueError(f"{self.name}: x0 = {x0} outside domain [{lo}, {hi})")
        return float(x0)

    def energy_rhs(self, bval: float) -> float:
        """Right-hand side R*b**(2-m) + L*b**2 - curvature of the constraint."""
        return (
            self.matter_const * bval ** (2.0 - self.matter_exponent)
            + self.lambda_const * bval * bval
            - self.curvature
        )


class EquationOfStateModel(CosmologyModel):
    """Scale driven by pressure = sigma * density * c^2; same family as a(t)."""

    def __init__(self, n: int, sigma: float, b0: float, db0: float, kappa: float = 1.0):
        self.n = n
        self.sigma = sigma
        self.b0 = b0
        self.db0 = db0
        self.kappa = kappa
        self._sf = ScaleFactor(ScaleFactorParams(n=n, sigma=sigma, a0=b0, a1=db0))
        self.matter_exponent = n * (1.0 + sigma)
        self.matter_const = db0 * db0 * b0 ** (self.matter_exponent - 2.0)
        self.lambda_const = 0.0
        self.curvature = 0.0
        self.domain = (0.0, self._sf.t_horizon)
        # keep the check window short of T0: derivatives of b grow unboundedly
        # toward a finite horizon and would drown the difference stencil
        hi = min(3.0, 0.55 * self._sf.t_horizon)
        self.sample_window = (0.05 * hi, hi)
        self.name = f"equation-of-state(sigma={sigma})"

    def b(self, x0: float) -> float:
        return self._sf.a(self._check_x0(x0))

    def rho_c2(self, x0: float) -> float:
        """Effective energy density (n-1)/2 * n/kappa * db0^2 b0^(m-2) * b^-m."""
        bval = self.b(x0)
        return (
            0.5 * (self.n - 1) * self.n / self.kappa
            * self.db0**2 * self.b0 ** (self.matter_exponent - 2.0)
            * bval ** (-self.matter_exponent)
        )


class LinearScaleModel(CosmologyModel):
    """Empty space: b = b0 + branch * sqrt(-curvature) * x0 (curvature <= 0)."""

    def __init__(self, n: int, b0: float, curvature: float = 0.0, branch: int = +1):
        if curvature > 0:
            raise ValueError("kinematic branch requires curvature <= 0")
        self.n = n
        self.b0 = b0
        self.curvature = curvature
        self.matter_const = 0.0
        self.lambda_const = 0.0
        self.matter_exponent = float(n)
        self.slope = branch * math.sqrt(-curvature)
        if self.slope < 0:
            hi = b0 / -self.slope
        else:
            hi = math.inf
        self.domain = (0.0, hi)
        self.sample_window = (0.05, min(3.0, 0.8 * hi))
        self.name = "milne" if curvature < 0 else "minkowski"

    def b(self, x0: float) -> float:
        return self.b0 + self.slope * self._check_x0(x0)


class SineScaleModel(CosmologyModel):
    """Negative Lambda, nonpositive curvature: b = sqrt(curv/L) * sin(sqrt(-L) x0)."""

    def __init__(self, n: int, lambda_const: float, curvature: float):
        if lambda_const >= 0 or curvature > 0:
            raise ValueError("sine branch requires L < 0 and curvature <= 0")
        self.n = n
        self.lambda_const = lambda_const
        self.curvature = curvature
        self.matter_const = 0.0
        self.matter_exponent = float(n)
        self.rate = math.sqrt(-lambda_const)
        self.amp = math.sqrt(abs(curvature / lambda_const))
        self.domain = (0.0, math.pi / self.rate)
        self.sample_window = (0.1 * self.domain[1], 0.9 * self.domain[1])
        self.name = "negative-lambda"

    def b(self, x0: float) -> float:
        return self.amp * math.sin(self.rate * self._check_x0(x0))


class ExpScaleModel(CosmologyModel):
    """Flat pure-Lambda expansion: b = b0 * exp(branch * sqrt(L) * x0)."""

    def __init__(self, n: int, lambda_const: float, b0: float, branch: int = +1):
        if lambda_const <= 0:
            raise ValueError("exponential branch requires L > 0")
        self.n = n
        self.b0 = b0
        self.lambda_const = lambda_const
        self.curvature = 0.0
        self.matter_const = 0.0
        self.matter_exponent = float(n)
        self.rate = branch * math.sqrt(lambda_const)
        self.domain = (0.0, math.inf)
        self.sample_window = (0.05, 3.0)
        self.name = "de-sitter-flat"

    def b(self, x0: float) -> float:
        return self.b0 * math.exp(self.rate * self._check_x0(x0))


class CoshScaleModel(CosmologyModel):
    """Closed pure-Lambda bounce: b = sqrt(curv/L) * cosh(sqrt(L) x0)."""

    def __init__(self, n: int, lambda_const: float, curvature: float):
        if lambda_const <= 0 or curvature <= 0:
            raise ValueError("cosh branch requires L > 0 and curvature > 0")
        self.n = n
        self.lambda_const = lambda_const
        self.curvature = curvature
        self.matter_const = 0.0
        self.matter_exponent = float(n)
        self.rate = math.sqrt(lambda_const)
        self.amp = math.sqrt(curvature / lambda_const)
        self.domain = (0.0, math.inf)
        self.sample_window = (0.05, 3.0)
        self.name = "de-sitter-closed"

    def b(self, x0: float) -> float:
        return self.amp * math.cosh(self.rate * self._check_x0(x0))


class SinhScaleModel(CosmologyModel):
    """Open pure-Lambda expansion: b = sqrt(-curv/L) * sinh(sqrt(L) x0)."""

    def __init__(self, n: int, lambda_const: float, curvature: float):
        if lambda_const <= 0 or curvature >= 0:
            raise ValueError("sinh branch requires L > 0 and curvature < 0")
        self.n = n
        self.lambda_const = lambda_const
        self.curvature = curvature
        self.matter_const = 0.0
        self.matter_exponent = float(n)
        self.rate = math.sqrt(lambda_const)
        self.amp = math.sqrt(-curvature / lambda_const)
        self.domain = (0.0, math.inf)
        self.sample_window = (0.1, 3.0)
        self.name = "de-sitter-open"

    def b(self, x0: float) -> float:
        return self.amp * math.sinh(self.rate * self._check_x0(x0))


class PowerMatterModel(CosmologyModel):
    """Flat pure matter: b = (b0**(n/2) + branch * n*sqrt(R)*x0/2)**(2/n)."""

    def __init__(self, n: int, matter_const: float, b0: float, branch: int = +1):
        if matter_const <= 0:
            raise ValueError("matter branch requires R > 0")
        self.n = n
        self.b0 = b0
        self.matter_const = matter_const
        self.lambda_const = 0.0
        self.curvature = 0.0
        self.matter_exponent = float(n)
        self.rate = branch * 0.5 * n * math.sqrt(matter_const)
        if self.rate < 0:
            hi = b0 ** (n / 2.0) / -self.rate
        else:
            hi = math.inf
        self.domain = (0.0, hi)
        self.sample_window = (0.05, min(3.0, 0.8 * hi))
        self.name = f"matter-flat(n={n})"

    def b(self, x0: float) -> float:
        base = self.b0 ** (self.n / 2.0) + self.rate * self._check_x0(x0)
        return base ** (2.0 / self.n)


class _ParametricMatterModel(CosmologyModel):
    """Curved pure matter, given implicitly through a development angle theta."""

    _theta_max: float

    def __init__(self, n: int, matter_const: float, curvature: float):
        if matter_const <= 0:
            raise ValueError("matter branch requires R > 0")
        self.n = n
        self.matter_const = matter_const
        self.lambda_const = 0.0
        self.curvature = curvature
        self.matter_exponent = float(n)
        ex = 1.0 / (n - 2)
        self._ex = ex
        self._scale = abs(curvature) ** (0.5 + ex) * matter_const ** (-ex) * (n - 2) / 2.0

    def _profile(self, theta: float) -> float:
        raise NotImplementedError

    def _b_of_theta(self, theta: float) -> float:
        return (self.matter_const * self._profile(theta) / abs(self.curvature)) ** self._ex

    def _x0_of_theta(self, theta: float) -> float:
        val, _ = quad(lambda th: self._profile(th) ** self._ex, 0.0, theta,
                      epsabs=1e-13, epsrel=1e-13, limit=200)
        return val / self._scale

    def b(self, x0: float) -> float:
        x0 = self._check_x0(x0)
        if x0 == 0.0:
            return self._b_of_theta(0.0)
        theta = brentq(lambda th: self._x0_of_theta(th) - x0, 0.0, self._theta_max,
                       xtol=1e-14, rtol=8.9e-16)
        return self._b_of_theta(theta)


class ClosedMatterModel(_ParametricMatterModel):
    """Positive curvature matter cycloid: b = (R sin^2(theta) / curv)**(1/(n-2))."""

    def __init__(self, n: int, matter_const: float, curvature: float):
        if curvature <= 0:
            raise ValueError("closed branch requires curvature > 0")
        super().__init__(n, matter_const, curvature)
        self._theta_max = math.pi
        hi = self._x0_of_theta(math.pi)
        self.domain = (0.0, hi)
        self.sample_window = (0.1 * hi, 0.9 * hi)
        self.name = f"matter-closed(n={n})"

    def _profile(self, theta: float) -> float:
        return math.sin(theta) ** 2


class OpenMatterModel(_ParametricMatterModel):
    """Negative curvature matter expansion: b = (R sinh^2(theta)/|curv|)**(1/(n-2))."""

    def __init__(self, n: int, matter_const: float, curvature: float):
        if curvature >= 0:
            raise ValueError("open branch requires curvature < 0")
        super().__init__(n, matter_const, curvature)
        theta_max = 1.0
        while self._x0_of_theta(theta_max) < 10.0:
            theta_max *= 2.0
        self._theta_max = theta_max
        self.domain = (0.0, math.inf)
        self.sample_window = (0.2, 3.0)
        self.name = f"matter-open(n={n})"

    def _profile(self, theta: float) -> float:
        return math.sinh(theta) ** 2


def static_threshold(n: int, matter_const: float, curvature: float) -> float:
    """Lambda value L0 = (curv/2)**(n/(n-2)) * R**(-2/(n-2)) balancing the constraint.

    At L = L0 the scale b* = (R/L)**(1/n) makes the constraint right-hand side
    vanish, so the constant solution b == b* satisfies it identically.
    """
    if curvature <= 0 or matter_const <= 0:
        raise ValueError("static balance requires R > 0 and curvature > 0")
    return (0.5 * curvature) ** (n / (n - 2.0)) * matter_const ** (-2.0 / (n - 2.0))


class StaticBalanceModel(CosmologyModel):
    """Constant scale b == b* = (R/L0)**(1/n) at the balancing Lambda L0."""

    def __init__(self, n: int, matter_const: float, curvature: float):
        self.n = n
        self.matter_const = matter_const
        self.curvature = curvature
        self.lambda_const = static_threshold(n, matter_const, curvature)
        self.matter_exponent = float(n)
        self.b_star = (matter_const / self.lambda_const) ** (1.0 / n)
        self.b0 = self.b_star
        self.domain = (0.0, math.inf)
        self.sample_window = (0.05, 3.0)
        self.name = "einstein-static"

    def b(self, x0: float) -> float:
        self._check_x0(x0)
        return self.b_star


class MatterLambdaModel(CosmologyModel):
    """Matter plus positive Lambda; closed form only for monotone-expanding data.

    ``classify`` reports the qualitative fate of b by analyzing the constraint
    right-hand side F(b): strictly positive F gives unbounded expansion, a
    double root gives asymptotic approach to the static scale, and a sign
    change confines b below the lower turning point (eventual recollapse) or
    above the upper one (expansion).  ``b`` itself is evaluated by inverting
    x0(b) = integral db/sqrt(F) and exists only on the expanding branch.
    """

    def __init__(self, n: int, matter_const: float, lambda_const: float,
                 curvature: float, b0: float):
        if matter_const <= 0 or lambda_const <= 0:
            raise ValueError("matter-plus-Lambda branch requires R > 0 and L > 0")
        self.n = n
        self.matter_const = matter_const
        self.lambda_const = lambda_const
        self.curvature = curvature
        self.matter_exponent = float(n)
        self.b0 = b0
        if self.energy_rhs(b0) < 0:
            raise ValueError("b0 lies in the forbidden region of the constraint")
        self.domain = (0.0, math.inf)
        self.sample_window = (0.05, 3.0)
        self.name = "matter-lambda"

    def _critical_scale(self) -> float:
        # minimum of F(b) = R b^{2-n} + L b^2 - curv over b > 0
        return ((self.n - 2) * self.matter_const / (2.0 * self.lambda_const)) ** (1.0 / self.n)

    def classify(self, tol: float = 1e-12) -> str:
        """Qualitative fate: expands-to-infinity / approaches-static / static /
        recollapses."""
        b_c = self._critical_scale()
        f_min = self.energy_rhs(b_c)
        scale = abs(self.curvature) + self.matter_const
        if f_min > tol * scale:
            return "expands-to-infinity"
        if abs(f_min) <= tol * scale:
            if math.isclose(self.b0, b_c, rel_tol=1e-9):
                return "static"
            return "approaches-static" if self.b0 < b_c else "expands-to-infinity"
        b_lo = brentq(self.energy_rhs, 1e-12 * b_c, b_c, xtol=1e-15)
        b_hi = brentq(self.energy_rhs, b_c, 1e12 * b_c, xtol=1e-15)
        if self.b0 <= b_lo:
            return "recollapses"
        if self.b0 >= b_hi:
            return "expands-to-infinity"
        raise ValueError("b0 lies in the forbidden region of the constraint")

    def b(self, x0: float) -> float:
        x0 = self._check_x0(x0)
        if self.classify() != "expands-to-infinity" or self.energy_rhs(self.b0) <= 0:
            raise UnsupportedCaseError(
                f"{self.name}: no closed-form scale for fate '{self.classify()}'"
            )
        if x0 == 0.0:
            return self.b0

        def elapsed(bval: float) -> float:
            val, _ = quad(lambda bb: self.energy_rhs(bb) ** -0.5, self.b0, bval,
                          epsabs=1e-13, epsrel=1e-13, limit=200)
            return val

        hi = 2.0 * self.b0
        while elapsed(hi) < x0:
            hi *= 2.0
        return brentq(lambda bb: elapsed(bb) - x0, self.b0, hi, xtol=1e-14, rtol=8.9e-16)


# ---------------------------------------------------------------------------
# residual checkers
# ---------------------------------------------------------------------------


def _fd_step(model: CosmologyModel, x0: float, h: float | None) -> float:
    if h is None:
        h = 1e-3
    lo, hi = model.domain
    room = min(x0 - lo, (hi - x0) if math.isfinite(hi) else math.inf) / 2.5
    if room <= 0:
        raise ValueError(f"{model.name}: x0 = {x0} leaves no room for differences")
    return min(h, room)


def _fd1(f, x0: float, h: float) -> float:
    # 4th-order central first derivative
    return (-f(x0 + 2 * h) + 8 * f(x0 + h) - 8 * f(x0 - h) + f(x0 - 2 * h)) / (12 * h)


def _fd2(f, x0: float, h: float) -> float:
    # 4th-order central second derivative
    return (
        -f(x0 + 2 * h) + 16 * f(x0 + h) - 30 * f(x0) + 16 * f(x0 - h) - f(x0 - 2 * h)
    ) / (12 * h * h)


def friedmann_residual(model: CosmologyModel, x0: float, h: float | None = None) -> float:
    """|(db/dx0)**2 - (R b**(2-m) + L b**2 - curvature)| with db/dx0 by differences."""
    h = _fd_step(model, x0, h)
    db = _fd1(model.b, x0, h)
    return abs(db * db - model.energy_rhs(model.b(x0)))


def raychaudhuri_residual(model: EquationOfStateModel, x0: float,
                          sigma: float | None = None, h: float | None = None) -> float:
    """Residual of the acceleration equation for an equation-of-state model.

    Checks d2b/dx0^2 / b = -(n-2+n*sigma)/2 * db0^2 * b0**(m-2) * b**(-m).
    """
    if not isinstance(model, EquationOfStateModel):
        raise ValueError("acceleration check applies to equation-of-state models")
    if sigma is None:
        sigma = model.sigma
    if sigma != model.sigma:
        raise ValueError("sigma does not match the model equation of state")
    n = model.n
    h = _fd_step(model, x0, h)
    d2b = _fd2(model.b, x0, h)
    bval = model.b(x0)
    m = n * (1.0 + sigma)
    target = -0.5 * (n - 2 + n * sigma) * model.db0**2 * model.b0 ** (m - 2.0) * bval ** (-m)
    return abs(d2b / bval - target)


def mass_conservation_residual(model: EquationOfStateModel, x0: float,
                               sigma: float | None = None, h: float | None = None) -> float:
    """Residual of d(rho*c^2*b^n)/dx0 + pressure * d(b^n)/dx0 with pressure = sigma*rho*c^2."""
    if not isinstance(model, EquationOfStateModel):
        raise ValueError("mass-conservation check applies to equation-of-state models")
    if sigma is None:
        sigma = model.sigma
    if sigma != model.sigma:
        raise ValueError("sigma does not match the model equation of state")
    h = _fd_step(model, x0, h)
    n = model.n

    def rho_bn(x):
        return model.rho_c2(x) * model.b(x) ** n

    def bn(x):
        return model.b(x) ** n

    return abs(_fd1(rho_bn, x0, h) + sigma * model.rho_c2(x0) * _fd1(bn, x0, h))


# ---------------------------------------------------------------------------
# catalogue
# ---------------------------------------------------------------------------


def model_catalogue() -> dict[str, CosmologyModel]:
    """Named O(1)-parameter instances of every supported scale solution."""
    curv = 1.0
    R = 1.0
    l0 = static_threshold(3, R, curv)
    return {
        "minkowski": LinearScaleModel(n=3, b0=1.0, curvature=0.0),
        "milne": LinearScaleModel(n=3, b0=1.0, curvature=-1.0, branch=+1),
        "negative-lambda": SineScaleModel(n=3, lambda_const=-1.0, curvature=-1.0),
        "de-sitter-flat": ExpScaleModel(n=3, lambda_const=1.0, b0=1.0),
        "de-sitter-closed": CoshScaleModel(n=3, lambda_const=1.0, curvature=1.0),
        "de-sitter-open": SinhScaleModel(n=3, lambda_const=1.0, curvature=-1.0),
        "einstein-de-sitter": PowerMatterModel(n=3, matter_const=1.0, b0=1.0),
        "einstein-de-sitter-n4": PowerMatterModel(n=4, matter_const=1.0, b0=1.0),
        "friedmann-closed": ClosedMatterModel(n=3, matter_const=1.0, curvature=1.0),
        "friedmann-open": OpenMatterModel(n=3, matter_const=1.0, curvature=-1.0),
        "einstein-static": StaticBalanceModel(n=3, matter_const=R, curvature=curv),
        "lemaitre": MatterLambdaModel(n=3, matter_const=R, lambda_const=0.2,
                                      curvature=curv, b0=1.0),
        "eddington-lemaitre": MatterLambdaModel(n=3, matter_const=R, lambda_const=l0,
                                                curvature=curv, b0=2.2),
        "dust": EquationOfStateModel(n=3, sigma=0.0, b0=1.0, db0=1.0),
        "radiation": EquationOfStateModel(n=3, sigma=1.0 / 3.0, b0=1.0, db0=1.0),
        "stiff": EquationOfStateModel(n=3, sigma=1.0, b0=1.0, db0=1.0),
        "vacuum-energy": EquationOfStateModel(n=3, sigma=-1.0, b0=1.0, db0=0.5),
        "big-rip": EquationOfStateModel(n=3, sigma=-1.5, b0=1.0, db0=0.5),
    }
