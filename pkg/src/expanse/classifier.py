"""Symbolic regime classification for the evolution problem.

Given the problem parameters (dimension, background, coupling, phase, power,
regularity), this module computes every printed threshold, decides local
well-posedness and small-data global existence, evaluates the four large-data
corollary hypothesis lists, and evaluates the weighted space-time norm

    A = || a(s)^2 w(s)^(p-1) ||_{L^q((0,S))},   1/q = 1 - (p-1)*(n-2*mu0)/4

in closed form.  Finiteness of A over the full window is exactly what powers
the small-data verdicts, and ``eval_A`` reproduces that equivalence.

Everything here is arithmetic on the parameters; no simulation output is
inspected except through the caller-provided sign of the initial energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.integrate import quad

from .background import ScaleFactor, ScaleFactorParams

__all__ = [
    "ProblemSpec",
    "RegimeReport",
    "SmallDataVerdict",
    "CorollaryCheck",
    "thresholds",
    "theorem1_verdict",
    "corollary_verdict",
    "eval_A",
    "eval_A_quadrature",
    "classify",
    "CONDITION_DESCRIPTIONS",
]

_REL_TOL = 1e-12


def _close(x: float, y: float) -> bool:
    return math.isclose(x, y, rel_tol=_REL_TOL, abs_tol=1e-300)


def _pow(base: float, exponent: float) -> float:
    """base**exponent extended to base in {0, inf} without raising."""
    if exponent == 0.0:
        return 1.0
    if base == 0.0:
        return math.inf if exponent < 0 else 0.0
    if math.isinf(base):
        return math.inf if exponent > 0 else 0.0
    return base**exponent


@dataclass(frozen=True)
class ProblemSpec:
    """Full parameter set: background (n, sigma, a0, a1), coupling lambda,
    metric phase omega with its sign convention, power p and regularity mu0."""

    n: int
    sigma: float
    a0: float
    a1: float
    lam: complex
    omega: float
    sign: int
    p: float
    mu0: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("spatial dimension n must be >= 1")
        if not self.a0 > 0:
            raise ValueError("a0 must be positive")
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        if not 0 <= self.mu0 < self.n / 2:
            raise ValueError(f"regularity mu0 must satisfy 0 <= mu0 < n/2 = {self.n / 2}")
        if self.p < 1:
            raise ValueError("power p must be >= 1")

    @property
    def scale_params(self) -> ScaleFactorParams:
        return ScaleFactorParams(n=self.n, sigma=self.sigma, a0=self.a0, a1=self.a1)

    def admissible_phase(self) -> tuple[bool, str]:
        """Phase constraint 0 <= sign*omega <= pi/2 with omega != -pi/2."""
        if _close(self.omega, -math.pi / 2):
            return False, "omega = -pi/2 is excluded"
        so = self.sign * self.omega
        if so < -1e-15 or so > math.pi / 2 + 1e-15:
            return False, f"sign*omega = {so:.6g} outside [0, pi/2]"
        return True, "ok"


CONDITION_DESCRIPTIONS = {
    "i": "mu0 = 0 and p at the scaling-critical power",
    "ii": "mu0 > 0, p at the scaling-critical power, a1 >= 0",
    "iii": "1 < p < critical, a1 > 0, sigma < -1 (Big-Rip window)",
    "iv": "1 < p < intermediate threshold, a1 < 0, sigma > -1",
    "v": "intermediate threshold < p < critical, a1 > 0, sigma > -1",
    "vi": "mu0 > 0, 1 < p < critical, a1 > 0, sigma = -1",
}


def p_critical(n: int, mu0: float) -> float:
    """Scaling-critical power 1 + 4/(n - 2*mu0)."""
    return 1.0 + 4.0 / (n - 2.0 * mu0)


def p_intermediate(n: int, sigma: float, mu0: float) -> float | None:
    """Threshold 1 + 4/(n-2mu0) * (1 + 4/(n-2mu0) * 2mu0/(n(1+sigma)))**-1.

    Only defined for sigma != -1; separates the a1 < 0 and a1 > 0 small-data
    windows below the critical power.
    """
    if sigma == -1.0:
        return None
    g = 4.0 / (n - 2.0 * mu0)
    return 1.0 + g / (1.0 + g * 2.0 * mu0 / (n * (1.0 + sigma)))


def sin_2omega(omega: float) -> float:
    """sin(2*omega) snapped to exact zero at the conservative phases."""
    s = math.sin(2.0 * omega)
    return 0.0 if abs(s) < 1e-12 else s


def p_parabolic_floor(omega: float) -> float:
    """Blow-up threshold 2/sin(2*omega)**2 - 1; infinite at omega in {0, pi/2}."""
    s = sin_2omega(omega)
    if s == 0.0:
        return math.inf
    return 2.0 / (s * s) - 1.0


def q_exponent(n: int, mu0: float, p: float) -> float:
    """Lebesgue exponent q with 1/q = 1 - (p-1)*(n-2*mu0)/4 (inf at criticality)."""
    qinv = 1.0 - (p - 1.0) * (n - 2.0 * mu0) / 4.0
    if _close(qinv, 0.0) or qinv == 0.0:
        return math.inf
    return 1.0 / qinv


@dataclass
class SmallDataVerdict:
    local_wellposed: bool
    local_reason: str
    fired_condition: str | None  # one of "i".."vi"
    small_data_global: bool


@dataclass
class CorollaryCheck:
    """Hypothesis audit of one large-data statement."""

    name: str
    conclusion: str
    satisfied: list[str] = field(default_factory=list)
    violated: list[str] = field(default_factory=list)
    unverifiable: list[str] = field(default_factory=list)

    @property
    def applicable(self) -> str:
        if self.violated:
            return "no"
        if self.unverifiable:
            return "undetermined"
        return "yes"


@dataclass
class RegimeReport:
    """Thresholds plus (optionally) the theorem/corollary verdicts."""

    p_crit: float
    p1_crit: float | None
    p0_crit: float
    q_mu0: float
    t_horizon: float
    s_horizon: float
    small_data: SmallDataVerdict | None = None
    corollaries: dict[str, CorollaryCheck] = field(default_factory=dict)
    A_full_window: float | None = None


def thresholds(spec: ProblemSpec) -> RegimeReport:
    """All printed thresholds for the given spec; inf where denominators vanish."""
    params = spec.scale_params
    sf = ScaleFactor(params)
    return RegimeReport(
        p_crit=p_critical(spec.n, spec.mu0),
        p1_crit=p_intermediate(spec.n, spec.sigma, spec.mu0),
        p0_crit=p_parabolic_floor(spec.omega),
        q_mu0=q_exponent(spec.n, spec.mu0, spec.p),
        t_horizon=params.t_horizon,
        s_horizon=sf.s_horizon,
    )


def _is_odd_integer(p: float) -> bool:
    return float(p).is_integer() and int(p) % 2 == 1


def theorem1_verdict(spec: ProblemSpec) -> SmallDataVerdict:
    """Local well-posedness applicability and the fired small-data condition.

    Raises on an inadmissible phase; an out-of-range power or regularity is a
    verdict (not an error) so parameter sweeps stay total.
    """
    ok, reason = spec.admissible_phase()
    if not ok:
        raise ValueError(f"inadmissible phase: {reason}")

    pc = p_critical(spec.n, spec.mu0)
    if spec.p > pc and not _close(spec.p, pc):
        return SmallDataVerdict(False, f"power p = {spec.p:.6g} above critical {pc:.6g}",
                                None, False)
    if not _is_odd_integer(spec.p) and spec.mu0 >= spec.p:
        return SmallDataVerdict(False,
                                "non-odd power requires regularity mu0 < p",
                                None, False)

    reason = ("critical power: existence time depends on the data profile"
              if _close(spec.p, pc) else "subcritical power")
    fired = _fired_condition(spec, pc)
    return SmallDataVerdict(True, reason, fired, fired is not None)


def _fired_condition(spec: ProblemSpec, pc: float) -> str | None:
    p, mu0, a1, sigma = spec.p, spec.mu0, spec.a1, spec.sigma
    at_crit = _close(p, pc)
    if at_crit:
        if mu0 == 0.0:
            return "i"
        if a1 >= 0:
            return "ii"
        return None
    if not 1.0 < p < pc:
        return None
    if sigma < -1.0:
        return "iii" if a1 > 0 else None
    if sigma == -1.0:
        return "vi" if (mu0 > 0 and a1 > 0) else None
    p1 = p_intermediate(spec.n, sigma, mu0)
    if a1 < 0 and p < p1 and not _close(p, p1):
        return "iv"
    if a1 > 0 and p > p1 and not _close(p, p1):
        return "v"
    return None


def corollary_verdict(spec: ProblemSpec, energy_sign: int | None = None,
                      has_weighted_l2: bool | None = None) -> dict[str, CorollaryCheck]:
    """Audit each large-data statement's hypothesis list literally.

    ``energy_sign`` is the caller-known sign of the initial energy (None when
    unknown) and ``has_weighted_l2`` whether |x|*u0 is square-integrable.
    """
    ok, reason = spec.admissible_phase()
    if not ok:
        raise ValueError(f"inadmissible phase: {reason}")
    if spec.lam.imag != 0.0:
        raise ValueError("large-data corollaries require a real coupling lambda")
    lam = spec.lam.real
    n, p, mu0, a1, omega = spec.n, spec.p, spec.mu0, spec.a1, spec.omega
    p_mass_crit = 1.0 + 4.0 / n
    p_energy_crit = math.inf if n <= 2 else 1.0 + 4.0 / (n - 2.0)
    s0 = ScaleFactor(spec.scale_params).s_horizon
    conservative_phase = sin_2omega(omega) == 0.0
    drift = a1 * (p - 1.0 - 4.0 / n)

    out: dict[str, CorollaryCheck] = {}

    def req(check: CorollaryCheck, desc: str, status: bool | None) -> None:
        if status is None:
            check.unverifiable.append(desc)
        elif status:
            check.satisfied.append(desc)
        else:
            check.violated.append(desc)

    c1 = CorollaryCheck("defocusing-global",
                        "every H^mu0 datum evolves globally")
    req(c1, "lambda > 0", lam > 0)
    req(c1, "mu0 in {0, 1}", mu0 in (0.0, 1.0))
    if mu0 == 1.0:
        req(c1, "1 <= p < energy-critical power", 1.0 <= p < p_energy_crit)
        req(c1, "a1*(p - 1 - 4/n) >= 0", drift >= 0)
    else:
        req(c1, "1 <= p < mass-critical power 1 + 4/n", 1.0 <= p < p_mass_crit)
    out[c1.name] = c1

    c2 = CorollaryCheck("focusing-global",
                        "every H^1 datum evolves globally")
    req(c2, "lambda < 0", lam < 0)
    req(c2, "mu0 = 1", mu0 == 1.0)
    req(c2, "a1 >= 0", a1 >= 0)
    req(c2, "1 <= p < mass-critical power 1 + 4/n", 1.0 <= p < p_mass_crit)
    req(c2, "omega in {0, pi/2}", conservative_phase)
    out[c2.name] = c2

    p0 = p_parabolic_floor(omega)
    c3 = CorollaryCheck("dissipative-blowup",
                        "negative-energy data blow up in finite time")
    req(c3, "lambda < 0", lam < 0)
    req(c3, "mu0 = 1", mu0 == 1.0)
    req(c3, "omega strictly between 0 and pi/2 in modulus", not conservative_phase)
    req(c3, "p above the phase floor 2/sin(2w)^2 - 1", p > p0)
    req(c3, "p <= energy-critical power", p <= p_energy_crit)
    req(c3, "a1*(p - 1 - 4/n) <= 0", drift <= 0)
    req(c3, "unbounded s-horizon", math.isinf(s0))
    req(c3, "negative initial energy",
        None if energy_sign is None else energy_sign < 0)
    out[c3.name] = c3

    c4 = CorollaryCheck("variance-blowup",
                        "negative-energy weighted data blow up in finite time")
    req(c4, "lambda < 0", lam < 0)
    req(c4, "mu0 = 1", mu0 == 1.0)
    req(c4, "omega in {0, pi/2}", conservative_phase)
    req(c4, "mass-critical <= p <= energy-critical", p_mass_crit <= p <= p_energy_crit)
    req(c4, "a1 <= 0", a1 <= 0)
    req(c4, "unbounded s-horizon", math.isinf(s0))
    req(c4, "finite variance: |x| u0 in L^2",
        None if has_weighted_l2 is None else bool(has_weighted_l2))
    req(c4, "negative initial energy",
        None if energy_sign is None else energy_sign < 0)
    out[c4.name] = c4
    return out


# ---------------------------------------------------------------------------
# the weighted space-time norm A
# ---------------------------------------------------------------------------


def eval_A(spec: ProblemSpec, window: float = math.inf, window_kind: str = "s") -> float:
    """Closed-form A = ||a^2 w^(p-1)||_{L^q} over a window in s- or t-time.

    ``window = inf`` means the full domain (up to the horizon).  Returns inf
    when the norm diverges; raises for p above the critical power.
    """
    if window_kind not in ("s", "t"):
        raise ValueError("window_kind must be 's' or 't'")
    if window < 0:
        raise ValueError("window must be nonnegative")
    n, sigma, a0, a1, p, mu0 = spec.n, spec.sigma, spec.a0, spec.a1, spec.p, spec.mu0
    pc = p_critical(n, mu0)
    at_crit = _close(p, pc)
    if p > pc and not at_crit:
        raise ValueError(f"p = {p} above the critical power {pc}")

    sf = ScaleFactor(spec.scale_params)
    if window_kind == "s":
        if math.isinf(window) or window >= sf.s_horizon:
            if math.isfinite(window) and not _close(window, sf.s_horizon):
                raise ValueError("s-window extends past the horizon")
            T = sf.t_horizon
            full = True
        else:
            T = sf.t_of_s(window)
            full = False
    else:
        if window > sf.t_horizon and not math.isinf(window):
            if not _close(window, sf.t_horizon):
                raise ValueError("t-window extends past the background domain")
        T = min(window, sf.t_horizon)
        full = math.isinf(window) or _close(window, sf.t_horizon)

    # U = 1 + n*a1*(1+sigma)*T/(2*a0), the power-law base at the window end;
    # U -> 0 at a finite collapse/blow-up time and -> inf on expanding domains
    if sigma != -1.0:
        if math.isinf(T):
            U = math.inf if sf.kappa_rate > 0 else 1.0
        elif full:
            U = 0.0
        else:
            U = 1.0 + sf.kappa_rate * T
    else:
        U = None

    if at_crit:
        return _eval_A_critical(spec, T, U)

    q = q_exponent(n, mu0, p)
    prefactor = a0 ** ((p - 1.0) * (n - 2.0 * mu0) / 2.0)
    if sigma != -1.0:
        alpha = 2.0 * (p - 1.0) * mu0 * q / (n * (1.0 + sigma))
        if a1 == 0.0:
            factor = T
        elif _close(alpha, 1.0):
            # hit exactly at the intermediate threshold p = p1(mu0)
            logU = math.log(U) if U > 0 else -math.inf
            factor = 2.0 * a0 / (n * a1 * (1.0 + sigma)) * logU
        else:
            coef = 2.0 * a0 / (n * a1 * (1.0 - alpha) * (1.0 + sigma))
            factor = coef * (_pow(U, 1.0 - alpha) - 1.0)
    else:
        beta = a1 * (p - 1.0) * mu0 * q / a0
        if beta == 0.0:
            factor = T
        elif math.isinf(T):
            factor = 1.0 / beta if beta > 0 else math.inf
        else:
            factor = -math.expm1(-beta * T) / beta
    if math.isnan(factor):  # inf - inf style degeneracies never occur in-range
        raise ArithmeticError("indeterminate window factor")
    if factor in (math.inf, -math.inf):
        return math.inf
    return prefactor * _pow(factor, 1.0 / q)


def _eval_A_critical(spec: ProblemSpec, T: float, U: float | None) -> float:
    """Sup-norm branch at p = p(mu0): the coefficient is monotone in time."""
    n, sigma, a0, a1, mu0 = spec.n, spec.sigma, spec.a0, spec.a1, spec.mu0
    if a1 >= 0:
        return a0 * a0
    if sigma != -1.0:
        expo = -8.0 * mu0 / (n * (1.0 + sigma) * (n - 2.0 * mu0))
        return a0 * a0 * _pow(U, expo)
    if math.isinf(T):
        return math.inf if mu0 > 0 else a0 * a0
    return a0 * a0 * math.exp(-4.0 * mu0 * a1 * T / (a0 * (n - 2.0 * mu0)))


def eval_A_quadrature(spec: ProblemSpec, window_s: float) -> float:
    """Direct numerical L^q norm of a(s)^2 w(s)^(p-1) over (0, window_s)."""
    sf = ScaleFactor(spec.scale_params)
    q = q_exponent(spec.n, spec.mu0, spec.p)
    if math.isinf(q):
        raise ValueError("quadrature path needs a finite exponent (p below critical)")

    def integrand(s: float) -> float:
        return sf.coefficient(s, spec.p) ** q

    val, _ = quad(integrand, 0.0, window_s, epsabs=1e-14, epsrel=1e-12, limit=500)
    return val ** (1.0 / q)


def classify(spec: ProblemSpec, energy_sign: int | None = None,
             has_weighted_l2: bool | None = None) -> RegimeReport:
    """Thresholds, the theorem verdict, the corollary audits and A(full window)."""
    report = thresholds(spec)
    report.small_data = theorem1_verdict(spec)
    if spec.lam.imag == 0.0:
        report.corollaries = corollary_verdict(spec, energy_sign, has_weighted_l2)
    report.A_full_window = eval_A(spec, math.inf, "s")
    return report
