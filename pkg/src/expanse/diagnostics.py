"""Balance-law monitors along a trajectory.

For the gauge-invariant nonlinearity with real coupling the flow obeys two
exact identities (charge and energy balance) together with virial and
Heisenberg inequalities:

  charge:  (m/hbar)||u(s)||^2 + sign*sin(2w) * int_0^s [ ||grad u||^2
               + lam * a^2 w^(p-1) * ||u||_{p+1}^{p+1} ] dtau  = (m/hbar)||u0||^2

  energy:  E(s) + sign*(2m sin(2w)/hbar) * int ||du/ds||^2
               + int int I  = E(0),
           E(s) = 1/2 ||grad u||^2 + lam * a^2 w^(p-1)/(p+1) * ||u||_{p+1}^{p+1},
           int I dx = n/(2 a0^n) * a^(n+1) * (da/ds) * (p-1-4/n)
                      * lam * w^(p+1)/(p+1) * ||u||_{p+1}^{p+1}

The records store the instantaneous integrands next to trapezoid-accumulated
time integrals so the residual of each identity is available per step; du/ds
is evaluated from the equation's right-hand side spectrally, never by time
differencing, so the residuals measure quadrature error rather than modeling
error.  A concavity functional K(s) = int_0^s ||u||^2 + K0 provides an
a-priori blow-up bound S1 = K0 / (alpha ||u0||^2) whenever its certificate
K''K - (1+alpha)(K')^2 stays positive.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .grid import GridSpec, coords, grad_norm_sq, k_squared, l2_norm_sq, lp_integral, \
    radius_sq, wavenumbers

if TYPE_CHECKING:  # pragma: no cover - typing only
    from .solver import FieldState, SolverConfig, Status

__all__ = [
    "DiagnosticsRecord",
    "Trajectory",
    "compute_record",
    "charge_balance",
    "energy_balance",
    "virial_watch",
    "VirialSeries",
    "concavity_watch",
    "concavity_scan",
    "ConcavityReport",
]


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One per accepted step: functionals, identity integrands and residuals.

    Identity-specific fields are NaN on runs where the balance laws do not
    apply (gauge-variant nonlinearity or complex coupling).  ``K_value`` is
    the running integral of ||u||^2 (the concavity functional at K0 = 0).
    """

    s: float
    l2_sq: float
    charge: float
    grad_sq: float
    potential: float
    energy: float
    max_amp: float
    virial2: float
    heisenberg_slack: float
    gn_ratio: float
    charge_dissipation: float
    dsu_sq: float
    I_integral: float
    virial_rate: float
    K_value: float
    charge_dissipation_accum: float
    dsu_sq_accum: float
    I_accum: float
    charge_residual: float
    energy_residual: float
    charge0: float
    energy0: float


@dataclass
class Trajectory:
    """Records plus the terminal state of one evolution."""

    grid: GridSpec
    config: "SolverConfig"
    records: list[DiagnosticsRecord]
    status: "Status"
    final: "FieldState"
    accepted_steps: int

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def s_detect(self) -> float | None:
        return self.final.s_detect


def _identities_apply(cfg: "SolverConfig") -> bool:
    from .solver import Nonlinearity

    return cfg.nonlinearity is Nonlinearity.GAUGE_INVARIANT and cfg.lam.imag == 0.0


def compute_record(state: "FieldState", cfg: "SolverConfig",
                   prev: DiagnosticsRecord | None) -> DiagnosticsRecord:
    """Evaluate every monitored functional at the state's time."""
    grid, u, s = state.grid, state.u, state.s_now
    n = grid.dim
    p = cfg.p
    sf = cfg.background
    uhat = np.fft.fftn(u)

    l2_sq = l2_norm_sq(grid, u)
    grad_sq = grad_norm_sq(grid, u, uhat)
    pp_int = lp_integral(grid, u, p + 1.0)
    max_amp = float(np.max(np.abs(u)))
    virial2 = grid.cell_volume * float(np.sum(radius_sq(grid) * np.abs(u) ** 2))
    heis = (2.0 / n) * math.sqrt(max(grad_sq * virial2, 0.0)) - l2_sq
    charge = (cfg.m_mass / cfg.hbar) * l2_sq

    # Gagliardo-Nirenberg ratio, reported but never asserted (constant unknown)
    gn_pow_l2 = (p + 1.0 - n * (p - 1.0) / 2.0) / 2.0
    gn_pow_grad = n * (p - 1.0) / 4.0
    if l2_sq > 0 and grad_sq > 0:
        gn_ratio = pp_int / (l2_sq**gn_pow_l2 * grad_sq**gn_pow_grad)
    else:
        gn_ratio = math.nan

    coeff = sf.coefficient(s, p)
    if _identities_apply(cfg):
        lam = cfg.lam.real
        potential = lam * coeff * pp_int / (p + 1.0)
        energy = 0.5 * grad_sq + potential
        cdiss = grad_sq + lam * coeff * pp_int
        lap_u = np.fft.ifftn(-k_squared(grid) * uhat)
        dsu = cfg.dispersion_rate * lap_u
        if lam != 0.0:
            dsu = dsu + cfg.nonlinear_rate(s) * np.abs(u) ** (p - 1.0) * u
        dsu_sq = l2_norm_sq(grid, dsu)
        a_val = sf.a_of_s(s)
        w_val = sf.w_of_s(s)
        a0 = sf.params.a0
        I_int = (n / (2.0 * a0**n) * a_val ** (n + 1) * sf.da_ds(s)
                 * (p - 1.0 - 4.0 / n) * lam * w_val ** (p + 1.0) / (p + 1.0) * pp_int)
    else:
        potential = energy = cdiss = dsu_sq = I_int = math.nan

    if math.isclose(math.sin(2.0 * cfg.omega), 0.0, abs_tol=1e-15):
        # exp(-2i*omega) is +-1 here, so the rate identity is real-valued
        phase = round(math.cos(2.0 * cfg.omega))
        xgrad = np.zeros_like(u)
        for x, k in zip(coords(grid), wavenumbers(grid)):
            xgrad = xgrad + (x - grid.center) * np.fft.ifftn(1j * k * uhat)
        moment = grid.cell_volume * float(np.imag(np.sum(np.conj(u) * xgrad)))
        virial_rate = cfg.sign * (2.0 * cfg.hbar / cfg.m_mass) * phase * moment
    else:
        virial_rate = math.nan

    if prev is None:
        k_val = cd_acc = ds_acc = i_acc = 0.0
        charge0, energy0 = charge, energy
    else:
        ds = s - prev.s
        k_val = prev.K_value + 0.5 * (l2_sq + prev.l2_sq) * ds
        cd_acc = prev.charge_dissipation_accum + 0.5 * (cdiss + prev.charge_dissipation) * ds
        ds_acc = prev.dsu_sq_accum + 0.5 * (dsu_sq + prev.dsu_sq) * ds
        i_acc = prev.I_accum + 0.5 * (I_int + prev.I_integral) * ds
        charge0, energy0 = prev.charge0, prev.energy0

    sin2w = math.sin(2.0 * cfg.omega)
    charge_residual = charge + cfg.sign * sin2w * cd_acc - charge0
    energy_residual = (energy + cfg.sign * (2.0 * cfg.m_mass * sin2w / cfg.hbar) * ds_acc
                       + i_acc - energy0)

    return DiagnosticsRecord(
        s=s, l2_sq=l2_sq, charge=charge, grad_sq=grad_sq, potential=potential,
        energy=energy, max_amp=max_amp, virial2=virial2, heisenberg_slack=heis,
        gn_ratio=gn_ratio, charge_dissipation=cdiss, dsu_sq=dsu_sq,
        I_integral=I_int, virial_rate=virial_rate, K_value=k_val,
        charge_dissipation_accum=cd_acc, dsu_sq_accum=ds_acc, I_accum=i_acc,
        charge_residual=charge_residual, energy_residual=energy_residual,
        charge0=charge0, energy0=energy0,
    )


def _cumtrapz(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
    return out


def _require_identities(traj: Trajectory) -> None:
    if not _identities_apply(traj.config):
        raise ValueError("balance laws require the gauge-invariant nonlinearity "
                         "and a real coupling")


def charge_balance(traj: Trajectory) -> np.ndarray:
    """Residual series of the charge identity (zero up to quadrature error)."""
    _require_identities(traj)
    s = traj.series("s")
    charge = traj.series("charge")
    cdiss = traj.series("charge_dissipation")
    sin2w = math.sin(2.0 * traj.config.omega)
    return charge + traj.config.sign * sin2w * _cumtrapz(cdiss, s) - charge[0]


def energy_balance(traj: Trajectory) -> np.ndarray:
    """Residual series of the energy identity, including the background I-term."""
    _require_identities(traj)
    cfg = traj.config
    s = traj.series("s")
    energy = traj.series("energy")
    dsu_sq = traj.series("dsu_sq")
    i_term = traj.series("I_integral")
    sin2w = math.sin(2.0 * cfg.omega)
    diss = cfg.sign * (2.0 * cfg.m_mass * sin2w / cfg.hbar) * _cumtrapz(dsu_sq, s)
    return energy + diss + _cumtrapz(i_term, s) - energy[0]


@dataclass
class VirialSeries:
    """Spatial-variance series with its curvature bound.

    ``second_diff`` approximates d2/ds2 of the variance by three-point
    differences at the interior record times ``s``; ``bound`` is the energy
    bound (hbar^2 n (p-1)/m^2) E(s) and ``slack = bound - second_diff`` should
    stay nonnegative (up to differencing error) for p >= 1 + 4/n.
    """

    s_all: np.ndarray
    v2: np.ndarray
    rate: np.ndarray
    s: np.ndarray
    second_diff: np.ndarray
    bound: np.ndarray
    slack: np.ndarray


def virial_watch(traj: Trajectory) -> VirialSeries:
    """Variance growth and the second-derivative energy bound.

    Only meaningful for the phase-free cases omega in {0, pi/2}; other phases
    are refused because the rate identity has no real-valued form there.
    """
    cfg = traj.config
    if not math.isclose(math.sin(2.0 * cfg.omega), 0.0, abs_tol=1e-15):
        raise ValueError("variance watch requires omega = 0 or pi/2")
    _require_identities(traj)
    if len(traj.records) < 3:
        raise ValueError("need at least three records for second differences")
    s = traj.series("s")
    v2 = traj.series("virial2")
    rate = traj.series("virial_rate")
    h_prev = s[1:-1] - s[:-2]
    h_next = s[2:] - s[1:-1]
    second = 2.0 * (v2[:-2] * h_next - v2[1:-1] * (h_prev + h_next)
                    + v2[2:] * h_prev) / (h_prev * h_next * (h_prev + h_next))
    n, p = traj.grid.dim, cfg.p
    bound = (cfg.hbar**2 * n * (p - 1.0) / cfg.m_mass**2) * traj.series("energy")[1:-1]
    return VirialSeries(s_all=s, v2=v2, rate=rate, s=s[1:-1], second_diff=second,
                        bound=bound, slack=bound - second)


@dataclass
class ConcavityReport:
    """Concavity certificate for the auxiliary functional K."""

    K0: float
    alpha: float
    s: np.ndarray
    K: np.ndarray
    dK: np.ndarray
    d2K: np.ndarray
    certificate: np.ndarray
    certificate_positive: bool
    S1: float
    notes: list[str] = field(default_factory=list)


def concavity_watch(traj: Trajectory, K0: float, alpha: float) -> ConcavityReport:
    """K(s) = int ||u||^2 + K0, its exact derivatives and the blow-up bound S1.

    dK/ds is ||u(s)||^2 itself and d2K/ds2 follows from the charge identity,
    so no time differencing enters.  The certificate d2K*K - (1+alpha)(dK)^2
    must stay positive for the bound S1 = K0/(alpha*||u0||^2) to apply; when
    it is not (yet) positive the report only warns, since the sufficient
    constants (K0, alpha) are existential.
    """
    if K0 <= 0 or alpha <= 0:
        raise ValueError("K0 and alpha must be positive")
    cfg = traj.config
    sin2w = math.sin(2.0 * cfg.omega)
    if math.isclose(sin2w, 0.0, abs_tol=1e-15):
        raise ValueError("the concavity certificate is degenerate at omega in {0, pi/2}")
    _require_identities(traj)

    notes: list[str] = []
    p0 = 2.0 / sin2w**2 - 1.0
    if not cfg.p > p0:
        notes.append(f"power p = {cfg.p:.6g} not above the phase floor {p0:.6g}")
    e0 = traj.records[0].energy
    if not e0 < 0:
        notes.append(f"initial energy {e0:.6g} is not negative")
    drift = cfg.lam.real * cfg.background.params.a1 * (cfg.p - 1.0 - 4.0 / traj.grid.dim)
    if drift < 0:
        notes.append("lam*a1*(p-1-4/n) < 0: the background term fights dissipation")

    s = traj.series("s")
    dK = traj.series("l2_sq")
    K = traj.series("K_value") + K0
    d2K = -cfg.sign * (cfg.hbar / cfg.m_mass) * sin2w * traj.series("charge_dissipation")
    certificate = d2K * K - (1.0 + alpha) * dK**2
    positive = bool(np.all(certificate > 0.0))
    if not positive:
        msg = "concavity certificate not positive along the trajectory"
        notes.append(msg)
        warnings.warn(msg, stacklevel=2)
    s1 = K0 / (alpha * dK[0])
    return ConcavityReport(K0=K0, alpha=alpha, s=s, K=K, dK=dK, d2K=d2K,
                           certificate=certificate, certificate_positive=positive,
                           S1=s1, notes=notes)


def concavity_scan(traj: Trajectory, K0_grid=None, alpha_grid=None) -> list[ConcavityReport]:
    """Logarithmic scan over (K0, alpha); returns the positive-certificate reports."""
    l2_0 = traj.records[0].l2_sq
    if K0_grid is None:
        K0_grid = l2_0 * np.logspace(-2.0, 4.0, 13)
    if alpha_grid is None:
        alpha_grid = np.logspace(-3.0, 1.0, 9)
    admissible = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for K0 in K0_grid:
            for alpha in alpha_grid:
                report = concavity_watch(traj, float(K0), float(alpha))
                if report.certificate_positive:
                    admissible.append(report)
    return admissible
