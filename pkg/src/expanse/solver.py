"""Split-step pseudospectral evolution of the rescaled field equation.

The evolution solved here is, for a field u(s, x) on a periodic box,

    sign * i * (2m/hbar) du/ds + exp(-2i*omega) * Lap(u)
        - lam * exp(-2i*omega) * a(s)^2 * |u w(s)|^(p-1) u  =  0

equivalently du/ds = nu * Lap(u) + c(s) * |u|^(p-1) u with

    nu   = sign * i * (hbar/2m) * exp(-2i*omega)
    c(s) = -sign * i * (hbar*lam/2m) * exp(-2i*omega) * a(s)^2 * w(s)^(p-1).

omega = 0 is a free Schrodinger flow, |omega| = pi/4 a heat flow with
diffusivity hbar/2m, intermediate phases a Ginzburg-Landau interpolation.
Both substeps are exact: the linear half-steps multiply Fourier modes by
exp(-nu ds |k|^2) (a contraction whenever 0 <= sign*omega <= pi/2), and the
gauge-invariant nonlinear step integrates the pointwise amplitude equation in
closed (Bernoulli) form with the background coefficient frozen at the substep
midpoint, which preserves second-order accuracy of the Strang composition.

Finite-time blow-up is detected either inside a nonlinear substep (the
Bernoulli denominator crossing zero is a genuine ODE blow-up) or by an
amplitude threshold; both are proxies for norm blow-up and the reported time
is a bracketing interval, not a point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .background import ScaleFactor
from .grid import GridSpec, k_squared

__all__ = [
    "Nonlinearity",
    "Status",
    "Safeguards",
    "SolverConfig",
    "FieldState",
    "initial_state",
    "linear_half_step",
    "nonlinear_step",
    "strang_step",
    "evolve",
]


class Nonlinearity(str, enum.Enum):
    GAUGE_INVARIANT = "gauge-invariant"  # lam |uw|^(p-1) u
    GAUGE_VARIANT = "gauge-variant"      # lam (a^2/w) |uw|^p, breaks the balance laws


class Status(enum.Enum):
    RUNNING = "running"
    FINISHED = "finished"
    REACHED_HORIZON = "reached-horizon"
    BLOWN_UP = "blown-up"


@dataclass(frozen=True)
class Safeguards:
    """Blow-up detection knobs.

    ``amp_factor`` scales the initial max amplitude into an absolute threshold
    (resolved once per evolution); ``denom_guard`` is the Bernoulli denominator
    floor; ``horizon_margin`` keeps every background sample strictly below the
    s-horizon.
    """

    amp_factor: float = 1e6
    denom_guard: float = 1e-12
    amp_threshold: float | None = None
    horizon_margin: float = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    sign: int
    omega: float
    lam: complex
    p: float
    step: float
    background: ScaleFactor
    m_mass: float = 1.0
    hbar: float = 1.0
    nonlinearity: Nonlinearity = Nonlinearity.GAUGE_INVARIANT
    safeguards: Safeguards = field(default_factory=Safeguards)

    def __post_init__(self) -> None:
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        so = self.sign * self.omega
        if so < -1e-15 or so > math.pi / 2 + 1e-15:
            raise ValueError("phase must satisfy 0 <= sign*omega <= pi/2")
        if math.isclose(self.omega, -math.pi / 2):
            raise ValueError("omega = -pi/2 is excluded")
        if self.p < 1:
            raise ValueError("power p must be >= 1")
        if self.m_mass <= 0 or self.hbar <= 0:
            raise ValueError("mass and hbar must be positive")
        if self.step <= 0:
            raise ValueError("step must be positive")
        object.__setattr__(self, "nonlinearity", Nonlinearity(self.nonlinearity))
        object.__setattr__(self, "lam", complex(self.lam))

    @property
    def dispersion_rate(self) -> complex:
        """nu = sign * i * (hbar/2m) * exp(-2i*omega); Re(nu) >= 0 when admissible."""
        return self.sign * 1j * (self.hbar / (2.0 * self.m_mass)) * np.exp(-2j * self.omega)

    def nonlinear_rate(self, s: float) -> complex:
        """c(s) = -sign * i * (hbar*lam/2m) * exp(-2i*omega) * a(s)^2 w(s)^(p-1)."""
        coeff = self.background.coefficient(s, self.p)
        return (-self.sign * 1j * (self.hbar * self.lam / (2.0 * self.m_mass))
                * np.exp(-2j * self.omega) * coeff)

    @property
    def s_horizon(self) -> float:
        return self.background.s_horizon

    def horizon_target(self) -> float:
        """Largest s any evolution may reach (strictly below a finite horizon)."""
        s0 = self.s_horizon
        if math.isinf(s0):
            return math.inf
        return s0 * (1.0 - self.safeguards.horizon_margin)


@dataclass(frozen=True)
class FieldState:
    grid: GridSpec
    s_now: float
    u: np.ndarray
    status: Status = Status.RUNNING
    blowup_bracket: tuple[float, float] | None = None

    @property
    def s_detect(self) -> float | None:
        """Upper end of the blow-up bracket, if the run blew up."""
        return None if self.blowup_bracket is None else self.blowup_bracket[1]


def initial_state(grid: GridSpec, u0: np.ndarray) -> FieldState:
    u0 = np.asarray(u0, dtype=np.complex128)
    if u0.shape != grid.shape:
        raise ValueError(f"field shape {u0.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(u0)):
        raise ValueError("initial field contains non-finite values")
    return FieldState(grid=grid, s_now=0.0, u=u0)


def _linear_multiplier(cfg: SolverConfig, grid: GridSpec, ds: float) -> np.ndarray:
    mult = np.exp(-cfg.dispersion_rate * ds * k_squared(grid))
    # contraction for every admissible (sign, omega): Re(nu) = sign*sin(2w)*hbar/2m >= 0
    if np.max(np.abs(mult)) > 1.0 + 1e-12:
        raise AssertionError("linear multiplier left the unit disk; phase inadmissible")
    return mult


def linear_half_step(state: FieldState, cfg: SolverConfig, ds: float) -> FieldState:
    """Exact propagator of du/ds = nu * Lap(u) over a duration ds."""
    if state.status is not Status.RUNNING:
        raise ValueError(f"cannot step a field with status {state.status}")
    if ds == 0.0:
        return state
    mult = _linear_multiplier(cfg, state.grid, ds)
    u = np.fft.ifftn(mult * np.fft.fftn(state.u))
    return replace(state, u=u, s_now=state.s_now + ds)


def _amp_threshold(cfg: SolverConfig, state: FieldState) -> float:
    g = cfg.safeguards
    if g.amp_threshold is not None:
        return g.amp_threshold
    return g.amp_factor * float(np.max(np.abs(state.u)))


def _apply_gauge_invariant(u: np.ndarray, c: complex, p: float, ds: float,
                           guard: float) -> np.ndarray | None:
    """Exact flow of du/ds = c |u|^(p-1) u; None signals denominator blow-up."""
    if p == 1.0:
        return u * np.exp(c * ds)
    amp_pow = np.abs(u) ** (p - 1.0)
    re_c = c.real
    if abs(re_c) < 1e-300:
        # modulus is conserved; the phase integral is exact
        return u * np.exp(c * ds * amp_pow)
    denom = 1.0 - (p - 1.0) * re_c * ds * amp_pow
    if float(np.min(denom)) <= guard:
        return None
    phase = -(c.imag / ((p - 1.0) * re_c)) * np.log(denom)
    return u * denom ** (-1.0 / (p - 1.0)) * np.exp(1j * phase)


def _apply_gauge_variant(u: np.ndarray, c: complex, p: float, ds: float) -> np.ndarray:
    """Classical RK4 on du/ds = c |u|^p (no closed form: the phase is not free)."""
    def rhs(v: np.ndarray) -> np.ndarray:
        return c * np.abs(v) ** p

    v = u
    h = ds / 2.0
    for _ in range(2):
        k1 = rhs(v)
        k2 = rhs(v + 0.5 * h * k1)
        k3 = rhs(v + 0.5 * h * k2)
        k4 = rhs(v + h * k3)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return v


def nonlinear_step(state: FieldState, cfg: SolverConfig, ds: float,
                   s_coeff: float | None = None) -> FieldState:
    """Pointwise nonlinear flow over ds with the background frozen at s_coeff.

    ``s_coeff`` defaults to the substep midpoint.  Marks the state blown-up
    when the Bernoulli denominator reaches the guard or the amplitude passes
    the threshold.
    """
    if state.status is not Status.RUNNING:
        raise ValueError(f"cannot step a field with status {state.status}")
    if ds == 0.0 or cfg.lam == 0.0:
        return replace(state, s_now=state.s_now + ds)
    if s_coeff is None:
        s_coeff = state.s_now + ds / 2.0
    c = cfg.nonlinear_rate(s_coeff)
    if cfg.nonlinearity is Nonlinearity.GAUGE_INVARIANT:
        # the gauge-variant weight is c / w(s): |uw|^p = w^p |u|^p cancels one w
        u = _apply_gauge_invariant(state.u, c, cfg.p, ds, cfg.safeguards.denom_guard)
    else:
        u = _apply_gauge_variant(state.u, c, cfg.p, ds)
    bracket = (state.s_now, state.s_now + ds)
    if u is None:
        return replace(state, status=Status.BLOWN_UP, blowup_bracket=bracket)
    if float(np.max(np.abs(u))) > _amp_threshold(cfg, state):
        return replace(state, status=Status.BLOWN_UP, blowup_bracket=bracket)
    return replace(state, u=u, s_now=state.s_now + ds)


def strang_step(state: FieldState, cfg: SolverConfig, ds: float | None = None) -> FieldState:
    """One second-order step: linear(ds/2) o nonlinear(ds) o linear(ds/2).

    The requested ds is clamped so the step never samples the background at or
    beyond the s-horizon; a clamp to zero duration marks the horizon reached.
    """
    if state.status is not Status.RUNNING:
        raise ValueError(f"cannot step a field with status {state.status}")
    if ds is None:
        ds = cfg.step
    target = cfg.horizon_target()
    remaining = target - state.s_now
    if remaining <= 0:
        return replace(state, status=Status.REACHED_HORIZON)
    clamped = min(ds, remaining)
    s0 = state.s_now
    out = linear_half_step(state, cfg, clamped / 2.0)
    out = nonlinear_step(out, cfg, clamped, s_coeff=s0 + clamped / 2.0)
    if out.status is Status.BLOWN_UP:
        return replace(state, status=Status.BLOWN_UP,
                       blowup_bracket=(s0, s0 + clamped))
    out = linear_half_step(out, cfg, clamped / 2.0)
    out = replace(out, s_now=s0 + clamped)  # avoid accumulated half-step roundoff
    if not np.all(np.isfinite(out.u)):
        return replace(state, status=Status.BLOWN_UP,
                       blowup_bracket=(s0, s0 + clamped))
    if out.s_now >= target:
        return replace(out, status=Status.REACHED_HORIZON)
    return out


def evolve(cfg: SolverConfig, state: FieldState, s_end: float | None = None,
           observer=None, max_steps: int | None = None):
    """March a field to ``s_end`` (or to the horizon when None), emitting one
    diagnostics record per accepted step.

    Returns a ``diagnostics.Trajectory``.  Deterministic for fixed inputs: the
    iteration order is fixed and nothing is shared across evolutions.
    """
    from . import diagnostics  # local import keeps the module dependency one-way

    if state.grid.dim != cfg.background.params.n:
        raise ValueError(
            f"grid dimension {state.grid.dim} must match the background "
            f"dimension n = {cfg.background.params.n}"
        )
    horizon = cfg.horizon_target()
    if s_end is None:
        if math.isinf(horizon):
            raise ValueError("s_end is required on a background with no finite horizon")
        target = horizon
    else:
        if s_end > cfg.s_horizon * (1.0 + 1e-12):
            raise ValueError(f"s_end = {s_end} exceeds the s-horizon {cfg.s_horizon}")
        target = min(s_end, horizon)

    guards = cfg.safeguards
    if guards.amp_threshold is None:
        cfg = replace(cfg, safeguards=replace(
            guards, amp_threshold=_amp_threshold(cfg, state)))

    records = [diagnostics.compute_record(state, cfg, prev=None)]
    if observer is not None:
        observer(records[0], state)
    hit_horizon = target == horizon and (s_end is None or s_end > horizon)
    steps = 0
    while state.status is Status.RUNNING:
        remaining = target - state.s_now
        if remaining <= 1e-14 * max(1.0, abs(target)):
            state = replace(state, status=(
                Status.REACHED_HORIZON if hit_horizon else Status.FINISHED))
            break
        if max_steps is not None and steps >= max_steps:
            state = replace(state, status=Status.FINISHED)
            break
        ds = min(cfg.step, remaining)
        if remaining - cfg.step <= 1e-8 * cfg.step:
            ds = remaining  # absorb the roundoff sliver into the final step
        state = strang_step(state, cfg, ds)
        steps += 1
        if state.status in (Status.RUNNING, Status.REACHED_HORIZON):
            records.append(diagnostics.compute_record(state, cfg, prev=records[-1]))
            if observer is not None:
                observer(records[-1], state)
    return diagnostics.Trajectory(
        grid=state.grid, config=cfg, records=records, status=state.status,
        final=state, accepted_steps=len(records) - 1,
    )
