import math

import numpy as np
import pytest

from expanse.background import ScaleFactor, ScaleFactorParams
from expanse.diagnostics import (
    charge_balance,
    concavity_scan,
    concavity_watch,
    energy_balance,
    virial_watch,
)
from expanse.grid import GridSpec, axis_coords
from expanse.solver import Safeguards, SolverConfig, Status, evolve, initial_state

GRID = GridSpec(dim=1, points=256, length=40.0)


def background(n=1, sigma=0.0, a0=1.0, a1=0.0):
    return ScaleFactor(ScaleFactorParams(n=n, sigma=sigma, a0=a0, a1=a1))


def gaussian(grid=GRID, amplitude=1.0, width=1.0):
    x = axis_coords(grid)
    return initial_state(grid, (amplitude * np.exp(-x**2 / (2 * width**2))
                                ).astype(complex))


def run(*, sign=1, omega=0.0, lam=1.0, p=3.0, step=1e-3, s_end=1.0,
        amplitude=1.0, a1=0.0, grid=GRID, safeguards=None, **kw):
    cfg = SolverConfig(sign=sign, omega=omega, lam=lam, p=p, step=step,
                       background=background(n=grid.dim, a1=a1),
                       safeguards=safeguards or Safeguards(), **kw)
    return evolve(cfg, gaussian(grid, amplitude), s_end=s_end)


class TestRecordInvariants:
    def test_energy_is_sum_of_parts(self):
        traj = run(lam=-0.7, s_end=0.3)
        for rec in traj.records:
            assert rec.energy == 0.5 * rec.grad_sq + rec.potential

    def test_potential_sign_tracks_coupling(self):
        up = run(lam=1.0, s_end=0.05)
        down = run(lam=-1.0, s_end=0.05)
        assert all(r.potential > 0 for r in up.records)
        assert all(r.potential < 0 for r in down.records)

    def test_heisenberg_slack_nonnegative(self):
        traj = run(lam=-0.7, omega=0.0, s_end=0.5)
        for rec in traj.records:
            assert rec.heisenberg_slack >= -1e-8 * rec.l2_sq

    def test_initial_rate_vanishes_for_real_data(self):
        traj = run(lam=-1.0, s_end=0.01)
        assert abs(traj.records[0].virial_rate) <= 1e-12

    def test_identity_fields_nan_for_gauge_variant(self):
        traj = run(lam=0.4, p=2.0, s_end=0.02, omega=math.pi / 4,
                   nonlinearity="gauge-variant")
        assert math.isnan(traj.records[-1].energy)

    def test_k_value_trapezoid(self):
        traj = run(lam=0.0, s_end=0.2, step=1e-2)
        s = traj.series("s")
        l2 = traj.series("l2_sq")
        manual = np.concatenate([[0.0], np.cumsum(0.5 * (l2[1:] + l2[:-1]) * np.diff(s))])
        np.testing.assert_allclose(traj.series("K_value"), manual, rtol=1e-13)


class TestChargeBalance:
    def test_conserved_at_zero_phase(self):
        traj = run(omega=0.0, lam=1.0, step=1e-3, s_end=1.0)
        assert np.max(np.abs(charge_balance(traj))) <= 1e-8 * traj.records[0].charge

    def test_conserved_at_half_pi(self):
        traj = run(sign=1, omega=math.pi / 2, lam=1.0, step=1e-3, s_end=1.0)
        assert np.max(np.abs(charge_balance(traj))) <= 1e-8 * traj.records[0].charge

    def test_dissipative_phase_monotone_and_small_residual(self):
        traj = run(sign=1, omega=math.pi / 4, lam=1.0, step=1e-3, s_end=1.0)
        charges = traj.series("charge")
        assert np.all(np.diff(charges) <= 1e-14)
        assert np.max(np.abs(charge_balance(traj))) <= 1e-5 * charges[0]

    def test_residual_shrinks_under_halving(self):
        r_coarse = np.max(np.abs(charge_balance(
            run(omega=math.pi / 4, lam=1.0, step=2e-3, s_end=0.5))))
        r_fine = np.max(np.abs(charge_balance(
            run(omega=math.pi / 4, lam=1.0, step=1e-3, s_end=0.5))))
        assert r_fine <= 0.55 * r_coarse  # at least first order

    def test_refuses_gauge_variant(self):
        traj = run(lam=0.4, p=2.0, s_end=0.02, omega=math.pi / 4,
                   nonlinearity="gauge-variant")
        with pytest.raises(ValueError):
            charge_balance(traj)

    def test_refuses_complex_coupling(self):
        traj = run(lam=0.4 + 0.1j, omega=math.pi / 4, s_end=0.02)
        with pytest.raises(ValueError):
            charge_balance(traj)


class TestEnergyBalance:
    def test_conserved_for_static_conservative_run(self):
        traj = run(omega=0.0, lam=1.0, a1=0.0, step=1e-3, s_end=1.0)
        energies = traj.series("energy")
        assert np.max(np.abs(energies - energies[0])) <= 1e-6 * abs(energies[0])

    def test_residual_small_on_expanding_background(self):
        traj = run(omega=math.pi / 4, lam=1.0, p=3.0, a1=1.0, step=5e-4,
                   s_end=0.5)
        res = energy_balance(traj)
        assert np.max(np.abs(res)) <= 1e-5 * abs(traj.records[0].energy)

    def test_monotone_when_background_term_dissipates(self):
        # lam*a1*(p-1-4/n) >= 0 makes the I-term a sink (p=5, n=1, a1>0)
        traj = run(omega=math.pi / 4, lam=1.0, p=5.0, a1=1.0, step=5e-4,
                   s_end=0.5)
        energies = traj.series("energy")
        assert np.all(np.diff(energies) <= 1e-14)

    def test_residual_shrinks_under_halving(self):
        coarse = np.max(np.abs(energy_balance(
            run(omega=math.pi / 4, lam=1.0, a1=1.0, step=1e-3, s_end=0.5))))
        fine = np.max(np.abs(energy_balance(
            run(omega=math.pi / 4, lam=1.0, a1=1.0, step=5e-4, s_end=0.5))))
        assert fine <= 0.55 * coarse


class TestVirial:
    def test_free_gaussian_variance_closed_form(self):
        # d=1 free flow: V2(s) = A^2 sqrt(pi) (w0^4 + (hbar s/m)^2) / (2 w0^3)
        traj = run(lam=0.0, step=1e-3, s_end=1.0)
        v2 = traj.series("virial2")
        s = traj.series("s")
        expect = math.sqrt(math.pi) * (1.0 + s**2) / 2.0
        np.testing.assert_allclose(v2, expect, rtol=1e-7)

    def test_variance_rate_identity(self):
        traj = run(lam=-0.6, step=1e-3, s_end=0.5)
        s = traj.series("s")
        v2 = traj.series("virial2")
        rate = traj.series("virial_rate")
        fd = np.gradient(v2, s)
        np.testing.assert_allclose(rate[2:-2], fd[2:-2], rtol=5e-4, atol=1e-8)

    def test_bound_tight_at_conformal_power(self):
        # p = 1 + 4/n: the curvature of V2 equals the energy bound exactly
        traj = run(lam=-1.0, p=5.0, amplitude=1.6, step=1e-4, s_end=0.25,
                   grid=GridSpec(dim=1, points=512, length=20.0))
        series = virial_watch(traj)
        e0 = traj.records[0].energy
        assert e0 < 0
        tol = 1e-2 * abs(e0)
        assert np.all(series.second_diff <= 4.0 * e0 + tol)
        assert np.min(series.slack) >= -tol

    def test_refuses_interpolating_phase(self):
        traj = run(omega=math.pi / 4, lam=1.0, s_end=0.05)
        with pytest.raises(ValueError):
            virial_watch(traj)


class TestConcavity:
    def blowup_run(self):
        return run(sign=1, omega=math.pi / 4, lam=-1.0, p=3.0, amplitude=2.0,
                   step=2e-4, s_end=2.0,
                   grid=GridSpec(dim=1, points=512, length=40.0))

    def test_initial_value_is_offset(self):
        import warnings
        traj = run(lam=-1.0, omega=math.pi / 4, amplitude=2.0, s_end=0.05)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = concavity_watch(traj, K0=3.0, alpha=0.5)
        assert report.K[0] == pytest.approx(3.0)

    def test_trivial_run_certificate_negative(self):
        traj = run(lam=0.0, omega=math.pi / 4, s_end=0.3)
        with pytest.warns(UserWarning):
            report = concavity_watch(traj, K0=1.0, alpha=0.1)
        assert not report.certificate_positive

    def test_blowup_bound_from_scan(self):
        traj = self.blowup_run()
        assert traj.status is Status.BLOWN_UP
        reports = concavity_scan(traj)
        assert reports, "no positive certificate found"
        good = [r for r in reports if traj.s_detect <= r.S1]
        assert good, "no admissible pair bounded the observed blow-up"
        r = good[0]
        assert r.S1 == pytest.approx(r.K0 / (r.alpha * traj.records[0].l2_sq))

    def test_refuses_conservative_phase(self):
        traj = run(lam=-1.0, omega=0.0, s_end=0.05)
        with pytest.raises(ValueError):
            concavity_watch(traj, K0=1.0, alpha=0.1)

    def test_exact_second_derivative(self):
        # d2K/ds2 from the charge identity matches differenced dK/ds
        traj = run(sign=1, omega=math.pi / 4, lam=-1.0, amplitude=1.2,
                   step=1e-3, s_end=0.2)
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = concavity_watch(traj, K0=1.0, alpha=0.1)
        fd = np.gradient(report.dK, report.s)
        np.testing.assert_allclose(report.d2K[2:-2], fd[2:-2], rtol=5e-3)
