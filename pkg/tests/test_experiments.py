import numpy as np
import pytest

from porovisco.constitutive import linearize
from porovisco.discretization import Grid1D
from porovisco.experiments import (
    eps_sweep,
    long_time_decay,
    moser_diagnostic,
    moser_exponents,
    scaling_audit,
    uniqueness_test,
)
from porovisco.loading import BoundLoading
from porovisco.nonlinear_solver import EnergyLedger, NonlinearRun


@pytest.fixture(scope="module")
def tensors(unit_params):
    return linearize(unit_params)


def zero_loading(grid):
    return BoundLoading(f=lambda t: np.zeros(grid.n_nodes), g=lambda t: 0.0)


def ramp_loading(grid, t_ramp=0.05):
    x = grid.nodes
    return BoundLoading(
        f=lambda t: min(t / t_ramp, 1.0) * 0.6 * np.sin(np.pi * x),
        g=lambda t: min(t / t_ramp, 1.0) * 0.25,
    )


class TestSweep:
    def test_equilibrium_sweep_all_zero(self, unit_params):
        grid = Grid1D(16)
        result = eps_sweep(unit_params, grid, zero_loading(grid), (0.2, 0.1, 0.05),
                           tau=2e-3, T=0.02)
        for vals in result.report.errors.values():
            assert all(v == 0.0 for v in vals)
        audit = scaling_audit(result)
        for ratio in audit["ratios"].values():
            assert ratio == 1.0 or np.isfinite(ratio)

    def test_short_loaded_sweep_decreases(self, unit_params):
        grid = Grid1D(24)
        result = eps_sweep(unit_params, grid, ramp_loading(grid), (0.2, 0.1, 0.05),
                           tau=2e-3, T=0.2, tol=5e-11)
        rep = result.report
        for name, vals in rep.errors.items():
            assert all(np.diff(vals) < 0.0), name
        assert max(rep.dissipation_violations) <= 1e-9
        for ratio in rep.audit_ratios.values():
            assert ratio <= 3.0

    def test_rejects_bad_eps_list(self, unit_params):
        grid = Grid1D(16)
        with pytest.raises(ValueError):
            eps_sweep(unit_params, grid, zero_loading(grid), (0.1, 0.2, 0.3), tau=1e-3, T=0.01)
        with pytest.raises(ValueError):
            eps_sweep(unit_params, grid, zero_loading(grid), (0.2, 0.1), tau=1e-3, T=0.01)


class TestMoser:
    def test_case_one_ladder(self):
        assert moser_exponents(1.0, 4, case="I") == (1.0, 2.0, 4.0, 8.0, 16.0)
        qs = moser_exponents(1.5, 3, case="I")
        assert qs == tuple(2.0 ** n * 0.5 + 0.5 for n in range(4))

    def test_case_two_ladders(self):
        assert moser_exponents(1.0, 2, case="IIa", r=0.0) == (2.0, 4.0, 8.0)
        assert moser_exponents(1.0, 2, case="IIb", r=0.5) == (2.5, 3.5, 5.5)

    def test_window_rejections(self):
        with pytest.raises(ValueError):
            moser_exponents(2.5, 3, case="I")
        with pytest.raises(ValueError):
            moser_exponents(3.2, 3, case="IIa", r=0.0)
        with pytest.raises(ValueError):
            moser_exponents(2.0, 3, case="IIb")
        with pytest.raises(ValueError):
            moser_exponents(1.0, 3, case="X")

    def test_constant_concentration_saturates(self, unit_params):
        grid = Grid1D(16)
        K = 3
        run = NonlinearRun(
            params=unit_params, grid=grid, eps=0.1,
            times=1e-3 * np.arange(K + 1),
            displacement=np.zeros((K + 1, grid.n_nodes)),
            concentration=np.full((K + 1, grid.n_nodes), 2.0),
            ledger=EnergyLedger(1e-3),
        )
        qs, norms, gap = moser_diagnostic(run, N=5, case="I")
        assert all(v == pytest.approx(2.0, rel=1e-13) for v in norms)
        assert abs(gap) <= 1e-12

    def test_biot_run_ladder(self, biot_run):
        qs, norms, gap = moser_diagnostic(biot_run, N=8, case="I")
        assert qs == tuple(2.0 ** n for n in range(9))
        assert np.all(np.diff(norms) >= -1e-12)
        sup = norms[-1] + gap
        assert norms[-1] <= sup * (1.0 + 1e-8)


class TestDecay:
    def test_start_at_equilibrium_is_flat(self, tensors):
        grid = Grid1D(24)
        f = 0.3 * np.sin(np.pi * grid.nodes)
        from porovisco.linear_solver import static_solve

        v, xi, _, _ = static_solve(grid, tensors, f, 0.1, 0.2)
        result = long_time_decay(grid, tensors, f, 0.1, u0=v, rho0=xi, tau=0.02, T=1.0)
        assert np.max(result.curve) <= 1e-20

    def test_perturbed_start_decays_monotonically(self, tensors):
        grid = Grid1D(24)
        f = 0.3 * np.sin(np.pi * grid.nodes)
        result = long_time_decay(grid, tensors, f, 0.1,
                                 rho0=0.2 * np.cos(np.pi * grid.nodes), tau=0.02, T=5.0)
        assert result.curve[0] > 0.0
        assert result.max_increase <= 1e-12
        assert result.final_ratio <= 1e-3


class TestUniqueness:
    def test_zero_data(self, tensors):
        grid = Grid1D(16)
        assert uniqueness_test(grid, tensors, zero_loading(grid), tau=1e-3, T=0.05) == 0.0

    def test_biot_defaults(self, tensors):
        grid = Grid1D(32)
        loading = ramp_loading(grid)
        d = uniqueness_test(grid, tensors, loading, rho0=0.2 * np.cos(np.pi * grid.nodes),
                            tau=1e-3, T=0.3)
        assert d <= 1e-10

    def test_sensitivity_to_data_change(self, tensors):
        # a 1e-6 change in the initial data must register far above the
        # re-solve noise floor
        from porovisco.linear_solver import run_linear

        grid = Grid1D(32)
        loading = ramp_loading(grid)
        rho0 = 0.2 * np.cos(np.pi * grid.nodes)
        a = run_linear(grid, tensors, loading, rho0=rho0, tau=1e-3, T=0.3)
        b = run_linear(grid, tensors, loading, rho0=rho0 + 1e-6, tau=1e-3, T=0.3)
        d = max(np.max(np.abs(a.u - b.u)), np.max(np.abs(a.rho - b.rho)))
        assert d >= 1e-7
