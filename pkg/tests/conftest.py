import pytest

from porovisco import MaterialParams
from porovisco.discretization import BCSpec, Grid1D
from porovisco.loading import LoadingSpec, SpatialProfile, TimeAmplitude
from porovisco.nonlinear_solver import run_nonlinear


@pytest.fixture(scope="session")
def unit_params():
    """Unit Biot material: M_B = beta = k = c_eq = M0 = 1, kappa_e = 0.5,
    delta = 0.1, q_det = 2, nu_h = 0.01, p = 3, D_tilde = 0.25."""
    return MaterialParams()


def default_loading(grid):
    spec = LoadingSpec(
        f_profile=SpatialProfile("sin_pi", 0.6),
        f_amplitude=TimeAmplitude("ramp", 1.0, t_ramp=0.25),
        g_amplitude=TimeAmplitude("ramp", 0.25, t_ramp=0.25),
    )
    return spec.bind(grid)


@pytest.fixture(scope="session")
def biot_run(unit_params):
    """The reference finite-strain run: n = 64, tau = 1e-3, T = 1,
    eps = 0.1, ramped body force and traction (shared across tests)."""
    grid = Grid1D(64)
    bc = BCSpec(zero_flux=True)
    return run_nonlinear(
        unit_params, grid, default_loading(grid), bc,
        tau=1e-3, T=1.0, eps=0.1, tol=5e-11,
    )
