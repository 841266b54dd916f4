"""Staggered time-discrete solver for the finite-strain system.

Each step first minimizes the incremental mechanical functional

    E_inc(chi) = int Phi(chi', c_prev) + H(chi'') dx
                 + tau * int zeta_hat(C_prev, (C(chi) - C_prev)/tau, c_prev) dx
                 - <ell(t + tau), chi>

over deformations with chi(0) = 0 (Newton with energy backtracking that
rejects orientation-losing iterates), then advances the concentration by
one implicit Euler step of the degenerate diffusion equation (damped
Newton with positivity rejection).  Because the mechanical update is a
genuine minimization and the free energy is convex in c, the produced
energy ledger satisfies the discrete energy-dissipation inequality

    E(t) + sum tau * (mobility dissipation + viscous dissipation
                      + boundary flux work) + sum <d ell, u>  <=  E(0)

up to solver tolerances; ``check_dissipation_inequality`` measures the
worst violation.  All ledger entries are stored in the rescaled units in
which the loading is eps * (f_star, g_star) and u = (chi - id)/eps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import constitutive as mat
from .constitutive import MaterialParams
from .discretization import (
    BCSpec,
    Grid1D,
    cell_average,
    gradient,
    h1_norm,
    linf_norm,
    llogl_deviation,
    lq_norm,
    mass,
    node_weights,
    second_derivative,
)
from .loading import BoundLoading

__all__ = [
    "SolverError",
    "NoConvergence",
    "OrientationLoss",
    "PositivityLoss",
    "EnergyLedger",
    "NonlinearState",
    "NonlinearRun",
    "RescaledTrajectory",
    "mechanical_step",
    "diffusion_step",
    "nodal_chemical_potential",
    "run_nonlinear",
    "check_dissipation_inequality",
    "rescale",
]

TIKHONOV_SHIFT = 1e-10  # regularizes the degenerate hyperstress Hessian at G = 0


class SolverError(RuntimeError):
    """Base class for step failures; carries the failing time if known."""

    def __init__(self, message: str, time: Optional[float] = None):
        super().__init__(message if time is None else f"{message} (t = {time:.9g})")
        self.time = time


class NoConvergence(SolverError):
    pass


class OrientationLoss(SolverError):
    pass


class PositivityLoss(SolverError):
    pass


# ---------------------------------------------------------------------------
# energy ledger
# ---------------------------------------------------------------------------

class EnergyLedger:
    """Per-step time series feeding the structure checks.

    Core columns: t, energy, diss_mech, diss_diff, flux_boundary,
    load_power (dissipation columns are rates, load_power is the discrete
    loading-rate pairing).  Arbitrary extra columns (norms, residuals,
    cascade values) ride along.
    """

    CORE = ("t", "energy", "diss_mech", "diss_diff", "flux_boundary", "load_power")

    def __init__(self, tau: float, extra_columns: tuple = ()):
        self.tau = float(tau)
        self._cols: dict[str, list] = {name: [] for name in self.CORE + tuple(extra_columns)}

    @property
    def column_names(self) -> tuple:
        return tuple(self._cols.keys())

    def __len__(self) -> int:
        return len(self._cols["t"])

    def append(self, **kw) -> None:
        if set(kw) != set(self._cols):
            missing = set(self._cols) - set(kw)
            extra = set(kw) - set(self._cols)
            raise ValueError(f"ledger row mismatch (missing {missing}, unknown {extra})")
        for name in ("diss_mech", "diss_diff"):
            if kw[name] < -1e-12:
                raise ValueError(f"dissipation entry {name} is negative: {kw[name]}")
        for name, val in kw.items():
            if not np.all(np.isfinite(val)):
                raise ValueError(f"non-finite ledger entry {name}")
            self._cols[name].append(float(val))

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self._cols[name], dtype=float)


# ---------------------------------------------------------------------------
# states and runs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NonlinearState:
    """Deformation (stored as displacement w = chi - id) and concentration
    at one time instant; chi(0) = 0 in the shifted convention."""

    grid: Grid1D
    displacement: np.ndarray
    c: np.ndarray
    t: float

    @property
    def chi(self) -> np.ndarray:
        return self.grid.nodes + self.displacement

    @property
    def chi_prime(self) -> np.ndarray:
        return 1.0 + gradient(self.grid, self.displacement)


@dataclass
class NonlinearRun:
    """Full trajectory of a staggered run plus its energy ledger."""

    params: MaterialParams
    grid: Grid1D
    eps: float
    times: np.ndarray
    displacement: np.ndarray  # (steps+1, nodes), chi - id
    concentration: np.ndarray  # (steps+1, nodes)
    ledger: EnergyLedger

    def state(self, k: int) -> NonlinearState:
        return NonlinearState(self.grid, self.displacement[k], self.concentration[k], float(self.times[k]))

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1


@dataclass(frozen=True)
class RescaledTrajectory:
    """Small-strain variables derived from a finite-strain trajectory:
    u = (chi - id)/eps, rho = (c - c_eq)/eps, mu_star = mu/eps nodal, and
    the cellwise flux M(grad chi, c) grad mu_star."""

    times: np.ndarray
    u: np.ndarray
    rho: np.ndarray
    mu_star: np.ndarray
    flux: np.ndarray


# ---------------------------------------------------------------------------
# mechanical step
# ---------------------------------------------------------------------------

def _dual_norm(r: np.ndarray, weights: np.ndarray) -> float:
    # L2 norm of the residual density (residual entries carry quadrature
    # weights, so divide them out once).
    return float(np.sqrt(np.sum(r ** 2 / weights)))


def _mech_energy(params, grid, w, c_hat, C_prev, tau, f_nodes, g_value, weights):
    """Incremental mechanical energy and the sum of the magnitudes of its
    contributions (the round-off resolution of the value)."""
    F = 1.0 + gradient(grid, w)
    if np.min(F) <= 0.0:
        return np.inf, np.inf
    h = grid.h
    G = second_derivative(grid, w)
    phi = h * float(np.sum(mat.free_energy(params, F, c_hat)))
    hyp = h * float(np.sum(mat.hyperstress(params, G[1:-1])[0]))
    cdot = (F ** 2 - C_prev) / tau
    visc = tau * h * float(np.sum(0.5 * params.D_tilde * cdot ** 2))
    load = float(np.sum(weights * f_nodes * w)) + g_value * w[-1]
    value = phi + hyp + visc - load
    scale = abs(phi) + abs(hyp) + abs(visc) + abs(load)
    return value, scale


def _mech_residual(params, grid, w, c_hat, C_prev, tau, f_nodes, g_value, weights):
    h = grid.h
    F = 1.0 + gradient(grid, w)
    G = second_derivative(grid, w)
    cdot = (F ** 2 - C_prev) / tau
    sigma = mat.stress_elastic(params, F, c_hat) + 2.0 * F * params.D_tilde * cdot
    hy = mat.hyperstress(params, G)[1]
    hy[0] = 0.0
    hy[-1] = 0.0
    n = grid.n_cells
    r = sigma - np.append(sigma[1:], 0.0)
    hpad = np.append(hy, 0.0)
    r += (hpad[0:n] - 2.0 * hpad[1 : n + 1] + hpad[2 : n + 2]) / h
    r -= weights[1:] * f_nodes[1:]
    r[-1] -= g_value
    return r


def _mech_hessian(params, grid, w, c_hat, C_prev, tau):
    h = grid.h
    n = grid.n_cells
    F = 1.0 + gradient(grid, w)
    G = second_derivative(grid, w)
    cdot = (F ** 2 - C_prev) / tau
    ff, _, _ = mat.free_energy_hessian(params, F, c_hat)
    a = ff + 2.0 * params.D_tilde * cdot + 4.0 * params.D_tilde * F ** 2 / tau
    H = np.zeros((n, n))
    idx = np.arange(n)
    diag = np.empty(n)
    diag[:-1] = (a[:-1] + a[1:]) / h
    diag[-1] = a[-1] / h
    H[idx, idx] = diag
    H[idx[:-1], idx[:-1] + 1] = -a[1:] / h
    H[idx[:-1] + 1, idx[:-1]] = -a[1:] / h
    # hyperstress block (pentadiagonal second-difference stencil)
    b = mat.hyperstress_dG(params, G) / h ** 3
    b[0] = 0.0
    b[-1] = 0.0
    bp = np.append(b, 0.0)  # bp[i] = b_i for i <= n, bp[n+1] = 0
    H[idx, idx] += bp[0:n] + 4.0 * bp[1 : n + 1] + bp[2 : n + 2]
    H[idx[:-1], idx[:-1] + 1] += -2.0 * (bp[1:n] + bp[2 : n + 1])
    H[idx[:-1] + 1, idx[:-1]] += -2.0 * (bp[1:n] + bp[2 : n + 1])
    if n > 2:
        H[idx[:-2], idx[:-2] + 2] += bp[2:n]
        H[idx[:-2] + 2, idx[:-2]] += bp[2:n]
    H[idx, idx] += TIKHONOV_SHIFT
    return H


def mechanical_step(
    params: MaterialParams,
    grid: Grid1D,
    w_prev: np.ndarray,
    c_prev: np.ndarray,
    tau: float,
    f_nodes: np.ndarray,
    g_value: float,
    C_prev: Optional[np.ndarray] = None,
    tol: float = 1e-10,
    max_newton: int = 50,
    max_backtrack: int = 40,
):
    """Minimize the incremental mechanical functional at frozen
    concentration.

    Returns the new displacement together with an info dict carrying the
    achieved residual dual norm, iteration count, and the incremental
    energies before/after (the descent certificate).  Raises
    :class:`OrientationLoss` when no backtracking step keeps chi' > 0 and
    :class:`NoConvergence` when the iteration caps are exhausted.
    """
    weights = node_weights(grid)
    c_hat = cell_average(c_prev)
    if C_prev is None:
        C_prev = (1.0 + gradient(grid, w_prev)) ** 2

    def energy(wv):
        return _mech_energy(params, grid, wv, c_hat, C_prev, tau, f_nodes, g_value, weights)

    def residual(wv):
        return _mech_residual(params, grid, wv, c_hat, C_prev, tau, f_nodes, g_value, weights)

    w = np.array(w_prev, dtype=float)
    e_start, scale = energy(w)
    if not np.isfinite(e_start):
        raise OrientationLoss("previous state is not orientation-admissible")
    e_cur = e_start
    r = residual(w)
    rn = _dual_norm(r, weights[1:])
    iters = 0
    while rn > tol:
        if iters >= max_newton:
            raise NoConvergence(f"mechanical Newton exceeded {max_newton} iterations (residual {rn:.3e})")
        H = _mech_hessian(params, grid, w, c_hat, C_prev, tau)
        try:
            delta = np.linalg.solve(H, -r)
        except np.linalg.LinAlgError:
            delta = -r / max(float(np.max(np.abs(np.diag(H)))), 1.0)
        accepted = False
        only_orientation = True
        for direction in (delta, -r / max(float(np.max(np.abs(np.diag(H)))), 1.0)):
            s = 1.0
            for _ in range(max_backtrack + 1):
                cand = w.copy()
                cand[1:] += s * direction
                if np.min(1.0 + gradient(grid, cand)) <= 0.0:
                    s *= 0.5
                    continue
                e_new, scale_new = energy(cand)
                if not np.isfinite(e_new):
                    only_orientation = False
                    s *= 0.5
                    continue
                # clear descent accepts outright.  Near the minimum the
                # evaluated energy and the evaluated residual disagree at
                # round-off level, so the final Newton polish may raise
                # the energy by ~1e-18; admit such increases only under a
                # strong residual contraction and a tiny absolute budget
                # (the descent certificate degrades by at most that much
                # per step).
                noise = 1024.0 * np.finfo(float).eps * max(scale, scale_new)
                if e_new <= e_cur - noise:
                    accepted = True
                    break
                if e_new <= e_cur + noise + 1e-15:
                    rn_cand = _dual_norm(residual(cand), weights[1:])
                    if rn_cand <= 0.5 * rn:
                        accepted = True
                        break
                only_orientation = False
                s *= 0.5
            if accepted:
                break
        if not accepted:
            if only_orientation:
                raise OrientationLoss("no backtracking step preserves chi' > 0")
            raise NoConvergence("mechanical line search failed to descend")
        w = cand
        e_cur = min(e_new, e_cur)
        scale = scale_new
        r = residual(w)
        rn = _dual_norm(r, weights[1:])
        iters += 1
    return w, {"residual": rn, "iterations": iters, "energy": e_cur, "energy_start": e_start}


# ---------------------------------------------------------------------------
# diffusion step
# ---------------------------------------------------------------------------

def nodal_chemical_potential(params: MaterialParams, grid: Grid1D, F_cells: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Discrete chemical potential: the gradient of the quadrature energy
    with respect to the nodal concentrations, divided by the node weights.
    Interior nodes average the two adjacent cell values."""
    pc = mat.chemical_potential(params, F_cells, cell_average(c))
    mu = np.empty(grid.n_nodes)
    mu[0] = pc[0]
    mu[-1] = pc[-1]
    mu[1:-1] = 0.5 * (pc[:-1] + pc[1:])
    return mu


def _mu_derivative(params, grid, F_cells, c):
    # dense d mu_i / d c_j
    n = grid.n_cells
    _, _, cc = mat.free_energy_hessian(params, F_cells, cell_average(c))
    d = np.zeros((n + 1, n + 1))
    d[0, 0] = 0.5 * cc[0]
    d[0, 1] = 0.5 * cc[0]
    d[-1, -1] = 0.5 * cc[-1]
    d[-1, -2] = 0.5 * cc[-1]
    i = np.arange(1, n)
    d[i, i - 1] = 0.25 * cc[:-1]
    d[i, i] = 0.25 * (cc[:-1] + cc[1:])
    d[i, i + 1] = 0.25 * cc[1:]
    return d


def _diff_residual(params, grid, F_cells, c, c_prev, tau, bc, t, weights):
    mu = nodal_chemical_potential(params, grid, F_cells, c)
    mob = mat.mobility(params, F_cells, cell_average(c))
    q = mob * (mu[1:] - mu[:-1]) / grid.h
    qpad_lo = np.concatenate([[0.0], q])
    qpad_hi = np.concatenate([q, [0.0]])
    r = weights * (c - c_prev) + tau * (qpad_lo - qpad_hi)
    mu_ext = bc.mu_ext_value(t)
    r[0] += tau * bc.kappa_left * (mu[0] - mu_ext)
    r[-1] += tau * bc.kappa_right * (mu[-1] - mu_ext)
    return r, mu


def _diff_jacobian(params, grid, F_cells, c, tau, bc, weights):
    n = grid.n_cells
    h = grid.h
    c_hat = cell_average(c)
    mu = nodal_chemical_potential(params, grid, F_cells, c)
    mob = mat.mobility(params, F_cells, c_hat)
    dmob = mat.mobility_dc(params, F_cells, c_hat)
    dmu = _mu_derivative(params, grid, F_cells, c)
    grad_mu = (mu[1:] - mu[:-1]) / h
    # dq (cells x nodes)
    dq = (mob[:, None] / h) * (dmu[1:, :] - dmu[:-1, :])
    cells = np.arange(n)
    dq[cells, cells] += 0.5 * dmob * grad_mu
    dq[cells, cells + 1] += 0.5 * dmob * grad_mu
    J = np.zeros((n + 1, n + 1))
    J[np.arange(n + 1), np.arange(n + 1)] = weights
    J[1:, :] += tau * dq
    J[:-1, :] -= tau * dq
    J[0, :] += tau * bc.kappa_left * dmu[0, :]
    J[-1, :] += tau * bc.kappa_right * dmu[-1, :]
    return J


def diffusion_step(
    params: MaterialParams,
    grid: Grid1D,
    F_cells: np.ndarray,
    c_prev: np.ndarray,
    tau: float,
    bc: BCSpec,
    t: float,
    tol: float = 1e-10,
    max_newton: int = 50,
    max_backtrack: int = 40,
):
    """One implicit Euler step of the degenerate diffusion equation at
    frozen deformation, solved by damped Newton.

    Damping rejects any iterate with min c <= 0.  With kappa = 0 the flux
    form telescopes, so the discrete mass is conserved to the residual
    tolerance.  Raises :class:`PositivityLoss` when no damping preserves
    positivity and :class:`NoConvergence` on iteration-cap exhaustion.
    """
    if np.min(c_prev) <= 0.0:
        raise PositivityLoss("implicit diffusion step requires strictly positive concentration")
    weights = node_weights(grid)
    c = np.array(c_prev, dtype=float)
    r, mu = _diff_residual(params, grid, F_cells, c, c_prev, tau, bc, t, weights)
    rn = _dual_norm(r, weights)
    iters = 0
    while rn > tol:
        if iters >= max_newton:
            raise NoConvergence(f"diffusion Newton exceeded {max_newton} iterations (residual {rn:.3e})")
        J = _diff_jacobian(params, grid, F_cells, c, tau, bc, weights)
        try:
            delta = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            delta = -r / max(float(np.max(np.abs(np.diag(J)))), 1e-30)
        s = 1.0
        accepted = False
        only_positivity = True
        for _ in range(max_backtrack + 1):
            cand = c + s * delta
            if np.min(cand) <= 0.0:
                s *= 0.5
                continue
            r_new, mu_new = _diff_residual(params, grid, F_cells, cand, c_prev, tau, bc, t, weights)
            rn_new = _dual_norm(r_new, weights)
            if rn_new < rn:
                accepted = True
                break
            only_positivity = False
            s *= 0.5
        if not accepted:
            if only_positivity:
                raise PositivityLoss("no damping preserves c > 0")
            raise NoConvergence("diffusion line search failed to reduce the residual")
        c, r, mu, rn = cand, r_new, mu_new, rn_new
        iters += 1
    return c, {"residual": rn, "iterations": iters, "mu": mu}


# ---------------------------------------------------------------------------
# full run
# ---------------------------------------------------------------------------

def default_cascade(m: float, n_levels: int = 8) -> tuple:
    """Norm-exponent ladder recorded in the ledger: q_n = 2^n (2 - m) + m - 1
    (valid for 1 <= m < 2, the plain doubling ladder otherwise)."""
    if 1.0 <= m < 2.0:
        return tuple(2.0 ** nn * (2.0 - m) + m - 1.0 for nn in range(n_levels + 1))
    return tuple(float(2 ** nn) for nn in range(n_levels + 1))


def _ledger_columns(cascade_q: tuple) -> tuple:
    extras = (
        "mass",
        "residual_mech",
        "residual_diff",
        "linf_c",
        "min_c",
        "min_F",
        "llogl",
        "h1_u",
        "l2_rho",
        "lp_d2u",
        "mu_left",
        "mu_right",
    )
    return extras + tuple(f"lq_c_{q:g}" for q in cascade_q)


def run_nonlinear(
    params: MaterialParams,
    grid: Grid1D,
    loading: BoundLoading,
    bc: BCSpec,
    tau: float,
    T: float,
    eps: float,
    u0: Optional[np.ndarray] = None,
    rho0: Optional[np.ndarray] = None,
    tol: float = 1e-10,
    max_newton: int = 50,
    max_backtrack: int = 40,
    cascade_q: Optional[tuple] = None,
) -> NonlinearRun:
    """Alternate mechanical and diffusion steps over ceil(T / tau) steps.

    The loading is applied as eps * (f_star, g_star) and the initial data
    are chi0 = id + eps*u0, c0 = c_eq + eps*rho0.  The returned run stores
    every step (desk scale) and a filled energy ledger in rescaled units.
    Step failures propagate with the failing time attached.
    """
    if tau <= 0.0 or T <= 0.0 or eps <= 0.0:
        raise ValueError("tau, T and eps must be positive")
    nn = grid.n_nodes
    u0 = np.zeros(nn) if u0 is None else np.asarray(u0, dtype=float)
    rho0 = np.zeros(nn) if rho0 is None else np.asarray(rho0, dtype=float)
    if abs(u0[0]) > 1e-14:
        raise ValueError("initial displacement must vanish at the pinned end")
    w = eps * u0
    w[0] = 0.0
    c = params.c_eq + eps * rho0
    if np.min(1.0 + gradient(grid, w)) <= 0.0:
        raise OrientationLoss("(A8) initial deformation gradient must stay positive", time=0.0)
    if np.min(c) <= 0.0:
        raise PositivityLoss("initial concentration must be strictly positive", time=0.0)

    cascade = tuple(cascade_q) if cascade_q is not None else default_cascade(params.m)
    ledger = EnergyLedger(tau, extra_columns=_ledger_columns(cascade))
    n_steps = int(np.ceil(T / tau - 1e-12))
    times = tau * np.arange(n_steps + 1)
    W = np.empty((n_steps + 1, nn))
    C = np.empty((n_steps + 1, nn))
    W[0] = w
    C[0] = c
    weights = node_weights(grid)

    f_star_prev = loading.f_star(0.0)
    g_star_prev = loading.g_star(0.0)
    _append_nonlinear_row(
        ledger, params, grid, weights, w, c, 0.0, eps,
        f_star_prev, g_star_prev, bc,
        diss_mech=0.0, diss_diff=0.0, flux_boundary=0.0, load_power=0.0,
        residual_mech=0.0, residual_diff=0.0, cascade=cascade,
    )

    C_prev_cells = (1.0 + gradient(grid, w)) ** 2
    for k in range(1, n_steps + 1):
        t = float(times[k])
        f_star = loading.f_star(t)
        g_star = loading.g_star(t)
        try:
            w_new, minfo = mechanical_step(
                params, grid, w, c, tau, eps * f_star, eps * g_star,
                C_prev=C_prev_cells, tol=tol, max_newton=max_newton, max_backtrack=max_backtrack,
            )
            F_new = 1.0 + gradient(grid, w_new)
            c_new, dinfo = diffusion_step(
                params, grid, F_new, c, tau, bc, t,
                tol=tol, max_newton=max_newton, max_backtrack=max_backtrack,
            )
        except SolverError as err:
            raise type(err)(str(err), time=t) from err

        cdot_cells = (F_new ** 2 - C_prev_cells) / tau
        diss_mech = grid.h * float(np.sum(0.5 * params.D_tilde * cdot_cells ** 2)) / eps ** 2
        load_power = (
            float(np.sum(weights * (f_star - f_star_prev) * (w / eps)))
            + (g_star - g_star_prev) * (w[-1] / eps)
        ) / tau
        _append_nonlinear_row(
            ledger, params, grid, weights, w_new, c_new, t, eps,
            f_star, g_star, bc,
            diss_mech=diss_mech, diss_diff=None, flux_boundary=None,
            load_power=load_power,
            residual_mech=minfo["residual"], residual_diff=dinfo["residual"],
            cascade=cascade,
        )
        w, c = w_new, c_new
        W[k] = w
        C[k] = c
        C_prev_cells = F_new ** 2
        f_star_prev, g_star_prev = f_star, g_star
    return NonlinearRun(params, grid, eps, times, W, C, ledger)


def _append_nonlinear_row(
    ledger, params, grid, weights, w, c, t, eps, f_star, g_star, bc,
    diss_mech, diss_diff, flux_boundary, load_power,
    residual_mech, residual_diff, cascade,
):
    h = grid.h
    F = 1.0 + gradient(grid, w)
    c_hat = cell_average(c)
    G = second_derivative(grid, w)
    stored = h * float(np.sum(mat.free_energy(params, F, c_hat)))
    stored += h * float(np.sum(mat.hyperstress(params, G[1:-1])[0]))
    u = w / eps
    load_pair = float(np.sum(weights * f_star * u)) + g_star * u[-1]
    energy = stored / eps ** 2 - load_pair

    mu = nodal_chemical_potential(params, grid, F, c)
    if diss_diff is None:
        grad_mu = (mu[1:] - mu[:-1]) / h
        mob = mat.mobility(params, F, c_hat)
        diss_diff = h * float(np.sum(mob * grad_mu ** 2)) / eps ** 2
    if flux_boundary is None:
        mu_ext = bc.mu_ext_value(t)
        flux_boundary = (
            bc.kappa_left * (mu[0] - mu_ext) * mu[0]
            + bc.kappa_right * (mu[-1] - mu_ext) * mu[-1]
        ) / eps ** 2

    rho = (c - params.c_eq) / eps
    d2u = second_derivative(grid, w) / eps
    row = {
        "t": t,
        "energy": energy,
        "diss_mech": diss_mech,
        "diss_diff": diss_diff,
        "flux_boundary": flux_boundary,
        "load_power": load_power,
        "mass": mass(grid, c),
        "residual_mech": residual_mech,
        "residual_diff": residual_diff,
        "linf_c": linf_norm(grid, c),
        "min_c": float(np.min(c)),
        "min_F": float(np.min(F)),
        "llogl": llogl_deviation(grid, np.maximum(c, 0.0), params.c_eq),
        "h1_u": h1_norm(grid, u),
        "l2_rho": lq_norm(grid, rho, 2),
        "lp_d2u": lq_norm(grid, d2u, params.p),
        "mu_left": mu[0],
        "mu_right": mu[-1],
    }
    for q in cascade:
        row[f"lq_c_{q:g}"] = lq_norm(grid, c, q)
    ledger.append(**row)


# ---------------------------------------------------------------------------
# structure checks and rescaling
# ---------------------------------------------------------------------------

def check_dissipation_inequality(ledger: EnergyLedger) -> float:
    """Worst violation of the discrete energy-dissipation inequality:

        max over t of [ E(t) + sum_{s<=t} (tau * (diffusive + viscous
        + boundary-flux rates) + tau * loading power) - E(0) ].

    Nonpositive (up to solver tolerance) for a valid staggered run.
    """
    E = ledger.column("energy")
    terms = ledger.tau * (
        ledger.column("diss_mech")
        + ledger.column("diss_diff")
        + ledger.column("flux_boundary")
        + ledger.column("load_power")
    )
    terms[0] = 0.0
    expr = E - E[0] + np.cumsum(terms)
    return float(np.max(expr))


def rescale(run: NonlinearRun, eps: Optional[float] = None) -> RescaledTrajectory:
    """Rescaled displacement, concentration variation, chemical potential
    and mobility flux along a trajectory.

    The flux gradient uses the chain rule
        grad mu = d2_Fc Phi * D^2 chi + d2_cc Phi * grad c
    with centered cell differences for D^2 chi.
    """
    eps = run.eps if eps is None else eps
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    params, grid = run.params, run.grid
    h = grid.h
    K = run.n_steps
    n_cells = grid.n_cells
    u = run.displacement / eps
    rho = (run.concentration - params.c_eq) / eps
    mu_star = np.empty((K + 1, grid.n_nodes))
    flux = np.empty((K + 1, n_cells))
    for k in range(K + 1):
        w = run.displacement[k]
        c = run.concentration[k]
        F = 1.0 + gradient(grid, w)
        c_hat = cell_average(c)
        mu_star[k] = nodal_chemical_potential(params, grid, F, c) / eps
        d2chi = np.empty(n_cells)
        d2chi[1:-1] = (F[2:] - F[:-2]) / (2.0 * h)
        d2chi[0] = (F[1] - F[0]) / h
        d2chi[-1] = (F[-1] - F[-2]) / h
        _, fc, cc = mat.free_energy_hessian(params, F, c_hat)
        grad_c = (c[1:] - c[:-1]) / h
        grad_mu = fc * d2chi + cc * grad_c
        flux[k] = mat.mobility(params, F, c_hat) * grad_mu / eps
    return RescaledTrajectory(run.times.copy(), u, rho, mu_star, flux)


def direct_difference_flux(run: NonlinearRun, k: int) -> np.ndarray:
    """Cellwise flux from direct differences of the nodal discrete
    potential (oracle for the chain-rule flux)."""
    params, grid = run.params, run.grid
    w = run.displacement[k]
    c = run.concentration[k]
    F = 1.0 + gradient(grid, w)
    mu = nodal_chemical_potential(params, grid, F, c)
    return mat.mobility(params, F, cell_average(c)) * (mu[1:] - mu[:-1]) / grid.h / run.eps
