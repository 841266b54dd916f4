"""Command-line entry point, config schema and output-file contracts.

Configs are JSON key trees with an explicit schema version; outputs are
CSV files (17 significant digits) plus a summary JSON carrying the config
hash and per-invariant pass/fail results.  Exit codes: 0 success, 2 for
"ran fine but a structure invariant failed" (the failing check is named),
1 for usage or runtime errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import constitutive as mat
from .constitutive import (
    InadmissibleMaterial,
    MaterialParams,
    linearize,
    max_antisymmetric_action,
    min_symmetric_eigenvalue,
    mobility_log_bound_constant,
    power_difference_bound_constant,
    verification_grid,
)
from .discretization import BCSpec, Grid1D, mass
from .experiments import (
    eps_sweep,
    long_time_decay,
    moser_diagnostic,
)
from .linear_solver import check_energy_balance, run_linear, static_solve
from .loading import LoadingSpec, SpatialProfile, TimeAmplitude
from .nonlinear_solver import check_dissipation_inequality, rescale, run_nonlinear

SCHEMA_VERSION = 1

__all__ = [
    "ParseError",
    "ValidationError",
    "ProblemConfig",
    "parse_config",
    "default_config_path",
    "main",
    "console_main",
]


class ParseError(ValueError):
    """Config file is missing or not valid JSON."""


class ValidationError(ValueError):
    """Config parsed but one or more fields are invalid."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ProblemConfig:
    """Validated run configuration binding all modules together."""

    schema_version: int
    material: MaterialParams
    grid: Grid1D
    tau: float
    T: float
    decay_tau: float
    decay_T: float
    checkpoint_times: Optional[tuple]
    loading: LoadingSpec
    bc: BCSpec
    u0_profile: SpatialProfile
    rho0_profile: SpatialProfile
    eps: float
    eps_list: tuple
    tol: float
    max_newton: int
    max_backtrack: int
    checks: dict
    seed: int
    output_dir: Optional[str]
    raw: dict
    config_hash: str

    def initial_fields(self):
        x = self.grid.nodes
        return self.u0_profile.sample(x), self.rho0_profile.sample(x)


def default_config_path() -> Path:
    """Path of the shipped default Biot configuration."""
    return Path(__file__).parent / "data" / "biot_default.json"


DEFAULT_CHECKS = {
    "dissipation_tol": 1e-9,
    "mass_tol": 1e-12,
    "residual_tol": 1e-10,
    "balance_tol": 0.1,
    "derivative_tol": 1e-6,
    "antisym_tol": 1e-6,
    "audit_ratio_max": 3.0,
    "moser_gap_rel": 0.01,
    "decay_final_ratio": 1e-6,
    "static_residual_tol": 1e-12,
    "uniqueness_tol": 1e-10,
}


def _get(section: dict, key: str, default, errors: list, where: str, cast=None):
    val = section.get(key, default)
    if cast is not None and val is not None:
        try:
            return cast(val)
        except (TypeError, ValueError):
            errors.append(f"{where}.{key}: cannot interpret {val!r}")
            return default
    return val


def _amplitude(node, errors, where) -> TimeAmplitude:
    if node is None:
        return TimeAmplitude()
    try:
        return TimeAmplitude(
            kind=node.get("kind", "constant"),
            scale=float(node.get("scale", 0.0)),
            t_ramp=float(node.get("t_ramp", 1.0)),
            rate=float(node.get("rate", 1.0)),
        )
    except (ValueError, AttributeError) as err:
        errors.append(f"{where}: {err}")
        return TimeAmplitude()


def _profile(node, errors, where) -> SpatialProfile:
    if node is None:
        return SpatialProfile()
    try:
        values = node.get("values")
        return SpatialProfile(
            kind=node.get("kind", "zero"),
            scale=float(node.get("scale", 1.0)),
            values=tuple(values) if values is not None else None,
        )
    except (ValueError, AttributeError) as err:
        errors.append(f"{where}: {err}")
        return SpatialProfile()


def parse_config(path) -> ProblemConfig:
    """Load and validate a configuration file.

    Raises :class:`ParseError` on malformed JSON and
    :class:`ValidationError` (with every field-level error collected, the
    violated model assumption named) on invalid contents.
    """
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as err:
        raise ParseError(f"cannot read config {p}: {err}") from err
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"config {p} is not valid JSON: {err}") from err
    if not isinstance(raw, dict):
        raise ParseError(f"config {p} must be a JSON object")

    errors: list[str] = []
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        errors.append(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")

    mat_node = raw.get("material", {})
    material = None
    try:
        kwargs = dict(mat_node)
        if "M0" in kwargs and isinstance(kwargs["M0"], list):
            kwargs["M0"] = tuple(tuple(row) for row in kwargs["M0"])
        material = MaterialParams(**kwargs)
    except InadmissibleMaterial as err:
        errors.append(f"material: {err}")
    except TypeError as err:
        errors.append(f"material: unknown or missing field ({err})")

    grid_node = raw.get("grid", {})
    grid = None
    try:
        grid = Grid1D(int(grid_node.get("n_cells", 64)))
    except (ValueError, TypeError) as err:
        errors.append(f"grid: {err}")

    time_node = raw.get("time", {})
    tau = _get(time_node, "tau", 1e-3, errors, "time", float)
    T = _get(time_node, "T", 1.0, errors, "time", float)
    if tau is not None and tau <= 0.0:
        errors.append("time.tau must be positive")
    if T is not None and T <= 0.0:
        errors.append("time.T must be positive")
    cps = time_node.get("checkpoint_times")
    checkpoints = tuple(float(t) for t in cps) if cps else None
    decay_T = _get(time_node, "decay_T", 50.0, errors, "time", float)
    decay_tau = _get(time_node, "decay_tau", 0.02, errors, "time", float)
    if decay_T is not None and decay_T <= 0.0:
        errors.append("time.decay_T must be positive")
    if decay_tau is not None and decay_tau <= 0.0:
        errors.append("time.decay_tau must be positive")

    load_node = raw.get("loading", {})
    loading = None
    try:
        loading = LoadingSpec(
            f_profile=_profile(load_node.get("f_profile"), errors, "loading.f_profile"),
            f_amplitude=_amplitude(load_node.get("f_amplitude"), errors, "loading.f_amplitude"),
            g_amplitude=_amplitude(load_node.get("g_amplitude"), errors, "loading.g_amplitude"),
            eps=float(raw.get("eps", 1.0)),
        )
    except ValueError as err:
        errors.append(f"loading: {err}")

    bc_node = raw.get("bc", {})
    bc = None
    try:
        mu_ext = _amplitude(bc_node.get("mu_ext"), errors, "bc.mu_ext")
        bc = BCSpec(
            kappa_left=float(bc_node.get("kappa_left", 0.0)),
            kappa_right=float(bc_node.get("kappa_right", 0.0)),
            mu_ext=mu_ext,
            zero_flux=bool(bc_node.get("zero_flux", False)),
        )
    except ValueError as err:
        errors.append(f"bc: {err}")

    init_node = raw.get("initial", {})
    u0_profile = _profile(init_node.get("u0"), errors, "initial.u0")
    rho0_profile = _profile(init_node.get("rho0"), errors, "initial.rho0")

    eps = _get(raw, "eps", 0.1, errors, "config", float)
    if eps is not None and eps <= 0.0:
        errors.append("eps must be positive")
    eps_list = raw.get("eps_list", [0.2, 0.1, 0.05, 0.025])
    try:
        eps_list = tuple(float(e) for e in eps_list)
        if len(eps_list) >= 2 and np.any(np.diff(eps_list) >= 0.0):
            errors.append("eps_list must be strictly decreasing")
    except (TypeError, ValueError):
        errors.append("eps_list must be a list of numbers")
        eps_list = (0.2, 0.1, 0.05)

    solver_node = raw.get("solver", {})
    tol = _get(solver_node, "tol", 1e-11, errors, "solver", float)
    max_newton = _get(solver_node, "max_newton", 50, errors, "solver", int)
    max_backtrack = _get(solver_node, "max_backtrack", 40, errors, "solver", int)

    checks = dict(DEFAULT_CHECKS)
    for key, val in raw.get("checks", {}).items():
        if key not in DEFAULT_CHECKS:
            errors.append(f"checks.{key}: unknown check name")
        else:
            checks[key] = float(val)

    seed = _get(raw, "seed", 0, errors, "config", int)

    if errors:
        raise ValidationError(errors)

    digest = hashlib.sha256(
        json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    return ProblemConfig(
        schema_version=SCHEMA_VERSION,
        material=material,
        grid=grid,
        tau=tau,
        T=T,
        decay_tau=decay_tau,
        decay_T=decay_T,
        checkpoint_times=checkpoints,
        loading=loading,
        bc=bc,
        u0_profile=u0_profile,
        rho0_profile=rho0_profile,
        eps=eps,
        eps_list=eps_list,
        tol=tol,
        max_newton=max_newton,
        max_backtrack=max_backtrack,
        checks=checks,
        seed=seed,
        output_dir=raw.get("output_dir"),
        raw=raw,
        config_hash=digest,
    )


# ---------------------------------------------------------------------------
# deterministic serialization (17 significant digits everywhere)
# ---------------------------------------------------------------------------

def _f17(x: float) -> str:
    return "%.17g" % float(x)


def _json17(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {_json17(v, indent + 1)}' for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            return "[]"
        items = ", ".join(_json17(v, indent + 1) for v in obj)
        return "[" + items + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (float, np.floating)):
        return _f17(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if obj is None:
        return "null"
    return json.dumps(obj)


def _write_csv(path: Path, header: list, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_f17(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_summary(path: Path, config: ProblemConfig, system: str, invariants: list, outputs: list) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": config.config_hash,
        "system": system,
        "invariants": [
            {"name": n, "passed": bool(p), "value": float(v), "tolerance": float(t)}
            for (n, p, v, t) in invariants
        ],
        "outputs": list(outputs),
    }
    path.write_text(_json17(doc) + "\n")


def _checkpoint_indices(times: np.ndarray, checkpoints: Optional[tuple], tau: float) -> np.ndarray:
    if not checkpoints:
        return np.arange(len(times))
    idx = sorted({int(np.argmin(np.abs(times - t))) for t in checkpoints})
    return np.asarray(idx, dtype=int)


def _write_ledger(path: Path, ledger) -> None:
    names = list(ledger.column_names)
    cols = [ledger.column(n) for n in names]
    rows = (tuple(col[i] for col in cols) for i in range(len(ledger)))
    _write_csv(path, names, rows)


def _report(quiet: bool, invariants: list) -> bool:
    ok = True
    for name, passed, value, tol in invariants:
        ok = ok and passed
        if not quiet:
            print(f"{'PASS' if passed else 'FAIL'}  {name}: value {value:.6g} (tolerance {tol:.6g})")
    return ok


def _fail_code(config: ProblemConfig, invariants: list, quiet: bool) -> int:
    if _report(quiet, invariants):
        return 0
    failing = [n for n, p, _, _ in invariants if not p]
    print(f"invariant failure: {', '.join(failing)}", file=sys.stderr)
    return 2


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_simulate_nonlinear(config: ProblemConfig, out: Path, quiet: bool) -> int:
    u0, rho0 = config.initial_fields()
    bound = config.loading.bind(config.grid)
    run = run_nonlinear(
        config.material, config.grid, bound, config.bc,
        tau=config.tau, T=config.T, eps=config.eps, u0=u0, rho0=rho0,
        tol=config.tol, max_newton=config.max_newton, max_backtrack=config.max_backtrack,
    )
    led = run.ledger
    violation = check_dissipation_inequality(led)
    masses = led.column("mass")
    drift = float(np.max(np.abs(masses - masses[0])))
    resid = max(float(np.max(led.column("residual_mech"))), float(np.max(led.column("residual_diff"))))
    chk = config.checks
    kappa_free = config.bc.kappa_left == 0.0 and config.bc.kappa_right == 0.0
    invariants = [
        ("orientation_preserved", float(np.min(led.column("min_F"))) > 0.0, float(np.min(led.column("min_F"))), 0.0),
        ("positivity_preserved", float(np.min(led.column("min_c"))) > 0.0, float(np.min(led.column("min_c"))), 0.0),
        ("dissipation_inequality", violation <= chk["dissipation_tol"], violation, chk["dissipation_tol"]),
        ("weak_residuals", resid <= chk["residual_tol"], resid, chk["residual_tol"]),
    ]
    if kappa_free:
        invariants.insert(2, ("mass_conservation", drift <= chk["mass_tol"], drift, chk["mass_tol"]))
    rs = rescale(run)
    idx = _checkpoint_indices(run.times, config.checkpoint_times, config.tau)
    nn = config.grid.n_nodes
    header = ["t"] + [f"u_{i:03d}" for i in range(nn)] + [f"c_{i:03d}" for i in range(nn)]
    rows = (
        (run.times[k], *rs.u[k], *run.concentration[k]) for k in idx
    )
    _write_csv(out / "trajectory.csv", header, rows)
    _write_ledger(out / "ledger.csv", led)
    _write_summary(out / "summary.json", config, "nonlinear", invariants,
                   ["trajectory.csv", "ledger.csv"])
    return _fail_code(config, invariants, quiet)


def _cmd_simulate_linear(config: ProblemConfig, out: Path, quiet: bool) -> int:
    tensors = linearize(config.material)
    u0, rho0 = config.initial_fields()
    bound = config.loading.bind(config.grid)
    run = run_linear(config.grid, tensors, bound, u0=u0, rho0=rho0, tau=config.tau, T=config.T)
    led = run.ledger
    balance = check_energy_balance(led)
    masses = led.column("mass")
    drift = float(np.max(np.abs(masses - masses[0])))
    chk = config.checks
    invariants = [
        ("mass_conservation", drift <= chk["mass_tol"], drift, chk["mass_tol"]),
        ("energy_balance", balance <= chk["balance_tol"], balance, chk["balance_tol"]),
    ]
    idx = _checkpoint_indices(run.times, config.checkpoint_times, config.tau)
    nn = config.grid.n_nodes
    header = ["t"] + [f"u_{i:03d}" for i in range(nn)] + [f"rho_{i:03d}" for i in range(nn)]
    rows = ((run.times[k], *run.u[k], *run.rho[k]) for k in idx)
    _write_csv(out / "trajectory.csv", header, rows)
    _write_ledger(out / "ledger.csv", led)
    _write_summary(out / "summary.json", config, "linear", invariants,
                   ["trajectory.csv", "ledger.csv"])
    return _fail_code(config, invariants, quiet)


def _cmd_static(config: ProblemConfig, out: Path, quiet: bool) -> int:
    tensors = linearize(config.material)
    x = config.grid.nodes
    f_nodes = config.loading.f_profile.sample(x) * _terminal_value(config.loading.f_amplitude)
    g_value = _terminal_value(config.loading.g_amplitude)
    _, rho0 = config.initial_fields()
    v, xi, nu, residual = static_solve(config.grid, tensors, f_nodes, g_value, mass(config.grid, rho0))
    chk = config.checks
    invariants = [("static_residual", residual <= chk["static_residual_tol"], residual, chk["static_residual_tol"])]
    _write_csv(out / "static.csv", ["x", "v", "xi"], ((x[i], v[i], xi[i]) for i in range(len(x))))
    _write_summary(out / "summary.json", config, "static", invariants, ["static.csv"])
    return _fail_code(config, invariants, quiet)


def _terminal_value(amplitude: TimeAmplitude) -> float:
    # value of a loading amplitude once transients are over; requires a
    # time-independent tail
    if amplitude.kind in ("constant", "ramp"):
        return amplitude.scale
    if amplitude.kind == "linear" and amplitude.rate == 0.0:
        return amplitude.scale
    raise ValidationError(["loading amplitude must be time-independent for this experiment"])


def _cmd_sweep(config: ProblemConfig, out: Path, quiet: bool) -> int:
    u0, rho0 = config.initial_fields()
    bound = config.loading.bind(config.grid)
    result = eps_sweep(
        config.material, config.grid, bound, config.eps_list,
        tau=config.tau, T=config.T, u0=u0, rho0=rho0, tol=config.tol,
    )
    report = result.report
    chk = config.checks
    decreasing = all(
        all(np.diff(report.errors[name]) < 0.0) for name in report.errors
    )
    ratio_ok = all(r <= chk["audit_ratio_max"] for r in report.audit_ratios.values())
    worst_violation = max(report.dissipation_violations)
    invariants = [
        ("sweep_errors_decreasing", decreasing, float(decreasing), 1.0),
        ("audit_ratios", ratio_ok, max(report.audit_ratios.values()), chk["audit_ratio_max"]),
        ("dissipation_inequality", worst_violation <= chk["dissipation_tol"], worst_violation, chk["dissipation_tol"]),
        ("energy_balance", report.energy_balance_residual <= chk["balance_tol"],
         report.energy_balance_residual, chk["balance_tol"]),
    ]
    header = (
        ["eps"]
        + list(report.errors.keys())
        + list(report.audit.keys())
        + ["dissipation_violation"]
    )
    rows = []
    for i, e in enumerate(report.eps):
        rows.append(
            (e, *[report.errors[n][i] for n in report.errors],
             *[report.audit[n][i] for n in report.audit],
             report.dissipation_violations[i])
        )
    _write_csv(out / "sweep.csv", header, rows)
    _write_summary(out / "summary.json", config, "sweep", invariants, ["sweep.csv"])
    return _fail_code(config, invariants, quiet)


def _cmd_verify(config: ProblemConfig, out: Path, quiet: bool) -> int:
    pr = config.material
    chk = config.checks
    rng = np.random.default_rng(config.seed)
    worst = 0.0
    s = 1e-5
    for _ in range(50):
        F = rng.uniform(0.6, 1.6)
        c = rng.uniform(0.3, 3.0)
        fd_sigma = (mat.free_energy(pr, F + s, c) - mat.free_energy(pr, F - s, c)) / (2 * s)
        fd_mu = (mat.free_energy(pr, F, c + s) - mat.free_energy(pr, F, c - s)) / (2 * s)
        worst = max(worst, _rel(mat.stress_elastic(pr, F, c), fd_sigma))
        worst = max(worst, _rel(mat.chemical_potential(pr, F, c), fd_mu))
        ff, fc, cc = mat.free_energy_hessian(pr, F, c)
        worst = max(worst, _rel(ff, (mat.stress_elastic(pr, F + s, c) - mat.stress_elastic(pr, F - s, c)) / (2 * s)))
        worst = max(worst, _rel(fc, (mat.stress_elastic(pr, F, c + s) - mat.stress_elastic(pr, F, c - s)) / (2 * s)))
        worst = max(worst, _rel(cc, (mat.chemical_potential(pr, F, c + s) - mat.chemical_potential(pr, F, c - s)) / (2 * s)))
        Fd = rng.uniform(-1.0, 1.0)
        zfd = (mat.dissipation(pr, F, Fd + s, c)[0] - mat.dissipation(pr, F, Fd - s, c)[0]) / (2 * s)
        worst = max(worst, _rel(mat.dissipation(pr, F, Fd, c)[1], zfd))
        G = rng.uniform(-2.0, 2.0)
        hfd = (mat.hyperstress(pr, G + s)[0] - mat.hyperstress(pr, G - s)[0]) / (2 * s)
        worst = max(worst, _rel(mat.hyperstress(pr, G)[1], hfd))
    invariants = [("derivative_cross_check", worst <= chk["derivative_tol"], worst, chk["derivative_tol"])]

    tensors = linearize(pr)  # raises if the self-check fails
    invariants.append(("linearize_self_check", True, 0.0, chk["derivative_tol"]))

    grid_a = verification_grid(pr.c_eq, 2000)
    grid_b = verification_grid(pr.c_eq, 4000)
    if 0.0 < pr.m < 2.0:
        sup_a = mobility_log_bound_constant(pr.m, pr.c_eq, grid_a)
        sup_b = mobility_log_bound_constant(pr.m, pr.c_eq, grid_b)
        stable = abs(sup_a - sup_b) <= 0.05 * max(sup_a, sup_b)
        invariants.append(("log_bound_finite_stable", np.isfinite(sup_a) and stable, sup_a, 0.05))
    sup2_a = power_difference_bound_constant(pr.r, pr.c_eq, grid_a)
    sup2_b = power_difference_bound_constant(pr.r, pr.c_eq, grid_b)
    stable2 = abs(sup2_a - sup2_b) <= 0.05 * max(sup2_a, sup2_b)
    invariants.append(("power_bound_finite_stable", np.isfinite(sup2_a) and stable2, sup2_a, 0.05))
    if pr.r == 0.0 and pr.c_eq == 1.0:
        invariants.append(("power_bound_unit_fixture", sup2_a <= 1.0 + 1e-9, sup2_a, 1.0 + 1e-9))

    twin = mat.planar_twin(pr)
    max_c, max_d = max_antisymmetric_action(twin, n_samples=10, seed=config.seed)
    lam_min = min_symmetric_eigenvalue(twin)
    invariants.append(("antisymmetric_action", max(max_c, max_d) <= chk["antisym_tol"], max(max_c, max_d), chk["antisym_tol"]))
    invariants.append(("elasticity_positive_definite", lam_min > 0.0, lam_min, 0.0))

    _write_summary(out / "summary.json", config, "verify", invariants, [])
    return _fail_code(config, invariants, quiet)


def _rel(a, b) -> float:
    a = float(np.max(np.abs(np.asarray(a)))) if np.ndim(a) else float(a)
    b = float(np.max(np.abs(np.asarray(b)))) if np.ndim(b) else float(b)
    return abs(a - b) / max(abs(a), abs(b), 1.0)


def _cmd_moser(config: ProblemConfig, out: Path, quiet: bool) -> int:
    u0, rho0 = config.initial_fields()
    bound = config.loading.bind(config.grid)
    run = run_nonlinear(
        config.material, config.grid, bound, config.bc,
        tau=config.tau, T=config.T, eps=config.eps, u0=u0, rho0=rho0, tol=config.tol,
    )
    case = "I" if 1.0 <= config.material.m < 2.0 else config.material.case
    qs, norms, gap = moser_diagnostic(run, N=8, case=case, r=config.material.r)
    sup = norms[-1] + gap
    chk = config.checks
    nondecreasing = bool(np.all(np.diff(norms) >= -1e-12))
    gap_ok = gap <= chk["moser_gap_rel"] * sup
    invariants = [
        ("ladder_nondecreasing", nondecreasing, float(nondecreasing), 1.0),
        ("ladder_bounded_by_sup", norms[-1] <= sup * (1.0 + 1e-8), norms[-1], sup * (1.0 + 1e-8)),
        ("ladder_gap", gap_ok, gap / sup if sup else 0.0, chk["moser_gap_rel"]),
    ]
    _write_csv(out / "moser.csv", ["q", "sup_lq_norm"], zip(qs, norms))
    _write_summary(out / "summary.json", config, "moser", invariants, ["moser.csv"])
    return _fail_code(config, invariants, quiet)


def _cmd_decay(config: ProblemConfig, out: Path, quiet: bool) -> int:
    tensors = linearize(config.material)
    x = config.grid.nodes
    f_nodes = config.loading.f_profile.sample(x) * _terminal_value(config.loading.f_amplitude)
    g_value = _terminal_value(config.loading.g_amplitude)
    u0, rho0 = config.initial_fields()
    result = long_time_decay(config.grid, tensors, f_nodes, g_value, u0=u0, rho0=rho0,
                             tau=config.decay_tau, T=config.decay_T)
    chk = config.checks
    invariants = [
        ("decay_nonincreasing", result.max_increase <= 1e-12, result.max_increase, 1e-12),
        ("decay_final_ratio", result.final_ratio <= chk["decay_final_ratio"],
         result.final_ratio, chk["decay_final_ratio"]),
    ]
    _write_csv(out / "decay.csv", ["t", "energy_distance"],
               zip(result.times, result.curve))
    _write_summary(out / "summary.json", config, "decay", invariants, ["decay.csv"])
    return _fail_code(config, invariants, quiet)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "simulate-nonlinear": _cmd_simulate_nonlinear,
    "simulate-linear": _cmd_simulate_linear,
    "static": _cmd_static,
    "sweep-eps": _cmd_sweep,
    "verify": _cmd_verify,
    "moser-diag": _cmd_moser,
    "decay": _cmd_decay,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="porovisco",
        description="Quasistatic poro-visco-elasticity laboratory",
    )
    sub = parser.add_subparsers(dest="command")
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a JSON configuration")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--eps", type=float, default=None, help="override the load scale")
        p.add_argument("--tau", type=float, default=None, help="override the time step")
        p.add_argument("--cells", type=int, default=None, help="override the cell count")
        p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    """Run one subcommand; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    if args.command is None:
        parser.print_usage()
        return 1
    try:
        config = parse_config(args.config)
    except ParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return 1
    except ValidationError as err:
        for e in err.errors:
            print(f"validation error: {e}", file=sys.stderr)
        return 1
    if args.eps is not None:
        config.eps = args.eps
    if args.tau is not None:
        config.tau = args.tau
    if args.cells is not None:
        config.grid = Grid1D(args.cells)
    out = Path(args.out or config.output_dir or "out")
    out.mkdir(parents=True, exist_ok=True)
    try:
        return _COMMANDS[args.command](config, out, args.quiet)
    except (ValidationError, InadmissibleMaterial) as err:
        print(f"validation error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # solver failures and I/O problems
        print(f"error: {err}", file=sys.stderr)
        return 1


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
