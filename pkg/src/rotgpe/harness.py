"""Convergence studies in epsilon: error measurement and order fitting.

The study integrates the full gauged model and the averaged limit model
from the same initial state and records, at snapshot times, the filtered
L2 distance between them. With corrected_data the limit model is re-solved
for every epsilon from the gauged initial state (which is then no longer
polarized) and the expected order improves from one to two.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, asdict, field as dc_field

import numpy as np

from . import dynamics, field as field_mod, oscillator2d


@dataclass
class ConvergenceReport:
    epsilons: list
    errors: list
    fitted_order: float
    intercept: float
    max_residual: float
    runtimes: list
    corrected_data: bool
    snapshot_times: list
    non_monotone: bool
    config_fingerprint: str
    dt_full: float
    dt_limit: float
    warnings: list = dc_field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def plot_data(self) -> str:
        """Two-column (epsilon, error) text block for external plotting."""
        lines = ["# epsilon  max_filtered_L2_error"]
        for e, r in zip(self.epsilons, self.errors):
            lines.append(f"{e:.10e}  {r:.10e}")
        return "\n".join(lines) + "\n"


def fit_order(epsilons, errors):
    """Least-squares slope of log(error) vs log(epsilon).

    Returns (slope, intercept, max_residual). Requires at least three
    strictly decreasing epsilons and positive errors.
    """
    eps = np.asarray(epsilons, dtype=float)
    err = np.asarray(errors, dtype=float)
    if eps.size < 3:
        raise ValueError("need at least 3 epsilon values to fit an order")
    if np.any(np.diff(eps) >= 0):
        raise ValueError("epsilons must be strictly decreasing")
    if np.any(err <= 0) or not np.all(np.isfinite(err)):
        raise ValueError("errors must be positive and finite")
    le, lr = np.log(eps), np.log(err)
    slope, intercept = np.polyfit(le, lr, 1)
    resid = float(np.abs(lr - (slope * le + intercept)).max())
    return float(slope), float(intercept), resid


def default_initial_state(grid: field_mod.Grid3D) -> np.ndarray:
    """Normalized 2D Gaussian profile times the z ground mode (Hermite-z rep)."""
    prof = oscillator2d.ground_state_profile(grid)
    prof = prof / np.sqrt(np.sum(prof**2) * grid.cell)
    c = np.zeros(grid.shape(field_mod.HERMITE_Z), dtype=complex)
    c[:, :, 0] = prof
    return c


def _fingerprint(params: field_mod.SimParams, epsilons, corrected, dt_limit,
                 snapshot_dt) -> str:
    blob = repr((params, tuple(epsilons), bool(corrected), dt_limit,
                 snapshot_dt)).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def run_convergence(params_base: field_mod.SimParams, epsilons,
                    corrected_data: bool = False, dt_limit: float = 0.0,
                    snapshot_dt: float = 0.05, n_theta_limit: int = 0,
                    psi0: np.ndarray | None = None,
                    grid: field_mod.Grid3D | None = None) -> ConvergenceReport:
    """Measure max-in-time filtered L2 errors of the limit model vs epsilon.

    params_base.dt is the full-model step; dt_limit (default 5x that) is the
    limit-model step, which tolerates a larger step since the stiff scale is
    absent there. Snapshot times must be multiples of both steps.
    """
    epsilons = sorted(float(e) for e in epsilons)[::-1]
    if grid is None:
        grid = field_mod.Grid3D.from_params(params_base)
    if psi0 is None:
        psi0 = default_initial_state(grid)
    dt_full = params_base.dt
    if dt_limit <= 0.0:
        dt_limit = 5.0 * dt_full
    t_final = params_base.t_final
    n_snap = round(t_final / snapshot_dt)
    per_full = round(snapshot_dt / dt_full)
    per_limit = round(snapshot_dt / dt_limit)
    for name, per, dt in (("full", per_full, dt_full), ("limit", per_limit, dt_limit)):
        if abs(per * dt - snapshot_dt) > 1e-12:
            raise ValueError(f"snapshot_dt is not a multiple of the {name} step {dt}")
    warnings = []
    o1, o2, _ = params_base.omega
    X1, X2, Z = grid.meshes()
    lam_n = grid.basis.eigenvalues
    snap_times = [snapshot_dt * (k + 1) for k in range(n_snap)]

    limit_params = field_mod.with_params(params_base, dt=dt_limit)

    phi_snaps_shared = None
    if not corrected_data:
        # a single polarized limit solve serves every epsilon
        stepper = dynamics.PhiStepper(grid, limit_params, n_theta=n_theta_limit)
        warnings += stepper.warnings
        c = psi0.copy()
        phi_snaps_shared = []
        for _ in range(n_snap):
            for _ in range(per_limit):
                c = stepper.step(c)
            phi_snaps_shared.append(c.copy())

    errors, runtimes = [], []
    for eps in epsilons:
        t0 = time.perf_counter()
        gauge = np.exp(1j * eps * Z * (o1 * X2 - o2 * X1))
        u = grid.basis.forward(grid.basis.backward(psi0) * np.conj(gauge))
        p_eps = field_mod.with_params(params_base, epsilon=eps)
        full = dynamics.UStepper(grid, p_eps)
        warnings += full.warnings
        if corrected_data:
            # the corrected initial state is the gauged one; it is not
            # polarized, so the limit model must be re-solved per epsilon
            lim = dynamics.PhiStepper(
                grid, field_mod.with_params(limit_params, epsilon=eps),
                n_theta=n_theta_limit)
            c = u.copy()
        max_err = 0.0
        for k in range(n_snap):
            for _ in range(per_full):
                u = full.step(u)
            if corrected_data:
                for _ in range(per_limit):
                    c = lim.step(c)
                phi_k = c
            else:
                phi_k = phi_snaps_shared[k]
            t = snap_times[k]
            filt = phi_k * np.exp(-1j * t * lam_n / eps**2)
            if corrected_data:
                # compare in the gauged frame: psi ~ gauge * filtered phi^eps
                diff = u - filt
            else:
                psi = grid.basis.forward(grid.basis.backward(u) * gauge)
                diff = psi - filt
            err = float(np.sqrt(np.sum(np.abs(diff) ** 2) * grid.cell))
            max_err = max(max_err, err)
        errors.append(max_err)
        runtimes.append(time.perf_counter() - t0)

    slope, intercept, resid = fit_order(epsilons, errors)
    non_monotone = bool(np.any(np.diff(errors) >= 0))
    if non_monotone:
        warnings.append(
            "errors are not monotone in epsilon; grid or time step may be "
            "under-resolved for the smallest epsilon"
        )
    return ConvergenceReport(
        epsilons=list(epsilons), errors=errors, fitted_order=slope,
        intercept=intercept, max_residual=resid, runtimes=runtimes,
        corrected_data=bool(corrected_data), snapshot_times=snap_times,
        non_monotone=non_monotone,
        config_fingerprint=_fingerprint(
            params_base, epsilons, corrected_data, dt_limit, snapshot_dt),
        dt_full=dt_full, dt_limit=dt_limit,
        warnings=sorted(set(warnings)),
    )
