"""Split-step time integrators for the full, averaged, and effective models.

Common design:

* the stiff eps^-2 oscillator term is never time-discretized; it is applied
  as exact eigenphases in the oscillator basis (z-Hermite or x-level),
* one-axis Fourier substeps combine kinetic, rotation, and the order-eps
  mixed-derivative terms into a single diagonal multiplier per axis,
* pointwise potentials and the local |u|^(2 sigma) u term share one exact
  phase substep (the flow preserves |u| pointwise),
* the nonlocal averaged nonlinearity is integrated by explicit midpoint with
  the mass defect removed by rescaling to the pre-substep norm.

Default composition is symmetric (Strang, order 2); a first-order Lie
composition is available for debugging.
"""

from __future__ import annotations

import numpy as np

from . import averaging, field as field_mod, hermite, oscillator2d


class SplitStepPlan:
    """Ordered substeps of one time step: (tag, representation, coefficient).

    Purely descriptive; steppers keep their own compiled phase tables. The
    coefficients of each operator tag sum to dt.
    """

    def __init__(self, dt: float, order: str, tags):
        if order not in ("strang", "lie"):
            raise ValueError("order must be 'strang' or 'lie'")
        self.dt = dt
        self.order = order
        if order == "lie":
            self.substeps = [(tag, rep, dt) for tag, rep in tags]
        else:
            outer = [(tag, rep, 0.5 * dt) for tag, rep in tags[:-1]]
            core = [(tags[-1][0], tags[-1][1], dt)]
            self.substeps = outer + core + list(reversed(outer))

    def coefficients(self, tag: str):
        return [c for t, _, c in self.substeps if t == tag]


def _nl_power(vals: np.ndarray, sigma: float) -> np.ndarray:
    dens = vals.real**2 + vals.imag**2
    if sigma == 1.0:
        return dens
    return dens**sigma


class UStepper:
    """Gauged full 3D model on a Grid3D, strongly confined in z.

    State array: Hermite coefficients in z (last axis), physical in x.
    Substeps: exact z-oscillator phases, two one-axis Fourier multipliers
    carrying kinetic + rotation + order-eps derivative terms, and one exact
    pointwise phase for all potentials plus the local nonlinearity.
    """

    rep = field_mod.HERMITE_Z

    def __init__(self, grid: field_mod.Grid3D, params: field_mod.SimParams,
                 order: str = "strang"):
        self.grid = grid
        self.params = params
        self.warnings = []
        eps = params.epsilon
        o1, o2, oz = params.omega
        h = params.dt
        if h / eps**2 > 2.0 * np.pi:
            self.warnings.append(
                f"dt/eps^2 = {h / eps**2:.3g} exceeds one oscillator period; "
                "phases wrap mod 2*pi"
            )
        X1, X2, Z = grid.meshes()
        K1 = grid.k1[:, None, None]
        K2 = grid.k2[None, :, None]
        m1 = 0.5 * K1**2 + oz * X2 * K1 - 2.0 * eps * o2 * Z * K1
        m2 = 0.5 * K2**2 - oz * X1 * K2 + 2.0 * eps * o1 * Z * K2
        v = (0.5 * (X1**2 + X2**2)
             - 0.5 * (o2 * X1 - o1 * X2) ** 2
             + 1.5 * eps**2 * (o1**2 + o2**2) * Z**2
             - eps * oz * (o1 * X1 + o2 * X2) * Z)
        lam_n = grid.basis.eigenvalues
        self.plan = SplitStepPlan(h, order, [
            ("z_oscillator", field_mod.HERMITE_Z),
            ("x1_multiplier", field_mod.MIXED),
            ("x2_multiplier", field_mod.MIXED),
            ("potential_nonlinear", field_mod.PHYSICAL),
        ])
        cz = {c for c in self.plan.coefficients("z_oscillator")}
        self._ph_z = {c: np.exp(-1j * c * lam_n / eps**2) for c in cz}
        self._ph_m1 = {c: np.exp(-1j * c * m1)
                       for c in set(self.plan.coefficients("x1_multiplier"))}
        self._ph_m2 = {c: np.exp(-1j * c * m2)
                       for c in set(self.plan.coefficients("x2_multiplier"))}
        self._ph_v = {c: np.exp(-1j * c * v)
                      for c in set(self.plan.coefficients("potential_nonlinear"))}
        self._lam = params.coupling
        self._sigma = params.sigma

    def step(self, c: np.ndarray) -> np.ndarray:
        basis = self.grid.basis
        first = True
        for tag, _, coeff in self.plan.substeps:
            if tag == "z_oscillator":
                if not first:
                    c = basis.forward(c)
                c = c * self._ph_z[coeff]
                c = basis.backward(c)
            elif tag == "x1_multiplier":
                c = np.fft.ifft(self._ph_m1[coeff] * np.fft.fft(c, axis=0), axis=0)
            elif tag == "x2_multiplier":
                c = np.fft.ifft(self._ph_m2[coeff] * np.fft.fft(c, axis=1), axis=1)
            else:
                ph = self._ph_v[coeff]
                if self._lam != 0.0:
                    ph = ph * np.exp(
                        -1j * coeff * self._lam * _nl_power(c, self._sigma)
                    )
                c = c * ph
            first = False
        return basis.forward(c)


class PsiStepper:
    """Ungauged full 3D model: conjugates UStepper by the gauge phase."""

    rep = field_mod.PHYSICAL

    def __init__(self, grid, params, order="strang"):
        self.inner = UStepper(grid, params, order)
        self.grid = grid
        self.params = params
        o1, o2, _ = params.omega
        X1, X2, Z = grid.meshes()
        self._gauge = np.exp(1j * params.epsilon * Z * (o1 * X2 - o2 * X1))

    @property
    def warnings(self):
        return self.inner.warnings

    def step(self, psi: np.ndarray) -> np.ndarray:
        u = psi * np.conj(self._gauge)
        u = self.grid.basis.backward(self.inner.step(self.grid.basis.forward(u)))
        return u * self._gauge


class PhiStepper:
    """Averaged 3D limit model on a Grid3D (z enters only as a parameter).

    State: Hermite coefficients in z, physical in x. The averaged
    nonlinearity is nonlocal across z-modes, so its substep is explicit
    midpoint followed by exact mass restoration.
    """

    rep = field_mod.HERMITE_Z

    def __init__(self, grid: field_mod.Grid3D, params: field_mod.SimParams,
                 order: str = "strang", n_theta: int = 0):
        self.grid = grid
        self.params = params
        self.warnings = []
        o1, o2, oz = params.omega
        if o1**2 + o2**2 >= 1.0:
            self.warnings.append(
                f"Omega_1^2 + Omega_2^2 = {o1**2 + o2**2:.3g} >= 1: "
                "effective x-potential is not confining"
            )
        h = params.dt
        X1, X2, _ = grid.meshes()
        K1 = grid.k1[:, None, None]
        K2 = grid.k2[None, :, None]
        m1 = 0.5 * K1**2 + oz * X2 * K1
        m2 = 0.5 * K2**2 - oz * X1 * K2
        v = 0.5 * (X1**2 + X2**2) - 0.5 * (o2 * X1 - o1 * X2) ** 2
        self.plan = SplitStepPlan(h, order, [
            ("x1_multiplier", field_mod.MIXED),
            ("x2_multiplier", field_mod.MIXED),
            ("potential", field_mod.HERMITE_Z),
            ("averaged_nonlinear", field_mod.HERMITE_Z),
        ])
        self._ph_m1 = {c: np.exp(-1j * c * m1)
                       for c in set(self.plan.coefficients("x1_multiplier"))}
        self._ph_m2 = {c: np.exp(-1j * c * m2)
                       for c in set(self.plan.coefficients("x2_multiplier"))}
        self._ph_v = {c: np.exp(-1j * c * v)
                      for c in set(self.plan.coefficients("potential"))}
        self.averager = averaging.ZAverager(
            grid, params.sigma, params.coupling,
            n_theta if n_theta > 0 else params.theta_points,
        )

    def _nl_substep(self, c: np.ndarray, h: float) -> np.ndarray:
        if self.averager.lam == 0.0:
            return c
        n0 = np.linalg.norm(c)
        mid = c - 0.5j * h * self.averager.f_av(c)
        out = c - 1j * h * self.averager.f_av(mid)
        # midpoint is not exactly unitary; restore the invariant mass
        return out * (n0 / np.linalg.norm(out))

    def step(self, c: np.ndarray) -> np.ndarray:
        for tag, _, coeff in self.plan.substeps:
            if tag == "x1_multiplier":
                c = np.fft.ifft(self._ph_m1[coeff] * np.fft.fft(c, axis=0), axis=0)
            elif tag == "x2_multiplier":
                c = np.fft.ifft(self._ph_m2[coeff] * np.fft.fft(c, axis=1), axis=1)
            elif tag == "potential":
                c = c * self._ph_v[coeff]
            else:
                c = self._nl_substep(c, coeff)
        return c


class VarphiStepper:
    """Effective 2D model in band n: same linear structure as the limit
    model, with the collapsed coupling kappa_n and an exact phase substep.

    State: 2D physical array over (x1, x2).
    """

    rep = field_mod.PHYSICAL

    def __init__(self, grid: field_mod.Grid3D, params: field_mod.SimParams,
                 band: int = 0, order: str = "strang"):
        self.grid = grid
        self.params = params
        self.band = band
        self.warnings = []
        o1, o2, oz = params.omega
        h = params.dt
        x1 = grid.x1[:, None]
        x2 = grid.x2[None, :]
        k1 = grid.k1[:, None]
        k2 = grid.k2[None, :]
        m1 = 0.5 * k1**2 + oz * x2 * k1
        m2 = 0.5 * k2**2 - oz * x1 * k2
        v = 0.5 * (x1**2 + x2**2) - 0.5 * (o2 * x1 - o1 * x2) ** 2
        self.plan = SplitStepPlan(h, order, [
            ("x1_multiplier", field_mod.FOURIER_X),
            ("x2_multiplier", field_mod.FOURIER_X),
            ("potential", field_mod.PHYSICAL),
            ("band_nonlinear", field_mod.PHYSICAL),
        ])
        self._ph_m1 = {c: np.exp(-1j * c * m1)
                       for c in set(self.plan.coefficients("x1_multiplier"))}
        self._ph_m2 = {c: np.exp(-1j * c * m2)
                       for c in set(self.plan.coefficients("x2_multiplier"))}
        self._ph_v = {c: np.exp(-1j * c * v)
                      for c in set(self.plan.coefficients("potential"))}
        self.kappa = hermite.kappa_n(band, params.sigma, params.coupling)
        self._sigma = params.sigma

    def step(self, c: np.ndarray) -> np.ndarray:
        for tag, _, coeff in self.plan.substeps:
            if tag == "x1_multiplier":
                c = np.fft.ifft(self._ph_m1[coeff] * np.fft.fft(c, axis=0), axis=0)
            elif tag == "x2_multiplier":
                c = np.fft.ifft(self._ph_m2[coeff] * np.fft.fft(c, axis=1), axis=1)
            elif tag == "potential":
                c = c * self._ph_v[coeff]
            elif self.kappa != 0.0:
                c = c * np.exp(-1j * coeff * self.kappa * _nl_power(c, self._sigma))
        return c


class UStepper2DConf:
    """Gauged full model with strong confinement in the (x1, x2) plane.

    State on a GridXConf: tensor-Hermite x coefficients (triangular
    truncation, first two axes), physical z (last axis). The stiff
    eps^-2 H_x term and the rotation -Omega_z L_z share one exact modal
    phase substep (they commute and are simultaneously diagonal in the
    joint level basis).
    """

    rep = field_mod.XMODES

    def __init__(self, grid: field_mod.GridXConf, params: field_mod.SimParams,
                 order: str = "strang"):
        self.grid = grid
        self.params = params
        self.warnings = []
        eps = params.epsilon
        o1, o2, oz = params.omega
        h = params.dt
        if h / eps**2 > 2.0 * np.pi:
            self.warnings.append(
                f"dt/eps^2 = {h / eps**2:.3g} exceeds one oscillator period; "
                "phases wrap mod 2*pi"
            )
        self.joint = oscillator2d.build_joint_basis(grid.n_modes - 1)
        X1, X2, Z = grid.meshes()
        KZ = grid.kz[None, None, :]
        mz = 0.5 * KZ**2 - 2.0 * eps * (o1 * X2 - o2 * X1) * KZ
        v = (0.5 * (1.0 - o1**2 - o2**2) * Z**2
             + eps * oz * (o1 * X1 + o2 * X2) * Z
             + 1.5 * eps**2 * (o2 * X1 - o1 * X2) ** 2)
        self.plan = SplitStepPlan(h, order, [
            ("x_oscillator", field_mod.XMODES),
            ("z_multiplier", field_mod.FOURIER_Z),
            ("potential_nonlinear", field_mod.PHYSICAL),
        ])
        self._ph_x = {}
        for c in set(self.plan.coefficients("x_oscillator")):
            self._ph_x[c] = lambda n, mu, c=c: np.exp(
                -1j * c * ((n + 1.0) / eps**2 - oz * mu)
            )
        self._ph_mz = {c: np.exp(-1j * c * mz)
                       for c in set(self.plan.coefficients("z_multiplier"))}
        self._ph_v = {c: np.exp(-1j * c * v)
                      for c in set(self.plan.coefficients("potential_nonlinear"))}
        self._lam = params.coupling
        self._sigma = params.sigma
        b = grid.basis
        self._to_nodes = b.eval_table            # (N, nq) with nq = N here
        self._to_modes = b.weights[:, None] * b.eval_table.T
        self._mask = grid.triangular_mask()[:, :, None]

    def _x_backward(self, c):
        out = np.tensordot(self._to_nodes, c, axes=(0, 0))
        return np.swapaxes(
            np.tensordot(self._to_nodes, np.swapaxes(out, 0, 1), axes=(0, 0)), 0, 1)

    def _x_forward(self, vals):
        out = np.tensordot(self._to_modes, vals, axes=(0, 0))
        out = np.swapaxes(
            np.tensordot(self._to_modes, np.swapaxes(out, 0, 1), axes=(0, 0)), 0, 1)
        return np.where(self._mask, out, 0.0)

    def step(self, c: np.ndarray) -> np.ndarray:
        # pointwise substeps push a little mass outside the triangular
        # truncation; the projection back would leak it, so restore the norm
        n0 = np.linalg.norm(c)
        modal_x = True
        for tag, _, coeff in self.plan.substeps:
            if tag == "x_oscillator":
                if not modal_x:
                    c = self._x_forward(c)
                    modal_x = True
                c = oscillator2d.propagate_levels(self.joint, c, self._ph_x[coeff])
            elif tag == "z_multiplier":
                if modal_x:
                    c = self._x_backward(c)
                    modal_x = False
                c = np.fft.ifft(self._ph_mz[coeff] * np.fft.fft(c, axis=2), axis=2)
            else:
                if modal_x:
                    c = self._x_backward(c)
                    modal_x = False
                ph = self._ph_v[coeff]
                if self._lam != 0.0:
                    ph = ph * np.exp(
                        -1j * coeff * self._lam * _nl_power(c, self._sigma)
                    )
                c = c * ph
        if not modal_x:
            c = self._x_forward(c)
        n1 = np.linalg.norm(c)
        if n1 > 0.0:
            c = c * (n0 / n1)
        return c


class Psi2DConfStepper:
    """Ungauged x-confined model: conjugates UStepper2DConf by the gauge."""

    rep = field_mod.PHYSICAL

    def __init__(self, grid, params, order="strang"):
        self.inner = UStepper2DConf(grid, params, order)
        self.grid = grid
        self.params = params
        o1, o2, _ = params.omega
        X1, X2, Z = grid.meshes()
        self._gauge = np.exp(1j * params.epsilon * Z * (o2 * X1 - o1 * X2))

    @property
    def warnings(self):
        return self.inner.warnings

    def step(self, psi: np.ndarray) -> np.ndarray:
        u = psi * np.conj(self._gauge)
        u = self.inner._x_backward(self.inner.step(self.inner._x_forward(u)))
        return u * self._gauge


class Phi1DStepper:
    """Averaged limit model for x-confinement on a GridXConf.

    State: tensor-Hermite x coefficients, physical z. The x plane enters
    only through -Omega_z L_z and the averaged nonlinearity.
    """

    rep = field_mod.XMODES

    def __init__(self, grid: field_mod.GridXConf, params: field_mod.SimParams,
                 order: str = "strang", n_theta: int = 0):
        self.grid = grid
        self.params = params
        self.warnings = []
        o1, o2, oz = params.omega
        if o1**2 + o2**2 >= 1.0:
            self.warnings.append(
                f"Omega_1^2 + Omega_2^2 = {o1**2 + o2**2:.3g} >= 1: "
                "effective z-potential is not confining"
            )
        h = params.dt
        self.joint = oscillator2d.build_joint_basis(grid.n_modes - 1)
        kz = grid.kz[None, None, :]
        z = grid.z[None, None, :]
        self._mz = 0.5 * kz**2
        self._vz = 0.5 * (1.0 - o1**2 - o2**2) * z**2
        self.plan = SplitStepPlan(h, order, [
            ("angular", field_mod.XMODES),
            ("z_kinetic", field_mod.XMODES_FOURIER_Z),
            ("z_potential", field_mod.XMODES),
            ("averaged_nonlinear", field_mod.XMODES),
        ])
        self._ph_lz = {}
        for c in set(self.plan.coefficients("angular")):
            self._ph_lz[c] = lambda n, mu, c=c: np.exp(1j * c * oz * mu)
        self._ph_kz = {c: np.exp(-1j * c * self._mz)
                       for c in set(self.plan.coefficients("z_kinetic"))}
        self._ph_vz = {c: np.exp(-1j * c * self._vz)
                       for c in set(self.plan.coefficients("z_potential"))}
        self.averager = averaging.XAverager(
            grid, params.sigma, params.coupling,
            n_theta if n_theta > 0 else params.theta_points,
        )

    def _nl_substep(self, c, h):
        if self.averager.lam == 0.0:
            return c
        n0 = np.linalg.norm(c)
        mid = c - 0.5j * h * self.averager.g_av(c)
        out = c - 1j * h * self.averager.g_av(mid)
        return out * (n0 / np.linalg.norm(out))

    def step(self, c: np.ndarray) -> np.ndarray:
        for tag, _, coeff in self.plan.substeps:
            if tag == "angular":
                c = oscillator2d.propagate_levels(self.joint, c, self._ph_lz[coeff])
            elif tag == "z_kinetic":
                c = np.fft.ifft(self._ph_kz[coeff] * np.fft.fft(c, axis=2), axis=2)
            elif tag == "z_potential":
                c = c * self._ph_vz[coeff]
            else:
                c = self._nl_substep(c, coeff)
        return c


class OneDStepper:
    """Effective 1D model along z with the ground-band coupling kappa_0.

    State: 1D physical array over z. Substep structure mirrors the
    limit model restricted to ground-polarized data, with the nonlinear
    substep integrated exactly as a phase.
    """

    rep = field_mod.PHYSICAL

    def __init__(self, grid: field_mod.GridXConf, params: field_mod.SimParams,
                 order: str = "strang"):
        self.grid = grid
        self.params = params
        self.warnings = []
        o1, o2, _ = params.omega
        if o1**2 + o2**2 >= 1.0:
            self.warnings.append(
                f"Omega_1^2 + Omega_2^2 = {o1**2 + o2**2:.3g} >= 1: "
                "effective z-potential is not confining"
            )
        h = params.dt
        self._mz = 0.5 * grid.kz**2
        self._vz = 0.5 * (1.0 - o1**2 - o2**2) * grid.z**2
        self.plan = SplitStepPlan(h, order, [
            ("z_kinetic", field_mod.FOURIER_Z),
            ("z_potential", field_mod.PHYSICAL),
            ("band_nonlinear", field_mod.PHYSICAL),
        ])
        self._ph_kz = {c: np.exp(-1j * c * self._mz)
                       for c in set(self.plan.coefficients("z_kinetic"))}
        self._ph_vz = {c: np.exp(-1j * c * self._vz)
                       for c in set(self.plan.coefficients("z_potential"))}
        self.kappa = oscillator2d.kappa0_2d(params.sigma, params.coupling)
        self._sigma = params.sigma

    def step(self, c: np.ndarray) -> np.ndarray:
        for tag, _, coeff in self.plan.substeps:
            if tag == "z_kinetic":
                c = np.fft.ifft(self._ph_kz[coeff] * np.fft.fft(c))
            elif tag == "z_potential":
                c = c * self._ph_vz[coeff]
            elif self.kappa != 0.0:
                c = c * np.exp(-1j * coeff * self.kappa * _nl_power(c, self._sigma))
        return c


_STEPPERS = {
    "full_psi": (PsiStepper, field_mod.Grid3D),
    "gauged_u": (UStepper, field_mod.Grid3D),
    "limit3d_phi": (PhiStepper, field_mod.Grid3D),
    "effective2d_varphi": (VarphiStepper, field_mod.Grid3D),
    "full_psi_2dconf": (Psi2DConfStepper, field_mod.GridXConf),
    "limit_phi1d": (Phi1DStepper, field_mod.GridXConf),
    "effective1d": (OneDStepper, field_mod.GridXConf),
}


def make_stepper(params: field_mod.SimParams, grid=None, **kw):
    cls, grid_cls = _STEPPERS[params.model]
    if grid is None:
        grid = grid_cls.from_params(params)
    return cls(grid, params, **kw)


def evolve(stepper, state: np.ndarray, n_steps: int, snapshot_stride: int = 0,
           callback=None):
    """Advance n_steps; invoke callback(step_index, t, state) at stride
    (and at step 0 and the final step). Returns the final state."""
    h = stepper.params.dt if hasattr(stepper, "params") else None
    if callback is not None:
        callback(0, 0.0, state)
    for i in range(1, n_steps + 1):
        state = stepper.step(state)
        if callback is not None and (
            (snapshot_stride and i % snapshot_stride == 0) or i == n_steps
        ):
            callback(i, i * h, state)
    return state


def step_u(u: field_mod.WaveField, params) -> field_mod.WaveField:
    s = UStepper(u.grid, params)
    c = u.to(field_mod.HERMITE_Z)
    return field_mod.WaveField(s.step(c.data), field_mod.HERMITE_Z, u.grid)


def step_psi(psi: field_mod.WaveField, params) -> field_mod.WaveField:
    s = PsiStepper(psi.grid, params)
    c = psi.to(field_mod.PHYSICAL)
    return field_mod.WaveField(s.step(c.data), field_mod.PHYSICAL, psi.grid)


def step_phi_limit3d(phi: field_mod.WaveField, params) -> field_mod.WaveField:
    s = PhiStepper(phi.grid, params)
    c = phi.to(field_mod.HERMITE_Z)
    return field_mod.WaveField(s.step(c.data), field_mod.HERMITE_Z, phi.grid)


def step_varphi_2d(varphi: np.ndarray, params, band: int,
                   grid: field_mod.Grid3D) -> np.ndarray:
    return VarphiStepper(grid, params, band).step(varphi)


def step_psi_2dconf(psi: field_mod.WaveField, params) -> field_mod.WaveField:
    s = Psi2DConfStepper(psi.grid, params)
    c = psi.to(field_mod.PHYSICAL)
    return field_mod.WaveField(s.step(c.data), field_mod.PHYSICAL, psi.grid)


def step_phi1d_limit(phi: field_mod.WaveField, params) -> field_mod.WaveField:
    s = Phi1DStepper(phi.grid, params)
    c = phi.to(field_mod.XMODES)
    return field_mod.WaveField(s.step(c.data), field_mod.XMODES, phi.grid)


def step_1d(varphi: np.ndarray, params, grid: field_mod.GridXConf) -> np.ndarray:
    return OneDStepper(grid, params).step(varphi)
