import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import curve_fit

from rotgpe import averaging, dynamics, field, hermite, oscillator2d


def _params(**kw):
    base = dict(n1=32, n2=32, box1=8.0, box2=8.0, n_hermite=6,
                nz_fourier=64, boxz=8.0)
    base.update(kw)
    return field.SimParams(**base)


def _grid3d(n=32, L=8.0, nz=6):
    return field.Grid3D.create(n, n, L, L, nz)


def _smooth_state(grid, normalize=True):
    """Smooth non-symmetric state occupying the two lowest z modes."""
    x1 = grid.x1[:, None]
    x2 = grid.x2[None, :]
    prof = np.exp(-0.5 * (x1**2 + x2**2)) * (1.0 + 0.2 * (x1 + 1j * x2))
    c = np.zeros(grid.shape(field.HERMITE_Z), dtype=complex)
    c[:, :, 0] = prof
    c[:, :, 1] = 0.3 * prof
    if normalize:
        c /= np.sqrt(np.sum(np.abs(c) ** 2) * grid.cell)
    return c


def _mass(c, cell):
    return np.sum(np.abs(c) ** 2) * cell


# ---------------------------------------------------------------- plan


def test_plan_strang_structure():
    plan = dynamics.SplitStepPlan(0.1, "strang", [("a", "r"), ("b", "r"), ("c", "r")])
    tags = [t for t, _, _ in plan.substeps]
    assert tags == ["a", "b", "c", "b", "a"]
    for tag in "abc":
        assert sum(plan.coefficients(tag)) == pytest.approx(0.1)
    # symmetric composition: coefficient sequence is a palindrome
    coeffs = [c for _, _, c in plan.substeps]
    assert coeffs == coeffs[::-1]


def test_plan_lie_and_validation():
    plan = dynamics.SplitStepPlan(0.2, "lie", [("a", "r"), ("b", "r")])
    assert [c for _, _, c in plan.substeps] == [0.2, 0.2]
    with pytest.raises(ValueError):
        dynamics.SplitStepPlan(0.1, "verlet", [("a", "r")])


# ------------------------------------------------- full model, z-confined


def test_u_ground_state_stationary():
    # lam=0, Omega=0, eps=1: ground product state evolves by the phase
    # exp(-i t (1/2 + 1)) only
    grid = _grid3d()
    p = _params(epsilon=1.0, omega=(0.0, 0.0, 0.0), coupling=0.0, dt=2e-4)
    s = dynamics.UStepper(grid, p)
    c0 = np.zeros(grid.shape(field.HERMITE_Z), dtype=complex)
    c0[:, :, 0] = (np.pi ** -0.5) * np.exp(
        -0.5 * (grid.x1[:, None] ** 2 + grid.x2[None, :] ** 2))
    c = c0.copy()
    n_steps = 5000     # t = 1
    for _ in range(n_steps):
        c = s.step(c)
    ref = c0 * np.exp(-1j * n_steps * p.dt * 1.5)
    err = np.sqrt(_mass(c - ref, grid.cell))
    assert err < 1e-8


def test_u_mass_conserved_1000_steps():
    grid = _grid3d(n=16, L=7.0, nz=4)
    p = _params(epsilon=0.3, omega=(0.3, 0.2, 0.4), coupling=1.0, dt=1e-3,
                n1=16, n2=16, box1=7.0, box2=7.0, n_hermite=4)
    s = dynamics.UStepper(grid, p)
    c = _smooth_state(grid)
    m0 = _mass(c, grid.cell)
    for _ in range(1000):
        c = s.step(c)
    assert abs(_mass(c, grid.cell) - m0) < 1e-11


def test_u_angular_momentum_phase():
    # [H_x, L_z] = 0: on an L_z eigenstate (eigenvalue mu) switching on
    # Omega_z only multiplies the trajectory by exp(+i t Omega_z mu)
    grid = _grid3d()
    joint = oscillator2d.build_joint_basis(1)
    state = [s for s in joint.states if s.n == 1 and s.mu == 1][0]
    t1 = hermite.hermite_eval_table(2, grid.x1)
    t2 = hermite.hermite_eval_table(2, grid.x2)
    prof = (state.cartesian_coeffs[0] * np.outer(t1[0], t2[1])
            + state.cartesian_coeffs[1] * np.outer(t1[1], t2[0]))
    c0 = np.zeros(grid.shape(field.HERMITE_Z), dtype=complex)
    c0[:, :, 0] = prof
    oz = 0.4
    t_end, dt = 0.25, 2e-4
    runs = {}
    for omega_z in (0.0, oz):
        p = _params(epsilon=1.0, omega=(0.0, 0.0, omega_z), coupling=0.0, dt=dt)
        s = dynamics.UStepper(grid, p)
        c = c0.copy()
        for _ in range(round(t_end / dt)):
            c = s.step(c)
        runs[omega_z] = c
    ref = runs[0.0] * np.exp(1j * t_end * oz * state.mu)
    err = np.sqrt(_mass(runs[oz] - ref, grid.cell))
    assert err < 1e-8


def test_u_matches_method_of_lines_oracle():
    # independent time integration (adaptive RK on the spectral right-hand
    # side) of the gauged equation with every term active
    grid = _grid3d()
    eps, (o1, o2, oz), lam = 1.0, (0.3, 0.2, 0.4), 1.0
    p = _params(epsilon=eps, omega=(o1, o2, oz), coupling=lam, dt=2.5e-4)
    shape = grid.shape(field.HERMITE_Z)
    lam_n = grid.basis.eigenvalues
    X1, X2, Z = grid.meshes()
    K1 = grid.k1[:, None, None]
    K2 = grid.k2[None, :, None]
    v = (0.5 * (X1**2 + X2**2) - 0.5 * (o2 * X1 - o1 * X2) ** 2
         + 1.5 * eps**2 * (o1**2 + o2**2) * Z**2
         - eps * oz * (o1 * X1 + o2 * X2) * Z)

    def rhs(_t, y):
        c = y.reshape(shape)
        out = c * (lam_n / eps**2)
        vals = grid.basis.backward(c)
        f1 = np.fft.fft(vals, axis=0)
        a = np.fft.ifft(0.5 * K1**2 * f1, axis=0) \
            + (oz * X2 - 2.0 * eps * o2 * Z) * np.fft.ifft(K1 * f1, axis=0)
        f2 = np.fft.fft(vals, axis=1)
        a += np.fft.ifft(0.5 * K2**2 * f2, axis=1) \
            + (-oz * X1 + 2.0 * eps * o1 * Z) * np.fft.ifft(K2 * f2, axis=1)
        a += v * vals + lam * (np.abs(vals) ** 2) * vals
        out += grid.basis.forward(a)
        return (-1j * out).ravel()

    c0 = _smooth_state(grid)
    t_end = 0.2
    sol = solve_ivp(rhs, (0.0, t_end), c0.ravel(), method="DOP853",
                    rtol=1e-10, atol=1e-12, dense_output=False)
    assert sol.success
    ref = sol.y[:, -1].reshape(shape)
    s = dynamics.UStepper(grid, p)
    c = c0.copy()
    for _ in range(round(t_end / p.dt)):
        c = s.step(c)
    err = np.sqrt(_mass(c - ref, grid.cell))
    assert err < 1e-6


def test_psi_stepper_is_gauge_conjugate_of_u():
    grid = _grid3d(n=16, L=7.0, nz=4)
    p = _params(epsilon=0.4, omega=(0.3, 0.2, 0.4), coupling=1.0, dt=1e-3,
                n1=16, n2=16, box1=7.0, box2=7.0, n_hermite=4)
    c0 = _smooth_state(grid)
    su = dynamics.UStepper(grid, p)
    sp = dynamics.PsiStepper(grid, p)
    X1, X2, Z = grid.meshes()
    gauge = np.exp(1j * p.epsilon * Z * (p.omega[0] * X2 - p.omega[1] * X1))
    psi = grid.basis.backward(c0) * gauge
    u = c0.copy()
    for _ in range(50):
        psi = sp.step(psi)
        u = su.step(u)
    back = grid.basis.forward(psi * np.conj(gauge))
    assert np.abs(back - u).max() < 1e-12


def test_u_strang_self_convergence_second_order():
    grid = _grid3d(n=16, L=7.0, nz=4)
    kw = dict(epsilon=0.5, omega=(0.3, 0.2, 0.4), coupling=1.0,
              n1=16, n2=16, box1=7.0, box2=7.0, n_hermite=4)
    c0 = _smooth_state(grid)
    t_end = 0.1

    def final(dt, order="strang"):
        s = dynamics.UStepper(grid, _params(dt=dt, **kw), order=order)
        c = c0.copy()
        for _ in range(round(t_end / dt)):
            c = s.step(c)
        return c

    ref = final(t_end / 800)
    e1 = np.sqrt(_mass(final(t_end / 50) - ref, grid.cell))
    e2 = np.sqrt(_mass(final(t_end / 100) - ref, grid.cell))
    assert 3.3 < e1 / e2 < 4.7
    l1 = np.sqrt(_mass(final(t_end / 50, "lie") - ref, grid.cell))
    l2 = np.sqrt(_mass(final(t_end / 100, "lie") - ref, grid.cell))
    assert 1.6 < l1 / l2 < 2.5


def test_u_phase_wrap_warning():
    grid = _grid3d(n=16, L=7.0, nz=4)
    p = _params(epsilon=0.1, dt=0.1, n1=16, n2=16, box1=7.0, box2=7.0,
                n_hermite=4)
    s = dynamics.UStepper(grid, p)
    assert len(s.warnings) == 1
    quiet = dynamics.UStepper(grid, _params(
        epsilon=0.1, dt=1e-3, n1=16, n2=16, box1=7.0, box2=7.0, n_hermite=4))
    assert not quiet.warnings


# ------------------------------------------------- averaged 3D limit model


def test_phi_matches_method_of_lines_oracle():
    grid = _grid3d()
    (o1, o2, oz), lam = (0.3, 0.2, 0.4), 1.0
    p = _params(omega=(o1, o2, oz), coupling=lam, dt=5e-4)
    shape = grid.shape(field.HERMITE_Z)
    X1, X2, _ = grid.meshes()
    K1 = grid.k1[:, None, None]
    K2 = grid.k2[None, :, None]
    v = 0.5 * (X1**2 + X2**2) - 0.5 * (o2 * X1 - o1 * X2) ** 2
    av = averaging.ZAverager(grid, 1.0, lam, n_theta=p.theta_points)

    def rhs(_t, y):
        c = y.reshape(shape)
        f1 = np.fft.fft(c, axis=0)
        a = np.fft.ifft(0.5 * K1**2 * f1, axis=0) \
            + oz * X2 * np.fft.ifft(K1 * f1, axis=0)
        f2 = np.fft.fft(c, axis=1)
        a += np.fft.ifft(0.5 * K2**2 * f2, axis=1) \
            - oz * X1 * np.fft.ifft(K2 * f2, axis=1)
        a += v * c + av.f_av(c)
        return (-1j * a).ravel()

    c0 = _smooth_state(grid)
    t_end = 0.2
    sol = solve_ivp(rhs, (0.0, t_end), c0.ravel(), method="DOP853",
                    rtol=1e-10, atol=1e-12)
    assert sol.success
    ref = sol.y[:, -1].reshape(shape)
    s = dynamics.PhiStepper(grid, p)
    c = c0.copy()
    for _ in range(round(t_end / p.dt)):
        c = s.step(c)
    err = np.sqrt(_mass(c - ref, grid.cell))
    assert err < 1e-6


def test_phi_mass_exact_per_step():
    grid = _grid3d(n=16, L=7.0, nz=4)
    p = _params(omega=(0.3, 0.2, 0.4), coupling=1.0, dt=1e-3,
                n1=16, n2=16, box1=7.0, box2=7.0, n_hermite=4)
    s = dynamics.PhiStepper(grid, p)
    c = _smooth_state(grid)
    m0 = _mass(c, grid.cell)
    for _ in range(500):
        c = s.step(c)
    assert abs(_mass(c, grid.cell) - m0) < 1e-12


def test_phi_polarized_tracks_effective_2d():
    # ground-band data: the averaged model reduces to the 2D effective
    # equation with coupling kappa_0 and never leaves the band
    grid = _grid3d()
    p = _params(omega=(0.3, 0.2, 0.4), coupling=1.0, dt=1e-3)
    prof = np.exp(-0.5 * (grid.x1[:, None] ** 2 + grid.x2[None, :] ** 2))
    prof = prof / np.sqrt(np.sum(np.abs(prof) ** 2) * grid.cell)
    c = np.zeros(grid.shape(field.HERMITE_Z), dtype=complex)
    c[:, :, 0] = prof
    s3 = dynamics.PhiStepper(grid, p)
    s2 = dynamics.VarphiStepper(grid, p, band=0)
    v = prof.astype(complex)
    for _ in range(200):
        c = s3.step(c)
        v = s2.step(v)
    assert np.sqrt(_mass(c[:, :, 0] - v, grid.cell)) < 1e-8
    off = c.copy()
    off[:, :, 0] = 0.0
    assert _mass(off, grid.cell) < 1e-12


def test_phi_deconfinement_warning():
    grid = _grid3d(n=16, L=7.0, nz=4)
    p = _params(omega=(0.8, 0.8, 0.0), n1=16, n2=16, box1=7.0, box2=7.0,
                n_hermite=4)
    s = dynamics.PhiStepper(grid, p)
    assert len(s.warnings) == 1


# ------------------------------------------------- full model, x-confined


def test_xconf_ground_state_stationary():
    grid = field.GridXConf.create(8, 64, 8.0)
    p = _params(epsilon=1.0, omega=(0.0, 0.0, 0.0), coupling=0.0, dt=2.5e-4,
                n_hermite=8, nz_fourier=64, boxz=8.0)
    s = dynamics.UStepper2DConf(grid, p)
    c0 = np.zeros(grid.shape(field.XMODES), dtype=complex)
    c0[0, 0, :] = (np.pi ** -0.25) * np.exp(-0.5 * grid.z**2)
    c = c0.copy()
    n_steps = 2000     # t = 0.5, eigenvalue 1 (plane) + 1/2 (z)
    for _ in range(n_steps):
        c = s.step(c)
    ref = c0 * np.exp(-1j * n_steps * p.dt * 1.5)
    err = np.sqrt(np.sum(np.abs(c - ref) ** 2) * grid.dz)
    assert err < 1e-8


def test_xconf_mass_conserved():
    grid = field.GridXConf.create(6, 32, 8.0)
    p = _params(epsilon=0.3, omega=(0.3, 0.2, 0.4), coupling=1.0, dt=1e-3,
                n_hermite=6, nz_fourier=32, boxz=8.0)
    s = dynamics.UStepper2DConf(grid, p)
    rng = np.random.default_rng(0)
    c = np.zeros(grid.shape(field.XMODES), dtype=complex)
    g = np.exp(-0.5 * grid.z**2)
    c[0, 0, :] = g
    c[1, 0, :] = 0.3j * g
    c /= np.sqrt(np.sum(np.abs(c) ** 2) * grid.dz)
    m0 = np.sum(np.abs(c) ** 2) * grid.dz
    for _ in range(500):
        c = s.step(c)
    assert abs(np.sum(np.abs(c) ** 2) * grid.dz - m0) < 1e-11


def test_phi1d_polarized_tracks_effective_1d():
    grid = field.GridXConf.create(6, 64, 8.0)
    p = _params(omega=(0.3, 0.2, 0.4), coupling=1.0, dt=1e-3,
                n_hermite=6, nz_fourier=64, boxz=8.0)
    g = np.exp(-0.4 * grid.z**2).astype(complex)
    g /= np.sqrt(np.sum(np.abs(g) ** 2) * grid.dz)
    c = np.zeros(grid.shape(field.XMODES), dtype=complex)
    c[0, 0, :] = g
    sx = dynamics.Phi1DStepper(grid, p)
    s1 = dynamics.OneDStepper(grid, p)
    v = g.copy()
    for _ in range(200):
        c = sx.step(c)
        v = s1.step(v)
    assert np.sqrt(np.sum(np.abs(c[0, 0, :] - v) ** 2) * grid.dz) < 1e-8
    off = c.copy()
    off[0, 0, :] = 0.0
    assert np.sum(np.abs(off) ** 2) * grid.dz < 1e-12


def test_breathing_frequency_of_1d_model():
    # squeezed Gaussian in the effective 1/2 z^2 well: the width observable
    # <z^2> oscillates at twice the trap frequency
    grid = field.GridXConf.create(4, 128, 10.0)
    p = _params(omega=(0.0, 0.0, 0.0), coupling=0.0, dt=2e-3,
                n_hermite=4, nz_fourier=128, boxz=10.0)
    s = dynamics.OneDStepper(grid, p)
    alpha = 2.0
    c = (alpha / np.pi) ** 0.25 * np.exp(-0.5 * alpha * grid.z**2) + 0j
    times, widths = [], []
    for i in range(3200):
        c = s.step(c)
        if i % 10 == 0:
            times.append((i + 1) * p.dt)
            widths.append(float(np.sum(np.abs(c) ** 2 * grid.z**2) * grid.dz))
    times, widths = np.array(times), np.array(widths)

    def model(t, a, b, w, ph):
        return a + b * np.cos(w * t + ph)

    popt, _ = curve_fit(model, times, widths,
                        p0=(widths.mean(), np.ptp(widths) / 2, 2.0, 0.0))
    assert abs(popt[2] - 2.0) / 2.0 < 0.01


# ------------------------------------------------- dispatch and evolve


def test_make_stepper_all_models():
    for model in field.MODELS:
        p = _params(model=model, n1=8, n2=8, box1=6.0, box2=6.0,
                    n_hermite=4, nz_fourier=16, boxz=6.0, dt=1e-3)
        s = dynamics.make_stepper(p)
        if model == "effective2d_varphi":
            state = np.exp(-0.5 * (s.grid.x1[:, None] ** 2
                                   + s.grid.x2[None, :] ** 2)) + 0j
        elif model == "effective1d":
            state = np.exp(-0.5 * s.grid.z**2) + 0j
        else:
            state = np.zeros(s.grid.shape(s.rep), dtype=complex)
            sl = (0,) * (state.ndim - 1)
            state[sl] = 1.0
        out = s.step(state)
        assert out.shape == state.shape
        assert np.all(np.isfinite(out))


def test_evolve_callback_schedule():
    grid = field.GridXConf.create(4, 16, 6.0)
    p = _params(model="effective1d", n_hermite=4, nz_fourier=16, boxz=6.0,
                dt=1e-3)
    s = dynamics.OneDStepper(grid, p)
    c = np.exp(-0.5 * grid.z**2) + 0j
    seen = []
    dynamics.evolve(s, c, 5, snapshot_stride=2,
                    callback=lambda i, t, st: seen.append((i, t)))
    assert [i for i, _ in seen] == [0, 2, 4, 5]
    assert seen[-1][1] == pytest.approx(5e-3)


def test_functional_wrappers_match_classes():
    grid = _grid3d(n=16, L=7.0, nz=4)
    p = _params(epsilon=0.5, omega=(0.3, 0.2, 0.4), coupling=1.0, dt=1e-3,
                n1=16, n2=16, box1=7.0, box2=7.0, n_hermite=4)
    c0 = _smooth_state(grid)
    f = field.WaveField(c0.copy(), field.HERMITE_Z, grid)
    out = dynamics.step_u(f, p)
    ref = dynamics.UStepper(grid, p).step(c0.copy())
    assert np.abs(out.data - ref).max() < 1e-14
    assert out.representation == field.HERMITE_Z
