"""Conserved quantities, polarization projections, and potential analysis."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import averaging, field as field_mod, oscillator2d


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    energy: float
    hz_expectation: float
    band_populations: np.ndarray
    boundary_mass: float
    warnings: list = dc_field(default_factory=list)


def mass(f: field_mod.WaveField) -> float:
    return field_mod.norm_L2(f) ** 2


def hz_expectation(f: field_mod.WaveField) -> float:
    """<H_z f, f> from the z-mode expansion (eigenvalue n + 1/2)."""
    c = f.to(field_mod.HERMITE_Z)
    lam = f.grid.basis.eigenvalues
    return float(np.sum(lam[None, None, :] * np.abs(c.data) ** 2) * f.grid.cell)


def band_populations(f: field_mod.WaveField) -> np.ndarray:
    """Mass per z-mode (Grid3D) or per x-oscillator level (GridXConf)."""
    if isinstance(f.grid, field_mod.Grid3D):
        c = f.to(field_mod.HERMITE_Z)
        return np.sum(np.abs(c.data) ** 2, axis=(0, 1)) * f.grid.cell
    c = f.to(field_mod.XMODES)
    return oscillator2d.level_populations(
        c.data, f.grid.n_modes - 1, f.grid.dz)


def boundary_mass(f: field_mod.WaveField, shell: int = 2) -> float:
    """Mass in the outermost x cells; monitors box truncation error."""
    p = f.to(field_mod.PHYSICAL)
    dens = np.abs(p.data) ** 2
    if isinstance(f.grid, field_mod.Grid3D):
        w = dens * f.grid.basis.weights[None, None, :] * f.grid.cell
        edge = np.zeros(dens.shape, dtype=bool)
        edge[:shell] = edge[-shell:] = True
        edge[:, :shell] = edge[:, -shell:] = True
        return float(w[edge].sum())
    wts = f.grid.basis.weights
    w = dens * wts[:, None, None] * wts[None, :, None] * f.grid.dz
    edge = np.zeros(dens.shape, dtype=bool)
    edge[:, :, :shell] = edge[:, :, -shell:] = True
    return float(w[edge].sum())


def _lz_pairing(grid: field_mod.Grid3D, data_any_z: np.ndarray, cell_like) -> float:
    """<L_z f, f> with L_z = i x2 d/dx1 - i x1 d/dx2, Fourier derivatives.

    Works for (n1, n2, ...) arrays physical in x; returns the real pairing.
    """
    k1 = grid.k1.reshape(-1, *([1] * (data_any_z.ndim - 1)))
    k2 = grid.k2.reshape(1, -1, *([1] * (data_any_z.ndim - 2)))
    x1 = grid.x1.reshape(-1, *([1] * (data_any_z.ndim - 1)))
    x2 = grid.x2.reshape(1, -1, *([1] * (data_any_z.ndim - 2)))
    d1 = np.fft.ifft(1j * k1 * np.fft.fft(data_any_z, axis=0), axis=0)
    d2 = np.fft.ifft(1j * k2 * np.fft.fft(data_any_z, axis=1), axis=1)
    lzf = 1j * x2 * d1 - 1j * x1 * d2
    return float(np.sum((lzf * np.conj(data_any_z)).real * cell_like))


def energy_phi(phi: field_mod.WaveField, params: field_mod.SimParams,
               averager: averaging.ZAverager | None = None) -> dict:
    """Energy of the averaged limit model, term by term.

    terms: x-kinetic, x-potential (with the centrifugal correction),
    rotation (-Omega_z <L_z phi, phi>), and the theta-averaged nonlinear
    term evaluated with the same quadrature as the evolution operator.
    """
    g = phi.grid
    o1, o2, oz = params.omega
    c = phi.to(field_mod.HERMITE_Z)   # x physical, z modal
    cell = g.cell
    k1 = g.k1[:, None, None]
    k2 = g.k2[None, :, None]
    hat1 = np.fft.fft(c.data, axis=0, norm="ortho")
    hat2 = np.fft.fft(c.data, axis=1, norm="ortho")
    kinetic = 0.5 * float(
        np.sum(k1**2 * np.abs(hat1) ** 2) + np.sum(k2**2 * np.abs(hat2) ** 2)
    ) * cell
    X1, X2, _ = g.meshes()
    v = 0.5 * (X1**2 + X2**2) - 0.5 * (o2 * X1 - o1 * X2) ** 2
    potential = float(np.sum(v * np.abs(c.data) ** 2) * cell)
    rotation = -oz * _lz_pairing(g, c.data, cell)
    if averager is None:
        averager = averaging.ZAverager(
            g, params.sigma, params.coupling, params.theta_points)
    nonlinear = averager.nonlinear_energy(c.data, cell)
    total = kinetic + potential + rotation + nonlinear
    return {"kinetic": kinetic, "potential": potential, "rotation": rotation,
            "nonlinear": nonlinear, "total": total}


def effective_potential_analysis(omega):
    """Eigenvalues of the quadratic effective x-potential and confinement.

    V(x) = (1/2)(1 - O2^2) x1^2 + (1/2)(1 - O1^2) x2^2 - O1 O2 x1 x2;
    eigenvalues {1/2, (1 - O1^2 - O2^2)/2}, both positive iff O1^2+O2^2 < 1.
    """
    o1, o2 = omega[0], omega[1]
    m = np.array([[1.0 - o2**2, -o1 * o2], [-o1 * o2, 1.0 - o1**2]])
    evals = np.sort(np.linalg.eigvalsh(0.5 * m))[::-1]
    confining = bool(evals[-1] > 0.0)
    return (float(evals[0]), float(evals[1])), confining


def record(t: float, f: field_mod.WaveField, params: field_mod.SimParams,
           averager=None, warnings=None) -> DiagnosticsRecord:
    pops = band_populations(f)
    if isinstance(f.grid, field_mod.Grid3D):
        e = energy_phi(f, params, averager)["total"]
    else:
        e = float("nan")   # the x-confined energy functional is not tracked
    return DiagnosticsRecord(
        t=t, mass=mass(f), energy=e, hz_expectation=(
            hz_expectation(f) if isinstance(f.grid, field_mod.Grid3D)
            else float("nan")),
        band_populations=pops, boundary_mass=boundary_mass(f),
        warnings=list(warnings or []),
    )


CSV_HEADER = ("t,mass,energy,hz_expectation,"
              + ",".join(f"band{i}" for i in range(8)) + ",boundary_mass")


def csv_row(r: DiagnosticsRecord) -> str:
    bands = list(r.band_populations[:8]) + [0.0] * max(0, 8 - len(r.band_populations))
    cols = [r.t, r.mass, r.energy, r.hz_expectation, *bands, r.boundary_mass]
    return ",".join(f"{v:.16e}" for v in cols)
