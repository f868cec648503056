"""Oscillatory nonlinearity and its average over the oscillator group.

F_osc(theta, u) = e^{+i theta H} (|e^{-i theta H} u|^{2 sigma} e^{-i theta H} u)
with H the 1D oscillator in z (Grid3D) or the 2D oscillator in x (GridXConf).
Because the truncated spectrum is integer-spaced (up to the constant 1/2 which
cancels), theta enters as a trigonometric polynomial of bounded degree, so the
equispaced trapezoidal average over [0, 2*pi) is exact once n_theta exceeds
twice the largest resonance frequency.

The nonlinear term is evaluated on doubled product-quadrature nodes and
projected back (de-aliasing); at sigma = 1 this projection is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import field as field_mod
from . import hermite


@dataclass(frozen=True)
class AveragingConfig:
    n_theta: int
    truncation: int              # Hermite mode count of the underlying basis
    oracle_enabled: bool = True

    def __post_init__(self):
        min_theta = 2 * (self.truncation - 1) + 1
        if self.n_theta < min_theta:
            raise ValueError(
                f"n_theta = {self.n_theta} cannot resolve resonances of the "
                f"{self.truncation}-mode truncation (need >= {min_theta})"
            )


def default_config(truncation: int, n_theta: int = 0) -> AveragingConfig:
    return AveragingConfig(n_theta if n_theta > 0 else 4 * truncation, truncation)


class ZAverager:
    """theta-averaging machinery for fields with a Hermite z axis (Grid3D).

    Operates on Hermite-z coefficient arrays with the mode axis last.
    Tables fuse the propagator phases with the de-aliased evaluate/project
    matrices, so each theta sample costs two complex matmuls.
    """

    def __init__(self, grid: field_mod.Grid3D, sigma: float, lam: float,
                 n_theta: int = 0):
        self.grid = grid
        self.sigma = float(sigma)
        self.lam = float(lam)
        basis = grid.basis
        self.config = default_config(basis.n_modes, n_theta)
        nth = self.config.n_theta
        thetas = 2.0 * np.pi * np.arange(nth) / nth
        lam_n = basis.eigenvalues                       # n + 1/2
        table = grid.dealias_table                      # (N, nq_d)
        wts = grid.dealias_weights
        ph = np.exp(-1j * thetas[:, None] * lam_n[None, :])    # (nth, N)
        # down[t]: coeffs -> dealias-node values of e^{-i theta H_z} u
        self.down = ph[:, :, None] * table[None, :, :]          # (nth, N, nq_d)
        # up[t]: node values of the nonlinear product -> coeffs, phases undone
        proj = (wts[:, None] * table.T)                         # (nq_d, N)
        self.up = proj[None, :, :] * np.conj(ph)[:, None, :]    # (nth, nq_d, N)
        self.thetas = thetas

    def _nl(self, vals: np.ndarray) -> np.ndarray:
        if self.sigma == 1.0:
            return (vals.real**2 + vals.imag**2) * vals
        return (vals.real**2 + vals.imag**2) ** self.sigma * vals

    def f_osc(self, theta: float, coeffs: np.ndarray) -> np.ndarray:
        basis = self.grid.basis
        ph = np.exp(-1j * theta * basis.eigenvalues)
        vals = (coeffs * ph) @ self.grid.dealias_table
        w = self._nl(vals)
        out = w @ (self.grid.dealias_weights[:, None] * self.grid.dealias_table.T)
        return self.lam * out * np.conj(ph)

    def f_av(self, coeffs: np.ndarray) -> np.ndarray:
        acc = np.zeros_like(coeffs, dtype=complex)
        for t in range(self.config.n_theta):
            vals = coeffs @ self.down[t]
            acc += self._nl(vals) @ self.up[t]
        return (self.lam / self.config.n_theta) * acc

    def nonlinear_energy(self, coeffs: np.ndarray, cell: float) -> float:
        """lam / (2 pi (sigma+1)) * iint_0^{2 pi} |e^{-i theta H_z} u|^{2s+2}.

        Uses the same theta samples and de-aliased z nodes as f_av so that
        d/dt of this term matches <f_av, i du/dt> pairings discretely.
        """
        s = 0.0
        wz = self.grid.dealias_weights
        for t in range(self.config.n_theta):
            vals = coeffs @ self.down[t]
            dens = (vals.real**2 + vals.imag**2) ** (self.sigma + 1.0)
            s += float(np.sum(dens * wz))
        s *= cell / self.config.n_theta
        return self.lam / (self.sigma + 1.0) * s


@lru_cache(maxsize=8)
def _overlap4(n_modes: int):
    """Quadruple overlaps I[m1,m2,m3,m4] = int chi chi chi chi dz, exact,
    masked to the resonant set m1 - m2 + m3 - m4 = 0."""
    z, w = hermite.product_quadrature(2 * n_modes, alpha=2.0)
    t = hermite.hermite_eval_table(n_modes, z)
    over = np.einsum("q,aq,bq,cq,dq->abcd", w, t, t, t, t, optimize=True)
    m = np.arange(n_modes)
    res = (m[:, None, None, None] - m[None, :, None, None]
           + m[None, None, :, None] - m[None, None, None, :]) == 0
    return over * res


def f_av_resonant_oracle(coeffs: np.ndarray, lam: float) -> np.ndarray:
    """Average of the cubic (sigma = 1) nonlinearity as an explicit resonant
    sum over mode quadruples. Independent of the theta quadrature; intended
    for validation on small mode counts, cost O(N^4) per point."""
    n = coeffs.shape[-1]
    over = _overlap4(n)
    return lam * np.einsum(
        "abcn,...a,...b,...c->...n", over, coeffs, np.conj(coeffs), coeffs,
        optimize=True,
    )


class XAverager:
    """theta-averaging over the 2D oscillator group for GridXConf fields.

    Operates on tensor-Hermite x coefficients with axes (a1, a2, z). The
    spectrum {a1 + a2 + 1} is integer-spaced, so the machinery matches the
    z-confined case with per-axis de-aliasing.
    """

    def __init__(self, grid: field_mod.GridXConf, sigma: float, lam: float,
                 n_theta: int = 0):
        self.grid = grid
        self.sigma = float(sigma)
        self.lam = float(lam)
        n = grid.n_modes
        self.config = default_config(n, n_theta if n_theta > 0 else 0)
        # resonance frequencies span 2*(n_levels) with n_levels = n - 1 per axis
        # but combined levels still differ by integers; 4*n stays safe
        nth = self.config.n_theta
        self.thetas = 2.0 * np.pi * np.arange(nth) / nth
        self.mask = grid.triangular_mask()
        self.levels = np.arange(n)[:, None] + np.arange(n)[None, :] + 1.0

    def _nl(self, vals):
        if self.sigma == 1.0:
            return (vals.real**2 + vals.imag**2) * vals
        return (vals.real**2 + vals.imag**2) ** self.sigma * vals

    def _to_nodes(self, coeffs):
        t = self.grid.dealias_table
        out = np.tensordot(t, coeffs, axes=(0, 0))          # (q, a2, z)
        return np.swapaxes(np.tensordot(t, np.swapaxes(out, 0, 1), axes=(0, 0)), 0, 1)

    def _to_modes(self, vals):
        t = self.grid.dealias_table
        w = self.grid.dealias_weights
        m = w[:, None] * t.T                                 # (q, N)
        out = np.tensordot(m, vals, axes=(0, 0))             # (a1->N, q, z)
        out = np.swapaxes(np.tensordot(m, np.swapaxes(out, 0, 1), axes=(0, 0)), 0, 1)
        return np.where(self.mask[:, :, None], out, 0.0)

    def g_osc(self, theta: float, coeffs: np.ndarray) -> np.ndarray:
        ph = np.exp(-1j * theta * self.levels)[:, :, None]
        vals = self._to_nodes(coeffs * ph)
        return self.lam * self._to_modes(self._nl(vals)) * np.conj(ph)

    def g_av(self, coeffs: np.ndarray) -> np.ndarray:
        acc = np.zeros_like(coeffs, dtype=complex)
        for theta in self.thetas:
            acc += self.g_osc(theta, coeffs)
        return acc / self.thetas.size


def _z_averager_for(u: field_mod.WaveField, sigma: float, lam: float,
                    n_theta: int) -> ZAverager:
    return ZAverager(u.grid, sigma, lam, n_theta)


def F_osc(theta: float, u: field_mod.WaveField, sigma: float = 1.0,
          lam: float = 1.0, n_theta: int = 0) -> field_mod.WaveField:
    av = _z_averager_for(u, sigma, lam, n_theta)
    c = u.to(field_mod.HERMITE_Z)
    return field_mod.WaveField(av.f_osc(theta, c.data), field_mod.HERMITE_Z, u.grid)


def F_av(u: field_mod.WaveField, sigma: float = 1.0, lam: float = 1.0,
         n_theta: int = 0) -> field_mod.WaveField:
    av = _z_averager_for(u, sigma, lam, n_theta)
    c = u.to(field_mod.HERMITE_Z)
    return field_mod.WaveField(av.f_av(c.data), field_mod.HERMITE_Z, u.grid)


def F_av_oracle(u: field_mod.WaveField, lam: float = 1.0) -> field_mod.WaveField:
    c = u.to(field_mod.HERMITE_Z)
    return field_mod.WaveField(f_av_resonant_oracle(c.data, lam),
                               field_mod.HERMITE_Z, u.grid)


def G_av(u: field_mod.WaveField, sigma: float = 1.0, lam: float = 1.0,
         n_theta: int = 0) -> field_mod.WaveField:
    av = XAverager(u.grid, sigma, lam, n_theta)
    c = u.to(field_mod.XMODES)
    return field_mod.WaveField(av.g_av(c.data), field_mod.XMODES, u.grid)
