"""Joint eigenstructure of the 2D harmonic oscillator and angular momentum.

Works in the tensor-Hermite representation chi_{a1}(x1) chi_{a2}(x2).
The oscillator energy of level n = a1 + a2 is n + 1; within a level the
angular momentum operator L_z = i x2 d/dx1 - i x1 d/dx2 acts by its exact
ladder matrix elements and is diagonalized densely (levels are small).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import field as field_mod
from . import hermite


@dataclass(frozen=True)
class JointState:
    n: int                       # energy level, eigenvalue n + 1
    mu: int                      # angular quantum number
    cartesian_coeffs: np.ndarray  # length n + 1, index a1 (a2 = n - a1)


@dataclass(frozen=True)
class Oscillator2DBasis:
    n_levels: int
    states: tuple                 # JointState, ordered by (n, mu)
    level_vectors: tuple          # per level n: (n+1, n+1) unitary, columns = states
    level_mus: tuple              # per level n: integer array of length n+1


def lz_level_matrix(n: int) -> np.ndarray:
    """L_z restricted to level n, indexed by a1 (a2 = n - a1); Hermitian.

    Ladder form: L_z |a1, a2> = i sqrt(a1 (a2+1)) |a1-1, a2+1>
                              - i sqrt((a1+1) a2) |a1+1, a2-1>.
    """
    m = np.zeros((n + 1, n + 1), dtype=complex)
    for a1 in range(n + 1):
        a2 = n - a1
        if a1 >= 1:
            m[a1 - 1, a1] += 1j * np.sqrt(a1 * (a2 + 1.0))
        if a2 >= 1:
            m[a1 + 1, a1] += -1j * np.sqrt((a1 + 1.0) * a2)
    return m


def build_joint_basis(n_levels: int) -> Oscillator2DBasis:
    """Diagonalize L_z within each oscillator level 0..n_levels.

    Phase convention: the first nonzero component of each eigenvector is
    made real and positive. All downstream diagnostics are phase-invariant.
    """
    if n_levels < 0:
        raise ValueError("n_levels must be >= 0")
    states = []
    vecs = []
    mus_all = []
    for n in range(n_levels + 1):
        m = lz_level_matrix(n)
        evals, evecs = np.linalg.eigh(m)
        mus = np.rint(evals).astype(int)
        if not np.allclose(evals, mus, atol=1e-10):
            raise AssertionError(f"level {n}: L_z eigenvalues not near integers: {evals}")
        expected = np.arange(-n, n + 1, 2)
        if not np.array_equal(np.sort(mus), expected):
            raise AssertionError(f"level {n}: angular numbers {mus} != {expected}")
        for k in range(n + 1):
            v = evecs[:, k]
            j = np.argmax(np.abs(v) > 1e-12)
            v = v * (np.abs(v[j]) / v[j])
            resid = np.abs(m @ v - mus[k] * v).max()
            if resid > 1e-10:
                raise AssertionError(f"level {n}, mu {mus[k]}: eigen residual {resid}")
            evecs[:, k] = v
            states.append(JointState(n, int(mus[k]), v.copy()))
        vecs.append(evecs)
        mus_all.append(mus)
    states.sort(key=lambda s: (s.n, s.mu))
    return Oscillator2DBasis(n_levels, tuple(states), tuple(vecs), tuple(mus_all))


def apply_lz_modal(coeffs: np.ndarray) -> np.ndarray:
    """Apply L_z to tensor-Hermite coefficients, axes (a1, a2, ...)."""
    n1, n2 = coeffs.shape[0], coeffs.shape[1]
    a1 = np.arange(n1)
    a2 = np.arange(n2)
    out = np.zeros_like(coeffs, dtype=complex)
    tail = (1,) * (coeffs.ndim - 2)
    # i sqrt(a1 (a2+1)) shifts (a1, a2) -> (a1-1, a2+1)
    amp = np.sqrt(a1[1:, None] * (a2[None, :-1] + 1.0)).reshape((n1 - 1, n2 - 1) + tail)
    out[:-1, 1:] += 1j * amp * coeffs[1:, :-1]
    # -i sqrt((a1+1) a2) shifts (a1, a2) -> (a1+1, a2-1)
    amp = np.sqrt((a1[:-1, None] + 1.0) * a2[None, 1:]).reshape((n1 - 1, n2 - 1) + tail)
    out[1:, :-1] += -1j * amp * coeffs[:-1, 1:]
    return out


def apply_hx_modal(coeffs: np.ndarray) -> np.ndarray:
    """Apply H_x (eigenvalue a1 + a2 + 1) to tensor-Hermite coefficients."""
    a1 = np.arange(coeffs.shape[0])
    a2 = np.arange(coeffs.shape[1])
    lev = a1[:, None] + a2[None, :] + 1.0
    return coeffs * lev.reshape(lev.shape + (1,) * (coeffs.ndim - 2))


def level_energies(n_levels: int) -> np.ndarray:
    return np.arange(n_levels + 1) + 1.0


def propagate_levels(basis: Oscillator2DBasis, coeffs: np.ndarray,
                     phase_of_level_and_mu) -> np.ndarray:
    """Multiply each joint eigencomponent by phase_of_level_and_mu(n, mu).

    coeffs has axes (a1, a2, ...) with the triangular truncation
    a1 + a2 <= n_levels; entries outside the triangle are left untouched
    (they are zero by construction in GridXConf fields).
    """
    out = coeffs.copy()
    for n in range(basis.n_levels + 1):
        idx1 = np.arange(n + 1)
        idx2 = n - idx1
        sub = out[idx1, idx2]                    # (n+1, ...)
        u = basis.level_vectors[n]
        mus = basis.level_mus[n]
        ph = np.array([phase_of_level_and_mu(n, int(mu)) for mu in mus])
        proj = u.conj().T @ sub.reshape(n + 1, -1)
        proj *= ph[:, None]
        out[idx1, idx2] = (u @ proj).reshape(sub.shape)
    return out


def level_populations(coeffs: np.ndarray, n_levels: int, measure: float = 1.0) -> np.ndarray:
    """Mass per oscillator level 0..n_levels from tensor-Hermite coefficients."""
    n1, n2 = coeffs.shape[0], coeffs.shape[1]
    lev = np.arange(n1)[:, None] + np.arange(n2)[None, :]
    dens = np.abs(coeffs) ** 2
    dens = dens.reshape(n1, n2, -1).sum(axis=2) * measure
    pops = np.zeros(n_levels + 1)
    for n in range(n_levels + 1):
        pops[n] = dens[lev == n].sum()
    return pops


def kappa0_2d(sigma: float, lam: float, n_quad: int = 64) -> float:
    """Effective 1D coupling from the radial 2D ground state.

    kappa_0 = lam * ||chi_0||^{2s+2}_{L^{2s+2}(R^2)}; the quadrature is matched
    to the Gaussian envelope exp(-(sigma+1)|x|^2) and is exact at sigma = 1,
    where the value is lam / (2 pi).
    """
    if not 1.0 <= sigma < 2.0:
        raise ValueError("sigma must lie in [1, 2)")
    if lam == 0.0:
        return 0.0
    x, w = hermite.product_quadrature(n_quad, alpha=sigma + 1.0)
    # the 2D profile factors as chi_0(x1) chi_0(x2) with 1D chi_0 = pi^{-1/4} e^{-x^2/2}
    g = np.pi ** (-0.25) * np.exp(-0.5 * x**2)
    one_axis = np.sum(w * g ** (2.0 * sigma + 2.0))
    return lam * one_axis**2


def ground_state_profile(grid) -> np.ndarray:
    """chi_0(x1, x2) = pi^{-1/2} exp(-|x|^2 / 2) sampled on the grid's x plane.

    Raises if the domain truncates more than 1e-6 of the unit L2 norm.
    """
    if isinstance(grid, field_mod.Grid3D):
        x1 = grid.x1[:, None]
        x2 = grid.x2[None, :]
        w = grid.cell
    elif isinstance(grid, field_mod.GridXConf):
        x1 = grid.x_nodes[:, None]
        x2 = grid.x_nodes[None, :]
        w = grid.basis.weights[:, None] * grid.basis.weights[None, :]
    else:
        raise TypeError(f"unsupported grid type {type(grid)!r}")
    prof = np.exp(-0.5 * (x1**2 + x2**2)) / np.sqrt(np.pi)
    norm = np.sqrt(np.sum(w * prof**2))
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(
            f"x domain too small for the ground profile: L2 norm {norm!r} "
            "(need |norm - 1| <= 1e-6)"
        )
    return prof
