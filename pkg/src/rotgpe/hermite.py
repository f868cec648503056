"""One-dimensional Hermite-function machinery.

Normalized Hermite functions chi_n (physicists' convention, L2-orthonormal,
chi_n ~ +z^n for large z), Gauss-Hermite quadrature adapted to them, spectral
transforms, exact oscillator propagation and the effective band coupling
constants kappa_n.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SQRT_2PI = np.sqrt(2.0 * np.pi)


def hermite_eval_table(n_modes: int, z: np.ndarray) -> np.ndarray:
    """Evaluate chi_0..chi_{n_modes-1} at points z, shape (n_modes, len(z)).

    Uses the normalized three-term recurrence
        chi_0 = pi^{-1/4} exp(-z^2/2),
        chi_{n+1} = sqrt(2/(n+1)) z chi_n - sqrt(n/(n+1)) chi_{n-1},
    which is stable up to n of a few hundred (no raw Hermite polynomials).
    """
    z = np.asarray(z, dtype=float)
    table = np.empty((n_modes, z.size))
    table[0] = np.pi ** (-0.25) * np.exp(-0.5 * z**2)
    if n_modes > 1:
        table[1] = np.sqrt(2.0) * z * table[0]
    for n in range(1, n_modes - 1):
        table[n + 1] = (
            np.sqrt(2.0 / (n + 1)) * z * table[n]
            - np.sqrt(n / (n + 1.0)) * table[n - 1]
        )
    return table


@dataclass(frozen=True)
class HermiteBasis1D:
    """Truncated Hermite-function basis with quadrature exact on its span.

    nodes/weights integrate f = exp(-z^2) * poly(deg <= 2*quad_order-1)
    exactly, so discrete orthonormality holds whenever quad_order >= n_modes.
    """

    n_modes: int
    nodes: np.ndarray        # (nq,)
    weights: np.ndarray      # (nq,) adapted weights, sum w chi_m chi_n = delta
    eval_table: np.ndarray   # (n_modes, nq)
    eigenvalues: np.ndarray  # (n_modes,) n + 1/2

    @property
    def quad_order(self) -> int:
        return self.nodes.size

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Node values -> Hermite coefficients along the last axis."""
        if values.shape[-1] != self.nodes.size:
            raise ValueError(
                f"expected {self.nodes.size} node values, got {values.shape[-1]}"
            )
        return values @ (self.weights[:, None] * self.eval_table.T)

    def backward(self, coeffs: np.ndarray) -> np.ndarray:
        """Hermite coefficients -> node values along the last axis."""
        if coeffs.shape[-1] != self.n_modes:
            raise ValueError(
                f"expected {self.n_modes} coefficients, got {coeffs.shape[-1]}"
            )
        return coeffs @ self.eval_table


def build_basis(n_modes: int, quad_order: int | None = None) -> HermiteBasis1D:
    """Construct a HermiteBasis1D; quad_order defaults to n_modes."""
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if quad_order is None:
        quad_order = n_modes
    if quad_order < n_modes:
        raise ValueError(
            f"quad_order ({quad_order}) must be >= n_modes ({n_modes}); "
            "discrete orthonormality would fail"
        )
    t, v = np.polynomial.hermite.hermgauss(quad_order)
    weights = v * np.exp(t**2)
    table = hermite_eval_table(n_modes, t)
    eigenvalues = np.arange(n_modes) + 0.5
    return HermiteBasis1D(n_modes, t, weights, table, eigenvalues)


def product_quadrature(n_points: int, alpha: float = 2.0):
    """Nodes/weights exact for integrands exp(-alpha z^2) * poly.

    Obtained by scaling the Gauss-Hermite rule; with alpha = 2 this
    integrates products of four Hermite functions (degree <= 2*n_points-1)
    exactly, which is what the sigma = 1 nonlinearity produces.
    """
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    t, v = np.polynomial.hermite.hermgauss(n_points)
    s = np.sqrt(alpha)
    return t / s, v * np.exp(t**2) / s


def apply_exp_Hz(theta: float, coeffs: np.ndarray) -> np.ndarray:
    """Multiply coefficient n by exp(-i theta (n + 1/2)) along the last axis.

    This is the oscillator propagator exp(-i theta H_z) in the eigenbasis;
    exactly unitary, 2*pi periodic up to a global sign.
    """
    n = np.arange(coeffs.shape[-1])
    return coeffs * np.exp(-1j * theta * (n + 0.5))


@lru_cache(maxsize=None)
def _verify_kappa_closed_forms() -> None:
    """Cheap insurance: check kappa_0, kappa_1 at sigma=1 vs closed forms."""
    for n, exact in ((0, 1.0 / SQRT_2PI), (1, 0.75 / SQRT_2PI)):
        got = _kappa_raw(n, 1.0)
        if abs(got - exact) > 1e-12:
            raise AssertionError(
                f"quadrature under-resolved: kappa_{n}(sigma=1) = {got!r}, "
                f"expected {exact!r}"
            )


def _kappa_raw(n: int, sigma: float, n_quad: int | None = None) -> float:
    if n_quad is None:
        n_quad = max(64, 4 * (n + 1))
    z, w = product_quadrature(n_quad, alpha=sigma + 1.0)
    chi = hermite_eval_table(n + 1, z)[n]
    return float(np.sum(w * np.abs(chi) ** (2.0 * sigma + 2.0)))


def kappa_n(n: int, sigma: float, lam: float, n_quad: int | None = None) -> float:
    """Effective nonlinear coupling of band n: lam * integral |chi_n|^(2s+2).

    The quadrature rule is matched to the Gaussian envelope exp(-(sigma+1) z^2)
    of the integrand; at sigma = 1 it is exact and verified once against the
    closed-form values for n = 0, 1.
    """
    if n < 0:
        raise ValueError("mode index must be >= 0")
    if not 1.0 <= sigma < 2.0:
        raise ValueError("sigma must lie in [1, 2)")
    if lam == 0.0:
        return 0.0
    if sigma == 1.0:
        _verify_kappa_closed_forms()
    return lam * _kappa_raw(n, sigma, n_quad)
