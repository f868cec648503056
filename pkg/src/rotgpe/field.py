"""Wave fields on tensor grids, discrete norms and the gauge transform.

Two grid flavors are provided:

* ``Grid3D`` for strong confinement along z: Fourier collocation in
  (x1, x2) on a periodic box, Hermite functions in z.
* ``GridXConf`` for strong confinement in the (x1, x2) plane: tensor Hermite
  functions in x, Fourier collocation in z.

A ``WaveField`` is plain data (complex array + representation tag + grid);
all conversions are unitary with respect to the discrete L2 inner product.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from . import hermite

# representation tags, Grid3D
PHYSICAL = "physical"      # x collocation, z on Hermite nodes
FOURIER_X = "fourier_x"    # x Fourier modes (both axes), z on nodes
HERMITE_Z = "hermite_z"    # x collocation, z Hermite coefficients
MIXED = "mixed"            # x Fourier modes, z Hermite coefficients

# representation tags, GridXConf (z takes the Fourier role)
XMODES = "xmodes"              # x tensor-Hermite coefficients, z collocation
FOURIER_Z = "fourier_z"        # x collocation, z Fourier modes
XMODES_FOURIER_Z = "xmodes_fourier_z"

MODELS = (
    "full_psi",
    "gauged_u",
    "limit3d_phi",
    "effective2d_varphi",
    "full_psi_2dconf",
    "limit_phi1d",
    "effective1d",
)


class GridMismatchError(ValueError):
    pass


class RepresentationError(ValueError):
    pass


@dataclass(frozen=True)
class SimParams:
    """Physical and numerical parameters of one run."""

    epsilon: float = 1.0
    omega: tuple = (0.0, 0.0, 0.0)       # (Omega_1, Omega_2, Omega_z)
    coupling: float = 1.0                # lambda in front of |u|^(2 sigma) u
    sigma: float = 1.0
    dt: float = 1e-3
    t_final: float = 1.0
    model: str = "gauged_u"
    n1: int = 128
    n2: int = 128
    box1: float = 12.0                   # half box length, domain [-box, box)
    box2: float = 12.0
    n_hermite: int = 32                  # N_z (or N_x per axis for xconf)
    nz_fourier: int = 64                 # z grid size for the xconf models
    boxz: float = 12.0
    n_theta: int = 0                     # 0 -> default 4 * n_hermite

    def __post_init__(self):
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError("epsilon must lie in (0, 1]")
        if not (1.0 <= self.sigma < 2.0):
            raise ValueError("sigma must lie in [1, 2)")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.t_final < 0.0:
            raise ValueError("t_final must be nonnegative")
        if len(self.omega) != 3:
            raise ValueError("omega must be a triple (Omega_1, Omega_2, Omega_z)")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.n_hermite < 1:
            raise ValueError("n_hermite must be >= 1")
        for n, name in ((self.n1, "n1"), (self.n2, "n2"), (self.nz_fourier, "nz_fourier")):
            if n < 2 or (n & (n - 1)) != 0:
                raise ValueError(f"{name} must be a power of two >= 2")

    @property
    def theta_points(self) -> int:
        return self.n_theta if self.n_theta > 0 else 4 * self.n_hermite


def _fourier_wavenumbers(n: int, half_box: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(n, d=2.0 * half_box / n)


@dataclass(frozen=True)
class Grid3D:
    """Fourier box in (x1, x2), Hermite nodes in z."""

    n1: int
    n2: int
    L1: float
    L2: float
    basis: hermite.HermiteBasis1D
    dealias_nodes: np.ndarray = dc_field(default=None, repr=False)
    dealias_weights: np.ndarray = dc_field(default=None, repr=False)
    dealias_table: np.ndarray = dc_field(default=None, repr=False)

    @classmethod
    def create(cls, n1: int, n2: int, L1: float, L2: float, n_hermite: int) -> "Grid3D":
        basis = hermite.build_basis(n_hermite)
        zd, wd = hermite.product_quadrature(2 * n_hermite, alpha=2.0)
        table = hermite.hermite_eval_table(n_hermite, zd)
        return cls(n1, n2, L1, L2, basis, zd, wd, table)

    @classmethod
    def from_params(cls, p: SimParams) -> "Grid3D":
        return cls.create(p.n1, p.n2, p.box1, p.box2, p.n_hermite)

    @property
    def x1(self) -> np.ndarray:
        return -self.L1 + 2.0 * self.L1 * np.arange(self.n1) / self.n1

    @property
    def x2(self) -> np.ndarray:
        return -self.L2 + 2.0 * self.L2 * np.arange(self.n2) / self.n2

    @property
    def k1(self) -> np.ndarray:
        return _fourier_wavenumbers(self.n1, self.L1)

    @property
    def k2(self) -> np.ndarray:
        return _fourier_wavenumbers(self.n2, self.L2)

    @property
    def z_nodes(self) -> np.ndarray:
        return self.basis.nodes

    @property
    def cell(self) -> float:
        return (2.0 * self.L1 / self.n1) * (2.0 * self.L2 / self.n2)

    def meshes(self):
        """Broadcastable (X1, X2, Z) arrays in physical representation."""
        return (
            self.x1[:, None, None],
            self.x2[None, :, None],
            self.z_nodes[None, None, :],
        )

    def z_measure(self, z_modal: bool) -> np.ndarray:
        if z_modal:
            return np.ones(self.basis.n_modes)
        return self.basis.weights

    def shape(self, rep: str):
        nz = self.basis.n_modes if rep in (HERMITE_Z, MIXED) else self.basis.quad_order
        return (self.n1, self.n2, nz)


@dataclass(frozen=True)
class GridXConf:
    """Tensor-Hermite plane in (x1, x2), periodic Fourier grid in z.

    The x-modal truncation is triangular (alpha_1 + alpha_2 < n_modes) so
    that every retained oscillator level is complete; this keeps the joint
    (H_x, L_z) structure and the 2*pi periodicity of the filtered
    nonlinearity exact on the truncated space.
    """

    n_modes: int
    nz: int
    Lz: float
    basis: hermite.HermiteBasis1D
    dealias_nodes: np.ndarray = dc_field(default=None, repr=False)
    dealias_weights: np.ndarray = dc_field(default=None, repr=False)
    dealias_table: np.ndarray = dc_field(default=None, repr=False)

    @classmethod
    def create(cls, n_modes: int, nz: int, Lz: float) -> "GridXConf":
        basis = hermite.build_basis(n_modes)
        xd, wd = hermite.product_quadrature(2 * n_modes, alpha=2.0)
        table = hermite.hermite_eval_table(n_modes, xd)
        return cls(n_modes, nz, Lz, basis, xd, wd, table)

    @classmethod
    def from_params(cls, p: SimParams) -> "GridXConf":
        return cls.create(p.n_hermite, p.nz_fourier, p.boxz)

    @property
    def z(self) -> np.ndarray:
        return -self.Lz + 2.0 * self.Lz * np.arange(self.nz) / self.nz

    @property
    def kz(self) -> np.ndarray:
        return _fourier_wavenumbers(self.nz, self.Lz)

    @property
    def dz(self) -> float:
        return 2.0 * self.Lz / self.nz

    @property
    def x_nodes(self) -> np.ndarray:
        return self.basis.nodes

    def meshes(self):
        x = self.x_nodes
        return x[:, None, None], x[None, :, None], self.z[None, None, :]

    def triangular_mask(self) -> np.ndarray:
        a = np.arange(self.n_modes)
        return (a[:, None] + a[None, :]) < self.n_modes

    def shape(self, rep: str):
        nx = self.n_modes if rep in (XMODES, XMODES_FOURIER_Z) else self.basis.quad_order
        return (nx, nx, self.nz)


@dataclass
class WaveField:
    """Complex amplitudes plus representation tag; plain movable data."""

    data: np.ndarray
    representation: str
    grid: object

    def copy(self) -> "WaveField":
        return WaveField(self.data.copy(), self.representation, self.grid)

    def to(self, rep: str) -> "WaveField":
        if rep == self.representation:
            return self
        return WaveField(
            _convert(self.grid, self.data, self.representation, rep), rep, self.grid
        )


def _convert(grid, data, src, dst):
    if isinstance(grid, Grid3D):
        return _convert_3d(grid, data, src, dst)
    if isinstance(grid, GridXConf):
        return _convert_xconf(grid, data, src, dst)
    raise TypeError(f"unsupported grid type {type(grid)!r}")


def _convert_3d(grid: Grid3D, data, src, dst):
    reps = {PHYSICAL: (0, 0), FOURIER_X: (1, 0), HERMITE_Z: (0, 1), MIXED: (1, 1)}
    if src not in reps or dst not in reps:
        raise RepresentationError(f"unknown representation {src!r} -> {dst!r}")
    (xs, zs), (xd, zd) = reps[src], reps[dst]
    out = data
    if zs == 0 and zd == 1:
        out = grid.basis.forward(out)
    elif zs == 1 and zd == 0:
        out = grid.basis.backward(out)
    if xs == 0 and xd == 1:
        out = np.fft.fft(np.fft.fft(out, axis=0, norm="ortho"), axis=1, norm="ortho")
    elif xs == 1 and xd == 0:
        out = np.fft.ifft(np.fft.ifft(out, axis=0, norm="ortho"), axis=1, norm="ortho")
    return out


def _convert_xconf(grid: GridXConf, data, src, dst):
    reps = {PHYSICAL: (0, 0), XMODES: (1, 0), FOURIER_Z: (0, 1), XMODES_FOURIER_Z: (1, 1)}
    if src not in reps or dst not in reps:
        raise RepresentationError(f"unknown representation {src!r} -> {dst!r}")
    (xs, zs), (xd, zd) = reps[src], reps[dst]
    out = data
    b = grid.basis
    if xs == 0 and xd == 1:
        out = np.tensordot(b.weights[:, None] * b.eval_table.T, out, axes=(0, 0))
        out = np.swapaxes(
            np.tensordot(b.weights[:, None] * b.eval_table.T, np.swapaxes(out, 0, 1), axes=(0, 0)),
            0, 1,
        )
        out = np.where(grid.triangular_mask()[:, :, None], out, 0.0)
    elif xs == 1 and xd == 0:
        out = np.tensordot(b.eval_table, out, axes=(0, 0))
        out = np.swapaxes(np.tensordot(b.eval_table, np.swapaxes(out, 0, 1), axes=(0, 0)), 0, 1)
    if zs == 0 and zd == 1:
        out = np.fft.fft(out, axis=2, norm="ortho")
    elif zs == 1 and zd == 0:
        out = np.fft.ifft(out, axis=2, norm="ortho")
    return out


def _measure(field: WaveField) -> np.ndarray:
    """Broadcastable weight array such that ||f||^2 = sum w |f|^2."""
    g, rep = field.grid, field.representation
    if isinstance(g, Grid3D):
        wz = g.z_measure(rep in (HERMITE_Z, MIXED))
        return g.cell * wz[None, None, :]
    if isinstance(g, GridXConf):
        if rep in (XMODES, XMODES_FOURIER_Z):
            return np.full((1, 1, 1), g.dz)
        w = g.basis.weights
        return g.dz * w[:, None, None] * w[None, :, None]
    raise TypeError(f"unsupported grid type {type(g)!r}")


def _check_same_grid(a: WaveField, b: WaveField):
    if a.grid is not b.grid and a.grid != b.grid:
        raise GridMismatchError("fields live on different grids")


def inner(a: WaveField, b: WaveField) -> complex:
    """Sesquilinear inner product <a, b>, linear in the first argument."""
    _check_same_grid(a, b)
    bb = b.to(a.representation)
    return complex(np.sum(a.data * np.conj(bb.data) * _measure(a)))


def norm_L2(f: WaveField) -> float:
    return float(np.sqrt(np.sum(np.abs(f.data) ** 2 * _measure(f)).real))


def scale_to_mass(f: WaveField, mass: float = 1.0) -> WaveField:
    n = norm_L2(f)
    if n == 0.0:
        raise ValueError("cannot normalize the zero field")
    return WaveField(f.data * (np.sqrt(mass) / n), f.representation, f.grid)


def _hx_apply(grid: Grid3D, data_phys: np.ndarray) -> np.ndarray:
    """Apply H_x = -Laplacian_x/2 + |x|^2/2, each part in its diagonal rep."""
    k1 = grid.k1[:, None, None]
    k2 = grid.k2[None, :, None]
    hat = np.fft.fft(data_phys, axis=0, norm="ortho")
    kin = np.fft.ifft(0.5 * k1**2 * hat, axis=0, norm="ortho")
    hat = np.fft.fft(data_phys, axis=1, norm="ortho")
    kin = kin + np.fft.ifft(0.5 * k2**2 * hat, axis=1, norm="ortho")
    X1, X2, _ = grid.meshes()
    return kin + 0.5 * (X1**2 + X2**2) * data_phys


def sigma_norms(f: WaveField):
    """Discrete (Sigma^1, Sigma^2) norms via oscillator spectral multipliers.

    Sigma^1^2 = ||u||^2 + <H_z u, u> + <H_x u, u>;
    Sigma^2^2 = ||u||^2 + ||H_z u||^2 + ||H_x u||^2.
    """
    if not isinstance(f.grid, Grid3D):
        raise RepresentationError("sigma_norms is defined for Grid3D fields")
    g = f.grid
    hz = f.to(HERMITE_Z)
    lam = g.basis.eigenvalues[None, None, :]
    w = _measure(hz)
    l2sq = np.sum(np.abs(hz.data) ** 2 * w).real
    hz1 = np.sum(lam * np.abs(hz.data) ** 2 * w).real
    hz2 = np.sum(lam**2 * np.abs(hz.data) ** 2 * w).real

    phys = f.to(PHYSICAL)
    hx_u = _hx_apply(g, phys.data)
    wp = _measure(phys)
    hx1 = np.sum((hx_u * np.conj(phys.data)).real * wp)
    hx2 = np.sum(np.abs(hx_u) ** 2 * wp).real
    s1 = np.sqrt(l2sq + hz1 + hx1)
    s2 = np.sqrt(l2sq + hz2 + hx2)
    return float(s1), float(s2)


def gauge_transform(
    psi: WaveField,
    epsilon: float,
    omega,
    direction: str,
    confinement: str = "z_confined",
) -> WaveField:
    """Unit-modulus change of unknown between psi and the gauged field u.

    z_confined: psi = exp(+i eps z (O1 x2 - O2 x1)) u;
    x_confined: psi = exp(+i eps z (O2 x1 - O1 x2)) u.
    """
    if psi.representation != PHYSICAL:
        raise RepresentationError("gauge_transform requires the physical representation")
    if direction not in ("to_u", "to_psi"):
        raise ValueError("direction must be 'to_u' or 'to_psi'")
    o1, o2, _ = omega
    X1, X2, Z = psi.grid.meshes()
    phase = epsilon * Z * (o1 * X2 - o2 * X1)
    if confinement == "x_confined":
        phase = -phase
    elif confinement != "z_confined":
        raise ValueError("confinement must be 'z_confined' or 'x_confined'")
    sign = -1.0 if direction == "to_u" else 1.0
    return WaveField(psi.data * np.exp(1j * sign * phase), PHYSICAL, psi.grid)


def l2_distance_filtered(psi_eps: WaveField, phi: WaveField, t: float, epsilon: float) -> float:
    """|| psi_eps - exp(-i t H_z / eps^2) phi ||_L2 on a Grid3D."""
    _check_same_grid(psi_eps, phi)
    if not isinstance(phi.grid, Grid3D):
        raise RepresentationError("filtered distance is defined for Grid3D fields")
    ph = phi.to(HERMITE_Z)
    filt = WaveField(
        hermite.apply_exp_Hz(t / epsilon**2, ph.data), HERMITE_Z, ph.grid
    )
    a = psi_eps.to(HERMITE_Z)
    return float(
        np.sqrt(np.sum(np.abs(a.data - filt.data) ** 2 * _measure(a)).real)
    )


# ---------------------------------------------------------------------------
# binary snapshot format

_MAGIC = b"GPEF"
_VERSION = 1
_REP_CODES = {
    PHYSICAL: 0, FOURIER_X: 1, HERMITE_Z: 2, MIXED: 3,
    XMODES: 4, FOURIER_Z: 5, XMODES_FOURIER_Z: 6,
}
_REP_NAMES = {v: k for k, v in _REP_CODES.items()}


def save_field(path, f: WaveField) -> None:
    """Little-endian dump: magic, version, n1, n2, nz, rep code, (re, im) f64."""
    n1, n2, nz = f.data.shape
    header = _MAGIC + struct.pack("<IIIIB", _VERSION, n1, n2, nz, _REP_CODES[f.representation])
    flat = np.ascontiguousarray(f.data, dtype=np.complex128)
    inter = np.empty(flat.size * 2, dtype="<f8")
    inter[0::2] = flat.real.ravel()
    inter[1::2] = flat.imag.ravel()
    with open(path, "wb") as fh:
        fh.write(header)
        inter.tofile(fh)


def load_field(path, grid) -> WaveField:
    with open(path, "rb") as fh:
        head = fh.read(21)
        if head[:4] != _MAGIC:
            raise ValueError(f"{path}: not a GPEF field file")
        version, n1, n2, nz, rep_code = struct.unpack("<IIIIB", head[4:])
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        inter = np.fromfile(fh, dtype="<f8", count=2 * n1 * n2 * nz)
    if inter.size != 2 * n1 * n2 * nz:
        raise ValueError(f"{path}: truncated field data")
    data = (inter[0::2] + 1j * inter[1::2]).reshape(n1, n2, nz)
    rep = _REP_NAMES[rep_code]
    expected = grid.shape(rep)
    if tuple(expected) != (n1, n2, nz):
        raise GridMismatchError(
            f"{path}: stored shape {(n1, n2, nz)} does not match grid {tuple(expected)}"
        )
    return WaveField(data, rep, grid)


def with_params(p: SimParams, **kw) -> SimParams:
    return replace(p, **kw)
