import numpy as np
import pytest

from rotgpe import field, oscillator2d


@pytest.fixture(scope="module")
def basis():
    return oscillator2d.build_joint_basis(6)


def test_level_structure(basis):
    for n in range(7):
        level = [s for s in basis.states if s.n == n]
        assert len(level) == n + 1
        assert sorted(s.mu for s in level) == list(range(-n, n + 1, 2))


def test_ground_state_is_product(basis):
    s = [st for st in basis.states if st.n == 0][0]
    assert s.mu == 0
    assert np.abs(s.cartesian_coeffs - np.array([1.0])).max() < 1e-14


def test_level_one_circular_combinations(basis):
    # coefficients indexed by a1: mu = +1 state is (|01> - i |10>)/sqrt(2)
    # up to the global-phase convention (first component real positive)
    for s in (st for st in basis.states if st.n == 1):
        c = s.cartesian_coeffs
        assert abs(abs(c[0]) - 1 / np.sqrt(2)) < 1e-12
        assert abs(c[1] + 1j * s.mu * c[0]) < 1e-12


def test_states_orthonormal_within_level(basis):
    for n in range(7):
        u = basis.level_vectors[n]
        gram = u.conj().T @ u
        assert np.abs(gram - np.eye(n + 1)).max() < 1e-12


def test_modal_operators_reproduce_eigenrelations(basis):
    for s in basis.states:
        v = np.zeros((7, 7, 1), dtype=complex)
        for a1, amp in enumerate(s.cartesian_coeffs):
            v[a1, s.n - a1, 0] = amp
        assert np.abs(oscillator2d.apply_lz_modal(v) - s.mu * v).max() < 1e-8
        assert np.abs(oscillator2d.apply_hx_modal(v) - (s.n + 1) * v).max() < 1e-8


def test_level_projector_trace(basis):
    for n in range(7):
        u = basis.level_vectors[n]
        proj = u @ u.conj().T
        assert abs(np.trace(proj).real - (n + 1)) < 1e-10


def test_propagate_levels_unitary(basis):
    rng = np.random.default_rng(2)
    c = rng.standard_normal((7, 7, 5)) + 1j * rng.standard_normal((7, 7, 5))
    a = np.arange(7)
    c[(a[:, None] + a[None, :]) > 6] = 0.0
    out = oscillator2d.propagate_levels(
        basis, c, lambda n, mu: np.exp(1j * (0.3 * (n + 1) + 0.7 * mu)))
    assert abs(np.linalg.norm(out) - np.linalg.norm(c)) < 1e-12
    # identity phase is the identity map
    same = oscillator2d.propagate_levels(basis, c, lambda n, mu: 1.0)
    assert np.abs(same - c).max() < 1e-12


def test_ground_profile_values_and_symmetry():
    g = field.Grid3D.create(64, 64, 10.0, 10.0, 4)
    prof = oscillator2d.ground_state_profile(g)
    i0 = np.argmin(np.abs(g.x1))
    assert prof[i0, i0] == pytest.approx(np.pi ** -0.5, abs=1e-12)
    assert np.abs(prof - prof.T).max() == 0.0
    assert np.sum(prof**2) * g.cell == pytest.approx(1.0, abs=1e-8)
    l4 = np.sum(prof**4) * g.cell
    assert l4 == pytest.approx(1.0 / (2 * np.pi), abs=1e-10)


def test_ground_profile_domain_too_small():
    g = field.Grid3D.create(8, 8, 1.5, 1.5, 4)
    with pytest.raises(ValueError):
        oscillator2d.ground_state_profile(g)


def test_kappa0_2d_closed_form():
    assert oscillator2d.kappa0_2d(1.0, 1.0) == pytest.approx(
        1.0 / (2 * np.pi), abs=1e-12)
    assert oscillator2d.kappa0_2d(1.0, 0.0) == 0.0
    assert oscillator2d.kappa0_2d(1.0, 2.5) == pytest.approx(
        2.5 / (2 * np.pi), abs=1e-12)


def test_level_populations_sum():
    rng = np.random.default_rng(4)
    c = rng.standard_normal((5, 5, 3)) + 1j * rng.standard_normal((5, 5, 3))
    a = np.arange(5)
    c[(a[:, None] + a[None, :]) > 4] = 0.0
    pops = oscillator2d.level_populations(c, 4, measure=0.25)
    assert pops.sum() == pytest.approx(0.25 * (np.abs(c) ** 2).sum(), rel=1e-12)
    assert np.all(pops >= 0)
