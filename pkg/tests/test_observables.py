import itertools
import math

import numpy as np
import pytest

from mflab.errors import DomainError
from mflab.grid import build_grid, gaussian_packet, plane_wave
from mflab.observables import (PObservable, block_permutation_indices,
                               condensate_projector, lift_factor,
                               operator_norm, site_multiplier,
                               symmetrize_kernel)


def test_lift_factor_p1_is_one():
    for n in (1, 2, 5, 17, 64):
        assert lift_factor(n, 1) == 1.0


def test_lift_factor_small_cases():
    # direct factorial arithmetic: N!/(N^p (N-p)!)
    assert lift_factor(3, 2) == pytest.approx(6 / (9 * 1), abs=1e-15)
    assert lift_factor(2, 2) == pytest.approx(2 / (4 * 1), abs=1e-15)


def test_lift_factor_matches_factorials():
    for n in range(1, 20):
        for p in range(1, n + 1):
            exact = math.factorial(n) / (n ** p * math.factorial(n - p))
            assert lift_factor(n, p) == pytest.approx(exact, rel=1e-13)


def test_lift_factor_range_and_monotonicity():
    for p in (1, 2, 3):
        vals = [lift_factor(n, p) for n in range(p, 65)]
        assert all(0 < v <= 1 for v in vals)
        assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert lift_factor(64, 2) > 0.96  # approaches 1 for fixed p


def test_lift_factor_domain():
    with pytest.raises(DomainError):
        lift_factor(2, 3)
    with pytest.raises(DomainError):
        lift_factor(2, 0)


def test_operator_norm_rank_one_projector():
    g = build_grid(1, 8, 8.0)
    phi = gaussian_packet(g)
    a = condensate_projector(phi, p=1)
    assert operator_norm(a, g) == pytest.approx(1.0, abs=1e-8)


def test_operator_norm_identity_kernel():
    g = build_grid(1, 8, 4.0)
    a = PObservable.from_kernel(1, np.eye(8) / g.cell_volume)
    assert operator_norm(a, g) == pytest.approx(1.0, abs=1e-8)


def _symmetric_basis_p2(sites):
    """Orthonormal basis of the two-particle symmetric subspace (l2 coords)."""
    cols = []
    for x in range(sites):
        for y in range(x, sites):
            e = np.zeros(sites * sites)
            if x == y:
                e[x * sites + y] = 1.0
            else:
                e[x * sites + y] = e[y * sites + x] = 1 / math.sqrt(2)
            cols.append(e)
    return np.array(cols).T


def test_operator_norm_p2_matches_dense_eigensolver():
    rng = np.random.default_rng(5)
    g = build_grid(1, 4, 4.0)
    raw = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    herm = raw + raw.conj().T
    a = PObservable.from_kernel(2, herm)
    basis = _symmetric_basis_p2(4)
    assert basis.shape == (16, 10)  # 10-dimensional symmetric subspace
    b = g.cell_volume ** 2 * a.kernel
    restricted = basis.T @ b @ basis
    dense = float(np.max(np.abs(np.linalg.eigvalsh(restricted))))
    assert operator_norm(a, g) == pytest.approx(dense, rel=1e-8)


def test_symmetrize_kernel_is_idempotent():
    rng = np.random.default_rng(9)
    raw = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    once = symmetrize_kernel(raw, 2, 4)
    twice = symmetrize_kernel(once, 2, 4)
    assert np.max(np.abs(once - twice)) < 1e-14


def test_operator_norm_invariant_under_resymmetrization():
    rng = np.random.default_rng(13)
    g = build_grid(1, 4, 2.0)
    raw = rng.standard_normal((16, 16))
    a = PObservable.from_kernel(2, raw + raw.T)
    a2 = PObservable.from_kernel(2, a.kernel)  # symmetrize again
    assert operator_norm(a, g) == pytest.approx(operator_norm(a2, g), rel=1e-8)


def test_kernel_block_symmetry_enforced():
    rng = np.random.default_rng(2)
    a = PObservable.from_kernel(2, rng.standard_normal((9, 9)))
    maps = block_permutation_indices(2, 3)
    swap = maps[1]
    assert np.max(np.abs(a.kernel - a.kernel[np.ix_(swap, swap)])) < 1e-14


def test_condensate_projector_tensor_power():
    g = build_grid(1, 4, 4.0)
    phi = plane_wave(g, 1)
    a = condensate_projector(phi, p=2)
    u = phi.amplitudes
    expected = np.kron(np.outer(u, u.conj()), np.outer(u, u.conj()))
    assert np.max(np.abs(a.kernel - expected)) < 1e-12
    assert a.is_self_adjoint()


def test_site_multiplier_norm_is_max_abs():
    g = build_grid(1, 8, 8.0)
    a = site_multiplier(g, amplitude=1.5, mode=1)
    x = g.axis_coordinates()
    expected = np.max(np.abs(1.5 * np.cos(2 * np.pi * x / g.length)))
    assert operator_norm(a, g) == pytest.approx(expected, rel=1e-8)
    assert a.is_self_adjoint()


def test_all_block_permutations_present():
    maps = block_permutation_indices(3, 2)
    assert len(maps) == math.factorial(3)
    flats = {tuple(m) for m in maps}
    assert len(flats) == 6
