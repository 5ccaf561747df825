import numpy as np
import pytest

from mflab.errors import ConsistencyError, DimensionError
from mflab.grid import (WaveFunction, build_grid, convolve, gaussian_packet,
                        normalize, plane_wave)
from mflab.hartree import (HartreeRunParams, evolve_hartree, hartree_energy,
                           hartree_expectation, hartree_step,
                           lattice_dispersion)
from mflab.observables import PObservable, condensate_projector, operator_norm
from mflab.random_field import FieldSpec, sample_field


GRID = build_grid(1, 8, 8.0)


def _field(base="zero", mean=0.0, sigmas=(), seed=0, grid=GRID):
    return sample_field(FieldSpec(base=base, gaussian_mean=mean,
                                  mode_stddevs=sigmas), seed, grid)


def test_free_step_multiplies_plane_wave_by_dispersion_phase():
    psi = plane_wave(GRID, 1)
    v = _field()  # identically zero
    dt = 0.01
    out = hartree_step(psi, v, dt)
    lam = lattice_dispersion(GRID).ravel()[1]  # mode k=1
    expected = np.exp(-1j * dt * lam) * psi.amplitudes
    assert np.max(np.abs(out.amplitudes - expected)) < 1e-13


def test_kinetic_disabled_leaves_pure_nonlinear_phase():
    psi = gaussian_packet(GRID)
    v = _field(base="gaussian_bump(1.0, 1.5)", sigmas=(0.5, 0.3), seed=3)
    dt = 0.05
    out = hartree_step(psi, v, dt, kinetic=False)
    w = convolve(GRID, v.values, np.abs(psi.amplitudes) ** 2)
    expected = psi.amplitudes * np.exp(-1j * dt * w)
    assert np.max(np.abs(out.amplitudes - expected)) < 1e-14


def test_step_preserves_norm():
    psi = gaussian_packet(GRID)
    v = _field(base="gaussian_bump(1.0, 1.5)", sigmas=(0.5,), seed=1)
    out = hartree_step(psi, v, 0.01)
    assert abs(out.norm() - psi.norm()) < 1e-12


def test_norm_conserved_over_thousand_steps():
    psi = gaussian_packet(GRID)
    v = _field(base="gaussian_bump(1.0, 1.5)", sigmas=(0.5, 0.3, 0.1), seed=5)
    params = HartreeRunParams(t_final=1.0, dt=1e-3, grid=GRID)
    out = evolve_hartree(psi, v, params)
    assert params.steps == 1000
    assert abs(out.norm() - 1.0) < 1e-10


def test_zero_time_is_identity():
    psi = gaussian_packet(GRID)
    v = _field(sigmas=(0.5,), seed=2)
    params = HartreeRunParams(t_final=0.0, dt=0.1, grid=GRID)
    out = evolve_hartree(psi, v, params)
    assert np.array_equal(out.amplitudes, psi.amplitudes)


def test_constant_interaction_is_global_phase():
    psi = gaussian_packet(GRID)
    c = 0.7
    v_const = _field(mean=c)
    v_zero = _field()
    params = HartreeRunParams(t_final=0.5, dt=0.5 / 512, grid=GRID)
    out = evolve_hartree(psi, v_const, params)
    free = evolve_hartree(psi, v_zero, params)
    overlap = free.inner(out)
    assert abs(abs(overlap) - 1.0) < 1e-12


def test_strang_splitting_is_second_order():
    psi = gaussian_packet(GRID)
    v = _field(base="gaussian_bump(1.0, 1.5)", sigmas=(0.5, 0.3), seed=8)
    t = 0.5

    def terminal(dt):
        return evolve_hartree(psi, v, HartreeRunParams(t, dt, GRID)).amplitudes

    ref = terminal(t / 1024)  # dt/16 reference
    err_coarse = np.linalg.norm(terminal(t / 64) - ref)
    err_fine = np.linalg.norm(terminal(t / 128) - ref)
    assert 3.5 <= err_coarse / err_fine <= 4.5


def test_energy_drift_is_small():
    psi = gaussian_packet(GRID)
    v = _field(base="gaussian_bump(1.0, 1.5)", sigmas=(0.5, 0.3, 0.1), seed=4)
    e0 = hartree_energy(psi, v)
    out = evolve_hartree(psi, v, HartreeRunParams(0.5, 0.5 / 512, GRID))
    e1 = hartree_energy(out, v)
    assert abs(e1 - e0) / abs(e0) < 1e-6


def test_time_reversal_returns_initial_state():
    psi = gaussian_packet(GRID)
    v = _field(base="gaussian_bump(1.0, 1.5)", sigmas=(0.5, 0.3), seed=6)
    params = HartreeRunParams(0.5, 0.5 / 512, GRID)
    fwd = evolve_hartree(psi, v, params)
    # v is real, so conjugation implements the backward flow
    back = evolve_hartree(WaveFunction(GRID, fwd.amplitudes.conj()), v, params)
    recovered = back.amplitudes.conj()
    phase = np.vdot(recovered, psi.amplitudes)
    phase /= abs(phase)
    assert np.max(np.abs(recovered * phase - psi.amplitudes)) < 1e-8


def test_expectation_projector_on_own_state():
    psi = gaussian_packet(GRID)
    a = condensate_projector(psi)
    assert hartree_expectation(psi, a) == pytest.approx(1.0, abs=1e-12)


def test_expectation_projector_on_orthogonal_state():
    phi = plane_wave(GRID, 1)
    chi = plane_wave(GRID, 2)
    a = condensate_projector(phi)
    assert abs(hartree_expectation(chi, a)) < 1e-12


def test_expectation_product_kernel_factorizes():
    rng = np.random.default_rng(0)
    psi = normalize(WaveFunction(GRID, rng.standard_normal(8)
                                 + 1j * rng.standard_normal(8)))
    raw = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    b = raw + raw.conj().T
    a2 = PObservable.from_kernel(2, np.kron(b, b))
    one_body = PObservable.from_kernel(1, b)
    x1 = hartree_expectation(psi, one_body)
    x2 = hartree_expectation(psi, a2)
    # direct double sum over the p=2 kernel
    vec = np.kron(psi.amplitudes, psi.amplitudes)
    direct = GRID.cell_volume ** 4 * np.vdot(vec, np.kron(b, b) @ vec).real
    assert x2 == pytest.approx(x1 ** 2, rel=1e-10)
    assert x2 == pytest.approx(direct, rel=1e-12)


def test_expectation_bounded_by_operator_norm():
    rng = np.random.default_rng(1)
    a = condensate_projector(gaussian_packet(GRID))
    bound = operator_norm(a, GRID)
    for seed in range(5):
        rng = np.random.default_rng(seed)
        psi = normalize(WaveFunction(GRID, rng.standard_normal(8)
                                     + 1j * rng.standard_normal(8)))
        assert abs(hartree_expectation(psi, a)) <= bound + 1e-12


def test_non_self_adjoint_kernel_rejected():
    rng = np.random.default_rng(2)
    a = PObservable.from_kernel(1, rng.standard_normal((8, 8))
                                + 1j * rng.standard_normal((8, 8)))
    psi = gaussian_packet(GRID)
    with pytest.raises(ConsistencyError):
        hartree_expectation(psi, a)


def test_grid_mismatch_rejected():
    psi = gaussian_packet(GRID)
    other = build_grid(1, 8, 4.0)
    v = _field(grid=other)
    with pytest.raises(DimensionError):
        hartree_step(psi, v, 0.01)


def test_params_snap_dt_to_horizon():
    params = HartreeRunParams(t_final=1.0, dt=0.3, grid=GRID)
    assert params.steps * params.effective_dt == pytest.approx(1.0, abs=1e-15)
