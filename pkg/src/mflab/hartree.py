"""Hartree flow i d/dt psi = -Lap psi + (v * |psi|^2) psi on the lattice.

Integrated by Strang splitting: half-step nonlinear phase, full kinetic step
in Fourier space with the exact lattice dispersion, half-step phase with the
updated density. Each substep is unitary, so the norm is conserved by
construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DimensionError, DomainError
from .grid import LatticeGrid, WaveFunction, convolve
from .observables import PObservable
from .random_field import RandomField

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class HartreeRunParams:
    """Evolution horizon and step size; dt is snapped so steps*dt = t_final."""

    t_final: float
    dt: float
    grid: LatticeGrid

    def __post_init__(self):
        if self.t_final < 0:
            raise DomainError(f"t_final must be nonnegative, got {self.t_final}")
        if not (self.dt > 0):
            raise DomainError(f"dt must be positive, got {self.dt}")

    @property
    def steps(self) -> int:
        if self.t_final == 0:
            return 0
        return max(1, round(self.t_final / self.dt))

    @property
    def effective_dt(self) -> float:
        return self.t_final / self.steps if self.steps else self.dt


def lattice_dispersion(grid: LatticeGrid) -> np.ndarray:
    """Eigenvalues of -Lap per Fourier multi-index, shaped like the grid."""
    k = np.arange(grid.m)
    lam_axis = (2.0 - 2.0 * np.cos(2.0 * np.pi * k / grid.m)) / grid.h ** 2
    lam = np.zeros(grid.shape)
    for axis in range(grid.d):
        shape = [1] * grid.d
        shape[axis] = grid.m
        lam = lam + lam_axis.reshape(shape)
    return lam


def kinetic_step(psi: WaveFunction, dt: float,
                 phases: np.ndarray | None = None) -> WaveFunction:
    """Exact free step e^{i dt Lap} applied in Fourier space."""
    grid = psi.grid
    if phases is None:
        phases = np.exp(-1j * dt * lattice_dispersion(grid))
    spec = np.fft.fftn(psi.amplitudes.reshape(grid.shape))
    out = np.fft.ifftn(spec * phases).ravel()
    return WaveFunction(grid, out)


def potential_phase(psi: WaveFunction, v: RandomField, dt: float) -> WaveFunction:
    """Pointwise phase e^{-i dt (v * |psi|^2)}."""
    grid = psi.grid
    density = np.abs(psi.amplitudes) ** 2
    w = convolve(grid, v.values, density)
    return WaveFunction(grid, psi.amplitudes * np.exp(-1j * dt * w))


def hartree_step(psi: WaveFunction, v: RandomField, dt: float,
                 kinetic: bool = True,
                 kinetic_phases: np.ndarray | None = None) -> WaveFunction:
    """One Strang step; `kinetic=False` is a test hook leaving pure phases."""
    if v.grid != psi.grid:
        raise DimensionError("field and wavefunction live on different grids")
    if abs(psi.norm() - 1.0) > _NORM_TOL:
        raise DomainError(f"hartree_step requires a unit state, norm = {psi.norm()!r}")
    out = potential_phase(psi, v, dt / 2)
    if kinetic:
        out = kinetic_step(out, dt, phases=kinetic_phases)
    out = potential_phase(out, v, dt / 2)
    return out


def evolve_hartree(phi: WaveFunction, v: RandomField,
                   params: HartreeRunParams) -> WaveFunction:
    if phi.grid != params.grid:
        raise DimensionError("initial state does not live on the run grid")
    steps = params.steps
    if steps == 0:
        return WaveFunction(phi.grid, phi.amplitudes.copy())
    dt = params.effective_dt
    phases = np.exp(-1j * dt * lattice_dispersion(phi.grid))
    psi = phi
    for _ in range(steps):
        psi = hartree_step(psi, v, dt, kinetic_phases=phases)
    return psi


def hartree_expectation(psi: WaveFunction, a: PObservable) -> float:
    """X = <psi^(x)p, a psi^(x)p> for a self-adjoint kernel; real by construction."""
    grid = psi.grid
    if a.sites != grid.n_sites:
        raise DimensionError("observable kernel does not match the state's grid")
    vec = psi.amplitudes
    for _ in range(a.p - 1):
        vec = np.kron(vec, psi.amplitudes)
    weight = grid.cell_volume ** (2 * a.p)
    val = weight * np.vdot(vec, a.kernel @ vec)
    if abs(val.imag) >= 1e-10:
        raise ConsistencyError(
            f"expectation has imaginary part {val.imag:.3e}; observable not self-adjoint?"
        )
    return float(val.real)


def hartree_energy(psi: WaveFunction, v: RandomField) -> float:
    """Discrete energy: kinetic quadratic form plus half the interaction term."""
    from .grid import _laplacian_array

    grid = psi.grid
    amps = psi.amplitudes
    kin = -grid.cell_volume * np.vdot(amps, _laplacian_array(grid, amps)).real
    density = np.abs(amps) ** 2
    w = convolve(grid, v.values, density)
    pot = 0.5 * grid.cell_volume * float(np.sum(w * density))
    return float(kin + pot)
