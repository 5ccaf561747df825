"""p-particle observables given by dense kernels on lattice^p x lattice^p.

A kernel K acts as (a phi)(X) = h^{dp} sum_Y K(X;Y) phi(Y). Kernels are
symmetrized at construction under simultaneous permutation of the p
coordinate blocks in both arguments.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, NumericalError
from .grid import LatticeGrid, WaveFunction


def block_permutation_indices(p: int, sites: int) -> list[np.ndarray]:
    """Flat-index maps for every permutation of the p coordinate blocks.

    Index X = (x_1..x_p) is flattened row-major with x_1 most significant.
    """
    dim = sites ** p
    flat = np.arange(dim)
    digits = []
    rest = flat
    for _ in range(p):
        digits.append(rest % sites)
        rest = rest // sites
    digits = digits[::-1]  # digits[0] = x_1
    maps = []
    for perm in itertools.permutations(range(p)):
        idx = np.zeros(dim, dtype=np.int64)
        for pos in range(p):
            idx = idx * sites + digits[perm[pos]]
        maps.append(idx)
    return maps


def symmetrize_kernel(kernel: np.ndarray, p: int, sites: int) -> np.ndarray:
    """Average the kernel over simultaneous block permutations of both arguments."""
    out = np.zeros_like(kernel, dtype=np.complex128)
    maps = block_permutation_indices(p, sites)
    for idx in maps:
        out += kernel[np.ix_(idx, idx)]
    return out / len(maps)


@dataclass
class PObservable:
    """Bounded p-particle observable with a dense symmetrized kernel."""

    p: int
    kernel: np.ndarray

    @classmethod
    def from_kernel(cls, p: int, kernel: np.ndarray) -> "PObservable":
        kernel = np.asarray(kernel, dtype=np.complex128)
        if p < 1:
            raise DomainError(f"observable particle count must be >= 1, got {p}")
        if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1]:
            raise DimensionError(f"kernel must be square, got shape {kernel.shape}")
        dim = kernel.shape[0]
        sites = round(dim ** (1.0 / p))
        if sites ** p != dim:
            raise DimensionError(
                f"kernel dimension {dim} is not a p-th power of a site count (p={p})"
            )
        if p > 1:
            kernel = symmetrize_kernel(kernel, p, sites)
        return cls(p=p, kernel=kernel)

    @property
    def sites(self) -> int:
        return round(self.kernel.shape[0] ** (1.0 / self.p))

    def is_self_adjoint(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.kernel - self.kernel.conj().T)) <= tol)


def _symmetric_project(z: np.ndarray, maps: list[np.ndarray]) -> np.ndarray:
    out = np.zeros_like(z)
    for idx in maps:
        out += z[idx]
    return out / len(maps)


def operator_norm(a: PObservable, grid: LatticeGrid, tol: float = 1e-8,
                  max_iter: int = 10000) -> float:
    """Spectral norm of h^{dp} K restricted to the permutation-symmetric subspace.

    Power iteration on (P B P)^* (P B P) with a deterministic start vector.
    """
    sites = a.sites
    if sites != grid.n_sites:
        raise DimensionError(
            f"kernel is built over {sites} sites, grid has {grid.n_sites}"
        )
    B = (grid.cell_volume ** a.p) * a.kernel
    maps = block_permutation_indices(a.p, sites)
    rng = np.random.default_rng(12345)
    z = rng.standard_normal(B.shape[0]) + 1j * rng.standard_normal(B.shape[0])
    z = _symmetric_project(z, maps)
    z /= np.linalg.norm(z)
    for _ in range(max_iter):
        w = _symmetric_project(B @ z, maps)
        y = _symmetric_project(B.conj().T @ w, maps)
        lam = float(np.real(np.vdot(z, y)))  # Rayleigh quotient of (PBP)^* PBP
        if lam <= 0.0 and np.linalg.norm(y) == 0.0:
            return 0.0
        # Hermitian residual bound: |lam - lam_true| <= ||y - lam z||
        residual = float(np.linalg.norm(y - lam * z))
        ynorm = np.linalg.norm(y)
        z = y / ynorm
        if residual <= 0.5 * tol * abs(lam):
            return float(np.sqrt(max(lam, 0.0)))
    raise NumericalError(
        f"operator-norm power iteration did not converge in {max_iter} iterations"
    )


def lift_factor(n: int, p: int) -> float:
    """Prefactor N!/(N^p (N-p)!) of the N-body lift, as a stable product."""
    if p < 1 or p > n:
        raise DomainError(f"need 1 <= p <= N, got p={p}, N={n}")
    out = 1.0
    for k in range(p):
        out *= (n - k) / n
    return out


# --- stock observables ----------------------------------------------------

def condensate_projector(phi: WaveFunction, p: int = 1) -> PObservable:
    """p-fold tensor power of the rank-one projector |phi><phi|."""
    u = phi.amplitudes
    k1 = np.outer(u, u.conj())
    kernel = k1
    for _ in range(p - 1):
        kernel = np.kron(kernel, k1)
    return PObservable.from_kernel(p, kernel)


def site_multiplier(grid: LatticeGrid, amplitude: float = 1.0,
                    mode: int = 1) -> PObservable:
    """One-particle multiplication by the smooth function A*cos(2 pi mode x / L).

    For d > 1 the profile is a product of the axis profiles.
    """
    x = grid.axis_coordinates()
    prof = np.cos(2.0 * np.pi * mode * x / grid.length)
    f = prof
    for _ in range(grid.d - 1):
        f = np.multiply.outer(f, prof)
    f = amplitude * f.ravel()
    kernel = np.diag(f.astype(np.complex128)) / grid.cell_volume
    return PObservable.from_kernel(1, kernel)
