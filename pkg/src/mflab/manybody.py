"""Exact N-boson dynamics on the lattice.

The symmetric N-particle sector is spanned by occupation vectors over the
sites. The Hamiltonian is assembled in second-quantized form
    sum_{x,y} T_{xy} adag_x a_y + (1/2N) sum_{x,y} v(x-y) adag_x adag_y a_y a_x,
whose pair sum reproduces (1/N) sum_{i<j} v(x_i - x_j) exactly, including
same-site pairs with weight v(0) n_x (n_x - 1)/2. Propagation uses Lanczos
exponentiation with adaptive substeps and a dense fallback for small bases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import (ConsistencyError, DimensionError, DomainError,
                     NumericalError, ResourceError)
from .grid import LatticeGrid, WaveFunction, _laplacian_array
from .observables import PObservable, lift_factor, operator_norm

DIMENSION_CAP = 200_000
DENSE_FALLBACK_DIM = 500


@dataclass(frozen=True)
class FockBasis:
    """Lexicographically ordered occupation vectors with a fixed total N."""

    n_particles: int
    sites: int
    states: tuple[tuple[int, ...], ...]
    index: dict  # occupation tuple -> position

    def __len__(self) -> int:
        return len(self.states)


def fock_dimension(n: int, sites: int) -> int:
    return math.comb(n + sites - 1, n)


def _occupations(n: int, sites: int):
    if sites == 1:
        yield (n,)
        return
    for head in range(n + 1):
        for rest in _occupations(n - head, sites - 1):
            yield (head,) + rest


@lru_cache(maxsize=64)
def _cached_basis(n: int, sites: int) -> FockBasis:
    states = tuple(_occupations(n, sites))
    index = {s: i for i, s in enumerate(states)}
    return FockBasis(n_particles=n, sites=sites, states=states, index=index)


def build_fock_basis(n: int, grid: LatticeGrid,
                     dimension_cap: int = DIMENSION_CAP) -> FockBasis:
    if n < 1:
        raise DomainError(f"particle number must be >= 1, got {n}")
    dim = fock_dimension(n, grid.n_sites)
    if dim > dimension_cap:
        raise ResourceError(
            f"Fock sector for N={n}, M={grid.m} (d={grid.d}) has dimension {dim}, "
            f"exceeding the cap {dimension_cap}"
        )
    return _cached_basis(n, grid.n_sites)


@dataclass
class ManyBodyState:
    """Coefficient vector over a Fock basis."""

    basis: FockBasis
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.complex128).ravel()
        if c.size != len(self.basis):
            raise DimensionError(
                f"coefficient vector has {c.size} entries, basis has {len(self.basis)}"
            )
        self.coefficients = c

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))


@dataclass
class SparseHamiltonian:
    """Real symmetric sparse matrix over a Fock basis."""

    basis: FockBasis
    matrix: scipy.sparse.csr_matrix


@lru_cache(maxsize=16)
def kinetic_matrix(grid: LatticeGrid) -> np.ndarray:
    """One-particle matrix of -Lap (columns are stencil images of unit vectors)."""
    s = grid.n_sites
    t = np.zeros((s, s))
    for j in range(s):
        e = np.zeros(s)
        e[j] = 1.0
        t[:, j] = -_laplacian_array(grid, e.astype(np.complex128)).real
    return t


def interaction_matrix(grid: LatticeGrid, values: np.ndarray) -> np.ndarray:
    """V[x, y] = v(x - y) with periodic differences per axis."""
    v = np.asarray(values).reshape(grid.shape)
    s = grid.n_sites
    idx = np.arange(s)
    coords = np.array(np.unravel_index(idx, grid.shape))  # (d, s)
    diff = (coords[:, :, None] - coords[:, None, :]) % grid.m  # (d, s, s)
    return v[tuple(diff)]


def assemble_hamiltonian(grid: LatticeGrid, v, n: int,
                         basis: FockBasis) -> SparseHamiltonian:
    if basis.sites != grid.n_sites or basis.n_particles != n:
        raise DimensionError("basis does not match the requested (N, grid)")
    values = np.asarray(v.values, dtype=np.float64).ravel()
    if values.size != grid.n_sites:
        raise DimensionError("field does not live on the given grid")
    t = kinetic_matrix(grid)
    vmat = interaction_matrix(grid, values)
    v0 = float(values[0])
    hops = [(x, y, t[x, y]) for x in range(basis.sites) for y in range(basis.sites)
            if x != y and t[x, y] != 0.0]
    t_diag = np.diag(t)

    dim = len(basis)
    occ = np.array(basis.states, dtype=np.float64)
    # interaction + kinetic diagonal; the pair sum is diagonal in occupations
    diag = occ @ t_diag + (np.einsum("ix,xy,iy->i", occ, vmat, occ) - v0 * n) / (2.0 * n)

    rows, cols, vals = list(range(dim)), list(range(dim)), list(diag)
    index = basis.index
    for i, state in enumerate(basis.states):
        for x, y, txy in hops:
            ny = state[y]
            if ny == 0:
                continue
            nx = state[x]
            dest = list(state)
            dest[y] = ny - 1
            dest[x] = nx + 1
            j = index[tuple(dest)]
            rows.append(j)
            cols.append(i)
            vals.append(txy * math.sqrt(ny * (nx + 1)))
    mat = scipy.sparse.csr_matrix(
        (np.array(vals), (np.array(rows), np.array(cols))), shape=(dim, dim)
    )
    return SparseHamiltonian(basis=basis, matrix=mat)


def product_state_lift(phi: WaveFunction, n: int, basis: FockBasis) -> ManyBodyState:
    """Coefficients of the N-fold product state phi^(x)N in the occupation basis."""
    if abs(phi.norm() - 1.0) > 1e-12:
        raise DomainError(f"product lift requires a unit state, norm = {phi.norm()!r}")
    if basis.sites != phi.grid.n_sites or basis.n_particles != n:
        raise DimensionError("basis does not match (N, grid)")
    u = phi.grid.cell_volume ** 0.5 * phi.amplitudes  # unit l2 vector
    log_nfact = math.lgamma(n + 1)
    coeffs = np.empty(len(basis), dtype=np.complex128)
    for i, state in enumerate(basis.states):
        w = math.exp(0.5 * (log_nfact - sum(math.lgamma(k + 1) for k in state)))
        amp = 1.0 + 0.0j
        for x, k in enumerate(state):
            if k:
                amp *= u[x] ** k
        coeffs[i] = w * amp
    return ManyBodyState(basis=basis, coefficients=coeffs)


# --- Krylov propagation ---------------------------------------------------

def _lanczos_apply(mat, c: np.ndarray, tau: float, m: int):
    """One Krylov step of e^{-i tau H} c; returns (result, error_estimate)."""
    dim = c.size
    m = min(m, dim)
    beta0 = np.linalg.norm(c)
    if beta0 == 0:
        return c.copy(), 0.0
    vs = np.zeros((m, dim), dtype=np.complex128)
    alphas = np.zeros(m)
    betas = np.zeros(max(m - 1, 0))
    vs[0] = c / beta0
    k = m
    happy = False
    for j in range(m):
        w = mat @ vs[j]
        alphas[j] = float(np.real(np.vdot(vs[j], w)))
        w = w - alphas[j] * vs[j]
        if j > 0:
            w = w - betas[j - 1] * vs[j - 1]
        # full reorthogonalization keeps the norm drift below 1e-10
        proj = vs[: j + 1].conj() @ w
        w = w - vs[: j + 1].T @ proj
        beta = np.linalg.norm(w)
        if j == m - 1:
            last_beta = beta
            break
        if beta < 1e-14:
            k = j + 1
            happy = True
            last_beta = 0.0
            break
        betas[j] = beta
        vs[j + 1] = w / beta
    evals, evecs = scipy.linalg.eigh_tridiagonal(alphas[:k], betas[: k - 1])
    y = evecs @ (np.exp(-1j * tau * evals) * evecs[0])
    err = 0.0 if happy else float(abs(last_beta * y[-1]))
    out = beta0 * (vs[:k].T @ y)
    return out, err


def krylov_expm_multiply(mat, c: np.ndarray, t: float, krylov_dim: int = 30,
                         tol: float = 1e-12) -> np.ndarray:
    """e^{-i t H} c by Lanczos with adaptive substeps on the residual estimate."""
    if t == 0:
        return c.copy()
    cur = c.astype(np.complex128)
    remaining = float(t)
    tau = remaining
    attempts = 0
    while remaining > 1e-15 * abs(t):
        tau = min(tau, remaining)
        out, err = _lanczos_apply(mat, cur, tau, krylov_dim)
        if err <= tol:
            cur = out
            remaining -= tau
            tau *= 2.0
        else:
            tau /= 2.0
        attempts += 1
        if attempts > 100_000 or tau < 1e-12 * max(abs(t), 1.0):
            raise NumericalError(
                f"Krylov propagation stalled: remaining time {remaining:.3e}, "
                f"substep {tau:.3e}, last residual estimate {err:.3e}"
            )
    return cur


def evolve_manybody(psi0: ManyBodyState, h: SparseHamiltonian,
                    t: float) -> ManyBodyState:
    """Psi_t = e^{-i H t} Psi_0; dense exponential below DENSE_FALLBACK_DIM."""
    if h.basis is not psi0.basis and h.basis.states != psi0.basis.states:
        raise DimensionError("state and Hamiltonian use different bases")
    if t < 0:
        raise DomainError(f"evolution time must be nonnegative, got {t}")
    if abs(psi0.norm() - 1.0) > 1e-12:
        raise DomainError("evolve_manybody requires a normalized state")
    if t == 0:
        return ManyBodyState(psi0.basis, psi0.coefficients.copy())
    dim = len(psi0.basis)
    if dim < DENSE_FALLBACK_DIM:
        u = scipy.linalg.expm(-1j * t * h.matrix.toarray())
        out = u @ psi0.coefficients
    else:
        out = krylov_expm_multiply(h.matrix, psi0.coefficients, t)
    return ManyBodyState(psi0.basis, out)


# --- reduced density matrices and expectations ----------------------------

def _apply_annihilation(coeffs: np.ndarray, basis: FockBasis, sub: FockBasis,
                        x: int) -> np.ndarray:
    """a_x: coefficients in the N sector -> coefficients in the N-1 sector."""
    out = np.zeros(len(sub), dtype=np.complex128)
    sub_index = sub.index
    for i, state in enumerate(basis.states):
        k = state[x]
        if k == 0:
            continue
        dest = list(state)
        dest[x] = k - 1
        out[sub_index[tuple(dest)]] += math.sqrt(k) * coeffs[i]
    return out


def reduced_density_matrix(psi: ManyBodyState, p: int,
                           grid: LatticeGrid) -> np.ndarray:
    """Trace-one p-particle reduced density matrix as a kernel on lattice^p."""
    n = psi.basis.n_particles
    sites = psi.basis.sites
    if p < 1 or p > n:
        raise DomainError(f"need 1 <= p <= N, got p={p}, N={n}")
    if sites != grid.n_sites:
        raise DimensionError("state does not live on the given grid")
    # vectors a_{x_p}...a_{x_1} Psi for every p-tuple, built level by level
    level = {(): (psi.coefficients, psi.basis)}
    for _ in range(p):
        nxt = {}
        for prefix, (coeffs, basis_k) in level.items():
            sub = _cached_basis(basis_k.n_particles - 1, sites)
            for x in range(sites):
                nxt[prefix + (x,)] = (_apply_annihilation(coeffs, basis_k, sub, x), sub)
        level = nxt
    dim = sites ** p
    vecs = np.empty((dim, len(next(iter(level.values()))[0])), dtype=np.complex128)
    for flat in range(dim):
        tup = tuple(np.unravel_index(flat, (sites,) * p))
        vecs[flat] = level[tup][0]
    raw = vecs @ vecs.conj().T  # raw[X, Y] = <a_Y Psi, a_X Psi>
    scale = math.exp(math.lgamma(n - p + 1) - math.lgamma(n + 1))
    return (scale / grid.cell_volume ** p) * raw


def manybody_expectation(psi: ManyBodyState, a: PObservable, grid: LatticeGrid,
                         norm_bound: float | None = None) -> float:
    """X_N = lift_factor(N, p) * Tr(a gamma^(p)), with the pathwise bound checked."""
    n = psi.basis.n_particles
    if a.p > n:
        raise DomainError(f"observable acts on {a.p} particles but N = {n}")
    gamma = reduced_density_matrix(psi, a.p, grid)
    weight = grid.cell_volume ** (2 * a.p)
    val = weight * np.sum(a.kernel * gamma.T)
    if abs(val.imag) >= 1e-10:
        raise ConsistencyError(
            f"many-body expectation has imaginary residue {val.imag:.3e}"
        )
    x = float(val.real) * lift_factor(n, a.p)
    bound = operator_norm(a, grid) if norm_bound is None else norm_bound
    if abs(x) > bound + 1e-12:
        raise ConsistencyError(
            f"|X_N| = {abs(x)!r} exceeds the observable norm {bound!r}"
        )
    return x


def energy_expectation(psi: ManyBodyState, h: SparseHamiltonian) -> float:
    val = np.vdot(psi.coefficients, h.matrix @ psi.coefficients)
    return float(val.real)
