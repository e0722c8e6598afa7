"""Gaussian-state data: g(k), the fictitious Hamiltonian, and chain correlations.

A number-conserving Gaussian state is fixed by a p x p Hermitian matrix g(k);
its covariance matrix of single-particle correlations

    hfict[mu, nu](k) = <c^dag_mu(k) c_nu(k)>

is the spectral Fermi function of g(k) read in transposed index order. That
transpose is fixed here once and honored everywhere downstream; thermal
invariants do not feel it, user-supplied non-equilibrium grids do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import GapError
from .model import (
    BlochModel,
    BlochModel1D,
    MomentumGrid,
    _check_hermitian,
    _grid_index,
    momentum_line,
    restrict_model,
)

OCCUPATION_ATOL = 1e-10
HALF_MARGIN_DEFAULT = 1e-3


def fermi_occupation(x):
    """1/(e^x + 1) evaluated on the overflow-safe branch for either sign."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = np.exp(-x[pos]) / (1.0 + np.exp(-x[pos]))
    out[~pos] = 1.0 / (1.0 + np.exp(x[~pos]))
    return out


@dataclass(frozen=True)
class FictitiousHamiltonianGrid:
    """p x p Hermitian matrices with spectrum in [0, 1] on a momentum grid."""

    grid: MomentumGrid
    values: np.ndarray  # (nx, ny, p, p)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        p = values.shape[-1]
        if values.shape != (self.grid.nx, self.grid.ny, p, p):
            raise ValueError(f"values shape {values.shape} does not match grid "
                             f"({self.grid.nx}, {self.grid.ny}, p, p)")
        _check_hermitian(values, what="fictitious Hamiltonian grid")
        occ = np.linalg.eigvalsh(values)
        if occ.min() < -OCCUPATION_ATOL or occ.max() > 1 + OCCUPATION_ATOL:
            raise ValueError(
                f"occupation spectrum outside [0, 1]: [{occ.min():.3e}, {occ.max():.3e}]")
        object.__setattr__(self, "values", values)

    @property
    def p(self) -> int:
        return self.values.shape[-1]

    def half_margin(self) -> float:
        """Distance of the occupation spectrum from 1/2 (generalized gap)."""
        occ = np.linalg.eigvalsh(self.values)
        return float(np.abs(occ - 0.5).min())

    def require_generalized_gap(self, margin: float = HALF_MARGIN_DEFAULT):
        got = self.half_margin()
        if got <= margin:
            raise GapError(
                f"occupation spectrum approaches 1/2 within {got:.3e} <= margin {margin:.0e}; "
                "generalized gap condition violated")


def save_matrix_grid(path, grid: MomentumGrid, values: np.ndarray):
    """Text matrix-grid file: header 'p nx ny', then row-major complex entries.

    Outer loop ix (kx = -pi + 2pi ix/nx), inner iy; per grid point the p matrix
    rows follow, each as p (re, im) decimal pairs. '#' starts a comment.
    """
    v = np.asarray(values, dtype=complex)
    p = v.shape[-1]
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{p} {grid.nx} {grid.ny}\n")
        for ix in range(grid.nx):
            for iy in range(grid.ny):
                for r in range(p):
                    f.write(" ".join(f"{v[ix, iy, r, c].real:.17g} {v[ix, iy, r, c].imag:.17g}"
                                     for c in range(p)) + "\n")


def load_matrix_grid(path) -> tuple[MomentumGrid, np.ndarray]:
    """Parse a matrix-grid file; see save_matrix_grid for the layout."""
    with open(path, encoding="utf-8") as f:
        tokens = []
        for line in f:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if len(tokens) < 3:
        raise ValueError(f"{path}: missing 'p nx ny' header")
    p, nx, ny = (int(t) for t in tokens[:3])
    data = np.array([float(t) for t in tokens[3:]])
    expected = nx * ny * p * p * 2
    if data.size != expected:
        raise ValueError(f"{path}: expected {expected} numbers after header, got {data.size}")
    values = data.reshape(nx, ny, p, p, 2)
    return MomentumGrid(nx, ny), values[..., 0] + 1j * values[..., 1]


def save_hfict_grid(path, hgrid: FictitiousHamiltonianGrid):
    save_matrix_grid(path, hgrid.grid, hgrid.values)


def load_hfict_grid(path) -> FictitiousHamiltonianGrid:
    grid, values = load_matrix_grid(path)
    return FictitiousHamiltonianGrid(grid, values)


@dataclass(frozen=True)
class GaussianStateSpec:
    """Thermal state (beta, mu, model) or a directly tabulated hfict grid.

    beta = math.inf marks the pure-state (projector) limit.
    """

    beta: Optional[float] = None
    mu: float = 0.0
    model: Optional[BlochModel] = None
    hfict_grid: Optional[FictitiousHamiltonianGrid] = None

    def __post_init__(self):
        if (self.model is None) == (self.hfict_grid is None):
            raise ValueError("specify exactly one of model (thermal) or hfict_grid (tabulated)")
        if self.model is not None:
            if self.beta is None or not self.beta > 0:
                raise ValueError(f"thermal spec needs beta > 0 (or inf), got {self.beta}")

    @classmethod
    def thermal(cls, beta: float, mu: float, model: BlochModel) -> "GaussianStateSpec":
        return cls(beta=beta, mu=mu, model=model)

    @classmethod
    def from_grid(cls, hfict_grid: FictitiousHamiltonianGrid) -> "GaussianStateSpec":
        return cls(hfict_grid=hfict_grid)

    @property
    def is_thermal(self) -> bool:
        return self.model is not None

    @property
    def is_pure(self) -> bool:
        return self.is_thermal and math.isinf(self.beta)

    @property
    def p(self) -> int:
        return self.model.p if self.is_thermal else self.hfict_grid.p

    def pure_limit(self) -> "GaussianStateSpec":
        if not self.is_thermal:
            raise ValueError("pure limit only defined for thermal specs")
        return replace(self, beta=math.inf)


@dataclass(frozen=True)
class ChainGaussianSpec:
    """Thermal Gaussian state of a standalone 1D chain model."""

    beta: float
    mu: float
    model: BlochModel1D

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"need beta > 0 (or inf), got {self.beta}")


def g_matrix(spec: GaussianStateSpec, kx: float, ky: float) -> np.ndarray:
    """g(k) = beta (h(k) - mu); finite temperature only."""
    if not spec.is_thermal:
        raise ValueError("g_matrix requires a thermal spec")
    if spec.is_pure:
        raise ValueError("beta = inf has no finite g; use the projector path "
                         "of fictitious_hamiltonian")
    h = spec.model.matrix(kx, ky)
    return spec.beta * (h - spec.mu * np.eye(spec.p))


def _occupations(energies: np.ndarray, beta: float, mu: float,
                 atol: float = 1e-9) -> np.ndarray:
    """Band occupation factors; beta = inf fills strictly below mu."""
    if math.isinf(beta):
        if np.abs(energies - mu).min() <= atol:
            raise GapError(f"beta = inf with an eigenvalue within {atol:.0e} of mu={mu}: "
                           "gapless projector limit")
        return (energies < mu).astype(float)
    return fermi_occupation(beta * (energies - mu))


def _hfict_from_h(hs: np.ndarray, beta: float, mu: float) -> np.ndarray:
    """Covariance matrices for stacked Bloch matrices (..., p, p).

    Spectral evaluation of the Fermi factors, then the transposed index
    order of the covariance: hfict = [V f V^dag]^T.
    """
    energies, vectors = np.linalg.eigh(hs)
    occ = _occupations(energies, beta, mu)
    fermi_matrix = np.einsum("...ij,...j,...kj->...ik", vectors, occ, vectors.conj())
    return np.swapaxes(fermi_matrix, -1, -2).copy()


def fictitious_hamiltonian(spec: GaussianStateSpec, kx: float, ky: float) -> np.ndarray:
    """hfict(k): Fermi function of g(k) in the covariance index order.

    For beta = inf this is the transpose of the projector onto the bands of
    h(k) below mu; an eigenvalue of h within 1e-9 of mu raises GapError.
    """
    if spec.is_thermal:
        h = spec.model.matrix(kx, ky)
        _check_hermitian(h, what=f"Bloch matrix at k=({kx:.6f}, {ky:.6f})")
        return _hfict_from_h(h, spec.beta, spec.mu)
    ix = _grid_index(kx, spec.hfict_grid.grid.nx)
    iy = _grid_index(ky, spec.hfict_grid.grid.ny)
    return spec.hfict_grid.values[ix, iy]


def fictitious_grid(spec: GaussianStateSpec, grid: MomentumGrid) -> FictitiousHamiltonianGrid:
    """Tabulate hfict over a full momentum grid."""
    if not spec.is_thermal:
        if (spec.hfict_grid.grid.nx, spec.hfict_grid.grid.ny) != (grid.nx, grid.ny):
            raise ValueError("requested grid does not match the tabulated one")
        return spec.hfict_grid
    kxs, kys = np.meshgrid(grid.kx_values(), grid.ky_values(), indexing="ij")
    hs = spec.model.matrices(kxs, kys)
    return FictitiousHamiltonianGrid(grid, _hfict_from_h(hs, spec.beta, spec.mu))


def hfict_line(spec: GaussianStateSpec, direction: str, transverse_k: float,
               n_cells: int) -> np.ndarray:
    """hfict samples (n_cells, p, p) along a chain through the BZ.

    Thermal specs evaluate the model on n_cells uniform samples; tabulated
    specs require n_cells and transverse_k to match the stored grid, and must
    keep their occupation spectrum away from 1/2 (no thermal gap information
    exists for them, so the generalized gap is checked directly).
    """
    ks = momentum_line(n_cells)
    if spec.is_thermal:
        model1d = restrict_model(spec.model, direction, transverse_k)
        return _hfict_from_h(model1d.matrices(ks), spec.beta, spec.mu)
    spec.hfict_grid.require_generalized_gap()
    hgrid = spec.hfict_grid
    if direction == "x":
        if n_cells != hgrid.grid.nx:
            raise ValueError(f"tabulated spec fixes n_cells = {hgrid.grid.nx} for x chains")
        iy = _grid_index(transverse_k, hgrid.grid.ny)
        return hgrid.values[:, iy]
    if direction == "y":
        if n_cells != hgrid.grid.ny:
            raise ValueError(f"tabulated spec fixes n_cells = {hgrid.grid.ny} for y chains")
        ix = _grid_index(transverse_k, hgrid.grid.nx)
        return hgrid.values[ix, :]
    raise ValueError(f"direction must be 'x' or 'y', got {direction!r}")


def hfict_line_1d(beta: float, mu: float, model: BlochModel1D, n_cells: int) -> np.ndarray:
    """Thermal hfict samples for a standalone 1D chain model."""
    ks = momentum_line(n_cells)
    if not beta > 0:
        raise ValueError(f"beta must be positive (or inf), got {beta}")
    return _hfict_from_h(model.matrices(ks), beta, mu)


def correlation_from_hfict_line(line: np.ndarray) -> np.ndarray:
    """Real-space chain correlation matrix from hfict samples on the chain BZ.

    M[(j,lam),(j',lam')] = (1/N) sum_k e^{-ik(j-j')} hfict[lam,lam'](k) with the
    composite index j-major. Direct O(N^2 p^2) Fourier sum.
    """
    line = np.asarray(line, dtype=complex)
    n = line.shape[0]
    p = line.shape[-1]
    ks = momentum_line(n)
    j = np.arange(n)
    phases = np.exp(-1j * np.subtract.outer(j, j)[:, :, None] * ks[None, None, :])
    blocks = np.tensordot(phases, line, axes=([2], [0])) / n  # (n, n, p, p)
    return blocks.transpose(0, 2, 1, 3).reshape(n * p, n * p)


@dataclass(frozen=True)
class ChainCorrelationMatrix:
    """L x L (L = p N) correlation matrix of a chain at fixed transverse momentum.

    entries[(j,lam),(j',lam')] = <c^dag_{j lam} c_{j' lam'}>, j-major ordering.
    """

    direction: str
    transverse_k: float
    n_cells: int
    p: int
    entries: np.ndarray

    def __post_init__(self):
        L = self.n_cells * self.p
        if self.entries.shape != (L, L):
            raise ValueError(f"expected {L}x{L} entries, got {self.entries.shape}")
        _check_hermitian(self.entries, atol=1e-10, what="chain correlation matrix")

    @property
    def n_modes(self) -> int:
        return self.n_cells * self.p

    def occupation_spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


def chain_correlation_matrix(spec: GaussianStateSpec, direction: str, transverse_k: float,
                             n_cells: int) -> ChainCorrelationMatrix:
    """Correlation matrix of the 1D chain cut out of a 2D Gaussian state."""
    if n_cells < 2:
        raise ValueError(f"need n_cells >= 2, got {n_cells}")
    line = hfict_line(spec, direction, transverse_k, n_cells)
    return ChainCorrelationMatrix(direction=direction, transverse_k=float(transverse_k),
                                  n_cells=n_cells, p=spec.p,
                                  entries=correlation_from_hfict_line(line))


def filled_band_count(occupations: np.ndarray, margin: float = HALF_MARGIN_DEFAULT) -> int:
    """Number of occupation eigenvalues above 1/2; rejects spectra near 1/2."""
    occupations = np.asarray(occupations)
    if np.abs(occupations - 0.5).min() <= margin:
        raise GapError(f"occupation within {margin:.0e} of 1/2: filled frame ill-defined")
    return int((occupations > 0.5).sum())
