"""Bloch Hamiltonians on a discretized 2D Brillouin zone.

Units: lattice constant a = 1, hbar = 1, energies in units of the hopping
amplitude. Momenta live on [-pi, pi) and every built-in evaluator is
2pi-periodic in both components.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GapError, NonHermitianError

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

HERMITICITY_ATOL = 1e-12
FERMI_DEGENERACY_ATOL = 1e-9


def wrap_momentum(k):
    """Reduce a momentum component modulo 2pi into [-pi, pi)."""
    return (np.asarray(k) + np.pi) % (2 * np.pi) - np.pi


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform periodic grid: kx_j = -pi + 2pi*j/nx (j = 0..nx-1), same for ky.

    +pi is excluded; index nx wraps to 0 in all loop constructions.
    """

    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.nx}x{self.ny}")

    def kx_values(self) -> np.ndarray:
        return -np.pi + 2 * np.pi * np.arange(self.nx) / self.nx

    def ky_values(self) -> np.ndarray:
        return -np.pi + 2 * np.pi * np.arange(self.ny) / self.ny

    def axis_values(self, direction: str) -> np.ndarray:
        if direction == "x":
            return self.kx_values()
        if direction == "y":
            return self.ky_values()
        raise ValueError(f"direction must be 'x' or 'y', got {direction!r}")


def momentum_line(n: int) -> np.ndarray:
    """n uniform samples of a closed BZ line, -pi inclusive, +pi excluded."""
    if n < 2:
        raise ValueError("need at least 2 momentum samples")
    return -np.pi + 2 * np.pi * np.arange(n) / n


def qwz_d_vector(kx, ky, alpha: float = 1.0, gamma: float = 3.0, m: float = 1.0) -> np.ndarray:
    """d-vector of the asymmetric two-band model.

    d = (alpha sin kx, gamma sin ky, m - cos kx - cos ky); the defaults
    (1, 3, 1) give the asymmetric band structure used throughout.
    """
    return np.array([alpha * np.sin(kx), gamma * np.sin(ky), m - np.cos(kx) - np.cos(ky)])


def bloch_matrix_from_d(d) -> np.ndarray:
    """d . sigma = [[dz, dx - i dy], [dx + i dy, -dz]]."""
    dx, dy, dz = d
    return np.array([[dz, dx - 1j * dy], [dx + 1j * dy, -dz]], dtype=complex)


@dataclass(frozen=True)
class BlochModel:
    """p internal states and a map (kx, ky) -> p x p Hermitian Bloch matrix."""

    p: int
    evaluator: Callable[[float, float], np.ndarray]
    name: str = "custom"
    parameters: dict = field(default_factory=dict)

    def matrix(self, kx: float, ky: float) -> np.ndarray:
        return np.asarray(self.evaluator(kx, ky), dtype=complex)

    def matrices(self, kxs, kys) -> np.ndarray:
        """Stack of Bloch matrices for paired momentum arrays (same shape)."""
        kxs = np.atleast_1d(kxs)
        kys = np.atleast_1d(kys)
        out = np.empty(kxs.shape + (self.p, self.p), dtype=complex)
        for idx in np.ndindex(kxs.shape):
            out[idx] = self.matrix(kxs[idx], kys[idx])
        return out


@dataclass(frozen=True)
class BlochModel1D:
    """One-dimensional chain variant: k -> p x p Hermitian matrix."""

    p: int
    evaluator: Callable[[float], np.ndarray]
    name: str = "custom-1d"

    def matrix(self, k: float) -> np.ndarray:
        return np.asarray(self.evaluator(k), dtype=complex)

    def matrices(self, ks) -> np.ndarray:
        ks = np.atleast_1d(ks)
        out = np.empty(ks.shape + (self.p, self.p), dtype=complex)
        for i, k in enumerate(ks):
            out[i] = self.matrix(k)
        return out


def qwz_model(alpha: float = 1.0, gamma: float = 3.0, m: float = 1.0) -> BlochModel:
    def evaluate(kx, ky):
        return bloch_matrix_from_d(qwz_d_vector(kx, ky, alpha, gamma, m))

    return BlochModel(p=2, evaluator=evaluate, name="qwz",
                      parameters={"alpha": alpha, "gamma": gamma, "m": m})


def atomic_model(d=(0.0, 0.0, 1.0)) -> BlochModel:
    """k-independent two-band model (atomic limit); all invariants vanish."""
    h = bloch_matrix_from_d(d)

    def evaluate(kx, ky):
        return h

    return BlochModel(p=2, evaluator=evaluate, name="atomic",
                      parameters={"d": tuple(float(c) for c in d)})


def tabulated_model(grid: MomentumGrid, values: np.ndarray, name: str = "tabulated") -> BlochModel:
    """Model backed by matrices sampled on `grid`; momenta must hit grid points."""
    values = np.asarray(values, dtype=complex)
    p = values.shape[-1]
    if values.shape != (grid.nx, grid.ny, p, p):
        raise ValueError(f"expected values of shape ({grid.nx}, {grid.ny}, p, p), got {values.shape}")

    def evaluate(kx, ky):
        ix = _grid_index(kx, grid.nx)
        iy = _grid_index(ky, grid.ny)
        return values[ix, iy]

    return BlochModel(p=p, evaluator=evaluate, name=name)


def restrict_model(model: BlochModel, direction: str, transverse_k: float) -> BlochModel1D:
    """1D chain model along `direction` at fixed transverse momentum."""
    if direction == "x":
        return BlochModel1D(model.p, lambda k: model.matrix(k, transverse_k),
                            name=f"{model.name}|ky={transverse_k:.6g}")
    if direction == "y":
        return BlochModel1D(model.p, lambda k: model.matrix(transverse_k, k),
                            name=f"{model.name}|kx={transverse_k:.6g}")
    raise ValueError(f"direction must be 'x' or 'y', got {direction!r}")


def _grid_index(k: float, n: int, atol: float = 1e-12) -> int:
    """Index of k among the n uniform samples -pi + 2pi j/n; error off-grid."""
    x = (float(k) + np.pi) * n / (2 * np.pi)
    j = int(np.rint(x)) % n
    k_j = -np.pi + 2 * np.pi * j / n
    if abs(wrap_momentum(k - k_j)) > atol:
        raise ValueError(f"momentum {k!r} is not a grid sample (n={n})")
    return j


@dataclass(frozen=True)
class BandSystem:
    """Ascending eigenvalues and gauge-fixed orthonormal eigenvectors (columns)."""

    energies: np.ndarray
    states: np.ndarray  # states[:, n] is the n-th band vector


def _check_hermitian(h: np.ndarray, atol: float = HERMITICITY_ATOL, what: str = "matrix"):
    dev = np.abs(h - np.swapaxes(h, -1, -2).conj()).max()
    if dev > atol:
        raise NonHermitianError(
            f"{what} is not Hermitian: max |h - h^dagger| = {dev:.3e} > {atol:.0e}")


def _gauge_fix(vectors: np.ndarray) -> np.ndarray:
    """Rephase each column so its largest-|.| component (first on ties) is real positive."""
    idx = np.argmax(np.abs(vectors), axis=-2)
    pivot = np.take_along_axis(vectors, idx[..., None, :], axis=-2)
    phase = pivot / np.abs(pivot)
    return vectors * phase.conj()


def band_system(h: np.ndarray, atol: float = HERMITICITY_ATOL) -> BandSystem:
    """Diagonalize a Hermitian Bloch matrix with a deterministic gauge.

    Eigenvalues ascend; each eigenvector is rephased so its largest-magnitude
    component (lowest index on ties) is real and positive, making repeated
    calls bitwise reproducible.
    """
    h = np.asarray(h, dtype=complex)
    _check_hermitian(h, atol, "band_system input")
    energies, vectors = np.linalg.eigh(h)
    return BandSystem(energies=energies, states=_gauge_fix(vectors))


def band_systems(hs: np.ndarray, atol: float = HERMITICITY_ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Batched band_system over stacked matrices (..., p, p)."""
    hs = np.asarray(hs, dtype=complex)
    _check_hermitian(hs, atol, "band_systems input")
    energies, vectors = np.linalg.eigh(hs)
    return energies, _gauge_fix(vectors)


def band_gap(model: BlochModel, grid: MomentumGrid, mu: float,
             atol: float = FERMI_DEGENERACY_ATOL) -> float:
    """Minimum over the grid of the direct gap straddling mu.

    Requires mu to separate the same number of bands at every grid point;
    otherwise (or if an eigenvalue sits within `atol` of mu) the chemical
    potential is inside a band and the offending k is reported.
    """
    kxs, kys = np.meshgrid(grid.kx_values(), grid.ky_values(), indexing="ij")
    hs = model.matrices(kxs, kys)
    energies = np.linalg.eigvalsh(hs)

    close = np.abs(energies - mu) <= atol
    if close.any():
        ix, iy = np.argwhere(close.any(axis=-1))[0]
        raise GapError(
            f"eigenvalue within {atol:.0e} of mu={mu} at k=({kxs[ix, iy]:.6f}, {kys[ix, iy]:.6f})")

    below = (energies < mu).sum(axis=-1)
    n0 = below.flat[0]
    if n0 == 0 or n0 == model.p:
        raise GapError(f"mu={mu} lies below/above the entire spectrum at "
                       f"k=({kxs.flat[0]:.6f}, {kys.flat[0]:.6f})")
    if (below != n0).any():
        ix, iy = np.argwhere(below != n0)[0]
        raise GapError(
            f"mu={mu} lies inside a band: occupation count changes at "
            f"k=({kxs[ix, iy]:.6f}, {kys[ix, iy]:.6f})")

    gap = (energies[..., n0] - energies[..., n0 - 1]).min()
    return float(gap)
