"""Ensemble geometric phase of Gaussian states via the determinant trace formula.

The trace of rho times the collective momentum-shift unitary reduces, for any
Gaussian state with correlation matrix M, to det[1 + M(D - 1)] with
D = diag(e^{i theta}). Determinants are accumulated in log space (phase +
log-magnitude) so chains with thousands of modes cannot under- or overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import AmplitudeZeroError, WindingMismatchError
from .gaussian import (
    ChainCorrelationMatrix,
    ChainGaussianSpec,
    GaussianStateSpec,
    correlation_from_hfict_line,
    hfict_line,
    hfict_line_1d,
)
from .geometry import PhaseProfile, principal_branch, winding_of_phase_profile
from .model import momentum_line


class GaussianTrace(NamedTuple):
    """det[1 + M(D-1)] kept as phase + log magnitude to survive huge chains."""

    phase: float
    log_magnitude: float

    @property
    def magnitude(self) -> float:
        return math.exp(self.log_magnitude) if math.isfinite(self.log_magnitude) else 0.0

    @property
    def value(self) -> complex:
        return self.magnitude * complex(math.cos(self.phase), math.sin(self.phase))


def momentum_shift_angles(n_cells: int, p: int) -> np.ndarray:
    """theta_(j, lam) = 2 pi j / N in j-major composite order.

    The shift couples to the unit-cell index only: all lam within a cell
    share one angle (intracell positions are disregarded).
    """
    return np.repeat(2 * np.pi * np.arange(n_cells) / n_cells, p)


def gaussian_trace_diagonal_unitary(correlation, thetas: np.ndarray) -> GaussianTrace:
    """Tr[rho exp(i sum_a theta_a n_a)] = det[1 + M(D - 1)] in log space.

    `correlation` is a ChainCorrelationMatrix or a raw L x L array of
    <c^dag_a c_b>; the determinant is transpose invariant, so the covariance
    index convention cannot change the result. A vanishing determinant is
    legitimate and simply reported with log magnitude -inf.
    """
    matrix = correlation.entries if isinstance(correlation, ChainCorrelationMatrix) else np.asarray(correlation)
    thetas = np.asarray(thetas, dtype=float)
    if thetas.shape != (matrix.shape[0],):
        raise ValueError(f"need {matrix.shape[0]} angles, got {thetas.shape}")
    a = np.eye(matrix.shape[0], dtype=complex) + matrix * (np.exp(1j * thetas) - 1.0)[None, :]
    sign, logabs = np.linalg.slogdet(a)
    if sign == 0:
        return GaussianTrace(phase=0.0, log_magnitude=-math.inf)
    return GaussianTrace(phase=float(np.angle(sign)), log_magnitude=float(logabs))


@dataclass(frozen=True)
class EgpResult:
    """Phase and amplitude of Tr[rho e^{(2 pi i / N) X}] for one chain."""

    phase: float
    log_magnitude: float
    n_cells: int
    direction: str
    transverse_k: float
    beta: Optional[float]
    mu: Optional[float]

    @property
    def magnitude(self) -> float:
        return math.exp(self.log_magnitude) if math.isfinite(self.log_magnitude) else 0.0


def _trace_from_line(line: np.ndarray) -> GaussianTrace:
    n_cells, p = line.shape[0], line.shape[-1]
    corr = correlation_from_hfict_line(line)
    return gaussian_trace_diagonal_unitary(corr, momentum_shift_angles(n_cells, p))


def _require_amplitude(trace: GaussianTrace, context: str) -> GaussianTrace:
    if not math.isfinite(trace.log_magnitude):
        raise AmplitudeZeroError(f"EGP undefined (zero amplitude) {context}: "
                                 "generalized gap condition violated")
    return trace


def _cells_for(spec: GaussianStateSpec, direction: str, n_cells: Optional[int]) -> int:
    """Chain length: as requested for thermal specs, grid-fixed for tabulated ones."""
    if spec.is_thermal:
        if n_cells is None:
            raise ValueError("thermal specs need an explicit n_cells")
        return n_cells
    fixed = spec.hfict_grid.grid.nx if direction == "x" else spec.hfict_grid.grid.ny
    if n_cells is not None and n_cells != fixed:
        raise ValueError(f"tabulated spec fixes n_cells = {fixed} for {direction} chains")
    return fixed


def egp_component(spec: GaussianStateSpec, direction: str, transverse_k: float,
                  n_cells: int) -> EgpResult:
    """EGP of one chain: phi = Im ln Tr[rho e^{(2 pi i / N) X}] at fixed transverse k."""
    n_cells = _cells_for(spec, direction, n_cells)
    if n_cells < 2:
        raise ValueError(f"need n_cells >= 2, got {n_cells}")
    line = hfict_line(spec, direction, transverse_k, n_cells)
    trace = _require_amplitude(_trace_from_line(line),
                               f"at transverse_k={transverse_k:.6f}")
    return EgpResult(phase=trace.phase, log_magnitude=trace.log_magnitude,
                     n_cells=n_cells, direction=direction, transverse_k=float(transverse_k),
                     beta=spec.beta, mu=spec.mu if spec.is_thermal else None)


def egp_component_1d(chain: ChainGaussianSpec, n_cells: int) -> EgpResult:
    """EGP of a standalone thermal 1D chain (adiabatic pump building block)."""
    line = hfict_line_1d(chain.beta, chain.mu, chain.model, n_cells)
    trace = _require_amplitude(_trace_from_line(line), f"for chain {chain.model.name!r}")
    return EgpResult(phase=trace.phase, log_magnitude=trace.log_magnitude,
                     n_cells=n_cells, direction="k", transverse_k=math.nan,
                     beta=chain.beta, mu=chain.mu)


def egp_profile(spec: GaussianStateSpec, direction: str, n_cells: Optional[int],
                transverse_count: int) -> PhaseProfile:
    """Sample the EGP over the transverse Brillouin zone.

    Returns a PhaseProfile whose `moduli` carry |z| per sample (the
    gauge-reduction diagnostic).
    """
    n_cells = _cells_for(spec, direction, n_cells)
    transverse = momentum_line(transverse_count)
    results = [egp_component(spec, direction, tk, n_cells) for tk in transverse]
    beta = spec.beta if spec.is_thermal else None
    temperature = None
    if beta is not None:
        temperature = 0.0 if math.isinf(beta) else 1.0 / beta
    return PhaseProfile(parameters=transverse,
                        phases=np.array([r.phase for r in results]),
                        moduli=np.array([r.magnitude for r in results]),
                        label="egp", direction=direction, temperature=temperature)


def egp_windings(spec: GaussianStateSpec, n_cells: Optional[int],
                 transverse_count: int) -> tuple[int, int]:
    """(C_x, C_y) from the EGP profile windings; equality is asserted.

    C_x = winding of phi_x over ky, C_y = -(winding of phi_y over kx). For a
    valid Gaussian state both integers must agree; disagreement signals
    under-resolution or a generalized-gap violation and raises.
    """
    cx = winding_of_phase_profile(egp_profile(spec, "x", n_cells, transverse_count))
    cy = -winding_of_phase_profile(egp_profile(spec, "y", n_cells, transverse_count))
    if cx != cy:
        raise WindingMismatchError(
            f"EGP Chern inconsistency: C_x = {cx} != C_y = {cy}")
    return cx, cy


def gauge_reduction_deviation(spec: GaussianStateSpec, direction: str, transverse_k: float,
                              n_list: Sequence[int]) -> list[tuple[int, float]]:
    """|phi_EGP(N) - phi_EGP(beta=inf, N)| for ascending chain lengths.

    The pure-state value at the same N is the polarization phase of the
    fictitious-Hamiltonian ground state, i.e. its Wilson-loop Zak phase up to
    the exact (-1)^(N-1) closure factor of the N-fermion momentum shift; using
    it as the reference makes the deviation measure gauge reduction alone.
    """
    if not spec.is_thermal:
        raise ValueError("gauge reduction needs a thermal spec (beta = inf reference)")
    if list(n_list) != sorted(n_list):
        raise ValueError("n_list must be ascending")
    pure = spec.pure_limit()
    out = []
    for n in n_list:
        phi = egp_component(spec, direction, transverse_k, n).phase
        phi_ref = egp_component(pure, direction, transverse_k, n).phase
        out.append((int(n), float(abs(principal_branch(phi - phi_ref)))))
    return out


def gauge_reduction_exponent(deviations: Sequence[tuple[int, float]]) -> float:
    """Log-log slope of deviation vs N (reported estimate of the decay power)."""
    ns = np.array([n for n, _ in deviations], dtype=float)
    ds = np.array([d for _, d in deviations], dtype=float)
    if (ds <= 0).any():
        return -math.inf
    slope = np.polyfit(np.log(ns), np.log(ds), 1)[0]
    return float(slope)


def pump_winding(spec_family: Callable[[float], ChainGaussianSpec], n_cells: int,
                 t_grid: np.ndarray) -> int:
    """Winding of the chain EGP along a closed adiabatic parameter loop.

    `spec_family(t)` must trace a closed loop of gapped 1D Gaussian states
    over the uniform t_grid; with t = ky on a 2D model this reduces to the
    x-direction EGP winding.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    phases = [egp_component_1d(spec_family(t), n_cells).phase for t in t_grid]
    profile = PhaseProfile(parameters=t_grid, phases=np.array(phases), label="egp-pump")
    return winding_of_phase_profile(profile)
