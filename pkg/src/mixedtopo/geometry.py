"""Gauge-invariant discrete differential geometry on the Brillouin zone.

Wilson-loop phases, plaquette field strengths and integer windings. The
Wilson loop of a band u returns Im ln prod <u_i|u_{i+1}>, which is the
*negative* of the connection integral oint i<u|du>; winding-to-Chern
conversions below compensate for that so all reported integers follow the
single convention in which the lower band of the built-in asymmetric
two-band model carries Chern number +1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import QuantizationError, UnderResolvedError
from .model import band_systems

OVERLAP_MIN_MODULUS = 1e-8
JUMP_MARGIN_DEFAULT = 0.1
CHERN_RESIDUE_ATOL = 1e-6


def principal_branch(x):
    """Map angles to (-pi, pi]."""
    x = np.asarray(x, dtype=float)
    out = -((-x + np.pi) % (2 * np.pi) - np.pi)
    return out


@dataclass
class PhaseProfile:
    """Geometric-phase samples over a uniformly spaced closed parameter loop."""

    parameters: np.ndarray
    phases: np.ndarray
    label: str = ""
    direction: str = ""
    temperature: Optional[float] = None
    moduli: Optional[np.ndarray] = None  # diagnostic side channel, e.g. EGP |z|

    def __post_init__(self):
        self.parameters = np.asarray(self.parameters, dtype=float)
        self.phases = principal_branch(self.phases)
        if self.parameters.shape != self.phases.shape or self.parameters.ndim != 1:
            raise ValueError("parameters and phases must be matching 1D arrays")
        if len(self.phases) < 2:
            raise ValueError("need at least 2 samples")

    def jumps(self) -> np.ndarray:
        """Principal-value increments around the closed loop (wraps last to first)."""
        diffs = np.diff(np.append(self.phases, self.phases[0]))
        return principal_branch(diffs)

    def max_jump(self) -> float:
        return float(np.abs(self.jumps()).max())

    def under_resolved(self, margin: float = JUMP_MARGIN_DEFAULT) -> bool:
        return self.max_jump() >= np.pi - margin


@dataclass
class CurvatureField:
    """Per-plaquette field-strength phases on an nx x ny plaquette grid."""

    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("curvature values must be a 2D array")

    def total(self) -> float:
        return float(self.values.sum())


def _as_frames(states: np.ndarray) -> np.ndarray:
    """Normalize state input to (..., p, nb) frames; single bands get nb = 1."""
    states = np.asarray(states, dtype=complex)
    if states.ndim < 2:
        raise ValueError("states must be at least (M, p)")
    return states[..., None] if states.ndim == 2 else states


def _frames_on_grid(states: np.ndarray, ndim_grid: int) -> np.ndarray:
    states = np.asarray(states, dtype=complex)
    if states.ndim == ndim_grid + 1:
        return states[..., None]
    if states.ndim == ndim_grid + 2:
        return states
    raise ValueError(f"expected grid states of rank {ndim_grid + 1} or {ndim_grid + 2}, "
                     f"got rank {states.ndim}")


def _link_determinants(frames_a: np.ndarray, frames_b: np.ndarray) -> np.ndarray:
    """det of the overlap matrix U_a^dag U_b per grid point; checks conditioning."""
    overlap = np.einsum("...pi,...pj->...ij", frames_a.conj(), frames_b)
    dets = np.linalg.det(overlap)
    worst = np.abs(dets).min()
    if worst < OVERLAP_MIN_MODULUS:
        raise UnderResolvedError(
            f"overlap determinant modulus {worst:.3e} < {OVERLAP_MIN_MODULUS:.0e}: "
            "loop ill-conditioned (grid too coarse or gap closing)")
    return dets


def zak_phase_wilson(states: np.ndarray) -> float:
    """Wilson-loop phase Im ln prod_i det<u_i|u_{i+1}> around a closed k-line.

    `states` is (M, p) for a single band or (M, p, nb) for a filled frame;
    the loop closes periodically (u_{M+1} = u_1), so the periodic-gauge
    closure factor is included. Gauge invariant; result in (-pi, pi].
    """
    frames = _as_frames(states)
    if frames.shape[0] < 2:
        raise ValueError("need at least 2 states around the loop")
    dets = _link_determinants(frames, np.roll(frames, -1, axis=0))
    return float(principal_branch(np.angle(dets).sum()))


def berry_curvature_plaquette(state_grid: np.ndarray) -> CurvatureField:
    """Field strength per plaquette from states on a full periodic grid.

    F(k) = Im ln [<u(k)|u(k+ex)><u(k+ex)|u(k+ex+ey)><u(k+ex+ey)|u(k+ey)><u(k+ey)|u(k)>]
    on the principal branch, with overlap determinants for multiband frames.
    """
    frames = _frames_on_grid(state_grid, 2)
    ux = _link_determinants(frames, np.roll(frames, -1, axis=0))
    uy = _link_determinants(frames, np.roll(frames, -1, axis=1))
    loop = (ux * np.roll(uy, -1, axis=0) *
            np.roll(ux, -1, axis=1).conj() * uy.conj())
    return CurvatureField(values=np.angle(loop))


def chern_number(curvature: CurvatureField, residue_atol: float = CHERN_RESIDUE_ATOL) -> int:
    """Round the plaquette sum / 2pi to an integer; large residue means trouble."""
    total = curvature.total() / (2 * np.pi)
    rounded = int(np.rint(total))
    residue = abs(total - rounded)
    if residue > residue_atol:
        raise QuantizationError(
            f"plaquette sum / 2pi = {total:.9f} misses an integer by {residue:.3e} "
            "(gap closing or under-resolved grid)")
    return rounded


def winding_of_phase_profile(profile: PhaseProfile,
                             margin: float = JUMP_MARGIN_DEFAULT) -> int:
    """Integer winding (1/2pi) sum of principal-value steps around the loop."""
    if profile.under_resolved(margin):
        raise UnderResolvedError(
            f"max phase step {profile.max_jump():.3f} rad >= pi - {margin}: "
            "profile under-resolved; refine the parameter grid")
    total = profile.jumps().sum() / (2 * np.pi)
    rounded = int(np.rint(total))
    if abs(total - rounded) > 1e-6:
        raise QuantizationError(f"winding sum {total:.9f} is not an integer")
    return rounded


def chern_from_zak_windings(zak_x_profile: PhaseProfile,
                            zak_y_profile: PhaseProfile) -> tuple[int, int]:
    """Chern numbers from the windings of the two Wilson-loop Zak profiles.

    The Wilson value is minus the connection integral, hence
    C_x = -winding(phi_x over ky) and C_y = +winding(phi_y over kx); the two
    must agree for any gapped pure state.
    """
    cx = -winding_of_phase_profile(zak_x_profile)
    cy = winding_of_phase_profile(zak_y_profile)
    return cx, cy


def states_on_line(matrix_fn, ks: np.ndarray, bands) -> np.ndarray:
    """Gauge-fixed eigenvector frames along a k-line.

    matrix_fn(k) -> p x p Hermitian; `bands` is an int (single band, returns
    (M, p)) or a sequence of band indices (returns (M, p, nb)).
    """
    ks = np.asarray(ks, dtype=float)
    hs = np.stack([np.asarray(matrix_fn(k), dtype=complex) for k in ks])
    _, vectors = band_systems(hs)
    if np.isscalar(bands) or isinstance(bands, (int, np.integer)):
        return vectors[:, :, int(bands)]
    return vectors[:, :, list(bands)]


def states_on_grid(matrix_fn, kxs: np.ndarray, kys: np.ndarray, bands) -> np.ndarray:
    """Gauge-fixed eigenvector frames on the full (kx, ky) grid."""
    hs = np.stack([
        np.stack([np.asarray(matrix_fn(kx, ky), dtype=complex) for ky in kys])
        for kx in kxs])
    _, vectors = band_systems(hs)
    if np.isscalar(bands) or isinstance(bands, (int, np.integer)):
        return vectors[:, :, :, int(bands)]
    return vectors[:, :, :, list(bands)]
