"""Looped trajectories: slit-to-slit surface-plasmon hops before exiting to the far field.

A hop path launches at an open slit ``j0`` with the slit's illumination
amplitude, hops ``j0 -> j1 -> ... -> jM`` between distinct open slits, and
leaves slit ``jM`` with the same far-field factor as a direct path. Summing
over paths of exactly ``M`` hops is ``u^T C^M v`` with ``C`` the hop-coupling
matrix restricted to the open slits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .model import (
    CouplingModel,
    DetectorGrid,
    Illumination,
    Mask,
    ModelError,
    Pattern,
    SlitArray,
    amplitudes_for,
    as_mask,
)
from .propagation import direct_amplitude, exit_amplitudes


def plasmon_phase(slits: SlitArray, coupling: CouplingModel, wavelength_m: float) -> float:
    """Phase picked up by a plasmon over one pitch, ``n_eff * k0 * p``."""
    return coupling.n_eff * 2 * np.pi / wavelength_m * slits.pitch_m


def hop_coupling(slits: SlitArray, coupling: CouplingModel, j: int, k: int, wavelength_m: float) -> complex:
    """Hop amplitude between slits ``j`` and ``k``: ``c_m exp(i m phi_SP)``, ``m = |j - k|``."""
    n = slits.slit_count
    if not (0 <= j < n and 0 <= k < n):
        raise ModelError(f"slit indices must lie in 0..{n - 1} (got j={j}, k={k})")
    if j == k:
        raise ModelError("a hop needs two distinct slits (j == k)")
    m = abs(j - k)
    c = coupling.amplitude(m)
    if c == 0:
        return 0j
    return c * np.exp(1j * m * plasmon_phase(slits, coupling, wavelength_m))


def coupling_matrix(
    slits: SlitArray, coupling: CouplingModel, wavelength_m: float, mask: Mask | None = None
) -> np.ndarray:
    """N x N hop matrix with zero diagonal; rows and columns of closed slits are zero."""
    n = slits.slit_count
    idx = np.arange(n)
    sep = np.abs(idx[:, None] - idx[None, :])
    mags = np.array([coupling.amplitude(m) for m in range(n)])
    C = mags[sep] * np.exp(1j * sep * plasmon_phase(slits, coupling, wavelength_m))
    np.fill_diagonal(C, 0)
    if mask is not None:
        keep = as_mask(mask).indicator(n)
        C = C * keep[:, None] * keep[None, :]
    return C


def hop_order_amplitude(
    slits: SlitArray,
    mask: Mask,
    illum: Illumination,
    coupling: CouplingModel,
    theta,
    hops: int,
):
    """Contribution of paths with exactly ``hops`` hops (``hops >= 1``)."""
    if hops < 1:
        raise ModelError("hops >= 1")
    mask = as_mask(mask)
    mask.check_against(slits)
    C = coupling_matrix(slits, coupling, illum.wavelength_m, mask)
    row = amplitudes_for(illum, mask, slits.slit_count) @ np.linalg.matrix_power(C, hops)
    out = np.tensordot(row, exit_amplitudes(slits, illum.wavelength_m, theta), axes=(0, 0))
    return complex(out) if np.ndim(out) == 0 else out


def looped_amplitude(
    slits: SlitArray,
    mask: Mask,
    illum: Illumination,
    coupling: CouplingModel,
    theta,
):
    """Sum over hop paths with 1..max_hops hops, all confined to the open slits."""
    mask = as_mask(mask)
    mask.check_against(slits)
    n = slits.slit_count
    theta_arr = np.asarray(theta, dtype=float)
    if coupling.max_hops == 0 or len(mask) < 2:
        return 0j if theta_arr.ndim == 0 else np.zeros(theta_arr.shape, dtype=complex)

    C = coupling_matrix(slits, coupling, illum.wavelength_m, mask)
    vec = amplitudes_for(illum, mask, n)
    acc = np.zeros(n, dtype=complex)
    for _ in range(coupling.max_hops):
        vec = vec @ C
        acc += vec
    out = np.tensordot(acc, exit_amplitudes(slits, illum.wavelength_m, theta_arr), axes=(0, 0))
    return complex(out) if np.ndim(out) == 0 else out


def total_pattern(
    slits: SlitArray,
    mask: Mask,
    illum: Illumination,
    coupling: CouplingModel,
    grid: DetectorGrid,
) -> Pattern:
    """Direct plus looped amplitude at each grid angle."""
    mask = as_mask(mask)
    theta = grid.theta_rad
    psi = direct_amplitude(slits, mask, illum, theta) + looped_amplitude(slits, mask, illum, coupling, theta)
    return Pattern(mask, grid, psi)


@dataclass(frozen=True)
class HopPath:
    """One hop sequence. ``weight`` is the launch amplitude times the hop couplings;
    the angle-dependent exit factor is applied by :meth:`amplitude`."""

    sequence: tuple[int, ...]
    weight: complex

    @property
    def hops(self) -> int:
        return len(self.sequence) - 1

    def amplitude(self, slits: SlitArray, wavelength_m: float, theta):
        return self.weight * exit_amplitudes(slits, wavelength_m, theta)[self.sequence[-1]]


def enumerate_hop_paths(
    slits: SlitArray,
    mask: Mask,
    illum: Illumination,
    coupling: CouplingModel,
    max_hops: int | None = None,
) -> Iterator[HopPath]:
    """Yield every hop sequence over open slits with 1..max_hops hops, depth first."""
    mask = as_mask(mask)
    mask.check_against(slits)
    limit = coupling.max_hops if max_hops is None else max_hops
    open_slits = sorted(mask.open)
    E = illum.amplitudes
    lam = illum.wavelength_m

    def extend(seq: tuple[int, ...], weight: complex) -> Iterator[HopPath]:
        if len(seq) - 1 >= limit:
            return
        for nxt in open_slits:
            if nxt == seq[-1]:
                continue
            path = seq + (nxt,)
            w = weight * hop_coupling(slits, coupling, seq[-1], nxt, lam)
            yield HopPath(path, w)
            yield from extend(path, w)

    for j0 in open_slits:
        yield from extend((j0,), complex(E[j0]))
