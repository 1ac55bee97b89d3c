"""Direct-path propagation: paraxial far-field factors and Rayleigh-Sommerfeld quadrature.

Geometry is the (x, z) plane with the slits at z = 0. Kernel evaluations
accept 2D points ``(x, z)`` or 3D points ``(x, y, z)``; a 2D point is taken
to lie at y = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    DetectorGrid,
    Illumination,
    Mask,
    ModelError,
    Pattern,
    SlitArray,
    amplitudes_for,
    as_mask,
)

MIN_SAMPLES_PER_SLIT = 8
FAR_FIELD_FACTOR = 1e3


def sinc_n(u):
    """Normalized sinc, sin(pi u) / (pi u) with sinc_n(0) = 1."""
    return np.sinc(u)


def exit_amplitudes(slits: SlitArray, wavelength_m: float, theta) -> np.ndarray:
    """Far-field factor of each slit, shape ``(N,) + shape(theta)``.

    ``sinc_n(kx w / 2pi) * exp(i kx x_j)`` with ``kx = k0 sin(theta)``.
    """
    theta = np.asarray(theta, dtype=float)
    kx = 2 * np.pi / wavelength_m * np.sin(theta)
    envelope = sinc_n(kx * slits.slit_width_m / (2 * np.pi))
    centers = slits.slit_centers_m.reshape((-1,) + (1,) * theta.ndim)
    return envelope * np.exp(1j * kx * centers)


def direct_amplitude(slits: SlitArray, mask: Mask, illum: Illumination, theta):
    """Sum of straight-path amplitudes over the open slits.

    Returns a complex scalar for scalar ``theta`` and an array otherwise.
    """
    mask = as_mask(mask)
    mask.check_against(slits)
    u = amplitudes_for(illum, mask, slits.slit_count)
    out = np.tensordot(u, exit_amplitudes(slits, illum.wavelength_m, theta), axes=(0, 0))
    return complex(out) if np.ndim(out) == 0 else out


def direct_pattern(slits: SlitArray, mask: Mask, illum: Illumination, grid: DetectorGrid) -> Pattern:
    mask = as_mask(mask)
    return Pattern(mask, grid, direct_amplitude(slits, mask, illum, grid.theta_rad))


def _as_xyz(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape[-1] == 2:
        return np.stack([r[..., 0], np.zeros(r.shape[:-1]), r[..., 1]], axis=-1)
    if r.shape[-1] == 3:
        return r
    raise ModelError(f"points must have 2 (x, z) or 3 (x, y, z) coordinates, got shape {r.shape}")


def rs_kernel(r1, r2, k: float):
    """Rayleigh-Sommerfeld propagator ``(k / 2 pi i) exp(ik r) / r * chi``.

    ``chi = dz / r`` is the cosine of the angle between ``r2 - r1`` and the
    aperture normal. Broadcasts over leading axes of ``r1`` and ``r2``.

    Raises
    ------
    ModelError
        If any pair of points coincides; the kernel is singular there.
    """
    d = _as_xyz(r2) - _as_xyz(r1)
    r = np.sqrt(np.sum(d * d, axis=-1))
    if np.any(r == 0):
        raise ModelError("rs_kernel is undefined at zero separation")
    out = k / (2j * np.pi) * np.exp(1j * k * r) / r * (d[..., 2] / r)
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class ApertureDiscretization:
    """Midpoint-rule nodes across every slit of a structure.

    ``slit_index[q]`` tells which slit node ``q`` belongs to, so one
    discretization serves every mask of the same structure.
    """

    sample_points: np.ndarray
    weights: np.ndarray
    slit_index: np.ndarray
    samples_per_slit: int

    def __post_init__(self):
        if self.samples_per_slit < MIN_SAMPLES_PER_SLIT:
            raise ModelError(
                f"samples_per_slit >= {MIN_SAMPLES_PER_SLIT} (got {self.samples_per_slit}); "
                "discretization is under-resolved"
            )

    @classmethod
    def for_slits(cls, slits: SlitArray, samples_per_slit: int = 32) -> "ApertureDiscretization":
        if samples_per_slit < MIN_SAMPLES_PER_SLIT:
            raise ModelError(
                f"samples_per_slit >= {MIN_SAMPLES_PER_SLIT} (got {samples_per_slit}); "
                "discretization is under-resolved"
            )
        w = slits.slit_width_m
        local = (np.arange(samples_per_slit) + 0.5) / samples_per_slit * w - w / 2
        centers = slits.slit_centers_m
        points = (centers[:, None] + local[None, :]).ravel()
        weights = np.full(points.size, w / samples_per_slit)
        index = np.repeat(np.arange(slits.slit_count), samples_per_slit)
        return cls(points, weights, index, samples_per_slit)

    def weight_per_slit(self) -> np.ndarray:
        return np.bincount(self.slit_index, weights=self.weights)


def rs_far_field(
    slits: SlitArray,
    mask: Mask,
    illum: Illumination,
    disc: ApertureDiscretization,
    grid: DetectorGrid,
    screen_distance_m: float = 1.0,
) -> Pattern:
    """Far-field pattern from direct quadrature of the Rayleigh-Sommerfeld kernel.

    Detector points lie on an arc of radius ``screen_distance_m`` at the grid
    angles. The result is rescaled, and its global phase aligned, so that its
    peak matches the peak of the paraxial direct pattern on the same grid.
    """
    mask = as_mask(mask)
    mask.check_against(slits)
    if disc.samples_per_slit < MIN_SAMPLES_PER_SLIT:
        raise ModelError(f"samples_per_slit >= {MIN_SAMPLES_PER_SLIT}")
    if screen_distance_m < FAR_FIELD_FACTOR * slits.pitch_m:
        raise ModelError(
            f"screen_distance_m >= {FAR_FIELD_FACTOR:g} * pitch_m for the far field "
            f"(got {screen_distance_m!r} m, pitch {slits.pitch_m!r} m)"
        )
    theta = grid.theta_rad
    k = illum.k0
    open_nodes = np.isin(disc.slit_index, sorted(mask.open))
    if not open_nodes.any():
        return Pattern(mask, grid, np.zeros(theta.size, dtype=complex))

    src_x = disc.sample_points[open_nodes]
    src_w = disc.weights[open_nodes] * illum.amplitudes[disc.slit_index[open_nodes]]
    det = np.stack([screen_distance_m * np.sin(theta), screen_distance_m * np.cos(theta)], axis=-1)
    src = np.stack([src_x, np.zeros_like(src_x)], axis=-1)

    field = np.empty(theta.size, dtype=complex)
    chunk = max(1, 2_000_000 // src_x.size)
    for start in range(0, theta.size, chunk):
        block = det[start : start + chunk]
        kern = rs_kernel(src[None, :, :], block[:, None, :], k)
        field[start : start + chunk] = kern @ src_w

    reference = direct_amplitude(slits, mask, illum, theta)
    ref_peak = np.max(np.abs(reference))
    i_peak = int(np.argmax(np.abs(field)))
    if ref_peak == 0 or field[i_peak] == 0:
        return Pattern(mask, grid, np.zeros(theta.size, dtype=complex))
    scale = ref_peak / np.abs(field[i_peak])
    phase = np.angle(reference[i_peak]) - np.angle(field[i_peak])
    return Pattern(mask, grid, field * scale * np.exp(1j * phase))


def _taper(n: int, fraction: float) -> np.ndarray:
    """Flat-top window on [-1, 1]: 1 for |a| < fraction, cos^2 roll-off to 0 at |a| = 1."""
    a = np.abs(np.linspace(-1.0, 1.0, n)) if n > 1 else np.ones(1)
    if fraction >= 1:
        return np.where(a <= 1, 1.0, 0.0)
    roll = np.cos(0.5 * np.pi * (a - fraction) / (1 - fraction)) ** 2
    return np.where(a < fraction, 1.0, np.where(a < 1, roll, 0.0))


def huygens_compose_check(
    k: float,
    r1: Sequence[float],
    r3: Sequence[float],
    plane_z: float,
    halfwidth: float,
    samples: int,
    taper: float = 0.5,
) -> float:
    """Relative residual of the propagator composition over an intermediate plane.

    Evaluates ``|K(r1, r3) - integral K(r1, r2) K(r2, r3) dr2| / |K(r1, r3)|``
    with ``r2`` on the plane ``z = plane_z``. The plane is sampled on a square
    of half-width ``halfwidth`` centred where the straight line r1-r3 crosses
    it, using ``samples`` trapezoid nodes per axis. A flat-top window that
    rolls off over the outer ``1 - taper`` fraction suppresses the truncation
    edge; pass ``taper=1`` for a hard cut.

    A grid too coarse to resolve the integrand is not an error; it simply
    returns a large residual.
    """
    p1 = _as_xyz(r1)
    p3 = _as_xyz(r3)
    z1, z3 = p1[2], p3[2]
    if not (min(z1, z3) < plane_z < max(z1, z3)):
        raise ModelError(
            f"plane_z must lie strictly between the end points (z1={z1!r}, plane_z={plane_z!r}, z3={z3!r})"
        )
    if halfwidth <= 0 or samples < 1:
        raise ModelError("halfwidth > 0 and samples >= 1")

    frac = (plane_z - z1) / (z3 - z1)
    cx, cy = p1[:2] + frac * (p3[:2] - p1[:2])
    nodes = np.linspace(-halfwidth, halfwidth, samples)
    if samples > 1:
        w = np.full(samples, nodes[1] - nodes[0])
        w[[0, -1]] *= 0.5
    else:
        w = np.full(1, 2 * halfwidth)
    w = w * _taper(samples, taper)

    xs = cx + nodes
    total = 0j
    rows = max(1, 2_000_000 // samples)
    for start in range(0, samples, rows):
        ys = cy + nodes[start : start + rows]
        plane = np.empty((ys.size, samples, 3))
        plane[..., 0] = xs[None, :]
        plane[..., 1] = ys[:, None]
        plane[..., 2] = plane_z
        integrand = rs_kernel(p1, plane, k) * rs_kernel(plane, p3, k)
        total += np.sum((integrand @ w) * w[start : start + rows])

    direct = rs_kernel(p1, p3, k)
    return float(abs(direct - total) / abs(direct))


@dataclass(frozen=True)
class HuygensConvergence:
    residual: float
    halfwidth: float
    samples: int
    history: tuple[tuple[float, int, float], ...]


def converge_huygens(
    k: float,
    r1: Sequence[float],
    r3: Sequence[float],
    plane_z: float,
    rtol: float = 1e-4,
    nodes_per_wavelength: float = 4.0,
    max_steps: int = 4,
) -> HuygensConvergence:
    """Run :func:`huygens_compose_check` with doubling until the residual settles.

    Each step doubles the half-width at fixed node spacing, stopping once the
    residual changes by less than ``rtol``. A final run at half the spacing
    is reported, so ``history[-1]`` minus ``history[-2]`` shows whether the
    node density was adequate.
    """
    wavelength = 2 * np.pi / k
    p1, p3 = _as_xyz(r1), _as_xyz(r3)
    depth = min(abs(plane_z - p1[2]), abs(p3[2] - plane_z))
    halfwidth = 0.5 * depth
    density = nodes_per_wavelength / wavelength

    def run(h, dens):
        n = int(np.ceil(2 * h * dens)) + 1
        return huygens_compose_check(k, r1, r3, plane_z, h, n), n

    history = []
    res, n = run(halfwidth, density)
    history.append((halfwidth, n, res))
    for _ in range(max_steps):
        halfwidth *= 2
        new, n = run(halfwidth, density)
        history.append((halfwidth, n, new))
        settled = abs(new - res) < rtol
        res = new
        if settled:
            break
    finer, n_fine = run(halfwidth, 2 * density)
    history.append((halfwidth, n_fine, finer))
    return HuygensConvergence(finer, halfwidth, n_fine, tuple(history))
