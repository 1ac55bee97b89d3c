"""Sorkin parameter, fringe visibility and wavelength/width sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .loops import total_pattern
from .model import (
    CouplingModel,
    CouplingTable,
    DetectorGrid,
    Illumination,
    Mask,
    ModelError,
    Pattern,
    SlitArray,
    SorkinResult,
    nonempty_masks,
    validate_config,
)

SORKIN_LABELS = ("A", "B", "C", "AB", "BC", "AC", "ABC")
SORKIN_SIGNS = {"A": 1, "B": 1, "C": 1, "AB": -1, "BC": -1, "AC": -1, "ABC": 1}
CENTER_FRACTION = 0.7


def seven_masks(slit_count: int = 3) -> list[Mask]:
    """Masks A, B, C, AB, BC, AC, ABC, in that order.

    For other slit counts every non-empty subset is returned (2**N - 1 masks);
    the Sorkin combination itself is only defined for three slits.
    """
    if slit_count == 3:
        return [Mask.from_label(s) for s in SORKIN_LABELS]
    return nonempty_masks(slit_count)


def _argmax_nearest_center(theta: np.ndarray, values: np.ndarray) -> int:
    peak = values.max()
    ties = np.flatnonzero(values == peak)
    return int(ties[np.argmin(np.abs(theta[ties]))])


def sorkin_epsilon(patterns: Sequence[Pattern] | Mapping[str, Pattern]) -> SorkinResult:
    """Combine the seven mask patterns into epsilon and kappa = epsilon / i_max."""
    pats = list(patterns.values()) if isinstance(patterns, Mapping) else list(patterns)
    by_label = {p.mask.label: p for p in pats}
    if len(pats) != 7 or set(by_label) != set(SORKIN_LABELS):
        raise ModelError(
            f"sorkin_epsilon needs exactly the seven masks {SORKIN_LABELS}, got {[p.mask.label for p in pats]}"
        )
    grid = by_label["ABC"].grid
    if any(p.grid != grid for p in pats):
        raise ModelError("all seven patterns must share one detector grid")

    eps = sum(SORKIN_SIGNS[lab] * by_label[lab].probabilities for lab in SORKIN_LABELS)
    p_abc = by_label["ABC"].probabilities
    i_peak = _argmax_nearest_center(grid.theta_rad, p_abc)
    i_max = float(p_abc[i_peak])
    if not i_max > 0:
        raise ModelError("i_max > 0 (the three-slit pattern is identically zero)")
    per_mask = {lab: by_label[lab] for lab in SORKIN_LABELS}
    return SorkinResult(eps, i_max, eps / i_max, per_mask, float(grid.theta_rad[i_peak]))


def sorkin_analysis(
    slits: SlitArray, illum: Illumination, coupling: CouplingModel, grid: DetectorGrid
) -> SorkinResult:
    validate_config(slits, illum, coupling, grid)
    if slits.slit_count != 3:
        raise ModelError("the Sorkin parameter is defined for three slits")
    return sorkin_epsilon([total_pattern(slits, m, illum, coupling, grid) for m in seven_masks(3)])


def _extrema(values: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Indices of interior turning points; steps below ``rtol * max`` count as flat."""
    d = np.diff(values)
    scale = np.max(np.abs(values)) if values.size else 0.0
    s = np.where(np.abs(d) <= rtol * scale, 0, np.sign(d)).astype(int)
    nz = np.flatnonzero(s)
    if nz.size < 2:
        return np.empty(0, dtype=int)
    turns = np.flatnonzero(s[nz[1:]] != s[nz[:-1]])
    return nz[turns + 1]


def fringe_visibility(theta: np.ndarray, probabilities: np.ndarray, window: tuple[float, float]) -> float:
    """Mean of ``(P_a - P_b) / (P_a + P_b)`` over adjacent extremum pairs in ``window``.

    Pairing neighbours instead of taking the global max and min keeps a slow
    envelope from registering as contrast. A window with fewer than two
    turning points has no fringes and returns 0.
    """
    lo, hi = window
    sel = (theta >= lo) & (theta <= hi)
    if np.count_nonzero(sel) < 3:
        raise ModelError(f"visibility window {window} must contain at least 3 grid points")
    P = np.asarray(probabilities, dtype=float)[sel]
    ext = _extrema(P)
    if ext.size < 2:
        return 0.0
    a, b = P[ext[:-1]], P[ext[1:]]
    denom = a + b
    ok = denom > 0
    if not ok.any():
        return 0.0
    return float(np.mean(np.abs(a[ok] - b[ok]) / denom[ok]))


def visibility(pattern: Pattern, window: tuple[float, float]) -> float:
    return fringe_visibility(pattern.theta_rad, pattern.probabilities, window)


def central_window(theta: np.ndarray, intensity: np.ndarray, fraction: float = CENTER_FRACTION):
    """Contiguous region around the central maximum where intensity >= fraction * peak.

    Returns ``(i_lo, i_hi, theta_lo, theta_hi)``: the inclusive index range
    of grid points inside, and the threshold crossings found by linear
    interpolation (clamped to the grid ends).
    """
    i0 = _argmax_nearest_center(theta, intensity)
    thr = fraction * intensity[i0]
    i_lo = i0
    while i_lo > 0 and intensity[i_lo - 1] >= thr:
        i_lo -= 1
    i_hi = i0
    while i_hi < theta.size - 1 and intensity[i_hi + 1] >= thr:
        i_hi += 1

    def crossing(inside, outside):
        t = (thr - intensity[inside]) / (intensity[outside] - intensity[inside])
        return theta[inside] + t * (theta[outside] - theta[inside])

    t_lo = crossing(i_lo, i_lo - 1) if i_lo > 0 else theta[0]
    t_hi = crossing(i_hi, i_hi + 1) if i_hi < theta.size - 1 else theta[-1]
    return i_lo, i_hi, t_lo, t_hi


def kappa_at_center(result: SorkinResult, fraction: float = CENTER_FRACTION) -> float:
    """Mean of kappa over the central fringe where P_ABC >= ``fraction`` of its peak.

    The mean is a trapezoid integral over angle with the fringe edges placed
    at the interpolated threshold crossings, so it converges with grid density
    instead of depending on which samples happen to fall inside.
    """
    theta = result.grid.theta_rad
    p = result.per_mask["ABC"].probabilities
    kappa = result.kappa
    i_lo, i_hi, t_lo, t_hi = central_window(theta, p, fraction)
    if t_hi <= t_lo:
        return float(kappa[i_lo])
    xs = [t_lo, *theta[i_lo : i_hi + 1], t_hi]
    ys = [
        np.interp(t_lo, theta, kappa),
        *kappa[i_lo : i_hi + 1],
        np.interp(t_hi, theta, kappa),
    ]
    return float(np.trapezoid(ys, xs) / (t_hi - t_lo))


SWEEP_KINDS = ("intensity_map", "kappa_map", "kappa_at_center")


@dataclass(frozen=True, eq=False)
class SweepResult:
    """``values[i, j]`` belongs to ``axis1[i]`` and ``axis2[j]``."""

    kind: str
    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray
    axis1_name: str = "wavelength_m"
    axis2_name: str = "theta_rad"

    def __post_init__(self):
        if self.values.shape != (len(self.axis1), len(self.axis2)):
            raise ModelError("sweep values must have shape (len(axis1), len(axis2))")
        if self.kind == "intensity_map" and np.any(self.values < 0):
            raise ModelError("intensity maps are non-negative")


@dataclass(frozen=True)
class SweepSpec:
    kind: str
    wavelengths_m: tuple[float, ...]
    slits: SlitArray
    coupling: CouplingModel | CouplingTable
    grid: DetectorGrid
    slit_amplitudes: tuple[complex, ...] | None = None
    widths_m: tuple[float, ...] = field(default_factory=tuple)
    loops: bool = True

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ModelError(f"sweep kind must be one of {SWEEP_KINDS}, got {self.kind!r}")
        if not self.wavelengths_m:
            raise ModelError("sweep wavelength axis must be non-empty")
        if self.kind != "kappa_at_center" and len(self.widths_m) > 1:
            raise ModelError("a width axis is only swept for kappa_at_center")

    def coupling_at(self, wavelength_m: float) -> CouplingModel:
        c = self.coupling.at(wavelength_m) if isinstance(self.coupling, CouplingTable) else self.coupling
        return c if self.loops else c.with_max_hops(0)


def _illumination(spec: SweepSpec, wavelength_m: float, slit_count: int) -> Illumination:
    amps = spec.slit_amplitudes if spec.slit_amplitudes is not None else (1.0,) * slit_count
    return Illumination(wavelength_m, amps)


def sweep(spec: SweepSpec) -> SweepResult:
    """Recompute the three-slit patterns at every axis point; rows follow the wavelength axis."""
    lams = np.asarray(spec.wavelengths_m, dtype=float)
    widths = spec.widths_m or (spec.slits.slit_width_m,)
    theta = spec.grid.theta_rad

    if spec.kind == "kappa_at_center":
        values = np.empty((lams.size, len(widths)))
        for i, lam in enumerate(lams):
            coupling = spec.coupling_at(lam)
            for j, w in enumerate(widths):
                slits = SlitArray(w, spec.slits.pitch_m, spec.slits.slit_count)
                res = sorkin_analysis(slits, _illumination(spec, lam, slits.slit_count), coupling, spec.grid)
                values[i, j] = kappa_at_center(res)
        return SweepResult(spec.kind, lams, np.asarray(widths, dtype=float), values, "wavelength_m", "slit_width_m")

    values = np.empty((lams.size, theta.size))
    for i, lam in enumerate(lams):
        coupling = spec.coupling_at(lam)
        illum = _illumination(spec, lam, spec.slits.slit_count)
        if spec.kind == "intensity_map":
            validate_config(spec.slits, illum, coupling, spec.grid)
            values[i] = total_pattern(spec.slits, spec.slits.full_mask(), illum, coupling, spec.grid).probabilities
        else:
            values[i] = sorkin_analysis(spec.slits, illum, coupling, spec.grid).kappa
    return SweepResult(spec.kind, lams, theta.copy(), values)


def position_average(pattern: Pattern) -> float:
    """Mean probability over the detector grid, trapezoid-weighted in angle."""
    theta = pattern.theta_rad
    if theta.size == 1:
        return float(pattern.probabilities[0])
    return float(np.trapezoid(pattern.probabilities, theta) / (theta[-1] - theta[0]))


def polarization_ratios(
    slits: SlitArray,
    illum: Illumination,
    coupling: CouplingModel,
    grid: DetectorGrid,
    masks: Iterable[Mask] | None = None,
) -> dict[str, float]:
    """Position-averaged probability with loops on over loops off, per mask.

    Stand-in for the x/y polarization ratio: loops on plays the part of
    plasmon-exciting polarization, loops off the part of the other one.
    """
    off = coupling.with_max_hops(0)
    out = {}
    for m in masks if masks is not None else seven_masks(slits.slit_count):
        on_avg = position_average(total_pattern(slits, m, illum, coupling, grid))
        off_avg = position_average(total_pattern(slits, m, illum, off, grid))
        out[m.label] = on_avg / off_avg
    return out
