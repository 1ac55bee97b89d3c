"""Domain types for the N-slit coupled-mode interference model.

All lengths are SI meters. Slit ``j`` sits at ``x_j = ((N - 1) / 2 - j) * p``,
so for three slits the centres are ``+p, 0, -p`` and carry the labels A, B, C.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class ModelError(ValueError):
    """A model invariant is violated. The message names the invariant."""


def _require(cond: bool, invariant: str, detail: str = "") -> None:
    if not cond:
        raise ModelError(f"{invariant}" + (f" ({detail})" if detail else ""))


def slit_label(index: int) -> str:
    return string.ascii_uppercase[index]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SlitArray:
    slit_width_m: float
    pitch_m: float
    slit_count: int = 3

    def __post_init__(self):
        _require(self.slit_width_m > 0, "slit_width_m > 0", f"got {self.slit_width_m!r}")
        _require(
            self.pitch_m > self.slit_width_m,
            "pitch must exceed slit width",
            f"pitch_m={self.pitch_m!r}, slit_width_m={self.slit_width_m!r}",
        )
        _require(
            isinstance(self.slit_count, (int, np.integer)) and self.slit_count >= 1,
            "slit_count >= 1",
            f"got {self.slit_count!r}",
        )
        _require(self.slit_count <= 26, "slit_count <= 26", "slits are labelled A..Z")

    @property
    def slit_centers_m(self) -> np.ndarray:
        offsets = (self.slit_count - 1) / 2 - np.arange(self.slit_count)
        return _frozen(offsets * self.pitch_m)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(slit_label(j) for j in range(self.slit_count))

    def full_mask(self) -> "Mask":
        return Mask(frozenset(range(self.slit_count)))


@dataclass(frozen=True)
class Mask:
    """Set of open slit indices. An empty mask is allowed and yields zero field."""

    open: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "open", frozenset(int(j) for j in self.open))
        _require(all(j >= 0 for j in self.open), "mask indices must be >= 0")

    @classmethod
    def of(cls, *indices: int) -> "Mask":
        return cls(frozenset(indices))

    @classmethod
    def from_label(cls, label: str) -> "Mask":
        """``"AC"`` -> indices {0, 2}. The empty string is the empty mask."""
        idx = []
        for ch in label.strip().upper():
            _require(ch in string.ascii_uppercase, "mask label uses letters A..Z", repr(label))
            idx.append(string.ascii_uppercase.index(ch))
        return cls(frozenset(idx))

    @property
    def label(self) -> str:
        return "".join(slit_label(j) for j in sorted(self.open))

    def indicator(self, slit_count: int) -> np.ndarray:
        out = np.zeros(slit_count)
        out[list(self.open)] = 1.0
        return out

    def check_against(self, slits: SlitArray) -> None:
        bad = sorted(j for j in self.open if j >= slits.slit_count)
        _require(not bad, "mask indices must be valid slit indices", f"{bad} for N={slits.slit_count}")

    def __len__(self) -> int:
        return len(self.open)

    def __contains__(self, j: object) -> bool:
        return j in self.open


def nonempty_masks(slit_count: int) -> list[Mask]:
    """All 2**N - 1 non-empty masks, by size then lexicographically."""
    out = []
    for size in range(1, slit_count + 1):
        out.extend(Mask(frozenset(c)) for c in combinations(range(slit_count), size))
    return out


@dataclass(frozen=True)
class Illumination:
    wavelength_m: float
    slit_amplitudes: tuple[complex, ...] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "slit_amplitudes", tuple(complex(a) for a in self.slit_amplitudes))
        _require(self.wavelength_m > 0, "wavelength_m > 0", f"got {self.wavelength_m!r}")
        _require(
            all(np.isfinite(a.real) and np.isfinite(a.imag) for a in self.slit_amplitudes),
            "slit_amplitudes must be finite",
        )

    @classmethod
    def plane_wave(cls, wavelength_m: float, slit_count: int = 3) -> "Illumination":
        return cls(wavelength_m, (1.0,) * slit_count)

    @property
    def k0(self) -> float:
        return 2 * np.pi / self.wavelength_m

    @property
    def amplitudes(self) -> np.ndarray:
        return _frozen(np.asarray(self.slit_amplitudes, dtype=complex))

    def with_wavelength(self, wavelength_m: float) -> "Illumination":
        return Illumination(wavelength_m, self.slit_amplitudes)


@dataclass(frozen=True)
class CouplingModel:
    """Surface-plasmon hop model.

    ``hop_amplitudes[m - 1]`` is the magnitude ``c_m`` of a hop between slits
    ``m`` pitches apart; the hop phase is ``m * n_eff * k0 * p``.
    ``max_hops = 0`` disables looped paths entirely.
    """

    n_eff: float = 1.65
    hop_amplitudes: tuple[float, ...] = (0.3, 0.15)
    max_hops: int = 1

    def __post_init__(self):
        object.__setattr__(self, "hop_amplitudes", tuple(float(c) for c in self.hop_amplitudes))
        _require(self.n_eff > 0, "n_eff > 0", f"got {self.n_eff!r}")
        _require(all(c >= 0 for c in self.hop_amplitudes), "hop amplitudes c_m >= 0")
        _require(
            isinstance(self.max_hops, (int, np.integer)) and self.max_hops >= 0,
            "max_hops >= 0",
            f"got {self.max_hops!r}",
        )

    @classmethod
    def off(cls) -> "CouplingModel":
        return cls(1.0, (), 0)

    @property
    def enabled(self) -> bool:
        return self.max_hops > 0

    def amplitude(self, separation: int) -> float:
        """``c_m`` for separation multiple ``m >= 1``; 0 beyond the listed range."""
        if separation < 1 or separation > len(self.hop_amplitudes):
            return 0.0
        return self.hop_amplitudes[separation - 1]

    def scaled(self, s: float) -> "CouplingModel":
        return CouplingModel(self.n_eff, tuple(s * c for c in self.hop_amplitudes), self.max_hops)

    def with_max_hops(self, max_hops: int) -> "CouplingModel":
        return CouplingModel(self.n_eff, self.hop_amplitudes, max_hops)


@dataclass(frozen=True)
class DetectorGrid:
    theta_rad: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta_rad, dtype=float).ravel()
        _require(theta.size >= 1, "detector grid must contain at least one angle")
        _require(bool(np.all(np.isfinite(theta))), "angles must be finite")
        _require(bool(np.all(np.abs(theta) < np.pi / 2)), "|theta| < pi/2")
        _require(bool(np.all(np.diff(theta) > 0)), "angles strictly increasing")
        object.__setattr__(self, "theta_rad", _frozen(theta))

    @classmethod
    def linspace(cls, theta_min: float, theta_max: float, points: int) -> "DetectorGrid":
        return cls(np.linspace(theta_min, theta_max, points))

    def kx(self, wavelength_m: float) -> np.ndarray:
        return 2 * np.pi / wavelength_m * np.sin(self.theta_rad)

    def __len__(self) -> int:
        return self.theta_rad.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DetectorGrid):
            return NotImplemented
        return self.theta_rad.shape == other.theta_rad.shape and bool(
            np.array_equal(self.theta_rad, other.theta_rad)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class Pattern:
    """Complex far-field amplitudes for one mask, and their Born-rule probabilities."""

    mask: Mask
    grid: DetectorGrid
    amplitudes: np.ndarray
    probabilities: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex).ravel()
        _require(amp.shape == self.grid.theta_rad.shape, "pattern must align with the detector grid")
        object.__setattr__(self, "amplitudes", _frozen(amp))
        object.__setattr__(self, "probabilities", _frozen(amp.real**2 + amp.imag**2))

    @property
    def theta_rad(self) -> np.ndarray:
        return self.grid.theta_rad


@dataclass(frozen=True, eq=False)
class SorkinResult:
    epsilon: np.ndarray
    i_max: float
    kappa: np.ndarray
    per_mask: dict[str, Pattern]
    theta_at_max: float = 0.0

    @property
    def grid(self) -> DetectorGrid:
        return next(iter(self.per_mask.values())).grid


class ModelBundle(NamedTuple):
    slits: SlitArray
    illum: Illumination
    coupling: CouplingModel
    grid: DetectorGrid


def validate_config(
    slits: SlitArray,
    illum: Illumination,
    coupling: CouplingModel,
    grid: DetectorGrid,
) -> ModelBundle:
    """Check cross-type invariants and return the inputs as a bundle.

    Per-type invariants are enforced on construction; this adds the checks
    that need more than one object (amplitude count, coupling range).
    """
    _require(isinstance(slits, SlitArray), "slits must be a SlitArray")
    _require(isinstance(illum, Illumination), "illum must be an Illumination")
    _require(isinstance(coupling, CouplingModel), "coupling must be a CouplingModel")
    _require(isinstance(grid, DetectorGrid), "grid must be a DetectorGrid")
    n = slits.slit_count
    _require(
        len(illum.slit_amplitudes) == n,
        "one slit amplitude per slit",
        f"{len(illum.slit_amplitudes)} amplitudes for N={n}",
    )
    if coupling.enabled and n > 1:
        _require(
            len(coupling.hop_amplitudes) >= n - 1,
            "hop_amplitudes length >= N-1 when loops are enabled",
            f"got {len(coupling.hop_amplitudes)} for N={n}, need c_1..c_{n - 1}",
        )
    return ModelBundle(slits, illum, coupling, grid)


def as_mask(mask: Mask | str | Iterable[int]) -> Mask:
    if isinstance(mask, Mask):
        return mask
    if isinstance(mask, str):
        return Mask.from_label(mask)
    return Mask(frozenset(mask))


def amplitudes_for(illum: Illumination, mask: Mask, slit_count: int) -> np.ndarray:
    """Illumination vector with closed slits zeroed."""
    return illum.amplitudes * mask.indicator(slit_count)


def label_masks(labels: Sequence[str]) -> list[Mask]:
    return [Mask.from_label(s) for s in labels]


@dataclass(frozen=True)
class CouplingTable:
    """Per-wavelength coupling constants, linearly interpolated between rows.

    Wavelengths outside the tabulated range are rejected rather than extrapolated.
    """

    wavelengths_m: tuple[float, ...]
    n_eff: tuple[float, ...]
    hop_amplitudes: tuple[tuple[float, ...], ...]
    max_hops: int = 1

    def __post_init__(self):
        lam = tuple(float(x) for x in self.wavelengths_m)
        object.__setattr__(self, "wavelengths_m", lam)
        object.__setattr__(self, "n_eff", tuple(float(x) for x in self.n_eff))
        object.__setattr__(self, "hop_amplitudes", tuple(tuple(float(c) for c in row) for row in self.hop_amplitudes))
        _require(len(lam) >= 1, "coupling table needs at least one row")
        _require(
            len(self.n_eff) == len(lam) and len(self.hop_amplitudes) == len(lam),
            "coupling table columns must have equal length",
        )
        _require(all(b > a for a, b in zip(lam, lam[1:])), "coupling table wavelengths strictly increasing")
        _require(len({len(r) for r in self.hop_amplitudes}) == 1, "coupling table rows list the same number of c_m")
        for i in range(len(lam)):
            self.row(i)

    def row(self, i: int) -> CouplingModel:
        return CouplingModel(self.n_eff[i], self.hop_amplitudes[i], self.max_hops)

    def at(self, wavelength_m: float) -> CouplingModel:
        lam = np.asarray(self.wavelengths_m)
        lo, hi = lam[0], lam[-1]
        tol = 1e-12 * hi
        _require(
            lo - tol <= wavelength_m <= hi + tol,
            "wavelength inside the coupling table range",
            f"{wavelength_m!r} not in [{lo!r}, {hi!r}]",
        )
        wl = min(max(wavelength_m, lo), hi)
        n_eff = float(np.interp(wl, lam, self.n_eff))
        hops = np.asarray(self.hop_amplitudes)
        cs = tuple(float(np.interp(wl, lam, hops[:, m])) for m in range(hops.shape[1]))
        return CouplingModel(n_eff, cs, self.max_hops)

    def with_max_hops(self, max_hops: int) -> "CouplingTable":
        return CouplingTable(self.wavelengths_m, self.n_eff, self.hop_amplitudes, max_hops)
