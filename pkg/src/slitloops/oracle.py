"""Brute-force reference evaluation, independent of the vectorized model.

Everything here is scalar Python (``math``/``cmath``) with explicit recursion
over hop sequences. It reads only raw parameters from the model objects and
shares no computation with :mod:`slitloops.propagation` or
:mod:`slitloops.loops`; the CLI ``validate`` command and the test suite use
it as the independent side of every equivalence check.
"""

from __future__ import annotations

import cmath
import math

from .model import CouplingModel, Illumination, SlitArray

SORKIN_SIGNS = {"A": 1, "B": 1, "C": 1, "AB": -1, "BC": -1, "AC": -1, "ABC": 1}


def _center(j: int, n: int, pitch: float) -> float:
    return ((n - 1) / 2.0 - j) * pitch


def _exit(j: int, slits: SlitArray, wavelength: float, theta: float) -> complex:
    kx = 2.0 * math.pi / wavelength * math.sin(theta)
    half = 0.5 * kx * slits.slit_width_m
    env = 1.0 if half == 0 else math.sin(half) / half
    return env * cmath.exp(1j * kx * _center(j, slits.slit_count, slits.pitch_m))


def _hop(j: int, k: int, slits: SlitArray, coupling: CouplingModel, wavelength: float) -> complex:
    m = abs(j - k)
    c = coupling.hop_amplitudes[m - 1] if m <= len(coupling.hop_amplitudes) else 0.0
    phi = coupling.n_eff * 2.0 * math.pi / wavelength * slits.pitch_m
    return c * cmath.exp(1j * m * phi)


def direct(slits: SlitArray, open_slits, illum: Illumination, theta: float) -> complex:
    lam = illum.wavelength_m
    return sum((illum.slit_amplitudes[j] * _exit(j, slits, lam, theta) for j in sorted(open_slits)), 0j)


def looped(
    slits: SlitArray,
    open_slits,
    illum: Illumination,
    coupling: CouplingModel,
    theta: float,
    exact_hops: int | None = None,
) -> complex:
    """Sum over explicit hop sequences; ``exact_hops`` restricts to one order."""
    lam = illum.wavelength_m
    open_slits = sorted(open_slits)
    lo, hi = (1, coupling.max_hops) if exact_hops is None else (exact_hops, exact_hops)
    total = 0j

    def walk(seq, amp):
        nonlocal total
        hops = len(seq) - 1
        if lo <= hops <= hi:
            total += amp * _exit(seq[-1], slits, lam, theta)
        if hops == hi:
            return
        for nxt in open_slits:
            if nxt != seq[-1]:
                walk(seq + [nxt], amp * _hop(seq[-1], nxt, slits, coupling, lam))

    for j0 in open_slits:
        walk([j0], complex(illum.slit_amplitudes[j0]))
    return total


def _open_of(label: str) -> list[int]:
    return ["ABC".index(ch) for ch in label]


def sorkin(slits: SlitArray, illum: Illumination, coupling: CouplingModel, thetas) -> dict:
    """Per-mask probabilities, epsilon, i_max and kappa for a three-slit structure."""
    probs = {lab: [] for lab in SORKIN_SIGNS}
    for th in thetas:
        for lab in SORKIN_SIGNS:
            o = _open_of(lab)
            psi = direct(slits, o, illum, th) + looped(slits, o, illum, coupling, th)
            probs[lab].append(abs(psi) ** 2)
    eps = [sum(SORKIN_SIGNS[lab] * probs[lab][i] for lab in SORKIN_SIGNS) for i in range(len(thetas))]
    i_max = max(probs["ABC"])
    return {"P": probs, "epsilon": eps, "i_max": i_max, "kappa": [e / i_max for e in eps]}


def epsilon_loop_terms(slits: SlitArray, illum: Illumination, coupling: CouplingModel, theta: float) -> float:
    """Epsilon with the direct-only terms cancelled analytically.

    Expanding ``|D_S + L_S|^2`` per mask leaves ``|D_S|^2`` terms that sum to
    zero under the Sorkin signs, so epsilon is the signed sum of
    ``2 Re(conj(D_S) L_S) + |L_S|^2`` alone.
    """
    out = 0.0
    for lab, sign in SORKIN_SIGNS.items():
        o = _open_of(lab)
        d = direct(slits, o, illum, theta)
        loop = looped(slits, o, illum, coupling, theta)
        out += sign * (2.0 * (d.conjugate() * loop).real + abs(loop) ** 2)
    return out
