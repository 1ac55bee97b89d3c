import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slitloops import (
    ApertureDiscretization,
    DetectorGrid,
    Illumination,
    Mask,
    ModelError,
    SlitArray,
    converge_huygens,
    direct_amplitude,
    direct_pattern,
    huygens_compose_check,
    rs_far_field,
    rs_kernel,
)
from slitloops.model import nonempty_masks

LAM = 810e-9
K = 2 * np.pi / LAM

# mpmath, 40 digits: -sinc_n(w / 2p) at kx p = pi, w = 200 nm, p = 4.6 um
DIRECT_AT_FIRST_NULL = -0.9992228022267182326211202979375164784957
# mpmath, 40 digits: rs_kernel((0, 0), (1 um, 1 um)) at 810 nm
RS_KERNEL_1UM = complex(-617083377854.4726822522448798610029445639, 15734689872.87466785531011184674944615626)


def test_direct_on_axis_full_mask(slits, plane_wave):
    assert direct_amplitude(slits, slits.full_mask(), plane_wave, 0.0) == 3 + 0j


def test_direct_empty_mask(slits, plane_wave):
    assert direct_amplitude(slits, Mask(), plane_wave, 0.3) == 0j


def test_direct_at_comb_null(slits, plane_wave):
    theta = math.asin(LAM / (2 * slits.pitch_m))
    amp = direct_amplitude(slits, slits.full_mask(), plane_wave, theta)
    assert amp.real == pytest.approx(DIRECT_AT_FIRST_NULL, rel=1e-13)
    assert abs(amp.imag) < 1e-13


def test_direct_matches_cosine_factorization(slits, plane_wave, grid):
    # K(B, D) (1 + e^{i phi_f} + e^{-i phi_f}) with phi_f = p kx
    kx = grid.kx(LAM)
    env = np.sinc(kx * slits.slit_width_m / (2 * np.pi))
    expected = env * (1 + 2 * np.cos(kx * slits.pitch_m))
    got = direct_amplitude(slits, slits.full_mask(), plane_wave, grid.theta_rad)
    np.testing.assert_allclose(got, expected, atol=1e-13)


@given(theta=st.floats(-1.2, 1.2), n=st.integers(2, 6), j=st.integers(0, 4))
def test_translation_phase(theta, n, j):
    # slit j is slit j+1 translated by one pitch: amplitude picks up exp(i kx p)
    j = j % (n - 1)
    s = SlitArray(2e-7, 4.6e-6, n)
    illum = Illumination.plane_wave(LAM, n)
    a_j = direct_amplitude(s, Mask.of(j), illum, theta)
    a_next = direct_amplitude(s, Mask.of(j + 1), illum, theta)
    kx = K * math.sin(theta)
    assert a_j == pytest.approx(a_next * np.exp(1j * kx * s.pitch_m), abs=1e-12)
    assert abs(a_j) == pytest.approx(abs(a_next), abs=1e-12)


@pytest.mark.parametrize("label", ["ABC", "AC", "B"])
def test_mirror_symmetry(slits, plane_wave, label):
    grid = DetectorGrid.linspace(-0.5, 0.5, 1001)
    p = direct_pattern(slits, Mask.from_label(label), plane_wave, grid).probabilities
    np.testing.assert_allclose(p, p[::-1], rtol=1e-12, atol=1e-15)


def test_rs_kernel_on_axis():
    v = rs_kernel((0.0, 0.0), (0.0, 1.0), K)
    assert abs(v) == pytest.approx(K / (2 * np.pi), rel=1e-14)


def test_rs_kernel_grazing_is_zero():
    assert rs_kernel((0.0, 0.0), (1e-6, 0.0), K) == 0


def test_rs_kernel_reference_value():
    v = rs_kernel((0.0, 0.0), (1e-6, 1e-6), K)
    # phase k r ~ 11 rad: float64 loses ~1e-15 relative in r, amplified by k r
    assert v == pytest.approx(RS_KERNEL_1UM, rel=1e-12)


def test_rs_kernel_accepts_3d_points():
    assert rs_kernel((0.0, 0.0, 0.0), (1e-6, 0.0, 1e-6), K) == rs_kernel((0.0, 0.0), (1e-6, 1e-6), K)


def test_rs_kernel_zero_separation():
    with pytest.raises(ModelError, match="zero separation"):
        rs_kernel((1.0, 2.0), (1.0, 2.0), K)


def test_discretization_weights(slits):
    d = ApertureDiscretization.for_slits(slits, 16)
    np.testing.assert_allclose(d.weight_per_slit(), slits.slit_width_m, rtol=1e-12)
    assert d.sample_points.size == 48


def test_discretization_rejects_coarse(slits):
    with pytest.raises(ModelError, match="under-resolved"):
        ApertureDiscretization.for_slits(slits, 7)


def test_rs_far_field_rejects_near_screen(slits, plane_wave):
    d = ApertureDiscretization.for_slits(slits, 8)
    g = DetectorGrid.linspace(-0.1, 0.1, 11)
    with pytest.raises(ModelError, match="far field"):
        rs_far_field(slits, slits.full_mask(), plane_wave, d, g, screen_distance_m=1e-3)


def test_rs_far_field_empty_mask(slits, plane_wave):
    d = ApertureDiscretization.for_slits(slits, 8)
    g = DetectorGrid.linspace(-0.1, 0.1, 11)
    assert np.all(rs_far_field(slits, Mask(), plane_wave, d, g).probabilities == 0)


def test_rs_single_slit_is_obliquity_weighted_sinc(slits, plane_wave):
    # RS-I far field of one slit = cos(theta) * sinc in amplitude
    g = DetectorGrid.linspace(np.radians(-10), np.radians(10), 201)
    d = ApertureDiscretization.for_slits(slits, 32)
    rs = rs_far_field(slits, Mask.of(1), plane_wave, d, g, 1.0).probabilities
    ref = direct_pattern(slits, Mask.of(1), plane_wave, g).probabilities * np.cos(g.theta_rad) ** 2
    np.testing.assert_allclose(rs, ref, rtol=1e-4)


def test_rs_single_slit_paraxial_within_2pct_below_8deg(slits, plane_wave):
    g = DetectorGrid.linspace(np.radians(-8), np.radians(8), 161)
    d = ApertureDiscretization.for_slits(slits, 32)
    rs = rs_far_field(slits, Mask.of(0), plane_wave, d, g, 1.0).probabilities
    ref = direct_pattern(slits, Mask.of(0), plane_wave, g).probabilities
    assert np.max(np.abs(rs - ref) / ref) < 0.02


def test_rs_three_slit_fringe_spacing(slits, plane_wave):
    g = DetectorGrid.linspace(-0.45, 0.45, 4001)
    d = ApertureDiscretization.for_slits(slits, 16)
    p = rs_far_field(slits, slits.full_mask(), plane_wave, d, g, 1.0).probabilities
    i = 1 + np.flatnonzero((p[1:-1] > p[:-2]) & (p[1:-1] >= p[2:]) & (p[1:-1] > 0.5 * p.max()))
    # parabolic refinement of each principal maximum
    shift = 0.5 * (p[i - 1] - p[i + 1]) / (p[i - 1] - 2 * p[i] + p[i + 1])
    step = g.theta_rad[1] - g.theta_rad[0]
    peaks = np.sin(g.theta_rad[i] + shift * step)
    assert len(peaks) >= 4
    # the falling envelope pulls each maximum inward by ~0.2%
    np.testing.assert_allclose(np.diff(peaks), LAM / slits.pitch_m, rtol=5e-3)
    assert LAM / slits.pitch_m == pytest.approx(0.1761, abs=1e-4)


@pytest.mark.parametrize("mask", nonempty_masks(3), ids=lambda m: m.label)
def test_rs_paraxial_consistency_per_mask(slits, plane_wave, mask):
    # Paraxial window small enough that the cos^2 obliquity stays below 2%.
    g = DetectorGrid.linspace(np.radians(-8), np.radians(8), 641)
    d = ApertureDiscretization.for_slits(slits, 16)
    rs = rs_far_field(slits, mask, plane_wave, d, g, 1.0)
    ref = direct_pattern(slits, mask, plane_wave, g)
    assert np.max(np.abs(rs.probabilities - ref.probabilities)) / ref.probabilities.max() <= 0.02


@pytest.mark.xfail(strict=True, reason="cos^2 obliquity is 3% below paraxial at 10 deg for one-slit masks")
@pytest.mark.parametrize("label", ["B", "ABC"])
def test_rs_paraxial_consistency_to_10deg(slits, plane_wave, label):
    g = DetectorGrid.linspace(np.radians(-10), np.radians(10), 801)
    d = ApertureDiscretization.for_slits(slits, 16)
    mask = Mask.from_label(label)
    rs = rs_far_field(slits, mask, plane_wave, d, g, 1.0)
    ref = direct_pattern(slits, mask, plane_wave, g)
    assert np.max(np.abs(rs.probabilities - ref.probabilities)) / ref.probabilities.max() <= 0.02


def test_huygens_rejects_bad_ordering():
    with pytest.raises(ModelError, match="strictly between"):
        huygens_compose_check(K, (0, 0), (0, 200 * LAM), 300 * LAM, 100 * LAM, 64)


def test_huygens_single_sample_reports_large_residual():
    r = huygens_compose_check(K, (0, 0), (0, 200 * LAM), 100 * LAM, 100 * LAM, 1)
    assert r == pytest.approx(1.0)


@pytest.mark.slow
def test_huygens_on_axis_converges():
    conv = converge_huygens(K, (0.0, 0.0), (0.0, 200 * LAM), 100 * LAM)
    assert conv.residual < 0.01
    # density check: halving the node spacing barely moves the answer
    assert abs(conv.history[-1][2] - conv.history[-2][2]) < 1e-4


@pytest.mark.slow
def test_huygens_off_axis_converges():
    conv = converge_huygens(K, (0.0, 0.0), (50 * LAM, 200 * LAM), 100 * LAM)
    assert conv.residual < 0.02


def test_huygens_residual_decreases_with_sampling():
    h = 100 * LAM
    res = [huygens_compose_check(K, (0, 0), (0, 200 * LAM), 100 * LAM, h, n) for n in (101, 201, 401, 801, 1601)]
    # below ~2 nodes per wavelength the grid aliases and the residual is O(1);
    # after that each doubling is no worse than the last, up to a 1e-4 noise floor
    assert res[0] > 0.5
    assert all(b <= a + 1e-4 for a, b in zip(res, res[1:]))
    assert res[-1] < 0.01


@settings(max_examples=20, deadline=None)
@given(theta=st.floats(-1.0, 1.0), n=st.integers(1, 4))
def test_direct_scalar_matches_vector(theta, n):
    s = SlitArray(2e-7, 4.6e-6, n)
    il = Illumination.plane_wave(LAM, n)
    vec = direct_amplitude(s, s.full_mask(), il, np.array([theta, theta]))
    assert vec[0] == direct_amplitude(s, s.full_mask(), il, theta)
