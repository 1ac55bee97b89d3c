import numpy as np
import pytest
from hypothesis import given, strategies as st

from slitloops import (
    CouplingModel,
    CouplingTable,
    DetectorGrid,
    Illumination,
    Mask,
    ModelError,
    Pattern,
    SlitArray,
    validate_config,
)
from slitloops.model import nonempty_masks


def test_reference_geometry_is_valid(slits, plane_wave, loop_coupling, grid):
    bundle = validate_config(slits, plane_wave, loop_coupling, grid)
    assert bundle.slits is slits and bundle.coupling is loop_coupling


def test_three_slit_centers_exact(slits):
    assert list(slits.slit_centers_m) == [4.6e-6, 0.0, -4.6e-6]
    assert slits.labels == ("A", "B", "C")


@given(
    w=st.floats(1e-9, 1e-6),
    ratio=st.floats(1.01, 100),
    n=st.integers(1, 12),
)
def test_centers_symmetric_and_decreasing(w, ratio, n):
    s = SlitArray(w, w * ratio, n)
    c = s.slit_centers_m
    assert np.all(np.diff(c) < 0)
    np.testing.assert_allclose(c, -c[::-1], atol=1e-15 * s.pitch_m * n)


@pytest.mark.parametrize(
    "kwargs, message",
    [
        (dict(slit_width_m=0.0, pitch_m=4.6e-6), "slit_width_m > 0"),
        (dict(slit_width_m=-5e-9, pitch_m=4.6e-6), "slit_width_m > 0"),
        (dict(slit_width_m=5e-6, pitch_m=4.6e-6), "pitch must exceed slit width"),
        (dict(slit_width_m=2e-7, pitch_m=4.6e-6, slit_count=0), "slit_count >= 1"),
    ],
)
def test_slit_array_rejects(kwargs, message):
    with pytest.raises(ModelError, match=message):
        SlitArray(**kwargs)


def test_hop_list_too_short_for_three_slits(slits, plane_wave, grid):
    with pytest.raises(ModelError, match="hop_amplitudes length >= N-1"):
        validate_config(slits, plane_wave, CouplingModel(1.65, (0.3,), 1), grid)
    # fine once loops are disabled
    validate_config(slits, plane_wave, CouplingModel(1.65, (0.3,), 0), grid)


def test_amplitude_count_must_match(slits, grid, loop_coupling):
    with pytest.raises(ModelError, match="one slit amplitude per slit"):
        validate_config(slits, Illumination(810e-9, (1, 1)), loop_coupling, grid)


@pytest.mark.parametrize(
    "ctor, message",
    [
        (lambda: Illumination(0.0), "wavelength_m > 0"),
        (lambda: CouplingModel(0.0), "n_eff > 0"),
        (lambda: CouplingModel(1.65, (0.3, -0.1)), "c_m >= 0"),
        (lambda: CouplingModel(1.65, (0.3,), -1), "max_hops >= 0"),
        (lambda: DetectorGrid([0.1, 0.0]), "strictly increasing"),
        (lambda: DetectorGrid([0.0, np.pi / 2]), r"\|theta\| < pi/2"),
    ],
)
def test_type_invariants(ctor, message):
    with pytest.raises(ModelError, match=message):
        ctor()


def test_mask_labels_roundtrip():
    for m in nonempty_masks(4):
        assert Mask.from_label(m.label) == m
    assert Mask.from_label("CA").open == {0, 2}
    assert Mask().label == ""


def test_mask_index_out_of_range(slits):
    with pytest.raises(ModelError, match="valid slit indices"):
        Mask.of(0, 3).check_against(slits)


def test_pattern_born_rule(grid):
    rng = np.random.default_rng(4)
    amp = rng.normal(size=len(grid)) + 1j * rng.normal(size=len(grid))
    pat = Pattern(Mask.of(0), grid, amp)
    np.testing.assert_allclose(pat.probabilities, np.abs(amp) ** 2, rtol=1e-12)
    assert np.all(pat.probabilities >= 0)
    with pytest.raises(ValueError):
        pat.amplitudes[0] = 0


def test_pattern_must_align(grid):
    with pytest.raises(ModelError, match="align"):
        Pattern(Mask.of(0), grid, np.zeros(3))


def test_detector_grid_kx(grid):
    np.testing.assert_allclose(grid.kx(810e-9), 2 * np.pi / 810e-9 * np.sin(grid.theta_rad))


def test_coupling_table_interpolates():
    t = CouplingTable((700e-9, 900e-9), (1.5, 1.7), ((0.2, 0.1), (0.4, 0.2)))
    mid = t.at(800e-9)
    assert mid.n_eff == pytest.approx(1.6)
    assert mid.hop_amplitudes == pytest.approx((0.3, 0.15))
    assert t.at(700e-9) == t.row(0)
    with pytest.raises(ModelError, match="inside the coupling table range"):
        t.at(1000e-9)
    with pytest.raises(ModelError, match="strictly increasing"):
        CouplingTable((900e-9, 700e-9), (1.5, 1.7), ((0.2, 0.1), (0.4, 0.2)))
