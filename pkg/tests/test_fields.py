import numpy as np
import pytest

from switchdiff.fields import DensityField, compare_fields


def gaussian_field(times, x, s, shift=0.0):
    vals = np.empty((len(times), len(s), len(x)))
    for it, t in enumerate(times):
        for js, sv in enumerate(s):
            vals[it, js] = np.exp(-((x - shift) ** 2) / (1 + t)) / np.sqrt(np.pi * (1 + t))
    return DensityField(np.array(times), x, np.array(s), vals)


def test_mass_uses_cell_measure_in_s():
    x = np.linspace(-12, 12, 1201)
    fld = gaussian_field([0.0, 1.0], x, [0.25, 0.75])
    assert np.abs(fld.masses() - 1.0).max() < 1e-12


def test_csv_roundtrip_and_mass_footer(tmp_path):
    x = np.linspace(-3, 3, 61)
    fld = gaussian_field([0.0, 2.0], x, [0.25, 0.75])
    path = tmp_path / "field.csv"
    fld.to_csv(path)
    text = path.read_text().splitlines()
    assert text[0] == "t,x,s,p"
    footers = [ln for ln in text if ln.startswith("# mass")]
    assert len(footers) == 2 and text[-1].startswith("# mass t=2")
    back = DensityField.from_csv(path)
    assert np.array_equal(back.times, fld.times)
    assert np.abs(back.values - fld.values).max() == 0.0


def test_csv_discrete_schema(tmp_path):
    x = np.linspace(-1, 1, 11)
    vals = np.ones((1, 2, 11))
    fld = DensityField([0.0], x, [0.0, 1.0], vals, kind="discrete")
    path = tmp_path / "d.csv"
    fld.to_csv(path)
    assert path.read_text().splitlines()[0] == "t,x,state,p"


def test_compare_identical_is_zero():
    x = np.linspace(-5, 5, 101)
    fld = gaussian_field([1.0], x, [0.25, 0.75])
    rep = compare_fields(fld, fld, norm="L1")
    assert rep.overall == 0.0


def test_compare_constant_offset_l1():
    # mass-1 style domain of width 20 shifted by eps: L1 = 20 eps
    x = np.linspace(-10, 10, 2001)
    a = gaussian_field([0.0], x, [0.5])
    b = DensityField(a.times, x, a.s, a.values + 1e-4)
    rep = compare_fields(a, b, norm="L1")
    assert rep.overall == pytest.approx(20 * 1e-4, rel=1e-9)
    assert compare_fields(a, b, norm="Linf").overall == pytest.approx(1e-4)


def test_compare_interpolates_to_coarser_grid():
    xf = np.linspace(-5, 5, 401)
    xc = np.linspace(-5, 5, 101)
    fa = gaussian_field([1.0], xf, [0.5])
    fb = gaussian_field([1.0], xc, [0.5])
    rep = compare_fields(fa, fb, norm="Linf")
    assert rep.overall < 1e-3      # pure interpolation error


def test_compare_disjoint_grids_error():
    a = gaussian_field([0.0], np.linspace(-5, -1, 11), [0.5])
    b = gaussian_field([0.0], np.linspace(1, 5, 11), [0.5])
    with pytest.raises(ValueError, match="disjoint"):
        compare_fields(a, b)


def test_compare_mismatched_times_error():
    x = np.linspace(-2, 2, 21)
    a = gaussian_field([0.0], x, [0.5])
    b = gaussian_field([1.0], x, [0.5])
    with pytest.raises(ValueError, match="times"):
        compare_fields(a, b)


def test_slice_lookup():
    x = np.linspace(-2, 2, 21)
    fld = gaussian_field([0.0, 1.0], x, [0.5])
    assert np.array_equal(fld.slice_at(1.0), fld.values[1])
    with pytest.raises(KeyError):
        fld.slice_at(0.5)
