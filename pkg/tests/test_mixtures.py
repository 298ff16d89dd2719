import numpy as np
import pytest

from switchdiff.mixtures import GAUSSIAN_Q, GaussMix


def test_gaussian_atom_density_matches_formula():
    mix = GaussMix([1.0], [2.0], [GAUSSIAN_Q])
    x = np.linspace(-3, 7, 401)
    expect = np.exp(-((x - 2.0) ** 2)) / np.sqrt(np.pi)
    assert np.abs(mix.density(x) - expect).max() < 1e-15


def test_ft_matches_quadrature_inverse():
    # independent oracle: trapezoid inverse FT of ft() must reproduce density()
    mix = GaussMix([0.7, 0.3], [-1.0, 2.5], [0.25, 0.6])
    x = np.linspace(-8, 10, 301)
    mu = np.linspace(-40, 40, 4001)
    phat = mix.ft(mu)
    dmu = mu[1] - mu[0]
    recon = (np.exp(1j * np.outer(x, mu)) @ phat).real * dmu / (2 * np.pi)
    assert np.abs(recon - mix.density(x)).max() < 1e-12


def test_scale_argument_is_ft_dilation():
    mix = GaussMix([1.0], [3.0], [0.25])
    mu = np.linspace(-4, 4, 101)
    assert np.abs(mix.scale_argument(0.5).ft(mu) - mix.ft(0.5 * mu)).max() < 1e-15


def test_gauss_weight_multiplies_transform():
    mix = GaussMix([1.0], [1.0], [0.25])
    mu = np.linspace(-4, 4, 101)
    w = mix.gauss_weight(0.3, -2.0)
    assert np.abs(w.ft(mu) - mix.ft(mu) * np.exp(-0.3 * mu ** 2 + 2.0j * mu)).max() < 1e-14


def test_mass_is_zero_frequency_value():
    mix = GaussMix([0.25, -0.1], [0.0, 5.0], [0.25, 0.0])
    assert mix.mass() == pytest.approx(0.15)
    assert mix.ft(0.0) == pytest.approx(0.15)


def test_delta_atoms_refuse_grid_density():
    mix = GaussMix([1.0], [0.0], [0.0])
    with pytest.raises(ValueError, match="point mass"):
        mix.density(np.linspace(-1, 1, 11))


def test_negative_width_rejected():
    with pytest.raises(ValueError):
        GaussMix([1.0], [0.0], [-0.1])


def test_compact_merges_equal_atoms():
    mix = GaussMix([0.5, 0.5, 1.0], [1.0, 1.0, 2.0], [0.25, 0.25, 0.25]).compact()
    assert mix.n_atoms == 2
    assert sorted(mix.w) == [1.0, 1.0]


def test_addition_and_scaling():
    a = GaussMix([1.0], [0.0], [0.25])
    b = GaussMix([2.0], [1.0], [0.5])
    x = np.linspace(-5, 5, 101)
    combo = (a + b) * 0.5
    assert np.abs(combo.density(x) - 0.5 * (a.density(x) + b.density(x))).max() < 1e-15
