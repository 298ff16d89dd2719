import numpy as np
import pytest

from switchdiff.basis import OrthonormalBasis
from switchdiff.closed_form import (TwoStateParams, delta_bneg,
                                    four_state_A, four_state_printed_modes,
                                    four_state_solution, steady_state_bounds,
                                    stepwise_delta_bneg, stepwise_gaussian_b0,
                                    uniform_gaussian_b0, uniform_gaussian_bneg_bounds,
                                    uniform_gaussian_bnz)
from switchdiff.families import stepwise_delta, stepwise_gaussian, uniform_gaussian
from switchdiff.spectral import expm_modes, mode_matrix, forward_transform, reassemble

HAAR2 = OrthonormalBasis("haar", 2)
TRAPZ = getattr(np, "trapezoid", None) or np.trapz


def spectral_quadrature(params, data, t, x, s):
    """The independent quadrature route of the same construction."""
    cm = params.model()
    basis = OrthonormalBasis("haar", cm.ncells)
    a = mode_matrix(cm, basis)
    d = data if data.ncells == cm.ncells else data.refine(cm.ncells)
    gh = forward_transform(d, basis)
    fld = reassemble(a, gh, cm, [t], x, [s], route="quadrature")
    return fld.values[0, 0]


# ---- uniform Gaussian, b = 0 ---------------------------------------------------

def test_identity_at_t0(param_b0):
    x = np.linspace(-6, 6, 241)
    for s in (0.1, 0.6, 1.0):
        d = uniform_gaussian_b0(param_b0, 0.0, x, s)
        assert np.abs(d - np.exp(-x ** 2) / np.sqrt(np.pi)).max() < 1e-15


def test_pinned_value_and_quadrature_agreement():
    p = TwoStateParams(l1=1.0, l2=2.0, r1=1.0, r2=1.0, c=0.0)
    assert uniform_gaussian_b0(p, 1.0, 0.0, 0.25) == pytest.approx(
        0.41008624241819025, abs=1e-15)
    x = np.linspace(-8, 8, 321)
    for t in (0.5, 2.0):
        for s in (0.25, 0.75):
            quad = spectral_quadrature(p, uniform_gaussian(), t, x, s)
            assert np.abs(uniform_gaussian_b0(p, t, x, s) - quad).max() < 1e-8


def test_second_moment_growth(param_b0):
    # x-second moment at fixed s grows as (1 + 2 R^2 t)/2 when c = 0
    p = TwoStateParams(l1=1.0, l2=2.0, r1=1.0, r2=2.0, c=0.0)
    x = np.linspace(-40, 40, 8001)
    for s, r in ((0.25, 1.0), (0.75, 2.0)):
        for t in (0.5, 2.0):
            d = uniform_gaussian_b0(p, t, x, s)
            m2 = TRAPZ(x ** 2 * d, x) / TRAPZ(d, x)
            assert m2 == pytest.approx(0.5 * (1 + 2 * r * r * t), rel=1e-10)


# ---- uniform Gaussian, b < 0: explicit form and bounds -------------------------

def test_bnz_limits_to_b0():
    pa = TwoStateParams(l1=1, l2=2, r1=1, r2=2, b1=-1e-12, b2=-1e-12, c=1)
    pb = TwoStateParams(l1=1, l2=2, r1=1, r2=2, b1=0.0, b2=0.0, c=1)
    x = np.linspace(-6, 8, 201)
    assert np.abs(uniform_gaussian_bnz(pa, 1.0, x, 0.25)
                  - uniform_gaussian_b0(pb, 1.0, x, 0.25)).max() < 1e-9


def test_bounds_contain_quadrature_solution(param):
    pg = TwoStateParams(l1=1, l2=2, r1=1, r2=2, b1=-0.5, b2=-1.0, c=1.0)
    x = np.linspace(-8, 8, 401)
    for t in (1.0, 10.0, 100.0):
        for s in (0.25, 0.75):
            lo, up = uniform_gaussian_bneg_bounds(pg, t, x, s)
            assert np.all(lo <= up + 1e-15)
            sol = spectral_quadrature(pg, uniform_gaussian(), t, x, s)
            assert np.all(sol >= lo - 1e-8)
            assert np.all(sol <= up + 1e-8)


def test_printed_envelope_sandwich_pointwise():
    # J1 <= J(eta) <= J2 for sigma = -1, sampled over eta in [0, t]
    pg = TwoStateParams(l1=1, l2=2, r1=1, r2=2, b1=-0.5, b2=-1.0, c=1.0)
    x = np.linspace(-6, 6, 201)
    for t in (0.7, 3.0):
        for s in (0.25, 0.75):
            b, c, r, _ = pg.at(s)
            d = -(r * r / b) * (-np.expm1(2 * b * t))
            xc = x + (c / b) * (-np.expm1(b * t))
            sig = -1.0
            j1 = np.exp(-xc ** 2 / (d + np.exp(2 * sig * t))) / np.sqrt(d + 1)
            j2 = np.exp(-xc ** 2 / (d + 1)) / np.sqrt(d + np.exp(2 * sig * t))
            for eta in np.linspace(0.0, t, 9):
                w = np.exp(2 * sig * (t - eta))
                j = np.exp(-xc ** 2 / (d + w)) / np.sqrt(d + w)
                assert np.all(j1 <= j + 1e-15)
                assert np.all(j <= j2 + 1e-15)


def test_bounds_require_negative_b(param_b0):
    with pytest.raises(ValueError, match="b"):
        uniform_gaussian_bneg_bounds(param_b0, 1.0, np.zeros(3), 0.25)


def test_bounds_collapse_when_rates_equal():
    p = TwoStateParams(l1=1.5, l2=1.5, r1=1, r2=2, b1=-0.5, b2=-1.0, c=1.0)
    x = np.linspace(-6, 6, 201)
    lo, up = uniform_gaussian_bneg_bounds(p, 2.0, x, 0.25)
    assert np.abs(up - lo).max() < 1e-15
    lo, up = steady_state_bounds(p, x, 0.25)
    assert np.abs(up - lo).max() < 1e-15


def test_time_bounds_converge_to_steady_bounds():
    pg = TwoStateParams(l1=1, l2=2, r1=1, r2=2, b1=-0.5, b2=-1.0, c=1.0)
    x = np.linspace(-8, 8, 401)
    for s in (0.25, 0.75):
        lo_t, up_t = uniform_gaussian_bneg_bounds(pg, 200.0, x, s)
        lo_s, up_s = steady_state_bounds(pg, x, s)
        assert np.abs(lo_t - lo_s).max() < 1e-12
        assert np.abs(up_t - up_s).max() < 1e-12
        far = np.array([-20.0, 20.0])                 # Gaussian tails -> 0
        assert np.abs(steady_state_bounds(pg, far, s)[1]).max() < 1e-8


# ---- uniform delta, b < 0 -------------------------------------------------------

def test_delta_bneg_rest_points_and_width():
    x = np.linspace(-2, 4, 120001)
    for b, rest in ((-0.5, 2.0), (-1.0, 1.0)):
        p = TwoStateParams(l1=1, l2=2, r1=1, r2=1, b1=b, b2=b, c=1.0)
        d = delta_bneg(p, 200.0, x, 0.25)
        assert abs(x[np.argmax(d)] - rest) < 1e-3
    # limiting exponent denominator -R^2/b = 2 for R=1, b=-0.5
    p = TwoStateParams(l1=1, l2=2, r1=1, r2=1, b1=-0.5, b2=-0.5, c=1.0)
    d = delta_bneg(p, 400.0, x, 0.25)
    peak = d.max()
    amp = 1 + (1 / 3)                           # 1 - (A10/A11) X1 at s < 1/2
    assert peak == pytest.approx(amp / np.sqrt(np.pi * 2.0), rel=1e-10)


def test_delta_bneg_state_mass(param):
    # total x-mass at fixed s is 1 + (A10/A11)(e^{A11 t} - 1) X1(s)
    x = np.linspace(-15, 20, 14001)
    for t in (0.3, 2.0, 50.0):
        for s, x1 in ((0.25, 1.0), (0.75, -1.0)):
            d = delta_bneg(param, t, x, s)
            mass = TRAPZ(d, x)
            expect = 1 + (-1 / 3) * np.expm1(-1.5 * t) * x1
            assert mass == pytest.approx(expect, abs=1e-9)
    with pytest.raises(ValueError):
        delta_bneg(param, 0.0, x, 0.25)


# ---- stepwise families -----------------------------------------------------------

def test_stepwise_gaussian_haar_exact_at_t0(param_b0):
    x = np.linspace(-9, 9, 501)
    for s, m in ((0.3, 5.0), (0.9, -5.0)):
        d = stepwise_gaussian_b0(param_b0, 0.0, x, s)
        assert np.abs(d - np.exp(-((x - m) ** 2)) / np.sqrt(np.pi)).max() < 1e-15


def test_stepwise_gaussian_quadrature_agreement(param_b0):
    x = np.linspace(-25, 30, 1101)
    data = stepwise_gaussian([5.0, -5.0])
    for t in (1.0, 10.0):
        for s in (0.25, 0.75):
            quad = spectral_quadrature(param_b0, data, t, x, s)
            assert np.abs(stepwise_gaussian_b0(param_b0, t, x, s) - quad).max() < 1e-8


def test_stepwise_gaussian_longtime_profile(param_b0):
    # B1 decays; limit profile is (1 - (A10/A11) X1) B0
    x = np.linspace(-20, 40, 1201)
    t = 30.0
    _, c, r, _ = param_b0.at(0.25)
    den = 1 + 2 * r * r * t
    b0 = 0.5 * (np.exp(-((x - 5 - t) ** 2) / den) + np.exp(-((x + 5 - t) ** 2) / den)) \
        / np.sqrt(np.pi * den)
    d = stepwise_gaussian_b0(param_b0, t, x, 0.25)
    assert np.abs(d - (1 + 1 / 3) * b0).max() < 1e-15


def test_stepwise_gaussian_cosine_warns(param_b0):
    x = np.linspace(-9, 9, 101)
    with pytest.warns(UserWarning, match="not exact"):
        d = stepwise_gaussian_b0(param_b0, 0.0, x, 0.25, basis="cosine")
    # cosine truncation really is inexact at t = 0
    assert np.abs(d - np.exp(-((x - 5.0) ** 2)) / np.sqrt(np.pi)).max() > 1e-3


def test_stepwise_delta_matches_quadrature_and_peaks(param):
    x = np.linspace(-12, 16, 1401)
    data = stepwise_delta([5.0, -5.0])
    for t in (0.1, 0.5, 100.0):
        for s in (0.25, 0.75):
            quad = spectral_quadrature(param, data, t, x, s)
            assert np.abs(stepwise_delta_bneg(param, t, x, s) - quad).max() < 1e-8
    xf = np.linspace(0, 3, 120001)
    assert abs(xf[np.argmax(stepwise_delta_bneg(param, 100.0, xf, 0.25))] - 2.0) < 1e-3
    assert abs(xf[np.argmax(stepwise_delta_bneg(param, 100.0, xf, 0.75))] - 1.0) < 1e-3


def test_stepwise_delta_within_steady_bounds_shape(param):
    # the delta-data steady profile matches the uniform-delta limit per state
    x = np.linspace(-6, 8, 701)
    d100 = stepwise_delta_bneg(param, 100.0, x, 0.25)
    d200 = stepwise_delta_bneg(param, 200.0, x, 0.25)
    assert np.abs(d200 - d100).max() <= 1e-6          # Cauchy in t


def test_mass_one_for_all_t(param, param_b0):
    x = np.linspace(-60, 70, 26001)
    for t in (0.1, 1.0, 10.0):
        total = 0.5 * (TRAPZ(stepwise_gaussian_b0(param_b0, t, x, 0.25), x)
                       + TRAPZ(stepwise_gaussian_b0(param_b0, t, x, 0.75), x))
        assert total == pytest.approx(1.0, abs=1e-8)
        total = 0.5 * (TRAPZ(stepwise_delta_bneg(param, t, x, 0.25), x)
                       + TRAPZ(stepwise_delta_bneg(param, t, x, 0.75), x))
        assert total == pytest.approx(1.0, abs=1e-8)


def test_b0_supremum_decays(param_b0):
    x = np.linspace(-40, 60, 2001)
    sups = [stepwise_gaussian_b0(param_b0, t, x, 0.25).max() for t in (0, 1, 10, 50)]
    assert all(a > b for a, b in zip(sups, sups[1:]))


# ---- four-state hierarchy ---------------------------------------------------------

def test_four_state_matrix_and_eigenvalues():
    a = four_state_A(0.4, 0.2)
    eig = np.linalg.eigvals(a[1:, 1:])
    assert eig.real.max() < 0
    expect = {-0.3 + 0.0j, -0.15 + 0.05j, -0.15 - 0.05j}
    assert {complex(round(z.real, 12), round(z.imag, 12)) for z in eig} == expect


def test_four_state_t0_is_data(param4):
    x = np.linspace(-16, 16, 801)
    for cell, m in enumerate(param4.means()):
        s = (cell + 0.5) / 4
        d = four_state_solution(param4, 0.0, x, s)
        assert np.abs(d - np.exp(-((x - m) ** 2)) / np.sqrt(np.pi)).max() < 1e-14


def test_four_state_quadrature_agreement(param4):
    x = np.linspace(-30, 30, 1201)
    data = stepwise_gaussian(list(param4.means()))
    for t in (3.0, 15.0):
        for cell in range(4):
            s = (cell + 0.5) / 4
            quad = spectral_quadrature(param4, data, t, x, s)
            assert np.abs(four_state_solution(param4, t, x, s) - quad).max() < 1e-8


def test_four_state_flattens(param4):
    x = np.linspace(-40, 40, 1601)
    for cell in range(4):
        s = (cell + 0.5) / 4
        s3 = four_state_solution(param4, 3.0, x, s).max()
        s15 = four_state_solution(param4, 15.0, x, s).max()
        assert s15 < s3


def test_four_state_printed_b1_matches_exponential(param4):
    x = np.linspace(-20, 20, 801)
    basis = OrthonormalBasis("haar", 4)
    for t in (0.5, 2.0, 7.0):
        e = expm_modes(four_state_A(param4.l1, param4.l2), t)
        ci = basis.cell_integrals(4)
        s = 0.375
        den = 1 + 2 * param4.r2_values()[1] * t
        gs = np.stack([np.exp(-((x - m) ** 2) / den) / np.sqrt(np.pi * den)
                       for m in param4.means()])
        b_exp = e @ (ci @ gs)
        b1p, b2p, b3p = four_state_printed_modes(param4, t, x, s)
        assert np.abs(b1p - b_exp[1]).max() < 1e-14
        if t >= 2.0:   # the published B2/B3 grow; the exponential route decays
            assert np.abs(b2p - b_exp[2]).max() > 1e-3
            assert np.abs(b3p - b_exp[3]).max() > 1e-3
