import math

import numpy as np
import pytest
from scipy import integrate

from mfunctions.density import (GridDensity, charfn_grid, convolve, curve_measure, global_charfn,
                                histogram, jacobian, l1_distance, local_charfn, rasterize,
                                reconstruct_density, sup_distance, uniform_convergence_probe, w_polar)
from mfunctions.errors import ContractError, DomainError
from mfunctions.functionals import Moment, Psi
from mfunctions.localgf import GParams, g_local
from mfunctions.primesys import NumberField, PrimeSite, rational_system
from mfunctions.torus import mc_average, quad_average

S2 = PrimeSite(2, 2)
P15 = GParams(1.5, 1)


def _fd_jacobian(site, r, th, h=1e-6):
    f = lambda r_, t_: w_polar(site, r_, t_)
    dr = (f(r + h, th) - f(r - h, th)) / (2 * h)
    dt = (f(r, th + h) - f(r, th - h)) / (2 * h)
    return dr.real * dt.imag - dr.imag * dt.real


def test_w_polar_is_the_m1_map():
    th = np.linspace(0, 2 * np.pi, 17)
    want = g_local(S2, GParams(1.0, 1), np.exp(1j * th))
    assert np.allclose(w_polar(S2, 0.5, th), want, rtol=1e-14)


def test_jacobian_examples():
    A = math.log(2) ** 2
    assert jacobian(S2, 1e-9, 2.0) / 1e-9 == pytest.approx(A * A, rel=1e-8)
    assert jacobian(S2, 0.3, 1.0) == pytest.approx(_fd_jacobian(S2, 0.3, 1.0), rel=1e-6)
    with pytest.raises(DomainError):
        jacobian(S2, 1.0, 0.0)


def test_curve_measure_integrals():
    c = curve_measure(S2, 1.5, 4096)
    assert c.integrate_test(lambda w: np.ones_like(w)) == pytest.approx(1.0, abs=1e-15)
    assert abs(c.integrate_test(lambda w: w)) < 1e-10
    assert c.angular_weights(360).sum() == pytest.approx(1.0, abs=1e-14)


def test_local_charfn_examples():
    assert local_charfn(S2, P15, 0j) == 1
    # independent adaptive quadrature of the circle integral
    z = 1 + 0j
    f = lambda th: np.exp(1j * (np.conj(z) * g_local(S2, P15, np.exp(1j * th))).real)
    re = integrate.quad(lambda th: f(th).real, 0, 2 * np.pi, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    im = integrate.quad(lambda th: f(th).imag, 0, 2 * np.pi, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    assert abs(local_charfn(S2, P15, z) - complex(re, im) / (2 * np.pi)) < 1e-9


def test_global_charfn_examples():
    assert global_charfn(rational_system(7), P15, 0j) == 1
    assert global_charfn(rational_system(2), P15, 0.3 - 2j) == local_charfn(S2, P15, 0.3 - 2j)
    sys2 = rational_system(3)
    for z in (0.5 + 0.2j, -3 + 1j, 4j):
        assert abs(global_charfn(sys2, P15, z) - quad_average(sys2, P15, Psi(z), 256)) < 1e-8


def test_charfn_grid_bounds_and_hermitian():
    xi = (np.arange(64) - 32) * 0.4
    cf = charfn_grid(rational_system(11), GParams(1.2, 2), xi)
    assert np.max(np.abs(cf.values)) <= 1 + 1e-12
    assert cf.values[32, 32] == 1
    assert cf.hermitian_defect() == 0.0


@pytest.fixture(scope="module")
def dens20():
    return reconstruct_density(rational_system(20), P15, 128)


def test_reconstruction_mass_symmetry(dens20):
    d = dens20
    assert d.mass == pytest.approx(1.0, abs=0.01)
    assert d.raw_min >= -1e-3 * d.values.max()
    assert d.reflection_asymmetry() <= 1e-3 * d.values.max()
    assert d.meta["boundary_charfn"] < 1e-4


def test_moment_consistency(dens20):
    sys_ = rational_system(20)
    for a, b in [(1, 0), (0, 1), (1, 1), (2, 0)]:
        est = mc_average(sys_, P15, Moment(a, b), 200_000, 5)
        assert abs(dens20.moment(a, b) - est.value) < 3 * est.stderr * math.sqrt(2) + 0.005


def test_convolution_fourier_duality(rng):
    # zero-padded DFT of the linear convolution is the product of the padded DFTs
    n = 32
    a = GridDensity(rng.random((n, n)), 1.0)
    b = GridDensity(rng.random((n, n)), 1.0)
    full = np.zeros((2 * n, 2 * n))
    for i in range(n):
        for j in range(n):
            full[i:i + n, j:j + n] += a.values[i, j] * b.values
    want = full[n // 2:n // 2 + n, n // 2:n // 2 + n] * a.cell
    got = convolve(a, b).values
    assert np.max(np.abs(got - want)) <= 1e-6 * np.max(np.abs(want))


def test_convolution_commutes_and_keeps_mass():
    sys_ = rational_system(3)
    R = 1.1 * sum(np.max(np.abs(g_local(s, P15, np.exp(1j * np.linspace(0, 7, 999))))) for s in sys_)
    a = rasterize(curve_measure(PrimeSite(2, 2), 1.5), 128, R)
    b = rasterize(curve_measure(PrimeSite(3, 3), 1.5), 128, R)
    ab, ba = convolve(a, b), convolve(b, a)
    assert np.max(np.abs(ab.values - ba.values)) < 1e-10 * ab.values.max()
    assert ab.mass == pytest.approx(1.0, abs=1e-3)


def test_geometry_mismatch():
    with pytest.raises(ContractError):
        l1_distance(GridDensity(np.zeros((8, 8)), 1.0), GridDensity(np.zeros((8, 8)), 2.0))
    with pytest.raises(ContractError):
        sup_distance(GridDensity(np.zeros((8, 8)), 1.0), GridDensity(np.zeros((16, 16)), 1.0))


def test_coarse_frequency_grid_warns():
    # a single site is a curve measure whose transform decays slowly
    d = reconstruct_density(rational_system(2), P15, 16, freq_extent=1.0)
    assert d.meta["boundary_charfn"] > 1e-4
    assert any("coarse" in w for w in d.warnings)


def test_histogram_weak_convergence():
    sys_ = rational_system(20)
    ref = reconstruct_density(sys_, P15, 64)
    for seed in (1, 2, 3):
        small = l1_distance(histogram(sys_, P15, 100_000, seed, 64, ref.extent), ref)
        big = l1_distance(histogram(sys_, P15, 1_000_000, seed, 64, ref.extent), ref)
        assert big < small


def test_increment_scaling_is_second_order():
    # appending a mean-zero site of radius ~ (ln N)^2 N^-sigma moves the density at second
    # order, so sup increments track (ln N)^4 N^(-2 sigma) with a near-constant ratio
    ys = [19, 23, 29, 31, 37, 41, 43, 47]
    steps, dens = uniform_convergence_probe(NumberField.rationals(), P15, ys, 256)
    ratios = [s.sup_diff / (math.log(s.added_norms[0]) ** 4 * s.added_norms[0] ** -3.0) for s in steps]
    assert max(ratios) / min(ratios) < 1.25
    assert all(abs(d.mass - 1) < 0.01 for d in dens)
