import math

import numpy as np
import pytest

from pnhybrid import grid as gr
from pnhybrid import harmonics as sh


def test_grid_shape_and_wavenumbers():
    g = gr.SpatialGrid(dim=2, modes=5)
    assert g.shape == (5, 5, 1)
    assert g.kmax == 2
    assert list(g.wavenumbers(0)) == [-2, -1, 0, 1, 2]
    assert list(g.wavenumbers(2)) == [0]
    assert g.index_of((1, -2, 0)) == (3, 0, 0)


def test_grid_validation():
    with pytest.raises(ValueError):
        gr.SpatialGrid(dim=0, modes=3)
    with pytest.raises(ValueError):
        gr.SpatialGrid(dim=1, modes=4)
    g = gr.SpatialGrid(dim=1, modes=3)
    with pytest.raises(ValueError):
        g.index_of((2, 0, 0))  # beyond the band
    with pytest.raises(ValueError):
        g.index_of((0, 1, 0))  # inactive axis


def test_term_validation_and_time_factor():
    tm = gr.term({(1, 0, 0): 0.5}, [1.0, 0.0, 0.0, 2.0], time_poly=(1.0, 3.0), time_exp=-2.0)
    assert tm.angular_degree == 1
    assert tm.time_value(0.0) == pytest.approx(1.0)
    assert tm.time_value(0.5) == pytest.approx((1.0 + 1.5) * math.exp(-1.0), rel=1e-15)
    with pytest.raises(ValueError):
        gr.term({(0, 0, 0): 1.0}, [1.0, 2.0])  # length 2 is not a square


def test_grid_for_terms():
    tms = [gr.term({(2, 0, 0): 1.0}, [1.0]), gr.term({(0, -1, 0): 1.0}, [1.0])]
    g = gr.grid_for(tms)
    assert g.dim == 2
    assert g.modes == 5


def test_moment_field_from_terms_and_norm():
    # cos(x1) as half-amplitude modes at k = +-1, isotropic in angle.
    g = gr.SpatialGrid(dim=1, modes=3)
    tms = [gr.isotropic_term({(1, 0, 0): 0.5, (-1, 0, 0): 0.5})]
    f = gr.moment_field(g, 3, tms)
    # ||cos(x1)||^2 over [0,2pi) is pi; the angular factor 1 contributes 4pi.
    expect = math.sqrt(math.pi * 4.0 * math.pi)
    assert gr.l2_norm(f) == pytest.approx(expect, rel=1e-14)
    assert gr.reality_residual(f) == 0.0


def test_moment_field_band_rejection():
    g = gr.SpatialGrid(dim=1, modes=3)
    with pytest.raises(ValueError):
        gr.moment_field(g, 1, [gr.isotropic_term({(2, 0, 0): 1.0})])
    with pytest.raises(ValueError):
        # angular degree 2 does not fit N = 1
        gr.moment_field(g, 1, [gr.term({(0, 0, 0): 1.0}, [0.0] * 9)])


def test_spatial_derivative_matches_physical():
    g = gr.SpatialGrid(dim=1, modes=5)
    tms = [gr.isotropic_term({(2, 0, 0): 0.5, (-2, 0, 0): 0.5})]  # cos(2 x1)
    f = gr.moment_field(g, 1, tms)
    df = gr.spatial_derivative(f, 0)
    x = np.array([[0.3, 0.0, 0.0], [1.7, 0.0, 0.0]])
    vals = gr.physical_samples(df, x)[:, 0] / math.sqrt(4.0 * math.pi)
    # d/dx cos(2x) = -2 sin(2x); moment (0,0) carries sqrt(4pi) x the average.
    assert np.allclose(vals.real, -2.0 * np.sin(2.0 * x[:, 0]), atol=1e-13)
    assert np.max(np.abs(vals.imag)) < 1e-13
    # Derivative along an inactive axis vanishes.
    assert gr.l2_norm(gr.spatial_derivative(f, 2)) == 0.0


def test_l2_norm_nodal_matches_moment():
    rng = np.random.default_rng(2)
    g = gr.SpatialGrid(dim=1, modes=3)
    N = 4
    quad = sh.build_sphere_quadrature(N + 1)
    coeffs = rng.standard_normal(g.shape + (sh.n_moments(N),)) * (1.0 + 0.0j)
    f = gr.MomentField(g, N, coeffs)
    nodal = gr.evaluate_field(f, quad)
    assert gr.l2_norm(nodal) == pytest.approx(gr.l2_norm(f), rel=1e-13)
    back = gr.project_field(nodal, N)
    assert np.max(np.abs(back.coeffs - f.coeffs)) < 1e-12


def test_hs_seminorm_weights():
    g = gr.SpatialGrid(dim=1, modes=1)
    N = 3
    coeffs = np.zeros(g.shape + (sh.n_moments(N),), dtype=complex)
    coeffs[0, 0, 0, sh.ordinal(2, -1)] = 1.0
    f = gr.MomentField(g, N, coeffs)
    vol = math.sqrt(2.0 * math.pi)
    assert gr.hs_seminorm(f, 0) == pytest.approx(vol, rel=1e-14)
    assert gr.hs_seminorm(f, 2) == pytest.approx(vol * 2.5**2, rel=1e-14)
    # Degree below s drops out.
    coeffs2 = np.zeros_like(coeffs)
    coeffs2[0, 0, 0, sh.ordinal(1, 0)] = 1.0
    f2 = gr.MomentField(g, N, coeffs2)
    assert gr.hs_seminorm(f2, 2) == 0.0


def test_hrs_seminorm_counts_ordered_tuples():
    # For f = cos(x1) in d = 2, the derivative tuples over (x1, x2) of order 2
    # contribute only (1,1); the seminorm equals |d^2 f|.
    g = gr.SpatialGrid(dim=2, modes=3)
    tms = [gr.isotropic_term({(1, 0, 0): 0.5, (-1, 0, 0): 0.5})]
    f = gr.moment_field(g, 2, tms)
    base = gr.hs_seminorm(f, 0)
    assert gr.hrs_seminorm(f, 0, 0) == pytest.approx(base, rel=1e-14)
    assert gr.hrs_seminorm(f, 1, 0) == pytest.approx(base, rel=1e-14)
    assert gr.hrs_seminorm(f, 2, 0) == pytest.approx(base, rel=1e-14)
    # A mode with k = (1, 1, 0): order-1 tuples give 2 axes, each |k_i| = 1.
    tms2 = [gr.isotropic_term({(1, 1, 0): 1.0})]
    f2 = gr.moment_field(g, 2, tms2)
    b2 = gr.hs_seminorm(f2, 0)
    assert gr.hrs_seminorm(f2, 1, 0) == pytest.approx(2.0 * b2, rel=1e-14)
    # Order 2: tuples (1,1),(1,2),(2,1),(2,2) all give |k_i k_j| = 1.
    assert gr.hrs_seminorm(f2, 2, 0) == pytest.approx(4.0 * b2, rel=1e-14)


def test_scalar_flux_of_isotropic_field():
    g = gr.SpatialGrid(dim=1, modes=3)
    tms = [gr.isotropic_term({(1, 0, 0): 0.5, (-1, 0, 0): 0.5})]
    f = gr.moment_field(g, 1, tms)
    flux = gr.scalar_flux(f)
    # The spherical average of the constant 1 is 1, so flux = cos coefficients.
    assert flux[g.index_of((1, 0, 0))] == pytest.approx(0.5, rel=1e-14)
    assert flux[g.index_of((0, 0, 0))] == 0.0


def test_nodal_error_norm_zero_for_matching_fields():
    rng = np.random.default_rng(8)
    g = gr.SpatialGrid(dim=1, modes=3)
    N = 3
    quad = sh.build_sphere_quadrature(N + 3)
    coeffs = rng.standard_normal(g.shape + (sh.n_moments(N),)) + 0.0j
    f = gr.MomentField(g, N, coeffs)
    nodal = gr.evaluate_field(f, quad)
    assert gr.nodal_error_norm(nodal, f) < 1e-12
    g2 = gr.MomentField(g, N, coeffs * 1.25)
    expect = 0.25 * gr.l2_norm(f)
    assert gr.nodal_error_norm(nodal, g2) == pytest.approx(expect, rel=1e-12)


def test_field_arithmetic_checks_discretization():
    g = gr.SpatialGrid(dim=1, modes=3)
    f = gr.zero_moment_field(g, 2)
    h = gr.zero_moment_field(g, 3)
    with pytest.raises(ValueError):
        _ = f + h
    t = f.truncate(3)
    assert t.N == 3
    assert (t + h).N == 3
