import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import gaussian
from xnls.errors import XnlsError
from xnls.grid import (
    Field2D,
    GridSpec,
    boundary_mass_fraction,
    free_propagate,
    grad_l2,
    gradient,
    holder_half_seminorm,
    integrate,
    laplacian,
    lp_norm,
    mass,
    norms,
    radial_sample,
    w14_norm,
)


class TestGridSpec:
    def test_axes_and_cell_size(self):
        g = GridSpec(64, 16.0)
        ax = g.axes()
        assert g.h == 0.25
        assert ax[0] == -8.0
        assert ax[-1] == pytest.approx(8.0 - 0.25)
        # the origin is an actual cell center
        assert ax[g.n // 2] == 0.0

    @pytest.mark.parametrize("n,l", [(15, 10.0), (13, 10.0), (8, 10.0)])
    def test_rejects_bad_n(self, n, l):
        with pytest.raises(XnlsError):
            GridSpec(n, l)

    def test_rejects_nonpositive_side(self):
        with pytest.raises(XnlsError):
            GridSpec(64, -1.0)

    def test_rejects_coarse_cells(self):
        with pytest.raises(XnlsError):
            GridSpec(16, 40.0)  # h = 2.5 >= 1


class TestField2D:
    def test_shape_mismatch(self, grid64):
        with pytest.raises(XnlsError):
            Field2D(grid64, np.zeros((32, 32)))

    def test_rejects_non_finite(self, grid64):
        bad = np.zeros((64, 64), dtype=np.complex128)
        bad[3, 5] = np.nan
        with pytest.raises(XnlsError):
            Field2D(grid64, bad)

    def test_arithmetic(self, grid64):
        u = gaussian(grid64)
        v = 2.0 * u - u
        assert np.allclose(v.values, u.values)
        assert np.allclose(u.conj().values, np.conj(u.values))

    def test_grid_mismatch(self, grid64, grid128):
        with pytest.raises(XnlsError):
            gaussian(grid64) + gaussian(grid128)


class TestNorms:
    def test_zero_field(self, grid64):
        r = norms(Field2D.zero(grid64))
        assert r.mass == 0 and r.grad_l2 == 0 and r.h1 == 0
        assert r.linf == 0 and r.holder_half == 0 and r.w14 == 0

    def test_gaussian_mass_and_gradient(self, grid128):
        # closed forms: integral e^{-2r^2} = pi/2, integral |grad|^2 = pi
        u = gaussian(grid128)
        assert mass(u) == pytest.approx(np.pi / 2, rel=1e-12)
        assert grad_l2(u) ** 2 == pytest.approx(np.pi, rel=1e-12)

    def test_gaussian_w14(self, grid128):
        # integral |u|^4 = pi/4; integral |grad u|^4 = pi/2
        u = gaussian(grid128)
        expect = (np.pi / 4) ** 0.25 + (np.pi / 2) ** 0.25
        assert w14_norm(u) == pytest.approx(expect, rel=1e-10)

    def test_h1_and_h_mu(self, grid128):
        u = gaussian(grid128, c=0.7)
        r = norms(u, mu=1.0)
        assert r.h1 == pytest.approx(np.sqrt(r.grad_l2**2 + r.mass), rel=1e-14)
        assert r.h_mu == pytest.approx(r.h1, rel=1e-14)
        half = norms(u, mu=0.5)
        assert half.h_mu < r.h_mu

    def test_rejects_bad_mu(self, grid64):
        with pytest.raises(XnlsError):
            norms(gaussian(grid64), mu=0.0)

    def test_lp_rejects_bad_exponent(self, grid64):
        with pytest.raises(XnlsError):
            lp_norm(gaussian(grid64), 0.5)

    def test_holder_scaling_and_constant(self, grid64):
        c = Field2D(grid64, np.full((64, 64), 2.3, dtype=np.complex128))
        assert holder_half_seminorm(c) == 0.0
        u = gaussian(grid64)
        assert holder_half_seminorm(3.0 * u) == pytest.approx(
            3.0 * holder_half_seminorm(u), rel=1e-12
        )

    def test_plancherel(self, grid128):
        import scipy.fft as sfft

        u = gaussian(grid128, c=0.9)
        uh = sfft.fft2(u.values)
        spectral = grid128.h**2 * np.sum(np.abs(uh) ** 2) / grid128.n**2
        assert mass(u) == pytest.approx(spectral, rel=1e-12)


class TestFreePropagate:
    def test_identity_at_zero(self, grid64):
        u = gaussian(grid64)
        assert free_propagate(u, 0.0) is u

    def test_rejects_non_finite_time(self, grid64):
        with pytest.raises(XnlsError):
            free_propagate(gaussian(grid64), np.inf)

    def test_gaussian_closed_form(self, grid128):
        # e^{it Lap} e^{-r^2} = (1 + 4it)^{-1} e^{-r^2 / (1 + 4it)}
        t = 0.3
        u = free_propagate(gaussian(grid128), t)
        xx, yy = grid128.meshgrid()
        z = 1 + 4j * t
        exact = np.exp(-(xx**2 + yy**2) / z) / z
        assert np.max(np.abs(u.values - exact)) < 1e-12

    @given(
        s=st.floats(-1.0, 1.0, allow_nan=False),
        t=st.floats(-1.0, 1.0, allow_nan=False),
    )
    def test_group_property(self, s, t):
        g = GridSpec(32, 10.0)
        u = gaussian(g)
        a = free_propagate(free_propagate(u, s), t)
        b = free_propagate(u, s + t)
        assert np.max(np.abs(a.values - b.values)) < 1e-12

    @given(t=st.floats(-5.0, 5.0, allow_nan=False))
    def test_norm_conservation(self, t):
        g = GridSpec(32, 10.0)
        u = gaussian(g, c=0.8)
        v = free_propagate(u, t)
        assert mass(v) == pytest.approx(mass(u), rel=1e-12)
        assert grad_l2(v) == pytest.approx(grad_l2(u), rel=1e-12)


class TestDerivatives:
    def test_gradient_of_plane_wave(self, grid64):
        # e^{i k x} with k a torus mode differentiates exactly
        k = 2 * np.pi * 3 / grid64.l
        u = Field2D.from_function(grid64, lambda x, y: np.exp(1j * k * x))
        ux, uy = gradient(u)
        assert np.max(np.abs(ux - 1j * k * u.values)) < 1e-10
        assert np.max(np.abs(uy)) < 1e-10

    def test_laplacian_of_plane_wave(self, grid64):
        k = 2 * np.pi * 3 / grid64.l
        u = Field2D.from_function(grid64, lambda x, y: np.exp(1j * k * (x + y)))
        lap = laplacian(u)
        assert np.max(np.abs(lap.values + 2 * k**2 * u.values)) < 1e-9


class TestRadialSample:
    def test_constant(self, grid64):
        c = Field2D(grid64, np.full((64, 64), 1.5 + 0.5j))
        for _, v in radial_sample(c, [0.5, 2.0, 7.0]):
            assert v == pytest.approx(1.5 + 0.5j, rel=1e-13)

    def test_gaussian_value(self, grid128_tight):
        u = gaussian(grid128_tight)
        [(r, v)] = radial_sample(u, 1.0)
        assert abs(v - np.exp(-1.0)) < 1e-3

    def test_out_of_range(self, grid64):
        with pytest.raises(XnlsError):
            radial_sample(gaussian(grid64), 10.0)
        with pytest.raises(XnlsError):
            radial_sample(gaussian(grid64), 0.0)


class TestBoundaryMass:
    def test_zero_field(self, grid64):
        assert boundary_mass_fraction(Field2D.zero(grid64)) == 0.0

    def test_localized_gaussian(self, grid64):
        # shell starts at |x|_inf = 8 on this grid; e^{-2*64} is nothing
        assert boundary_mass_fraction(gaussian(grid64)) < 1e-10

    def test_uniform_fraction(self, grid128):
        u = Field2D(grid128, np.ones((128, 128), dtype=np.complex128))
        frac = boundary_mass_fraction(u)
        assert abs(frac - 0.36) < 2.0 / grid128.n

    def test_integrate_constant(self, grid64):
        vals = np.full((64, 64), 2.0)
        assert integrate(grid64, vals) == pytest.approx(
            2.0 * grid64.l**2, rel=1e-13
        )
