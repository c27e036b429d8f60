import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eplab.errors import NeutralityError, OriginRegularityError, ParameterDomainError
from eplab.nonlocal_ops import (
    CartesianGrid,
    VectorField2D,
    curl2d,
    divergence,
    embed_radial,
    embed_radial_scalar,
    extract_radial,
    gradient,
    laplacian,
    poisson_solve,
    riesz_apply,
    swirl_field,
)


@pytest.fixture(scope="module")
def grid():
    return CartesianGrid(256, 40.0)


def _gaussian_pair(grid, x0, y0, w):
    x, y = grid.coords
    g = np.exp(-((x - x0) ** 2 + (y - y0) ** 2) / w**2)
    return g


class TestGrid:
    @pytest.mark.parametrize("n", [8, 100, 255])
    def test_rejects_bad_size(self, n):
        with pytest.raises(ParameterDomainError):
            CartesianGrid(n, 10.0)

    def test_origin_is_node(self, grid):
        assert grid.radius[128, 128] == 0.0
        assert grid.spacing == pytest.approx(40.0 / 256)


def test_curl_of_swirl_matches_closed_form(grid):
    eta = swirl_field(grid, 1.0)
    r2 = grid.radius**2
    expected = 2.0 * np.exp(-r2) * (1.0 - r2)
    assert np.max(np.abs(curl2d(eta, grid) - expected)) < 1e-10


def test_curl_of_gradient_vanishes(grid):
    f = _gaussian_pair(grid, 1.0, -2.0, 1.5)
    assert np.max(np.abs(curl2d(gradient(f, grid), grid))) < 1e-12


def test_swirl_is_divergence_free(grid):
    assert np.max(np.abs(divergence(swirl_field(grid, 1.3), grid))) < 1e-12


class TestPoisson:
    def test_recovers_gaussian_minus_mean(self, grid):
        phi = _gaussian_pair(grid, 0.5, 0.0, 2.0)
        got = poisson_solve(laplacian(phi, grid), grid)
        want = phi - phi.mean()
        assert np.max(np.abs(got - want)) / np.max(np.abs(want)) <= 1e-8

    def test_zero_source(self, grid):
        assert np.all(poisson_solve(np.zeros((256, 256)), grid) == 0.0)

    def test_net_charge_rejected(self, grid):
        with pytest.raises(NeutralityError):
            poisson_solve(_gaussian_pair(grid, 0.0, 0.0, 1.0), grid)

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.8, 2.5))
    def test_laplacian_of_solution_is_source(self, x0, y0, w):
        g = CartesianGrid(128, 40.0)
        f = _gaussian_pair(g, x0, y0, w)
        rho = laplacian(f, g)
        assert np.max(np.abs(laplacian(poisson_solve(rho, g), g) - rho)) <= 1e-10 * np.max(np.abs(rho))


class TestRiesz:
    def test_gradient_field_is_fixed(self, grid):
        eta = gradient(_gaussian_pair(grid, -1.0, 2.0, 1.7), grid)
        assert (riesz_apply(eta, grid) - eta).sup_norm() / eta.sup_norm() < 1e-12

    def test_swirl_is_annihilated(self, grid):
        s = swirl_field(grid, 1.5)
        assert riesz_apply(s, grid).sup_norm() < 1e-12 * s.sup_norm()

    @given(st.floats(-4, 4), st.floats(-4, 4), st.floats(0.8, 2.0), st.floats(-2, 2))
    def test_idempotent(self, x0, y0, w, twist):
        g = CartesianGrid(128, 40.0)
        eta = gradient(_gaussian_pair(g, x0, y0, w), g) + swirl_field(g, w).scaled(twist)
        once = riesz_apply(eta, g)
        if once.sup_norm() < 1e-300:
            return
        assert (riesz_apply(once, g) - once).sup_norm() <= 1e-8 * once.sup_norm()

    @given(st.floats(-2, 2), st.floats(-2, 2))
    def test_linear(self, a, b):
        g = CartesianGrid(64, 20.0)
        e1 = gradient(_gaussian_pair(g, 1.0, 0.0, 1.0), g) + swirl_field(g, 1.0)
        e2 = swirl_field(g, 2.0)
        lhs = riesz_apply(e1.scaled(a) + e2.scaled(b), g)
        rhs = riesz_apply(e1, g).scaled(a) + riesz_apply(e2, g).scaled(b)
        assert (lhs - rhs).sup_norm() <= 1e-12 * (1.0 + abs(a) + abs(b))


class TestEmbed:
    def test_gaussian_profile_closed_form(self, grid):
        radii = np.linspace(0.0, 28.0, 28 * 256 + 1)
        eta = embed_radial(radii, radii * np.exp(-(radii**2)), grid)
        x, y = grid.coords
        g = np.exp(-(grid.radius**2))
        assert np.max(np.abs(eta.x_component - x * g)) <= 1e-8
        assert np.max(np.abs(eta.y_component - y * g)) <= 1e-8

    def test_nonzero_origin_rejected(self, grid):
        radii = np.linspace(0.0, 10.0, 101)
        with pytest.raises(OriginRegularityError):
            embed_radial(radii, np.ones_like(radii), grid)

    def test_offset_samples_extrapolate_to_origin(self, grid):
        radii = np.linspace(0.05, 20.0, 400)
        eta = embed_radial(radii, radii * np.exp(-(radii**2)), grid)
        assert eta.sup_norm() > 0.0

    def test_offset_samples_with_nonzero_origin_rejected(self, grid):
        radii = np.linspace(0.05, 20.0, 400)
        with pytest.raises(OriginRegularityError):
            embed_radial(radii, 0.01 + radii * np.exp(-(radii**2)), grid)

    def test_zero_past_last_radius(self, grid):
        radii = np.linspace(0.0, 5.0, 501)
        eta = embed_radial(radii, radii * np.exp(-(radii**2)), grid)
        far = grid.radius > 5.0
        assert np.all(eta.x_component[far] == 0.0)

    def test_scalar_embed(self, grid):
        radii = np.linspace(0.0, 28.0, 28 * 256 + 1)
        f = embed_radial_scalar(radii, np.exp(-(radii**2)), grid)
        assert np.max(np.abs(f - np.exp(-(grid.radius**2)))) < 1e-8


class TestExtract:
    def test_constant_field_is_asymmetric(self):
        g = CartesianGrid(64, 20.0)
        ones = np.ones((64, 64))
        _, _, asym = extract_radial(VectorField2D(ones, 0.0 * ones), g)
        assert asym > 0.5

    def test_radial_roundtrip(self):
        g = CartesianGrid(128, 20.0)
        x, y = g.coords
        e = np.exp(-(g.radius**2) / 4.0)
        rad, prof, asym = extract_radial(VectorField2D(x * e, y * e), g)
        assert asym < 1e-12
        np.testing.assert_allclose(prof, rad * np.exp(-(rad**2) / 4.0), atol=1e-12)
