"""Spectral operators on a square periodic box standing in for the plane.

Everything is computed through Fourier symbols: gradient, divergence and
curl use i*k, the inverse Laplacian uses -1/|k|**2, and the Riesz
projection grad (Laplacian)^-1 div uses k (k . eta_hat) / |k|**2.  The
k = 0 mode of both non-local operators is mapped to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import NeutralityError, OriginRegularityError, ParameterDomainError


@dataclass(frozen=True)
class CartesianGrid:
    num_points_per_side: int
    box_length: float

    def __post_init__(self):
        n = self.num_points_per_side
        if n < 16 or n & (n - 1):
            raise ParameterDomainError(
                f"num_points_per_side must be a power of two >= 16, got {n}"
            )
        if not self.box_length > 0:
            raise ParameterDomainError("box_length must be positive")

    @property
    def spacing(self) -> float:
        return self.box_length / self.num_points_per_side

    @cached_property
    def axis(self) -> np.ndarray:
        n = self.num_points_per_side
        return (np.arange(n) - n // 2) * self.spacing

    @cached_property
    def coords(self):
        """(X, Y) with indexing='ij'; the origin is a grid node."""
        return np.meshgrid(self.axis, self.axis, indexing="ij")

    @cached_property
    def radius(self) -> np.ndarray:
        x, y = self.coords
        return np.hypot(x, y)

    @cached_property
    def wavenumbers(self):
        n = self.num_points_per_side
        k = 2.0 * np.pi * np.fft.fftfreq(n, d=self.spacing)
        return np.meshgrid(k, k, indexing="ij")

    @cached_property
    def k_squared(self) -> np.ndarray:
        kx, ky = self.wavenumbers
        return kx**2 + ky**2


@dataclass
class VectorField2D:
    x_component: np.ndarray
    y_component: np.ndarray

    def sup_norm(self) -> float:
        return float(np.max(np.hypot(self.x_component, self.y_component)))

    def __add__(self, other: "VectorField2D") -> "VectorField2D":
        return VectorField2D(self.x_component + other.x_component, self.y_component + other.y_component)

    def __sub__(self, other: "VectorField2D") -> "VectorField2D":
        return VectorField2D(self.x_component - other.x_component, self.y_component - other.y_component)

    def scaled(self, c: float) -> "VectorField2D":
        return VectorField2D(c * self.x_component, c * self.y_component)


# Scalar fields are plain 2D arrays.


def _fft(a):
    return np.fft.fft2(a)


def _ifft(a):
    return np.fft.ifft2(a).real


def gradient(f: np.ndarray, grid: CartesianGrid) -> VectorField2D:
    kx, ky = grid.wavenumbers
    fh = _fft(f)
    return VectorField2D(_ifft(1j * kx * fh), _ifft(1j * ky * fh))


def divergence(eta: VectorField2D, grid: CartesianGrid) -> np.ndarray:
    kx, ky = grid.wavenumbers
    return _ifft(1j * kx * _fft(eta.x_component) + 1j * ky * _fft(eta.y_component))


def curl2d(eta: VectorField2D, grid: CartesianGrid) -> np.ndarray:
    """Scalar curl d_x eta_y - d_y eta_x."""
    kx, ky = grid.wavenumbers
    return _ifft(1j * kx * _fft(eta.y_component) - 1j * ky * _fft(eta.x_component))


def laplacian(f: np.ndarray, grid: CartesianGrid) -> np.ndarray:
    return _ifft(-grid.k_squared * _fft(f))


def _inverse_k_squared(grid: CartesianGrid) -> np.ndarray:
    k2 = grid.k_squared
    inv = np.zeros_like(k2)
    nz = k2 > 0
    inv[nz] = 1.0 / k2[nz]
    return inv


def poisson_solve(rho: np.ndarray, grid: CartesianGrid, neutrality_tol: float = 1e-8) -> np.ndarray:
    """Zero-mean phi with Laplacian(phi) = rho.  rho must be net neutral."""
    rho = np.asarray(rho, dtype=float)
    scale = float(np.max(np.abs(rho))) if rho.size else 0.0
    if scale == 0.0:
        return np.zeros_like(rho)
    mean = float(np.mean(rho))
    if abs(mean) > neutrality_tol * scale:
        raise NeutralityError(
            f"mean charge {mean:.3e} exceeds {neutrality_tol:g} * sup {scale:.3e}"
        )
    return _ifft(-_inverse_k_squared(grid) * _fft(rho))


def riesz_apply(eta: VectorField2D, grid: CartesianGrid) -> VectorField2D:
    """grad Laplacian^-1 div: the projection onto gradient fields."""
    kx, ky = grid.wavenumbers
    ex, ey = _fft(eta.x_component), _fft(eta.y_component)
    proj = (kx * ex + ky * ey) * _inverse_k_squared(grid)
    return VectorField2D(_ifft(kx * proj), _ifft(ky * proj))


def _odd_spline(radii, values):
    """Cubic spline of an odd radial profile, mirrored through r = 0.

    Mirroring makes the natural spline exactly odd, so near the origin each
    piece is a*r + c*r**3 and f(r) x/r is a polynomial in x, y.
    """
    r = np.asarray(radii, dtype=float)
    f = np.asarray(values, dtype=float)
    if r[0] == 0.0:
        rr = np.concatenate([-r[:0:-1], r])
        ff = np.concatenate([-f[:0:-1], f])
    else:
        rr = np.concatenate([-r[::-1], r])
        ff = np.concatenate([-f[::-1], f])
    return CubicSpline(rr, ff, bc_type="natural")


def _even_spline(radii, values):
    r = np.asarray(radii, dtype=float)
    f = np.asarray(values, dtype=float)
    if r[0] == 0.0:
        rr = np.concatenate([-r[:0:-1], r])
        ff = np.concatenate([f[:0:-1], f])
    else:
        rr = np.concatenate([-r[::-1], r])
        ff = np.concatenate([f[::-1], f])
    return CubicSpline(rr, ff, bc_type="natural")


# origin check when the samples start off r = 0
_EXTRAPOLATION_TOL = 1e-4


def embed_radial(radii, values, grid: CartesianGrid, origin_tol: float = 1e-8) -> VectorField2D:
    """eta(x) = f(|x|) x/|x| from samples of f, extended by zero past the last radius."""
    r = np.asarray(radii, dtype=float)
    f = np.asarray(values, dtype=float)
    scale = max(float(np.max(np.abs(f))), 1.0) if f.size else 1.0
    if r[0] == 0.0:
        f0, tol = f[0], origin_tol
    else:
        # intercept of b + a r + c r^3 through the first three samples; exact
        # for odd cubics, so only the fifth-order term leaks into b
        f0 = np.linalg.solve(np.vander(r[:3], 4)[:, [3, 2, 0]], f[:3])[0]
        tol = max(origin_tol, _EXTRAPOLATION_TOL)
    if abs(f0) > tol * scale:
        raise OriginRegularityError(f"radial vector profile has f(0) = {f0:.3e} != 0")
    spline = _odd_spline(r, f)
    rad = grid.radius
    inside = rad <= r[-1]
    prof = np.zeros_like(rad)
    prof[inside] = spline(rad[inside])
    # f(r)/r is finite at r = 0 because the spline is odd
    ratio = np.zeros_like(rad)
    nz = rad > 0
    ratio[nz] = prof[nz] / rad[nz]
    ratio[~nz] = spline(0.0, 1)
    x, y = grid.coords
    return VectorField2D(ratio * x, ratio * y)


def embed_radial_scalar(radii, values, grid: CartesianGrid) -> np.ndarray:
    """Scalar f(|x|) from samples of an even profile, zero past the last radius."""
    r = np.asarray(radii, dtype=float)
    spline = _even_spline(r, values)
    rad = grid.radius
    out = np.zeros_like(rad)
    inside = rad <= r[-1]
    out[inside] = spline(rad[inside])
    return out


def swirl_field(grid: CartesianGrid, width: float = 1.0) -> VectorField2D:
    """Divergence-free (-y, x) exp(-r^2/width^2), used as a negative control."""
    x, y = grid.coords
    g = np.exp(-(grid.radius / width) ** 2)
    return VectorField2D(-y * g, x * g)


def extract_radial(eta: VectorField2D, grid: CartesianGrid):
    """Ring-averaged radial component and an angular asymmetry measure.

    A "ring" is the set of grid nodes sharing exactly the same distance from
    the origin (i**2 + j**2 fixed), so ring statistics see angular variation
    only.  Rings are kept up to half the box side.  Returns
    (ring_radii, profile, asymmetry); asymmetry is the largest per-ring
    standard deviation of the radial component over the sup norm of eta.
    """
    n = grid.num_points_per_side
    h = grid.spacing
    idx = np.arange(n) - n // 2
    key = (idx[:, None] ** 2 + idx[None, :] ** 2).ravel()
    x, y = grid.coords
    rad = grid.radius
    with np.errstate(invalid="ignore", divide="ignore"):
        radial = np.where(rad > 0, (eta.x_component * x + eta.y_component * y) / rad, 0.0).ravel()
    kmax = (n // 2) ** 2
    keep = key <= kmax
    key, radial = key[keep], radial[keep]
    counts = np.bincount(key, minlength=kmax + 1)
    sums = np.bincount(key, weights=radial, minlength=kmax + 1)
    present = np.nonzero(counts)[0]
    mean_all = np.zeros(kmax + 1)
    mean_all[present] = sums[present] / counts[present]
    dev = radial - mean_all[key]
    var = np.bincount(key, weights=dev**2, minlength=kmax + 1)[present] / counts[present]
    sup = eta.sup_norm()
    asym = float(np.sqrt(np.max(var)) / sup) if sup > 0 else 0.0
    return np.sqrt(present.astype(float)) * h, mean_all[present], asym
