"""Numerical checks of the two reduction lemmas on the periodic box.

Projection check: for gradient fields eta, grad Laplacian^-1 div eta = eta.
Radial check: a radial vector field f(|x|) x/|x| has zero curl.

The gradient fields are written in closed form rather than differentiated
spectrally, so the residual measures the box truncation and not just the
algebra of the Fourier symbols.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nonlocal_ops import (
    CartesianGrid,
    VectorField2D,
    curl2d,
    embed_radial,
    riesz_apply,
    swirl_field,
)

PROJECTION_TOL = 1e-6
CURL_TOL = 1e-6
SWIRL_MIN = 0.05
IDEMPOTENCE_TOL = 1e-8
# doubling must cut the residual by this much unless it is already at the floor
DOUBLING_GAIN = 10.0
RESIDUAL_FLOOR = 1e-11


@dataclass
class LemmaCase:
    name: str
    group: str
    residual: float
    tolerance: float
    expect_below: bool = True

    @property
    def passed(self) -> bool:
        if self.expect_below:
            return self.residual <= self.tolerance
        return self.residual >= self.tolerance

    def line(self) -> str:
        rel = "<=" if self.expect_below else ">="
        tag = "ok" if self.passed else "FAIL"
        note = "" if self.expect_below else " (negative control, expected to fail the identity)"
        return f"{self.group:<11} {self.name:<24} residual {self.residual:.3e} {rel} {self.tolerance:.0e}  {tag}{note}"


@dataclass
class DoublingCase:
    """Residual on a grid and on the grid with twice the points per side."""

    name: str
    coarse: float
    fine: float
    group: str = "radial"

    @property
    def gain(self) -> float:
        return self.coarse / self.fine if self.fine > 0 else float("inf")

    @property
    def passed(self) -> bool:
        return doubling_ok(self.coarse, self.fine)

    def line(self) -> str:
        tag = "ok" if self.passed else "FAIL"
        return (f"{self.group:<11} {self.name + ' x2':<24} residual {self.fine:.3e} gain {self.gain:.1f} "
                f"(needs >= {DOUBLING_GAIN:g} or <= {RESIDUAL_FLOOR:.0e})  {tag}")


@dataclass
class SuiteReport:
    cases: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def lines(self) -> list:
        return [c.line() for c in self.cases]


# ---------------------------------------------------------------------------
# gradient fields: (name, callable (x, y) -> (phi_x, phi_y))


def _gaussian(x, y, x0, y0, sx, sy):
    g = np.exp(-0.5 * ((x - x0) ** 2 / sx**2 + (y - y0) ** 2 / sy**2))
    return -(x - x0) / sx**2 * g, -(y - y0) / sy**2 * g


def _grad_centered(x, y):
    return _gaussian(x, y, 0.0, 0.0, 1.5, 1.5)


def _grad_offset(x, y):
    return _gaussian(x, y, 2.0, -1.0, 1.2, 1.2)


def _grad_anisotropic(x, y):
    return _gaussian(x, y, 0.0, 0.5, 2.0, 1.0)


def _grad_quadrupole(x, y):
    # phi = x y exp(-r^2 / 2)
    g = np.exp(-0.5 * (x**2 + y**2))
    return y * (1.0 - x**2) * g, x * (1.0 - y**2) * g


def _grad_pair(x, y):
    ax, ay = _gaussian(x, y, -2.5, 0.0, 1.0, 1.0)
    bx, by = _gaussian(x, y, 2.0, 2.0, 1.4, 1.4)
    return ax - 0.7 * bx, ay - 0.7 * by


GRADIENT_CASES = (
    ("gaussian", _grad_centered),
    ("offset_gaussian", _grad_offset),
    ("anisotropic_gaussian", _grad_anisotropic),
    ("quadrupole", _grad_quadrupole),
    ("gaussian_pair", _grad_pair),
)


def gradient_field(name: str, grid: CartesianGrid) -> VectorField2D:
    func = dict(GRADIENT_CASES)[name]
    x, y = grid.coords
    return VectorField2D(*func(x, y))


def projection_residual(eta: VectorField2D, grid: CartesianGrid) -> float:
    """||R[eta] - eta||_inf / ||eta||_inf."""
    return (riesz_apply(eta, grid) - eta).sup_norm() / eta.sup_norm()


def swirl_control(grid: CartesianGrid, fraction: float = 0.1) -> VectorField2D:
    """Centred gradient field plus a swirl of relative size `fraction`."""
    eta = gradient_field("gaussian", grid)
    s = swirl_field(grid, 1.5)
    return eta + s.scaled(fraction * eta.sup_norm() / s.sup_norm())


def idempotence_residual(grid: CartesianGrid) -> float:
    """||R[R[eta]] - R[eta]|| / ||R[eta]|| for a field with both components."""
    eta = swirl_control(grid, 1.0)
    once = riesz_apply(eta, grid)
    return (riesz_apply(once, grid) - once).sup_norm() / once.sup_norm()


# ---------------------------------------------------------------------------
# radial profiles f(r), odd through the origin


def _bump(r, width):
    s = np.asarray(r, dtype=float) / width
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


RADIAL_CASES = (
    ("gaussian_w1", lambda r: r * np.exp(-(r**2))),
    ("gaussian_w2", lambda r: r * np.exp(-0.25 * r**2)),
    ("bump_w14", lambda r: r * _bump(r, 14.0)),
    ("bump_w16", lambda r: r * _bump(r, 16.0)),
    ("bump_w18", lambda r: r * _bump(r, 18.0)),
)


def curl_residual(name: str, grid: CartesianGrid, oversample: int = 64) -> float:
    """||curl embed(f)||_inf / ||f||_inf with f sampled `oversample` times finer than the grid.

    The embedded field is exactly radial, so any curl comes from the grid
    failing to resolve it; the jumps in the spline's third derivative are one
    such source, hence the dense radial sampling.
    """
    func = dict(RADIAL_CASES)[name]
    h = grid.spacing / oversample
    r_end = 0.5 * grid.box_length * np.sqrt(2.0)
    radii = np.arange(0.0, r_end + h, h)
    f = func(radii)
    eta = embed_radial(radii, f, grid)
    return float(np.max(np.abs(curl2d(eta, grid))) / np.max(np.abs(f)))


def doubling_ok(coarse: float, fine: float) -> bool:
    return fine <= RESIDUAL_FLOOR or coarse >= DOUBLING_GAIN * fine


# ---------------------------------------------------------------------------
# suites


def projection_suite(n: int = 256, box: float = 40.0, names=None) -> SuiteReport:
    grid = CartesianGrid(n, box)
    report = SuiteReport()
    for name, _ in GRADIENT_CASES:
        if names is None or name in names:
            res = projection_residual(gradient_field(name, grid), grid)
            report.cases.append(LemmaCase(name, "projection", res, PROJECTION_TOL))
    if names is None or "swirl_control" in names:
        res = projection_residual(swirl_control(grid), grid)
        report.cases.append(LemmaCase("swirl_control", "projection", res, SWIRL_MIN, expect_below=False))
    if names is None or "idempotence" in names:
        report.cases.append(LemmaCase("idempotence", "projection", idempotence_residual(grid), IDEMPOTENCE_TOL))
    return report


def radial_suite(n: int = 256, box: float = 40.0, names=None, doubling: bool = True) -> SuiteReport:
    grid = CartesianGrid(n, box)
    fine = CartesianGrid(2 * n, box) if doubling else None
    report = SuiteReport()
    for name, _ in RADIAL_CASES:
        if names is not None and name not in names:
            continue
        res = curl_residual(name, grid)
        report.cases.append(LemmaCase(name, "radial", res, CURL_TOL))
        if fine is not None:
            report.cases.append(DoublingCase(name, res, curl_residual(name, fine)))
    return report


ALL_CASES = tuple(n for n, _ in GRADIENT_CASES) + ("swirl_control", "idempotence") + tuple(
    n for n, _ in RADIAL_CASES
)


def run_all(n: int = 256, box: float = 40.0, names=None, doubling: bool = True) -> SuiteReport:
    report = projection_suite(n, box, names)
    report.cases.extend(radial_suite(n, box, names, doubling).cases)
    return report
