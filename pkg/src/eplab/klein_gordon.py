"""Linear Klein-Gordon propagation, decay fits and the quadratic terms.

The linear part of the second-order form is (d_tt - Laplacian + m0) w = 0.
On the periodic box it is solved exactly mode by mode, so a decay
measurement carries no time-stepping error at all.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainTooSmallError, InconsistencyError, ParameterDomainError
from .nonlocal_ops import CartesianGrid, embed_radial, riesz_apply, swirl_field
from .params import DerivedConstants, PhysicalParams, density_excess, h_of_m
from .radial import RadialGrid, ddr, grad_even, radial_divergence, radial_laplacian, vector_laplacian

# fields below this fraction of their maximum count as "no data"
SUPPORT_FRACTION = 1e-10


@dataclass
class KGState:
    w: np.ndarray
    wt: np.ndarray
    mass_param: float
    time: float = 0.0

    def __post_init__(self):
        if not self.mass_param > 0:
            raise ParameterDomainError("mass_param must be positive")
        if not (np.all(np.isfinite(self.w)) and np.all(np.isfinite(self.wt))):
            raise DataError("KG fields must be finite")


@dataclass
class DecayFit:
    exponent: float
    amplitude: float
    residual: float
    window: tuple


def data_radius(fields, grid: CartesianGrid) -> float:
    """Largest distance from the origin where any field exceeds the support threshold."""
    scale = max(float(np.max(np.abs(f))) for f in fields)
    if scale == 0.0:
        return 0.0
    mask = np.zeros(grid.radius.shape, dtype=bool)
    for f in fields:
        mask |= np.abs(f) > SUPPORT_FRACTION * scale
    return float(np.max(grid.radius[mask]))


def check_light_cone(w0, w1, t: float, grid: CartesianGrid) -> None:
    """Raise if signal from the data could reach the box edge by time t.

    Group velocities are below 1, so data inside radius R stays inside
    R + t up to exponentially small tails.
    """
    reach = data_radius((w0, w1), grid) + abs(t)
    half = 0.5 * grid.box_length
    if reach > half:
        raise DomainTooSmallError(
            f"data radius plus t = {reach:.4g} exceeds half the box ({half:.4g}); "
            "the periodic images would interfere"
        )


def _omega(m0: float, grid: CartesianGrid) -> np.ndarray:
    return np.sqrt(m0 + grid.k_squared)


def kg_linear_propagate(w0, w1, t: float, m0: float, grid: CartesianGrid, check: bool = True):
    """Exact solution (w(t), w_t(t)) of the linear KG equation on the periodic box."""
    if not m0 > 0:
        raise ParameterDomainError("m0 must be positive")
    w0 = np.asarray(w0, dtype=float)
    w1 = np.asarray(w1, dtype=float)
    if check:
        check_light_cone(w0, w1, t, grid)
    om = _omega(m0, grid)
    a, b = np.fft.fft2(w0), np.fft.fft2(w1)
    c, s = np.cos(om * t), np.sin(om * t)
    w = np.fft.ifft2(c * a + s / om * b).real
    wt = np.fft.ifft2(-om * s * a + c * b).real
    return w, wt


def kg_energy(w, wt, m0: float, grid: CartesianGrid) -> float:
    """Discrete energy sum(wt^2 + |grad w|^2 + m0 w^2) dx^2 through Parseval."""
    a, b = np.fft.fft2(w), np.fft.fft2(wt)
    dens = np.abs(b) ** 2 + (grid.k_squared + m0) * np.abs(a) ** 2
    return float(np.sum(dens) * grid.spacing**2 / w.size)


def kg_state_at(state: KGState, t: float, grid: CartesianGrid, check: bool = True) -> KGState:
    w, wt = kg_linear_propagate(state.w, state.wt, t, state.mass_param, grid, check=check)
    return KGState(w, wt, state.mass_param, state.time + t)


def decay_series(w0, w1, times, m0: float, grid: CartesianGrid):
    """sup |w(t)| at each requested time, after one light-cone check."""
    times = np.asarray(times, dtype=float)
    check_light_cone(w0, w1, float(np.max(times)), grid)
    a, b = np.fft.fft2(w0), np.fft.fft2(w1)
    om = _omega(m0, grid)
    out = np.empty(times.size)
    for i, t in enumerate(times):
        w = np.fft.ifft2(np.cos(om * t) * a + np.sin(om * t) / om * b).real
        out[i] = np.max(np.abs(w))
    return out


def fit_decay_exponent(times, sup_norms, window=(20.0, 120.0)) -> DecayFit:
    """Least-squares slope of log sup-norm against log(1 + t) inside the window."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(sup_norms, dtype=float)
    if t.shape != y.shape:
        raise DataError("times and sup_norms differ in length")
    t_min, t_max = float(window[0]), float(window[1])
    if t_min < 1.0 or t_max <= t_min:
        raise DataError(f"bad fit window [{t_min}, {t_max}]")
    if np.any(np.diff(t) <= 0):
        raise DataError("times must be strictly increasing")
    sel = (t >= t_min) & (t <= t_max)
    if np.count_nonzero(sel) < 8:
        raise DataError("fewer than 8 samples inside the fit window")
    if np.any(y[sel] <= 0):
        raise DataError("sup norms must be positive to take logarithms")
    x = np.log1p(t[sel])
    ly = np.log(y[sel])
    slope, intercept = np.polyfit(x, ly, 1)
    resid = ly - (slope * x + intercept)
    return DecayFit(
        exponent=float(-slope),
        amplitude=float(np.exp(intercept)),
        residual=float(np.sqrt(np.mean(resid**2))),
        window=(t_min, t_max),
    )


def gaussian_kg_data(grid: CartesianGrid, sigma: float = 1.0, amplitude: float = 1.0):
    """w0 = amplitude exp(-r^2 / (2 sigma^2)), w1 = 0."""
    w0 = amplitude * np.exp(-0.5 * (grid.radius / sigma) ** 2)
    return w0, np.zeros_like(w0)


def kg_nonlocal_term(radii, m, v, params: PhysicalParams, consts: DerivedConstants,
                     grid: CartesianGrid, swirl: float = 0.0, swirl_width: float = 1.0):
    """Compare -m0 (m - h(m)) v with its Riesz-projected form on the box.

    radii, m, v are samples of the radial profiles (v odd, v(0) = 0).  With
    swirl != 0 a divergence-free component of relative size swirl is added to
    the flux before both terms are formed; the projection removes it, so the
    two terms stop agreeing.  Returns (local, nonlocal, rel_diff).
    """
    radii = np.asarray(radii, dtype=float)
    flux = density_excess(np.asarray(m, dtype=float), params.gamma) * np.asarray(v, dtype=float)
    eta = embed_radial(radii, flux, grid)
    if swirl:
        s = swirl_field(grid, swirl_width)
        size = eta.sup_norm() / s.sup_norm()
        eta = eta + s.scaled(swirl * size)
    local = eta.scaled(-consts.m0)
    nonlocal_ = riesz_apply(eta, grid).scaled(-consts.m0)
    scale = local.sup_norm()
    diff = (local - nonlocal_).sup_norm()
    if scale == 0.0:
        if nonlocal_.sup_norm() > 1e-14:
            raise InconsistencyError("zero local term but nonzero projected term")
        return local, nonlocal_, 0.0
    return local, nonlocal_, diff / scale


def kg_quadratic_rhs(m, v, dm, dv, grid: RadialGrid, params: PhysicalParams,
                     consts: DerivedConstants):
    """Right-hand sides of (d_tt - Laplacian + m0)(m, v) in radial form.

    dm, dv are the time derivatives of m and v (e.g. from normalized_rhs).
    The Riesz term is replaced by its local value -m0 (m - h(m)) v.
    """
    m, v, dm, dv = (np.asarray(a, dtype=float) for a in (m, v, dm, dv))
    dr = grid.dr
    a = 0.5 * (params.gamma - 1.0)
    m0 = consts.m0
    h = h_of_m(m, params.gamma)
    m_r, v_r = grad_even(m, grid), ddr(v, dr, -1)
    dm_r, dv_r = grad_even(dm, grid), ddr(dv, dr, -1)
    div_v = radial_divergence(v, grid)
    div_dv = radial_divergence(dv, grid)

    n1 = v * m_r + a * m * div_v  # even
    n2 = v * v_r + a * m * m_r  # odd
    n1_t = dv * m_r + v * dm_r + a * dm * div_v + a * m * div_dv
    n2_t = dv * v_r + v * dv_r + a * dm * m_r + a * m * dm_r

    rhs_m = radial_divergence(n2, grid) - n1_t + m0 * h
    rhs_v = grad_even(n1, grid) - n2_t - m0 * (m - h) * v
    return rhs_m, rhs_v


def kg_linear_operator(m, v, dm_tt, dv_tt, grid: RadialGrid, consts: DerivedConstants):
    """(d_tt - Laplacian + m0) applied to radial (m, v) given second time derivatives."""
    lm = dm_tt - radial_laplacian(m, grid) + consts.m0 * m
    lv = dv_tt - vector_laplacian(v, grid) + consts.m0 * v
    return lm, lv
