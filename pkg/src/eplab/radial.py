"""Method-of-lines solver for the radially symmetric Euler-Poisson system.

Two formulations share one cell-centred grid r_j = (j + 1/2) dr with point
values at the centres:

* primal (n, u, E), with the continuity equation in conservative form;
* normalized (m, v, g) in the Klein-Gordon variables, with the local
  radial field law dg/dtau = -n0 (n/n0) v in place of the Riesz term.

Spatial operators are fourth order.  Away from the origin they are the
usual central differences.  The first few rows are a summation-by-parts
closure: the gradient G of even fields and the divergence D of odd fields
satisfy H D = -G^T H for a positive diagonal quadrature H, which makes the
linear acoustic part exactly energy conserving.  Plain parity-folded
central stencils break that identity at r = 0 and grow a spurious mode
localised at the origin.  D telescopes, so the H-weighted excess mass is
conserved to roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.fft import dct, dst, idct, idst

from .errors import InstabilityError, NeutralityError, ParameterDomainError, VacuumError
from .params import (
    VACUUM_FRACTION,
    DerivedConstants,
    PhysicalParams,
    density_excess,
    derive_constants,
    from_normalized,
    to_normalized,
)

FIELD_MODES = ("dynamic", "gauss", "off")
_FIELD_ALIASES = {"gauss-constraint": "gauss"}

# fourth-order central first derivative, offsets -2..2
_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0

# ---------------------------------------------------------------------------
# summation-by-parts closure at the origin
#
# Everything here is in index units (dr = 1, r_j = j + 1/2).  Rows
# 0..ROWS-1 of Q = H G and the weights H_0..H_{ROWS-1} are free; all other
# rows are r_i times the standard stencil.  Constraints: G exact on 1, r^2,
# r^4 and D = -H^-1 Q^T exact on v = r.  The remaining freedom minimises
# the error of D on v = r^3 with a small pull towards the standard stencil.

_CLOSURE_ROWS = 4
_CLOSURE_COLS = 6
# fade length of the origin offset correction, as a fraction of r_max
_OFFSET_FADE = 0.125


def _folded_gradient(n: int) -> np.ndarray:
    """Dense standard fourth-order gradient of an even field, index units."""
    G = np.zeros((n, n))
    for i in range(n):
        for off, c in zip(range(-2, 3), _D1):
            j = i + off
            if c == 0.0:
                continue
            if j < 0:
                j = -j - 1
            if j < n:
                G[i, j] += c
    return G


@lru_cache(maxsize=1)
def _origin_closure(reg: float = 1e-3):
    rows, cols = _CLOSURE_ROWS, _CLOSURE_COLS
    n = 4 * cols
    r = np.arange(n) + 0.5
    qfix = r[:, None] * _folded_gradient(n)
    qfix[:rows] = 0.0
    idx = [(i, c) for i in range(rows) for c in range(cols)]
    nq = len(idx)
    nx = nq + rows

    def grad_rows(powers):
        eqs, rhs = [], []
        for i in range(rows):
            for p in powers:
                a = np.zeros(nx)
                for t, (ii, c) in enumerate(idx):
                    if ii == i:
                        a[t] = r[c] ** p
                a[nq + i] = -p * r[i] ** (p - 1) if p else 0.0
                eqs.append(a)
                rhs.append(0.0)
        return eqs, rhs

    def div_rows(q):
        # -sum_i Q_ij r_i^q = (q + 1) r_j^(q - 1) H_j for every touched column
        eqs, rhs = [], []
        for j in range(cols + 3):
            a = np.zeros(nx)
            for t, (i, c) in enumerate(idx):
                if c == j:
                    a[t] = -r[i] ** q
            b = float(qfix[:, j] @ r**q)
            if j < rows:
                a[nq + j] = -(q + 1) * r[j] ** (q - 1)
            else:
                b += (q + 1) * r[j] ** q
            eqs.append(a)
            rhs.append(b)
        return eqs, rhs

    e1, b1 = grad_rows((0, 2, 4))
    e2, b2 = div_rows(1)
    e3, b3 = div_rows(3)
    Ae, be = np.array(e1 + e2), np.array(b1 + b2)
    A3, b3 = np.array(e3), np.array(b3)
    qstd = r[:, None] * _folded_gradient(n)
    xs = np.array([qstd[i, c] for i, c in idx] + list(r[:rows]))
    kkt = np.block([
        [2.0 * (A3.T @ A3 + reg * np.eye(nx)), Ae.T],
        [Ae, np.zeros((Ae.shape[0], Ae.shape[0]))],
    ])
    rhs = np.concatenate([2.0 * (A3.T @ b3 + reg * xs), be])
    # the exactness rows are redundant, so the KKT system is singular but consistent
    x = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:nx]
    qb = np.zeros((rows, cols))
    for t, (i, c) in enumerate(idx):
        qb[i, c] = x[t]
    hb = x[nq:]
    if np.any(hb <= 0):
        raise ArithmeticError("origin closure produced a non-positive weight")
    return qb, hb


@lru_cache(maxsize=16)
def _sbp_operators(n: int):
    """(G, D, H) in index units for n cells: sparse gradient, divergence, weights."""
    qb, hb = _origin_closure()
    rows, cols = qb.shape
    r = np.arange(n) + 0.5
    H = r.copy()
    H[:rows] = hb
    # standard rows i >= rows never touch ghosts, so no folding needed there
    data, ri, ci = [], [], []
    for i in range(rows):
        for c in range(cols):
            data.append(qb[i, c])
            ri.append(i)
            ci.append(c)
    for off, c in zip(range(-2, 3), _D1):
        if c == 0.0:
            continue
        i = np.arange(rows, n)
        j = i + off
        ok = j < n
        data.extend(r[i[ok]] * c)
        ri.extend(i[ok])
        ci.extend(j[ok])
    Q = sparse.csr_matrix((data, (ri, ci)), shape=(n, n))
    Hinv = sparse.diags(1.0 / H)
    G = (Hinv @ Q).tocsr()
    D = (-(Hinv @ Q.T)).tocsr()
    return G, D, H


@lru_cache(maxsize=1)
def _inner_face_weights():
    """Weights on cells 0..5 giving int_0^{r_k} r f dr exactly for f = 1, r^2, r^4, r^6 (k = 1..4)."""
    r = np.arange(6) + 0.5
    powers = (0, 2, 4, 6)
    A = np.array([r**p for p in powers])
    out = np.zeros((_CLOSURE_ROWS, 6))
    for k in range(1, _CLOSURE_ROWS + 1):
        b = np.array([k ** (p + 2) / (p + 2) for p in powers])
        out[k - 1] = np.linalg.lstsq(A, b, rcond=None)[0]
    return out


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class RadialGrid:
    num_cells: int
    r_max: float

    def __post_init__(self):
        if self.num_cells < 64:
            raise ParameterDomainError(f"num_cells must be >= 64, got {self.num_cells}")
        if not self.r_max > 0:
            raise ParameterDomainError("r_max must be positive")

    @property
    def dr(self) -> float:
        return self.r_max / self.num_cells

    @cached_property
    def centers(self) -> np.ndarray:
        return (np.arange(self.num_cells) + 0.5) * self.dr

    @cached_property
    def faces(self) -> np.ndarray:
        return np.arange(self.num_cells + 1) * self.dr

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature for int f r dr: r_j dr except near the origin (fourth order)."""
        return _sbp_operators(self.num_cells)[2] * self.dr**2


@dataclass
class PrimalState:
    """Point values of n, u and E at cell centres."""

    time: float
    n: np.ndarray
    u: np.ndarray
    E: np.ndarray

    def copy(self) -> "PrimalState":
        return PrimalState(self.time, self.n.copy(), self.u.copy(), self.E.copy())


@dataclass
class NormalizedState:
    """Point values of m, v and g = d psi/dr; time is tau = c0 t."""

    time: float
    m: np.ndarray
    v: np.ndarray
    g: np.ndarray

    def copy(self) -> "NormalizedState":
        return NormalizedState(self.time, self.m.copy(), self.v.copy(), self.g.copy())


@dataclass
class SolverConfig:
    params: PhysicalParams
    grid: RadialGrid
    t_end: float
    cfl_number: float = 0.4
    field_mode: str = "gauss"
    filter_on: bool = True
    diagnostics_stride: int = 10
    fixed_dt: float | None = None
    blowup_factor: float = 50.0
    blowup_grid_slope: float = 0.5

    def __post_init__(self):
        self.field_mode = _FIELD_ALIASES.get(self.field_mode, self.field_mode)
        if self.field_mode not in FIELD_MODES:
            raise ParameterDomainError(f"unknown field_mode {self.field_mode!r}")
        if not 0 < self.cfl_number <= 0.9:
            raise ParameterDomainError(f"cfl_number must be in (0, 0.9], got {self.cfl_number}")
        if not self.t_end > 0:
            raise ParameterDomainError("t_end must be positive")
        if self.diagnostics_stride < 1:
            raise ParameterDomainError("diagnostics_stride must be >= 1")
        self.params.validate()


@dataclass
class Diagnostics:
    time: float
    excess_mass: float
    energy: float
    sup_density_pert: float
    sup_velocity: float
    max_grad_u: float
    max_grad_n: float
    sup_E: float


DIAGNOSTIC_COLUMNS = tuple(Diagnostics.__dataclass_fields__)


@dataclass
class RunResult:
    status: str  # completed | blowup_detected | nan_detected | vacuum
    diagnostics: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    final_state: object = None
    steps: int = 0
    message: str = ""

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(d, name) for d in self.diagnostics])


# ---------------------------------------------------------------------------
# stencils


def _pad(a: np.ndarray, parity: int) -> np.ndarray:
    """Two ghost cells on each side: mirrored with the given parity at the
    origin, zero past r_max."""
    out = np.empty(a.size + 4)
    out[2:-2] = a
    out[1] = parity * a[0]
    out[0] = parity * a[1]
    out[-2:] = 0.0
    return out


def ddr(a: np.ndarray, dr: float, parity: int) -> np.ndarray:
    """Fourth-order central first derivative with parity ghosts (used for
    advection of odd fields and for the monitors)."""
    p = _pad(a, parity)
    return (p[:-4] - 8.0 * p[1:-3] + 8.0 * p[3:-1] - p[4:]) / (12.0 * dr)


def d2dr2(a: np.ndarray, dr: float, parity: int) -> np.ndarray:
    p = _pad(a, parity)
    return (-p[:-4] + 16.0 * p[1:-3] - 30.0 * p[2:-2] + 16.0 * p[3:-1] - p[4:]) / (12.0 * dr**2)


def grad_even(f: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """d/dr of an even perturbation field (summation-by-parts gradient)."""
    return _sbp_operators(grid.num_cells)[0] @ f / grid.dr


def radial_divergence(v: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """(1/r) d/dr (r v) of an odd field; the adjoint of -grad_even under grid.weights."""
    return _sbp_operators(grid.num_cells)[1] @ v / grid.dr


def radial_laplacian(f: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Laplacian of an even radial scalar, div(grad f)."""
    return radial_divergence(grad_even(f, grid), grid)


def vector_laplacian(v: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Laplacian of the radial vector field v(r) x/r, i.e. grad(div v)."""
    return grad_even(radial_divergence(v, grid), grid)


# cubic extrapolation in s = r**2 from s = 1, 4, 9, 16 (units dr**2) to s = 0
def _q0_weights() -> np.ndarray:
    s = np.array([1.0, 4.0, 9.0, 16.0])
    w = np.empty(4)
    for i in range(4):
        others = np.delete(s, i)
        w[i] = np.prod(-others) / np.prod(s[i] - others)
    return w


_Q0_WEIGHTS = _q0_weights()


def field_from_faces(p: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """(1/r) p(r) at cell centres from face values of an even p with p(0) = 0.

    Interpolates the smooth quotient q = p / r**2 (even, finite at the
    origin) and multiplies back by r, so the result is fourth order right
    down to the first cell.  Linear in p.
    """
    rf = grid.faces
    q = np.empty_like(p)
    q[1:] = p[1:] / rf[1:] ** 2
    q[0] = _Q0_WEIGHTS @ q[1:5]
    e = np.empty(q.size + 4)
    e[2:-2] = q
    e[1] = q[1]
    e[0] = q[2]
    # past r_max p is constant
    e[-2:] = p[-1] / (grid.r_max + grid.dr * np.array([1.0, 2.0])) ** 2
    qc = (-e[1:-4] + 9.0 * e[2:-3] + 9.0 * e[3:-2] - e[4:-1]) / 16.0
    return grid.centers * qc


def cumulative_charge(f: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """p_k = int_0^{r_k} f s ds on faces from point values of an even f.

    Partial sums of grid.weights plus the local Euler-Maclaurin end terms
    dr^2/24 g' - 7 dr^4/5760 g''' with g = r f; faces next to the origin
    use dedicated weights.  The last face equals sum(weights * f) exactly.
    """
    n = grid.num_cells
    dr = grid.dr
    p = np.empty(n + 1)
    p[0] = 0.0
    np.cumsum(grid.weights * f, out=p[1:])
    # g = r f in index units, odd through the origin, zero past r_max
    g = (np.arange(n) + 0.5) * f
    e = np.zeros(n + 6)
    e[3:-3] = g
    e[:3] = -g[2::-1]
    # face k sits between padded cells k+2 and k+3
    k = np.arange(n + 1)
    a, b, c, d = e[k + 1], e[k + 2], e[k + 3], e[k + 4]
    g1 = (a - 27.0 * b + 27.0 * c - d) / 24.0
    g3 = -a + 3.0 * b - 3.0 * c + d
    p += dr**2 * (g1 / 24.0 + 7.0 / 5760.0 * g3)
    rows = _CLOSURE_ROWS
    inner = dr**2 * (_inner_face_weights() @ f[:6])
    # the closure weights leave an O(dr^4) constant offset in the partial sums;
    # fade it out smoothly so the total stays sum(weights * f)
    offset = p[rows] - inner[-1]
    p[1:] -= offset * np.exp(-((grid.faces[1:] / (_OFFSET_FADE * grid.r_max)) ** 2))
    p[0] = 0.0
    p[1:rows + 1] = inner
    p[-1] = float(np.sum(grid.weights * f))
    return p


def check_neutral(dn: np.ndarray, grid: RadialGrid, tol: float = 1e-8) -> None:
    w = grid.weights
    net = float(np.sum(w * dn))
    scale = float(np.sum(w * np.abs(dn)))
    if abs(net) > tol * (scale + 1e-300):
        raise NeutralityError(
            f"net charge {2 * math.pi * net:.3e} exceeds {tol:g} of total |charge| "
            f"{2 * math.pi * scale:.3e}"
        )


def gauss_field(n: np.ndarray, grid: RadialGrid, params: PhysicalParams, check: bool = True) -> np.ndarray:
    """E(r) = (kappa / r) int_0^r (n - n0) s ds at cell centres."""
    dn = np.asarray(n, dtype=float) - params.n0
    if check:
        check_neutral(dn, grid)
    return params.kappa * field_from_faces(cumulative_charge(dn, grid), grid)


def gauss_field_normalized(m: np.ndarray, grid: RadialGrid, params: PhysicalParams) -> np.ndarray:
    """g(r) = (n0 / r) int_0^r (m - h(m)) s ds."""
    p = cumulative_charge(density_excess(m, params.gamma), grid)
    return params.n0 * field_from_faces(p, grid)


# ---------------------------------------------------------------------------
# right-hand sides


def primal_rhs(state: PrimalState, params: PhysicalParams, config: SolverConfig | None = None,
               *, grid: RadialGrid | None = None, field_mode: str | None = None):
    """(dn/dt, du/dt, dE/dt) for the primal system.

    In gauss mode E is rebuilt from n and dE/dt is returned as zero; in
    dynamic mode dE/dt is the Gauss field of dn/dt, the discrete form of
    -kappa n u that keeps Gauss's law exactly; off means E = 0 (pure Euler).
    """
    mode = field_mode or (config.field_mode if config else "gauss")
    mode = _FIELD_ALIASES.get(mode, mode)
    grid = grid or config.grid
    n0 = params.n0
    n, u = state.n, state.u
    if not np.all(n > VACUUM_FRACTION * n0):
        raise VacuumError("density reached vacuum threshold")

    dn_dt = -radial_divergence(n * u, grid)
    if mode == "gauss":
        E = params.kappa * field_from_faces(cumulative_charge(n - n0, grid), grid)
        dE_dt = np.zeros_like(E)
    elif mode == "dynamic":
        E = state.E
        dE_dt = params.kappa * field_from_faces(cumulative_charge(dn_dt, grid), grid)
    else:
        E = np.zeros_like(u)
        dE_dt = np.zeros_like(u)

    g = params.gamma
    pressure_coef = params.entropy_const_A * g / params.mass_me
    du_dt = (
        -u * ddr(u, grid.dr, -1)
        - pressure_coef * n ** (g - 2.0) * grad_even(n - n0, grid)
        + (params.charge_e / params.mass_me) * E
    )
    out = (dn_dt, du_dt, dE_dt)
    if not all(np.all(np.isfinite(a)) for a in out):
        raise InstabilityError("non-finite value in primal right-hand side")
    return out


def normalized_rhs(state: NormalizedState, params: PhysicalParams, consts: DerivedConstants,
                   grid: RadialGrid, field_mode: str = "dynamic"):
    """(dm/dtau, dv/dtau, dg/dtau) with the local radial field law."""
    mode = _FIELD_ALIASES.get(field_mode, field_mode)
    m, v = state.m, state.v
    a = 0.5 * (params.gamma - 1.0)
    excess = density_excess(m, params.gamma)  # raises VacuumError outside domain
    m_r = grad_even(m, grid)
    v_r = ddr(v, grid.dr, -1)
    div_v = radial_divergence(v, grid)

    if mode == "gauss":
        g = params.n0 * field_from_faces(cumulative_charge(excess, grid), grid)
        dg = np.zeros_like(g)
    elif mode == "dynamic":
        g = state.g
        dg = -params.n0 * v - params.n0 * excess * v
    else:
        g = np.zeros_like(m)
        dg = np.zeros_like(m)

    dm = -div_v - v * m_r - a * m * div_v
    dv = -m_r - v * v_r - a * m * m_r + g / consts.c0**2
    out = (dm, dv, dg)
    if not all(np.all(np.isfinite(x)) for x in out):
        raise InstabilityError("non-finite value in normalized right-hand side")
    return out


# ---------------------------------------------------------------------------
# time stepping


def cfl_dt(state, grid: RadialGrid, params: PhysicalParams, cfl_number: float) -> float:
    """Largest stable step cfl * dr / max(|u| + c(n)), in the state's own time unit."""
    if isinstance(state, PrimalState):
        if not np.all(state.n > 0):
            raise VacuumError("density reached vacuum threshold")
        g = params.gamma
        c = np.sqrt(params.entropy_const_A * g * state.n ** (g - 1.0) / params.mass_me)
        speed = np.max(np.abs(state.u) + c)
    else:
        a = 0.5 * (params.gamma - 1.0)
        speed = np.max(np.abs(state.v) + np.abs(1.0 + a * state.m))
    return cfl_number * grid.dr / float(speed)


def _filter_weights(n: int, shift: int) -> np.ndarray:
    """Order-8 exponential damping of the top third of cosine/sine modes."""
    eta = (np.arange(n) + shift) / n
    cut = 2.0 / 3.0
    w = np.ones(n)
    hi = eta > cut
    w[hi] = np.exp(-36.0 * ((eta[hi] - cut) / (1.0 - cut)) ** 8)
    return w


def _filter_even(a: np.ndarray) -> np.ndarray:
    return idct(dct(a, type=2, norm="ortho") * _filter_weights(a.size, 0), type=2, norm="ortho")


def _filter_mass_exact(a: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Even filter that keeps sum(weights * a).

    The cosine filter keeps the plain sum only; the weighted defect is put
    back in proportion to |removed part|, so the fix stays where the filter
    acted and is never larger than the filter's own change.
    """
    f = _filter_even(a)
    d = a - f
    scale = float(np.sum(weights * np.abs(d)))
    if scale > 0.0:
        f += float(np.sum(weights * d)) / scale * np.abs(d)
    return f


def _filter_odd(a: np.ndarray) -> np.ndarray:
    return idst(dst(a, type=2, norm="ortho") * _filter_weights(a.size, 1), type=2, norm="ortho")


def _rhs_for(state, config: SolverConfig, consts: DerivedConstants):
    if isinstance(state, PrimalState):
        return lambda s: primal_rhs(s, config.params, config)
    return lambda s: normalized_rhs(s, config.params, consts, config.grid, config.field_mode)


def _fields(state):
    if isinstance(state, PrimalState):
        return state.n, state.u, state.E
    return state.m, state.v, state.g


def _rebuild(state, time, arrays):
    if isinstance(state, PrimalState):
        return PrimalState(time, *arrays)
    return NormalizedState(time, *arrays)


def _sync_field(state, config: SolverConfig):
    """Keep the stored field consistent with the constraint in gauss/off modes."""
    if config.field_mode == "gauss":
        if isinstance(state, PrimalState):
            state.E = gauss_field(state.n, config.grid, config.params, check=False)
        else:
            state.g = gauss_field_normalized(state.m, config.grid, config.params)
    elif config.field_mode == "off":
        if isinstance(state, PrimalState):
            state.E = np.zeros_like(state.E)
        else:
            state.g = np.zeros_like(state.g)
    return state


def step_rk4(state, dt: float, config: SolverConfig, consts: DerivedConstants | None = None,
             forcing: Callable | None = None):
    """One classical RK4 step, then the optional high-mode filter.

    forcing(t, state) may return extra source terms (used by manufactured
    solution tests).
    """
    consts = consts or derive_constants(config.params)
    rhs = _rhs_for(state, config, consts)
    t0 = state.time
    y0 = _fields(state)

    def f(t, ys):
        s = _rebuild(state, t, ys)
        k = rhs(s)
        if forcing is not None:
            k = tuple(a + b for a, b in zip(k, forcing(t, s)))
        return k

    k1 = f(t0, y0)
    k2 = f(t0 + 0.5 * dt, [y + 0.5 * dt * k for y, k in zip(y0, k1)])
    k3 = f(t0 + 0.5 * dt, [y + 0.5 * dt * k for y, k in zip(y0, k2)])
    k4 = f(t0 + dt, [y + dt * k for y, k in zip(y0, k3)])
    y1 = [y + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d) for y, a, b, c, d in zip(y0, k1, k2, k3, k4)]

    if config.filter_on:
        if isinstance(state, PrimalState):
            n0 = config.params.n0
            raw = y1[0]
            y1[0] = n0 + _filter_mass_exact(raw - n0, config.grid.weights)
            if config.field_mode == "dynamic":
                # the field follows the filtered charge through Gauss's law
                change = cumulative_charge(y1[0] - raw, config.grid)
                y1[2] = y1[2] + config.params.kappa * field_from_faces(change, config.grid)
        else:
            y1[0] = _filter_even(y1[0])
        y1[1] = _filter_odd(y1[1])

    if not all(np.all(np.isfinite(y)) for y in y1):
        raise InstabilityError(f"non-finite state after step at t={t0 + dt:.6g}")
    return _sync_field(_rebuild(state, t0 + dt, y1), config)


# ---------------------------------------------------------------------------
# monitors and diagnostics


def shock_monitor(state, grid: RadialGrid, params: PhysicalParams | None = None):
    """(max |dr u|, max |dr n|); for normalized states the same on (v, m)."""
    dr = grid.dr
    if isinstance(state, PrimalState):
        n0 = params.n0 if params else 1.0
        return (float(np.max(np.abs(ddr(state.u, dr, -1)))),
                float(np.max(np.abs(ddr(state.n - n0, dr, 1)))))
    return float(np.max(np.abs(ddr(state.v, dr, -1)))), float(np.max(np.abs(ddr(state.m, dr, 1))))


def radial_integral(f: np.ndarray, grid: RadialGrid) -> float:
    """2 pi int_0^rmax f r dr with the grid quadrature (fourth order)."""
    return 2.0 * math.pi * float(np.sum(grid.weights * f))


def energy_density(n, u, E, params: PhysicalParams):
    g = params.gamma
    n0 = params.n0
    internal = params.entropy_const_A * (n**g - n0**g - g * n0 ** (g - 1.0) * (n - n0)) / (g - 1.0)
    kinetic = 0.5 * params.mass_me * n * u**2
    field_e = 0.5 * params.charge_e / params.kappa * E**2
    return kinetic + internal + field_e


def to_physical(state, params: PhysicalParams, grid: RadialGrid, consts: DerivedConstants | None = None):
    """Point values (n, u, E) of either state kind."""
    if isinstance(state, PrimalState):
        return state.n, state.u, state.E
    consts = consts or derive_constants(params)
    n, u = from_normalized(state.m, state.v, params, consts)
    return n, u, state.g


def diagnostics(state, params: PhysicalParams, grid: RadialGrid, consts: DerivedConstants | None = None) -> Diagnostics:
    n, u, E = to_physical(state, params, grid, consts)
    if isinstance(state, PrimalState):
        dn = n - params.n0
    else:
        dn = params.n0 * density_excess(state.m, params.gamma)
    return Diagnostics(
        time=float(state.time),
        excess_mass=radial_integral(dn, grid),
        energy=radial_integral(energy_density(n, u, E, params), grid),
        sup_density_pert=float(np.max(np.abs(dn))),
        sup_velocity=float(np.max(np.abs(u))),
        max_grad_u=float(np.max(np.abs(ddr(u, grid.dr, -1)))),
        max_grad_n=float(np.max(np.abs(ddr(dn, grid.dr, 1)))),
        sup_E=float(np.max(np.abs(E))),
    )


# ---------------------------------------------------------------------------
# driver


def run(config: SolverConfig, initial, forcing: Callable | None = None,
        keep_snapshots: bool = True, on_step: Callable | None = None,
        snapshot_stride: int = 0) -> RunResult:
    """Integrate from initial.time to config.t_end (in the state's own time).

    Failures are reported through RunResult.status, never raised.  With
    keep_snapshots the initial and final states are kept, plus every
    snapshot_stride-th step when that is positive.
    """
    params, grid = config.params, config.grid
    consts = derive_constants(params)
    state = _sync_field(initial.copy(), config) if config.field_mode != "dynamic" else initial.copy()
    result = RunResult(status="completed")
    if keep_snapshots:
        result.snapshots.append(state.copy())

    try:
        grad0 = shock_monitor(state, grid, params)[0]
        result.diagnostics.append(diagnostics(state, params, grid, consts))
    except (VacuumError, InstabilityError) as exc:
        result.status = "vacuum" if isinstance(exc, VacuumError) else "nan_detected"
        result.message = str(exc)
        result.final_state = state
        return result
    threshold = max(config.blowup_factor * grad0, config.blowup_grid_slope / grid.dr)

    steps = 0
    t_end = config.t_end
    # guard against an endless sliver of a step from roundoff
    eps = 1e-12 * max(1.0, abs(t_end))
    while state.time < t_end - eps:
        try:
            dt = config.fixed_dt or cfl_dt(state, grid, params, config.cfl_number)
            dt = min(dt, t_end - state.time)
            state = step_rk4(state, dt, config, consts, forcing)
            steps += 1
            if on_step is not None:
                on_step(state)
            grad_u = shock_monitor(state, grid, params)[0]
            if not math.isfinite(grad_u):
                raise InstabilityError("non-finite velocity gradient")
            last = state.time >= t_end - eps
            if steps % config.diagnostics_stride == 0 or last or grad_u > threshold:
                result.diagnostics.append(diagnostics(state, params, grid, consts))
        except VacuumError as exc:
            result.status, result.message = "vacuum", str(exc)
            break
        except InstabilityError as exc:
            result.status, result.message = "nan_detected", str(exc)
            break
        if keep_snapshots and snapshot_stride and steps % snapshot_stride == 0 and not last:
            result.snapshots.append(state.copy())
        if grad_u > threshold:
            result.status = "blowup_detected"
            result.message = (
                f"max|dr u| = {grad_u:.4g} exceeded {threshold:.4g} at t = {state.time:.6g}"
            )
            break

    result.steps = steps
    result.final_state = state
    if keep_snapshots and result.snapshots[-1].time != state.time:
        result.snapshots.append(state.copy())
    return result


# ---------------------------------------------------------------------------
# initial data and conversions


def sample(func: Callable, grid: RadialGrid) -> np.ndarray:
    """func at the cell centres, broadcast to a full profile."""
    return np.asarray(func(grid.centers), dtype=float) * np.ones(grid.num_cells)


def primal_from_profiles(dn_func: Callable, u_func: Callable, grid: RadialGrid,
                         params: PhysicalParams, time: float = 0.0, check: bool = True) -> PrimalState:
    """Primal state with n - n0 = dn_func(r), u = u_func(r), E from Gauss's law."""
    n = params.n0 + sample(dn_func, grid)
    u = sample(u_func, grid)
    E = gauss_field(n, grid, params, check=check)
    return PrimalState(time, n, u, E)


def normalized_from_profiles(dn_func: Callable, u_func: Callable, grid: RadialGrid,
                             params: PhysicalParams, consts: DerivedConstants | None = None,
                             time: float = 0.0) -> NormalizedState:
    consts = consts or derive_constants(params)
    n = params.n0 + sample(dn_func, grid)
    m, v = to_normalized(n, sample(u_func, grid), params, consts)
    g = gauss_field_normalized(m, grid, params)
    return NormalizedState(time, m, v, g)


def primal_to_normalized(state: PrimalState, grid: RadialGrid, params: PhysicalParams,
                         consts: DerivedConstants | None = None) -> NormalizedState:
    """Pointwise change of variables; g = E and tau = c0 t."""
    consts = consts or derive_constants(params)
    m, v = to_normalized(state.n, state.u, params, consts)
    return NormalizedState(state.time * consts.c0, m, v, state.E.copy())


def normalized_to_primal(state: NormalizedState, grid: RadialGrid, params: PhysicalParams,
                         consts: DerivedConstants | None = None) -> PrimalState:
    consts = consts or derive_constants(params)
    n, u = from_normalized(state.m, state.v, params, consts)
    return PrimalState(state.time / consts.c0, n, u, state.g.copy())


def with_t_end(config: SolverConfig, t_end: float) -> SolverConfig:
    return replace(config, t_end=t_end)
