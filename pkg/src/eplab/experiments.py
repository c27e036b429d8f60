"""The experiment families behind the command line, usable without it."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CompatibilityError, DataError, ParameterDomainError
from .io_diag import RunSpec, load_snapshot
from .klein_gordon import DecayFit, decay_series, fit_decay_exponent, gaussian_kg_data
from .nonlocal_ops import CartesianGrid
from .params import derive_constants
from .profiles import normalized_initial, primal_initial
from .radial import (
    NormalizedState,
    PrimalState,
    RunResult,
    SolverConfig,
    normalized_to_primal,
    primal_to_normalized,
    run,
    with_t_end,
)

# exit codes shared with the command line
EXIT_OK = 0
EXIT_BLOWUP = 2
EXIT_USAGE = 3
EXIT_NUMERICAL = 4
EXIT_PRECONDITION = 5

STATUS_EXIT = {
    "completed": EXIT_OK,
    "blowup_detected": EXIT_BLOWUP,
    "nan_detected": EXIT_NUMERICAL,
    "vacuum": EXIT_PRECONDITION,
}

CROSS_CHECK_TOL = 1e-5
# field-on runs must keep max|dr u| within this factor of its initial value
BOUNDED_GRADIENT_FACTOR = 5.0


class PreconditionError(ParameterDomainError):
    """The experiment cannot say anything with these inputs."""


def initial_state(spec: RunSpec):
    """Initial state in the formulation the config asks for."""
    cfg = spec.config
    params, grid = cfg.params, cfg.grid
    if spec.initial.profile == "file":
        state, _, _ = load_snapshot(spec.initial.snapshot_path, params, grid)
    elif spec.formulation == "normalized":
        return normalized_initial(spec.initial, params, grid)
    else:
        return primal_initial(spec.initial, params, grid)
    want_primal = spec.formulation == "primal"
    if want_primal and isinstance(state, NormalizedState):
        state = normalized_to_primal(state, grid, params)
    elif not want_primal and isinstance(state, PrimalState):
        state = primal_to_normalized(state, grid, params)
    return state


def run_spec(spec: RunSpec, state=None, keep_snapshots: bool = True) -> RunResult:
    state = initial_state(spec) if state is None else state
    return run(spec.config, state, keep_snapshots=keep_snapshots, snapshot_stride=spec.snapshot_stride)


# ---------------------------------------------------------------------------
# shock / no-shock contrast


@dataclass
class ShockDemo:
    field_off: RunResult
    field_on: RunResult
    t_end: float
    filter_off: RunResult | None = None

    @property
    def initial_gradient(self) -> float:
        return float(self.field_on.series("max_grad_u")[0])

    @property
    def trip_time(self) -> float | None:
        if self.field_off.status != "blowup_detected":
            return None
        return float(self.field_off.final_state.time)

    @property
    def gradient_ratio(self) -> float:
        return float(np.max(self.field_on.series("max_grad_u")) / self.initial_gradient)

    @property
    def contrast(self) -> bool:
        return self.trip_time is not None and self.field_on.status == "completed"

    @property
    def bounded(self) -> bool:
        return self.field_on.status == "completed" and self.gradient_ratio <= BOUNDED_GRADIENT_FACTOR

    def decay_fit(self, window=(40.0, 200.0)) -> DecayFit:
        return fit_decay_exponent(self.field_on.series("time"), self.field_on.series("sup_density_pert"), window)

    def exit_code(self) -> int:
        if self.contrast:
            return EXIT_OK
        if self.field_on.status != "completed":
            return STATUS_EXIT[self.field_on.status]
        # the pure Euler run never steepened: nothing was demonstrated
        return EXIT_PRECONDITION

    def summary(self) -> str:
        off, on = self.field_off, self.field_on
        lines = [f"initial max|dr u|: {self.initial_gradient:.6g}"]
        if self.trip_time is not None:
            lines.append(f"field off: blow-up monitor tripped at t = {self.trip_time:.6g} ({off.message})")
        else:
            lines.append(f"field off: {off.status} at t = {off.final_state.time:.6g}, no blow-up detected")
        lines.append(
            f"field on: {on.status} at t = {on.final_state.time:.6g}, "
            f"max|dr u| stayed within {self.gradient_ratio:.3f} x its initial value "
            f"(certificate {'holds' if self.bounded else 'fails'} at {BOUNDED_GRADIENT_FACTOR:g} x)"
        )
        if self.filter_off is not None:
            lines.append(f"field on, filter off: {self.filter_off.status} at t = {self.filter_off.final_state.time:.6g}")
        try:
            fit = self.decay_fit((min(40.0, 0.2 * self.t_end), self.t_end))
            lines.append(
                f"field on: sup|n - n0| ~ (1 + t)^-{fit.exponent:.3f} over [{fit.window[0]:g}, {fit.window[1]:g}]"
                f" (rms {fit.residual:.3g})"
            )
        except DataError:
            pass
        lines.append("contrast: " + ("shown" if self.contrast else "not shown"))
        return "\n".join(lines) + "\n"


def shock_demo(spec: RunSpec, filter_off_check: bool = False) -> ShockDemo:
    """Run the same data with the field off and on (and optionally on, unfiltered)."""
    if spec.initial.profile != "file" and spec.initial.amplitude == 0.0 and spec.initial.velocity_amplitude == 0.0:
        raise PreconditionError("shock-demo needs a nonzero perturbation")
    state = initial_state(spec)
    cfg = spec.config
    off = run(_with_mode(cfg, "off"), state, keep_snapshots=False)
    mode = cfg.field_mode if cfg.field_mode != "off" else "gauss"
    on = run(_with_mode(cfg, mode), state, keep_snapshots=False)
    unfiltered = None
    if filter_off_check:
        unfiltered = run(_with_mode(cfg, mode, filter_on=False), state, keep_snapshots=False)
    return ShockDemo(off, on, cfg.t_end, unfiltered)


def _with_mode(cfg: SolverConfig, mode: str, filter_on: bool | None = None) -> SolverConfig:
    return replace(cfg, field_mode=mode, filter_on=cfg.filter_on if filter_on is None else filter_on)


# ---------------------------------------------------------------------------
# primal vs normalized


@dataclass
class CrossCheck:
    times: list = field(default_factory=list)
    differences: list = field(default_factory=list)
    paper_units: bool = True
    statuses: tuple = ("completed", "completed")

    @property
    def max_difference(self) -> float:
        return max(self.differences) if self.differences else float("nan")

    def exit_code(self) -> int:
        for s in self.statuses:
            if s != "completed":
                return STATUS_EXIT[s]
        if self.max_difference <= CROSS_CHECK_TOL:
            return EXIT_OK
        # the normalized system assumes A = m_e = e = kappa = 1
        return EXIT_PRECONDITION if not self.paper_units else EXIT_NUMERICAL


def cross_check(spec: RunSpec, checkpoints: int = 4) -> CrossCheck:
    """Evolve both formulations from the same data, compare in primal variables.

    Normalized time runs c0 times faster; comparisons happen at physical
    times t_end * k / checkpoints.
    """
    cfg = spec.config
    params, grid = cfg.params, cfg.grid
    consts = derive_constants(params)
    primal_spec = RunSpec(cfg, spec.initial, "primal")
    sp = initial_state(primal_spec)
    if not isinstance(sp, PrimalState):
        raise CompatibilityError("cross-check needs primal initial data")
    sn = primal_to_normalized(sp, grid, params, consts)
    out = CrossCheck(paper_units=params.is_paper_units)
    for k in range(1, checkpoints + 1):
        t = cfg.t_end * k / checkpoints
        rp = run(with_t_end(cfg, t), sp, keep_snapshots=False)
        rn = run(with_t_end(cfg, t * consts.c0), sn, keep_snapshots=False)
        sp, sn = rp.final_state, rn.final_state
        if rp.status != "completed" or rn.status != "completed":
            out.statuses = (rp.status, rn.status)
            break
        back = normalized_to_primal(sn, grid, params, consts)
        diff = max(float(np.max(np.abs(a - b))) for a, b in ((sp.n, back.n), (sp.u, back.u), (sp.E, back.E)))
        out.times.append(t)
        out.differences.append(diff)
    return out


# ---------------------------------------------------------------------------
# linear decay


@dataclass
class DecayRun:
    times: np.ndarray
    sup_norms: np.ndarray
    fit: DecayFit

    @property
    def in_range(self) -> bool:
        return 0.85 <= self.fit.exponent <= 1.15


def kg_decay(n: int = 1024, box: float = 320.0, m0: float = 1.0, t_max: float = 120.0,
             window=(20.0, 120.0), samples: int = 64, sigma: float = 1.0) -> DecayRun:
    if not (1.0 <= window[0] < window[1] <= t_max):
        raise DataError(f"fit window [{window[0]}, {window[1]}] must lie inside [1, {t_max}]")
    grid = CartesianGrid(n, box)
    w0, w1 = gaussian_kg_data(grid, sigma)
    times = np.geomspace(1.0, t_max, samples)
    sups = decay_series(w0, w1, times, m0, grid)
    return DecayRun(times, sups, fit_decay_exponent(times, sups, window))
