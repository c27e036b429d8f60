"""The ten acceptance criteria at their stated tolerances.

Each test records one PASS/FAIL line, printed again in the terminal summary.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from manufactured import spatial_ratios, temporal_ratios

from eplab.experiments import cross_check, initial_state, kg_decay, shock_demo
from eplab.io_diag import load_config
from eplab.klein_gordon import kg_nonlocal_term
from eplab.lemmas import LemmaCase, projection_suite, radial_suite
from eplab.nonlocal_ops import CartesianGrid
from eplab.params import derive_constants, from_normalized, h_of_m, paper_units, to_normalized
from eplab.radial import run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def timed(func, *args, **kwargs):
    start = time.perf_counter()
    out = func(*args, **kwargs)
    return out, time.perf_counter() - start


@pytest.fixture(scope="module")
def demo():
    return timed(shock_demo, load_config(CONFIGS / "shock_demo.ini"), filter_off_check=True)


def test_c01_projection_lemma(acceptance):
    report, secs = timed(projection_suite, 256, 40.0)
    gradients = [c for c in report.cases if c.expect_below and c.name != "idempotence"]
    swirl = next(c for c in report.cases if c.name == "swirl_control")
    worst = max(c.residual for c in gradients)
    ok = len(gradients) == 5 and worst <= 1e-6 and swirl.residual >= 0.05 and secs < 5
    acceptance(1, ok, f"max gradient-field residual {worst:.2e} (<= 1e-6), swirl {swirl.residual:.3f} (>= 0.05), "
                      f"{secs:.1f} s (< 5)")
    assert ok


def test_c02_radial_curl_lemma(acceptance):
    report, secs = timed(radial_suite, 256, 40.0)
    single = [c for c in report.cases if isinstance(c, LemmaCase)]
    doubled = [c for c in report.cases if not isinstance(c, LemmaCase)]
    worst = max(c.residual for c in single)
    gains = ", ".join(f"{c.gain:.0f}x" if c.fine > 1e-11 else f"floor {c.fine:.0e}" for c in doubled)
    ok = len(single) == 5 and worst <= 1e-6 and all(c.passed for c in doubled) and secs < 10
    acceptance(2, ok, f"max curl residual {worst:.2e} (<= 1e-6), doubling {gains}, {secs:.1f} s (< 10)")
    assert ok


def test_c03_locality(acceptance):
    p = paper_units(3.0)
    c = derive_constants(p)
    start = time.perf_counter()
    grid = CartesianGrid(256, 40.0)
    radii = np.arange(0.0, 30.0, grid.spacing / 64)
    m, v = 0.1 * np.exp(-(radii**2)), 0.1 * radii * np.exp(-(radii**2))
    rel = kg_nonlocal_term(radii, m, v, p, c, grid)[2]
    rel_swirl = kg_nonlocal_term(radii, m, v, p, c, grid, swirl=0.3)[2]
    secs = time.perf_counter() - start
    ok = rel <= 1e-5 and rel_swirl >= 0.05 and secs < 5
    acceptance(3, ok, f"rel_diff {rel:.2e} (<= 1e-5), swirl control {rel_swirl:.3f} (>= 0.05), {secs:.1f} s (< 5)")
    assert ok


def test_c04_linear_decay(acceptance):
    res, secs = timed(kg_decay, 1024, 320.0, 1.0, 120.0, (20.0, 120.0))
    fit = res.fit
    ok = 0.85 <= fit.exponent <= 1.15 and fit.residual <= 0.05 and secs < 60
    acceptance(4, ok, f"exponent {fit.exponent:.3f} in [0.85, 1.15], log rms {fit.residual:.4f} (<= 0.05), "
                      f"{secs:.1f} s (< 60) on 1024^2, box 320")
    assert ok


def test_c05_shock_dichotomy(acceptance, demo):
    d, secs = demo
    trip = d.trip_time
    unfiltered = d.filter_off.status
    ok = (trip is not None and trip < 40.0 and d.field_on.status == "completed"
          and d.field_on.final_state.time == pytest.approx(200.0) and d.gradient_ratio <= 5.0
          and unfiltered != "nan_detected" and secs < 300)
    trip_text = f"{trip:.2f}" if trip is not None else "never"
    acceptance(5, ok, f"field off trips at t = {trip_text} (< 40), field on {d.field_on.status} to t = 200 with "
                      f"max|dr u| ratio {d.gradient_ratio:.2f} (<= 5), unfiltered {unfiltered}, {secs:.0f} s (< 300)")
    assert ok


def test_c06_cross_formulation(acceptance):
    res, secs = timed(cross_check, load_config(CONFIGS / "cross_check.ini"))
    diff_at_10 = res.differences[-1] if res.times and res.times[-1] == pytest.approx(10.0) else float("inf")
    ok = diff_at_10 <= 1e-5 and res.exit_code() == 0 and secs < 120
    acceptance(6, ok, f"sup difference at t = 10: {diff_at_10:.2e} (<= 1e-5), {secs:.1f} s (< 120)")
    assert ok


def test_c07_conservation(acceptance):
    spec = load_config(CONFIGS / "smooth.ini")
    grid = spec.config.grid
    w = grid.weights
    state = initial_state(spec)
    mass = [float(np.sum(w * (state.n - 1.0)))]
    scale = float(np.sum(w * np.abs(state.n - 1.0)))

    def on_step(s):
        mass.append(float(np.sum(w * (s.n - 1.0))))

    res = run(spec.config, state, keep_snapshots=False, on_step=on_step)
    per_step = float(np.max(np.abs(np.diff(mass)))) / scale
    energy = res.series("energy")
    drift = float(np.max(np.abs(energy - energy[0])) / energy[0])
    ok = res.status == "completed" and res.final_state.time == pytest.approx(50.0) and per_step <= 1e-12 \
        and drift <= 1e-5
    acceptance(7, ok, f"mass change per step {per_step:.1e} of int|n - n0| (<= 1e-12), energy drift {drift:.1e} "
                      f"over [0, 50] (<= 1e-5)")
    assert ok


def test_c08_transform(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(8)
    worst = 0.0
    for gamma in (5.0 / 3.0, 2.0, 3.0, 4.0):
        p = paper_units(gamma)
        c = derive_constants(p)
        n = np.exp(rng.uniform(np.log(0.01), np.log(100.0), 1000))
        u = rng.uniform(-3, 3, 1000)
        n2, u2 = from_normalized(*to_normalized(n, u, p, c), p, c)
        worst = max(worst, float(np.max(np.abs(n2 / n - 1))), float(np.max(np.abs(u2 - u) / np.maximum(1, np.abs(u)))))
    m = rng.uniform(-0.9, 10.0, 1000)
    h3 = float(np.max(np.abs(h_of_m(m, 3.0))))
    h2 = float(h_of_m(2.0, 2.0))
    c3 = derive_constants(paper_units(3.0))
    consts_err = max(abs(c3.c0 - math.sqrt(3.0)), abs(c3.m0 - 1.0 / 3.0))
    secs = time.perf_counter() - start
    ok = worst <= 1e-12 and h3 == 0.0 and abs(h2 + 1.0) <= 1e-15 and consts_err <= 4e-16 and secs < 1
    acceptance(8, ok, f"roundtrip {worst:.1e} (<= 1e-12), gamma=3 max|h| {h3:g}, gamma=2 h(2) = {h2:g}, "
                      f"c0/m0 error {consts_err:.1e}, {secs:.2f} s (< 1)")
    assert ok


def test_c09_convergence_orders(acceptance):
    start = time.perf_counter()
    _, space = spatial_ratios((128, 256, 512, 1024))
    _, tempo = temporal_ratios(0.02)
    secs = time.perf_counter() - start
    ok = min(space) >= 12 and 16 * 0.8 <= tempo[-1] <= 16 * 1.2 and secs < 120
    acceptance(9, ok, "spatial L2 ratios " + ", ".join(f"{r:.1f}" for r in space) + " (>= 12), temporal ratios "
               + ", ".join(f"{r:.1f}" for r in tempo) + f" (finest within 16 +- 20%), {secs:.0f} s (< 120)")
    assert ok


def test_c10_nonlinear_decay(acceptance, demo):
    d, _ = demo
    fit = d.decay_fit((40.0, 200.0))
    ok = fit.exponent >= 0.6
    acceptance(10, ok, f"sup|n - n0| exponent {fit.exponent:.3f} over [40, 200] (>= 0.6, heuristic; "
                       f"log rms {fit.residual:.2f})")
    assert ok
