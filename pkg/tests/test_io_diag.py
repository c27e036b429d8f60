import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eplab.errors import (
    CompatibilityError,
    ConfigError,
    DuplicateKeyError,
    MalformedNumberError,
    MissingKeyError,
    OutOfRangeError,
    UnknownKeyError,
)
from eplab.io_diag import (
    equilibrium_spec_text,
    format_config,
    load_config,
    load_snapshot,
    manifest_text,
    parse_config,
    parse_snapshot,
    read_timeseries,
    snapshot_bytes,
    snapshot_name,
    write_csv,
    write_snapshot,
    write_timeseries,
)
from eplab.params import paper_units
from eplab.experiments import initial_state, run_spec
from eplab.radial import NormalizedState, PrimalState, RadialGrid, SolverConfig, run

BASE = equilibrium_spec_text()
# room for the neutralizing annulus of a width-2 profile
ROOMY = BASE.replace("r_max = 20.0", "r_max = 60.0").replace("num_cells = 64", "num_cells = 256")


def with_lines(*extra, base=ROOMY):
    return base + "\n".join(extra) + "\n"


class TestParse:
    def test_defaults(self):
        spec = parse_config(BASE)
        cfg = spec.config
        assert cfg.params.gamma == 3.0 and cfg.params.kappa == 1.0
        assert cfg.grid.num_cells == 64 and cfg.grid.r_max == 20.0
        assert cfg.cfl_number == 0.4 and cfg.field_mode == "gauss" and cfg.filter_on
        assert spec.formulation == "primal" and spec.initial.amplitude == 0.0

    def test_comments_and_alias(self):
        text = "# top\n" + BASE.replace("t_end = 1.0", "t_end = 2.5 ; trailing\nfield_mode = gauss-constraint")
        spec = parse_config(text)
        assert spec.config.t_end == 2.5 and spec.config.field_mode == "gauss"

    def test_si_like_kappa(self):
        spec = parse_config(BASE.replace("gamma = 3.0", "gamma = 3.0\nunits = si-like"))
        assert spec.config.params.kappa == pytest.approx(4 * math.pi)
        assert not spec.config.params.is_paper_units

    @pytest.mark.parametrize(
        "text, exc",
        [
            (BASE.replace("t_end = 1.0\n", ""), MissingKeyError),
            (BASE + "colour = red\n", UnknownKeyError),
            (BASE + "[extras]\n", UnknownKeyError),
            (BASE + "t_end = 2.0\n", DuplicateKeyError),
            (BASE.replace("t_end = 1.0", "t_end = 1,0"), MalformedNumberError),
            (BASE.replace("num_cells = 64", "num_cells = 64.0"), MalformedNumberError),
            (BASE.replace("t_end = 1.0", "t_end = nan"), MalformedNumberError),
            (BASE.replace("gamma = 3.0", "gamma = 1.0"), OutOfRangeError),
            (BASE.replace("num_cells = 64", "num_cells = 10"), OutOfRangeError),
            (BASE + "cfl = 0.95\n", OutOfRangeError),
            (BASE + "field_mode = magnetic\n", OutOfRangeError),
            (BASE + "filter = maybe\n", OutOfRangeError),
            ("gamma = 3\n" + BASE, ConfigError),
            (BASE + "[grid\n", ConfigError),
            (BASE + "no equals sign\n", ConfigError),
            (with_lines("[initial]", "profile = file"), OutOfRangeError),
        ],
    )
    def test_errors(self, text, exc):
        with pytest.raises(exc):
            parse_config(text)

    def test_error_carries_line(self):
        with pytest.raises(DuplicateKeyError) as info:
            parse_config(BASE + "t_end = 2.0\n")
        assert info.value.line == len(BASE.splitlines()) + 1 and info.value.key == "t_end"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.ini")

    @given(
        st.floats(1.1, 5.0),
        st.integers(64, 4096),
        st.floats(1.0, 500.0),
        st.floats(0.01, 300.0),
        st.sampled_from(["gauss", "dynamic", "off"]),
        st.booleans(),
        st.floats(-0.5, 0.5),
        st.floats(0.1, 10.0),
    )
    def test_format_roundtrip(self, gamma, n, r_max, t_end, mode, filt, amp, width):
        text = (
            f"[physics]\ngamma = {gamma!r}\n[grid]\nnum_cells = {n}\nr_max = {r_max!r}\n"
            f"[run]\nt_end = {t_end!r}\nfield_mode = {mode}\nfilter = {'on' if filt else 'off'}\n"
            f"[initial]\namplitude = {amp!r}\nwidth = {width!r}\n"
        )
        a = parse_config(text)
        b = parse_config(format_config(a))
        assert a.values == b.values
        assert a.config == b.config


def _state(kind, n=64, seed=0):
    rng = np.random.default_rng(seed)
    cols = [1 + 0.1 * rng.standard_normal(n), rng.standard_normal(n), rng.standard_normal(n)]
    return (PrimalState if kind == "primal" else NormalizedState)(0.1 * seed, *cols)


class TestSnapshot:
    @given(st.sampled_from(["primal", "normalized"]), st.integers(0, 1000), st.floats(0, 1e6))
    def test_roundtrip_bit_identical(self, kind, seed, t):
        g = RadialGrid(64, 10.0)
        p = paper_units(3.0)
        s = _state(kind, seed=seed)
        s.time = t
        back, grid, header = parse_snapshot(snapshot_bytes(s, g, p), p, g)
        assert type(back) is type(s)
        assert back.time == t
        for name in header["variables"]:
            assert np.array_equal(getattr(back, name), getattr(s, name))
        assert grid == g

    def test_file_roundtrip(self, tmp_path):
        g = RadialGrid(64, 10.0)
        p = paper_units(3.0)
        s = _state("primal")
        path = write_snapshot(s, g, p, tmp_path / "snaps" / snapshot_name(1.25))
        assert path.name == "t_1.250000.snap"
        back, _, _ = load_snapshot(path, p, g)
        assert np.array_equal(back.n, s.n)

    def test_param_mismatch(self):
        g = RadialGrid(64, 10.0)
        blob = snapshot_bytes(_state("primal"), g, paper_units(3.0))
        with pytest.raises(CompatibilityError):
            parse_snapshot(blob, paper_units(2.0), g)

    def test_grid_mismatch(self):
        g = RadialGrid(64, 10.0)
        blob = snapshot_bytes(_state("primal"), g, paper_units(3.0))
        with pytest.raises(CompatibilityError):
            parse_snapshot(blob, None, RadialGrid(128, 10.0))

    @pytest.mark.parametrize("mangle", [lambda b: b[:-8], lambda b: b.replace(b"\n", b" ", 1),
                                        lambda b: b"{}\n" + b.split(b"\n", 1)[1], lambda b: b"not json\n"])
    def test_corrupt(self, mangle):
        g = RadialGrid(64, 10.0)
        blob = snapshot_bytes(_state("primal"), g, paper_units(3.0))
        with pytest.raises(CompatibilityError):
            parse_snapshot(mangle(blob))

    def test_restart_from_snapshot(self, tmp_path):
        text = with_lines("[initial]", "amplitude = 0.01", "velocity_amplitude = 0.01", "width = 2.0")
        spec = parse_config(text)
        full = run_spec(spec)
        half = run(SolverConfig(spec.config.params, spec.config.grid, t_end=0.5), initial_state(spec))
        snap = write_snapshot(half.final_state, spec.config.grid, spec.config.params, tmp_path / "mid.snap")
        resumed = parse_config(with_lines("[initial]", "profile = file", f"snapshot_path = {snap}"))
        res = run_spec(resumed)
        np.testing.assert_allclose(res.final_state.n, full.final_state.n, atol=1e-12)


class TestCsv:
    def test_timeseries_roundtrip(self, tmp_path):
        spec = parse_config(with_lines("[initial]", "amplitude = 0.01", "width = 2.0"))
        res = run_spec(spec)
        path = write_timeseries(res.diagnostics, tmp_path / "d" / "diagnostics.csv")
        cols = read_timeseries(path)
        assert np.array_equal(cols["energy"], res.series("energy"))
        assert np.array_equal(cols["time"], res.series("time"))

    def test_generic_csv(self, tmp_path):
        path = write_csv(tmp_path / "x.csv", {"a": [1.0, 2.0], "b": [0.1, 1 / 3]})
        lines = path.read_text().splitlines()
        assert lines[0] == "a,b" and float(lines[2].split(",")[1]) == 1 / 3


def test_manifest_contents():
    spec = parse_config(BASE)
    info = json.loads(manifest_text(spec, {"status": "completed"}))
    assert info["derived"]["c0"] == pytest.approx(math.sqrt(3.0))
    assert info["params_hash"] == spec.config.params.digest()
    assert info["status"] == "completed"
    assert parse_config(info["config"]).values == spec.values
