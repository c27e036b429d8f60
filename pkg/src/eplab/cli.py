"""Command line: eplab {simulate, verify-lemmas, kg-decay, cross-check, shock-demo}.

Exit codes: 0 success, 2 blow-up detected, 3 config or usage error,
4 numerical instability, 5 precondition violated (neutrality, vacuum,
domain too small, inconclusive experiment).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .errors import (
    CompatibilityError,
    ConfigError,
    DataError,
    DomainTooSmallError,
    InconsistencyError,
    InstabilityError,
    NeutralityError,
    OriginRegularityError,
    ParameterDomainError,
    VacuumError,
)
from .experiments import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_PRECONDITION,
    EXIT_USAGE,
    STATUS_EXIT,
    PreconditionError,
    cross_check,
    kg_decay,
    run_spec,
    shock_demo,
)
from .io_diag import load_config, snapshot_name, write_csv, write_manifest, write_snapshot, write_timeseries
from .lemmas import ALL_CASES, run_all


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; 2 means blow-up here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _window(text: str):
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be A,B, got {text!r}")
    return a, b


def _read_cases(path: str):
    names = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            names.append(line)
    unknown = [n for n in names if n not in ALL_CASES]
    if unknown:
        raise ConfigError(f"unknown lemma case(s): {', '.join(unknown)}; known: {', '.join(ALL_CASES)}")
    return names


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    spec = load_config(args.config)
    out = Path(args.out)
    result = run_spec(spec)
    params, grid = spec.config.params, spec.config.grid
    write_timeseries(result.diagnostics, out / "diagnostics.csv")
    for state in result.snapshots:
        write_snapshot(state, grid, params, out / "snapshots" / snapshot_name(state.time))
    write_manifest(spec, out, {"status": result.status, "steps": result.steps, "message": result.message})
    print(f"{result.status} at t = {result.final_state.time:.6g} after {result.steps} steps")
    if result.message:
        print(result.message)
    return STATUS_EXIT[result.status]


def cmd_verify_lemmas(args) -> int:
    names = _read_cases(args.cases) if args.cases else None
    report = run_all(args.grid, args.box, names)
    for line in report.lines():
        print(line)
    print("all residuals within tolerance" if report.passed else "some residuals out of tolerance")
    return EXIT_OK if report.passed else EXIT_NUMERICAL


def cmd_kg_decay(args) -> int:
    res = kg_decay(args.grid, args.box, args.m0, args.tmax, args.window, args.samples)
    out = Path(args.out)
    write_csv(out / "kg_decay.csv", {"time": res.times, "sup_norm": res.sup_norms})
    fit = res.fit
    print(
        f"exponent {fit.exponent:.4f}  amplitude {fit.amplitude:.4g}  rms {fit.residual:.3g}  "
        f"window [{fit.window[0]:g}, {fit.window[1]:g}]"
    )
    print("within [0.85, 1.15]" if res.in_range else "outside [0.85, 1.15]")
    return EXIT_OK if res.in_range else EXIT_NUMERICAL


def cmd_cross_check(args) -> int:
    spec = load_config(args.config)
    res = cross_check(spec, args.checkpoints)
    for t, d in zip(res.times, res.differences):
        print(f"t = {t:.6g}  sup difference {d:.3e}")
    if res.statuses != ("completed", "completed"):
        print(f"run stopped early: primal {res.statuses[0]}, normalized {res.statuses[1]}")
    else:
        print(f"max sup difference {res.max_difference:.3e} (tolerance 1e-05)")
    if not res.paper_units:
        print("parameters are not paper units; the normalized system assumes them")
    return res.exit_code()


def cmd_shock_demo(args) -> int:
    spec = load_config(args.config)
    demo = shock_demo(spec, filter_off_check=args.filter_check)
    out = Path(args.out)
    write_timeseries(demo.field_off.diagnostics, out / "field_off" / "diagnostics.csv")
    write_timeseries(demo.field_on.diagnostics, out / "field_on" / "diagnostics.csv")
    if demo.filter_off is not None:
        write_timeseries(demo.filter_off.diagnostics, out / "field_on_unfiltered" / "diagnostics.csv")
    summary = demo.summary()
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    write_manifest(spec, out, {"field_off": demo.field_off.status, "field_on": demo.field_on.status})
    print(summary, end="")
    return demo.exit_code()


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eplab", description="Radial Euler-Poisson numerical lab.")
    p.add_argument("--version", action="version", version=f"eplab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run one configuration")
    s.add_argument("--config", required=True, help="config file")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify-lemmas", help="projection and radial-curl checks on the periodic box")
    s.add_argument("--grid", type=int, default=256, help="points per side (power of two)")
    s.add_argument("--box", type=float, default=40.0, help="box side length")
    s.add_argument("--cases", help="file with one case name per line")
    s.set_defaults(func=cmd_verify_lemmas)

    s = sub.add_parser("kg-decay", help="sup-norm decay of the linear Klein-Gordon flow")
    s.add_argument("--grid", type=int, default=1024)
    s.add_argument("--box", type=float, default=320.0)
    s.add_argument("--m0", type=float, default=1.0)
    s.add_argument("--tmax", type=float, default=120.0)
    s.add_argument("--window", type=_window, default=(20.0, 120.0), help="fit window A,B")
    s.add_argument("--samples", type=int, default=64, help="number of log-spaced sample times")
    s.add_argument("--out", default="kg-decay-out", help="output directory")
    s.set_defaults(func=cmd_kg_decay)

    s = sub.add_parser("cross-check", help="primal vs normalized formulation")
    s.add_argument("--config", required=True)
    s.add_argument("--checkpoints", type=int, default=4, help="comparison times in (0, t_end]")
    s.set_defaults(func=cmd_cross_check)

    s = sub.add_parser("shock-demo", help="same data with the field off and on")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--filter-check", action="store_true", help="also run field-on with the filter off")
    s.set_defaults(func=cmd_shock_demo)
    return p


_PRECONDITION = (NeutralityError, VacuumError, DomainTooSmallError, OriginRegularityError,
                 CompatibilityError, PreconditionError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _PRECONDITION as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (InstabilityError, InconsistencyError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ParameterDomainError, DataError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
