"""Command-line front end.

Exit codes: 0 success, 1 configuration or input error, 2 path failure (or a
converged path whose Ricci pinching check fails), 3 self-test failures.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import continuity_solver as cs
from . import invariant_ledger as il
from . import paneitz_spectral as ps
from .config import (
    _float,
    _float_list,
    _int,
    _section,
    background_factor_from_config,
    background_from_config,
    read_config,
    solve_config_from,
    write_csv,
    write_json,
)
from .errors import Conformal4Error, ConfigurationError, PathFailure
from .model_geometry import ProductSurfaces, S1xS3

log = logging.getLogger("conformal4")

TRACE_COLUMNS = ("t", "u_min", "u_max", "grad_max", "residual_sup", "cone_margin", "newton_iters")


class Run:
    """Collects emitted files for the run manifest."""

    def __init__(self, command, args):
        self.command = command
        self.config_path = args.config
        self.out = Path(args.out)
        self.seed = args.seed
        self.emitted = []
        self.out.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        self.emitted.append(name)
        return self.out / name

    def finish(self):
        manifest = {
            "command": self.command,
            "config_path": str(self.config_path) if self.config_path else "",
            "output_dir": str(self.out),
            "seed": self.seed,
            "emitted_files": sorted(set(self.emitted) | {"manifest.json"}),
        }
        write_json(self.out / "manifest.json", manifest)


def _trace_rows(trace):
    return [{c: getattr(rec, c) for c in TRACE_COLUMNS} for rec in trace]


def cmd_solve(args) -> int:
    run = Run("solve", args)
    parser = read_config(args.config)
    bg = background_from_config(parser)
    if not isinstance(bg, S1xS3):
        raise ConfigurationError("solve needs an S1xS3 background")
    cfg = solve_config_from(parser, {"grid_n": args.grid, "delta": args.delta, "t_target": args.t_target})
    factor = background_factor_from_config(parser, bg, cfg.grid_n)
    yamabe = _float(_section(parser, "solver"), "yamabe", il.Y_S4)
    report = {"config": {k: getattr(cfg, k) for k in cfg.__dataclass_fields__},
              "background": {"kind": "S1xS3", "circumference": bg.circumference,
                             "sphere_radius": bg.sphere_radius,
                             "perturbed": factor is not None}}
    try:
        state, trace = cs.continue_path(bg, cfg, factor)
    except PathFailure as exc:
        write_csv(run.path("trace.csv"), TRACE_COLUMNS, _trace_rows(exc.trace))
        last = exc.trace[-1] if exc.trace else None
        report["status"] = "path_failure"
        report["message"] = str(exc)
        report["last_accepted"] = _diag_dict(last) if last else None
        write_json(run.path("report.json"), report)
        run.finish()
        print(f"path failure: {exc}", file=sys.stderr)
        return 2
    write_csv(run.path("trace.csv"), TRACE_COLUMNS, _trace_rows(trace))
    verdict = cs.ricci_verdict(state, cfg.t_target, bg)
    homogeneous = factor is None
    monitors = {
        "harnack_min_slack": min(cs.harnack_monitor(bg, r) for r in trace),
        "lower_bound_min_slack": min(cs.lower_bound_monitor(bg, r, state.f_squared, yamabe) for r in trace),
        "upper_bound_min_slack": min(cs.upper_bound_monitor(bg, r, state.f_squared) for r in trace),
        "grad_max_along_path": max(r.grad_max for r in trace),
    }
    report.update({
        "status": "converged",
        "final": _diag_dict(state.diagnostics),
        "ricci_verdict": {
            "lower_ok": verdict.lower_ok,
            "upper_ok": verdict.upper_ok,
            "margins": list(verdict.margins),
            "newton_form_ok": verdict.newton_form_ok,
            "newton_form_margins": list(verdict.newton_form_margins),
        },
        "monitors": monitors,
    })
    if homogeneous:
        target = cs.homogeneous_solution(cfg.t_target, cfg.delta)
        report["closed_form_u"] = target
        report["closed_form_error"] = float(np.max(np.abs(state.u.samples - target)))
    write_json(run.path("report.json"), report)
    run.finish()
    ok = verdict.lower_ok and verdict.upper_ok
    print(f"converged at t={state.t:.17g}: residual {state.diagnostics.residual_sup:.3e}, "
          f"u in [{state.diagnostics.u_min:.12g}, {state.diagnostics.u_max:.12g}], "
          f"ricci pinching {'holds' if ok else 'FAILS'}")
    return 0 if ok else 2


def _diag_dict(rec):
    return {k: getattr(rec, k) for k in rec.__dataclass_fields__}


def cmd_invariants(args) -> int:
    run = Run("invariants", args)
    records = il.builtin_records()
    if args.config:
        parser = read_config(args.config)
        sec = _section(parser, "ledger")
        if "records" in sec:
            for rec in il.load_records(Path(args.config).parent / sec["records"]):
                records[rec.name] = rec
    rows = il.invariants_table(records)
    columns = ("name", "chi", "weyl_l2", "F2", "int_Q", "Y", "assumption_paneitz", "cgb_residual")
    write_csv(run.path("table.csv"), columns, rows)
    il.save_records(records.values(), run.path("records.json"))
    run.finish()
    for row in rows:
        print(f"{row['name']:<24} F2={row['F2']:.10g} intQ={row['int_Q']:.10g} -> {row['assumption_paneitz']}")
    return 0


def cmd_examples(args) -> int:
    run = Run("examples", args)
    rows = il.examples_table()
    write_csv(run.path("examples.csv"), ("family", "base", "k", "l", "admissible", "detail"), rows)
    run.finish()
    return 0


def cmd_spectrum(args) -> int:
    run = Run("spectrum", args)
    parser = read_config(args.config)
    sec = _section(parser, "spectrum")
    source = sec.get("source", "product")
    if source == "product":
        inp = ps.ProductSpectrumInput(
            _float(sec, "kappa1", -1.0), _float(sec, "kappa2", -1.0),
            tuple(_float_list(sec, "eigs1")), tuple(_float_list(sec, "eigs2")),
        )
        table = ps.product_spectrum_table(inp)
        certificate = None
        try:
            bg = background_from_config(parser) if parser.has_section("background") else None
        except ConfigurationError:
            bg = None
        if isinstance(bg, ProductSurfaces):
            certificate = ps.positivity_certificate(bg, inp).to_dict()
    elif source == "reduced":
        bg = background_from_config(parser)
        if not isinstance(bg, S1xS3):
            raise ConfigurationError("reduced spectra need an S1xS3 background")
        k = np.arange(0, _int(sec, "modes", 16) + 1)
        lam = (2.0 * math.pi * k / bg.circumference) ** 2
        table = np.column_stack([lam, np.zeros_like(lam), ps.reduced_symbol(k, bg.circumference)])
        certificate = ps.positivity_certificate(bg).to_dict()
    else:
        raise ConfigurationError(f"unknown spectrum source {source!r}")
    rows = [{"lambda": r[0], "mu": r[1], "paneitz_eigenvalue": r[2]} for r in table]
    write_csv(run.path("spectrum.csv"), ("lambda", "mu", "paneitz_eigenvalue"), rows)
    values = table[:, 2]
    summary = {
        "count": int(len(values)),
        "count_negative": int(np.sum(values < 0.0)),
        "minimum": float(values.min()),
        "argmin": {"lambda": float(table[0, 0]), "mu": float(table[0, 1])} if source == "product" else
                  {"lambda": float(table[int(np.argmin(values)), 0]), "mu": 0.0},
        "kernel_size": int(np.sum(values == 0.0)),
        "certificate": certificate,
    }
    write_json(run.path("spectrum_summary.json"), summary)
    run.finish()
    print(f"min {summary['minimum']:.17g}, negative count {summary['count_negative']}")
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_all

    run = Run("selftest", args)
    results = run_all(args.seed)
    payload = {"seed": args.seed, "passed": all(r.passed for r in results),
               "suites": [r.to_dict() for r in results]}
    write_json(run.path("selftest.json"), payload)
    run.finish()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name:<28} worst={r.worst:.3e} tol={r.tolerance:.1e}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failed suites: " + ", ".join(failed), file=sys.stderr)
        return 3
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "invariants": cmd_invariants,
    "spectrum": cmd_spectrum,
    "examples": cmd_examples,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conformal4", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, help="sectioned key-value config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--grid", type=int, default=None)
    parser.add_argument("--delta", type=float, default=None)
    parser.add_argument("--t-target", dest="t_target", type=float, default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "spectrum" and args.config is None:
        print("error: spectrum needs --config", file=sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](args)
    except Conformal4Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
