"""Command-line entry point: ``lcgeom <command> [config] [options]``.

Exit codes: 0 when every residual is within tolerance, 2 for a negative
classification, exceeded residuals or a failed precondition, 1 for hard errors.
``detect`` reports its flags in the results and exits 0 unless an error occurs.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from . import set_log_level
from .config import ChartConfig, PairMode, RunConfig, load_config_text, load_tolerances, parse_tol_flags
from .core.blaschke import (
    PairData,
    build_pair,
    classify,
    darboux_integrate,
    darboux_symmetry_residual,
    dual_pair,
    trivial_from_point,
)
from .core.catalog import SurfaceChart, catalog, catalog_text, chart_from_config, list_catalog
from .core.detectors import detect
from .core.frame import (
    frame_at,
    frame_integrability_residuals,
    frame_structure_residuals,
    normalization_residuals,
)
from .core.grid import Grid, field, summarize, sweep
from .core.thomsen import thomsen_pipeline
from .errors import GeometryError, PreconditionFailed
from .reporting import Report, ResidualSummary, Status, write_report
from .utils import parse_grid_spec, parse_rect

logger = logging.getLogger(__name__)

COMMANDS = (
    "invariants", "verify", "detect", "pair-classify", "pair-dual",
    "pair-darboux", "pair-trivial", "thomsen", "catalog",
)
# commands that differentiate kappa twice
HIGH_ORDER = {"verify", "detect", "pair-classify", "pair-dual", "pair-darboux", "pair-trivial", "thomsen"}
MIN_HIGH_ORDER = 6


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


EXIT_CODES_HELP = """\
exit codes:
  0  every residual within tolerance
  2  negative classification, residual above tolerance or failed precondition
  1  config, I/O or geometry error

detect reports the Willmore, S-Willmore and isothermic flags in its results
and exits 0 whatever they are; only errors change its exit code.
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcgeom",
        description="Conformal invariants, Blaschke pairs and minimal-surface recovery for timelike surfaces.",
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("config", nargs="?", help="Chart (and pair) config file in TOML.")
    parser.add_argument("--catalog", help="Use a catalog chart instead of a config file.")
    parser.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                        help="Chart parameter override (repeatable).")
    parser.add_argument("--grid", default="20x20", help="Grid size NUxNV (default: 20x20).")
    parser.add_argument("--rect", help="Sub-rectangle u0,u1,v0,v1 (default: chart domain).")
    parser.add_argument("--order", type=int, default=6, help="Jet order J (default: 6).")
    parser.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                        help="Tolerance override (repeatable).")
    parser.add_argument("--workers", type=int, default=4, help="Worker threads for grid sweeps.")
    parser.add_argument("--out", type=Path, help="Output path (default: stdout).")
    parser.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
    parser.add_argument("--theta", type=float, help="Darboux spectral parameter.")
    parser.add_argument("--init", type=_floats, help="Darboux initial data a0,b0,zeta0.")
    parser.add_argument("--sign", type=int, choices=(-1, 1), help="Darboux sign of theta2 / theta1.")
    parser.add_argument("--point", type=_floats, help="Constant point P for pair-trivial: p1,...,p5.")
    parser.add_argument("--emit", action="store_true", help="catalog: print the chart config of --catalog.")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at INFO level.")
    return parser


def _load_chart(args) -> Tuple[SurfaceChart, Optional[ChartConfig], Dict[str, Any]]:
    params = parse_tol_flags(args.param)
    if args.config:
        text = Path(args.config).read_text(encoding="utf-8")
        cfg = load_config_text(text)
        chart = chart_from_config(cfg, text, params, name=Path(args.config).stem)
        echo = {"config": str(args.config)}
    elif args.catalog:
        cfg = None
        chart = catalog(args.catalog, params)
        echo = {"catalog": args.catalog}
    else:
        raise ValueError("a config file or --catalog NAME is required")
    echo.update({"chart": chart.name, "source": chart.source.value, "params": dict(sorted(chart.params.items()))})
    return chart, cfg, echo


def _run_config(args, chart: SurfaceChart) -> RunConfig:
    nu, nv = parse_grid_spec(args.grid)
    rect = parse_rect(args.rect) if args.rect else chart.domain
    run = RunConfig(
        nu=nu, nv=nv, rect=tuple(rect), order=args.order,
        tolerances=load_tolerances(parse_tol_flags(args.tol)), workers=args.workers,
    )
    if args.command in HIGH_ORDER and run.order < MIN_HIGH_ORDER:
        raise ValueError(f"{args.command} needs jet order >= {MIN_HIGH_ORDER}, got {run.order}")
    return run


def _summary(values: np.ndarray, grid: Grid) -> ResidualSummary:
    return ResidualSummary(**summarize(values, grid))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_invariants(chart, cfg, grid, run, args) -> Tuple[Report, List[Dict[str, Any]]]:
    tol = run.tolerances

    def kernel(u, v):
        frame = frame_at(chart, u, v, run.order, tol)
        row = {"u": u, "v": v, **frame.summary()}
        row["normalization"] = max(normalization_residuals(frame).values())
        return row

    rows = [r for row in sweep(kernel, grid, run.workers, desc="invariants" if args.verbose else None) for r in row]
    residual = np.array([r["normalization"] for r in rows]).reshape(grid.shape)
    summary = _summary(residual, grid)
    report = Report(
        command="invariants",
        results={"points": len(rows), "v_flipped": any(r["v_flipped"] for r in rows)},
        residual_summary=summary,
        status=Status.OK if summary.max <= tol.frame else Status.NEGATIVE,
    )
    return report, rows


def cmd_verify(chart, cfg, grid, run, args):
    tol = run.tolerances

    def kernel(u, v):
        frame = frame_at(chart, u, v, run.order, tol)
        return {"u": u, "v": v,
                "structure": frame_structure_residuals(frame),
                "integrability": frame_integrability_residuals(frame)}

    points = [p for row in sweep(kernel, grid, run.workers, desc="verify" if args.verbose else None) for p in row]
    structure = {k: max(p["structure"][k] for p in points) for k in points[0]["structure"]}
    integrability = {k: max(p["integrability"][k] for p in points) for k in points[0]["integrability"]}
    worst = np.array([
        max(max(p["structure"].values()), max(p["integrability"].values())) for p in points
    ]).reshape(grid.shape)
    ok = max(structure.values()) <= tol.structure and max(integrability.values()) <= tol.integrability
    report = Report(
        command="verify",
        results={
            "structure": structure,
            "integrability": integrability,
            "structure_max": max(structure.values()),
            "integrability_max": max(integrability.values()),
        },
        residual_summary=_summary(worst, grid),
        status=Status.OK if ok else Status.NEGATIVE,
    )
    rows = [{"u": p["u"], "v": p["v"], **p["structure"], **p["integrability"]} for p in points]
    return report, rows


def cmd_detect(chart, cfg, grid, run, args):
    detected, samples = detect(chart, grid, run.order, run.tolerances, run.workers, progress=args.verbose)
    results = detected.model_dump(mode="python", exclude={"swillmore": {"mu1", "mu2"}})
    results["is_willmore"] = detected.willmore.is_willmore
    results["isothermic_sign"] = detected.isothermic.sign_label if detected.isothermic else "none"
    residual = field(samples, lambda s: max(s.willmore1, s.willmore2))
    report = Report(command="detect", results=results, residual_summary=_summary(residual, grid))
    return report, [s.as_row() for row in samples for s in row]


def _pair_report(command: str, pair: PairData, run: RunConfig, extra: Optional[Dict[str, Any]] = None):
    result = classify(pair, run.tolerances)
    results: Dict[str, Any] = {
        "label": result.label.value,
        "residuals": result.residuals,
        "witness": result.witness,
        "notes": list(pair.notes),
    }
    results.update(extra or {})
    eta = np.maximum(np.abs(pair.field("eta1")), np.abs(pair.field("eta2")))
    status = Status.NEGATIVE if result.negative else Status.OK
    if pair.compatibility is not None and not pair.compatibility <= run.tolerances.compatibility:
        status = Status.NEGATIVE
    report = Report(command=command, results=results, residual_summary=_summary(eta, pair.grid), status=status)
    return report, pair.rows()


def _darboux(chart, grid, run, theta, init, sign) -> Tuple[PairData, Dict[str, Any]]:
    if theta is None or init is None:
        raise ValueError("Darboux integration needs theta and init = (a0, b0, zeta0)")
    if len(init) != 3:
        raise ValueError(f"init must have three entries, got {len(init)}")
    pair = darboux_integrate(chart, theta, init, grid, run.order, run.tolerances, run.workers, sign)
    extra: Dict[str, Any] = {"theta": pair.theta, "sign": pair.sign,
                             "compatibility": pair.compatibility, "blowup": pair.blowup}
    if theta != 0:
        extra["symmetry"] = darboux_symmetry_residual(pair)
    return pair, extra


def _point(args, cfg) -> List[float]:
    P = args.point or (cfg.point if cfg else None)
    if P is None or len(P) != 5:
        raise ValueError("pair-trivial needs a point P with five coordinates")
    return list(P)


def cmd_pair_classify(chart, cfg, grid, run, args):
    mode = cfg.mode if cfg is not None and cfg.mode is not None else PairMode.FIELDS
    extra: Dict[str, Any] = {"mode": mode.value}
    if mode is PairMode.DUAL:
        pair = dual_pair(chart, grid, run.order, run.tolerances, run.workers)
    elif mode is PairMode.DARBOUX:
        theta = args.theta if args.theta is not None else cfg.theta
        init = args.init or cfg.init
        pair, more = _darboux(chart, grid, run, theta, init, args.sign)
        extra.update(more)
    elif mode is PairMode.TRIVIAL_POINT:
        pair = trivial_from_point(chart, _point(args, cfg), grid, run.order, run.tolerances, run.workers)
    else:
        fields = cfg.fields if cfg is not None and cfg.fields is not None else None
        if fields is None:
            raise ValueError("pair-classify in fields mode needs [fields] a, b, xi in the config")
        pair = build_pair(chart, fields.a, fields.b, fields.xi, grid, run.order, run.tolerances, run.workers)
    return _pair_report("pair-classify", pair, run, extra)


def cmd_pair_dual(chart, cfg, grid, run, args):
    return _pair_report("pair-dual", dual_pair(chart, grid, run.order, run.tolerances, run.workers), run)


def cmd_pair_darboux(chart, cfg, grid, run, args):
    theta = args.theta if args.theta is not None else (cfg.theta if cfg else None)
    init = args.init or (cfg.init if cfg else None)
    pair, extra = _darboux(chart, grid, run, theta, init, args.sign)
    return _pair_report("pair-darboux", pair, run, extra)


def cmd_pair_trivial(chart, cfg, grid, run, args):
    P = _point(args, cfg)
    pair = trivial_from_point(chart, P, grid, run.order, run.tolerances, run.workers)
    return _pair_report("pair-trivial", pair, run, {"P": P})


def cmd_thomsen(chart, cfg, grid, run, args):
    try:
        result = thomsen_pipeline(chart, grid, run.order, run.tolerances, run.workers)
    except PreconditionFailed as e:
        report = Report(command="thomsen", results={"error": str(e), "condition": e.condition},
                        status=Status.NEGATIVE)
        return report, []
    results = result.model_dump(mode="python")
    rows: List[Dict[str, Any]] = []
    summary = ResidualSummary()
    if result.recovered is not None:
        summary = _summary(np.abs(result.recovered.H), grid)
        rows = result.recovered.rows()
    report = Report(command="thomsen", results=results, residual_summary=summary,
                    status=Status.OK if result.passed(run.tolerances) else Status.NEGATIVE)
    return report, rows


COMMAND_TABLE: Dict[str, Callable] = {
    "invariants": cmd_invariants,
    "verify": cmd_verify,
    "detect": cmd_detect,
    "pair-classify": cmd_pair_classify,
    "pair-dual": cmd_pair_dual,
    "pair-darboux": cmd_pair_darboux,
    "pair-trivial": cmd_pair_trivial,
    "thomsen": cmd_thomsen,
}


def cmd_catalog(args) -> Tuple[Report, List[Dict[str, Any]]]:
    if args.emit:
        if not args.catalog:
            raise ValueError("catalog --emit needs --catalog NAME")
        sys.stdout.write(catalog_text(args.catalog))
        return None, []
    entries = list_catalog()
    rows = [{**e, "components": "; ".join(e["components"])} for e in entries]
    return Report(command="catalog", results={"charts": entries}), rows


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def run(argv: Optional[List[str]] = None) -> int:
    """Run one command and return the process exit code."""
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_log_level("INFO")
    try:
        if args.command == "catalog":
            report, rows = cmd_catalog(args)
            if report is None:
                return 0
        else:
            chart, cfg, echo = _load_chart(args)
            run_cfg = _run_config(args, chart)
            grid = Grid.over(run_cfg.rect, run_cfg.nu, run_cfg.nv)
            report, rows = COMMAND_TABLE[args.command](chart, cfg, grid, run_cfg, args)
            echo.update({"order": run_cfg.order, "tol_overrides": parse_tol_flags(args.tol)})
            report.config_echo = echo
            report.grid = grid.describe()
        write_report(report, args.out, args.fmt, rows)
    except (GeometryError, ValueError, OSError) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return 1
    if report.status is Status.NEGATIVE:
        logger.warning("%s: result negative or residuals above tolerance", args.command)
    return report.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
