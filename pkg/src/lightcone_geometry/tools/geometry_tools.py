"""Surface-geometry MCP tools."""

import asyncio
from typing import List, Literal, Optional

from . import mcp
from ..config import DEFAULT_JET_ORDER, load_tolerances, parse_tol_flags
from ..core.blaschke import build_pair, classify, darboux_integrate, dual_pair, trivial_from_point
from ..core.catalog import SurfaceChart, catalog, list_catalog as _list_catalog
from ..core.detectors import detect
from ..core.frame import frame_at, frame_integrability_residuals, frame_structure_residuals
from ..core.grid import Grid, sweep
from ..core.thomsen import thomsen_pipeline
from ..errors import GeometryError
from ..utils import dataframe_markdown_preview, parse_grid_spec, parse_rect


def _chart(catalog_name: Optional[str], config_text: Optional[str]) -> SurfaceChart:
    if config_text:
        return catalog("user", config_text=config_text)
    if catalog_name:
        return catalog(catalog_name)
    raise ValueError("Pass catalog_name or config_text")


def _grid(chart: SurfaceChart, grid: str, rect: Optional[str]) -> Grid:
    nu, nv = parse_grid_spec(grid)
    return Grid.over(parse_rect(rect) if rect else chart.domain, nu, nv)


@mcp.tool()
async def list_catalog():
    """List the packaged closed-form surface charts."""
    rows = [{**e, "components": "; ".join(e["components"])} for e in _list_catalog()]
    return dataframe_markdown_preview(rows, ["name", "source", "domain", "params", "components"], max_rows=len(rows))


@mcp.tool()
async def verify_chart(
    catalog_name: Optional[str] = None,
    config_text: Optional[str] = None,
    grid: str = "10x10",
    rect: Optional[str] = None,
    order: int = DEFAULT_JET_ORDER,
    tol: Optional[List[str]] = None,
):
    """Sweep structure-equation and integrability residuals of a chart's conformal frame.

    Args:
        catalog_name: Catalog chart name (see list_catalog).
        config_text: TOML chart config; takes precedence over catalog_name.
        grid: Grid size "NUxNV".
        rect: Optional sub-rectangle "u0,u1,v0,v1" (default: chart domain).
        order: Jet order J (>= 6).
        tol: Tolerance overrides as "name=value" strings.
    """
    try:
        tolerances = load_tolerances(parse_tol_flags(tol or []))
        chart = _chart(catalog_name, config_text)
        g = _grid(chart, grid, rect)

        def kernel(u, v):
            frame = frame_at(chart, u, v, order, tolerances)
            return frame_structure_residuals(frame), frame_integrability_residuals(frame)

        points = await asyncio.to_thread(sweep, kernel, g)
    except (GeometryError, ValueError) as e:
        return f"ERROR: {e}"
    structure = max(max(s.values()) for row in points for s, _ in row)
    integrability = max(max(i.values()) for row in points for _, i in row)
    ok = structure <= tolerances.structure and integrability <= tolerances.integrability
    return (f"{'PASS' if ok else 'FAIL'} | {chart.name} | {g.nu}x{g.nv} | "
            f"structure {structure:.3e} | integrability {integrability:.3e}")


@mcp.tool()
async def detect_surface(
    catalog_name: Optional[str] = None,
    config_text: Optional[str] = None,
    grid: str = "10x10",
    rect: Optional[str] = None,
    order: int = DEFAULT_JET_ORDER,
):
    """Run the Willmore, S-Willmore and isothermic detectors and the Willmore energy.

    Args:
        catalog_name: Catalog chart name (see list_catalog).
        config_text: TOML chart config; takes precedence over catalog_name.
        grid: Grid size "NUxNV".
        rect: Optional sub-rectangle "u0,u1,v0,v1".
        order: Jet order J (>= 6).
    """
    try:
        chart = _chart(catalog_name, config_text)
        g = _grid(chart, grid, rect)
        report, _ = await asyncio.to_thread(detect, chart, g, order, load_tolerances())
    except (GeometryError, ValueError) as e:
        return f"ERROR: {e}"
    return str(report)


@mcp.tool()
async def classify_pair(
    mode: Literal["fields", "dual", "darboux", "trivial_point"] = "dual",
    catalog_name: Optional[str] = None,
    config_text: Optional[str] = None,
    grid: str = "10x10",
    rect: Optional[str] = None,
    order: int = DEFAULT_JET_ORDER,
    a: str = "0",
    b: str = "0",
    xi: str = "0",
    theta: Optional[float] = None,
    init: Optional[List[float]] = None,
    point: Optional[List[float]] = None,
):
    """Build a Blaschke pair and classify it (NotEnvelope, DualSWillmore, Trivial, IsothermicDarboux).

    Args:
        mode: "fields" (closed-form a, b, xi), "dual", "darboux" (needs theta, init) or "trivial_point" (needs point).
        catalog_name: Catalog chart name (see list_catalog).
        config_text: TOML chart config; takes precedence over catalog_name.
        grid: Grid size "NUxNV".
        rect: Optional sub-rectangle "u0,u1,v0,v1".
        order: Jet order J (>= 6).
        a: Expression in u, v for the field a (mode="fields").
        b: Expression in u, v for the field b (mode="fields").
        xi: Expression for the normal component of xi (mode="fields").
        theta: Darboux spectral parameter.
        init: Darboux initial data [a0, b0, zeta0] at the grid corner.
        point: Null point P = [p1..p5] for mode="trivial_point".
    """
    try:
        tolerances = load_tolerances()
        chart = _chart(catalog_name, config_text)
        g = _grid(chart, grid, rect)
        if mode == "dual":
            pair = await asyncio.to_thread(dual_pair, chart, g, order, tolerances)
        elif mode == "darboux":
            if theta is None or init is None:
                return "ERROR: mode='darboux' needs theta and init"
            pair = await asyncio.to_thread(darboux_integrate, chart, theta, init, g, order, tolerances)
        elif mode == "trivial_point":
            if point is None:
                return "ERROR: mode='trivial_point' needs point"
            pair = await asyncio.to_thread(trivial_from_point, chart, point, g, order, tolerances)
        else:
            pair = await asyncio.to_thread(build_pair, chart, a, b, xi, g, order, tolerances)
    except (GeometryError, ValueError) as e:
        return f"ERROR: {e}"
    lines = [str(classify(pair, tolerances))]
    if pair.compatibility is not None:
        lines.append(f"compatibility {pair.compatibility:.3e}")
    lines.extend(f"note: {n}" for n in pair.notes)
    lines.append("")
    lines.append(dataframe_markdown_preview(pair.rows(), ["u", "v", "a", "b", "rho1", "theta1", "eta1"]))
    return "\n".join(lines)


@mcp.tool()
async def run_thomsen(
    catalog_name: Optional[str] = None,
    config_text: Optional[str] = None,
    grid: str = "11x11",
    rect: Optional[str] = None,
    order: int = DEFAULT_JET_ORDER,
):
    """Recover a timelike minimal surface in R^3_1, S^3_1 or H^3_1 from an isothermic Willmore chart.

    Args:
        catalog_name: Catalog chart name (see list_catalog).
        config_text: TOML chart config; takes precedence over catalog_name.
        grid: Grid size "NUxNV"; spacing near 0.01 keeps the recovered H residual below 1e-7.
        rect: Optional sub-rectangle "u0,u1,v0,v1".
        order: Jet order J (>= 6).
    """
    try:
        chart = _chart(catalog_name, config_text)
        g = _grid(chart, grid, rect)
        result = await asyncio.to_thread(thomsen_pipeline, chart, g, order, load_tolerances())
    except (GeometryError, ValueError) as e:
        return f"ERROR: {e}"
    lines = [str(result)]
    lines.extend(f"warning: {w}" for w in result.warnings)
    if result.recovered is not None:
        lines.append("")
        lines.append(dataframe_markdown_preview(result.recovered.rows(), ["u", "v", "x0", "x1", "x2", "H"]))
    return "\n".join(lines)
