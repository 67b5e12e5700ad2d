"""Tests for the canonical lift, the conformal frame and its structure equations."""

import dataclasses
from typing import List

import pytest

from lightcone_geometry.core.catalog import CATALOG_NAMES, catalog, parse_chart
from lightcone_geometry.core.frame import (
    canonical_lift,
    frame_at,
    integrability_residuals,
    normalization_residuals,
    reparametrize,
    structure_residuals,
)
from lightcone_geometry.core.grid import Grid
from lightcone_geometry.core.pseudo_linear import project_frame
from lightcone_geometry.errors import DegenerateConformalFactorError, InvalidFrameError


@pytest.fixture(scope="module")
def cylinder():
    return catalog("cylinder_r31")


# ---------------------------------------------------------------------------
# Canonical lift
# ---------------------------------------------------------------------------

class TestCanonicalLift:
    def test_normalized(self, cylinder):
        Y = canonical_lift(cylinder, 0.2, -0.3)
        assert abs(Y.inner(Y).value) < 1e-14
        assert Y.du().inner(Y.dv()).value == pytest.approx(0.5)
        assert Y.order == 5

    def test_v_flip(self):
        chart = parse_chart('source = "R31"\ncomponents = ["cos((u-v)/2)", "sin((u-v)/2)", "(u+v)/2"]\n')
        frame = frame_at(chart, 0.1, 0.2)
        assert frame.v_flipped
        assert frame.Y_u.inner(frame.Y_v).value == pytest.approx(0.5)

    def test_degenerate(self):
        chart = parse_chart(
            'source = "R31"\ncomponents = ["sin(u) + sin(v)", "-cos(u) - cos(v)", "u - v"]\n'
            "domain = [-4, 4, -4, 4]\n"
        )
        with pytest.raises(DegenerateConformalFactorError):
            frame_at(chart, 3.141592653589793, 0.0)


# ---------------------------------------------------------------------------
# Frame anchors and identities
# ---------------------------------------------------------------------------

class TestCylinderFrame:
    def test_anchors(self, cylinder):
        frame = frame_at(cylinder, 0.3, -0.2)
        assert frame.s1.value == pytest.approx(0.25, abs=1e-10)
        assert frame.s2.value == pytest.approx(0.25, abs=1e-10)
        assert frame.k1.value == pytest.approx(-0.25, abs=1e-10)
        assert frame.k2.value == pytest.approx(-0.25, abs=1e-10)
        assert frame.kk.value == pytest.approx(0.0625, abs=1e-10)
        assert frame.signs == [1]

    def test_summary_keys(self, cylinder):
        summary = frame_at(cylinder, 0.0, 0.0).summary()
        assert {"s1", "s2", "k1", "k2", "lambda", "v_flipped"} <= set(summary)


@dataclasses.dataclass
class GridWorst:
    name: str
    points: int = 0
    normalization: float = 0.0
    structure: float = 0.0
    integrability: float = 0.0
    failed: List[str] = dataclasses.field(default_factory=list)


@pytest.fixture(scope="module", params=CATALOG_NAMES)
def grid_worst(request):
    """Worst identity residuals over the interior of a 20x20 grid on the chart domain."""
    chart = catalog(request.param)
    grid = Grid.over(chart.domain, 20, 20)
    worst = GridWorst(request.param)
    for i, j, u, v in grid.points():
        if i in (0, grid.nu - 1) or j in (0, grid.nv - 1):
            continue
        worst.points += 1
        frame = frame_at(chart, u, v)
        worst.normalization = max(worst.normalization, max(normalization_residuals(frame).values()))
        record = structure_residuals(chart, u, v)
        if not record.passed:
            worst.failed.append(str(record))
        worst.structure = max(worst.structure, record.worst[1])
        worst.integrability = max(worst.integrability, integrability_residuals(chart, u, v, order=6).worst[1])
    return worst


class TestIdentities:
    def test_interior_points(self, grid_worst):
        assert grid_worst.points == 18 * 18

    def test_normalization(self, grid_worst):
        assert grid_worst.normalization <= 1e-10

    def test_structure_equations(self, grid_worst):
        assert not grid_worst.failed, grid_worst.failed[0] if grid_worst.failed else ""
        assert grid_worst.structure <= 1e-8

    def test_integrability(self, grid_worst):
        assert grid_worst.integrability <= 1e-7


class TestInjectedFault:
    def test_scaled_normal_rejected(self, cylinder):
        frame = frame_at(cylinder, 0.1, 0.1)
        broken = dataclasses.replace(frame, N=frame.N * 1.5)
        residuals = normalization_residuals(broken)
        assert residuals["<N,Y>"] == pytest.approx(0.5)
        with pytest.raises(InvalidFrameError, match="invalid frame"):
            project_frame(broken, frame.kappa1.value)


# ---------------------------------------------------------------------------
# Reparametrization covariance
# ---------------------------------------------------------------------------

class TestCovariance:
    def test_hopf_differentials_transform(self, cylinder):
        new = reparametrize(cylinder, "2*u", "v + v^3/10", domain=(-0.9, 0.9, -1.0, 1.0))
        u, v = 0.3, 0.4
        f_prime, g_prime = 2.0, 1.0 + 3 * v ** 2 / 10
        base = frame_at(cylinder, 2 * u, v + v ** 3 / 10)
        frame = frame_at(new, u, v)
        expected1 = f_prime ** 1.5 * g_prime ** -0.5 * base.k1.value
        expected2 = f_prime ** -0.5 * g_prime ** 1.5 * base.k2.value
        assert frame.k1.value == pytest.approx(expected1, abs=1e-8)
        assert frame.k2.value == pytest.approx(expected2, abs=1e-8)

    def test_invariant_product(self, cylinder):
        # <kappa1, kappa2> du dv is invariant, so kk scales by f' g'
        new = reparametrize(cylinder, "2*u", "v + v^3/10", domain=(-0.9, 0.9, -1.0, 1.0))
        frame = frame_at(new, -0.2, 0.5)
        g_prime = 1.0 + 3 * 0.25 / 10
        assert frame.kk.value == pytest.approx(2.0 * g_prime * 0.0625, abs=1e-8)
