"""Tests for the Willmore, S-Willmore and isothermic detectors."""

import math

import pytest

from lightcone_geometry.config import Tolerances
from lightcone_geometry.core.catalog import catalog, parse_chart
from lightcone_geometry.core.detectors import (
    adapt_coordinates,
    detect,
    isothermic_test,
    swillmore_test,
    willmore_energy,
    willmore_residual,
)
from lightcone_geometry.core.frame import frame_at, reparametrize
from lightcone_geometry.core.grid import Grid
from lightcone_geometry.errors import IsothermicTypeError, UmbilicError

INFLECTION = """
source = "R31"
components = ["u - u^5/5 + sin(v)/2", "2*u^3/3 - cos(v)/2", "u + u^5/5 - v/2"]
domain = [-0.5, 0.5, -0.5, 0.5]
"""


@pytest.fixture(scope="module")
def cylinder():
    return catalog("cylinder_r31")


@pytest.fixture(scope="module")
def nullsum():
    return catalog("nullsum_minimal_r31")


@pytest.fixture(scope="module")
def inflection():
    """Minimal translation surface whose u-curve has an inflection at u = 0, so k1 changes sign there."""
    return parse_chart(INFLECTION, name="inflection")


@pytest.fixture
def unit_grid():
    return Grid.over((0.0, 1.0, 0.0, 1.0), 6, 6)


# ---------------------------------------------------------------------------
# Cylinder anchors
# ---------------------------------------------------------------------------

class TestCylinder:
    def test_willmore_residual(self, cylinder):
        r1, r2 = willmore_residual(cylinder, 0.2, 0.7)
        assert r1 == pytest.approx(0.03125, abs=1e-9)
        assert r2 == pytest.approx(0.03125, abs=1e-9)

    def test_energy(self, cylinder, unit_grid):
        assert willmore_energy(cylinder, unit_grid) == pytest.approx(0.125, abs=1e-10)

    def test_detect(self, cylinder, unit_grid):
        report, samples = detect(cylinder, unit_grid)
        assert report.energy_W == pytest.approx(0.125, abs=1e-10)
        assert not report.willmore.is_willmore
        assert report.isothermic.sign == 1
        assert report.isothermic.sign_label == "+"
        assert not report.swillmore.is_swillmore
        assert len(samples) == 6 and len(samples[0]) == 6
        assert "PASS | isothermic sign +" in str(report)


# ---------------------------------------------------------------------------
# Minimal surfaces are Willmore and isothermic
# ---------------------------------------------------------------------------

class TestMinimal:
    def test_nullsum_anchor(self, nullsum):
        assert frame_at(nullsum, 0.0, 0.0).k1.value == pytest.approx(-1 / math.sqrt(2), abs=1e-9)

    def test_nullsum_willmore(self, nullsum):
        grid = Grid.over((-1.0, 1.0, -1.0, 1.0), 5, 5)
        report, _ = detect(nullsum, grid)
        assert report.willmore.sup <= 1e-8
        assert report.willmore.is_willmore
        assert report.isothermic.separability_residual <= 1e-6
        assert report.isothermic.sign == 1

    def test_clifford_swillmore(self):
        grid = Grid.over((-0.5, 0.5, -0.5, 0.5), 4, 4)
        report = swillmore_test(catalog("clifford_s31"), grid)
        assert report.is_swillmore
        assert report.umbilic_points == 0
        assert report.mu1[0][0] == pytest.approx(0.0, abs=1e-10)


# ---------------------------------------------------------------------------
# Umbilic handling
# ---------------------------------------------------------------------------

class TestUmbilic:
    def test_plane_is_identically_umbilic(self):
        grid = Grid.over((-0.5, 0.5, -0.5, 0.5), 3, 3)
        plane = catalog("plane_r31")
        with pytest.raises(UmbilicError, match="identically umbilic"):
            swillmore_test(plane, grid)
        with pytest.raises(UmbilicError):
            isothermic_test(plane, grid)

    def test_detect_turns_umbilic_into_notes(self):
        grid = Grid.over((-0.5, 0.5, -0.5, 0.5), 3, 3)
        report, _ = detect(catalog("plane_r31"), grid)
        assert report.swillmore is None
        assert report.isothermic is None
        assert any("identically umbilic" in note for note in report.notes)
        assert report.willmore.is_willmore


# ---------------------------------------------------------------------------
# Adapted coordinates and reparametrization
# ---------------------------------------------------------------------------

class TestAdaptedCoordinates:
    def test_nullsum_ratio_is_split(self, nullsum):
        grid = Grid.over((-0.5, 0.5, -0.5, 0.5), 5, 5)
        adapted = adapt_coordinates(nullsum, grid)
        assert adapted.sign == 1
        assert adapted.f_prime[0] == pytest.approx(math.sqrt(2.0))
        assert adapted.g_prime[-1] == pytest.approx(1.0)
        assert adapted.verification_residual <= 1e-8
        assert adapted.f[-1] == pytest.approx(-0.5 + math.sqrt(2.0))

    def test_isothermic_gate_respects_tolerances(self, cylinder, unit_grid):
        report = isothermic_test(cylinder, unit_grid, tolerances=Tolerances(separability=-1.0))
        assert report.sign is None

    def test_inflection_has_no_sign(self, inflection):
        # grid straddles the umbilic line u = 0 without touching it
        report = isothermic_test(inflection, Grid.over((-0.25, 0.25, -0.25, 0.25), 4, 4))
        assert report.sign is None
        assert report.mixed_type
        assert report.umbilic_points == 0
        assert report.parallel_residual <= 1e-6
        with pytest.raises(IsothermicTypeError, match="mixed isothermic type"):
            adapt_coordinates(inflection, Grid.over((-0.25, 0.25, -0.25, 0.25), 4, 4))

    def test_inflection_umbilic_line_is_counted(self, inflection):
        report = isothermic_test(inflection, Grid.over((-0.25, 0.25, -0.25, 0.25), 5, 5))
        assert report.umbilic_points == 5
        assert report.sign is None


class TestReparametrizedClassification:
    def test_willmore_flag_survives(self, cylinder, nullsum):
        f, g = "2*u", "v + v^3/10"
        grid = Grid.over((-0.5, 0.5, -0.8, 0.8), 4, 4)
        minimal = reparametrize(nullsum, f, g, domain=(-0.6, 0.6, -1.0, 1.0))
        report, _ = detect(minimal, grid)
        assert report.willmore.is_willmore
        cyl = reparametrize(cylinder, f, g, domain=(-0.6, 0.6, -1.0, 1.0))
        report, _ = detect(cyl, grid)
        assert not report.willmore.is_willmore

    @pytest.mark.parametrize("name", ["cylinder_r31", "nullsum_minimal_r31"])
    def test_isothermic_sign_survives(self, name):
        chart = reparametrize(catalog(name), "2*u", "v + v^3/10", domain=(-0.6, 0.6, -1.0, 1.0))
        report = isothermic_test(chart, Grid.over((-0.5, 0.5, -0.8, 0.8), 4, 4))
        assert report.sign == isothermic_test(catalog(name), Grid.over((-1.0, 1.0, -0.8, 0.8), 4, 4)).sign == 1
        assert report.separability_residual <= 1e-6
        assert not report.mixed_type
