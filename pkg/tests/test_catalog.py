"""Tests for surface charts, light-cone lifts and space-form invariants."""

import math

import numpy as np
import pytest

from lightcone_geometry.config import ChartSource
from lightcone_geometry.core.catalog import (
    CATALOG_NAMES,
    catalog,
    catalog_text,
    fundamental_forms,
    lift_point,
    lift_to_lightcone,
    list_catalog,
    parse_chart,
)
from lightcone_geometry.errors import (
    ChartSyntaxError,
    ChartValidationError,
    DegenerateConformalFactorError,
    DomainError,
)


@pytest.fixture
def cylinder():
    return catalog("cylinder_r31")


# ---------------------------------------------------------------------------
# Catalog and config parsing
# ---------------------------------------------------------------------------

class TestCatalog:
    def test_list(self):
        names = [entry["name"] for entry in list_catalog()]
        assert names == list(CATALOG_NAMES)

    @pytest.mark.parametrize("name", CATALOG_NAMES)
    def test_entries_validate(self, name):
        chart = catalog(name)
        assert chart.name == name
        assert chart.contains(0.0, 0.0)

    def test_unknown_name(self):
        with pytest.raises(ChartValidationError, match="unknown catalog chart"):
            catalog("torus")

    def test_user_entry_needs_config(self):
        with pytest.raises(ChartValidationError):
            catalog("user")

    def test_param_override(self):
        chart = catalog("cylinder_r31", {"r": 2.0})
        assert chart.params["r"] == 2.0
        assert chart.point(0.0, 0.0) == pytest.approx([2.0, 0.0, 0.0])

    def test_catalog_reference_in_config(self):
        chart = parse_chart('catalog = "cylinder_r31"\nparams.r = 3.0\n')
        assert chart.point(0.0, 0.0)[0] == pytest.approx(3.0)

    def test_catalog_text_is_config(self):
        assert 'source = "S31"' in catalog_text("clifford_s31")


class TestParseChart:
    def test_user_chart(self):
        chart = parse_chart('source = "R31"\ncomponents = ["(u+v)/2", "0", "(u-v)/2"]\ndomain = [0, 1, 0, 1]\n')
        assert chart.source is ChartSource.R31
        assert chart.domain == (0.0, 1.0, 0.0, 1.0)

    def test_wrong_component_count(self):
        with pytest.raises(ChartValidationError, match="wrong component count"):
            parse_chart('source = "S31"\ncomponents = ["u", "v", "0"]\n')

    def test_constraint_violation(self):
        with pytest.raises(ChartValidationError, match="space-form constraint"):
            parse_chart('source = "S31"\ncomponents = ["u", "v", "0", "0"]\n')

    def test_not_asymptotic(self):
        with pytest.raises(ChartValidationError, match="not asymptotic"):
            parse_chart('source = "R31"\ncomponents = ["u", "v", "0"]\n')

    def test_expression_error_has_position(self):
        with pytest.raises(ChartSyntaxError) as info:
            parse_chart('source = "R31"\ncomponents = ["u", "v + q", "0"]\n')
        assert info.value.line == 2

    def test_malformed_toml(self):
        with pytest.raises(ChartSyntaxError):
            parse_chart('source = "R31\n')

    def test_unknown_key(self):
        with pytest.raises(ChartValidationError):
            parse_chart('source = "R31"\ncomponents = ["u", "v", "0"]\ncolour = 1\n')

    def test_domain_check(self, cylinder):
        with pytest.raises(DomainError, match="outside domain"):
            cylinder.point(5.0, 0.0)


# ---------------------------------------------------------------------------
# Lifts
# ---------------------------------------------------------------------------

class TestLift:
    @pytest.mark.parametrize("name", ["cylinder_r31", "clifford_s31", "nullsum_minimal_r31"])
    def test_lift_is_null_to_all_orders(self, name):
        chart = catalog(name)
        phi = lift_to_lightcone(chart, 0.2, -0.1, 4)
        assert phi.inner(phi).max_abs() < 1e-12

    def test_r31_lift_shape(self):
        p = lift_point(ChartSource.R31, np.array([1.0, 2.0, 0.5]))
        q = 1 + 4 - 0.25
        assert p.coords == pytest.approx([(q - 1) / 2, 1.0, 2.0, 0.5, (q + 1) / 2])

    def test_h31_lift_shape(self):
        p = lift_point(ChartSource.H31, np.array([0.0, 0.0, 1.0, 0.0]))
        assert p.coords == pytest.approx([1.0, 0.0, 0.0, 1.0, 0.0])
        assert p.is_null()


# ---------------------------------------------------------------------------
# Fundamental forms
# ---------------------------------------------------------------------------

class TestFundamentalForms:
    def test_cylinder(self, cylinder):
        forms = fundamental_forms(cylinder, 0.3, 0.1)
        assert forms.omega == pytest.approx(0.0, abs=1e-12)
        assert forms.Omega1 == pytest.approx(-0.25, abs=1e-10)
        assert forms.Omega2 == pytest.approx(-0.25, abs=1e-10)
        assert forms.H == pytest.approx(-0.5, abs=1e-10)
        assert not forms.v_flipped

    def test_nullsum_minimal(self):
        forms = fundamental_forms(catalog("nullsum_minimal_r31"), 0.0, 0.0)
        assert forms.exp2omega == pytest.approx(2.0)
        assert forms.Omega1 == pytest.approx(-1.0)
        assert forms.Omega2 == pytest.approx(-0.5)
        assert forms.H == pytest.approx(0.0, abs=1e-12)

    def test_v_flip(self):
        chart = parse_chart(
            'source = "R31"\ncomponents = ["cos((u-v)/2)", "sin((u-v)/2)", "(u+v)/2"]\n'
        )
        forms = fundamental_forms(chart, 0.0, 0.0)
        assert forms.v_flipped
        assert forms.exp2omega == pytest.approx(1.0)

    def test_degenerate_conformal_factor(self):
        chart = parse_chart(
            'source = "R31"\ncomponents = ["sin(u) + sin(v)", "-cos(u) - cos(v)", "u - v"]\n'
            "domain = [-4, 4, -4, 4]\n"
        )
        with pytest.raises(DegenerateConformalFactorError):
            fundamental_forms(chart, math.pi, 0.0)
