"""Tests for the isothermic Willmore to minimal surface pipeline."""

import numpy as np
import pytest

from lightcone_geometry.config import ChartSource, Tolerances
from lightcone_geometry.core.catalog import catalog, lift_point, parse_chart
from lightcone_geometry.core.grid import Grid
from lightcone_geometry.core.pseudo_linear import CausalType, TransformTarget, wedge_defect
from lightcone_geometry.core.thomsen import ThomsenResult, recover_spaceform_chart, thomsen_pipeline
from lightcone_geometry.errors import BranchMismatchError, PreconditionFailed

FINE = Grid.over((-0.05, 0.05, -0.05, 0.05), 11, 11)

# minimal, so Willmore; k1 vanishes on u = 0 and changes sign across it
INFLECTION = """
source = "R31"
components = ["u - u^5/5 + sin(v)/2", "2*u^3/3 - cos(v)/2", "u + u^5/5 - v/2"]
domain = [-0.5, 0.5, -0.5, 0.5]
"""


def lifted(chart, grid, scale=1.0):
    Y = np.empty(grid.shape + (5,))
    for i, j, u, v in grid.points():
        Y[i, j] = scale * lift_point(chart.source, chart.point(u, v)).coords
    return Y


# ---------------------------------------------------------------------------
# Space-form recovery
# ---------------------------------------------------------------------------

class TestRecover:
    def test_cylinder_round_trip(self):
        cylinder = catalog("cylinder_r31")
        recovered = recover_spaceform_chart(lifted(cylinder, FINE, scale=3.0), ChartSource.R31, FINE)
        assert recovered.excluded == 0
        assert np.allclose(recovered.x[4, 7], cylinder.point(FINE.us[4], FINE.vs[7]))
        assert np.nanmax(np.abs(np.abs(recovered.H) - 0.5)) <= 1e-6
        assert np.nanmax(np.abs(recovered.omega)) <= 1e-8

    def test_boundary_point_excluded(self):
        Y = lifted(catalog("cylinder_r31"), FINE)
        Y[5, 5] = [1.0, 0.0, 0.0, 0.0, 1.0]
        recovered = recover_spaceform_chart(Y, ChartSource.R31, FINE)
        assert recovered.excluded == 1
        assert np.isnan(recovered.x[5, 5]).all()
        assert np.isfinite(recovered.H[0, 0])

    def test_every_point_excluded(self):
        Y = np.tile([1.0, 0.0, 0.0, 0.0, 1.0], FINE.shape + (1,))
        recovered = recover_spaceform_chart(Y, ChartSource.R31, FINE)
        assert recovered.excluded == 121
        assert np.isnan(recovered.H).all()

    def test_non_null_input(self):
        with pytest.raises(BranchMismatchError, match="branch mismatch: S31"):
            recover_spaceform_chart(np.ones(FINE.shape + (5,)), ChartSource.S31, FINE)

    def test_rows(self):
        recovered = recover_spaceform_chart(lifted(catalog("cylinder_r31"), FINE), ChartSource.R31, FINE)
        rows = recovered.rows()
        assert len(rows) == 121
        assert list(rows[0]) == ["u", "v", "x0", "x1", "x2", "omega", "H"]


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

class TestPipeline:
    def test_clifford_lands_in_de_sitter_space(self):
        result = thomsen_pipeline(catalog("clifford_s31"), FINE)
        assert result.causal is CausalType.TIMELIKE
        assert result.branch is ChartSource.S31
        assert result.transform_target == TransformTarget.DE_SITTER_POLE.value
        assert result.H_residual <= 1e-7
        assert result.metric_residual <= 1e-10
        assert result.passed()

    def test_nullsum_stays_in_minkowski_space(self):
        result = thomsen_pipeline(catalog("nullsum_minimal_r31"), FINE)
        assert result.rho_sup <= 1e-7
        assert result.causal is CausalType.NULL
        assert result.branch is ChartSource.R31
        assert wedge_defect(np.array(result.Y0), np.array([1.0, 0.0, 0.0, 0.0, 1.0])) <= 1e-8
        assert result.passed()
        assert result.min_exp2omega > 0
        assert "recovered" not in result.model_dump()

    def test_plane_is_contained_in_s21(self):
        result = thomsen_pipeline(catalog("plane_r31"), Grid.over((-0.5, 0.5, -0.5, 0.5), 5, 5))
        assert result.contained_in_s21
        assert result.passed()
        assert "contained in some S^2_1" in str(result)

    def test_missing_h_residual_fails(self):
        result = ThomsenResult(chart="empty", grid=FINE.describe(), causal=CausalType.NULL,
                               branch=ChartSource.R31, rho_sup=0.0, excluded_points=121)
        assert result.H_residual is None
        assert not result.passed()
        assert str(result).endswith("rho sup 0.000e+00 | H sup n/a")

    def test_cylinder_is_not_willmore(self):
        with pytest.raises(PreconditionFailed, match="precondition failed: willmore") as info:
            thomsen_pipeline(catalog("cylinder_r31"), FINE)
        assert info.value.condition == "willmore"

    def test_isothermic_gate(self):
        with pytest.raises(PreconditionFailed) as info:
            thomsen_pipeline(catalog("clifford_s31"), FINE, tolerances=Tolerances(separability=-1.0))
        assert info.value.condition == "isothermic"


class TestGates:
    """The gates run in order: umbilic-free, isothermic, willmore."""

    @pytest.fixture(scope="class")
    def inflection(self):
        return parse_chart(INFLECTION, name="inflection")

    def test_sign_change_fails_isothermic(self, inflection):
        grid = Grid.over((-0.25, 0.25, -0.25, 0.25), 4, 4)
        with pytest.raises(PreconditionFailed, match="precondition failed: isothermic") as info:
            thomsen_pipeline(inflection, grid)
        assert info.value.condition == "isothermic"

    def test_umbilic_line_fails_umbilic_free(self, inflection):
        grid = Grid.over((-0.25, 0.25, -0.25, 0.25), 5, 5)
        with pytest.raises(PreconditionFailed, match="precondition failed: umbilic-free") as info:
            thomsen_pipeline(inflection, grid)
        assert info.value.condition == "umbilic-free"

    def test_isothermic_but_not_willmore(self):
        grid = Grid.over((-0.25, 0.25, -0.25, 0.25), 5, 5)
        with pytest.raises(PreconditionFailed) as info:
            thomsen_pipeline(catalog("cylinder_r31"), grid)
        assert info.value.condition == "willmore"
