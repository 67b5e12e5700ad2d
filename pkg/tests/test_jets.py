"""Tests for truncated bivariate Taylor jets."""

import math

import numpy as np
import pytest

from lightcone_geometry.core import jets
from lightcone_geometry.core.catalog import catalog
from lightcone_geometry.core.jets import Jet2, JetVector
from lightcone_geometry.core.pseudo_linear import AMBIENT
from lightcone_geometry.errors import JetDomainError, OrderExhaustedError


@pytest.fixture
def uv():
    return Jet2.variable("u", 0.3, 6), Jet2.variable("v", -0.2, 6)


# ---------------------------------------------------------------------------
# Construction and access
# ---------------------------------------------------------------------------

class TestConstruction:
    def test_variables(self, uv):
        u, v = uv
        assert u.value == pytest.approx(0.3)
        assert u.partial(1, 0) == 1.0
        assert u.partial(0, 1) == 0.0
        assert v.partial(0, 1) == 1.0

    def test_from_partials(self):
        f = Jet2.from_partials({(0, 0): 2.0, (2, 1): 6.0}, 4)
        assert f.value == 2.0
        assert f.coefficient(2, 1) == pytest.approx(3.0)
        assert f.partial(2, 1) == pytest.approx(6.0)

    def test_partial_past_order(self, uv):
        with pytest.raises(OrderExhaustedError, match="order exhausted"):
            uv[0].partial(4, 3)

    def test_derivative_drops_order(self, uv):
        u, _ = uv
        assert (u * u).du().order == 5
        with pytest.raises(OrderExhaustedError):
            Jet2.constant(1.0, 0).du()

    def test_at_evaluates_polynomial(self, uv):
        u, v = uv
        f = u * u * v
        assert f.at(0.1, 0.05) == pytest.approx(0.4 ** 2 * -0.15)


# ---------------------------------------------------------------------------
# Arithmetic and elementary functions
# ---------------------------------------------------------------------------

class TestArithmetic:
    def test_product_rule(self, uv):
        u, v = uv
        f = jets.sin(u) * jets.exp(v)
        assert f.partial(1, 1) == pytest.approx(math.cos(0.3) * math.exp(-0.2))
        assert f.partial(3, 2) == pytest.approx(-math.cos(0.3) * math.exp(-0.2))

    def test_quotient(self, uv):
        u, v = uv
        f = u / (1.0 + v)
        assert f.partial(0, 2) == pytest.approx(2 * 0.3 / 0.8 ** 3)

    def test_reflected_operators(self, uv):
        u, _ = uv
        assert (2.0 - u).value == pytest.approx(1.7)
        assert (1.0 / u).partial(1, 0) == pytest.approx(-1 / 0.09)
        assert (2.0 ** u).partial(1, 0) == pytest.approx(math.log(2.0) * 2 ** 0.3)

    def test_numpy_scalar_on_left(self, uv):
        u, _ = uv
        f = np.float64(3.0) * u
        assert isinstance(f, Jet2)
        assert f.partial(1, 0) == 3.0

    def test_fractional_power(self, uv):
        u, _ = uv
        f = jets.power(1.0 + u, 1.5)
        assert f.partial(2, 0) == pytest.approx(0.75 * 1.3 ** -0.5)

    def test_hyperbolic(self, uv):
        _, v = uv
        f = jets.cosh(v) ** 2 - jets.sinh(v) ** 2
        assert f.value == pytest.approx(1.0)
        assert f.max_abs() == pytest.approx(1.0)

    def test_log_exp_inverse(self, uv):
        u, v = uv
        f = jets.log(jets.exp(u + 2.0 * v))
        assert f.partial(1, 0) == pytest.approx(1.0)
        assert f.partial(0, 1) == pytest.approx(2.0)
        assert abs(f.partial(2, 1)) < 1e-10

    def test_division_by_zero_constant(self):
        with pytest.raises(JetDomainError, match="division"):
            Jet2.constant(1.0, 3) / Jet2.variable("u", 0.0, 3)

    def test_sqrt_of_negative(self):
        with pytest.raises(JetDomainError):
            jets.sqrt(Jet2.constant(-1.0, 2))
        with pytest.raises(JetDomainError):
            jets.log(Jet2.constant(0.0, 2))



# ---------------------------------------------------------------------------
# Elementary function identities, every partial up to the order
# ---------------------------------------------------------------------------

def assert_same_jet(f, g, tol=1e-9):
    assert f.order == g.order
    for i in range(f.order + 1):
        for j in range(f.order + 1 - i):
            assert f.partial(i, j) == pytest.approx(g.partial(i, j), rel=tol, abs=tol), (i, j)


class TestIdentities:
    @pytest.fixture
    def f(self, uv):
        u, v = uv
        return 1.5 + u * v + 0.3 * jets.sin(u - 2.0 * v)

    def test_sqrt_squared(self, f):
        root = jets.sqrt(f)
        assert_same_jet(root * root, f)

    def test_exp_of_log(self, f):
        assert_same_jet(jets.exp(jets.log(f)), f)

    def test_pythagoras(self, f):
        assert_same_jet(jets.sin(f) ** 2 + jets.cos(f) ** 2, Jet2.constant(1.0, f.order))

    def test_identities_hold_at_low_order(self):
        u = Jet2.variable("u", 0.7, 2)
        g = 2.0 + u * u
        assert_same_jet(jets.sqrt(g) * jets.sqrt(g), g)

# ---------------------------------------------------------------------------
# Vector jets
# ---------------------------------------------------------------------------

class TestJetVector:
    def test_inner_product_rule(self, uv):
        u, v = uv
        zero = Jet2.constant(0.0, 6)
        x = JetVector.from_components([u, v, zero, zero, u * v], AMBIENT)
        q = x.inner(x)
        # u^2 + v^2 - u^2 v^2
        assert q.value == pytest.approx(0.09 + 0.04 - 0.09 * 0.04)
        assert q.partial(1, 1) == pytest.approx(-4 * 0.3 * -0.2)

    def test_constant_vector(self):
        c = JetVector.constant(np.arange(5.0), 3, AMBIENT)
        assert c.du().sup_norm() == 0.0
        assert c.value.coords.tolist() == [0.0, 1.0, 2.0, 3.0, 4.0]


# ---------------------------------------------------------------------------
# Finite-difference oracle on catalog charts
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["cylinder_r31", "nullsum_minimal_r31", "clifford_s31"])
def test_partials_match_central_differences(name):
    chart = catalog(name)
    u0, v0, h = 0.21, -0.13, 1e-3
    comps = chart.position_jets(u0, v0, 3)

    def value(k, u, v):
        return chart.point(u, v)[k]

    def fd(k, i, j):
        # tensor central differences of order i in u and j in v
        stencil = {0: [(0, 1.0)], 1: [(-1, -0.5), (1, 0.5)], 2: [(-1, 1.0), (0, -2.0), (1, 1.0)],
                   3: [(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)]}
        total = 0.0
        for a, wa in stencil[i]:
            for b, wb in stencil[j]:
                total += wa * wb * value(k, u0 + a * h, v0 + b * h)
        return total / h ** (i + j)

    for k, jet in enumerate(comps):
        for i in range(4):
            for j in range(4 - i):
                exact = jet.partial(i, j)
                assert fd(k, i, j) == pytest.approx(exact, rel=1e-5, abs=1e-5)
