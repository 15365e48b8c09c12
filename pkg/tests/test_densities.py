import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from cccd import densities as D


def model_zoo():
    return [
        D.Uniform(),
        D.ShrunkUniform(0.0),
        D.ShrunkUniform(0.1),
        D.ShrunkUniform(0.3),
        D.ShrunkUniform(0.45),
        D.GapUniform(0.0),
        D.GapUniform(0.1),
        D.GapUniform(1 / 6),
        D.GapUniform(0.35),
        D.GapUniform(0.45),
        D.TwoStep(-1.0),
        D.TwoStep(-0.5),
        D.TwoStep(0.5),
        D.TwoStep(1.0),
        D.ThreeStep(-0.8),
        D.ThreeStep(0.8),
        D.Linear(-2.0),
        D.Linear(-1.0),
        D.Linear(0.0),
        D.Linear(1.0),
        D.Linear(2.0),
        D.QPower(0.0),
        D.QPower(0.5),
        D.QPower(1.0),
        D.QPower(2.0),
        D.QPower(3.5),
        D.PieceQuadratic(0.0),
        D.PieceQuadratic(0.4),
        D.PieceQuadratic(1.0),
        D.AbsSine(),
        D.ArcSine(),
        D.Beta(1, 1),
        D.Beta(4, 1),
        D.Beta(1, 4),
        D.Beta(4, 2),
        D.Beta(2, 4),
        D.Beta(2, 2),
        D.Beta(1.5, 3.25),
        D.TruncatedNormal(0.5, 0.1),
        D.TruncatedNormal(0.2, 0.5),
        D.TruncatedNormal(-1.0, 2.0),
        D.SquareCdf(),
        D.GeneralLinear(0.5, (1.0, 3.0)),
        D.GeneralLinear(-0.125, (-2.0, 2.0)),
    ]


def positive_density_points(model, count=41):
    """Interior grid points of positive density, clear of any knot."""
    lo, hi = model.support.lo, model.support.hi
    grid = lo + (hi - lo) * (np.arange(1, count + 1) / (count + 1))
    grid = grid[model.pdf(grid) > 1e-12]
    for k in model.interior_knots():
        grid = grid[np.abs(grid - k) > 1e-6]
    return grid


@pytest.mark.parametrize("model", model_zoo(), ids=repr)
def test_mass_is_one(model):
    # construction already enforces the 1e-10 mass check; recompute to be sure
    pts = [k for k in model.interior_knots()]
    val, _ = integrate.quad(lambda t: float(model.pdf(t)), model.support.lo,
                            model.support.hi, points=pts or None, limit=200)
    if model.unbounded:
        val = model.cdf(model.support.hi) - model.cdf(model.support.lo)
    assert abs(val - 1.0) < 1e-9


@pytest.mark.parametrize("model", model_zoo(), ids=repr)
def test_cdf_quantile_round_trip(model):
    u = np.linspace(1e-3, 1 - 1e-3, 211)
    x = model.quantile(u)
    assert np.all(np.diff(x) >= -1e-12)
    assert np.max(np.abs(model.cdf(x) - u)) < 1e-10
    pts = positive_density_points(model)
    back = model.quantile(model.cdf(pts))
    assert np.max(np.abs(back - pts)) < 1e-9


@pytest.mark.parametrize("model", model_zoo(), ids=repr)
def test_cdf_endpoints_and_monotone(model):
    assert model.cdf(model.support.lo) == 0.0
    assert abs(model.cdf(model.support.hi) - 1.0) < 1e-12
    xs = np.linspace(model.support.lo, model.support.hi, 301)
    c = model.cdf(xs)
    assert np.all(np.diff(c) >= -1e-14)
    assert np.all((c >= 0.0) & (c <= 1.0))


def test_beta_symmetry_identity():
    grid = np.linspace(0.0, 1.0, 1000)
    for nu1, nu2 in [(4, 1), (4, 2), (2, 2), (1.5, 3.0)]:
        left = D.Beta(nu1, nu2).cdf(grid)
        right = 1.0 - D.Beta(nu2, nu1).cdf(1.0 - grid)
        assert np.max(np.abs(left - right)) < 1e-12


@pytest.mark.parametrize("model", model_zoo(), ids=repr)
def test_order_zero_one_sided_matches_pdf_limit(model):
    h1, h2 = 1e-10, 1e-10 / 4096
    w = model.support.width
    combos = [("lo", "+", model.support.lo, 1), ("hi", "-", model.support.hi, -1),
              ("mid", "+", model.support.mid, 1), ("mid", "-", model.support.mid, -1)]
    for which, side, base, direction in combos:
        d = model.one_sided_derivative(which, side, 0)
        if d.is_infinite:
            assert model.pdf(base + direction * h2 * w) > 1e4
            continue
        e1 = abs(model.pdf(base + direction * h1 * w) - d.value)
        e2 = abs(model.pdf(base + direction * h2 * w) - d.value)
        # the pdf must converge to the stated one-sided value
        assert e2 <= max(1e-8, 0.51 * e1)


def test_one_sided_derivative_spot_values():
    pi2 = math.pi ** 2
    assert D.AbsSine().one_sided_derivative("lo", "+", 1).value == pytest.approx(pi2, abs=1e-12)
    assert D.AbsSine().one_sided_derivative("mid", "+", 1).value == pytest.approx(pi2, abs=1e-12)
    assert D.AbsSine().one_sided_derivative("mid", "-", 1).value == pytest.approx(-pi2, abs=1e-12)
    assert D.AbsSine().one_sided_derivative("hi", "-", 1).value == pytest.approx(-pi2, abs=1e-12)

    q2 = D.QPower(2.0)
    assert q2.one_sided_derivative("lo", "+", 0).value == 0.0
    assert q2.one_sided_derivative("lo", "+", 1).value == 0.0
    assert q2.one_sided_derivative("lo", "+", 2).value == pytest.approx(24.0)
    assert q2.one_sided_derivative("mid", "-", 0).value == pytest.approx(3.0)
    assert q2.one_sided_derivative("hi", "-", 1).value == pytest.approx(12.0)

    pq = D.PieceQuadratic(0.0)
    assert pq.one_sided_derivative("lo", "+", 2).value == pytest.approx(24.0)
    assert pq.one_sided_derivative("mid", "+", 2).value == pytest.approx(24.0)
    assert pq.one_sided_derivative("mid", "-", 0).value == pytest.approx(3.0)
    assert pq.one_sided_derivative("hi", "-", 0).value == pytest.approx(3.0)

    lin = D.Linear(1.0)
    assert lin.one_sided_derivative("lo", "+", 0).value == pytest.approx(0.5)
    assert lin.one_sided_derivative("hi", "-", 0).value == pytest.approx(1.5)
    assert lin.one_sided_derivative("mid", "-", 1).value == pytest.approx(1.0)

    b22 = D.Beta(2, 2)
    assert b22.one_sided_derivative("lo", "+", 0).value == 0.0
    assert b22.one_sided_derivative("lo", "+", 1).value == pytest.approx(6.0)
    assert b22.one_sided_derivative("lo", "+", 2).value == pytest.approx(-12.0)
    assert b22.one_sided_derivative("hi", "-", 1).value == pytest.approx(-6.0)

    two = D.TwoStep(0.5)
    assert two.one_sided_derivative("mid", "-", 0).value == pytest.approx(1.5)
    assert two.one_sided_derivative("mid", "+", 0).value == pytest.approx(0.5)


def test_infinite_derivative_flags():
    a = D.ArcSine()
    for which, side in [("lo", "+"), ("hi", "-")]:
        d = a.one_sided_derivative(which, side, 0)
        assert d.is_infinite and math.isinf(d.value) and d.value > 0
    assert a.one_sided_derivative("lo", "+", 1).value == -math.inf
    assert a.one_sided_derivative("hi", "-", 1).value == math.inf
    assert a.one_sided_derivative("mid", "+", 0).value == pytest.approx(2 / math.pi)

    d = D.QPower(0.5).one_sided_derivative("lo", "+", 1)
    assert d.is_infinite and d.value == math.inf
    d = D.QPower(1.5).one_sided_derivative("lo", "+", 2)
    assert d.is_infinite and d.value == math.inf
    d = D.Beta(1.5, 1).one_sided_derivative("lo", "+", 1)
    assert d.is_infinite and d.value == math.inf
    # integer shapes stay finite
    assert not D.Beta(3, 1).one_sided_derivative("lo", "+", 2).is_infinite


def test_one_sided_derivative_errors():
    m = D.Uniform()
    with pytest.raises(ValueError, match="order"):
        m.one_sided_derivative("lo", "+", 3)
    with pytest.raises(ValueError, match="side"):
        m.one_sided_derivative("lo", "-", 0)
    with pytest.raises(ValueError, match="side"):
        m.one_sided_derivative("hi", "+", 0)
    with pytest.raises(ValueError, match="point"):
        m.one_sided_derivative(0.3, "+", 0)


def test_parameter_validation_messages():
    with pytest.raises(ValueError, match="delta"):
        D.ShrunkUniform(0.5)
    with pytest.raises(ValueError, match="delta"):
        D.GapUniform(0.25)
    with pytest.raises(ValueError, match="delta"):
        D.TwoStep(1.5)
    with pytest.raises(ValueError, match="a:"):
        D.Linear(2.5)
    with pytest.raises(ValueError, match="q"):
        D.QPower(-0.5)
    with pytest.raises(ValueError, match="nu1"):
        D.Beta(0.5, 2)
    with pytest.raises(ValueError, match="nu2"):
        D.Beta(2, 0.0)
    with pytest.raises(ValueError, match="sigma"):
        D.TruncatedNormal(0.5, 0.0)
    with pytest.raises(ValueError, match="a:"):
        D.GeneralLinear(3.0, (0.0, 2.0))
    with pytest.raises(ValueError, match="support"):
        D.SupportInterval(1.0, 1.0)


def test_spec_round_trip():
    for model in model_zoo():
        spec = D.model_to_spec(model)
        clone = D.model_from_spec(json.dumps(spec))
        assert clone == model
        assert D.model_to_spec(clone) == spec


def test_spec_parse_errors_name_fields():
    with pytest.raises(ValueError, match="family"):
        D.model_from_spec({"params": {}})
    with pytest.raises(ValueError, match="family"):
        D.model_from_spec({"family": "nope"})
    with pytest.raises(ValueError, match="params"):
        D.model_from_spec({"family": "linear", "params": [1]})
    with pytest.raises(ValueError, match="params"):
        D.model_from_spec({"family": "linear", "params": {"slope": 1.0}})
    with pytest.raises(ValueError, match="delta"):
        D.model_from_spec({"family": "gap_uniform", "params": {"delta": 0.2}})
    with pytest.raises(ValueError, match="support"):
        D.model_from_spec({"family": "general_linear", "params": {"a": 0.1}})
    with pytest.raises(ValueError, match="support"):
        D.model_from_spec({"family": "uniform", "support": [0, 1, 2]})
    with pytest.raises(ValueError, match="not valid JSON"):
        D.model_from_spec("{family: uniform}")
    with pytest.raises(ValueError, match="unknown field"):
        D.model_from_spec({"family": "uniform", "extra": 1})


def test_sampling_is_sorted_deterministic_and_unbiased():
    rng = np.random.default_rng(7)
    xs = D.sample(D.Uniform(), 100_000, rng)
    assert np.all(np.diff(xs) >= 0)
    assert abs(xs.mean() - 0.5) < 0.005

    again = D.sample(D.Uniform(), 1000, np.random.default_rng(123))
    twice = D.sample(D.Uniform(), 1000, np.random.default_rng(123))
    assert np.array_equal(again, twice)

    model = D.Beta(4, 1)
    mean_oracle, _ = integrate.quad(lambda t: t * float(model.pdf(t)), 0, 1)
    assert mean_oracle == pytest.approx(0.8, abs=1e-12)
    xs = D.sample(model, 100_000, np.random.default_rng(11))
    se = xs.std() / math.sqrt(xs.size)
    assert abs(xs.mean() - mean_oracle) < 4 * se
    assert xs.min() >= 0.0 and xs.max() <= 1.0


def test_general_linear_matches_unit_rescale():
    g = D.GeneralLinear(0.5, (1.0, 3.0))
    unit = g.to_unit()
    assert isinstance(unit, D.Linear)
    assert unit.a == pytest.approx(2.0)
    t = np.linspace(0.0, 1.0, 101)
    assert np.max(np.abs(g.cdf(1.0 + 2.0 * t) - unit.cdf(t))) < 1e-12
    # densities scale by the width
    assert np.max(np.abs(2.0 * g.pdf(1.0 + 2.0 * t) - unit.pdf(t))) < 1e-12


def test_interior_pdf_derivative_matches_finite_differences():
    probes = {
        D.Linear(1.5): [0.2, 0.7],
        D.QPower(2.0): [0.2, 0.8],
        D.PieceQuadratic(0.3): [0.2, 0.8],
        D.AbsSine(): [0.2, 0.8],
        D.ArcSine(): [0.3, 0.6],
        D.Beta(2, 4): [0.3, 0.6],
        D.TruncatedNormal(0.4, 0.3): [0.3, 0.6],
        D.SquareCdf(): [0.25, 0.75],
    }
    h = 1e-5
    for model, xs in probes.items():
        for x in xs:
            fd1 = (model.pdf(x + h) - model.pdf(x - h)) / (2 * h)
            assert model.pdf_derivative(x, 1) == pytest.approx(fd1, rel=1e-5, abs=1e-5)
            fd2 = (model.pdf(x + h) - 2 * model.pdf(x) + model.pdf(x - h)) / h ** 2
            assert model.pdf_derivative(x, 2) == pytest.approx(fd2, rel=1e-3, abs=1e-3)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 0.49, exclude_max=True), st.floats(0.0, 1.0))
def test_step_quantile_property(delta, u):
    model = D.ShrunkUniform(delta)
    x = model.quantile(u)
    assert model.support.lo <= x <= model.support.hi
    assert model.cdf(x) == pytest.approx(u, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(-2.0, 2.0), st.floats(0.001, 0.999))
def test_linear_quantile_property(a, u):
    model = D.Linear(a)
    assert model.cdf(model.quantile(u)) == pytest.approx(u, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.0, 6.0), st.floats(1.0, 6.0))
def test_beta_pdf_nonnegative_and_mass(nu1, nu2):
    model = D.Beta(nu1, nu2)
    xs = np.linspace(0, 1, 201)
    assert np.all(model.pdf(xs) >= 0)
    assert model.cdf(1.0) == pytest.approx(1.0, abs=1e-12)
