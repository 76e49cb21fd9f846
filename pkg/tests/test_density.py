import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from histloom.density import (
    AtomicMixture,
    BinLookup,
    BinnedEmpirical,
    ContractViolation,
    DiscreteDistribution,
    EmpiricalSample,
    Interval,
    PiecewiseDensity,
    alpha,
    discrete_flatten,
    discretize,
    draw_points,
    flatten,
    l1_distance,
    mass_on,
    sample,
    tv_distance,
)
from histloom.oracles import quad_l1, quad_mass
from histloom.partition import IntervalPartition

from .conftest import densities

U = PiecewiseDensity.uniform()


def step(lo, hi, v):
    """Density v on [lo, hi), zero elsewhere."""
    bps = sorted({0.0, lo, hi, 1.0})
    vals = [v if a == lo else 0.0 for a in bps[:-1]]
    return PiecewiseDensity(bps, vals)


# -- construction ---------------------------------------------------------


def test_breakpoints_validated():
    with pytest.raises(ContractViolation):
        PiecewiseDensity([0.0, 0.6, 0.4, 1.0], [1, 1, 1])
    with pytest.raises(ContractViolation):
        PiecewiseDensity([0.1, 1.0], [1])
    with pytest.raises(ContractViolation):
        PiecewiseDensity([0.0, 1.0], [-1])
    with pytest.raises(ContractViolation):
        PiecewiseDensity([0.0, 0.5, 1.0], [1])


def test_zero_width_pieces_dropped():
    f = PiecewiseDensity([0.0, 0.5, 0.5, 1.0], [1.0, 7.0, 1.0])
    assert f.pieces == 2
    assert f.total_mass == pytest.approx(1.0)


def test_full_distribution_flag():
    assert U.is_full_distribution
    assert not U.scaled(0.5).is_full_distribution


def test_interval_rejects_empty():
    with pytest.raises(ContractViolation):
        Interval(0.5, 0.5)
    with pytest.raises(ContractViolation):
        Interval(0.2, 1.5)


def test_json_roundtrip(two_flat):
    assert PiecewiseDensity.from_dict(two_flat.to_dict()).same_as(two_flat)


# -- flatten --------------------------------------------------------------


def test_flatten_uniform_is_identity():
    h = flatten(U, [Interval(0, 0.5), Interval(0.5, 1)])
    assert l1_distance(h, U) == 0.0


def test_flatten_partial_cover():
    r = PiecewiseDensity([0.0, 0.25, 1.0], [2.0, 2.0 / 3.0])
    h = flatten(r, [Interval(0.0, 0.5)])
    assert h.pdf(0.1) == pytest.approx(4.0 / 3.0, abs=1e-15)
    assert h.pdf(0.7) == 0.0
    assert h.total_mass == pytest.approx(quad_mass(r, 0.0, 0.5), abs=1e-12)


def test_flatten_empirical():
    h = flatten(EmpiricalSample([0.1, 0.1, 0.9]), [Interval(0, 0.5), Interval(0.5, 1)])
    assert h.values.tolist() == pytest.approx([(2 / 3) / 0.5, (1 / 3) / 0.5])


def test_flatten_overlap_rejected():
    with pytest.raises(ContractViolation):
        flatten(U, [Interval(0, 0.6), Interval(0.5, 1)])


@given(densities(), st.lists(st.floats(0.01, 0.99), max_size=10, unique=True))
def test_flatten_conserves_mass(f, inner):
    P = IntervalPartition([0.0, *sorted(inner), 1.0])
    assert abs(flatten(f, P).total_mass - f.total_mass) <= 1e-12


@given(densities(grid=16), st.sets(st.integers(1, 15), max_size=8))
def test_discretize_commutes_with_flatten(f, cells):
    cuts = [0, *sorted(cells), 16]
    P = IntervalPartition(np.array(cuts) / 16)
    a = discretize(flatten(f, P), 16).weights
    b = discrete_flatten(discretize(f, 16), cuts).weights
    assert np.allclose(a, b, rtol=0, atol=1e-15)


# -- mass_on --------------------------------------------------------------


def test_mass_on_examples():
    assert mass_on(U, Interval(0.25, 0.75)) == 0.5
    assert mass_on(step(0.0, 0.5, 2.0), Interval(0.25, 0.75)) == 0.5
    assert mass_on(EmpiricalSample([0.2, 0.2, 0.8, 0.9]), Interval(0, 0.5)) == 0.5


def test_empirical_half_open():
    e = EmpiricalSample([0.5, 0.5, 0.25])
    assert mass_on(e, Interval(0.0, 0.5)) == pytest.approx(1 / 3)
    assert mass_on(e, Interval(0.5, 1.0)) == pytest.approx(2 / 3)


def test_binned_empirical_only_at_cuts():
    b = BinnedEmpirical([0.0, 0.5, 1.0], [3, 1])
    assert mass_on(b, Interval(0.0, 0.5)) == 0.75
    with pytest.raises(ContractViolation):
        b.cdf(0.3)


@given(densities(), st.floats(0, 1), st.floats(0, 1))
def test_mass_on_matches_quadrature(f, a, b):
    lo, hi = min(a, b), max(a, b)
    # quadrature cannot resolve a piece a few ulps wide
    assume(hi - lo >= 1e-6 and np.diff(f.breakpoints).min() >= 1e-9)
    assert mass_on(f, Interval(lo, hi)) == pytest.approx(quad_mass(f, lo, hi), abs=1e-9)


# -- alpha ----------------------------------------------------------------


def test_alpha_equal_densities_is_zero():
    r = PiecewiseDensity([0.0, 0.2, 0.6, 1.0], [1.0, 1.0, 0.0])
    assert alpha(r, Interval(0.0, 0.2), Interval(0.2, 0.6)) == 0.0


def test_alpha_examples():
    r = PiecewiseDensity([0.0, 0.5, 1.0], [0.6, 1.4])
    assert alpha(r, Interval(0, 0.5), Interval(0.5, 1)) == pytest.approx(0.4, abs=1e-15)
    r = PiecewiseDensity([0.0, 0.25, 1.0], [0.0, 4.0 / 3.0])
    assert alpha(r, Interval(0, 0.25), Interval(0.25, 1)) == pytest.approx(0.5, abs=1e-15)


def test_alpha_example_by_quadrature():
    r = PiecewiseDensity([0.0, 0.5, 1.0], [0.6, 1.4])
    split = flatten(r, [Interval(0, 0.5), Interval(0.5, 1)])
    joint = flatten(r, [Interval(0, 1)])
    assert quad_l1(split, joint) == pytest.approx(0.4, abs=1e-10)


def test_alpha_needs_consecutive():
    with pytest.raises(ContractViolation):
        alpha(U, Interval(0, 0.3), Interval(0.4, 1))


@given(
    densities(),
    st.floats(0.0, 0.9),
    st.floats(0.01, 0.5),
    st.floats(0.01, 0.5),
)
def test_alpha_is_flattening_damage(r, a, w1, w2):
    b = min(a + w1, 0.99)
    c = min(b + w2, 1.0)
    if b <= a or c <= b:
        return
    I, J = Interval(a, b), Interval(b, c)
    two = flatten(r, [I, J])
    one = flatten(r, [Interval(a, c)])
    val = alpha(r, I, J)
    assert val == pytest.approx(l1_distance(two, one), abs=1e-10)
    assert 0.0 <= val <= 2 * (mass_on(r, I) + mass_on(r, J)) + 1e-12


# -- distances ------------------------------------------------------------


def test_l1_examples(two_flat):
    assert l1_distance(U, U) == 0.0
    assert l1_distance(U, two_flat) == pytest.approx(0.5)
    assert tv_distance(U, two_flat) == pytest.approx(0.25)
    assert l1_distance(step(0, 0.5, 2.0), step(0.5, 1.0, 2.0)) == pytest.approx(2.0)


@given(densities(), densities(), densities())
def test_l1_is_a_metric(f, g, h):
    assert l1_distance(f, g) == l1_distance(g, f)
    assert l1_distance(f, f) == 0.0
    assert l1_distance(f, h) <= l1_distance(f, g) + l1_distance(g, h) + 1e-12


@given(densities(), densities())
def test_l1_matches_quadrature(f, g):
    assert l1_distance(f, g) == pytest.approx(quad_l1(f, g), abs=1e-9)


@given(densities(), densities(), st.floats(0.05, 20.0))
def test_rescaling_costs_at_most_factor_two(p, g, a):
    assert l1_distance(p, g) <= 2 * l1_distance(p, g.scaled(a)) + 1e-12


def test_atomic_l1():
    a = AtomicMixture(U.scaled(0.5), [0.25], [0.5])
    b = AtomicMixture(U.scaled(0.5), [0.75], [0.5])
    assert l1_distance(a, b) == pytest.approx(1.0)
    assert l1_distance(a, a) == 0.0


# -- sampling and discretization -----------------------------------------


def test_point_mass_sample(rng):
    s = sample(DiscreteDistribution([0, 1.0, 0]), 5, rng)
    assert s.points.tolist() == [0.5] * 5
    raw = sample(DiscreteDistribution([0, 1.0, 0]), 5, rng, raw=True)
    assert raw.tolist() == [2] * 5


def test_uniform_sample_concentrates():
    s = sample(U, 100_000, np.random.default_rng(7))
    assert abs(mass_on(s, Interval(0, 0.5)) - 0.5) <= 0.01


def test_sample_deterministic(two_flat):
    a = sample(two_flat, 100, np.random.default_rng(3)).points
    b = sample(two_flat, 100, np.random.default_rng(3)).points
    assert np.array_equal(a, b)


def test_sub_distribution_rejected():
    with pytest.raises(ContractViolation):
        sample(U.scaled(0.5), 10, np.random.default_rng(0))


@given(densities(max_pieces=5))
def test_sampler_matches_cdf(f):
    from scipy import stats

    xs = draw_points(f, 2000, np.random.default_rng(11))
    assert np.all((xs >= 0) & (xs < 1))
    assert stats.kstest(xs, lambda x: np.asarray(f.cdf(x))).pvalue > 1e-4


def test_discretize_examples(two_flat):
    assert discretize(U, 4).weights.tolist() == [0.25] * 4
    assert discretize(step(0, 0.5, 2.0), 2).weights.tolist() == [1.0, 0.0]
    assert discretize(two_flat, 4).weights.tolist() == [0.375, 0.375, 0.125, 0.125]


@given(densities(grid=8), densities(grid=8))
def test_discretize_preserves_grid_l1(f, g):
    assert discretize(f, 8).l1(discretize(g, 8)) == pytest.approx(l1_distance(f, g), abs=1e-12)


def test_alpha_can_exceed_joint_mass():
    # two flattenings of mass r(I) + r(J) each; their L1 gap can pass that mass
    r = PiecewiseDensity([0.0, 0.25, 1.0], [4.0, 0.0])
    assert alpha(r, Interval(0, 0.25), Interval(0.25, 0.75)) == pytest.approx(4 / 3)


@given(
    st.lists(st.floats(0.0, 1.0), min_size=1, max_size=40),
    st.lists(st.floats(0.0, 1.0, exclude_max=True), min_size=1, max_size=200),
)
def test_bin_lookup_matches_searchsorted(cuts, pts):
    cuts = np.sort(np.array([0.0, *cuts]))
    pts = np.array(pts)
    want = np.clip(np.searchsorted(cuts, pts, side="right") - 1, 0, len(cuts) - 2)
    assert np.array_equal(BinLookup(cuts)(pts), want)
