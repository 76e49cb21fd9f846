import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from histloom.density import ContractViolation, PiecewiseDensity, mass_on
from histloom.partition import (
    IntervalPartition,
    WellBehavednessWarning,
    approx_equal_partition,
    cuts_from_sorted,
    partition_for_learner,
    partition_sample_size,
)
from histloom.sources import ArraySource, DistributionSource, derive_seed

U = PiecewiseDensity.uniform()


def masses(f, P):
    return np.array([mass_on(f, I) for I in P])


def test_partition_validates():
    with pytest.raises(ContractViolation):
        IntervalPartition([0.0, 0.5])
    with pytest.raises(ContractViolation):
        IntervalPartition([0.0, 0.5, 0.5, 1.0])
    P = IntervalPartition([0.0, 0.25, 1.0])
    assert len(P) == 2
    assert IntervalPartition.from_json(P.to_json()).to_json() == [0.0, 0.25, 1.0]


def test_sample_size_formula():
    assert partition_sample_size(0.1) == math.ceil(16 / 0.1 * math.log(10))


def test_uniform_kappa_tenth():
    P = approx_equal_partition(DistributionSource(U, np.random.default_rng(1)), 0.1)
    m = masses(U, P)
    assert np.all((m >= 0.05) & (m <= 0.3))


def test_kappa_near_one_gives_single_interval():
    P = approx_equal_partition(DistributionSource(U, np.random.default_rng(1)), 0.99)
    assert P.cuts.tolist() == [0.0, 1.0]


def test_two_flat_kappa_005(two_flat):
    ok = 0
    for seed in range(20):
        P = approx_equal_partition(DistributionSource(two_flat, derive_seed(seed)), 0.05)
        m = masses(two_flat, P)
        ok += bool(np.all((m >= 0.025) & (m <= 0.15)))
    assert ok >= 19


def test_learner_partition_k1():
    P = partition_for_learner(DistributionSource(U, np.random.default_rng(2)), 1, 0.5)
    assert 10 <= len(P) <= 14


def test_learner_partition_window():
    src = DistributionSource(U, np.random.default_rng(3))
    P = partition_for_learner(src, 2, 0.1)
    assert 60 <= len(P) <= 360
    m = masses(U, P)
    assert m.min() >= 0.1 / 24 and m.max() <= 0.1 / 4
    assert src.log == [("partition", partition_sample_size(0.1 / 12))]


def test_atom_does_not_loop():
    xs = np.full(500, 0.3)
    with pytest.warns(WellBehavednessWarning):
        P = approx_equal_partition(ArraySource(xs), 0.1, c0=2)
    assert P.cuts.tolist() == [0.0, 0.3, 1.0]


@given(st.lists(st.floats(0.0, 0.999), min_size=1, max_size=300), st.floats(0.01, 0.9))
def test_cuts_are_sample_values(xs, kappa):
    xs = np.sort(np.array(xs))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WellBehavednessWarning)
        cuts = cuts_from_sorted(xs, kappa)
    assert cuts[0] == 0.0 and cuts[-1] == 1.0
    assert np.all(np.diff(cuts) > 0)
    assert set(cuts[1:-1].tolist()) <= set(xs.tolist())
