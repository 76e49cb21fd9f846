import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from histloom.density import AtomicMixture, ContractViolation, DiscreteDistribution, PiecewiseDensity, l1_distance
from histloom.oracles import opt_k_exact
from histloom.sources import derive_seed
from histloom.targets import KINDS, TargetSpec, add_noise, generate_target


def test_parse_round_trip():
    s = TargetSpec.parse("kflat:breaks=0.5;levels=1.5,0.5")
    assert s.kind == "kflat"
    assert s.floats("levels") == [1.5, 0.5]
    assert TargetSpec.parse(str(s)) == s
    assert str(TargetSpec.parse("uniform")) == "uniform"


@pytest.mark.parametrize("text", ["nope:k=1", "kflat:k", "kflat-plus-noise:eta=0.1", "kflat:k=x"])
def test_bad_specs(text):
    with pytest.raises(ContractViolation):
        generate_target(text, derive_seed(0))


def test_kflat_explicit():
    g = generate_target("kflat:breaks=0.5;levels=1.5,0.5", derive_seed(0))
    assert g.target.same_as(PiecewiseDensity([0.0, 0.5, 1.0], [1.5, 0.5]))
    assert g.opt_upper == 0.0 and g.k == 2
    assert opt_k_exact(g.target, 2).upper == 0.0


def test_kflat_levels_must_integrate_to_one():
    with pytest.raises(ContractViolation):
        generate_target("kflat:breaks=0.5;levels=1,2", derive_seed(0))


@pytest.mark.parametrize("k", [1, 2, 5, 10])
def test_random_kflat(k):
    g = generate_target(f"kflat:k={k}", derive_seed(1, k))
    f = g.target
    assert f.pieces == k and f.is_full_distribution
    assert np.all(np.abs(np.diff(f.values)) > 0)


@pytest.mark.parametrize("eta", [0.02, 0.05, 0.1])
def test_noise_certificate(eta):
    g = generate_target(f"kflat-plus-noise:k=3;eta={eta};grid=16", derive_seed(2))
    assert g.opt_upper == eta
    assert g.target.is_full_distribution
    assert l1_distance(g.target, g.base) == pytest.approx(eta, abs=1e-12)
    r = opt_k_exact(g.target, 3)
    assert r.lower <= eta + 1e-12


@given(st.floats(0.0, 0.9), st.sampled_from([2, 4, 8]), st.integers(0, 2**32 - 1))
def test_add_noise_bookkeeping(eta, sub, seed):
    base = generate_target("kflat:k=4;grid=32", np.random.default_rng(seed)).target
    f = add_noise(base, eta, sub)
    assert f.total_mass == pytest.approx(1.0, abs=1e-12)
    assert l1_distance(f, base) == pytest.approx(eta, abs=1e-12)
    assert np.all(f.values >= 0)


def test_add_noise_rejects():
    with pytest.raises(ContractViolation):
        add_noise(PiecewiseDensity.uniform(), 0.1, 3)
    with pytest.raises(ContractViolation):
        add_noise(PiecewiseDensity.uniform(), 1.5)


def test_monotone_and_unimodal():
    m = generate_target("monotone:pieces=8", derive_seed(3)).target
    assert np.all(np.diff(m.values) <= 0) and m.is_full_distribution
    inc = generate_target("monotone:pieces=8;decreasing=0", derive_seed(3)).target
    assert np.all(np.diff(inc.values) >= 0)
    u = generate_target("unimodal:pieces=12;mode=0.3", derive_seed(4)).target
    j = int(np.argmax(u.values))
    assert np.all(np.diff(u.values[: j + 1]) >= 0) and np.all(np.diff(u.values[j:]) <= 0)
    assert u.is_full_distribution


def test_atom_mixture_metadata():
    g = generate_target("atom-mixture:atoms=0.5:0.3", derive_seed(5))
    assert isinstance(g.target, AtomicMixture)
    assert g.metadata()["atoms"] == [[0.5, 0.3]]
    assert g.target.total_mass == pytest.approx(1.0)
    assert g.target.histogram.same_as(PiecewiseDensity.uniform().scaled(0.7))


def test_lowerbound_target():
    g = generate_target("lowerbound:N=8;t=0.25", derive_seed(6))
    assert isinstance(g.target, DiscreteDistribution)
    assert g.target.M == 16
    assert g.opt_upper == pytest.approx(1 / 6)


@pytest.mark.parametrize("kind", KINDS)
def test_every_kind_is_a_distribution(kind):
    params = {
        "kflat": "k=3",
        "kflat-plus-noise": "k=2;eta=0.05",
        "atom-mixture": "atoms=0.2:0.1,0.7:0.2;k=2",
        "lowerbound": "N=20;t=0.25",
    }
    text = f"{kind}:{params[kind]}" if kind in params else kind
    g = generate_target(text, derive_seed(7))
    t = g.target
    if isinstance(t, DiscreteDistribution):
        assert t.weights.sum() == pytest.approx(1.0)
    else:
        assert t.total_mass == pytest.approx(1.0)


def test_generation_is_seeded():
    a = generate_target("kflat:k=5", derive_seed(8)).target
    b = generate_target("kflat:k=5", derive_seed(8)).target
    assert a.same_as(b)
