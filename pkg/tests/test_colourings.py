"""Sampling models, intensity, balance, expansion, and marginals."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import directed_bichromatic_count

from urglab.colourings import (
    Colouring,
    ColouringModel,
    MarginalPattern,
    bernoulli_model,
    colouring_from_dict,
    colouring_to_dict,
    constant_model,
    expansion,
    intensity,
    is_delta_balanced,
    marginal_estimate,
    sample,
    subset_colouring,
    uniform_bernoulli_model,
)
from urglab.graphs import build_random_regular, build_torus_window


def test_constant_model_is_constant():
    w = build_torus_window(2, 5)
    for seed in range(5):
        c = sample(constant_model(4), w, seed)
        assert len(set(c.colours.tolist())) == 1


def test_degenerate_bernoulli_all_one_colour():
    w = build_torus_window(1, 12)
    c = sample(bernoulli_model([1.0, 0.0]), w, 3)
    assert np.all(c.colours == 1)


def test_bernoulli_frequencies_within_binomial_band():
    # n = 3000, p = 1/3: the band [0.30, 0.3667] sits ~3.9 sigma out, so
    # fixed seeds clear it comfortably
    w = build_torus_window(1, 3000)
    model = uniform_bernoulli_model(3)
    for seed in (0, 1, 2, 3):
        c = sample(model, w, seed)
        freqs = c.counts() / w.n
        assert np.all(freqs >= 0.30) and np.all(freqs <= 0.3667)


def test_sampling_is_deterministic():
    w = build_torus_window(2, 6)
    model = uniform_bernoulli_model(3)
    assert np.array_equal(sample(model, w, 9).colours, sample(model, w, 9).colours)


def test_unknown_model_kind_rejected():
    with pytest.raises(ValueError):
        ColouringModel("mystery", 2)


def test_block_model_reproduces_assignment():
    w = build_torus_window(1, 6)
    blocks = (1, 1, 2, 2, 3, 3)
    model = ColouringModel("block", 3, blocks=blocks)
    for seed in (0, 5):
        assert tuple(sample(model, w, seed).colours) == blocks


def test_custom_sampler_registry():
    from urglab.colourings import CUSTOM_SAMPLERS

    def alternating(model, w, seed):
        return np.arange(w.n) % model.d + 1

    CUSTOM_SAMPLERS["alternating"] = alternating
    try:
        w = build_torus_window(1, 8)
        c = sample(ColouringModel("custom", 2, sampler="alternating"), w, 0)
        assert tuple(c.colours) == (1, 2, 1, 2, 1, 2, 1, 2)
        with pytest.raises(ValueError):
            sample(ColouringModel("custom", 2, sampler="missing"), w, 0)
    finally:
        del CUSTOM_SAMPLERS["alternating"]


def test_intensity_examples():
    w = build_torus_window(1, 8)
    c = sample(constant_model(2), w, 1)
    its_colour = int(c.colours[0])
    assert intensity(c, its_colour) == 1.0
    half = subset_colouring(w, np.array([1, 1, 1, 1, 0, 0, 0, 0], dtype=bool))
    assert intensity(half, 1) == 0.5


def test_intensity_large_bernoulli():
    w = build_torus_window(1, 10**5)
    c = sample(bernoulli_model([0.3, 0.7]), w, 5)
    assert abs(intensity(c, 1) - 0.3) <= 0.015


def test_intensities_sum_to_one_exactly():
    w = build_torus_window(2, 7)
    for seed in range(10):
        c = sample(uniform_bernoulli_model(4), w, seed)
        assert math.fsum(intensity(c, k) for k in range(1, 5)) == 1.0


def test_delta_balance_examples():
    w = build_torus_window(1, 8)
    c = sample(constant_model(2), w, 0)
    assert not is_delta_balanced(c, 0.4)
    half = subset_colouring(w, np.array([1, 1, 1, 1, 0, 0, 0, 0], dtype=bool))
    assert is_delta_balanced(half, 0.0)


def test_delta_balance_arithmetic():
    w = build_torus_window(1, 64)
    mask = np.zeros(64, dtype=bool)
    mask[:26] = True  # 26 vs 38: |26/64 - 1/2| = 0.09375
    c = subset_colouring(w, mask)
    assert is_delta_balanced(c, 0.1)
    assert not is_delta_balanced(c, 0.09)


def test_expansion_constant_is_zero():
    w = build_torus_window(2, 6)
    assert expansion(sample(constant_model(3), w, 2)) == 0.0


def test_expansion_two_arcs():
    w = build_torus_window(1, 8)
    arcs = subset_colouring(w, np.array([1, 1, 1, 1, 0, 0, 0, 0], dtype=bool))
    assert expansion(arcs) == 0.5


def test_expansion_matches_direct_count():
    w = build_random_regular(2, 40, seed=8)
    for seed in range(5):
        c = sample(uniform_bernoulli_model(3), w, seed)
        assert expansion(c) == directed_bichromatic_count(w, c.colours) / w.n


def test_expansion_iid_expectation():
    # D-regular window, uniform d colours: each directed incidence is
    # bichromatic with probability 1 - 1/d, so E[expansion] = D (1 - 1/d)
    w = build_torus_window(2, 5)
    d = 3
    trials = 400
    values = [expansion(sample(uniform_bernoulli_model(d), w, s)) for s in range(trials)]
    target = 4 * (1 - 1 / d)
    stderr = np.std(values, ddof=1) / math.sqrt(trials)
    assert abs(np.mean(values) - target) <= 3 * stderr


def test_expansion_bounded_by_degree():
    w = build_random_regular(2, 30, seed=1)
    for seed in range(10):
        c = sample(uniform_bernoulli_model(2), w, seed)
        assert expansion(c) <= w.degree_bound + 1e-12


@settings(max_examples=30)
@given(seed=st.integers(0, 10**6), perm_seed=st.integers(0, 10**6))
def test_expansion_invariant_under_colour_permutation(seed, perm_seed):
    w = build_torus_window(2, 4)
    d = 3
    c = sample(uniform_bernoulli_model(d), w, seed)
    perm = np.random.default_rng(perm_seed).permutation(d) + 1
    permuted = Colouring(w, d, perm[c.colours - 1])
    assert expansion(permuted) == expansion(c)


def test_expansion_root_average_equals_vertex_average():
    # on any window both readings are the same sum; make them explicit
    w = build_torus_window(2, 5)
    c = sample(uniform_bernoulli_model(3), w, 13)
    per_vertex = [
        sum(1 for v, _ in w.adjacency[u] if c.colours[v] != c.colours[u]) for u in range(w.n)
    ]
    assert expansion(c) == sum(per_vertex) / w.n == np.mean(per_vertex)


def test_bernoulli_intensity_across_seeds():
    # mean of the in-class intensity over many seeds vs p, within 4 stderr
    w = build_torus_window(1, 500)
    p = 0.37
    values = [intensity(sample(bernoulli_model([p, 1 - p]), w, s), 1) for s in range(120)]
    stderr = np.std(values, ddof=1) / math.sqrt(len(values))
    assert abs(np.mean(values) - p) <= 4 * stderr


def test_marginal_empty_pattern():
    w = build_torus_window(2, 4)
    report = marginal_estimate(uniform_bernoulli_model(2), w, MarginalPattern(()), 50, 3)
    assert report.estimate == 1.0


def test_marginal_root_colour():
    w = build_torus_window(2, 5)
    p = (0.3, 0.7)
    pattern = MarginalPattern((((), 1),))
    report = marginal_estimate(bernoulli_model(p), w, pattern, 2000, 11)
    assert abs(report.estimate - 0.3) <= 3 * max(report.stderr, 1e-9)


def test_marginal_adjacent_same_colour():
    # two adjacent vertices share a colour with probability 1/2 under
    # uniform iid 2-colourings: (1,1) and (2,2) each hit 1/4
    w = build_torus_window(2, 6)
    model = uniform_bernoulli_model(2)
    both = []
    for colour in (1, 2):
        pattern = MarginalPattern((((), colour), (("+e1",), colour)))
        both.append(marginal_estimate(model, w, pattern, 3000, 40 + colour))
    total = both[0].estimate + both[1].estimate
    stderr = math.hypot(both[0].stderr, both[1].stderr)
    assert abs(total - 0.5) <= 3 * stderr
    assert abs(both[0].estimate - 0.25) <= 3 * both[0].stderr


def test_marginal_pattern_validation():
    with pytest.raises(ValueError):
        MarginalPattern((((), 1), ((), 2)))
    w = build_torus_window(1, 3)
    too_big = MarginalPattern(tuple(((("+e1",) * i), 1) for i in range(4)))
    with pytest.raises(ValueError):
        marginal_estimate(uniform_bernoulli_model(2), w, too_big, 10, 0)


def test_colouring_serialization_round_trip():
    w = build_torus_window(2, 5)
    c = sample(uniform_bernoulli_model(3), w, 6)
    data = colouring_to_dict(c)
    assert set(data) == {"window_id", "d", "colours"}
    back = colouring_from_dict(data, w)
    assert np.array_equal(back.colours, c.colours)
