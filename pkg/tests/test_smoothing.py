from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dopparse.fragments import build_bank, fragment_from_bracketed
from dopparse.smoothing import (PURE, CutoffPolicy, FreqOfFreqs, PopulationEstimate,
                                build_adjusted_model,
                                build_class_model, conservation_total, estimate_total_types,
                                freq_of_freqs, good_turing_adjust, gt_table_rows,
                                unseen_frequency, unseen_type_count)
from dopparse.treebank import parse_corpus


def fof(table, label="X"):
    return FreqOfFreqs(label, dict(sorted(table.items())))


def test_formula_on_small_histogram():
    h = fof({1: 4, 2: 2, 3: 1})
    # r* = (r+1) N_{r+1} / N_r
    assert good_turing_adjust(h, 1, exact=True) == Fraction(2 * 2, 4)
    assert good_turing_adjust(h, 2, exact=True) == Fraction(3 * 1, 2)
    assert good_turing_adjust(h, 3, exact=True) == 0
    assert unseen_frequency(h, 8, exact=True) == Fraction(4, 8)


def test_adjust_rejects_bad_ranks():
    h = fof({1: 4, 3: 1})
    with pytest.raises(ValueError):
        good_turing_adjust(h, 0)
    with pytest.raises(ValueError):
        good_turing_adjust(h, 2)


def test_cutoff_keeps_raw_counts():
    h = fof({1: 50, 2: 20, 3: 4, 4: 2})
    policy = CutoffPolicy(floor=5)
    assert policy.first_raw_rank(h) == 3
    assert good_turing_adjust(h, 2, policy) == pytest.approx(3 * 4 / 20)
    assert good_turing_adjust(h, 3, policy) == 3.0
    assert good_turing_adjust(h, 4, policy) == 4.0
    assert PURE.first_raw_rank(h) == 5


def test_cutoff_stops_at_gap():
    h = fof({1: 50, 2: 20, 4: 9})
    assert CutoffPolicy(5).first_raw_rank(h) == 2


def test_unseen_frequency_closed_class():
    h = fof({1: 3, 2: 1})
    assert unseen_frequency(h, 0) == 0.0
    assert unseen_frequency(fof({2: 1}), 10) == 0.0


def test_unseen_type_count_is_exact():
    assert unseen_type_count(10**12 + 7, 5) == 10**12 + 2
    with pytest.raises(ValueError):
        unseen_type_count(1, 2)


def test_population_hand_enumeration():
    # one template (X .) with k = 1 and V = 3 -> (X w1), (X w2), (X w3) + template
    bank = build_bank(parse_corpus("(S (X a))(S (X b))"), vocabulary_size=3)
    pop = estimate_total_types(bank, "X")
    assert (pop.total_types, pop.observed_types, pop.N0) == (4, 2, 2)


def test_population_counts_unlexicalized_fragments_once():
    bank = build_bank(parse_corpus("(S (X a) (Y b))"), vocabulary_size=2)
    pop = estimate_total_types(bank, "S")
    # templates: (S (X .) (Y .)) k=2, (S (X ) (Y .)) k=1, (S (X .) (Y )) k=1, (S (X ) (Y )) k=0
    assert pop.n_templates == 4
    assert pop.total_types == 2**2 + 2 + 2 + 4
    assert pop.observed_types == 4
    assert pop.total_types >= pop.observed_types


def test_population_bound_for_larger_vocabularies():
    bank = build_bank(parse_corpus("(S (X a) (Y b))(S (X b) (Y b))"))
    for V in range(bank.vocabulary_size, 8):
        for label in bank.labels:
            pop = estimate_total_types(bank, label, V)
            assert pop.total_types >= pop.observed_types


def test_freq_of_freqs_unknown_class():
    bank = build_bank(parse_corpus("(S (X a))"))
    with pytest.raises(KeyError):
        freq_of_freqs(bank, "NP")


def test_class_model_is_normalized():
    bank = build_bank(parse_corpus(
        "(S (X a) (Y b))(S (X a) (Y c))(S (X d) (Y b))(S (Z a))"), vocabulary_size=10)
    model = build_adjusted_model(bank, exact=True)
    for label, cls in model.classes.items():
        seen = sum(cls.seen_probability(r) * cls.fof[r] for r in cls.adjusted)
        assert seen + cls.population.N0 * cls.unseen_probability == 1, label


def test_adjusted_model_prices_unseen_fragments():
    bank = build_bank(parse_corpus("(S (X a) (Y b))(S (X c) (Y b))"), vocabulary_size=5)
    model = build_adjusted_model(bank)
    unseen = fragment_from_bracketed("(S (X z) (Y b))")
    assert model.probability(unseen) == model.unseen_probability("S") > 0
    seen = fragment_from_bracketed("(S (X ) (Y b))")
    assert model.probability(seen) > model.probability(unseen)


def test_gt_table_rows_start_with_unseen_row():
    rows = gt_table_rows(fof({1: 10, 2: 5, 3: 2}), 100, exact=True)
    assert rows[0] == {"r": 0, "N_r": 100, "r_star": Fraction(10, 100)}
    assert [r["r"] for r in rows] == [0, 1, 2, 3]


histograms = st.dictionaries(st.integers(1, 12), st.integers(1, 500), min_size=1, max_size=8)
gap_free = st.lists(st.integers(1, 10**6), min_size=1, max_size=15).map(
    lambda ns: {r: n for r, n in enumerate(ns, 1)})


@settings(max_examples=200, deadline=None)
@given(gap_free, st.integers(1, 10**12))
def test_conservation_identity(table, n0):
    h = fof(table)
    assert conservation_total(h, n0) == h.N


@settings(max_examples=200, deadline=None)
@given(histograms, st.integers(0, 10**12))
def test_conservation_loss_with_gaps(table, n0):
    """A rank r with N_r = 0 cannot carry (r+1) N_{r+1}; N_0 = 0 drops N_1."""
    h = fof(table)
    lost = sum((r + 1) * h[r + 1] for r in range(1, h.max_r) if h[r] == 0)
    if n0 == 0:
        lost += h[1]
    assert conservation_total(h, n0) == h.N - lost


@settings(max_examples=100, deadline=None)
@given(histograms, st.integers(1, 10**6), st.integers(1, 8))
def test_renormalized_mass_is_one(table, n0, floor):
    h = fof(table)
    pop = PopulationEstimate("X", n0 + h.observed_types, h.observed_types, 10)
    cls = build_class_model(h, pop, CutoffPolicy(floor), exact=True)
    assert cls.total_mass() == 1
