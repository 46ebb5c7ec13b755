import random
import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dopparse.evaluation import (KNOWN_ONLY, UNKNOWN_CATEGORY, UNKNOWN_WORDS, BracketPolicy,
                                 ExperimentConfig, crosses, exact_match, extract_brackets,
                                 run_experiment, score_set, sentence_category)
from dopparse.treebank import Corpus, Tree, parse_bracketed, parse_corpus

T = parse_bracketed


def test_brackets_default_policy():
    assert extract_brackets(T("(S (A a) (B b))")) == {(0, 2)}
    assert extract_brackets(T("(S a b c)")) == {(0, 3)}
    assert extract_brackets(T("(S a b c)"), BracketPolicy(include_root=False)) == set()
    assert extract_brackets(T("(S (A a) (B b))"), BracketPolicy(drop_unit=False)) == {
        (0, 2), (0, 1), (1, 2)}
    assert extract_brackets(T("(S (A a) (B b))"), BracketPolicy(labeled=True)) == {("S", 0, 2)}


def test_crosses():
    assert crosses((0, 3), (1, 5))
    assert not crosses((0, 3), (1, 2))
    assert not crosses((0, 2), (2, 4))


@given(st.tuples(st.integers(0, 6), st.integers(1, 6)).filter(lambda s: s[0] < s[1]),
       st.tuples(st.integers(0, 6), st.integers(1, 6)).filter(lambda s: s[0] < s[1]))
def test_crosses_symmetric_irreflexive(a, b):
    assert crosses(a, b) == crosses(b, a)
    assert not crosses(a, a)


def test_exact_match():
    gold = T("(S (A a) (B b))")
    assert exact_match(T("(S (A a) (B b))"), gold)
    assert not exact_match(T("(S (A a) (C b))"), gold)
    assert not exact_match(T("(S (X (A a) (B b)))"), gold)
    with pytest.raises(ValueError):
        exact_match(T("(S (A a))"), gold)


GOLD1 = T("(S (X (X (P a) (P b)) (P c)) (Y (P d) (P e)))")  # (0,5) (0,3) (0,2) (3,5)
CAND1 = T("(S (X (P a) (Y (P b) (P c))) (Z (P d) (P e)))")  # (1,3) crosses (0,2)
GOLD2 = T("(S (X (P a) (P b)) (Y (P c) (Z (P d) (P e))))")  # four brackets


def test_hand_counted_metrics():
    assert len(extract_brackets(GOLD1)) == len(extract_brackets(CAND1)) == 4
    assert len(extract_brackets(GOLD2)) == 4
    score = score_set([CAND1, GOLD2], [GOLD1, GOLD2])
    assert score.parse_accuracy == 50.0
    assert score.sentence_accuracy == 50.0
    assert score.bracketing_accuracy == 100 * 7 / 8
    assert (score.n_brackets, score.n_crossing) == (8, 1)


def test_perfect_candidates():
    score = score_set([GOLD1, GOLD2], [GOLD1, GOLD2])
    assert (score.parse_accuracy, score.sentence_accuracy, score.bracketing_accuracy) == (
        100.0, 100.0, 100.0)


def test_no_parse_accounting():
    score = score_set([None, GOLD2], [GOLD1, GOLD2])
    assert score.parse_accuracy == 50.0 and score.sentence_accuracy == 50.0
    assert score.bracketing_accuracy == 100.0 and score.n_brackets == 4
    assert score.n_no_parse == 1
    empty = score_set([None, None], [GOLD1, GOLD2])
    assert (empty.parse_accuracy, empty.sentence_accuracy, empty.bracketing_accuracy) == (0, 0, 0)
    assert empty.bracketing_undefined


def test_explicit_no_parse_flags_override():
    score = score_set([GOLD1, GOLD2], [GOLD1, GOLD2], no_parse_flags=[True, False])
    assert score.parse_accuracy == 50.0


def test_length_mismatch():
    with pytest.raises(ValueError):
        score_set([GOLD1], [GOLD1, GOLD2])


def _relabel(tree, rng):
    if tree.is_leaf:
        return tree
    label = rng.choice(["S", "A", "B", "C"]) if rng.random() < 0.2 else tree.label
    return Tree(label, [_relabel(c, rng) for c in tree.children])


def _bracket(pre, rng):
    """Random binary-ish bracketing over a preterminal sequence."""
    nodes = list(pre)
    while len(nodes) > 1:
        i = rng.randrange(len(nodes) - 1)
        width = rng.choice((2, 2, 3))
        nodes[i:i + width] = [Tree(rng.choice("ABC"), nodes[i:i + width])]
    return Tree("S", nodes[0].children if rng.random() < 0.5 else nodes)


def _preterminals(rng):
    return [Tree(rng.choice(["DT", "NN", "VB"]), [Tree(rng.choice("xyz"))])
            for _ in range(rng.randint(2, 7))]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_exact_match_implies_no_crossing(seed):
    rng = random.Random(seed)
    golds = [_bracket(_preterminals(rng), rng) for _ in range(6)]
    cands = []
    for g in golds:
        r = rng.random()
        pre = [c for c in g.subtrees() if c.is_preterminal]
        cands.append(g if r < 0.4 else _relabel(g, rng) if r < 0.7 else _bracket(pre, rng))
    score = score_set(cands, golds)
    for o in score.outcomes:
        if o.exact:
            assert o.crossing == 0
    assert score.sentence_accuracy >= score.parse_accuracy
    for m in (score.parse_accuracy, score.sentence_accuracy, score.bracketing_accuracy):
        assert 0 <= m <= 100
    order = list(range(len(golds)))
    rng.shuffle(order)
    shuffled = score_set([cands[i] for i in order], [golds[i] for i in order])
    assert (shuffled.parse_accuracy, shuffled.sentence_accuracy,
            shuffled.bracketing_accuracy) == (score.parse_accuracy, score.sentence_accuracy,
                                              score.bracketing_accuracy)


def test_sentence_category():
    word_tags = {"she": {"PRP"}, "book": {"VB"}, "the": {"DT"}, "saw": {"VBD"}}
    assert sentence_category(T("(S (PRP she) (VBD saw) (NN gown))"), word_tags) == UNKNOWN_WORDS
    assert sentence_category(T("(S (PRP she) (VBD saw) (NN book))"), word_tags) == (
        UNKNOWN_CATEGORY)
    assert sentence_category(T("(S (PRP she) (VBD saw))"), word_tags) == KNOWN_ONLY


SYNTH = """
(S (NP (PRP she)) (VP (VBD saw) (NP (DT the) (NN dress))))
(S (NP (PRP he)) (VP (VBD wore) (NP (DT a) (NN hat))))
(S (NP (PRP she)) (VP (VBD wore) (NP (DT the) (NN hat))))
(S (NP (PRP he)) (VP (VBD saw) (NP (DT a) (NN dress))))
(S (NP (PRP she)) (VP (VBD saw) (NP (DT a) (NN hat))))
(S (NP (PRP he)) (VP (VBD wore) (NP (DT the) (NN dress))))
"""


def test_run_experiment_report():
    corpus = Corpus(tuple(parse_corpus(SYNTH)) * 5)
    cfg = ExperimentConfig(n_train=24, n_test=6, n_splits=3, seed=1, max_depth=2)
    report = run_experiment(corpus, cfg)
    assert len(report.splits) == 3
    for m in ("parse_accuracy", "sentence_accuracy", "bracketing_accuracy"):
        vals = [s[m] for s in report.splits]
        assert report.mean(m) == statistics.fmean(vals)
        assert report.stdev(m) == statistics.stdev(vals)
    assert report.categories["all test sentences"]["n"] == 18
    text = report.to_text()
    assert "Parse accuracy" in text and "StdDev" in text
    assert run_experiment(corpus, cfg).to_jsonl() == report.to_jsonl()


def test_run_experiment_config_errors():
    corpus = Corpus(tuple(parse_corpus(SYNTH)))
    with pytest.raises(ValueError):
        run_experiment(corpus, ExperimentConfig(n_train=5, n_test=5))
    with pytest.raises(ValueError):
        run_experiment(corpus, ExperimentConfig(n_train=3, n_test=1, mode="dop4"))


def test_split_seeds_are_distinct_and_stable():
    cfg = ExperimentConfig(n_train=1, n_test=1, n_splits=8, seed=3)
    seeds = cfg.split_seeds()
    assert len(set(seeds)) == 8 and seeds == cfg.split_seeds()
