import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dopparse.treebank import (Corpus, SplitSpec, Tree, TreebankError, parse_bracketed,
                               parse_corpus, random_split, strip_to_pos, to_bracketed,
                               vocabulary)


def test_round_trip_simple():
    text = "(S (NP (PRP she)) (VP (VBD saw) (NP (DT the) (NN dress))))"
    tree = parse_bracketed(text)
    assert to_bracketed(tree) == text
    assert tree.leaves() == ["she", "saw", "the", "dress"]
    assert tree.preterminals()[0] == ("PRP", "she")


def test_unbalanced_reports_offset():
    with pytest.raises(TreebankError) as info:
        parse_bracketed("(S (NP")
    assert info.value.offset == 7


def test_extra_close_paren():
    with pytest.raises(TreebankError):
        parse_bracketed("(S (A a)))")


def test_outer_wrapper_is_unwrapped():
    tree = parse_bracketed("( (S (A a) (B b)))")
    assert tree.label == "S"


def test_ignore_deletes_empty_elements():
    tree = parse_bracketed("(S (NP (-NONE- *T*)) (VP (VB go)))", ignore={"-NONE-"})
    assert to_bracketed(tree) == "(S (VP (VB go)))"


def test_parse_corpus_multiple_trees():
    trees = parse_corpus("(S (A a))\n(S (B b))\n")
    assert [t.leaves() for t in trees] == [["a"], ["b"]]


def test_strip_to_pos_is_idempotent():
    tree = parse_bracketed("(S (NP (DT the) (NN dog)) (VP (VBZ barks)))")
    once = strip_to_pos(tree)
    assert once.leaves() == ["DT", "NN", "VBZ"]
    assert strip_to_pos(once) == once
    assert once.preterminals() == []


def test_tree_is_immutable_and_hashable():
    tree = parse_bracketed("(S (A a))")
    with pytest.raises(AttributeError):
        tree.label = "X"
    assert len({tree, parse_bracketed("(S (A a))")}) == 1


def test_random_split_is_deterministic_and_disjoint():
    corpus = Corpus(tuple(parse_bracketed(f"(S (A w{i}))") for i in range(20)))
    a_train, a_test = random_split(corpus, SplitSpec(12, 5, seed=3))
    b_train, b_test = random_split(corpus, SplitSpec(12, 5, seed=3))
    assert a_train.trees == b_train.trees and a_test.trees == b_test.trees
    assert not set(a_train.trees) & set(a_test.trees)
    c_train, _ = random_split(corpus, SplitSpec(12, 5, seed=4))
    assert c_train.trees != a_train.trees


def test_random_split_too_large():
    corpus = Corpus((parse_bracketed("(S (A a))"),))
    with pytest.raises(ValueError):
        random_split(corpus, SplitSpec(1, 1, 0))


def test_manifest_records():
    corpus = Corpus.from_text("(S (A a) (B b))")
    rec = json.loads(next(corpus.manifest()))
    assert rec == {"index": 0, "length": 2, "tree": "(S (A a) (B b))"}


def test_vocabulary():
    trees = parse_corpus("(S (A a) (B b))(S (A a))")
    assert vocabulary(trees) == {"a", "b"}


def test_from_files(tmp_path):
    path = tmp_path / "c.mrg"
    path.write_text("(S (A a))\n(S (B b))\n", encoding="utf-8")
    assert len(Corpus.from_files([path])) == 2


labels = st.sampled_from(["S", "NP", "VP", "PP", "-NONE-X"])
words = st.text(alphabet="abcxyz'.", min_size=1, max_size=4)
trees = st.recursive(
    st.builds(lambda lab, w: Tree(lab, [Tree(w)]), labels, words),
    lambda kids: st.builds(lambda lab, cs: Tree(lab, cs), labels,
                           st.lists(kids, min_size=1, max_size=3)),
    max_leaves=10,
)


@settings(max_examples=100, deadline=None)
@given(trees)
def test_round_trip_property(tree):
    assert parse_bracketed(to_bracketed(tree)) == tree
