"""Shared corpora, random trees and an independent fragment oracle."""
from __future__ import annotations

import itertools
import random
from collections import Counter

import pytest

from dopparse import DOPParser, parse_corpus
from dopparse.treebank import Tree

LABELS = ("S", "A", "B", "C")
WORDS = ("a", "b", "c")

MICRO = """
(S (NP (N John)) (VP (V saw) (NP (N Mary))))
(S (NP (N Mary)) (VP (V saw) (NP (NP (N John)) (PP (P with) (NP (N binoculars))))))
(S (NP (N John)) (VP (VP (V saw) (NP (N Mary))) (PP (P with) (NP (N binoculars)))))
(S (NP (N Mary)) (VP (V likes) (NP (N John))))
"""

MICRO_SENTENCES = [
    "John saw Mary",
    "Mary saw John",
    "John saw Mary with binoculars",
    "Mary saw John with binoculars",
    "John likes Mary",
    "Mary likes John with binoculars",
    "John saw binoculars",
    "binoculars saw Mary",
    "Mary likes binoculars with John",
    "John likes Mary with Mary",
]

# Unknown-word ladder: "gown" is unknown, "book" is known only as a verb.
LADDER = """
(S (NP (PRP she)) (VP (VBD saw) (NP (DT the) (NN dress))))
(S (NP (PRP he)) (VP (VBD wore) (NP (DT a) (NN hat))))
(S (VP (VB book) (NP (DT a) (NN flight))))
"""


@pytest.fixture
def micro_trees():
    return parse_corpus(MICRO)


@pytest.fixture
def ladder_trees():
    return parse_corpus(LADDER)


def fitted(trees, sentence=None, **params):
    parser = DOPParser(**params).fit(trees)
    return parser if sentence is None else (parser, parser.forest(sentence))


# -- random trees ---------------------------------------------------------------

def random_tree(rng: random.Random, max_nodes: int = 12) -> Tree:
    """Random tree with at most ``max_nodes`` nodes (words included)."""
    while True:
        tree = _grow(rng, 0)
        if _size(tree) <= max_nodes:
            return tree


def _grow(rng, level):
    label = rng.choice(LABELS)
    if level >= 3 or rng.random() < 0.3:
        return Tree(label, [Tree(rng.choice(WORDS))])
    kids = []
    for _ in range(rng.randint(1, 3)):
        if rng.random() < 0.15:
            kids.append(Tree(rng.choice(WORDS)))
        else:
            kids.append(_grow(rng, level + 1))
    if all(k.is_leaf for k in kids):
        kids.append(_grow(rng, level + 1))
    return Tree(label, kids)


def _size(tree):
    return 1 + sum(_size(c) for c in tree.children)


# -- brute-force fragment oracle --------------------------------------------------

def _as_node(tree):
    if tree.is_leaf:
        return tree.label
    return (tree.label,) + tuple(_as_node(c) for c in tree.children)


def _node_depth(node):
    if isinstance(node, str) or len(node) == 1:
        return 0
    return 1 + max(_node_depth(c) for c in node[1:])


def _paths(node, path=()):
    """Addresses (child index paths) of every internal node."""
    if isinstance(node, str):
        return
    yield path
    for i, c in enumerate(node[1:]):
        yield from _paths(c, path + (i,))


def _at(node, path):
    for i in path:
        node = node[1 + i]
    return node


def _cut(node, path, cuts):
    if path in cuts:
        return (node[0],)
    if isinstance(node, str):
        return node
    return (node[0],) + tuple(_cut(c, path + (i,), cuts) for i, c in enumerate(node[1:]))


def brute_force_fragments(tree: Tree, max_depth=None) -> Counter:
    """Every subset of internal descendants as cut points, deduplicated per root."""
    whole = _as_node(tree)
    counts: Counter = Counter()
    for root_path in _paths(whole):
        root = _at(whole, root_path)
        below = [p for p in _paths(root) if p]
        seen = set()
        for r in range(len(below) + 1):
            for cuts in itertools.combinations(below, r):
                frag = (root[0],) + tuple(
                    _cut(c, (i,), set(cuts)) for i, c in enumerate(root[1:]))
                seen.add(frag)
        for frag in seen:
            if max_depth is None or _node_depth(frag) <= max_depth:
                counts[frag] += 1
    return counts


# -- synthetic corpus where wider context disambiguates ----------------------------
#
# Family k: a context word sits under a chain of k unary nodes, the ambiguous
# word "x" sits under D and is tagged A after p_k and B after q_k:
#   (S (Ck_1 (... (Ck_k (Lk p_k)))) (D (A x)))  and the mirror with Rk, q_k, B.
# Both contexts are equally frequent. For "q_k x" the wrong analysis (A) and
# the right one (B) then have mirror-image fragments with equal counts, except
# that the right one alone also owns fragments linking Rk to B, which need
# depth >= k + 1. So its parse probability ties with the wrong one below that
# depth and strictly exceeds it from there on: per-family accuracy is a step
# function of depth and overall accuracy is non-decreasing.

def context_tree(k: int, side: str) -> Tree:
    from dopparse.treebank import parse_bracketed

    pre, word, tag = (f"L{k}", f"p{k}", "A") if side == "p" else (f"R{k}", f"q{k}", "B")
    inner = f"({pre} {word})"
    for i in range(k, 0, -1):
        inner = f"(C{k}_{i} {inner})"
    return parse_bracketed(f"(S {inner} (D ({tag} x)))")


def context_corpus(families=(1, 2, 3), copies=4):
    trees = []
    for k in families:
        trees += [context_tree(k, "p"), context_tree(k, "q")] * copies
    return trees
