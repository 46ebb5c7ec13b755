"""Input checking shared by the estimator, the experiment runner and the CLI."""
from __future__ import annotations

from typing import Iterable

from .treebank import Tree, parse_bracketed


def check_trees(X: Iterable, name: str = "X") -> list[Tree]:
    """Accept Tree objects or bracketed strings; reject anything else."""
    if isinstance(X, (str, Tree)):
        raise TypeError(f"{name} must be a sequence of trees, not a single tree")
    trees = []
    for i, item in enumerate(X):
        if isinstance(item, Tree):
            tree = item
        elif isinstance(item, str):
            tree = parse_bracketed(item)
        else:
            raise TypeError(f"{name}[{i}] is {type(item).__name__}, expected Tree or str")
        if tree.is_leaf:
            raise ValueError(f"{name}[{i}] is a bare leaf, not a tree")
        trees.append(tree)
    return trees


def check_sentence(sentence) -> tuple[str, ...]:
    """A sentence is a whitespace-separated string or a sequence of tokens."""
    if isinstance(sentence, Tree):
        sentence = sentence.leaves()
    if isinstance(sentence, str):
        tokens = tuple(sentence.split())
    else:
        tokens = tuple(sentence)
        for tok in tokens:
            if not isinstance(tok, str) or not tok or any(ch.isspace() for ch in tok):
                raise ValueError(f"bad token {tok!r}")
    if not tokens:
        raise ValueError("empty sentence")
    return tokens


def check_sentences(X: Iterable, name: str = "X") -> list[tuple[str, ...]]:
    if isinstance(X, str):
        raise TypeError(f"{name} must be a sequence of sentences")
    return [check_sentence(s) for s in X]


def check_max_depth(value):
    if value is None or value == "unbounded":
        return None
    depth = int(value)
    if depth < 1:
        raise ValueError("max_depth must be a positive integer or 'unbounded'")
    return depth


def check_choice(value, name: str, choices) -> str:
    value = str(value).lower()
    if value not in choices:
        raise ValueError(f"{name} must be one of {sorted(choices)}, got {value!r}")
    return value
