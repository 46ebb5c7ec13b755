"""Reading, writing and splitting of bracketed (Penn-style) treebanks."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

NONTERMINAL = "nonterminal"
PRETERMINAL = "preterminal"
TERMINAL = "terminal"


class TreebankError(ValueError):
    """Malformed bracketed input; ``offset`` is a 1-based character position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class Tree:
    """Immutable labeled ordered tree.

    A node without children is a leaf. Leaves are words, or part-of-speech
    tags when ``tag_leaf`` is set (trees produced by :func:`strip_to_pos`).
    Equality and hashing look only at labels and shape.
    """

    __slots__ = ("label", "children", "tag_leaf", "_hash")

    def __init__(self, label: str, children: Iterable["Tree"] = (), tag_leaf: bool = False):
        label = label.strip()
        if not label:
            raise ValueError("empty label")
        children = tuple(children)
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "children", children)
        object.__setattr__(self, "tag_leaf", tag_leaf and not children)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Tree is immutable")

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def is_preterminal(self) -> bool:
        if self.tag_leaf:
            return True
        return (
            len(self.children) == 1
            and self.children[0].is_leaf
            and not self.children[0].tag_leaf
        )

    @property
    def kind(self) -> str:
        if self.tag_leaf or self.is_preterminal:
            return PRETERMINAL
        if self.is_leaf:
            return TERMINAL
        return NONTERMINAL

    def leaves(self) -> list[str]:
        if self.is_leaf:
            return [self.label]
        out: list[str] = []
        stack = [self]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node.label)
            else:
                stack.extend(reversed(node.children))
        return out

    def preterminals(self) -> list[tuple[str, str]]:
        """(tag, word) pairs in yield order; empty for tag-leaf trees."""
        out = []

        def walk(node):
            if node.tag_leaf:
                return
            if node.is_preterminal:
                out.append((node.label, node.children[0].label))
            else:
                for child in node.children:
                    walk(child)

        walk(self)
        return out

    def subtrees(self) -> Iterator["Tree"]:
        yield self
        for child in self.children:
            yield from child.subtrees()

    def height(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(c.height() for c in self.children)

    def __len__(self) -> int:
        return len(self.leaves())

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return hash(self) == hash(other) and self._key() == other._key()

    def _key(self):
        return (self.label, tuple(c._key() for c in self.children))

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self._key()))
        return self._hash

    def __str__(self):
        return to_bracketed(self)

    def __repr__(self):
        return f"Tree({to_bracketed(self)!r})"


def to_bracketed(tree: Tree) -> str:
    """Canonical single-line bracketing: ``(S (NP (PRP She)) ...)``."""
    if tree.is_leaf:
        return tree.label
    return "(%s %s)" % (tree.label, " ".join(to_bracketed(c) for c in tree.children))


def _tokenize(text: str):
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            yield ch, i
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            yield text[i:j], i
            i = j


def _read_trees(text: str, ignore: frozenset[str], tags: bool = False) -> list[Tree]:
    trees = []
    # stack entries: [label or None, children, offset]
    stack: list[list] = []
    for tok, pos in _tokenize(text):
        if tok == "(":
            stack.append([None, [], pos])
        elif tok == ")":
            if not stack:
                raise TreebankError("unbalanced ')'", pos + 1)
            label, children, start = stack.pop()
            if label is None:
                # "( (S ...))" wrapper: unwrap a single unlabeled child
                if len(children) != 1 or not isinstance(children[0], Tree):
                    raise TreebankError("empty node", start + 1)
                node = children[0]
            else:
                if not children:
                    raise TreebankError("empty node", start + 1)
                node = _make_node(label, children, ignore, tags)
            if stack:
                # None marks a deleted child; _make_node drops it
                stack[-1][1].append(node)
            elif node is not None:
                trees.append(node)
        else:
            if not stack:
                raise TreebankError("terminal outside brackets", pos + 1)
            top = stack[-1]
            if top[0] is None and not top[1]:
                top[0] = tok
            else:
                top[1].append(tok)
    if stack:
        raise TreebankError("unbalanced '('", len(text) + 1)
    return trees


def _make_node(label, children, ignore, tags):
    if label in ignore:
        return None
    kids = []
    for child in children:
        if isinstance(child, str):
            if child not in ignore:
                kids.append(Tree(child, tag_leaf=tags))
        elif child is not None:
            kids.append(child)
    if not kids:
        # every child was ignored
        return None
    return Tree(label, kids)


def parse_bracketed(text: str, ignore: Iterable[str] = (), tags: bool = False) -> Tree:
    """Read exactly one bracketed tree.

    Subtrees labeled with a member of ``ignore`` (e.g. ``-NONE-``) are
    deleted. With ``tags=True`` the leaves are read as part-of-speech tags.

    >>> parse_bracketed("(S (NP (PRP She)) (VP (VBD saw)))").label
    'S'
    """
    trees = _read_trees(text, frozenset(ignore), tags)
    if len(trees) != 1:
        raise TreebankError(f"expected one tree, found {len(trees)}", 1)
    return trees[0]


def parse_corpus(text: str, ignore: Iterable[str] = (), tags: bool = False) -> list[Tree]:
    return _read_trees(text, frozenset(ignore), tags)


def strip_to_pos(tree: Tree) -> Tree:
    """Delete the words so that preterminal tags become the leaves."""
    if tree.is_leaf:
        return tree
    if tree.is_preterminal:
        return Tree(tree.label, tag_leaf=True)
    return Tree(tree.label, [strip_to_pos(c) for c in tree.children])


@dataclass(frozen=True)
class SplitSpec:
    n_train: int
    n_test: int
    seed: int


@dataclass(frozen=True)
class Corpus:
    trees: tuple[Tree, ...]
    name: str = "corpus"

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))

    def __len__(self):
        return len(self.trees)

    def __iter__(self):
        return iter(self.trees)

    def __getitem__(self, idx):
        return self.trees[idx]

    @classmethod
    def from_text(cls, text: str, name: str = "corpus", ignore: Iterable[str] = (), tags=False):
        return cls(tuple(parse_corpus(text, ignore, tags)), name)

    @classmethod
    def from_files(cls, paths: Sequence[str], ignore: Iterable[str] = (), tags=False,
                   encoding="utf-8"):
        trees: list[Tree] = []
        for path in paths:
            with open(path, encoding=encoding) as f:
                trees.extend(parse_corpus(f.read(), ignore, tags))
        name = ",".join(str(p) for p in paths)
        return cls(tuple(trees), name)

    def stripped(self) -> "Corpus":
        return Corpus(tuple(strip_to_pos(t) for t in self.trees), self.name + ":pos")

    def manifest(self) -> Iterator[str]:
        """Line-delimited JSON records (index, yield length, serialization)."""
        for i, tree in enumerate(self.trees):
            yield json.dumps(
                {"index": i, "length": len(tree.leaves()), "tree": to_bracketed(tree)},
                ensure_ascii=False,
            )


def random_split(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus]:
    """Disjoint random train/test split, deterministic for a fixed seed."""
    if spec.n_train < 0 or spec.n_test < 0:
        raise ValueError("split sizes must be nonnegative")
    if spec.n_train + spec.n_test > len(corpus):
        raise ValueError(
            f"split {spec.n_train}+{spec.n_test} exceeds corpus size {len(corpus)}"
        )
    order = list(range(len(corpus)))
    random.Random(spec.seed).shuffle(order)
    train = tuple(corpus.trees[i] for i in order[: spec.n_train])
    test = tuple(corpus.trees[i] for i in order[spec.n_train : spec.n_train + spec.n_test])
    return (
        Corpus(train, f"{corpus.name}:train[{spec.seed}]"),
        Corpus(test, f"{corpus.name}:test[{spec.seed}]"),
    )


def vocabulary(corpus: Iterable[Tree]) -> set[str]:
    """Distinct words, i.e. leaves that sit under a preterminal."""
    words: set[str] = set()
    for tree in corpus:
        words.update(word for _, word in tree.preterminals())
    return words
