"""Tree fragments: extraction, counting, substitution and templates.

A fragment is stored as nested tuples::

    internal node   (label, child, child, ...)    at least one child
    open slot       (label,)                      a cut-off nonterminal/tag
    terminal        "word"                        a plain string

:class:`Fragment` is a ``tuple`` subclass holding the root node, so
fragments hash and compare structurally at tuple speed.
"""
from __future__ import annotations

import json
from collections import Counter
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator

from .treebank import Tree, TreebankError, _tokenize


class _WordSlot:
    """Marker that takes the place of a word in a template."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "WORD_SLOT"

    def __str__(self):
        return "·"

    def __reduce__(self):
        return (_WordSlot, ())


WORD_SLOT = _WordSlot()


def _is_slot(node) -> bool:
    return isinstance(node, tuple) and len(node) == 1


def _is_terminal(node) -> bool:
    return not isinstance(node, tuple)


class Fragment(tuple):
    """A tree fragment; the tuple itself is the root node."""

    __slots__ = ()

    def __new__(cls, node):
        if not isinstance(node, tuple) or len(node) < 2:
            raise ValueError(f"a fragment needs a root with children: {node!r}")
        return super().__new__(cls, node)

    @property
    def root(self) -> str:
        return self[0]

    @property
    def depth(self) -> int:
        return depth(self)

    def frontier(self) -> list:
        """Frontier left to right: words (str) and open slots ``(label,)``."""
        out: list = []
        _frontier(self, out)
        return out

    @property
    def n_slots(self) -> int:
        return sum(1 for x in self.frontier() if _is_slot(x))

    def slot_labels(self) -> list[str]:
        return [x[0] for x in self.frontier() if _is_slot(x)]

    def terminals(self) -> list:
        return [x for x in self.frontier() if _is_terminal(x)]

    @property
    def is_complete(self) -> bool:
        return all(_is_terminal(x) for x in self.frontier())

    def to_tree(self) -> Tree:
        if not self.is_complete:
            raise ValueError("fragment has open slots")
        return _node_to_tree(self)

    @classmethod
    def from_tree(cls, tree: Tree) -> "Fragment":
        return cls(tree_to_node(tree))

    def __str__(self):
        return fragment_to_bracketed(self)

    def __repr__(self):
        return f"Fragment({fragment_to_bracketed(self)!r})"


def _frontier(node, out):
    if _is_terminal(node) or _is_slot(node):
        out.append(node)
        return
    for child in node[1:]:
        _frontier(child, out)


def _node_to_tree(node) -> Tree:
    if _is_terminal(node):
        return Tree(str(node))
    if _is_slot(node):
        return Tree(node[0], tag_leaf=True)
    return Tree(node[0], [_node_to_tree(c) for c in node[1:]])


def tree_to_node(tree: Tree):
    """Tree -> nested tuple node (leaves become plain strings)."""
    if tree.is_leaf:
        return tree.label
    return (tree.label,) + tuple(tree_to_node(c) for c in tree.children)


def fragment_to_bracketed(node) -> str:
    """Canonical, byte-stable bracketing; open slots print as ``(NP )``."""
    if _is_terminal(node):
        return str(node)
    if _is_slot(node):
        return "(%s )" % node[0]
    return "(%s %s)" % (node[0], " ".join(fragment_to_bracketed(c) for c in node[1:]))


def fragment_from_bracketed(text: str) -> Fragment:
    """Inverse of :func:`fragment_to_bracketed`; ``(NP )`` reads as a slot."""
    stack: list[list] = []
    result = None
    for tok, pos in _tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if not stack:
                raise TreebankError("unbalanced ')'", pos + 1)
            items = stack.pop()
            if not items or not isinstance(items[0], str):
                raise TreebankError("unlabeled node", pos + 1)
            node = tuple(items)
            if stack:
                stack[-1].append(node)
            elif result is None:
                result = node
            else:
                raise TreebankError("more than one fragment", pos + 1)
        else:
            if not stack:
                raise TreebankError("terminal outside brackets", pos + 1)
            stack[-1].append(WORD_SLOT if tok == str(WORD_SLOT) else tok)
    if stack or result is None:
        raise TreebankError("unbalanced '('", len(text) + 1)
    return Fragment(result)


def depth(node) -> int:
    """Edges on the longest path from the root to the frontier."""
    if _is_terminal(node) or _is_slot(node):
        return 0
    return 1 + max(depth(c) for c in node[1:])


class _Extractor:
    """Memoized fragment enumeration shared across the trees of a corpus."""

    def __init__(self):
        self.memo: dict = {}

    def rooted(self, node, bound: int) -> list[tuple]:
        """All fragments rooted at ``node`` with depth <= bound."""
        if bound <= 0 or _is_terminal(node):
            return []
        key = (node, bound)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        options = []
        for child in node[1:]:
            if _is_terminal(child):
                options.append((child,))
            else:
                options.append([(child[0],)] + self.rooted(child, bound - 1))
        label = node[0]
        frags = [(label,) + combo for combo in product(*options)]
        self.memo[key] = frags
        return frags


def _internal_nodes(node) -> Iterator[tuple]:
    if _is_terminal(node):
        return
    yield node
    for child in node[1:]:
        yield from _internal_nodes(child)


def _bound(max_depth: int | None, node) -> int:
    return depth(node) if max_depth is None else max_depth


def extract_fragments(tree: Tree, max_depth: int | None = None) -> Counter:
    """Multiset of all fragments of ``tree`` with depth in [1, max_depth].

    ``max_depth=None`` means unbounded.
    """
    return _extract(tree, max_depth, _Extractor())


def _extract(tree: Tree, max_depth, extractor: _Extractor) -> Counter:
    counts: Counter = Counter()
    root = tree_to_node(tree)
    bound = _bound(max_depth, root)
    for node in _internal_nodes(root):
        for frag in extractor.rooted(node, bound):
            counts[Fragment(frag)] += 1
    return counts


def count_fragments(tree: Tree, max_depth: int | None = None) -> int:
    """Number of fragments via the product formula, without enumerating."""
    root = tree_to_node(tree)
    bound = _bound(max_depth, root)
    memo: dict = {}

    def rooted(node, d):
        if d <= 0 or _is_terminal(node):
            return 0
        key = (node, d)
        if key not in memo:
            total = 1
            for child in node[1:]:
                total *= 1 + rooted(child, d - 1)
            memo[key] = total
        return memo[key]

    return sum(rooted(n, bound) for n in _internal_nodes(root))


class FragmentBank:
    """Root-label-partitioned multiset of corpus fragments.

    Attributes
    ----------
    counts : dict[str, Counter]
        root label -> fragment -> token count
    class_totals : dict[str, int]
        root label -> total token count of that class
    max_depth : int or None
    vocabulary_size : int
        size of the word vocabulary the bank is taken to range over
    tree_roots : Counter
        root labels of the corpus trees the bank was built from
    """

    def __init__(self, counts, max_depth=None, vocabulary_size=0, tree_roots=None):
        self.counts: dict[str, Counter] = {
            root: Counter(c) for root, c in sorted(counts.items()) if c
        }
        self.class_totals = {root: sum(c.values()) for root, c in self.counts.items()}
        self.max_depth = max_depth
        self.vocabulary_size = vocabulary_size
        self.tree_roots = Counter(tree_roots or {})
        self._lexical = None

    def __contains__(self, fragment) -> bool:
        return fragment in self.counts.get(fragment[0], ())

    def __len__(self):
        """Number of fragment types."""
        return sum(len(c) for c in self.counts.values())

    def count(self, fragment) -> int:
        return self.counts.get(fragment[0], {}).get(fragment, 0)

    @property
    def total_tokens(self) -> int:
        return sum(self.class_totals.values())

    def fragments(self) -> Iterator[tuple[Fragment, int]]:
        for root in self.counts:
            yield from self.counts[root].items()

    @property
    def labels(self) -> list[str]:
        return list(self.counts)

    def _lexical_index(self):
        if self._lexical is None:
            word_tags: dict[str, set] = {}
            for root, c in self.counts.items():
                for frag in c:
                    if len(frag) == 2 and _is_terminal(frag[1]):
                        word_tags.setdefault(frag[1], set()).add(root)
            self._lexical = word_tags
        return self._lexical

    @property
    def word_tags(self) -> dict[str, set]:
        """word -> tags it was seen with, from the lexical fragments ``T(w)``."""
        return self._lexical_index()

    @property
    def preterminal_labels(self) -> set[str]:
        tags: set[str] = set()
        for ts in self._lexical_index().values():
            tags.update(ts)
        return tags

    @property
    def known_words(self) -> set[str]:
        return set(self._lexical_index())

    @property
    def start_label(self) -> str:
        """Most frequent root label of the corpus trees (ties: alphabetical)."""
        if not self.tree_roots:
            raise ValueError("bank has no recorded tree roots")
        return min(self.tree_roots, key=lambda lab: (-self.tree_roots[lab], lab))

    def substitution_probability(self, fragment, exact: bool = False):
        return substitution_probability(self, fragment, exact)

    # serialization

    def dump(self, fh) -> None:
        """Header line (JSON) followed by ``root<TAB>skeleton<TAB>count`` rows."""
        header = {
            "format": "dop-fragment-bank",
            "max_depth": self.max_depth,
            "V": self.vocabulary_size,
            "classes": list(self.counts),
            "tree_roots": dict(sorted(self.tree_roots.items())),
        }
        fh.write(json.dumps(header, ensure_ascii=False, sort_keys=True) + "\n")
        for root in self.counts:
            rows = sorted(
                (fragment_to_bracketed(f), n) for f, n in self.counts[root].items()
            )
            for skel, n in rows:
                fh.write(f"{root}\t{skel}\t{n}\n")

    @classmethod
    def load(cls, fh) -> "FragmentBank":
        header = json.loads(fh.readline())
        if header.get("format") != "dop-fragment-bank":
            raise ValueError("not a fragment bank file")
        counts: dict[str, Counter] = {}
        for lineno, line in enumerate(fh, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                root, skel, n = line.split("\t")
                frag = fragment_from_bracketed(skel)
                count = int(n)
            except ValueError as err:
                raise ValueError(f"line {lineno}: {err}") from err
            if frag.root != root:
                raise ValueError(f"line {lineno}: root {root!r} does not match fragment")
            counts.setdefault(root, Counter())[frag] = count
        return cls(counts, header["max_depth"], header["V"], header.get("tree_roots"))


def build_bank(corpus: Iterable[Tree], max_depth: int | None = None,
               vocabulary_size: int | None = None) -> FragmentBank:
    """Count the fragments of every corpus tree.

    Fragments occurring once are kept. ``vocabulary_size`` defaults to the
    number of distinct words (leaves) in the corpus.
    """
    trees = list(corpus)
    if not trees:
        raise ValueError("cannot build a fragment bank from an empty corpus")
    if max_depth is not None and max_depth < 1:
        raise ValueError("max_depth must be >= 1 or None")
    extractor = _Extractor()
    counts: dict[str, Counter] = {}
    words: set[str] = set()
    for tree in trees:
        words.update(tree.leaves())
        for frag, n in _extract(tree, max_depth, extractor).items():
            counts.setdefault(frag[0], Counter())[frag] += n
    if vocabulary_size is None:
        vocabulary_size = len(words)
    roots = Counter(t.label for t in trees)
    return FragmentBank(counts, max_depth, vocabulary_size, roots)


def substitution_probability(bank: FragmentBank, fragment, exact: bool = False):
    """Relative frequency of ``fragment`` within its root class.

    Returns ``None`` for a fragment the bank has never seen.
    """
    n = bank.count(fragment)
    if n == 0:
        return None
    total = bank.class_totals[fragment[0]]
    return Fraction(n, total) if exact else n / total


def _replace_leftmost(node, u):
    """Return (new node, done) with the leftmost open slot replaced by u."""
    if _is_terminal(node):
        return node, False
    if _is_slot(node):
        if node[0] != u[0]:
            raise ValueError(
                f"cannot substitute {u[0]!r} fragment on leftmost slot {node[0]!r}"
            )
        return tuple(u), True
    children = list(node[1:])
    for i, child in enumerate(children):
        new, done = _replace_leftmost(child, u)
        if done:
            children[i] = new
            return (node[0],) + tuple(children), True
    return node, False


def substitute(t, u):
    """Leftmost substitution ``t o u``."""
    new, done = _replace_leftmost(t, u)
    if not done:
        raise ValueError("fragment has no open slot")
    return Fragment(new)


def compose(fragments: Iterable) -> Fragment:
    """Left-associative composition ``t1 o t2 o ... o tn``."""
    it = iter(fragments)
    result = Fragment(next(it))
    for u in it:
        result = substitute(result, u)
    return result


def _template(node):
    if _is_terminal(node):
        return WORD_SLOT, 1
    if _is_slot(node):
        return node, 0
    k = 0
    children = []
    for child in node[1:]:
        new, n = _template(child)
        children.append(new)
        k += n
    return (node[0],) + tuple(children), k


def template_of(fragment) -> tuple[Fragment, int]:
    """Replace every word by :data:`WORD_SLOT`; returns (template, k)."""
    node, k = _template(fragment)
    return Fragment(node), k
