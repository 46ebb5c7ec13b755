"""Chart parsing with fragments into a packed derivation forest.

Fragments are matched bottom-up over spans (CKY order) by their frontier:
words against input words, open slots against completed chart nodes. The
frontiers of all bank fragments are shared in a prefix trie, so a dotted
item is just ``(trie node, start, end)``.

Unknown-word handling is driven by a :class:`MatchPolicy`:

* ``wildcard_words`` -- input positions where any fragment word may
  match; the fragment word is then replaced by the input word.
* ``open_tag_positions`` -- input positions where lexical nodes
  ``T(word)`` are put directly into the chart for the listed tags.
"""
from __future__ import annotations

import enum
import fnmatch
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

from .fragments import Fragment, FragmentBank, _is_slot, _is_terminal, compose, fragment_to_bracketed
from .lexicon import Lexicon
from .treebank import Tree

BANK = "bank"
WILDCARD = "wildcard"
SEEDED = "seeded"

DEFAULT_AMBIGUOUS_TAGS = ("NN*", "VB*")


class ParseMode(str, enum.Enum):
    DOP1 = "dop1"
    DOP2 = "dop2"
    DOP3 = "dop3"
    DOP4 = "dop4"

    @classmethod
    def coerce(cls, value) -> "ParseMode":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class DerivationLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class MatchPolicy:
    wildcard_words: frozenset = frozenset()
    open_tag_positions: dict = field(default_factory=dict)

    def validate(self, n: int) -> None:
        for k in list(self.wildcard_words) + list(self.open_tag_positions):
            if not 0 <= k < n:
                raise ValueError(f"policy position {k} outside sentence of length {n}")

    @property
    def is_empty(self) -> bool:
        return not self.wildcard_words and not self.open_tag_positions


def expand_tag_patterns(patterns: Iterable[str], tags: Iterable[str]) -> frozenset:
    """Resolve shell-style tag patterns (``NN*``) against a tagset."""
    tags = list(tags)
    out = set()
    for pat in patterns:
        out.update(t for t in tags if fnmatch.fnmatchcase(t, pat))
    return frozenset(out)


def derive_ambiguous_tags(bank: FragmentBank) -> frozenset:
    """Tags carried by training words that occur with more than one tag."""
    out: set = set()
    for tags in bank.word_tags.values():
        if len(tags) > 1:
            out.update(tags)
    return frozenset(out)


def classify_positions(sentence: Sequence[str], bank: FragmentBank,
                       lexicon: Lexicon | None = None, mode=ParseMode.DOP1,
                       ambiguous_tags: Iterable[str] | None = None) -> MatchPolicy:
    """Decide which input positions may mismatch or get seeded tags."""
    mode = ParseMode.coerce(mode)
    if not sentence:
        raise ValueError("empty sentence")
    known = bank.known_words
    if mode is ParseMode.DOP1:
        return MatchPolicy()
    if mode is ParseMode.DOP2:
        tags = frozenset(bank.preterminal_labels)
        return MatchPolicy(open_tag_positions={
            k: tags for k, w in enumerate(sentence) if w not in known})
    if mode is ParseMode.DOP3:
        if ambiguous_tags is None:
            ambiguous_tags = DEFAULT_AMBIGUOUS_TAGS
        ambiguous = expand_tag_patterns(ambiguous_tags, bank.preterminal_labels)
        wild = set()
        for k, w in enumerate(sentence):
            if w not in known or bank.word_tags.get(w, set()) & ambiguous:
                wild.add(k)
        return MatchPolicy(wildcard_words=frozenset(wild))
    if lexicon is None:
        raise ValueError("DOP4 needs a lexicon")
    seeds = {}
    wild = set()
    for k, w in enumerate(sentence):
        tags = lexicon.lookup(w)
        if tags:
            seeds[k] = frozenset(tags)
        elif w not in known:
            wild.add(k)
    return MatchPolicy(wildcard_words=frozenset(wild), open_tag_positions=seeds)


@dataclass(frozen=True)
class Application:
    """One fragment applied at a forest node.

    ``children`` holds one node key ``(start, end, label)`` per open slot, in
    frontier order. ``wildcards`` lists the sentence positions whose word
    replaced a fragment word. ``seed_options`` is the number of tags seeded
    at the position of a seeded lexical node (0 otherwise).
    """

    fragment: Fragment
    children: tuple = ()
    origin: str = BANK
    wildcards: tuple = ()
    seed_options: int = 0

    def sort_key(self):
        return (fragment_to_bracketed(self.fragment), self.children, self.origin)


class Derivation(tuple):
    """Applications in leftmost-substitution order."""

    __slots__ = ()

    @property
    def fragments(self) -> list[Fragment]:
        return [a.fragment for a in self]

    def tree(self) -> Tree:
        return compose(self.fragments).to_tree()


class DerivationForest:
    """Packed AND/OR forest over ``(start, end, label)`` nodes."""

    def __init__(self, sentence, nodes: dict, root):
        self.sentence = tuple(sentence)
        self.nodes: dict = dict(sorted(nodes.items()))
        self.root = root if root in self.nodes else None

    @property
    def is_empty(self) -> bool:
        return self.root is None

    def __len__(self):
        return len(self.nodes)

    def applications(self):
        for key, apps in self.nodes.items():
            for i, app in enumerate(apps):
                yield key, i, app

    def topological_order(self) -> list:
        """Node keys with children before parents."""
        order: list = []
        seen: set = set()

        def visit(key):
            stack = [(key, iter(self._child_keys(key)))]
            seen.add(key)
            while stack:
                node, it = stack[-1]
                for child in it:
                    if child not in seen:
                        seen.add(child)
                        stack.append((child, iter(self._child_keys(child))))
                        break
                else:
                    stack.pop()
                    order.append(node)

        for key in self.nodes:
            if key not in seen:
                visit(key)
        return order

    def _child_keys(self, key):
        out = []
        for app in self.nodes[key]:
            for c in app.children:
                if c not in out:
                    out.append(c)
        return out

    def count_derivations(self) -> int:
        if self.is_empty:
            return 0
        counts: dict = {}
        for key in self.topological_order():
            total = 0
            for app in self.nodes[key]:
                n = 1
                for c in app.children:
                    n *= counts[c]
                total += n
            counts[key] = total
        return counts[self.root]

    def dump(self) -> str:
        """Deterministic line records for debugging and golden tests."""
        lines = []
        for (i, j, label), apps in self.nodes.items():
            for idx, app in enumerate(apps):
                kids = " ".join(f"{a}:{b}:{c}" for a, b, c in app.children) or "-"
                lines.append(
                    f"{i}\t{j}\t{label}\t{idx}\t{app.origin}\t"
                    f"{fragment_to_bracketed(app.fragment)}\t{kids}"
                )
        return "\n".join(lines) + ("\n" if lines else "")


# -- frontier trie -----------------------------------------------------------

class _Trie:
    __slots__ = ("words", "slots", "ends", "depth", "min_rest", "n")

    def __init__(self, bank: FragmentBank):
        self.words: list[dict] = [{}]
        self.slots: list[dict] = [{}]
        self.ends: list[list] = [[]]
        self.depth: list[int] = [0]
        for frag, _ in bank.fragments():
            t = 0
            for sym in frag.frontier():
                if _is_slot(sym):
                    table, key = self.slots[t], sym[0]
                else:
                    table, key = self.words[t], sym
                nxt = table.get(key)
                if nxt is None:
                    nxt = len(self.words)
                    table[key] = nxt
                    self.words.append({})
                    self.slots.append({})
                    self.ends.append([])
                    self.depth.append(self.depth[t] + 1)
                t = nxt
            self.ends[t].append(frag)
        for ends in self.ends:
            ends.sort(key=fragment_to_bracketed)
        self.n = len(self.words)
        # fewest further frontier symbols needed to reach a complete fragment
        inf = float("inf")
        rest = [inf] * self.n
        for t in range(self.n - 1, -1, -1):  # children always have larger ids
            best = 0 if self.ends[t] else inf
            for c in self.words[t].values():
                best = min(best, rest[c] + 1)
            for c in self.slots[t].values():
                best = min(best, rest[c] + 1)
            rest[t] = best
        self.min_rest = rest


def frontier_index(bank: FragmentBank) -> _Trie:
    idx = getattr(bank, "_frontier_trie", None)
    if idx is None:
        idx = _Trie(bank)
        bank._frontier_trie = idx
    return idx


def _instantiate(node, replace: dict, counter: list):
    """Copy ``node`` replacing the frontier words whose index is in ``replace``."""
    if _is_terminal(node) or _is_slot(node):
        pos = counter[0]
        counter[0] += 1
        if _is_terminal(node) and pos in replace:
            return replace[pos]
        return node
    return (node[0],) + tuple(_instantiate(c, replace, counter) for c in node[1:])


def instantiate(fragment: Fragment, replace: dict) -> Fragment:
    if not replace:
        return fragment
    return Fragment(_instantiate(fragment, replace, [0]))


def build_forest(bank: FragmentBank, sentence: Sequence[str], policy: MatchPolicy | None = None,
                 mode=ParseMode.DOP1, start: str | None = None) -> DerivationForest:
    """All derivations of ``sentence`` from bank fragments, packed.

    Returns a forest with ``is_empty`` set when no derivation exists.
    """
    mode = ParseMode.coerce(mode)
    if not bank.counts:
        raise ValueError("empty fragment bank")
    sentence = tuple(sentence)
    n = len(sentence)
    if n == 0:
        raise ValueError("empty sentence")
    policy = policy or MatchPolicy()
    policy.validate(n)
    if mode is ParseMode.DOP1 and not policy.is_empty:
        raise ValueError("DOP1 does not allow wildcards or seeded tags")
    start = start or bank.start_label
    trie = frontier_index(bank)
    words, slots, ends, min_rest = trie.words, trie.slots, trie.ends, trie.min_rest
    wild = policy.wildcard_words

    # (i, j) -> {trie node: [(prev trie node, k, symbol)]}; symbol is
    # ("w", fragment word) or ("n", label) for a chart node (k, j, label)
    items: dict = {}
    # (i, j) -> {label: {(fragment, children): Application}}
    chart: dict = {}
    path_memo: dict = {}

    def add(cur, child, bp, j):
        if j + min_rest[child] > n:
            return False
        lst = cur.get(child)
        if lst is None:
            cur[child] = [bp]
            return True
        lst.append(bp)
        return False

    def paths(t, i, j):
        """(children, {frontier index: word}) for each way item (t,i,j) was built."""
        if t == 0:
            return [((), ())]
        key = (t, i, j)
        hit = path_memo.get(key)
        if hit is not None:
            return hit
        out = []
        for prev, k, sym in items[i, j][t]:
            for kids, repl in paths(prev, i, k):
                if sym[0] == "w":
                    if sym[1] != sentence[k]:
                        repl = repl + ((trie.depth[prev], sentence[k], k),)
                    out.append((kids, repl))
                else:
                    out.append((kids + ((k, j, sym[1]),), repl))
        path_memo[key] = out
        return out

    for length in range(1, n + 1):
        for i in range(0, n - length + 1):
            j = i + length
            cur: dict = {}
            # extend prefixes ending at j-1 with the word at j-1
            k = j - 1
            sources = [0] if i == k else list(items.get((i, k), ()))
            for t in sources:
                table = words[t]
                if not table:
                    continue
                if k in wild:
                    for w, c in table.items():
                        add(cur, c, (t, k, ("w", w)), j)
                else:
                    c = table.get(sentence[k])
                    if c is not None:
                        add(cur, c, (t, k, ("w", sentence[k])), j)
            # extend prefixes (i, k) with completed nodes (k, j)
            for k in range(i + 1, j):
                left = items.get((i, k))
                right = chart.get((k, j))
                if not left or not right:
                    continue
                for t in left:
                    table = slots[t]
                    if not table:
                        continue
                    for label in right:
                        c = table.get(label)
                        if c is not None:
                            add(cur, c, (t, k, ("n", label)), j)
            # completed labels, closed under unary application within the span
            labels: set = set()
            if length == 1 and i in policy.open_tag_positions:
                labels.update(policy.open_tag_positions[i])
            pending = list(cur)
            done_unary: set = set()
            while True:
                for t in pending:
                    for frag in ends[t]:
                        labels.add(frag[0])
                pending = []
                fresh = [lab for lab in labels if lab not in done_unary]
                if not fresh:
                    break
                for label in sorted(fresh):
                    done_unary.add(label)
                    c = slots[0].get(label)
                    if c is not None and add(cur, c, (0, i, ("n", label)), j):
                        pending.append(c)
            if cur:
                items[i, j] = cur
            if not labels:
                continue
            # build the applications of every completed item
            span_nodes: dict = {}
            for t in cur:
                if not ends[t]:
                    continue
                for kids, repl in paths(t, i, j):
                    replace = {pos: word for pos, word, _ in repl}
                    wpos = tuple(sorted(k for _, _, k in repl))
                    for frag in ends[t]:
                        inst = instantiate(frag, replace)
                        origin = BANK if not replace or inst in bank else WILDCARD
                        app = Application(inst, kids, origin, () if origin == BANK else wpos)
                        node = span_nodes.setdefault(frag[0], {})
                        old = node.get((inst, kids))
                        if old is None or (old.origin != BANK and origin == BANK):
                            node[inst, kids] = app
            if length == 1 and i in policy.open_tag_positions:
                tags = policy.open_tag_positions[i]
                for tag in sorted(tags):
                    frag = Fragment((tag, sentence[i]))
                    node = span_nodes.setdefault(tag, {})
                    if (frag, ()) not in node:
                        origin = BANK if frag in bank else SEEDED
                        node[frag, ()] = Application(
                            frag, (), origin, (), 0 if origin == BANK else len(tags))
            if span_nodes:
                chart[i, j] = span_nodes

    nodes = {}
    for (i, j), span_nodes in chart.items():
        for label, apps in span_nodes.items():
            nodes[i, j, label] = sorted(apps.values(), key=Application.sort_key)
    return DerivationForest(sentence, _prune(nodes, (0, n, start)), (0, n, start))


def _productive(nodes: dict) -> dict:
    """Drop applications (and nodes) that cannot complete a derivation."""
    good: set = set()
    changed = True
    while changed:
        changed = False
        for key, apps in nodes.items():
            if key in good:
                continue
            if any(all(c in good for c in a.children) for a in apps):
                good.add(key)
                changed = True
    return {
        key: [a for a in apps if all(c in good for c in a.children)]
        for key, apps in nodes.items() if key in good
    }


def _prune(nodes: dict, root) -> dict:
    """Keep productive nodes reachable from the root; cut unary cycles.

    An application whose child is already on the current DFS path (a cycle
    inside one span) is removed. Nodes and applications are visited in
    canonical order, so the result is deterministic.
    """
    while True:
        nodes = _productive(nodes)
        if root not in nodes:
            return {}
        on_path: set = set()
        keep: dict = {}
        removed = [False]

        def visit(key):
            on_path.add(key)
            kept = []
            keep[key] = kept
            for app in nodes[key]:
                if any(c in on_path for c in app.children):
                    removed[0] = True
                    continue
                kept.append(app)
                for c in app.children:
                    if c not in keep:
                        visit(c)
            on_path.discard(key)

        visit(root)
        nodes = keep
        if not removed[0]:
            return nodes


def enumerate_derivations(forest: DerivationForest, limit: int = 10_000) -> list[Derivation]:
    """Every derivation in the forest, in canonical order."""
    if forest.is_empty:
        return []
    total = forest.count_derivations()
    if total > limit:
        raise DerivationLimitError(f"{total} derivations exceed limit {limit}")
    memo: dict = {}

    def expand(key):
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = []
        for app in forest.nodes[key]:
            for combo in product(*(expand(c) for c in app.children)):
                seq = [app]
                for part in combo:
                    seq.extend(part)
                out.append(tuple(seq))
        memo[key] = out
        return out

    return [Derivation(d) for d in expand(forest.root)]
