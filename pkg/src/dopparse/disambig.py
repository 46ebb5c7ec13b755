"""Scoring and selecting analyses from a derivation forest."""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from .fragments import FragmentBank, _is_slot, _is_terminal
from .parser import (SEEDED, Application, Derivation, DerivationForest,
                     DerivationLimitError, enumerate_derivations)
from .smoothing import AdjustedModel
from .treebank import Tree, to_bracketed

Number = Union[float, Fraction]
NEG_INF = float("-inf")


class UnresolvableFragment(KeyError):
    pass


class RelativeFrequencyModel:
    """Substitution probabilities #(t) / #(root(t)) straight from the bank.

    Seeded lexical nodes (tags assigned to unknown words) get probability 1,
    or ``1 / number of seeded tags`` with ``seed_weighting="uniform"``.
    """

    def __init__(self, bank: FragmentBank, exact: bool = False, seed_weighting: str = "one"):
        if seed_weighting not in ("one", "uniform"):
            raise ValueError("seed_weighting must be 'one' or 'uniform'")
        self.bank = bank
        self.exact = exact
        self.seed_weighting = seed_weighting

    def probability(self, app) -> Number:
        if not isinstance(app, Application):
            app = Application(app)
        if app.origin == SEEDED:
            if self.seed_weighting == "uniform":
                return Fraction(1, app.seed_options) if self.exact else 1 / app.seed_options
            return Fraction(1) if self.exact else 1.0
        n = self.bank.count(app.fragment)
        if n == 0:
            raise UnresolvableFragment(app.fragment)
        total = self.bank.class_totals[app.fragment[0]]
        return Fraction(n, total) if self.exact else n / total


class AdjustedFrequencyModel:
    """Good-Turing adjusted probabilities; unseen fragments share r*(0)."""

    def __init__(self, adjusted: AdjustedModel):
        self.adjusted = adjusted
        self.exact = adjusted.exact

    @property
    def bank(self):
        return self.adjusted.bank

    def probability(self, app) -> Number:
        frag = app.fragment if isinstance(app, Application) else app
        return self.adjusted.probability(frag)


ProbabilityModel = Union[RelativeFrequencyModel, AdjustedFrequencyModel]


def _one(model):
    return Fraction(1) if model.exact else 1.0


def _zero(model):
    return Fraction(0) if model.exact else 0.0


def _log(p) -> float:
    p = float(p)
    return math.log(p) if p > 0 else NEG_INF


def _logsumexp(values) -> float:
    values = list(values)
    if not values:
        return NEG_INF
    m = max(values)
    if m == NEG_INF:
        return NEG_INF
    return m + math.log(sum(math.exp(v - m) for v in values))


def derivation_probability(derivation, model: ProbabilityModel) -> Number:
    """Product of the substitution probabilities of the derivation's steps."""
    p = _one(model)
    for app in derivation:
        p *= model.probability(app)
    return p


def _app_probs(forest: DerivationForest, model):
    return {key: [model.probability(a) for a in apps] for key, apps in forest.nodes.items()}


def inside_mass(forest: DerivationForest, model: ProbabilityModel) -> dict:
    """Total probability of all derivations below each node.

    Exact models give exact rationals; float models are accumulated in log
    space and exponentiated at the end.
    """
    if forest.is_empty:
        return {}
    if not model.exact:
        return {k: math.exp(v) for k, v in log_inside_mass(forest, model).items()}
    probs = _app_probs(forest, model)
    mass: dict = {}
    for key in forest.topological_order():
        total = Fraction(0)
        for app, p in zip(forest.nodes[key], probs[key]):
            for c in app.children:
                p *= mass[c]
            total += p
        mass[key] = total
    return mass


def log_inside_mass(forest: DerivationForest, model: ProbabilityModel) -> dict:
    if forest.is_empty:
        return {}
    probs = _app_probs(forest, model)
    mass: dict = {}
    for key in forest.topological_order():
        terms = []
        for app, p in zip(forest.nodes[key], probs[key]):
            lp = _log(p)
            for c in app.children:
                lp += mass[c]
            terms.append(lp)
        mass[key] = _logsumexp(terms)
    return mass


def _read_derivation(forest, choose) -> Derivation:
    """Walk top-down taking application ``choose(key)`` at each node."""
    out = []
    stack = [forest.root]
    while stack:
        key = stack.pop()
        app = forest.nodes[key][choose(key)]
        out.append(app)
        stack.extend(reversed(app.children))
    return Derivation(out)


def most_probable_derivation(forest: DerivationForest, model: ProbabilityModel):
    """Viterbi derivation and its probability.

    Ties go to the application that comes first in canonical order.
    """
    if forest.is_empty:
        raise ValueError("empty forest: no parse")
    probs = _app_probs(forest, model)
    best: dict = {}
    back: dict = {}
    for key in forest.topological_order():
        best_score, best_i = None, 0
        for i, (app, p) in enumerate(zip(forest.nodes[key], probs[key])):
            if model.exact:
                score = p
                for c in app.children:
                    score *= best[c]
            else:
                score = _log(p)
                for c in app.children:
                    score += best[c]
            if best_score is None or score > best_score:
                best_score, best_i = score, i
        best[key], back[key] = best_score, best_i
    deriv = _read_derivation(forest, back.__getitem__)
    score = best[forest.root]
    return deriv, (score if model.exact else math.exp(score))


def _tree_spans(tree: Tree) -> dict:
    spans: dict = {}

    def walk(node, i):
        if node.is_leaf:
            spans[id(node)] = (i, i + 1)
            return i + 1
        j = i
        for c in node.children:
            j = walk(c, j)
        spans[id(node)] = (i, j)
        return j

    walk(tree, 0)
    return spans


def _match(frag_node, tree: Tree, slots: list) -> bool:
    """Does the fragment sit on top of ``tree``? Collects trees under slots."""
    if _is_terminal(frag_node):
        return tree.is_leaf and tree.label == frag_node
    if _is_slot(frag_node):
        if tree.is_leaf or tree.label != frag_node[0]:
            return False
        slots.append(tree)
        return True
    if tree.is_leaf or tree.label != frag_node[0] or len(tree.children) != len(frag_node) - 1:
        return False
    return all(_match(f, t, slots) for f, t in zip(frag_node[1:], tree.children))


def parse_probability(tree: Tree, forest: DerivationForest, model: ProbabilityModel) -> Number:
    """Sum of the probabilities of the forest derivations that yield ``tree``.

    Dynamic programming restricted to the nodes of ``tree``; no enumeration.
    """
    if forest.is_empty or tuple(tree.leaves()) != forest.sentence:
        return _zero(model)
    spans = _tree_spans(tree)
    memo: dict = {}

    def mass(node: Tree, key) -> Number:
        mk = (id(node), key)
        if mk in memo:
            return memo[mk]
        total = _zero(model)
        for app in forest.nodes.get(key, ()):
            slots: list = []
            if not _match(app.fragment, node, slots):
                continue
            if len(slots) != len(app.children):
                continue
            p = model.probability(app)
            for sub, child in zip(slots, app.children):
                if (child[0], child[1]) != spans[id(sub)] or child[2] != sub.label:
                    p = _zero(model)
                    break
                p *= mass(sub, child)
                if not p:
                    break
            total += p
        memo[mk] = total
        return total

    return mass(tree, forest.root)


def parse_probability_by_enumeration(tree: Tree, forest: DerivationForest,
                                     model: ProbabilityModel, limit: int = 10_000) -> Number:
    total = _zero(model)
    for d in enumerate_derivations(forest, limit):
        if d.tree() == tree:
            total += derivation_probability(d, model)
    return total


@dataclass
class ParseResult:
    """Selected analysis.

    ``score`` is the joint probability for ``exact`` and ``viterbi-derivation``
    and the modal sample frequency for ``monte-carlo``.
    """

    tree: Tree | None
    score: float
    method: str
    samples_used: int = 0
    standard_error: float = 0.0
    derivation: Derivation | None = field(default=None, repr=False, compare=False)

    @property
    def is_parse(self) -> bool:
        return self.tree is not None

    def to_record(self) -> dict:
        return {
            "tree": None if self.tree is None else to_bracketed(self.tree),
            "score": float(self.score),
            "method": self.method,
            "samples": self.samples_used,
            "standard_error": float(self.standard_error),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def no_parse(cls, method: str) -> "ParseResult":
        return cls(None, 0.0, method)


def viterbi_parse(forest: DerivationForest, model: ProbabilityModel) -> ParseResult:
    d, p = most_probable_derivation(forest, model)
    return ParseResult(d.tree(), p, "viterbi-derivation", derivation=d)


# -- sampling ---------------------------------------------------------------

class _Sampler:
    """Per-forest tables for drawing derivations top-down."""

    def __init__(self, forest: DerivationForest, model: ProbabilityModel, naive: bool = False):
        if forest.is_empty:
            raise ValueError("empty forest: no parse")
        self.forest = forest
        order = forest.topological_order()
        self.keys = list(reversed(order))  # parents first
        self.index = {k: i for i, k in enumerate(self.keys)}
        probs = _app_probs(forest, model)
        logmass = None if naive else log_inside_mass(forest, model)
        if not naive and logmass[forest.root] == NEG_INF:
            raise ValueError("forest has zero probability mass")
        self.cum = []
        self.children = []
        for key in self.keys:
            apps = forest.nodes[key]
            logw = []
            for app, p in zip(apps, probs[key]):
                lw = _log(p)
                if not naive:
                    for c in app.children:
                        lw += logmass[c]
                logw.append(lw)
            m = max(logw)
            if m == NEG_INF:
                w = np.full(len(apps), 1.0 / len(apps))
            else:
                w = np.exp(np.array(logw) - m)
            c = np.cumsum(w)
            self.cum.append(c / c[-1])
            self.children.append([tuple(self.index[ch] for ch in a.children) for a in apps])
        self.choice_nodes = [i for i, c in enumerate(self.cum) if len(c) > 1]
        self.column = {node: col for col, node in enumerate(self.choice_nodes)}

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Matrix (n, choice nodes) of application indices; -1 = not visited."""
        choice = np.full((n, len(self.choice_nodes)), -1, dtype=np.int32)
        pending: dict = {0: [np.arange(n)]}
        for node in range(len(self.keys)):
            parts = pending.pop(node, None)
            if parts is None:
                continue
            idx = parts[0] if len(parts) == 1 else np.concatenate(parts)
            cum = self.cum[node]
            if len(cum) == 1:
                picks = np.zeros(len(idx), dtype=np.int64)
            else:
                picks = np.searchsorted(cum, rng.random(len(idx)), side="right")
                np.minimum(picks, len(cum) - 1, out=picks)
                choice[idx, self.column[node]] = picks
            kids = self.children[node]
            if len(cum) == 1:
                for c in kids[0]:
                    pending.setdefault(c, []).append(idx)
                continue
            for a in np.unique(picks):
                if not kids[a]:
                    continue
                sel = idx[picks == a]
                for c in kids[a]:
                    pending.setdefault(c, []).append(sel)
        return choice

    def derivation(self, row) -> Derivation:
        def choose(key):
            node = self.index[key]
            col = self.column.get(node)
            return 0 if col is None else int(row[col])

        return _read_derivation(self.forest, choose)


def _rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_derivations(forest: DerivationForest, model: ProbabilityModel, n: int, rng=None,
                       naive: bool = False) -> list[tuple[Derivation, int, int]]:
    """Draw ``n`` derivations; returns (derivation, count, first draw index).

    The default sampler chooses each application with probability
    proportional to its substitution probability times the inside mass of
    its children, so a derivation is drawn with probability exactly
    P(d) / mass(root). ``naive=True`` ignores the children's mass.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sampler = _Sampler(forest, model, naive)
    choice = sampler.draw(n, _rng(rng))
    if choice.shape[1] == 0:
        return [(sampler.derivation(()), n, 0)]
    rows, first, counts = np.unique(choice, axis=0, return_index=True, return_counts=True)
    out = [(sampler.derivation(r), int(c), int(f)) for r, c, f in zip(rows, counts, first)]
    out.sort(key=lambda x: x[2])
    return out


def sample_derivation(forest: DerivationForest, model: ProbabilityModel, rng=None,
                      naive: bool = False) -> Derivation:
    return sample_derivations(forest, model, 1, rng, naive)[0][0]


def most_probable_parse_mc(forest: DerivationForest, model: ProbabilityModel, n_samples: int,
                           rng=None, naive: bool = False) -> ParseResult:
    """Modal parse tree among ``n_samples`` sampled derivations.

    Ties go to the tree that was sampled first.
    """
    if forest.is_empty:
        raise ValueError("empty forest: no parse")
    draws = sample_derivations(forest, model, n_samples, rng, naive)
    counts: Counter = Counter()
    first: dict = {}
    for d, c, f in draws:
        tree = d.tree()
        counts[tree] += c
        first[tree] = min(f, first.get(tree, f))
    tree = min(counts, key=lambda t: (-counts[t], first[t]))
    p = counts[tree] / n_samples
    se = math.sqrt(p * (1 - p) / n_samples)
    return ParseResult(tree, p, "monte-carlo", n_samples, se)


def parse_distribution(forest: DerivationForest, model: ProbabilityModel,
                       limit: int = 10_000) -> list[tuple[Tree, Number]]:
    """(tree, parse probability) for every parse, in first-derivation order."""
    totals: dict = {}
    for d in enumerate_derivations(forest, limit):
        tree = d.tree()
        totals[tree] = totals.get(tree, _zero(model)) + derivation_probability(d, model)
    return list(totals.items())


def most_probable_parse_exact(forest: DerivationForest, model: ProbabilityModel,
                              limit: int = 10_000) -> ParseResult:
    """Argmax over parse trees of the summed derivation probabilities."""
    if forest.is_empty:
        raise ValueError("empty forest: no parse")
    dist = parse_distribution(forest, model, limit)
    best_tree, best_p = dist[0]
    for tree, p in dist[1:]:
        if p > best_p:
            best_tree, best_p = tree, p
    return ParseResult(best_tree, best_p, "exact")


__all__ = [
    "AdjustedFrequencyModel", "DerivationLimitError", "ParseResult", "RelativeFrequencyModel",
    "UnresolvableFragment", "derivation_probability", "inside_mass", "log_inside_mass",
    "most_probable_derivation", "most_probable_parse_exact", "most_probable_parse_mc",
    "parse_distribution", "parse_probability", "parse_probability_by_enumeration",
    "sample_derivation", "sample_derivations", "viterbi_parse",
]
