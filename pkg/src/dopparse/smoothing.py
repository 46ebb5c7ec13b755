"""Good-Turing adjustment of fragment frequencies, one root class at a time.

For a class with frequency-of-frequencies ``N_r`` the adjusted frequency of a
type seen ``r`` times is ``r* = (r+1) N_{r+1} / N_r``; every unseen type gets
``N_1 / N_0``, where ``N_0`` is the number of possible but unobserved types.
``N_0`` comes from enumerating each unlexicalized template of the class
against a vocabulary of size ``V``.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .fragments import FragmentBank, template_of

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FreqOfFreqs:
    label: str
    table: Mapping[int, int]

    @property
    def N(self) -> int:
        return sum(r * n for r, n in self.table.items())

    @property
    def observed_types(self) -> int:
        return sum(n for r, n in self.table.items() if r >= 1)

    def __getitem__(self, r: int) -> int:
        return self.table.get(r, 0)

    @property
    def max_r(self) -> int:
        return max(self.table, default=0)


def freq_of_freqs(bank: FragmentBank, label: str) -> FreqOfFreqs:
    counts = bank.counts.get(label)
    if not counts:
        raise KeyError(f"no fragments with root {label!r}")
    table = Counter(counts.values())
    return FreqOfFreqs(label, dict(sorted(table.items())))


@dataclass(frozen=True)
class CutoffPolicy:
    """When to stop applying Good-Turing.

    Adjustment runs for r = 1, 2, ... while ``N_{r+1} > 0`` and
    ``N_r >= floor``; from the first r where that fails, raw counts are kept
    and the class is renormalized. ``pure=True`` applies the formula at every
    observed r (used for the conservation identity).
    """

    floor: int = 5
    pure: bool = False

    def first_raw_rank(self, fof: FreqOfFreqs) -> int:
        if self.pure:
            return fof.max_r + 1
        floor = max(self.floor, 1)
        r = 1
        while fof[r] >= floor and fof[r + 1] > 0:
            r += 1
        return r


PURE = CutoffPolicy(pure=True)


def _div(num, den, exact):
    return Fraction(num, den) if exact else num / den


def good_turing_adjust(fof: FreqOfFreqs, r: int, policy: CutoffPolicy | None = None,
                       exact: bool = False):
    """Adjusted frequency r* of a type seen r >= 1 times."""
    if r < 1:
        raise ValueError("use unseen_frequency for r = 0")
    if fof[r] == 0:
        raise ValueError(f"N_{r} = 0 in class {fof.label!r}")
    if policy is not None and r >= policy.first_raw_rank(fof):
        return Fraction(r) if exact else float(r)
    return _div((r + 1) * fof[r + 1], fof[r], exact)


@dataclass(frozen=True)
class PopulationEstimate:
    label: str
    total_types: int
    observed_types: int
    V: int
    n_templates: int = 0

    @property
    def N0(self) -> int:
        return self.total_types - self.observed_types


def unseen_type_count(total_types: int, observed_types: int) -> int:
    """N_0 as an exact integer difference."""
    if observed_types > total_types:
        raise ValueError("more observed types than possible types")
    return int(total_types) - int(observed_types)


def estimate_total_types(bank: FragmentBank, label: str, V: int | None = None
                         ) -> PopulationEstimate:
    """Possible fragment types of a class.

    Each distinct template with k >= 1 word positions can be lexicalized in
    ``V**k`` ways; the templates themselves are added once each. Exact
    integer arithmetic throughout.
    """
    counts = bank.counts.get(label)
    if not counts:
        raise KeyError(f"no fragments with root {label!r}")
    if V is None:
        V = bank.vocabulary_size
    if V < 1:
        raise ValueError("vocabulary size must be >= 1")
    templates: dict = {}
    for frag in counts:
        tmpl, k = template_of(frag)
        templates[tmpl] = k
    lexicalized = sum(V ** k for k in templates.values() if k >= 1)
    total = lexicalized + len(templates)
    return PopulationEstimate(label, total, len(counts), V, len(templates))


def unseen_frequency(fof: FreqOfFreqs, pop: PopulationEstimate | int, exact: bool = False):
    """r*(0) = N_1 / N_0, shared by every unseen type; 0 for a closed class."""
    n0 = pop if isinstance(pop, int) else pop.N0
    if n0 < 0:
        raise ValueError("N_0 must be nonnegative")
    if n0 == 0 or fof[1] == 0:
        return Fraction(0) if exact else 0.0
    return _div(fof[1], n0, exact)


@dataclass
class ClassModel:
    """Adjusted frequencies of one root class and their normalizer."""

    label: str
    fof: FreqOfFreqs
    population: PopulationEstimate
    adjusted: dict
    unseen: object
    normalizer: object
    exact: bool = False

    @property
    def unseen_mass(self):
        """N_0 * r*(0), which is N_1 whenever N_0 > 0 (kept exact: N_0 can be huge)."""
        if self.population.N0 == 0 or self.fof[1] == 0:
            return Fraction(0) if self.exact else 0.0
        return Fraction(self.fof[1]) if self.exact else float(self.fof[1])

    def seen_probability(self, r: int):
        return self.adjusted[r] / self.normalizer

    @property
    def unseen_probability(self):
        return self.unseen / self.normalizer

    def raw_mass(self):
        """Sum of adjusted frequencies over seen and unseen types."""
        return sum(self.fof[r] * a for r, a in self.adjusted.items()) + self.unseen_mass

    def total_mass(self):
        """Sum of probabilities over seen types plus all N_0 unseen types."""
        return self.raw_mass() / self.normalizer


def build_class_model(fof: FreqOfFreqs, population: PopulationEstimate,
                      policy: CutoffPolicy = CutoffPolicy(), exact: bool = False) -> ClassModel:
    adjusted = {r: good_turing_adjust(fof, r, policy, exact) for r in fof.table if r >= 1}
    unseen = unseen_frequency(fof, population, exact)
    model = ClassModel(fof.label, fof, population, adjusted, unseen, None, exact)
    mass = model.raw_mass()
    if mass == 0:
        # the pure formula zeroes a class whose only rank has no successor
        log.warning("class %r has zero adjusted mass; using raw counts", fof.label)
        model.adjusted = {r: (Fraction(r) if exact else float(r)) for r in adjusted}
        mass = model.raw_mass()
    model.normalizer = mass
    return model


@dataclass
class AdjustedModel:
    """Per-root-class Good-Turing tables over a fragment bank."""

    bank: FragmentBank
    classes: dict[str, ClassModel] = field(default_factory=dict)
    policy: CutoffPolicy = CutoffPolicy()
    exact: bool = False

    @property
    def V(self) -> int:
        return self.bank.vocabulary_size

    def __getitem__(self, label: str) -> ClassModel:
        return self.classes[label]

    def probability(self, fragment):
        """Adjusted substitution probability; unseen fragments share r*(0)."""
        cls = self.classes.get(fragment[0])
        if cls is None:
            return Fraction(0) if self.exact else 0.0
        r = self.bank.count(fragment)
        if r:
            return cls.seen_probability(r)
        return cls.unseen_probability

    def unseen_probability(self, label: str):
        cls = self.classes.get(label)
        if cls is None:
            return Fraction(0) if self.exact else 0.0
        return cls.unseen_probability


def build_adjusted_model(bank: FragmentBank, V: int | None = None,
                         policy: CutoffPolicy = CutoffPolicy(),
                         exact: bool = False) -> AdjustedModel:
    """Good-Turing model for every root class of ``bank``."""
    if not bank.counts:
        raise ValueError("empty fragment bank")
    if V is None:
        V = bank.vocabulary_size
    classes = {}
    for label in bank.counts:
        fof = freq_of_freqs(bank, label)
        pop = estimate_total_types(bank, label, V)
        classes[label] = build_class_model(fof, pop, policy, exact)
    return AdjustedModel(bank, classes, policy, exact)


def gt_table_rows(fof: FreqOfFreqs, N0: int, policy: CutoffPolicy | None = None,
                  max_r: int | None = None, exact: bool = False) -> list[dict]:
    """Rows (r, N_r, r*) starting with the unseen row, as in a GT report."""
    rows = [{"r": 0, "N_r": N0, "r_star": unseen_frequency(fof, N0, exact)}]
    top = fof.max_r if max_r is None else max_r
    for r in range(1, top + 1):
        if fof[r] == 0:
            continue
        rows.append({"r": r, "N_r": fof[r], "r_star": good_turing_adjust(fof, r, policy, exact)})
    return rows


def format_gt_table(label: str, rows: list[dict], N: int | None = None,
                    conservation=None) -> str:
    lines = [f"class {label}", f"{'r':>4} {'N_r':>14} {'r*':>12}"]
    for row in rows:
        r_star = float(row["r_star"])
        shown = f"{r_star:.6f}" if row["r"] == 0 else f"{r_star:.2f}"
        lines.append(f"{row['r']:>4} {row['N_r']:>14} {shown:>12}")
    if N is not None:
        lines.append(f"N = {N}")
    if conservation is not None:
        lines.append(f"conservation (pure Good-Turing): sum N_r*r* + N_0*r*(0) = {conservation}")
    return "\n".join(lines)


def conservation_total(fof: FreqOfFreqs, N0: int):
    """Exact ``sum_{r>=1} N_r r*(r) + N_0 r*(0)`` under the pure formula."""
    total = sum(fof[r] * good_turing_adjust(fof, r, None, exact=True)
                for r in fof.table if r >= 1)
    return total + N0 * unseen_frequency(fof, N0, exact=True)

