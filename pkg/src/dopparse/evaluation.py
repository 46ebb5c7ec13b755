"""Parse, sentence and bracketing accuracy, and the random-split protocol.

* parse accuracy: share of test sentences whose parse equals the gold tree
* sentence accuracy: share of test sentences whose parse has no bracket
  crossing a gold bracket
* bracketing accuracy: share of proposed brackets crossing no gold bracket

A sentence without a parse counts as wrong for the first two and adds no
brackets to the third.
"""
from __future__ import annotations

import json
import statistics
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .treebank import Corpus, SplitSpec, Tree, random_split

METRICS = ("parse_accuracy", "sentence_accuracy", "bracketing_accuracy")
METRIC_NAMES = {
    "parse_accuracy": "Parse accuracy",
    "sentence_accuracy": "Sentence accuracy",
    "bracketing_accuracy": "Bracketing accuracy",
}


@dataclass(frozen=True)
class BracketPolicy:
    drop_unit: bool = True
    include_root: bool = True
    labeled: bool = False


def extract_brackets(tree: Tree, policy: BracketPolicy = BracketPolicy()) -> frozenset:
    """Constituent spans ``(start, end)`` (or ``(label, start, end)``)."""
    out = set()
    n = len(tree.leaves())

    def walk(node, i):
        if node.is_leaf:
            return i + 1
        j = i
        for c in node.children:
            j = walk(c, j)
        if node.tag_leaf:
            j = i + 1
        if policy.drop_unit and j - i < 2:
            return j
        if not policy.include_root and node is tree:
            return j
        out.add((node.label, i, j) if policy.labeled else (i, j))
        return j

    if tree.tag_leaf:
        return frozenset()
    walk(tree, 0)
    assert all(0 <= b[-2] < b[-1] <= n for b in out)
    return frozenset(out)


def crosses(a, b) -> bool:
    """True iff spans overlap without one containing the other."""
    a0, a1 = a[-2], a[-1]
    b0, b1 = b[-2], b[-1]
    return a0 < b0 < a1 < b1 or b0 < a0 < b1 < a1


def exact_match(candidate: Tree, gold: Tree) -> bool:
    if len(candidate.leaves()) != len(gold.leaves()):
        raise ValueError("candidate and gold differ in yield length")
    return candidate == gold


@dataclass
class SentenceOutcome:
    index: int
    parsed: bool
    exact: bool
    brackets: int
    crossing: int
    category: str = "all"


@dataclass
class SetScore:
    parse_accuracy: float
    sentence_accuracy: float
    bracketing_accuracy: float
    n_sentences: int
    n_no_parse: int
    n_brackets: int
    n_crossing: int
    bracketing_undefined: bool = False
    outcomes: list = field(default_factory=list, repr=False)

    def metric(self, name: str) -> float:
        return getattr(self, name)


def _pct(num, den) -> float:
    return 100.0 * num / den if den else 0.0


def score_set(candidates: Sequence[Tree | None], golds: Sequence[Tree], no_parse_flags=None,
              policy: BracketPolicy = BracketPolicy(), categories=None) -> SetScore:
    """Score aligned candidate/gold lists; ``None`` candidates are no-parses."""
    if len(candidates) != len(golds):
        raise ValueError("candidates and golds differ in length")
    if no_parse_flags is None:
        no_parse_flags = [c is None for c in candidates]
    if len(no_parse_flags) != len(golds):
        raise ValueError("no_parse_flags has the wrong length")
    outcomes = []
    n_brackets = n_crossing = 0
    for i, (cand, gold, failed) in enumerate(zip(candidates, golds, no_parse_flags)):
        cat = categories[i] if categories is not None else "all"
        if failed or cand is None:
            outcomes.append(SentenceOutcome(i, False, False, 0, 0, cat))
            continue
        exact = exact_match(cand, gold)
        gold_b = extract_brackets(gold, policy)
        cand_b = extract_brackets(cand, policy)
        crossing = sum(1 for b in cand_b if any(crosses(b, g) for g in gold_b))
        n_brackets += len(cand_b)
        n_crossing += crossing
        outcomes.append(SentenceOutcome(i, True, exact, len(cand_b), crossing, cat))
    n = len(golds)
    return SetScore(
        parse_accuracy=_pct(sum(o.exact for o in outcomes), n),
        sentence_accuracy=_pct(sum(o.parsed and o.crossing == 0 for o in outcomes), n),
        bracketing_accuracy=_pct(n_brackets - n_crossing, n_brackets),
        n_sentences=n,
        n_no_parse=sum(not o.parsed for o in outcomes),
        n_brackets=n_brackets,
        n_crossing=n_crossing,
        bracketing_undefined=n_brackets == 0,
        outcomes=outcomes,
    )


# -- experiment protocol -----------------------------------------------------

@dataclass
class ExperimentConfig:
    """Knobs of a repeated random-split experiment."""

    n_train: int
    n_test: int
    n_splits: int = 1
    seed: int = 0
    max_depth: int | None = None
    mode: str = "dop1"
    selector: str = "viterbi"
    mc_samples: int = 1000
    ambiguous_tags: Sequence[str] | None = None
    lexicon: object = None
    pos_strings: bool = False
    exact: bool = False
    cutoff_floor: int = 5
    pure_good_turing: bool = False
    vocabulary: str | int = "domain"
    start_label: str | None = None
    seed_weighting: str = "one"
    derivation_limit: int = 10_000
    bracket_policy: BracketPolicy = BracketPolicy()

    def split_seeds(self) -> list[int]:
        """One independent 63-bit seed per split, derived from ``seed``."""
        ss = np.random.SeedSequence(self.seed)
        return [int(s) >> 1 for s in ss.generate_state(self.n_splits, dtype=np.uint64)]


@dataclass
class EvalReport:
    config: dict
    splits: list
    categories: dict
    no_parse: list

    def values(self, metric: str) -> list[float]:
        return [s[metric] for s in self.splits]

    def mean(self, metric: str) -> float:
        return statistics.fmean(self.values(metric))

    def stdev(self, metric: str) -> float:
        vals = self.values(metric)
        return statistics.stdev(vals) if len(vals) > 1 else 0.0

    def to_text(self) -> str:
        lines = []
        cfg = self.config
        depth = "unbounded" if cfg["max_depth"] is None else f"<={cfg['max_depth']}"
        lines.append(f"mode {cfg['mode']}  depth {depth}  splits {len(self.splits)}  "
                     f"train {cfg['n_train']}  test {cfg['n_test']}  seed {cfg['seed']}")
        lines.append("")
        lines.append(f"{'split':<8}" + "".join(f"{METRIC_NAMES[m]:>22}" for m in METRICS)
                     + f"{'no parse':>10}")
        for s in self.splits:
            lines.append(f"{s['split']:<8}" + "".join(f"{s[m]:>21.1f}%" for m in METRICS)
                         + f"{s['no_parse']:>10}")
        lines.append("")
        lines.append(f"{'Accuracy metric':<22}{'Mean':>10}{'StdDev':>10}")
        for m in METRICS:
            lines.append(f"{METRIC_NAMES[m]:<22}{self.mean(m):>9.1f}%{self.stdev(m):>9.1f}%")
        lines.append("")
        lines.append(f"{'test sentences':<36}{'parse accuracy':>16}{'n':>6}")
        for cat, row in self.categories.items():
            lines.append(f"{cat:<36}{row['parse_accuracy']:>15.1f}%{row['n']:>6}")
        return "\n".join(lines) + "\n"

    def records(self) -> list[dict]:
        out = []
        for s in self.splits:
            for m in METRICS:
                out.append({"metric": m, "split": s["split"], "value": s[m]})
        for m in METRICS:
            out.append({"metric": m, "split": "mean", "value": self.mean(m)})
            out.append({"metric": m, "split": "stdev", "value": self.stdev(m)})
        for cat, row in self.categories.items():
            out.append({"metric": "parse_accuracy", "split": f"category:{cat}",
                        "value": row["parse_accuracy"], "n": row["n"]})
        return out

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records())


UNKNOWN_WORDS = "with unknown words"
UNKNOWN_CATEGORY = "with only unknown-category words"
KNOWN_ONLY = "with only known words"
ALL = "all test sentences"


def sentence_category(gold: Tree, word_tags: dict) -> str:
    """Which of the three sentence classes ``gold`` falls in, given training tags."""
    pairs = gold.preterminals()
    words = gold.leaves()
    if any(w not in word_tags for w in words):
        return UNKNOWN_WORDS
    if any(tag not in word_tags[w] for tag, w in pairs):
        return UNKNOWN_CATEGORY
    return KNOWN_ONLY


def run_experiment(corpus: Corpus, config: ExperimentConfig, progress=None) -> EvalReport:
    """Train/test over ``n_splits`` random divisions of ``corpus``."""
    from .estimator import DOPParser  # cyclic at import time otherwise

    if config.n_train + config.n_test > len(corpus):
        raise ValueError(f"corpus of {len(corpus)} trees is too small for "
                         f"{config.n_train}+{config.n_test}")
    if config.mode == "dop4" and config.lexicon is None:
        raise ValueError("mode dop4 requires a lexicon")
    if config.pos_strings:
        corpus = corpus.stripped()
    if config.vocabulary == "domain":
        V = len(set().union(*(t.leaves() for t in corpus)))
    elif config.vocabulary == "train":
        V = None
    else:
        V = int(config.vocabulary)
    splits = []
    per_cat = {name: [0, 0] for name in (UNKNOWN_WORDS, UNKNOWN_CATEGORY, KNOWN_ONLY, ALL)}
    no_parse = []
    for s, seed in enumerate(config.split_seeds()):
        train, test = random_split(corpus, SplitSpec(config.n_train, config.n_test, seed))
        parser = DOPParser(
            mode=config.mode, max_depth=config.max_depth, selector=config.selector,
            mc_samples=config.mc_samples, random_state=seed,
            ambiguous_tags=config.ambiguous_tags, lexicon=config.lexicon,
            cutoff_floor=config.cutoff_floor, pure_good_turing=config.pure_good_turing,
            vocabulary_size=V, exact=config.exact, start_label=config.start_label,
            seed_weighting=config.seed_weighting, derivation_limit=config.derivation_limit,
        ).fit(train.trees)
        word_tags = {}
        for tree in train:
            for tag, word in tree.preterminals():
                word_tags.setdefault(word, set()).add(tag)
            for word in tree.leaves():
                word_tags.setdefault(word, set())
        golds = list(test.trees)
        results = parser.parse_all([g.leaves() for g in golds])
        cats = [sentence_category(g, word_tags) for g in golds]
        score = score_set([r.tree for r in results], golds, policy=config.bracket_policy,
                          categories=cats)
        splits.append({
            "split": s,
            "seed": seed,
            **{m: score.metric(m) for m in METRICS},
            "no_parse": score.n_no_parse,
            "brackets": score.n_brackets,
        })
        for o in score.outcomes:
            for cat in (o.category, ALL):
                per_cat[cat][0] += o.exact
                per_cat[cat][1] += 1
            if not o.parsed:
                no_parse.append({"split": s, "index": o.index})
        if progress is not None:
            progress(s, score)
    categories = {
        cat: {"parse_accuracy": _pct(hit, n), "n": n} for cat, (hit, n) in per_cat.items()
    }
    cfg = asdict(config)
    cfg["lexicon"] = None if config.lexicon is None else len(config.lexicon)
    cfg["ambiguous_tags"] = None if config.ambiguous_tags is None else list(config.ambiguous_tags)
    return EvalReport(cfg, splits, categories, no_parse)


def depth_sweep(corpus: Corpus, config: ExperimentConfig, depths) -> list[tuple[object, EvalReport]]:
    """Re-run the experiment with each fragment depth cap (None = unbounded)."""
    from dataclasses import replace

    return [(d, run_experiment(corpus, replace(config, max_depth=d))) for d in depths]


def format_depth_table(rows) -> str:
    lines = [f"{'depth of subtrees':<20}{'parse accuracy':>16}"]
    for d, report in rows:
        label = "unbounded" if d is None else ("1" if d == 1 else f"<={d}")
        lines.append(f"{label:<20}{report.mean('parse_accuracy'):>15.1f}%")
    return "\n".join(lines) + "\n"
