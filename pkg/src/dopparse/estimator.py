"""Scikit-learn style front end: ``DOPParser().fit(trees).predict(sentences)``."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .disambig import (AdjustedFrequencyModel, ParseResult, RelativeFrequencyModel,
                       most_probable_parse_exact, most_probable_parse_mc, viterbi_parse)
from .fragments import FragmentBank, build_bank
from .parser import ParseMode, build_forest, classify_positions
from .smoothing import CutoffPolicy, build_adjusted_model
from .validation import check_choice, check_max_depth, check_sentence, check_sentences, check_trees

SELECTORS = ("viterbi", "mc", "exact")


class DOPParser(BaseEstimator):
    """Data-oriented parser over a treebank.

    Parameters
    ----------
    mode : {"dop1", "dop2", "dop3", "dop4"}
        dop1 uses corpus fragments only; dop2 tags unknown words with every
        tag; dop3 lets unknown and noun/verb words mismatch fragment words
        and prices fragments by Good-Turing; dop4 adds dictionary tags.
    max_depth : int or None
        Largest fragment depth kept in the bank (None: unbounded).
    selector : {"viterbi", "mc", "exact"}
        Most probable derivation, Monte Carlo most probable parse, or the
        exact most probable parse by enumeration (small inputs only).
    mc_samples : int
    random_state : int or None
        Seed for Monte Carlo sampling.
    ambiguous_tags : sequence of str or None
        Tag patterns (``NN*``) whose known words may mismatch under dop3.
    lexicon : Lexicon or None
        Required for dop4.
    cutoff_floor : int
        Good-Turing is applied only while ``N_r`` is at least this large.
    pure_good_turing : bool
        Apply the formula at every r (no cutoff).
    vocabulary_size : int or None
        V used to count possible fragment types; defaults to the training
        vocabulary size.
    exact : bool
        Rational arithmetic throughout (slow; for verification).
    start_label : str or None
        Label of the root node; defaults to the most frequent training root.
    seed_weighting : {"one", "uniform"}
        Probability of a dop2 seeded tag: 1, or 1 / number of tags.
    derivation_limit : int
        Enumeration cap for ``selector="exact"``.
    """

    def __init__(self, mode="dop1", max_depth=None, selector="viterbi", mc_samples=1000,
                 random_state=None, ambiguous_tags=None, lexicon=None, cutoff_floor=5,
                 pure_good_turing=False, vocabulary_size=None, exact=False, start_label=None,
                 seed_weighting="one", derivation_limit=10_000):
        self.mode = mode
        self.max_depth = max_depth
        self.selector = selector
        self.mc_samples = mc_samples
        self.random_state = random_state
        self.ambiguous_tags = ambiguous_tags
        self.lexicon = lexicon
        self.cutoff_floor = cutoff_floor
        self.pure_good_turing = pure_good_turing
        self.vocabulary_size = vocabulary_size
        self.exact = exact
        self.start_label = start_label
        self.seed_weighting = seed_weighting
        self.derivation_limit = derivation_limit

    def _validate_params(self):
        mode = ParseMode.coerce(self.mode)
        if mode is ParseMode.DOP4 and self.lexicon is None:
            raise ValueError("mode dop4 requires a lexicon")
        check_choice(self.selector, "selector", SELECTORS)
        check_choice(self.seed_weighting, "seed_weighting", ("one", "uniform"))
        if int(self.mc_samples) < 1:
            raise ValueError("mc_samples must be >= 1")
        return mode, check_max_depth(self.max_depth)

    def fit(self, X, y=None):
        """Build the fragment bank (and Good-Turing tables) from trees ``X``."""
        mode, depth = self._validate_params()
        trees = check_trees(X)
        if not trees:
            raise ValueError("cannot fit on an empty corpus")
        self._fit_bank(mode, build_bank(trees, depth, self.vocabulary_size))
        self.n_trees_ = len(trees)
        return self

    def fit_bank(self, bank: FragmentBank):
        """Use an already built (for instance, loaded) fragment bank."""
        mode, _ = self._validate_params()
        if self.vocabulary_size is not None:
            bank.vocabulary_size = int(self.vocabulary_size)
        self._fit_bank(mode, bank)
        self.n_trees_ = sum(bank.tree_roots.values())
        return self

    def _fit_bank(self, mode, bank):
        self.mode_ = mode
        self.bank_ = bank
        self.start_label_ = self.start_label or self.bank_.start_label
        if mode in (ParseMode.DOP3, ParseMode.DOP4):
            policy = CutoffPolicy(self.cutoff_floor, self.pure_good_turing)
            self.adjusted_ = build_adjusted_model(self.bank_, None, policy, self.exact)
            self.model_ = AdjustedFrequencyModel(self.adjusted_)
        else:
            self.adjusted_ = None
            self.model_ = RelativeFrequencyModel(self.bank_, self.exact, self.seed_weighting)

    def match_policy(self, sentence):
        check_is_fitted(self, "bank_")
        return classify_positions(check_sentence(sentence), self.bank_, self.lexicon,
                                  self.mode_, self.ambiguous_tags)

    def forest(self, sentence):
        """Packed derivation forest of one sentence."""
        check_is_fitted(self, "bank_")
        tokens = check_sentence(sentence)
        policy = classify_positions(tokens, self.bank_, self.lexicon, self.mode_,
                                    self.ambiguous_tags)
        return build_forest(self.bank_, tokens, policy, self.mode_, self.start_label_)

    def parse(self, sentence, rng=None) -> ParseResult:
        """Best analysis of one sentence; ``ParseResult.no_parse`` if none."""
        forest = self.forest(sentence)
        selector = check_choice(self.selector, "selector", SELECTORS)
        method = {"viterbi": "viterbi-derivation", "mc": "monte-carlo", "exact": "exact"}[selector]
        if forest.is_empty:
            return ParseResult.no_parse(method)
        if selector == "viterbi":
            return viterbi_parse(forest, self.model_)
        if selector == "exact":
            return most_probable_parse_exact(forest, self.model_, self.derivation_limit)
        if rng is None:
            rng = np.random.default_rng(self.random_state)
        return most_probable_parse_mc(forest, self.model_, int(self.mc_samples), rng)

    def parse_all(self, X) -> list[ParseResult]:
        check_is_fitted(self, "bank_")
        sentences = check_sentences(X)
        rng = np.random.default_rng(self.random_state)
        return [self.parse(s, rng) for s in sentences]

    def predict(self, X):
        """Parse trees for sentences ``X``; ``None`` where no parse exists."""
        return [r.tree for r in self.parse_all(X)]

    def score(self, X, y):
        """Fraction of sentences whose parse exactly matches the gold tree."""
        gold = check_trees(y, "y")
        pred = self.predict(X)
        if len(pred) != len(gold):
            raise ValueError("X and y differ in length")
        return sum(p is not None and p == g for p, g in zip(pred, gold)) / len(gold)
