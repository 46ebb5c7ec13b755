"""Data-oriented parsing: fragment banks, packed derivation forests,
Good-Turing smoothing for unknown words, and treebank evaluation."""
from .disambig import (AdjustedFrequencyModel, ParseResult, RelativeFrequencyModel,
                       derivation_probability, inside_mass, most_probable_derivation,
                       most_probable_parse_exact, most_probable_parse_mc, parse_distribution,
                       parse_probability, parse_probability_by_enumeration, sample_derivation,
                       sample_derivations)
from .estimator import DOPParser
from .evaluation import (BracketPolicy, EvalReport, ExperimentConfig, crosses, depth_sweep,
                         exact_match, extract_brackets, run_experiment, score_set)
from .fragments import (Fragment, FragmentBank, build_bank, compose, count_fragments,
                        extract_fragments, substitute, substitution_probability)
from .lexicon import Lexicon, load_lexicon, read_lexicon
from .parser import (DerivationForest, MatchPolicy, ParseMode, build_forest, classify_positions,
                     enumerate_derivations)
from .smoothing import (CutoffPolicy, FreqOfFreqs, build_adjusted_model, conservation_total,
                        estimate_total_types, freq_of_freqs, good_turing_adjust,
                        unseen_frequency, unseen_type_count)
from .treebank import (Corpus, SplitSpec, Tree, TreebankError, parse_bracketed, parse_corpus,
                       random_split, strip_to_pos, to_bracketed)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
