"""Command-line front end: ``dop {extract,parse,gt-table,experiment}``.

Settings are resolved as built-in defaults < JSON config file (``--config``
or ``$DOP_CONFIG``) < command-line flags. Every command that writes files
also writes the resolved configuration beside them.

Exit codes: 0 success, 1 no parse, 2 usage or configuration error,
3 input/output error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from .estimator import SELECTORS, DOPParser
from .evaluation import BracketPolicy, ExperimentConfig, format_depth_table, run_experiment
from .fragments import FragmentBank, build_bank
from .lexicon import LexiconError, read_lexicon
from .parser import ParseMode
from .smoothing import (CutoffPolicy, FreqOfFreqs, conservation_total, estimate_total_types,
                        format_gt_table, freq_of_freqs, gt_table_rows)
from .treebank import Corpus, TreebankError
from .validation import check_max_depth

log = logging.getLogger("dopparse")

EXIT_OK, EXIT_NO_PARSE, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
CONFIG_ENV = "DOP_CONFIG"

DEFAULTS = {
    "corpus": [],
    "ignore": [],
    "pos_strings": False,
    "bank": None,
    "max_depth": "unbounded",
    "mode": "dop1",
    "selector": "viterbi",
    "ambiguous_tags": None,
    "lexicon": None,
    "tagset_map": None,
    "mc_samples": 1000,
    "seed": None,
    "n_train": None,
    "n_test": None,
    "n_splits": 1,
    "depths": None,
    "numeric": "double",
    "cutoff_floor": 5,
    "pure_good_turing": False,
    "vocabulary": "domain",
    "start_label": None,
    "seed_weighting": "one",
    "bracket_drop_unit": True,
    "bracket_include_root": True,
    "bracket_labeled": False,
    "output": None,
    "out_dir": None,
    "label": None,
    "histogram": None,
}


class ConfigError(Exception):
    pass


# -- configuration -----------------------------------------------------------

def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _add_common(p: argparse.ArgumentParser) -> None:
    # default=None everywhere so that unset flags do not override the config
    p.add_argument("--config", help="JSON config file (default: $DOP_CONFIG)")
    p.add_argument("--corpus", nargs="+", help="bracketed treebank file(s)")
    p.add_argument("--ignore", nargs="+", help="labels to delete on reading (e.g. -NONE-)")
    p.add_argument("--pos-strings", type=_bool, metavar="BOOL",
                   help="replace words by their part-of-speech tags")
    p.add_argument("--max-depth", help="fragment depth cap, or 'unbounded'")
    p.add_argument("--mode", choices=[m.value for m in ParseMode])
    p.add_argument("--ambiguous-tags", nargs="+", metavar="PATTERN")
    p.add_argument("--lexicon", help="dictionary file (word<TAB>tags)")
    p.add_argument("--tagset-map", help="dictionary-tag to corpus-tag map")
    p.add_argument("--numeric", choices=["double", "rational"])
    p.add_argument("--cutoff-floor", type=int)
    p.add_argument("--pure-good-turing", type=_bool, metavar="BOOL")
    p.add_argument("--vocabulary", help="'domain', 'train' or an integer V")
    p.add_argument("--start-label")
    p.add_argument("--seed-weighting", choices=["one", "uniform"])
    p.add_argument("--seed", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dop", description="Data-oriented parsing toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="build and save a fragment bank")
    _add_common(p)
    p.add_argument("--output", "-o", help="bank file to write")

    p = sub.add_parser("parse", help="parse sentences")
    _add_common(p)
    p.add_argument("--bank", help="load this bank instead of reading a corpus")
    p.add_argument("--selector", choices=SELECTORS)
    p.add_argument("--mc-samples", type=int)
    p.add_argument("--output", "-o", help="write JSON-lines results here")
    p.add_argument("--sentence", "-s", action="append", dest="sentences",
                   help="sentence to parse; repeatable (default: one per line on stdin)")

    p = sub.add_parser("gt-table", help="Good-Turing table of a root class")
    _add_common(p)
    p.add_argument("--bank")
    p.add_argument("--label", help="root label of the class")
    p.add_argument("--histogram",
                   help='JSON {"N_r": {"1": n1, ...}, "N0": n0} instead of a bank')
    p.add_argument("--output", "-o")

    p = sub.add_parser("experiment", help="repeated random-split evaluation")
    _add_common(p)
    p.add_argument("--selector", choices=SELECTORS)
    p.add_argument("--mc-samples", type=int)
    p.add_argument("--n-train", type=int)
    p.add_argument("--n-test", type=int)
    p.add_argument("--n-splits", type=int)
    p.add_argument("--depths", nargs="+", help="run a depth sweep over these caps")
    p.add_argument("--bracket-drop-unit", type=_bool, metavar="BOOL")
    p.add_argument("--bracket-include-root", type=_bool, metavar="BOOL")
    p.add_argument("--bracket-labeled", type=_bool, metavar="BOOL")
    p.add_argument("--out-dir", help="directory for report.txt, report.jsonl, config.json")
    return ap


def resolve_config(args: argparse.Namespace, environ=os.environ) -> dict:
    cfg = dict(DEFAULTS)
    path = args.config or environ.get(CONFIG_ENV)
    if path:
        try:
            with open(path, encoding="utf-8") as f:
                loaded = json.load(f)
        except FileNotFoundError as err:
            raise ConfigError(f"config file not found: {path}") from err
        except json.JSONDecodeError as err:
            raise ConfigError(f"config file {path}: {err}") from err
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(loaded) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(loaded)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None and value != []:
            cfg[key] = value
    if isinstance(cfg["corpus"], str):
        cfg["corpus"] = [cfg["corpus"]]
    _validate_config(cfg, args.command)
    return cfg


def _validate_config(cfg: dict, command: str) -> None:
    try:
        cfg["max_depth"] = check_max_depth(cfg["max_depth"])
        cfg["mode"] = ParseMode.coerce(cfg["mode"]).value
    except ValueError as err:
        raise ConfigError(str(err)) from err
    if cfg["selector"] not in SELECTORS:
        raise ConfigError(f"selector must be one of {SELECTORS}")
    if cfg["numeric"] not in ("double", "rational"):
        raise ConfigError("numeric must be 'double' or 'rational'")
    if cfg["vocabulary"] not in ("domain", "train"):
        try:
            cfg["vocabulary"] = int(cfg["vocabulary"])
        except (TypeError, ValueError) as err:
            raise ConfigError("vocabulary must be 'domain', 'train' or an integer") from err
    if cfg["mode"] == "dop4" and command in ("parse", "experiment") and not cfg["lexicon"]:
        raise ConfigError("mode dop4 requires a lexicon")
    if command == "gt-table":
        if not cfg["histogram"] and not cfg["bank"] and not cfg["corpus"]:
            raise ConfigError("gt-table needs --histogram, --bank or --corpus")
        if not cfg["histogram"] and not cfg["label"]:
            raise ConfigError("gt-table needs --label")
    elif command == "parse":
        if not cfg["bank"] and not cfg["corpus"]:
            raise ConfigError("parse needs --bank or --corpus")
    elif not cfg["corpus"]:
        raise ConfigError(f"{command} needs --corpus")
    if command == "extract" and not cfg["output"]:
        raise ConfigError("extract needs --output")
    if command == "experiment":
        for key in ("n_train", "n_test"):
            if not isinstance(cfg[key], int) or cfg[key] < 1:
                raise ConfigError(f"{key} must be a positive integer")
        if cfg["n_splits"] < 1:
            raise ConfigError("n_splits must be >= 1")
        if cfg["seed"] is None:
            raise ConfigError("experiment needs a seed")
    if command == "parse" and cfg["selector"] == "mc" and cfg["seed"] is None:
        raise ConfigError("Monte Carlo parsing needs a seed")
    # input files must exist before any work starts
    for key in ("corpus", "bank", "lexicon", "tagset_map", "histogram"):
        paths = cfg[key] if isinstance(cfg[key], list) else [cfg[key]]
        for p in paths:
            if p and not Path(p).is_file():
                raise ConfigError(f"{key} file not found: {p}")


def write_resolved(cfg: dict, path: Path) -> None:
    path.write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- helpers -------------------------------------------------------------------

def _load_corpus(cfg: dict) -> Corpus:
    corpus = Corpus.from_files(cfg["corpus"], ignore=cfg["ignore"])
    if not len(corpus):
        raise ConfigError("corpus is empty")
    return corpus.stripped() if cfg["pos_strings"] else corpus


def _load_lexicon(cfg: dict):
    if not cfg["lexicon"]:
        return None
    return read_lexicon(cfg["lexicon"], cfg["tagset_map"])


def _vocabulary_size(cfg: dict):
    # "domain" and "train" both mean the words of the corpus at hand here
    return cfg["vocabulary"] if isinstance(cfg["vocabulary"], int) else None


def _make_parser(cfg: dict, lexicon) -> DOPParser:
    return DOPParser(
        mode=cfg["mode"], max_depth=cfg["max_depth"], selector=cfg["selector"],
        mc_samples=cfg["mc_samples"], random_state=cfg["seed"],
        ambiguous_tags=cfg["ambiguous_tags"], lexicon=lexicon,
        cutoff_floor=cfg["cutoff_floor"], pure_good_turing=cfg["pure_good_turing"],
        vocabulary_size=_vocabulary_size(cfg), exact=cfg["numeric"] == "rational",
        start_label=cfg["start_label"], seed_weighting=cfg["seed_weighting"],
    )


def _read_bank(path: str) -> FragmentBank:
    with open(path, encoding="utf-8") as f:
        try:
            return FragmentBank.load(f)
        except (ValueError, KeyError) as err:
            raise ConfigError(f"{path}: {err}") from err


# -- commands ------------------------------------------------------------------

def cmd_extract(cfg: dict, out) -> int:
    corpus = _load_corpus(cfg)
    bank = build_bank(corpus, cfg["max_depth"], _vocabulary_size(cfg))
    path = Path(cfg["output"])
    with open(path, "w", encoding="utf-8") as f:
        bank.dump(f)
    write_resolved(cfg, path.with_name(path.name + ".config.json"))
    out.write(f"classes {len(bank.counts)}  types {len(bank)}  "
              f"tokens {bank.total_tokens}  V {bank.vocabulary_size}\n")
    for label, total in bank.class_totals.items():
        out.write(f"  {label}\t{len(bank.counts[label])} types\t{total} tokens\n")
    return EXIT_OK


def _sentences(cfg_sentences, stdin):
    if cfg_sentences:
        return list(cfg_sentences)
    return [line.strip() for line in stdin if line.strip()]


def cmd_parse(cfg: dict, sentences, out, stdin=None) -> int:
    parser = _make_parser(cfg, _load_lexicon(cfg))
    if cfg["bank"]:
        parser.fit_bank(_read_bank(cfg["bank"]))
    else:
        parser.fit(_load_corpus(cfg).trees)
    sentences = _sentences(sentences, stdin or sys.stdin)
    if not sentences:
        raise ConfigError("no sentences to parse")
    results = parser.parse_all(sentences)
    records = []
    for sent, res in zip(sentences, results):
        rec = {"sentence": sent, **res.to_record()}
        if not res.is_parse:
            rec["status"] = "no-parse"
        records.append(rec)
        out.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
    if cfg["output"]:
        path = Path(cfg["output"])
        path.write_text("".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n"
                                for r in records), encoding="utf-8")
        write_resolved(cfg, path.with_name(path.name + ".config.json"))
    return EXIT_OK if all(r.is_parse for r in results) else EXIT_NO_PARSE


def _histogram_fixture(path: str) -> tuple[FreqOfFreqs, int]:
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    try:
        table = {int(r): int(n) for r, n in data["N_r"].items()}
        n0 = int(data["N0"])
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"{path}: histogram needs integer 'N_r' and 'N0'") from err
    if not any(table.values()):
        raise ConfigError(f"{path}: empty class")
    return FreqOfFreqs(data.get("label", "X"), dict(sorted(table.items()))), n0


def cmd_gt_table(cfg: dict, out) -> int:
    policy = CutoffPolicy(cfg["cutoff_floor"], cfg["pure_good_turing"])
    exact = cfg["numeric"] == "rational"
    if cfg["histogram"]:
        fof, n0 = _histogram_fixture(cfg["histogram"])
        label = cfg["label"] or fof.label
    else:
        if cfg["bank"]:
            bank = _read_bank(cfg["bank"])
            if isinstance(cfg["vocabulary"], int):
                bank.vocabulary_size = cfg["vocabulary"]
        else:
            corpus = _load_corpus(cfg)
            bank = build_bank(corpus, cfg["max_depth"], _vocabulary_size(cfg))
        label = cfg["label"]
        try:
            fof = freq_of_freqs(bank, label)
        except KeyError as err:
            raise ConfigError(f"unknown or empty class {label!r}") from err
        n0 = estimate_total_types(bank, label).N0
    rows = gt_table_rows(fof, n0, None if policy.pure else policy, None, exact)
    cons = conservation_total(fof, n0)
    text = format_gt_table(label, rows, fof.N, _fmt_exact(cons)) + "\n"
    out.write(text)
    if cfg["output"]:
        path = Path(cfg["output"])
        path.write_text(text, encoding="utf-8")
        write_resolved(cfg, path.with_name(path.name + ".config.json"))
    return EXIT_OK


def _fmt_exact(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x} ({float(x):.6g})"


def experiment_config(cfg: dict, lexicon) -> ExperimentConfig:
    return ExperimentConfig(
        n_train=cfg["n_train"], n_test=cfg["n_test"], n_splits=cfg["n_splits"],
        seed=cfg["seed"], max_depth=cfg["max_depth"], mode=cfg["mode"],
        selector=cfg["selector"], mc_samples=cfg["mc_samples"],
        ambiguous_tags=cfg["ambiguous_tags"], lexicon=lexicon,
        pos_strings=False,  # applied while loading
        exact=cfg["numeric"] == "rational", cutoff_floor=cfg["cutoff_floor"],
        pure_good_turing=cfg["pure_good_turing"], vocabulary=cfg["vocabulary"],
        start_label=cfg["start_label"], seed_weighting=cfg["seed_weighting"],
        bracket_policy=BracketPolicy(cfg["bracket_drop_unit"], cfg["bracket_include_root"],
                                     cfg["bracket_labeled"]),
    )


def cmd_experiment(cfg: dict, out) -> int:
    lexicon = _load_lexicon(cfg)
    corpus = _load_corpus(cfg)
    if cfg["n_train"] + cfg["n_test"] > len(corpus):
        raise ConfigError(f"corpus of {len(corpus)} trees is too small for "
                          f"{cfg['n_train']}+{cfg['n_test']}")
    base = experiment_config(cfg, lexicon)
    out_dir = Path(cfg["out_dir"]) if cfg["out_dir"] else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_resolved(cfg, out_dir / "config.json")
    if cfg["depths"]:
        from dataclasses import replace

        rows = []
        jsonl = []
        for d in cfg["depths"]:
            depth = check_max_depth(d)
            report = run_experiment(corpus, replace(base, max_depth=depth))
            rows.append((depth, report))
            for rec in report.records():
                jsonl.append(json.dumps({"max_depth": depth, **rec}, sort_keys=True) + "\n")
        text = format_depth_table(rows)
        records = "".join(jsonl)
    else:
        report = run_experiment(corpus, base)
        text = report.to_text()
        records = report.to_jsonl()
    out.write(text)
    if out_dir is not None:
        (out_dir / "report.txt").write_text(text, encoding="utf-8")
        (out_dir / "report.jsonl").write_text(records, encoding="utf-8")
    return EXIT_OK


def main(argv=None, out=None, environ=None) -> int:
    out = sys.stdout if out is None else out
    environ = os.environ if environ is None else environ
    ap = build_arg_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with 2
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args, environ)
        if args.command == "extract":
            return cmd_extract(cfg, out)
        if args.command == "parse":
            return cmd_parse(cfg, args.sentences, out)
        if args.command == "gt-table":
            return cmd_gt_table(cfg, out)
        return cmd_experiment(cfg, out)
    except ConfigError as err:
        print(f"dop: error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (TreebankError, LexiconError) as err:
        print(f"dop: input error: {err}", file=sys.stderr)
        return EXIT_IO
    except OSError as err:
        print(f"dop: i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    except ValueError as err:
        print(f"dop: error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
