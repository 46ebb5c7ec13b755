"""External word -> tag dictionaries mapped onto the corpus tagset."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping

log = logging.getLogger(__name__)

KNOWN = "known"
UNKNOWN = "unknown"
POTENTIAL_UNKNOWN_CATEGORY = "potential-unknown-category"
DICTIONARY_KNOWN = "dictionary-known"


class LexiconError(ValueError):
    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _rows(lines: Iterable[str]):
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise LexiconError(f"expected 'key<TAB>tag[,tag...]', got {line!r}", lineno)
        tags = [t.strip() for t in parts[1].split(",")]
        if any(not t for t in tags):
            raise LexiconError(f"empty tag in {line!r}", lineno)
        yield lineno, parts[0].strip(), tags


def load_tagset_map(lines: Iterable[str]) -> dict[str, frozenset]:
    """``external_tag<TAB>corpus_tag[,corpus_tag...]`` rows."""
    mapping: dict[str, set] = {}
    for _, ext, tags in _rows(lines):
        mapping.setdefault(ext, set()).update(tags)
    return {k: frozenset(v) for k, v in mapping.items()}


@dataclass(frozen=True)
class Lexicon:
    entries: Mapping[str, frozenset]
    tagset_map: Mapping[str, frozenset] | None = None
    lowercase: bool = True
    dropped: int = field(default=0, compare=False)

    def normalize(self, word: str) -> str:
        return word.lower() if self.lowercase else word

    def lookup(self, word: str) -> frozenset | None:
        """Corpus tags for ``word``, or None when the dictionary lacks it."""
        return self.entries.get(self.normalize(word))

    def __contains__(self, word: str) -> bool:
        return self.normalize(word) in self.entries

    def __len__(self):
        return len(self.entries)

    @property
    def tags(self) -> set[str]:
        out: set[str] = set()
        for ts in self.entries.values():
            out.update(ts)
        return out

    def restricted_to(self, tagset: Iterable[str]) -> "Lexicon":
        """Drop tags outside ``tagset`` (e.g. the tags seen in training)."""
        tagset = set(tagset)
        entries = {}
        dropped = self.dropped
        for w, ts in self.entries.items():
            kept = frozenset(t for t in ts if t in tagset)
            if kept:
                entries[w] = kept
            else:
                dropped += 1
        return Lexicon(entries, self.tagset_map, self.lowercase, dropped)

    def serialize(self) -> str:
        """Deterministic JSON form."""
        return json.dumps(
            {
                "lowercase": self.lowercase,
                "entries": {w: sorted(ts) for w, ts in sorted(self.entries.items())},
            },
            ensure_ascii=False,
            sort_keys=True,
        )


def load_lexicon(lines: Iterable[str], tagset_map: Mapping[str, Iterable[str]] | None = None,
                 lowercase: bool = True) -> Lexicon:
    """Read ``word<TAB>tag[,tag...]`` rows (``#`` starts a comment).

    With a ``tagset_map`` every external tag is replaced by its corpus tags;
    unmapped tags vanish and rows left with no tag are dropped and counted.
    """
    tmap = None if tagset_map is None else {k: frozenset(v) for k, v in tagset_map.items()}
    entries: dict[str, set] = {}
    dropped = 0
    for lineno, word, tags in _rows(lines):
        if tmap is None:
            mapped = set(tags)
        else:
            mapped = set()
            for t in tags:
                mapped.update(tmap.get(t, ()))
        if not mapped:
            dropped += 1
            log.warning("line %d: no tag of %r maps onto the corpus tagset", lineno, word)
            continue
        key = word.lower() if lowercase else word
        entries.setdefault(key, set()).update(mapped)
    frozen = {w: frozenset(ts) for w, ts in sorted(entries.items())}
    return Lexicon(frozen, tmap, lowercase, dropped)


def read_lexicon(path: str, map_path: str | None = None, lowercase: bool = True) -> Lexicon:
    tmap = None
    if map_path is not None:
        with open(map_path, encoding="utf-8") as f:
            tmap = load_tagset_map(f)
    with open(path, encoding="utf-8") as f:
        return load_lexicon(f, tmap, lowercase)


def lookup(lexicon: Lexicon, word: str) -> frozenset | None:
    return lexicon.lookup(word)


def word_class(word: str, known_words, word_tags, ambiguous_tags,
               lexicon: Lexicon | None = None) -> str:
    """Classify one input word for the unknown-word machinery."""
    if lexicon is not None and word in lexicon:
        return DICTIONARY_KNOWN
    if word not in known_words:
        return UNKNOWN
    if set(word_tags.get(word, ())) & set(ambiguous_tags):
        return POTENTIAL_UNKNOWN_CATEGORY
    return KNOWN
