"""Tokenization and text-intrinsic feature extractors.

All extractors are pure functions of (tokenized document, lexical resources):
no global state, no caches, bit-identical outputs for identical inputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Mapping

from .errors import ResourceError, TextualError

# Tags the ratio features count. The lexicon may carry any other tag
# (det, pron, prep, ...); those fall outside the four ratios.
TAG_NOUN = "noun"
TAG_ADJ = "adj"
TAG_ADV = "adv"
TAG_VERB = "verb"

_PARAGRAPH_SEP = re.compile(r"\n[ \t\r]*\n\s*")
_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")
# Word tokens are alphanumeric runs; punctuation tokens are runs of anything
# that is neither whitespace nor alphanumeric. Underscores count as punctuation.
_TOKEN = re.compile(r"[^\W_]+|[^\w\s]+|_+")
_WORD = re.compile(r"[^\W_]+$")

THIRD_PERSON_PRONOUNS = frozenset(
    "he she it they him her them his hers its their theirs "
    "himself herself itself themselves".split()
)

_VOWEL_GROUP = re.compile(r"[aeiouy]+")


@dataclass(frozen=True)
class Token:
    surface: str
    offset: int
    is_word: bool

    def folded(self) -> str:
        return self.surface.casefold()


@dataclass(frozen=True)
class TokenizedDoc:
    """Paragraphs of sentences of tokens, with offsets into the source text."""

    text: str
    paragraphs: tuple[tuple[tuple[Token, ...], ...], ...]

    @cached_property
    def sentences(self) -> tuple[tuple[Token, ...], ...]:
        return tuple(s for p in self.paragraphs for s in p)

    @cached_property
    def tokens(self) -> tuple[Token, ...]:
        return tuple(t for s in self.sentences for t in s)

    @cached_property
    def word_tokens(self) -> tuple[Token, ...]:
        return tuple(t for t in self.tokens if t.is_word)


@lru_cache(maxsize=512)
def tokenize(text: str) -> TokenizedDoc:
    """Split text into paragraphs (blank lines), sentences (terminal
    punctuation followed by whitespace), and word/punctuation tokens.

    Pure function of the text; results are memoized (TokenizedDoc is
    immutable). Raises TextualError("empty document") when no word token
    survives.
    """
    paragraphs: list[tuple[tuple[Token, ...], ...]] = []
    cursor = 0
    spans: list[tuple[int, int]] = []
    for sep in _PARAGRAPH_SEP.finditer(text):
        spans.append((cursor, sep.start()))
        cursor = sep.end()
    spans.append((cursor, len(text)))

    for start, end in spans:
        para_text = text[start:end]
        sentences = []
        for s_start, s_end in _sentence_spans(para_text):
            tokens = tuple(
                Token(m.group(), start + s_start + m.start(), bool(_WORD.match(m.group())))
                for m in _TOKEN.finditer(para_text[s_start:s_end])
            )
            if tokens:
                sentences.append(tokens)
        if sentences:
            paragraphs.append(tuple(sentences))

    doc = TokenizedDoc(text=text, paragraphs=tuple(paragraphs))
    if not doc.word_tokens:
        raise TextualError("empty document")
    return doc


def _sentence_spans(para_text: str) -> list[tuple[int, int]]:
    spans = []
    cursor = 0
    for m in _SENTENCE_END.finditer(para_text):
        spans.append((cursor, m.end()))
        cursor = m.end()
    if para_text[cursor:].strip():
        spans.append((cursor, len(para_text)))
    return spans


# ---------------------------------------------------------------------------
# Lexical resources

_RESOURCE_FILES = {
    "connectors": "connectors.txt",
    "stopwords": "stopwords.txt",
    "dictionary": "dictionary.txt",
    "sense_counts": "sense_counts.tsv",
    "tag_lexicon": "tag_lexicon.tsv",
}

# Fallback tagging for words absent from the lexicon, checked in order.
_SUFFIX_RULES: tuple[tuple[str, str], ...] = (
    ("ly", TAG_ADV),
    ("tion", TAG_NOUN),
    ("sion", TAG_NOUN),
    ("ness", TAG_NOUN),
    ("ment", TAG_NOUN),
    ("ship", TAG_NOUN),
    ("hood", TAG_NOUN),
    ("ance", TAG_NOUN),
    ("ence", TAG_NOUN),
    ("ity", TAG_NOUN),
    ("ism", TAG_NOUN),
    ("ist", TAG_NOUN),
    ("ology", TAG_NOUN),
    ("ous", TAG_ADJ),
    ("ful", TAG_ADJ),
    ("ive", TAG_ADJ),
    ("able", TAG_ADJ),
    ("ible", TAG_ADJ),
    ("ical", TAG_ADJ),
    ("less", TAG_ADJ),
    ("ish", TAG_ADJ),
    ("ize", TAG_VERB),
    ("ise", TAG_VERB),
    ("ify", TAG_VERB),
    ("ing", TAG_VERB),
    ("ed", TAG_VERB),
)


@dataclass(frozen=True)
class LexicalResources:
    """Immutable word lists backing the textual extractors. All keys are
    case-folded at load time."""

    pos_lexicon: Mapping[str, str]
    sense_counts: Mapping[str, int]
    dictionary: frozenset
    stopwords: frozenset
    connectors: tuple  # token-tuples, longest phrase first


def _read_lines(path: Path) -> list[str]:
    if not path.is_file():
        raise ResourceError(f"missing resource file: {path}")
    lines = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append(line)
    return lines


def load_lexical_resources(resource_dir: str | Path | None = None) -> LexicalResources:
    """Load the bundled resource files, or the same five files from an
    explicit directory."""
    if resource_dir is None:
        resource_dir = Path(__file__).parent / "resources"
    base = Path(resource_dir)

    lexicon = {}
    for i, line in enumerate(_read_lines(base / _RESOURCE_FILES["tag_lexicon"]), 1):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ResourceError(f"tag_lexicon line {i}: expected 'word<TAB>tag', got {line!r}")
        lexicon[parts[0].casefold()] = parts[1]

    senses = {}
    for i, line in enumerate(_read_lines(base / _RESOURCE_FILES["sense_counts"]), 1):
        parts = line.split("\t")
        if len(parts) != 2 or not parts[1].isdigit():
            raise ResourceError(f"sense_counts line {i}: expected 'word<TAB>count', got {line!r}")
        count = int(parts[1])
        if count < 1:
            raise ResourceError(f"sense_counts line {i}: count must be >= 1")
        senses[parts[0].casefold()] = count

    dictionary = frozenset(w.casefold() for w in _read_lines(base / _RESOURCE_FILES["dictionary"]))
    stopwords = frozenset(w.casefold() for w in _read_lines(base / _RESOURCE_FILES["stopwords"]))

    connector_phrases = [
        tuple(p.casefold().split()) for p in _read_lines(base / _RESOURCE_FILES["connectors"])
    ]
    connectors = tuple(sorted(set(connector_phrases), key=lambda p: (-len(p), p)))

    return LexicalResources(
        pos_lexicon=lexicon,
        sense_counts=senses,
        dictionary=dictionary,
        stopwords=stopwords,
        connectors=connectors,
    )


def tag_word(word: str, res: LexicalResources) -> str:
    """Most-frequent-tag lookup with suffix-rule fallback; unknown words
    default to noun."""
    folded = word.casefold()
    tag = res.pos_lexicon.get(folded)
    if tag is not None:
        return tag
    for suffix, stag in _SUFFIX_RULES:
        if len(folded) > len(suffix) + 1 and folded.endswith(suffix):
            return stag
    return TAG_NOUN


# ---------------------------------------------------------------------------
# Extractors


def pos_ratios(doc: TokenizedDoc, res: LexicalResources) -> tuple[float, float, float, float]:
    """(noun, adj, adv, verb) counts divided by the number of word tokens."""
    words = doc.word_tokens
    if not words:
        raise TextualError("pos_ratios requires at least one word token")
    counts = {TAG_NOUN: 0, TAG_ADJ: 0, TAG_ADV: 0, TAG_VERB: 0}
    for tok in words:
        tag = tag_word(tok.surface, res)
        if tag in counts:
            counts[tag] += 1
    n = len(words)
    return (counts[TAG_NOUN] / n, counts[TAG_ADJ] / n, counts[TAG_ADV] / n, counts[TAG_VERB] / n)


def discourse_count(doc: TokenizedDoc, res: LexicalResources) -> int:
    """Case-insensitive, longest-match-first, non-overlapping count of
    connector phrases over the word tokens of each sentence."""
    by_first: dict[str, list[tuple[str, ...]]] = {}
    for phrase in res.connectors:
        by_first.setdefault(phrase[0], []).append(phrase)

    total = 0
    for sentence in doc.sentences:
        words = [t.folded() for t in sentence if t.is_word]
        i = 0
        while i < len(words):
            matched = 0
            for phrase in by_first.get(words[i], ()):
                if tuple(words[i : i + len(phrase)]) == phrase:
                    matched = len(phrase)
                    break
            if matched:
                total += 1
                i += matched
            else:
                i += 1
    return total


def syllable_count(word: str) -> int:
    """Contiguous-vowel-group heuristic with silent-e subtraction, minimum 1."""
    w = "".join(c for c in word.casefold() if c.isalpha())
    if not w:
        return 1
    groups = len(_VOWEL_GROUP.findall(w))
    if w.endswith("e") and not w.endswith("le") and groups > 1:
        groups -= 1
    return max(groups, 1)


def fres(doc: TokenizedDoc) -> float:
    """Flesch Reading Ease: 206.835 - 1.015*(words/sentences) - 84.6*(syllables/words)."""
    words = doc.word_tokens
    n_sentences = len(doc.sentences)
    if not words or n_sentences == 0:
        raise TextualError("fres requires at least one sentence and one word")
    syllables = sum(syllable_count(t.surface) for t in words)
    return 206.835 - 1.015 * (len(words) / n_sentences) - 84.6 * (syllables / len(words))


def length_features(doc: TokenizedDoc) -> tuple[float, float, float]:
    """(mean words per sentence, mean words per paragraph, mean chars per word)."""
    words = doc.word_tokens
    if not words:
        raise TextualError("length_features requires at least one word token")
    n_words = len(words)
    chars = sum(len(t.surface) for t in words)
    return (
        n_words / len(doc.sentences),
        n_words / len(doc.paragraphs),
        chars / n_words,
    )


def coref_distance(doc: TokenizedDoc, res: LexicalResources) -> int:
    """Sum of token-index distances over two heuristic coreference rules:
    repeated noun surfaces chain consecutively, and each third-person pronoun
    links to the nearest preceding noun. Indices count all tokens."""
    total = 0
    last_noun_index = None
    last_seen: dict[str, int] = {}
    for index, tok in enumerate(doc.tokens):
        if not tok.is_word:
            continue
        folded = tok.folded()
        if folded in THIRD_PERSON_PRONOUNS:
            if last_noun_index is not None:
                total += index - last_noun_index
            continue
        if tag_word(tok.surface, res) == TAG_NOUN:
            if folded in last_seen:
                total += index - last_seen[folded]
            last_seen[folded] = index
            last_noun_index = index
    return total


def polysemy_degree(doc: TokenizedDoc, res: LexicalResources) -> float:
    """Mean sense count over word tokens found in the sense lexicon; 0.0 when
    no token is covered."""
    found = [res.sense_counts[t.folded()] for t in doc.word_tokens if t.folded() in res.sense_counts]
    if not found:
        return 0.0
    return sum(found) / len(found)


def spell_errors(doc: TokenizedDoc, res: LexicalResources) -> int:
    """Word tokens absent from the dictionary; tokens containing digits are skipped."""
    errors = 0
    for tok in doc.word_tokens:
        if any(c.isdigit() for c in tok.surface):
            continue
        if tok.folded() not in res.dictionary:
            errors += 1
    return errors


def ne_count(doc: TokenizedDoc) -> int:
    """Heuristic named-entity proxy: capitalized word tokens that are not
    sentence-initial. Off by default in the feature registry."""
    count = 0
    for sentence in doc.sentences:
        first_word = True
        for tok in sentence:
            if not tok.is_word:
                continue
            if not first_word and tok.surface[0].isupper():
                count += 1
            first_word = False
    return count


@dataclass(frozen=True)
class TextualFeatures:
    noun_ratio: float
    adj_ratio: float
    adv_ratio: float
    verb_ratio: float
    discourse_count: int
    fres: float
    avg_words_per_sentence: float
    avg_words_per_paragraph: float
    avg_word_length: float
    coref_distance: int
    polysemy_degree: float
    spell_errors: int
    ne_count: int | None = None


def textual_features(
    doc: TokenizedDoc, res: LexicalResources, include_ne: bool = False
) -> TextualFeatures:
    noun, adj, adv, verb = pos_ratios(doc, res)
    wps, wpp, awl = length_features(doc)
    return TextualFeatures(
        noun_ratio=noun,
        adj_ratio=adj,
        adv_ratio=adv,
        verb_ratio=verb,
        discourse_count=discourse_count(doc, res),
        fres=fres(doc),
        avg_words_per_sentence=wps,
        avg_words_per_paragraph=wpp,
        avg_word_length=awl,
        coref_distance=coref_distance(doc, res),
        polysemy_degree=polysemy_degree(doc, res),
        spell_errors=spell_errors(doc, res),
        ne_count=ne_count(doc) if include_ne else None,
    )
