"""Synthetic corpus and embedding generation.

The real essay dataset is private, so fixtures and demos are built from a
seed pool of topical sentences. Accepted documents keep the pool's coherent
ordering; rejected documents sample the same pool with scrambled sentence
order, injected misspellings (3% of word tokens), and out-of-vocabulary noise
replacing 10% of word tokens in place (so surface statistics like sentence
length stay comparable). Everything is a pure function of the seed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .corpus import Corpus, Document, LABEL_ACCEPTED, LABEL_REJECTED, save_corpus
from .embeddings import EmbeddingTable, write_embeddings
from .errors import CorpusError
from .textual import (
    TAG_ADJ,
    TAG_ADV,
    TAG_NOUN,
    TAG_VERB,
    LexicalResources,
    load_lexical_resources,
    tag_word,
)

MISSPELL_RATE = 0.03
NOISE_RATE = 0.10
_CONTENT_TAGS = (TAG_NOUN, TAG_VERB, TAG_ADJ, TAG_ADV)

SEED_POOL = (
    (
        "my fascination with computers started during secondary school",
        "an introductory programming course showed me how software can solve real problems",
        "building small games taught me the value of careful design and patient debugging",
        "the experience of writing my first working program was deeply rewarding",
        "since then the desire to understand computation has guided my academic choices",
        "curiosity about how machines learn continues to motivate my studies",
    ),
    (
        "during my undergraduate degree i focused on algorithms and data structures",
        "courses in linear algebra and probability gave me a solid mathematical foundation",
        "i maintained an excellent academic record while taking advanced electives",
        "my favorite course explored the theory of computation and formal languages",
        "laboratory assignments strengthened my ability to translate theory into practice",
        "group projects taught me how to collaborate with other motivated students",
    ),
    (
        "my research project investigated methods for classifying short documents",
        "we designed features that capture the structure and vocabulary of a text",
        "the experiments compared several models under careful validation",
        "our results showed that combining complementary features improves accuracy",
        "i presented the findings at a student workshop and received helpful feedback",
        "this work convinced me that empirical evaluation must be rigorous and honest",
    ),
    (
        "an internship at a software company exposed me to production engineering",
        "i implemented a service that processes thousands of requests every day",
        "code review taught me to write clear maintainable and well tested programs",
        "mentors encouraged me to measure performance before attempting optimization",
        "the internship confirmed my preference for research oriented problems",
        "shipping reliable software gave me respect for disciplined engineering practice",
    ),
    (
        "as a teaching assistant i guided younger students through difficult material",
        "explaining concepts clearly deepened my own understanding of the subject",
        "i prepared exercises that connected abstract ideas to concrete examples",
        "office hours taught me patience and the importance of listening carefully",
        "watching students succeed was among the most satisfying parts of my degree",
        "teaching strengthened my commitment to an academic career",
    ),
    (
        "my long term goal is to lead research on trustworthy machine learning",
        "i want to develop methods that make automated decisions transparent",
        "graduate study is the natural next step toward this ambition",
        "i plan to publish my findings and release open source implementations",
        "a doctorate would prepare me to contribute original knowledge to the field",
        "ultimately i hope to teach and mentor the next generation of researchers",
    ),
    (
        "the graduate program at your university matches my interests precisely",
        "faculty members in the department study problems close to my own work",
        "the laboratory culture of open collaboration appeals to me strongly",
        "seminars and reading groups would broaden my perspective on the field",
        "access to large computing resources would accelerate my experiments",
        "i am confident that the program offers the mentorship i need to grow",
    ),
    (
        "i am proficient in several programming languages and statistical tools",
        "years of practice have made me comfortable with large unfamiliar systems",
        "i write documentation so that others can reproduce my results",
        "careful version control and testing are habits i apply to every project",
        "i enjoy reading papers and implementing their methods from scratch",
        "these skills prepare me for the demands of independent research",
    ),
    (
        "outside the classroom i organized a weekly programming club",
        "volunteering to teach basic computer skills served my local community",
        "i helped organize a regional conference for undergraduate researchers",
        "collaboration across disciplines taught me to communicate with diverse audiences",
        "these activities balanced my technical work with public service",
        "i believe scientists should share knowledge beyond the university",
    ),
    (
        "in summary my preparation and motivation align with the demands of graduate study",
        "i bring a strong record steady curiosity and proven persistence",
        "the challenges of research excite me rather than discourage me",
        "i am eager to contribute to the intellectual life of the department",
        "with the support of the program i will grow into an independent researcher",
        "i respectfully ask the committee to consider my application",
    ),
)

_NOISE_LETTERS = "bcdfghjklmnpqrstvwxz"
_NOISE_ONSETS = ("b", "br", "d", "dr", "f", "g", "gr", "k", "kl", "m", "n", "p", "pr",
                 "s", "sk", "t", "tr", "v", "z", "zb")
_NOISE_VOWELS = ("a", "e", "i", "o", "u", "ai", "ou")
# suffixes keep the fallback tagger assigning the replaced word's class, so
# noise imitates rare words instead of skewing the PoS ratios
_NOISE_SUFFIXES = {
    TAG_NOUN: ("", "", "om", "ar"),
    TAG_VERB: ("ize", "ed", "ing"),
    TAG_ADJ: ("ous", "ful", "ive"),
    TAG_ADV: ("ly",),
}


def pool_vocabulary() -> tuple:
    """Sorted distinct words across the whole seed pool."""
    words = set()
    for topic in SEED_POOL:
        for sentence in topic:
            words.update(sentence.split())
    return tuple(sorted(words))


def _render_sentence(words) -> str:
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def _misspell(word: str, rng: np.random.Generator, dictionary: frozenset) -> str:
    """Perturb one word until it falls outside the dictionary."""
    for _ in range(12):
        op = rng.integers(0, 4)
        pos = int(rng.integers(0, len(word)))
        if op == 0 and pos < len(word) - 1:  # swap adjacent
            out = word[:pos] + word[pos + 1] + word[pos] + word[pos + 2 :]
        elif op == 1 and len(word) > 3:  # drop a letter
            out = word[:pos] + word[pos + 1 :]
        elif op == 2:  # double a letter
            out = word[:pos] + word[pos] + word[pos:]
        else:  # replace a letter
            letter = _NOISE_LETTERS[int(rng.integers(0, len(_NOISE_LETTERS)))]
            out = word[:pos] + letter + word[pos + 1 :]
        if out != word and out not in dictionary:
            return out
    out = word + "q"
    while out in dictionary:
        out += "q"
    return out


def _noise_token(
    rng: np.random.Generator, dictionary: frozenset, tag: str = TAG_NOUN
) -> str:
    """Pronounceable out-of-vocabulary token shaped like a word of the given
    class (word-like syllables plus a class-preserving suffix)."""
    suffixes = _NOISE_SUFFIXES.get(tag, _NOISE_SUFFIXES[TAG_NOUN])
    while True:
        n_syllables = int(rng.integers(2, 4))
        base = "".join(
            _NOISE_ONSETS[int(rng.integers(0, len(_NOISE_ONSETS)))]
            + _NOISE_VOWELS[int(rng.integers(0, len(_NOISE_VOWELS)))]
            for _ in range(n_syllables)
        )
        token = base + suffixes[int(rng.integers(0, len(suffixes)))]
        if token not in dictionary:
            return token


def _accepted_text(rng: np.random.Generator) -> str:
    n_topics = int(rng.integers(3, 6))
    topic_ids = sorted(int(t) for t in rng.choice(len(SEED_POOL), size=n_topics, replace=False))
    paragraphs = []
    for t in topic_ids:
        sentences = SEED_POOL[t]
        n_sent = int(rng.integers(3, len(sentences) + 1))
        start = int(rng.integers(0, len(sentences) - n_sent + 1))
        window = sentences[start : start + n_sent]
        paragraphs.append(" ".join(_render_sentence(s.split()) for s in window))
    return "\n\n".join(paragraphs)


def _rejected_text(rng: np.random.Generator, lexical: LexicalResources) -> str:
    dictionary = lexical.dictionary
    flat = [s for topic in SEED_POOL for s in topic]
    n_sent = int(rng.integers(12, 21))
    picked = [flat[int(i)] for i in rng.choice(len(flat), size=n_sent, replace=False)]
    sentences = [s.split() for s in picked]

    # corruption targets content words, the place real errors and rare words live
    n_words = sum(len(s) for s in sentences)
    eligible = [
        (i, j)
        for i, s in enumerate(sentences)
        for j, w in enumerate(s)
        if len(w) >= 4 and tag_word(w, lexical) in _CONTENT_TAGS
    ]
    n_misspell = max(1, int(round(MISSPELL_RATE * n_words)))
    n_noise = max(1, int(round(NOISE_RATE * n_words)))
    n_corrupt = min(n_misspell + n_noise, len(eligible))
    corrupt_at = rng.choice(len(eligible), size=n_corrupt, replace=False)
    for idx in corrupt_at[:n_misspell]:
        i, j = eligible[int(idx)]
        sentences[i][j] = _misspell(sentences[i][j], rng, dictionary)
    for idx in corrupt_at[n_misspell:]:
        i, j = eligible[int(idx)]
        tag = tag_word(sentences[i][j], lexical)
        sentences[i][j] = _noise_token(rng, dictionary, tag)

    paragraphs = []
    cursor = 0
    while cursor < len(sentences):
        size = int(rng.integers(3, 7))
        chunk = sentences[cursor : cursor + size]
        paragraphs.append(" ".join(_render_sentence(s) for s in chunk))
        cursor += size
    return "\n\n".join(paragraphs)


def generate_corpus(
    n_docs: int = 50, seed: int = 0, lexical: LexicalResources | None = None
) -> Corpus:
    """Balanced synthetic corpus: n_docs/2 coherent accepted essays and
    n_docs/2 scrambled, corrupted rejected essays."""
    if n_docs < 4 or n_docs % 2 != 0:
        raise CorpusError(f"n_docs must be an even number >= 4, got {n_docs}")
    if lexical is None:
        lexical = load_lexical_resources()
    rng = np.random.default_rng(seed)
    half = n_docs // 2
    width = len(str(half - 1))
    documents = []
    for i in range(half):
        documents.append(
            Document(id=f"acc_{i:0{width}d}", text=_accepted_text(rng), label=LABEL_ACCEPTED)
        )
    for i in range(half):
        documents.append(
            Document(
                id=f"rej_{i:0{width}d}",
                text=_rejected_text(rng, lexical),
                label=LABEL_REJECTED,
            )
        )
    return Corpus(documents=tuple(documents), provenance=f"synthetic seed={seed}")


def generate_embeddings(dimension: int = 50, seed: int = 0) -> EmbeddingTable:
    """Deterministic vectors for the whole pool vocabulary. Words share a
    topic component so related sentences have similar vectors."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(len(SEED_POOL), dimension))
    topic_of = {}
    for t, topic in enumerate(SEED_POOL):
        for sentence in topic:
            for word in sentence.split():
                topic_of.setdefault(word, t)
    vectors = {}
    for word in pool_vocabulary():
        own = rng.normal(size=dimension)
        vectors[word] = 0.6 * centers[topic_of[word]] + 0.8 * own
    return EmbeddingTable(dimension=dimension, vectors=vectors)


def write_bundle(
    out_dir: str | Path,
    n_docs: int = 50,
    seed: int = 0,
    dimension: int = 50,
) -> tuple:
    """Write corpus.jsonl and embeddings.txt under out_dir; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus_path = out_dir / "corpus.jsonl"
    embeddings_path = out_dir / "embeddings.txt"
    save_corpus(generate_corpus(n_docs=n_docs, seed=seed), corpus_path)
    write_embeddings(generate_embeddings(dimension=dimension, seed=seed), embeddings_path)
    return corpus_path, embeddings_path
