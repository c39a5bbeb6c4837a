"""Shared text segmentation helpers.

A "word" everywhere in this package is a whitespace token after unicode
NFC normalization. Sentence splitting is intentionally naive (split after
., ! or ?) and is documented as such; the corpora this tool targets are
plain narrative prose.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

_TOKEN_RE = re.compile(r"\S+")
_SENTENCE_END_RE = re.compile(r"(?<=[.!?])\s+")
_POSSESSIVE_RE = re.compile(r"(?:'s|’s)$")

# Function words that lose their capital when they open a sentence, so the
# capitalized-run heuristic does not read "The", "It", "Who", ... as names.
SENTENCE_INITIAL_STOPWORDS = frozenset(
    """
    a an the this that these those there here it he she they we you i
    who whom whose what which when where why how is are was were be been
    am do does did have has had will would shall should can could may
    might must as at by for from in of on to with without but and or nor
    if then else so not no yes once again after before while during
    his her hers its their them him us our your my me
    """.split()
)


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def tokenize(text: str) -> list[str]:
    """Whitespace tokens of the NFC-normalized text."""
    return nfc(text).split()


def word_count(text: str) -> int:
    return len(tokenize(text))


def canonicalize(name: str) -> str:
    """Canonical entity key: NFC, casefolded, whitespace collapsed."""
    return " ".join(nfc(name).casefold().split())


def clean_token(token: str) -> str:
    """Strip surrounding punctuation and a trailing possessive marker."""
    core = token.strip("\"'‘’“”.,;:!?()[]{}<>")
    return _POSSESSIVE_RE.sub("", core)


def is_capitalized(token: str) -> bool:
    for ch in token:
        if ch.isalpha():
            return ch.isupper()
    return False


def split_sentences(text: str) -> list[tuple[str, int]]:
    """Sentences with their character offsets into the original text."""
    normalized = nfc(text)
    sentences: list[tuple[str, int]] = []
    start = 0
    for match in _SENTENCE_END_RE.finditer(normalized):
        piece = normalized[start : match.start()]
        if piece.strip():
            sentences.append((piece, start))
        start = match.end()
    tail = normalized[start:]
    if tail.strip():
        sentences.append((tail, start))
    return sentences


def first_sentence(text: str) -> str:
    sentences = split_sentences(text)
    return sentences[0][0].strip() if sentences else ""


@dataclass(frozen=True)
class EntityRun:
    """A maximal run of capitalized tokens, with its span in the source text."""

    surface: str
    start: int
    end: int


def entity_runs(sentence: str, offset: int = 0) -> list[EntityRun]:
    """Maximal capitalized-token runs within one sentence.

    The sentence-opening token is de-capitalized when it is a common
    function word, so ordinary sentence case does not produce entities.
    """
    runs: list[EntityRun] = []
    current: list[str] = []
    run_start = run_end = 0
    for position, match in enumerate(_TOKEN_RE.finditer(sentence)):
        cleaned = clean_token(match.group())
        treat_as_name = bool(cleaned) and is_capitalized(cleaned)
        if treat_as_name and position == 0 and cleaned.casefold() in SENTENCE_INITIAL_STOPWORDS:
            treat_as_name = False
        if treat_as_name:
            if not current:
                run_start = match.start()
            current.append(cleaned)
            run_end = match.end()
        elif current:
            runs.append(EntityRun(" ".join(current), run_start + offset, run_end + offset))
            current = []
    if current:
        runs.append(EntityRun(" ".join(current), run_start + offset, run_end + offset))
    return runs


def chunk_entity_runs(text: str) -> list[EntityRun]:
    """Entity runs across all sentences of a chunk, in document order."""
    runs: list[EntityRun] = []
    for sentence, offset in split_sentences(text):
        runs.extend(entity_runs(sentence, offset))
    return runs
