"""Rule-based provider family.

Every capability here is a pure function of its inputs: identical inputs
give identical outputs across runs and platforms. This family doubles as
the test oracle for the attack and evaluation math, which must be
checkable without any model variance.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

from ..errors import ProviderError
from ..textutil import (
    canonicalize,
    chunk_entity_runs,
    clean_token,
    entity_runs,
    first_sentence,
    split_sentences,
)
from .lexicon import NEGATIVE_WORDS, POSITIVE_WORDS, THIRD_PERSON_PRONOUNS
from .ngram import NgramLanguageModel
from .prompts import field_value, parse_substitutions, list_items, task_tag, text_block
from .types import (
    CoreferenceChain,
    EmbeddingVector,
    EntityMention,
    MiniGraph,
    RelationMention,
)

_TOKEN_RE = re.compile(r"\S+")


def _hash_index(feature: str, dimension: int) -> int:
    digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dimension


class DeterministicProvider:
    """Deterministic implementations of every provider capability."""

    def __init__(self, embedding_dimension: int = 256, language_model: NgramLanguageModel | None = None):
        if embedding_dimension <= 0:
            raise ProviderError("embedding_dimension must be positive")
        self.embedding_dimension = embedding_dimension
        self.language_model = language_model

    # --- graph extraction ---------------------------------------------------

    def extract_graph(self, chunk) -> MiniGraph:
        """Capitalized-run entities; one relation per co-occurring pair per sentence."""
        if not chunk.text.strip():
            raise ProviderError(f"cannot extract from empty chunk {chunk.id}")
        entities: set[EntityMention] = set()
        relations: set[RelationMention] = set()
        for sentence, offset in split_sentences(chunk.text):
            runs = entity_runs(sentence)
            sentence_text = sentence.strip()
            by_key: dict[str, str] = {}
            for run in runs:
                key = canonicalize(run.surface)
                by_key.setdefault(key, run.surface)
                entities.add(EntityMention(run.surface, "UNKNOWN", sentence_text, chunk.id))
            keys = sorted(by_key)
            for i, key_a in enumerate(keys):
                for key_b in keys[i + 1 :]:
                    relations.add(
                        RelationMention(
                            by_key[key_a], by_key[key_b], sentence_text, 1.0, chunk.id
                        )
                    )
        return MiniGraph(frozenset(entities), frozenset(relations))

    # --- embedding ------------------------------------------------------------

    def embed(self, text: str) -> EmbeddingVector:
        """Feature-hash casefolded token unigrams and bigrams; L2-normalize.

        Empty input maps to a fixed unit basis vector so the result is
        always well formed.
        """
        tokens = [t.casefold() for t in text.split()]
        vec = np.zeros(self.embedding_dimension, dtype=np.float64)
        for token in tokens:
            vec[_hash_index(token, self.embedding_dimension)] += 1.0
        for left, right in zip(tokens, tokens[1:]):
            vec[_hash_index(f"{left} {right}", self.embedding_dimension)] += 1.0
        norm = float(np.linalg.norm(vec))
        if norm <= 1e-12:
            vec[0] = 1.0
            return EmbeddingVector(tuple(float(v) for v in vec))
        return EmbeddingVector.from_raw(vec)

    # --- generation -----------------------------------------------------------

    def generate(self, prompt: str, temperature: float = 0.0, max_tokens: int | None = None) -> str:
        if not prompt.strip():
            raise ProviderError("empty prompt")
        tag = task_tag(prompt)
        handler = getattr(self, f"_task_{tag}", None)
        if handler is None:
            raise ProviderError(f"deterministic generator has no handler for task {tag!r}")
        return handler(prompt)

    def _task_summarize(self, prompt: str) -> str:
        names = []
        for item in list_items(prompt, "entities"):
            if item != "(none)":
                names.append(item.split(" ::")[0].strip())
        descriptions = [d for d in list_items(prompt, "relations") if d != "(none)"]
        names = sorted(names)
        descriptions = sorted(descriptions)
        if not names:
            return ""
        if descriptions:
            return f"{', '.join(names)}: {' '.join(descriptions)}"
        return f"{', '.join(names)}."

    def _task_rewrite(self, prompt: str) -> str:
        table = parse_substitutions(prompt)
        text = text_block(prompt)
        if not table:
            return text
        pattern = re.compile(
            r"\b(" + "|".join(re.escape(k) for k in sorted(table, key=len, reverse=True)) + r")\b"
        )
        return pattern.sub(lambda m: table[m.group(0)], text)

    def _task_answer(self, prompt: str) -> str:
        context = text_block(prompt)
        top = context.split("\n\n")[0].strip()
        return first_sentence(top)

    def _task_classify(self, prompt: str) -> str:
        sentinel = field_value(prompt, "flag-substring", default="")
        text = text_block(prompt)
        return "poisoned" if sentinel and sentinel in text else "clean"

    def _task_judge(self, prompt: str) -> str:
        claim = field_value(prompt, "claim")
        answer = text_block(prompt)
        return "yes" if claim.casefold() in answer.casefold() else "no"

    def _task_perturb(self, prompt: str) -> str:
        mode = field_value(prompt, "mode")
        text = text_block(prompt)
        entity = field_value(prompt, "entity", default="")
        if mode == "pronoun":
            surface = field_value(prompt, "pronoun")
            offset = int(field_value(prompt, "pronoun_offset"))
            replacement = field_value(prompt, "replacement")
            if text[offset : offset + len(surface)] != surface:
                raise ProviderError("pronoun offset does not match the text")
            if surface[:1].isupper():
                replacement = replacement[:1].upper() + replacement[1:]
            return text[:offset] + replacement + text[offset + len(surface) :]
        if mode in ("rename_all", "rename_last"):
            # Surname-style reference: drop the leading name tokens so exact
            # surface matching no longer links the mention across chunks.
            short = entity.split()[-1]
            if short == entity:
                return text
            matches = list(re.finditer(re.escape(entity), text))
            if not matches:
                return text
            targets = matches if mode == "rename_all" else matches[-1:]
            out = []
            last = 0
            for match in targets:
                out.append(text[last : match.start()])
                out.append(short)
                last = match.end()
            out.append(text[last:])
            return "".join(out)
        raise ProviderError(f"unknown perturbation mode {mode!r}")

    # --- linguistic analysis ----------------------------------------------------

    def coref_chains(self, chunk) -> list[CoreferenceChain]:
        """Link each third-person pronoun to the nearest preceding entity run."""
        if not chunk.text.strip():
            raise ProviderError(f"cannot analyze empty chunk {chunk.id}")
        text = chunk.text
        runs = chunk_entity_runs(text)
        grouped: dict[str, tuple[str, list[tuple[str, tuple[int, int]]]]] = {}
        order: list[str] = []
        for match in _TOKEN_RE.finditer(text):
            cleaned = clean_token(match.group())
            if cleaned.casefold() not in THIRD_PERSON_PRONOUNS:
                continue
            inner = match.group().find(cleaned)
            start = match.start() + inner
            end = start + len(cleaned)
            antecedent = None
            for run in runs:
                if run.end <= start and (antecedent is None or run.end > antecedent.end):
                    antecedent = run
            if antecedent is None:
                continue
            key = canonicalize(antecedent.surface)
            if key not in grouped:
                grouped[key] = (antecedent.surface, [])
                order.append(key)
            grouped[key][1].append((text[start:end], (start, end)))
        return [
            CoreferenceChain(grouped[key][0], tuple(grouped[key][1])) for key in order
        ]

    def sentiment_score(self, text: str) -> float:
        """Laplace-smoothed polarity over the bundled lexicon."""
        positive = negative = 0
        for token in text.split():
            word = clean_token(token).casefold()
            if word in POSITIVE_WORDS:
                positive += 1
            elif word in NEGATIVE_WORDS:
                negative += 1
        return (positive + 1) / (positive + negative + 2)

    def perplexity(self, text: str) -> float:
        if self.language_model is None:
            raise ProviderError("perplexity requires a fitted language model")
        return self.language_model.perplexity(text)

    # --- query analysis -----------------------------------------------------------

    def query_entities(self, question: str) -> list[str]:
        """Candidate entity names in the question, in order of appearance."""
        seen: set[str] = set()
        names: list[str] = []
        for run in chunk_entity_runs(question):
            key = canonicalize(run.surface)
            if key not in seen:
                seen.add(key)
                names.append(run.surface)
        return names
