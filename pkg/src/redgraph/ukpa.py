"""Corpus-wide knowledge poisoning via coreference weakening.

Walks every chunk, generates small rewrites that weaken how mentions link
to their entities (vague pronoun replacements, surname-style shortening
of entity names), scores each rewrite by how much it would shift the
chunk's local entity-relation structure while staying semantically close,
and applies the highest-impact rewrite per chunk within a corpus budget.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

from .corpus import Chunk, Corpus, EditRecord, apply_edits, word_edit_count
from .errors import AttackError, DataError, RedgraphError
from .providers import ProviderSuite
from .providers.lexicon import VAGUE_REPLACEMENTS, VAGUE_REPLACEMENTS_ALT
from .providers.prompts import build_perturb_prompt
from .providers.types import CoreferenceChain, cosine
from .textutil import canonicalize, word_count
from .tkpa import AttackResult, AttackStats

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UkpaConfig:
    """Impact weights, per-chunk candidate count, and edit budgets."""

    entity_weight: float = 0.25
    relation_weight: float = 0.25
    closeness_weight: float = 0.5
    candidates_per_chunk: int = 4
    max_edit_distance: int = 3
    chunk_budget: int = 12

    def __post_init__(self):
        weights = (self.entity_weight, self.relation_weight, self.closeness_weight)
        if any(w < 0 for w in weights):
            raise DataError("impact weights must be non-negative")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise DataError(f"impact weights must sum to 1, got {sum(weights)}")
        if self.candidates_per_chunk < 1:
            raise DataError("candidates_per_chunk must be at least 1")
        if self.max_edit_distance < 1:
            raise DataError("max_edit_distance must be at least 1")
        if self.chunk_budget < 1:
            raise DataError("chunk_budget must be at least 1")


@dataclass(frozen=True)
class PerturbationCandidate:
    chunk_id: str
    modified_text: str
    edit_distance: int
    entity_shift: float | None = None
    relation_shift: float | None = None
    closeness: float | None = None
    impact: float | None = None


def jaccard_distance(left: set, right: set) -> float:
    """Symmetric difference normalized by the union; 0 when both are empty."""
    union = left | right
    if not union:
        return 0.0
    return len(left ^ right) / len(union)


def impact_value(
    weights: tuple[float, float, float],
    entity_shift: float,
    relation_shift: float,
    closeness: float,
) -> float:
    return weights[0] * entity_shift + weights[1] * relation_shift + weights[2] * (1.0 - closeness)


def _perturbation_prompts(chunk: Chunk, chains: list[CoreferenceChain]) -> list[str]:
    """Candidate rewrite prompts in a fixed order: per chain, shorten the
    entity name everywhere, shorten its last mention, then weaken its
    first pronoun two ways."""
    prompts: list[str] = []
    for chain in chains:
        entity = chain.entity_mention
        prompts.append(build_perturb_prompt(chunk.text, "rename_all", entity))
        prompts.append(build_perturb_prompt(chunk.text, "rename_last", entity))
        surface, (start, _end) = chain.referring_mentions[0]
        for table in (VAGUE_REPLACEMENTS, VAGUE_REPLACEMENTS_ALT):
            replacement = table.get(surface.casefold())
            if replacement:
                prompts.append(
                    build_perturb_prompt(
                        chunk.text,
                        "pronoun",
                        entity,
                        pronoun=surface,
                        pronoun_offset=start,
                        replacement=replacement,
                    )
                )
    return prompts


def generate_candidates(
    chunk: Chunk,
    chains: list[CoreferenceChain],
    config: UkpaConfig,
    generator,
) -> list[PerturbationCandidate]:
    """Up to candidates_per_chunk distinct rewrites within the edit cap.

    Chunks with no coreference chains yield no candidates; rewrites that
    leave the text unchanged or exceed max_edit_distance are discarded.
    """
    if not chunk.text.strip():
        raise DataError(f"chunk {chunk.id} is empty")
    if not chains:
        return []
    candidates: list[PerturbationCandidate] = []
    seen: set[str] = set()
    for prompt in _perturbation_prompts(chunk, chains):
        if len(candidates) >= config.candidates_per_chunk:
            break
        rewritten = generator.generate(prompt)
        if not rewritten.strip() or rewritten == chunk.text or rewritten in seen:
            continue
        distance = word_edit_count(chunk.text, rewritten)
        if distance > config.max_edit_distance:
            continue
        seen.add(rewritten)
        candidates.append(PerturbationCandidate(chunk.id, rewritten, distance))
    return candidates


def _entity_keys(minigraph) -> set[str]:
    return {canonicalize(e.name) for e in minigraph.entities}


def _relation_pairs(minigraph) -> set[tuple[str, str]]:
    pairs = set()
    for rel in minigraph.relations:
        a, b = canonicalize(rel.source), canonicalize(rel.target)
        if a != b:
            pairs.add((a, b) if a < b else (b, a))
    return pairs


def impact_score(
    chunk: Chunk,
    candidate: PerturbationCandidate,
    suite: ProviderSuite,
    config: UkpaConfig,
) -> PerturbationCandidate:
    """Score one rewrite by local structure shift and semantic closeness."""
    weights = (config.entity_weight, config.relation_weight, config.closeness_weight)
    if candidate.modified_text == chunk.text:
        return replace(
            candidate, entity_shift=0.0, relation_shift=0.0, closeness=1.0, impact=0.0
        )
    original_graph = suite.extractor.extract_graph(chunk)
    modified_chunk = replace(
        chunk, text=candidate.modified_text, word_count=word_count(candidate.modified_text)
    )
    modified_graph = suite.extractor.extract_graph(modified_chunk)
    entity_shift = jaccard_distance(_entity_keys(original_graph), _entity_keys(modified_graph))
    relation_shift = jaccard_distance(
        _relation_pairs(original_graph), _relation_pairs(modified_graph)
    )
    closeness = cosine(
        suite.embedder.embed(chunk.text), suite.embedder.embed(candidate.modified_text)
    )
    return replace(
        candidate,
        entity_shift=entity_shift,
        relation_shift=relation_shift,
        closeness=closeness,
        impact=impact_value(weights, entity_shift, relation_shift, closeness),
    )


def best_candidate(candidates: list[PerturbationCandidate]) -> PerturbationCandidate:
    """Highest impact; ties prefer the smaller edit, then lexicographic text."""
    return sorted(candidates, key=lambda c: (-c.impact, c.edit_distance, c.modified_text))[0]


def select_and_apply(
    corpus: Corpus,
    best_by_chunk: dict[str, PerturbationCandidate],
    config: UkpaConfig,
) -> tuple[Corpus, list[EditRecord]]:
    """Keep the top-budget chunks by impact and apply their rewrites.

    Zero-impact candidates are dropped, so total modified words stay
    within chunk_budget * max_edit_distance.
    """
    chunk_map = corpus.chunk_map()
    eligible = []
    for chunk_id in sorted(best_by_chunk):
        candidate = best_by_chunk[chunk_id]
        if candidate.impact is None:
            raise DataError(f"candidate for chunk {chunk_id} was never scored")
        if candidate.edit_distance > config.max_edit_distance:
            raise DataError(f"candidate for chunk {chunk_id} exceeds the edit cap")
        if candidate.impact > 0:
            eligible.append(candidate)
    ranked = sorted(eligible, key=lambda c: (-c.impact, c.chunk_id))
    chosen = ranked[: config.chunk_budget]
    edits = [
        EditRecord.create(c.chunk_id, chunk_map[c.chunk_id].text, c.modified_text)
        for c in chosen
    ]
    return apply_edits(corpus, edits), edits


def run_ukpa(corpus: Corpus, config: UkpaConfig, suite: ProviderSuite) -> AttackResult:
    """Full corpus-wide attack: analyze, perturb, score, select, apply."""
    if not corpus.chunks:
        raise DataError("cannot attack an empty corpus")
    best_by_chunk: dict[str, PerturbationCandidate] = {}
    tables: dict[str, dict] = {}
    failures: dict[str, str] = {}
    chunks = sorted(corpus.chunks, key=lambda c: c.id)
    for chunk in chunks:
        try:
            chains = suite.coref.coref_chains(chunk)
            drafts = generate_candidates(chunk, chains, config, suite.generator)
            scored = [impact_score(chunk, draft, suite, config) for draft in drafts]
        except RedgraphError as exc:
            failures[chunk.id] = str(exc)
            logger.warning("chunk %s failed during candidate analysis: %s", chunk.id, exc)
            continue
        tables[chunk.id] = {
            "chain_count": len(chains),
            "candidates": [
                {
                    "modified_text": c.modified_text,
                    "edit_distance": c.edit_distance,
                    "entity_shift": c.entity_shift,
                    "relation_shift": c.relation_shift,
                    "closeness": c.closeness,
                    "impact": c.impact,
                }
                for c in scored
            ],
        }
        if scored:
            best_by_chunk[chunk.id] = best_candidate(scored)
    if failures and len(failures) == len(chunks):
        raise AttackError(f"every chunk failed during analysis: {failures}")

    poisoned, edits = select_and_apply(corpus, best_by_chunk, config)
    words_modified = sum(edit.words_changed for edit in edits)
    total_words = corpus.total_words()
    stats = AttackStats(words_modified, total_words, words_modified / total_words)
    plan = {
        "attack": "ukpa",
        "chunk_tables": tables,
        "failures": failures,
        "edited_chunk_ids": [edit.chunk_id for edit in edits],
    }
    return AttackResult(tuple(edits), poisoned, plan, stats)
