"""Targeted knowledge poisoning.

Locates the community where the target entity has the most structural
leverage relative to summary length, narrows to the entity's ego
subgraph, ranks the chunks backing that neighborhood, and rewrites the
top-ranked ones toward the attacker's goal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .corpus import Chunk, Corpus, EditRecord, apply_edits
from .errors import DataError, ProviderError, RedgraphError, TargetingError
from .kgraph import (
    Community,
    KnowledgeGraph,
    betweenness_centrality,
    degree_centrality,
    ego_subgraph,
    induced_subgraph,
    pagerank,
)
from .pipeline import Index, corpus_fingerprint
from .providers import ProviderSuite
from .providers.prompts import build_rewrite_prompt
from .providers.types import cosine
from .textutil import canonicalize


@dataclass(frozen=True)
class TkpaConfig:
    """Chunk-scoring weights, rewrite budget, and attack goal.

    The optional substitutions table scripts the deterministic rewriter;
    remote generators rewrite freely from the goal alone.
    """

    attack_goal: str
    graph_weight: float = 0.5
    semantic_weight: float = 0.3
    attitude_weight: float = 0.2
    top_k_chunks: int = 3
    target_entity_override: str | None = None
    substitutions: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        weights = (self.graph_weight, self.semantic_weight, self.attitude_weight)
        if any(w < 0 for w in weights):
            raise DataError("scoring weights must be non-negative")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise DataError(f"scoring weights must sum to 1, got {sum(weights)}")
        if self.top_k_chunks < 1:
            raise DataError("top_k_chunks must be at least 1")
        if not self.attack_goal.strip():
            raise DataError("attack_goal must be non-empty")


@dataclass(frozen=True)
class VulnerabilityAssessment:
    community_id: int
    degree: int
    betweenness: float
    summary_words: int
    score: float


@dataclass(frozen=True)
class ChunkScore:
    chunk_id: str
    raw_graph: float
    raw_semantic: float
    raw_attitude: float
    norm_graph: float
    norm_semantic: float
    norm_attitude: float
    combined: float


@dataclass(frozen=True)
class AttackStats:
    words_modified: int
    total_words: int
    modification_ratio: float


@dataclass(frozen=True)
class AttackResult:
    edits: tuple[EditRecord, ...]
    poisoned_corpus: Corpus
    plan: dict
    stats: AttackStats


def vulnerability_score(degree: float, betweenness: float, summary_words: float) -> float:
    """(1 + degree) * (1 + betweenness) / ln(1 + summary length).

    Grows with the entity's local leverage and shrinks as the community
    summary gets longer (more narrative to displace per edit).
    """
    if degree < 0:
        raise DataError("degree must be non-negative")
    if not 0.0 <= betweenness <= 1.0:
        raise DataError("betweenness must lie in [0, 1]")
    if summary_words < 1:
        raise DataError("summary length must be at least 1 word")
    return (1.0 + degree) * (1.0 + betweenness) / math.log(1.0 + summary_words)


def target_entity(query: str, index: Index, generator, override: str | None = None) -> str:
    """First query entity whose canonical key exists in the graph."""
    if override is not None:
        return override
    for name in generator.query_entities(query):
        key = canonicalize(name)
        if key in index.graph.entities:
            return key
    raise TargetingError(f"no entity extracted from {query!r} matches the graph")


def assess_communities(index: Index, entity_key: str) -> list[VulnerabilityAssessment]:
    """Score every community containing the entity; empty summaries are skipped."""
    if entity_key not in index.graph.entities:
        raise DataError(f"unknown entity key: {entity_key}")
    containing = [c for c in index.communities if entity_key in c.member_keys]
    if not containing:
        raise DataError(f"entity {entity_key!r} belongs to no community")
    assessments = []
    for community in containing:
        summary = index.summary_for(community.id)
        if summary.length_words < 1:
            continue
        subgraph = induced_subgraph(index.graph, community.member_keys)
        degree = degree_centrality(subgraph, entity_key)
        betweenness = betweenness_centrality(subgraph, entity_key)
        assessments.append(
            VulnerabilityAssessment(
                community_id=community.id,
                degree=degree,
                betweenness=betweenness,
                summary_words=summary.length_words,
                score=vulnerability_score(degree, betweenness, summary.length_words),
            )
        )
    if not assessments:
        raise DataError(
            f"every community containing {entity_key!r} has an empty summary"
        )
    return assessments


def pick_best_assessment(assessments: list[VulnerabilityAssessment]) -> VulnerabilityAssessment:
    """Highest score wins; exact ties go to the lowest community id."""
    return sorted(assessments, key=lambda a: (-a.score, a.community_id))[0]


def select_vulnerable_community(
    index: Index, entity_key: str
) -> tuple[Community, list[VulnerabilityAssessment]]:
    assessments = assess_communities(index, entity_key)
    best = pick_best_assessment(assessments)
    community = next(c for c in index.communities if c.id == best.community_id)
    return community, assessments


def candidate_chunks(ego: KnowledgeGraph, corpus: Corpus) -> list[Chunk]:
    """Chunks backing any node or edge of the ego subgraph, sorted by id."""
    if ego.is_empty():
        raise DataError("ego subgraph is empty")
    chunk_ids: set[str] = set()
    for entity in ego.entities.values():
        chunk_ids.update(entity.source_chunk_ids)
    for relation in ego.relations.values():
        chunk_ids.update(relation.source_chunk_ids)
    chunk_map = corpus.chunk_map()
    missing = sorted(cid for cid in chunk_ids if cid not in chunk_map)
    if missing:
        raise DataError(f"index references chunks missing from the corpus: {missing}")
    return [chunk_map[cid] for cid in sorted(chunk_ids)]


def minmax_normalize(values: list[float]) -> list[float]:
    """Min-max to [0, 1]; a constant signal maps to 0.5 everywhere."""
    low, high = min(values), max(values)
    if high == low:
        return [0.5] * len(values)
    return [(v - low) / (high - low) for v in values]


def weighted_combination(weights: tuple[float, float, float], values: tuple[float, float, float]) -> float:
    return weights[0] * values[0] + weights[1] * values[1] + weights[2] * values[2]


def score_candidates(
    chunks: list[Chunk],
    ego: KnowledgeGraph,
    query: str,
    config: TkpaConfig,
    suite: ProviderSuite,
) -> list[ChunkScore]:
    """Rank candidate chunks by the weighted, per-signal-normalized score.

    The graph signal is the best ego PageRank among entities the chunk
    backs; the semantic signal is chunk-query cosine; the attitude signal
    is lexicon sentiment. Ties break toward the smaller chunk id.
    """
    if not chunks:
        raise DataError("no candidate chunks to score")
    ranks = pagerank(ego)
    query_vector = suite.embedder.embed(query)
    raw_graph: list[float] = []
    raw_semantic: list[float] = []
    raw_attitude: list[float] = []
    for chunk in chunks:
        backed = [
            ranks[key]
            for key, entity in ego.entities.items()
            if chunk.id in entity.source_chunk_ids
        ]
        raw_graph.append(max(backed) if backed else 0.0)
        raw_semantic.append(cosine(suite.embedder.embed(chunk.text), query_vector))
        raw_attitude.append(suite.sentiment.sentiment_score(chunk.text))
    norm_graph = minmax_normalize(raw_graph)
    norm_semantic = minmax_normalize(raw_semantic)
    norm_attitude = minmax_normalize(raw_attitude)
    weights = (config.graph_weight, config.semantic_weight, config.attitude_weight)
    scores = [
        ChunkScore(
            chunk_id=chunk.id,
            raw_graph=raw_graph[i],
            raw_semantic=raw_semantic[i],
            raw_attitude=raw_attitude[i],
            norm_graph=norm_graph[i],
            norm_semantic=norm_semantic[i],
            norm_attitude=norm_attitude[i],
            combined=weighted_combination(
                weights, (norm_graph[i], norm_semantic[i], norm_attitude[i])
            ),
        )
        for i, chunk in enumerate(chunks)
    ]
    return sorted(scores, key=lambda s: (-s.combined, s.chunk_id))


def rewrite_chunk(
    chunk: Chunk,
    attack_goal: str,
    target: str,
    generator,
    substitutions: dict[str, str] | None = None,
) -> str:
    """Minimal-edit rewrite supporting the goal; may decline (returns the
    original text, which the caller flags as a no-op)."""
    if not attack_goal.strip():
        raise DataError("attack_goal must be non-empty")
    prompt = build_rewrite_prompt(chunk.text, attack_goal, target, substitutions)
    rewritten = generator.generate(prompt)
    if not rewritten.strip():
        raise ProviderError(f"generator returned empty rewrite for chunk {chunk.id}")
    return rewritten


def _stage(label: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except RedgraphError as exc:
        raise type(exc)(f"[{label}] {exc}") from exc


def run_tkpa(
    corpus: Corpus,
    index: Index,
    query: str,
    config: TkpaConfig,
    suite: ProviderSuite,
) -> AttackResult:
    """Full targeted attack: locate, narrow, rank, rewrite, apply."""
    if corpus_fingerprint(corpus) != index.provenance:
        raise DataError("index fingerprint does not match the corpus; rebuild the index")
    entity_key = _stage(
        "targeting", target_entity, query, index, suite.generator, config.target_entity_override
    )
    community, assessments = _stage(
        "community-selection", select_vulnerable_community, index, entity_key
    )
    community_graph = induced_subgraph(index.graph, community.member_keys)
    ego = _stage("ego-extraction", ego_subgraph, community_graph, entity_key)
    candidates = _stage("candidate-chunks", candidate_chunks, ego, corpus)
    scores = _stage("chunk-scoring", score_candidates, candidates, ego, query, config, suite)

    chunk_map = corpus.chunk_map()
    attempted: list[str] = []
    no_ops: list[str] = []
    edits: list[EditRecord] = []
    for score in scores[: config.top_k_chunks]:
        chunk = chunk_map[score.chunk_id]
        attempted.append(chunk.id)
        rewritten = _stage(
            "rewrite",
            rewrite_chunk,
            chunk,
            config.attack_goal,
            entity_key,
            suite.generator,
            config.substitutions,
        )
        if rewritten == chunk.text:
            no_ops.append(chunk.id)
        else:
            edits.append(EditRecord.create(chunk.id, chunk.text, rewritten))

    poisoned = _stage("apply", apply_edits, corpus, edits)
    words_modified = sum(edit.words_changed for edit in edits)
    total_words = corpus.total_words()
    stats = AttackStats(words_modified, total_words, words_modified / total_words)
    plan = {
        "attack": "tkpa",
        "query": query,
        "target_entity": entity_key,
        "community_id": community.id,
        "assessments": [vars(a).copy() for a in assessments],
        "chunk_scores": [vars(s).copy() for s in scores],
        "attempted_chunk_ids": attempted,
        "no_op_chunk_ids": no_ops,
        "edited_chunk_ids": [edit.chunk_id for edit in edits],
    }
    return AttackResult(tuple(edits), poisoned, plan, stats)


def result_to_dict(result: AttackResult) -> dict:
    """JSON-ready view of an attack result, stable across reruns."""
    return {
        "edits": [
            {
                "chunk_id": e.chunk_id,
                "original_text": e.original_text,
                "modified_text": e.modified_text,
                "words_changed": e.words_changed,
            }
            for e in result.edits
        ],
        "plan": result.plan,
        "stats": {
            "words_modified": result.stats.words_modified,
            "total_words": result.stats.total_words,
            "modification_ratio": result.stats.modification_ratio,
        },
        "poisoned_fingerprint": corpus_fingerprint(result.poisoned_corpus),
    }
