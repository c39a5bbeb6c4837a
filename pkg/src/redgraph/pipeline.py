"""End-to-end indexing and query serving.

Indexing: extract a mini-graph per chunk, merge, detect communities,
summarize each community, embed each summary, and record a fingerprint of
the corpus the index was built from. Query serving ranks community
summaries by cosine similarity and answers from the top-k texts.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus
from .errors import DataError, ProviderError
from .kgraph import (
    Community,
    KnowledgeGraph,
    detect_communities,
    induced_subgraph,
    load_graph,
    merge,
    save_graph,
)
from .providers import ProviderSuite
from .providers.prompts import build_answer_prompt, build_summary_prompt
from .providers.types import EmbeddingVector, cosine
from .textutil import word_count


@dataclass(frozen=True)
class CommunitySummary:
    community_id: int
    text: str
    embedding: EmbeddingVector
    length_words: int


@dataclass(frozen=True)
class Index:
    graph: KnowledgeGraph
    communities: tuple[Community, ...]
    summaries: tuple[CommunitySummary, ...]
    provenance: str

    def summary_for(self, community_id: int) -> CommunitySummary:
        for summary in self.summaries:
            if summary.community_id == community_id:
                return summary
        raise DataError(f"no summary for community {community_id}")


@dataclass(frozen=True)
class Answer:
    query: str
    context_community_ids: tuple[int, ...]
    text: str


def corpus_fingerprint(corpus: Corpus) -> str:
    digest = hashlib.sha256()
    for chunk in corpus.chunks:
        digest.update(chunk.text.encode("utf-8"))
        digest.update(b"\x1f")
    return digest.hexdigest()


def summarize_community(
    community: Community,
    graph: KnowledgeGraph,
    generator,
    embedder,
) -> CommunitySummary:
    """Generate and embed one community summary.

    The prompt lists member names, their descriptions, and intra-community
    relation descriptions in sorted order, so remote-mode prompts are
    stable across rebuilds.
    """
    missing = [key for key in community.member_keys if key not in graph.entities]
    if missing:
        raise DataError(f"community {community.id} members missing from graph: {missing}")
    subgraph = induced_subgraph(graph, community.member_keys)
    entity_lines = [
        f"{ent.display_name} :: {' '.join(ent.descriptions)}".rstrip(" :")
        for ent in (subgraph.entities[key] for key in subgraph.node_keys())
    ]
    relation_descriptions = sorted(
        {
            description
            for rel in subgraph.relations.values()
            for description in rel.descriptions
        }
    )
    prompt = build_summary_prompt(sorted(entity_lines), relation_descriptions)
    text = generator.generate(prompt)
    if not text.strip():
        raise ProviderError(f"empty summary generated for community {community.id}")
    return CommunitySummary(
        community_id=community.id,
        text=text,
        embedding=embedder.embed(text),
        length_words=word_count(text),
    )


def build_index(corpus: Corpus, suite: ProviderSuite, jobs: int = 1) -> Index:
    """Index a corpus; deterministic given deterministic providers.

    Per-chunk extraction and per-community summarization may run on a
    thread pool; results are assembled in sorted order either way.
    """
    if not corpus.chunks:
        raise DataError("cannot index an empty corpus")
    chunks = sorted(corpus.chunks, key=lambda c: c.id)

    def extract(chunk):
        try:
            return suite.extractor.extract_graph(chunk)
        except ProviderError as exc:
            raise ProviderError(f"extraction failed for chunk {chunk.id}: {exc}") from exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            minigraphs = list(pool.map(extract, chunks))
    else:
        minigraphs = [extract(chunk) for chunk in chunks]

    graph = merge(minigraphs)
    if graph.is_empty():
        return Index(graph, (), (), corpus_fingerprint(corpus))
    communities = tuple(detect_communities(graph))

    def summarize(community):
        return summarize_community(community, graph, suite.generator, suite.embedder)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            summaries = tuple(pool.map(summarize, communities))
    else:
        summaries = tuple(summarize(community) for community in communities)

    return Index(graph, communities, summaries, corpus_fingerprint(corpus))


def retrieve(query: str, index: Index, top_k: int, embedder) -> list[CommunitySummary]:
    """Top-k summaries by cosine similarity, ties broken by community id."""
    if not index.summaries:
        raise DataError("index has no summaries to retrieve from")
    if top_k < 1:
        raise DataError("top_k must be at least 1")
    query_vector = embedder.embed(query)
    ranked = sorted(
        index.summaries,
        key=lambda s: (-cosine(query_vector, s.embedding), s.community_id),
    )
    return ranked[:top_k]


def answer(query: str, retrieved: list[CommunitySummary], generator) -> Answer:
    """Generate an answer over the retrieved summaries in rank order."""
    if not retrieved:
        raise DataError("cannot answer with no retrieved context")
    prompt = build_answer_prompt(query, [summary.text for summary in retrieved])
    text = generator.generate(prompt)
    return Answer(
        query=query,
        context_community_ids=tuple(summary.community_id for summary in retrieved),
        text=text,
    )


# --- persistence ---------------------------------------------------------------

def save_index(index: Index, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_graph(index.graph, directory / "graph.jsonl")
    with open(directory / "communities.jsonl", "w", encoding="utf-8") as fh:
        for community in index.communities:
            fh.write(
                json.dumps(
                    {"id": community.id, "member_keys": sorted(community.member_keys)},
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
    with open(directory / "summaries.jsonl", "w", encoding="utf-8") as fh:
        for summary in index.summaries:
            fh.write(
                json.dumps(
                    {
                        "community_id": summary.community_id,
                        "text": summary.text,
                        "embedding": list(summary.embedding.values),
                        "length_words": summary.length_words,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
    with open(directory / "meta.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"fingerprint": index.provenance}, sort_keys=True) + "\n")
    return directory


def load_index(directory: str | Path) -> Index:
    directory = Path(directory)
    try:
        meta = json.loads((directory / "meta.json").read_text(encoding="utf-8"))
        graph = load_graph(directory / "graph.jsonl")
        communities = []
        with open(directory / "communities.jsonl", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    communities.append(Community(rec["id"], frozenset(rec["member_keys"])))
        summaries = []
        with open(directory / "summaries.jsonl", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    summaries.append(
                        CommunitySummary(
                            community_id=rec["community_id"],
                            text=rec["text"],
                            embedding=EmbeddingVector(tuple(rec["embedding"])),
                            length_words=rec["length_words"],
                        )
                    )
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot load index from {directory}: {exc}") from exc
    return Index(graph, tuple(communities), tuple(summaries), meta["fingerprint"])
