"""Knowledge graph model, merge, communities, centralities, and diffing.

The graph is undirected and weighted. Everything here is deterministic:
merge output is independent of input order, community detection visits
nodes in sorted key order with fixed tie-breaking, and serialization is
byte-stable for a given graph.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError
from .providers.types import MiniGraph
from .textutil import canonicalize


@dataclass(frozen=True)
class Entity:
    key: str
    display_name: str
    type_label: str
    descriptions: tuple[str, ...]
    source_chunk_ids: frozenset[str]


@dataclass(frozen=True)
class Relation:
    endpoints: tuple[str, str]
    descriptions: tuple[str, ...]
    weight: float
    source_chunk_ids: frozenset[str]


@dataclass(frozen=True)
class Community:
    id: int
    member_keys: frozenset[str]


@dataclass(frozen=True)
class GraphDiffMetrics:
    node_retention: float
    edge_retention: float
    node_jaccard: float
    edge_jaccard: float
    node_counts: tuple[int, int]
    edge_counts: tuple[int, int]


@dataclass(frozen=True)
class KnowledgeGraph:
    entities: dict[str, Entity]
    relations: dict[tuple[str, str], Relation]

    def node_keys(self) -> list[str]:
        return sorted(self.entities)

    def edge_keys(self) -> list[tuple[str, str]]:
        return sorted(self.relations)

    def neighbors(self, key: str) -> list[str]:
        found = []
        for a, b in self.relations:
            if a == key:
                found.append(b)
            elif b == key:
                found.append(a)
        return sorted(found)

    def adjacency(self) -> dict[str, dict[str, float]]:
        adj: dict[str, dict[str, float]] = {key: {} for key in self.entities}
        for (a, b), rel in self.relations.items():
            adj[a][b] = rel.weight
            adj[b][a] = rel.weight
        return adj

    def is_empty(self) -> bool:
        return not self.entities


def merge(minigraphs: list[MiniGraph]) -> KnowledgeGraph:
    """Union of per-chunk mini-graphs; independent of input order.

    Entities unify on the canonical key, relations on the unordered pair of
    endpoint keys with weights summed. Self-loops (distinct surface forms
    of one entity) are dropped.
    """
    surfaces: dict[str, set[str]] = defaultdict(set)
    types: dict[str, set[str]] = defaultdict(set)
    descriptions: dict[str, set[str]] = defaultdict(set)
    chunk_ids: dict[str, set[str]] = defaultdict(set)
    for graph in minigraphs:
        for mention in graph.entities:
            key = canonicalize(mention.name)
            surfaces[key].add(mention.name)
            types[key].add(mention.type_label)
            if mention.description:
                descriptions[key].add(mention.description)
            chunk_ids[key].add(mention.source_chunk_id)

    entities = {
        key: Entity(
            key=key,
            display_name=min(surfaces[key]),
            type_label=min(types[key]),
            descriptions=tuple(sorted(descriptions[key])),
            source_chunk_ids=frozenset(chunk_ids[key]),
        )
        for key in surfaces
    }

    rel_weights: dict[tuple[str, str], list[float]] = defaultdict(list)
    rel_descriptions: dict[tuple[str, str], set[str]] = defaultdict(set)
    rel_chunks: dict[tuple[str, str], set[str]] = defaultdict(set)
    for graph in minigraphs:
        for mention in graph.relations:
            key_a = canonicalize(mention.source)
            key_b = canonicalize(mention.target)
            if key_a == key_b:
                continue
            pair = (key_a, key_b) if key_a < key_b else (key_b, key_a)
            rel_weights[pair].append(mention.weight)
            if mention.description:
                rel_descriptions[pair].add(mention.description)
            rel_chunks[pair].add(mention.source_chunk_id)

    relations = {
        pair: Relation(
            endpoints=pair,
            descriptions=tuple(sorted(rel_descriptions[pair])),
            # contributions are summed in sorted order so the float result
            # does not depend on input order
            weight=sum(sorted(rel_weights[pair])),
            source_chunk_ids=frozenset(rel_chunks[pair]),
        )
        for pair in rel_weights
    }
    return KnowledgeGraph(entities, relations)


# --- community detection --------------------------------------------------------

def detect_communities(graph: KnowledgeGraph) -> list[Community]:
    """Single-level Louvain with deterministic order and tie-breaking.

    Nodes are visited in sorted key order; a move ties break toward the
    lowest community id. Isolated nodes stay in singleton communities.
    Community ids are re-labeled densely by smallest member key.
    """
    if graph.is_empty():
        raise DataError("cannot detect communities in an empty graph")
    nodes = graph.node_keys()
    adjacency = graph.adjacency()
    total_weight = sum(rel.weight for rel in graph.relations.values())

    community_of = {node: index for index, node in enumerate(nodes)}
    if total_weight > 0:
        strength = {
            node: sum(adjacency[node].values()) for node in nodes
        }
        community_total = {index: strength[node] for index, node in enumerate(nodes)}
        m = total_weight
        changed = True
        while changed:
            changed = False
            for node in nodes:
                current = community_of[node]
                k_i = strength[node]
                community_total[current] -= k_i
                link_to: dict[int, float] = defaultdict(float)
                for neighbor, weight in adjacency[node].items():
                    link_to[community_of[neighbor]] += weight
                candidates = sorted(set(link_to) | {current})
                best_community = current
                best_gain = None
                for candidate in candidates:
                    gain = link_to.get(candidate, 0.0) / m - (
                        community_total[candidate] * k_i
                    ) / (2.0 * m * m)
                    if best_gain is None or gain > best_gain or (
                        gain == best_gain and candidate < best_community
                    ):
                        best_gain = gain
                        best_community = candidate
                community_total[best_community] += k_i
                if best_community != current:
                    community_of[node] = best_community
                    changed = True

    members: dict[int, set[str]] = defaultdict(set)
    for node, community in community_of.items():
        members[community].add(node)
    ordered = sorted(members.values(), key=min)
    return [Community(index, frozenset(keys)) for index, keys in enumerate(ordered)]


# --- centralities ------------------------------------------------------------------

def degree_centrality(graph: KnowledgeGraph, key: str) -> int:
    """Number of incident relations (unweighted)."""
    if key not in graph.entities:
        raise DataError(f"unknown entity key: {key}")
    return len(graph.neighbors(key))


def betweenness_centralities(graph: KnowledgeGraph) -> dict[str, float]:
    """Brandes betweenness on the unweighted undirected view.

    Normalized by (n-1)(n-2)/2; zero for graphs with fewer than 3 nodes.
    """
    nodes = graph.node_keys()
    n = len(nodes)
    adjacency = {node: graph.neighbors(node) for node in nodes}
    betweenness = dict.fromkeys(nodes, 0.0)
    for source in nodes:
        stack: list[str] = []
        predecessors: dict[str, list[str]] = {node: [] for node in nodes}
        sigma = dict.fromkeys(nodes, 0.0)
        sigma[source] = 1.0
        distance = {source: 0}
        queue = [source]
        while queue:
            node = queue.pop(0)
            stack.append(node)
            for neighbor in adjacency[node]:
                if neighbor not in distance:
                    distance[neighbor] = distance[node] + 1
                    queue.append(neighbor)
                if distance[neighbor] == distance[node] + 1:
                    sigma[neighbor] += sigma[node]
                    predecessors[neighbor].append(node)
        delta = dict.fromkeys(nodes, 0.0)
        while stack:
            node = stack.pop()
            for predecessor in predecessors[node]:
                delta[predecessor] += sigma[predecessor] / sigma[node] * (1.0 + delta[node])
            if node != source:
                betweenness[node] += delta[node]
    if n < 3:
        return dict.fromkeys(nodes, 0.0)
    scale = (n - 1) * (n - 2)  # undirected: each pair counted twice
    return {node: value / scale for node, value in betweenness.items()}


def betweenness_centrality(graph: KnowledgeGraph, key: str) -> float:
    if key not in graph.entities:
        raise DataError(f"unknown entity key: {key}")
    return betweenness_centralities(graph)[key]


def pagerank(
    graph: KnowledgeGraph,
    damping: float = 0.85,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> dict[str, float]:
    """Weighted PageRank with uniform teleport by power iteration.

    Iterates until the L1 change drops below tol or max_iter passes. The
    scores sum to 1; mass at isolated nodes is redistributed uniformly.
    """
    if graph.is_empty():
        raise DataError("cannot rank an empty graph")
    nodes = graph.node_keys()
    n = len(nodes)
    adjacency = graph.adjacency()
    out_weight = {node: sum(adjacency[node].values()) for node in nodes}
    rank = dict.fromkeys(nodes, 1.0 / n)
    for _ in range(max_iter):
        dangling = sum(rank[node] for node in nodes if out_weight[node] == 0.0)
        base = (1.0 - damping) / n + damping * dangling / n
        next_rank = dict.fromkeys(nodes, base)
        for node in nodes:
            if out_weight[node] == 0.0:
                continue
            share = damping * rank[node] / out_weight[node]
            for neighbor, weight in adjacency[node].items():
                next_rank[neighbor] += share * weight
        change = sum(abs(next_rank[node] - rank[node]) for node in nodes)
        rank = next_rank
        if change < tol:
            break
    return rank


# --- subgraphs ------------------------------------------------------------------

def induced_subgraph(graph: KnowledgeGraph, keys) -> KnowledgeGraph:
    keep = set(keys)
    entities = {key: ent for key, ent in graph.entities.items() if key in keep}
    relations = {
        pair: rel
        for pair, rel in graph.relations.items()
        if pair[0] in keep and pair[1] in keep
    }
    return KnowledgeGraph(entities, relations)


def ego_subgraph(graph: KnowledgeGraph, key: str) -> KnowledgeGraph:
    """The node, its one-hop neighbors, and all edges among them."""
    if key not in graph.entities:
        raise DataError(f"unknown entity key: {key}")
    return induced_subgraph(graph, {key, *graph.neighbors(key)})


# --- graph comparison -------------------------------------------------------------

def _ratio(numerator: int, denominator: int, both_empty: bool) -> float:
    if denominator == 0:
        return 1.0 if both_empty else 0.0
    return numerator / denominator


def diff_metrics(clean: KnowledgeGraph, poisoned: KnowledgeGraph) -> GraphDiffMetrics:
    """Retention (clean-graph denominator) and Jaccard overlap of node and
    edge sets, matched by canonical key only."""
    clean_nodes = set(clean.entities)
    poisoned_nodes = set(poisoned.entities)
    clean_edges = set(clean.relations)
    poisoned_edges = set(poisoned.relations)
    nodes_both_empty = not clean_nodes and not poisoned_nodes
    edges_both_empty = not clean_edges and not poisoned_edges
    return GraphDiffMetrics(
        node_retention=_ratio(len(clean_nodes & poisoned_nodes), len(clean_nodes), nodes_both_empty),
        edge_retention=_ratio(len(clean_edges & poisoned_edges), len(clean_edges), edges_both_empty),
        node_jaccard=_ratio(
            len(clean_nodes & poisoned_nodes), len(clean_nodes | poisoned_nodes), nodes_both_empty
        ),
        edge_jaccard=_ratio(
            len(clean_edges & poisoned_edges), len(clean_edges | poisoned_edges), edges_both_empty
        ),
        node_counts=(len(clean_nodes), len(poisoned_nodes)),
        edge_counts=(len(clean_edges), len(poisoned_edges)),
    )


# --- serialization ------------------------------------------------------------------

def save_graph(graph: KnowledgeGraph, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for key in graph.node_keys():
            ent = graph.entities[key]
            fh.write(
                json.dumps(
                    {
                        "record": "node",
                        "key": ent.key,
                        "display_name": ent.display_name,
                        "type_label": ent.type_label,
                        "descriptions": list(ent.descriptions),
                        "chunk_ids": sorted(ent.source_chunk_ids),
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
        for pair in graph.edge_keys():
            rel = graph.relations[pair]
            fh.write(
                json.dumps(
                    {
                        "record": "edge",
                        "endpoints": list(pair),
                        "weight": rel.weight,
                        "descriptions": list(rel.descriptions),
                        "chunk_ids": sorted(rel.source_chunk_ids),
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
    return path


def load_graph(path: str | Path) -> KnowledgeGraph:
    entities: dict[str, Entity] = {}
    relations: dict[tuple[str, str], Relation] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                if rec["record"] == "node":
                    entities[rec["key"]] = Entity(
                        key=rec["key"],
                        display_name=rec["display_name"],
                        type_label=rec["type_label"],
                        descriptions=tuple(rec["descriptions"]),
                        source_chunk_ids=frozenset(rec["chunk_ids"]),
                    )
                elif rec["record"] == "edge":
                    pair = (rec["endpoints"][0], rec["endpoints"][1])
                    relations[pair] = Relation(
                        endpoints=pair,
                        descriptions=tuple(rec["descriptions"]),
                        weight=rec["weight"],
                        source_chunk_ids=frozenset(rec["chunk_ids"]),
                    )
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot load graph from {path}: {exc}") from exc
    return KnowledgeGraph(entities, relations)
