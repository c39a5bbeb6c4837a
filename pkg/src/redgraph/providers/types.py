"""Value types shared by every provider family."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, ProviderError
from ..textutil import canonicalize


@dataclass(frozen=True)
class EntityMention:
    """One entity occurrence extracted from a chunk."""

    name: str
    type_label: str
    description: str
    source_chunk_id: str


@dataclass(frozen=True)
class RelationMention:
    """One relation occurrence; endpoints name entities in the same mini-graph."""

    source: str
    target: str
    description: str
    weight: float
    source_chunk_id: str


@dataclass(frozen=True)
class MiniGraph:
    """Per-chunk extraction output before merging."""

    entities: frozenset[EntityMention]
    relations: frozenset[RelationMention]

    def __post_init__(self):
        names = {canonicalize(e.name) for e in self.entities}
        for rel in self.relations:
            if rel.weight <= 0:
                raise ProviderError(f"relation weight must be positive: {rel}")
            if canonicalize(rel.source) not in names or canonicalize(rel.target) not in names:
                raise ProviderError(f"relation endpoint missing from entities: {rel}")

    @classmethod
    def empty(cls) -> "MiniGraph":
        return cls(frozenset(), frozenset())


@dataclass(frozen=True)
class EmbeddingVector:
    """L2-normalized dense vector; dimension is fixed per provider."""

    values: tuple[float, ...]

    @classmethod
    def from_raw(cls, raw) -> "EmbeddingVector":
        arr = np.asarray(raw, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ProviderError("embedding must be a non-empty 1-d vector")
        if not np.all(np.isfinite(arr)):
            raise ProviderError("embedding contains non-finite values")
        norm = float(np.linalg.norm(arr))
        if norm <= 1e-12:
            raise ProviderError("embedding has zero norm")
        return cls(tuple(float(v) for v in arr / norm))

    @property
    def dimension(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity of two normalized vectors, clamped to [-1, 1]."""
    value = float(np.dot(a.as_array(), b.as_array()))
    return max(-1.0, min(1.0, value))


@dataclass(frozen=True)
class CoreferenceChain:
    """A canonical mention and the referring expressions that point at it."""

    entity_mention: str
    referring_mentions: tuple[tuple[str, tuple[int, int]], ...]

    def __post_init__(self):
        if not self.referring_mentions:
            raise ProviderError("coreference chain has no referring mentions")


@dataclass(frozen=True)
class ProviderConfig:
    """Settings for one provider role.

    API keys are read from the environment variable named by api_key_env
    and never stored in configuration files.
    """

    mode: str = "deterministic"
    endpoint_url: str = ""
    model_id: str = "gpt-4o-mini"
    api_key_env: str = ""
    embedding_dimension: int = 256
    request_timeout: float = 30.0
    max_retries: int = 3
    max_in_flight: int = 4

    def __post_init__(self):
        if self.mode not in ("deterministic", "remote"):
            raise ConfigError(f"unknown provider mode: {self.mode!r}")
        if self.embedding_dimension <= 0:
            raise ConfigError("embedding_dimension must be positive")
        if self.mode == "remote" and (not self.endpoint_url or not self.api_key_env):
            raise ConfigError("remote mode requires endpoint_url and api_key_env")


DEFAULT_EMBED_MODEL = "bge-m3"
DEFAULT_CHAT_MODEL = "gpt-4o-mini"
