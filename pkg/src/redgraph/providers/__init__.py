"""Pluggable model capabilities: deterministic rules or remote HTTP services."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .deterministic import DeterministicProvider
from .ngram import NgramLanguageModel
from .remote import RemoteProvider
from .types import (
    CoreferenceChain,
    EmbeddingVector,
    EntityMention,
    MiniGraph,
    ProviderConfig,
    RelationMention,
    cosine,
)

__all__ = [
    "CoreferenceChain",
    "DeterministicProvider",
    "EmbeddingVector",
    "EntityMention",
    "MiniGraph",
    "NgramLanguageModel",
    "ProviderConfig",
    "ProviderSuite",
    "RelationMention",
    "RemoteProvider",
    "cosine",
]


@dataclass(frozen=True)
class ProviderSuite:
    """Providers assigned per role; roles may share one instance.

    Deterministic providers are stateless after construction and safe to
    share across threads.
    """

    extractor: Any
    embedder: Any
    generator: Any
    judge: Any
    coref: Any
    sentiment: Any

    @classmethod
    def deterministic(
        cls,
        embedding_dimension: int = 256,
        language_model: NgramLanguageModel | None = None,
    ) -> "ProviderSuite":
        provider = DeterministicProvider(embedding_dimension, language_model)
        return cls(provider, provider, provider, provider, provider, provider)
