"""HTTP provider family for chat-completion and embedding services.

Speaks the common chat-completions/embeddings JSON shapes (documented in
the README). Requests retry with exponential backoff on transport errors,
429, and 5xx responses; an in-flight semaphore caps concurrency so the
provider can be shared across worker threads. Results never depend on
arrival order.
"""

from __future__ import annotations

import logging
import os
import threading
import time

import requests

from ..errors import ProviderError
from ..textutil import canonicalize
from .ngram import NgramLanguageModel
from .prompts import (
    build_coref_prompt,
    build_extract_prompt,
    build_query_entities_prompt,
    build_sentiment_prompt,
)
from .types import (
    CoreferenceChain,
    EmbeddingVector,
    EntityMention,
    MiniGraph,
    ProviderConfig,
    RelationMention,
)

logger = logging.getLogger(__name__)

RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class RemoteProvider:
    def __init__(
        self,
        config: ProviderConfig,
        session: requests.Session | None = None,
        backoff_base: float = 0.5,
        language_model: NgramLanguageModel | None = None,
    ):
        if config.mode != "remote":
            raise ProviderError("RemoteProvider requires a remote-mode config")
        self.config = config
        self.session = session or requests.Session()
        self.backoff_base = backoff_base
        self.language_model = language_model
        self._gate = threading.Semaphore(config.max_in_flight)
        self.embedding_dimension = config.embedding_dimension

    # --- transport ------------------------------------------------------------

    def _api_key(self) -> str:
        key = os.environ.get(self.config.api_key_env, "")
        if not key:
            raise ProviderError(
                f"API key environment variable {self.config.api_key_env!r} is not set"
            )
        return key

    def _post(self, path: str, payload: dict) -> dict:
        url = self.config.endpoint_url.rstrip("/") + path
        headers = {"Authorization": f"Bearer {self._api_key()}"}
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_base * (2 ** (attempt - 1)))
            try:
                with self._gate:
                    response = self.session.post(
                        url, json=payload, headers=headers, timeout=self.config.request_timeout
                    )
            except requests.RequestException as exc:
                last_error = exc
                logger.warning("request to %s failed (attempt %d): %s", url, attempt + 1, exc)
                continue
            if response.status_code in RETRYABLE_STATUS:
                last_error = ProviderError(f"{url} returned {response.status_code}")
                logger.warning("retryable status %d from %s", response.status_code, url)
                continue
            if response.status_code != 200:
                raise ProviderError(f"{url} returned {response.status_code}: {response.text[:200]}")
            try:
                return response.json()
            except ValueError as exc:
                raise ProviderError(f"{url} returned non-JSON body") from exc
        raise ProviderError(
            f"request to {url} failed after {self.config.max_retries + 1} attempts: {last_error}"
        )

    # --- capabilities -----------------------------------------------------------

    def generate(self, prompt: str, temperature: float = 0.0, max_tokens: int | None = None) -> str:
        if not prompt.strip():
            raise ProviderError("empty prompt")
        payload = {
            "model": self.config.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
        }
        if max_tokens is not None:
            payload["max_tokens"] = max_tokens
        body = self._post("/chat/completions", payload)
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError("malformed chat-completion response") from exc
        if not isinstance(content, str):
            raise ProviderError("chat-completion content is not text")
        return content

    def embed(self, text: str) -> EmbeddingVector:
        body = self._post("/embeddings", {"model": self.config.model_id, "input": [text]})
        try:
            raw = body["data"][0]["embedding"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError("malformed embedding response") from exc
        vector = EmbeddingVector.from_raw(raw)
        if vector.dimension != self.config.embedding_dimension:
            raise ProviderError(
                f"embedding dimension {vector.dimension} does not match configured "
                f"{self.config.embedding_dimension}"
            )
        return vector

    def extract_graph(self, chunk) -> MiniGraph:
        """Prompted triple extraction; malformed lines are skipped and counted."""
        if not chunk.text.strip():
            raise ProviderError(f"cannot extract from empty chunk {chunk.id}")
        reply = self.generate(build_extract_prompt(chunk.text))
        entities: set[EntityMention] = set()
        relations: list[tuple[str, str, str, float]] = []
        skipped = 0
        for line in reply.splitlines():
            line = line.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split("|")]
            if parts[0] == "entity" and len(parts) == 4 and parts[1]:
                entities.add(EntityMention(parts[1], parts[2] or "UNKNOWN", parts[3], chunk.id))
            elif parts[0] == "relation" and len(parts) == 5:
                try:
                    weight = float(parts[4])
                except ValueError:
                    skipped += 1
                    continue
                if parts[1] and parts[2] and weight > 0:
                    relations.append((parts[1], parts[2], parts[3], weight))
                else:
                    skipped += 1
            else:
                skipped += 1
        known = {canonicalize(e.name) for e in entities}
        kept: set[RelationMention] = set()
        for source, target, description, weight in relations:
            if canonicalize(source) in known and canonicalize(target) in known:
                kept.add(RelationMention(source, target, description, weight, chunk.id))
            else:
                skipped += 1
        if skipped:
            logger.warning("extraction for chunk %s skipped %d malformed lines", chunk.id, skipped)
        return MiniGraph(frozenset(entities), frozenset(kept))

    def coref_chains(self, chunk) -> list[CoreferenceChain]:
        """Prompted chain extraction; chains with bad spans are dropped."""
        reply = self.generate(build_coref_prompt(chunk.text))
        grouped: dict[str, tuple[str, list[tuple[str, tuple[int, int]]]]] = {}
        order: list[str] = []
        for line in reply.splitlines():
            parts = [p.strip() for p in line.strip().split("|")]
            if len(parts) != 5 or parts[0] != "chain":
                continue
            _, entity, mention, start_s, end_s = parts
            try:
                start, end = int(start_s), int(end_s)
            except ValueError:
                continue
            if not (0 <= start < end <= len(chunk.text)):
                continue
            if chunk.text[start:end] != mention:
                continue
            key = canonicalize(entity)
            if key not in grouped:
                grouped[key] = (entity, [])
                order.append(key)
            grouped[key][1].append((mention, (start, end)))
        return [
            CoreferenceChain(grouped[key][0], tuple(sorted(grouped[key][1], key=lambda m: m[1])))
            for key in order
            if grouped[key][1]
        ]

    def sentiment_score(self, text: str) -> float:
        reply = self.generate(build_sentiment_prompt(text))
        try:
            value = float(reply.strip().split()[0])
        except (ValueError, IndexError) as exc:
            raise ProviderError(f"sentiment reply is not a number: {reply[:80]!r}") from exc
        return max(0.0, min(1.0, value))

    def perplexity(self, text: str) -> float:
        """Score via a logprobs endpoint; falls back to a fitted local model."""
        if not text.split():
            raise ProviderError("perplexity of empty text is undefined")
        if self.language_model is not None:
            return self.language_model.perplexity(text)
        body = self._post("/logprobs", {"model": self.config.model_id, "input": text})
        try:
            logprobs = [float(v) for v in body["token_logprobs"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError("malformed logprobs response") from exc
        if not logprobs:
            raise ProviderError("scoring endpoint returned no token logprobs")
        import math

        return math.exp(-sum(logprobs) / len(logprobs))

    def query_entities(self, question: str) -> list[str]:
        reply = self.generate(build_query_entities_prompt(question))
        seen: set[str] = set()
        names: list[str] = []
        for line in reply.splitlines():
            name = line.strip().lstrip("-• ").strip()
            if not name:
                continue
            key = canonicalize(name)
            if key not in seen:
                seen.add(key)
                names.append(name)
        return names
