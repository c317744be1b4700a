"""Provider contracts, parameter types and the shared validation layer."""

from __future__ import annotations

import threading
from collections import Counter
from dataclasses import dataclass
from typing import Protocol, Sequence

from ..errors import DimensionError, EmptyResponseError, UnknownRelationError
from ..graph import RELATIONS

CAPABILITIES = ("caption", "commonsense", "concepts", "embed", "generate")


@dataclass(frozen=True)
class GenerationParams:
    """Decoding settings forwarded to the story generator (nucleus sampling)."""

    nucleus_p: float = 0.9
    temperature: float = 0.9
    max_length: int = 256
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 < self.nucleus_p <= 1.0:
            raise ValueError(f"nucleus_p must be in (0, 1], got {self.nucleus_p}")
        if not self.temperature > 0.0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if self.max_length < 1:
            raise ValueError(f"max_length must be >= 1, got {self.max_length}")


@dataclass(frozen=True)
class ProviderEndpointConfig:
    base_url: str
    timeout: float = 30.0
    max_retries: int = 3
    max_in_flight: int = 4
    auth_token: str | None = None

    def __post_init__(self):
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")


class Captioner(Protocol):
    def caption(self, image_ref: str) -> str: ...


class CommonsenseModel(Protocol):
    def commonsense(self, head: str, relation: str, k: int) -> list[str]: ...


class ConceptDetector(Protocol):
    def concepts(self, image_ref: str, k: int) -> list[str]: ...


class Embedder(Protocol):
    def embed(self, texts: Sequence[str]) -> list[list[float]]: ...


class StoryGenerator(Protocol):
    def generate(self, storyline: str, params: GenerationParams, separator: str) -> str: ...


def _check_text(value, what: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise EmptyResponseError(f"empty {what}")
    return value


class ProviderHub:
    """Routes each capability to a backend and validates every result.

    All provider output enters the pipeline through this class: texts must be
    non-empty, list results are cut to ``k``, vectors must share one dimension.
    Embeddings are memoized per text so the same text always maps to the same
    vector within one hub. Call counts are kept per capability.
    """

    def __init__(self, caption, commonsense, concepts, embed, generate):
        self._backends = {
            "caption": caption,
            "commonsense": commonsense,
            "concepts": concepts,
            "embed": embed,
            "generate": generate,
        }
        self.calls: Counter = Counter()
        self._embed_cache: dict[str, tuple[float, ...]] = {}
        self._dim: int | None = None
        self._lock = threading.Lock()

    @classmethod
    def single(cls, backend) -> ProviderHub:
        return cls(backend, backend, backend, backend, backend)

    def _count(self, capability: str) -> None:
        with self._lock:
            self.calls[capability] += 1

    def caption(self, image_ref: str) -> str:
        self._count("caption")
        text = self._backends["caption"].caption(image_ref)
        return _check_text(text, f"caption for image {image_ref!r}")

    def commonsense(self, head: str, relation: str, k: int) -> list[str]:
        if relation not in RELATIONS:
            raise UnknownRelationError(f"relation {relation!r} not in {RELATIONS}")
        _check_text(head, "commonsense head")
        if k <= 0:
            return []
        self._count("commonsense")
        tails = self._backends["commonsense"].commonsense(head, relation, k)
        return [_check_text(t, f"{relation} tail for {head!r}") for t in list(tails)[:k]]

    def concepts(self, image_ref: str, k: int) -> list[str]:
        if k <= 0:
            return []
        self._count("concepts")
        found = self._backends["concepts"].concepts(image_ref, k)
        return [_check_text(c, f"concept for image {image_ref!r}") for c in list(found)[:k]]

    def embed(self, texts: Sequence[str]) -> list[tuple[float, ...]]:
        texts = [_check_text(t, "text to embed") for t in texts]
        missing = [t for t in dict.fromkeys(texts) if t not in self._embed_cache]
        if missing:
            self._count("embed")
            vectors = self._backends["embed"].embed(missing)
            if len(vectors) != len(missing):
                raise EmptyResponseError(f"embedder returned {len(vectors)} vectors for {len(missing)} texts")
            for text, vec in zip(missing, vectors):
                vec = tuple(float(x) for x in vec)
                if not vec:
                    raise EmptyResponseError(f"empty embedding for {text!r}")
                if self._dim is None:
                    self._dim = len(vec)
                elif len(vec) != self._dim:
                    raise DimensionError(f"embedding for {text!r} has dimension {len(vec)}, expected {self._dim}")
                self._embed_cache[text] = vec
        return [self._embed_cache[t] for t in texts]

    def generate(self, storyline: str, params: GenerationParams | None = None, separator: str = "</s>") -> str:
        if not isinstance(storyline, str) or not storyline.strip():
            raise ValueError("storyline must be non-empty")
        self._count("generate")
        story = self._backends["generate"].generate(storyline, params or GenerationParams(), separator)
        return _check_text(story, "generated story")

    def call_counts(self) -> dict[str, int]:
        return {c: self.calls.get(c, 0) for c in CAPABILITIES}
