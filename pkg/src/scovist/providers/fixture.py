"""Deterministic file-backed provider used for offline runs and tests."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from ..errors import NotFoundError, ParseError
from .base import GenerationParams

FIXTURE_KEYS = ("captions", "commonsense", "concepts", "embeddings", "stories")


class FixtureProvider:
    """Serves every capability from one JSON document::

        {"captions":    {image_ref: text},
         "commonsense": {head_text: {relation: [tails]}},
         "concepts":    {image_ref: [strings]},
         "embeddings":  {text: [reals]},
         "stories":     {serialized_storyline: story}}   # optional

    A lookup miss is always a NotFoundError, never a silent skip.
    """

    def __init__(self, data: dict):
        unknown = set(data) - set(FIXTURE_KEYS)
        if unknown:
            raise ParseError(f"unknown fixture sections: {sorted(unknown)}")
        self.captions: dict[str, str] = data.get("captions", {})
        self.tails: dict[str, dict[str, list[str]]] = data.get("commonsense", {})
        self.concept_lists: dict[str, list[str]] = data.get("concepts", {})
        self.vectors: dict[str, list[float]] = data.get("embeddings", {})
        self.stories: dict[str, str] = data.get("stories", {})

    @classmethod
    def load(cls, path: str | Path) -> FixtureProvider:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from exc
        if not isinstance(data, dict):
            raise ParseError(f"{path}: fixture must be a JSON object")
        return cls(data)

    def caption(self, image_ref: str) -> str:
        try:
            return self.captions[image_ref]
        except KeyError:
            raise NotFoundError(f"no fixture caption for image {image_ref!r}") from None

    def commonsense(self, head: str, relation: str, k: int) -> list[str]:
        try:
            return list(self.tails[head][relation][:k])
        except KeyError:
            raise NotFoundError(f"no fixture {relation} tails for head {head!r}") from None

    def concepts(self, image_ref: str, k: int) -> list[str]:
        try:
            return list(self.concept_lists[image_ref][:k])
        except KeyError:
            raise NotFoundError(f"no fixture concepts for image {image_ref!r}") from None

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        out = []
        for t in texts:
            if t not in self.vectors:
                raise NotFoundError(f"no fixture embedding for text {t!r}")
            out.append(self.vectors[t])
        return out

    def generate(self, storyline: str, params: GenerationParams, separator: str) -> str:
        try:
            return self.stories[storyline]
        except KeyError:
            raise NotFoundError("no fixture story for this storyline") from None
