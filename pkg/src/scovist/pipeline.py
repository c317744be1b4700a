"""Configuration, stage functions and end-to-end orchestration.

Every stage reads and writes plain JSON files under
``<output_dir>/<sequence_id>/``; the command-line subcommands call the same
stage functions, so running them one by one produces the same bytes as a
single ``pipeline`` run.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import ConfigError, ParseError, ScoVistError, StageError
from .graph import StoryGraph, dumps_json, export_graph, import_graph
from .nodes import (
    PhotoSequenceRecord,
    build_caption_nodes,
    build_commonsense_nodes,
    build_theme_nodes,
    dedup_commonsense,
    nodes_from_dict,
    nodes_to_dict,
    wire_story_graph,
)
from .providers import (
    CAPABILITIES,
    FixtureProvider,
    GenerationParams,
    HttpProvider,
    ProviderEndpointConfig,
    ProviderHub,
)
from .storyline import plan_storyline, storyline_to_dict
from .weighting import WeightingStrategy, assign_weights, import_learned_embeddings, read_corpus

log = logging.getLogger(__name__)

ENV_PREFIX = "SCOVIST_"

ARTIFACTS = {
    "graph": "graph.json",
    "weighted_graph": "weighted.json",
    "storyline": "storyline.json",
    "story": "story.json",
}
NODES_FILE = "nodes.json"
MANIFEST_FILE = "manifest.json"
TIMINGS_FILE = "timings.json"

# never written to the manifest snapshot
_UNSNAPSHOTTED = ("auth_token", "output_dir")


@dataclass
class PipelineConfig:
    """Flat run configuration; every field is a JSON key and a SCOVIST_<KEY> env var."""

    dedup_threshold: float = 0.50
    commonsense_per_relation: int = 5
    theme_concepts: int = 20
    dummy_weight: float = -99.0
    separator: str = "</s>"
    strategy: str = "cosine"
    corpus_path: str | None = None
    drop_stopwords: bool = False
    embeddings_path: str | None = None
    record_path: str | None = None
    fixtures_path: str | None = None
    provider_url: str | None = None
    caption_url: str | None = None
    commonsense_url: str | None = None
    concepts_url: str | None = None
    embed_url: str | None = None
    generate_url: str | None = None
    timeout: float = 30.0
    max_retries: int = 3
    max_in_flight: int = 4
    auth_token: str | None = None
    nucleus_p: float = 0.9
    temperature: float = 0.9
    max_length: int = 256
    seed: int | None = None
    output_dir: str = "runs"

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def from_dict(cls, data: Mapping) -> PipelineConfig:
        unknown = set(data) - set(cls.keys())
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        return cls().updated(data)

    def updated(self, values: Mapping) -> PipelineConfig:
        """Copy with ``values`` applied; strings are coerced to each field's type."""
        types = {f.name: f.type for f in dataclasses.fields(self)}
        out = {}
        for key, value in values.items():
            if key not in types:
                raise ConfigError(f"unknown configuration key {key!r}")
            out[key] = _coerce(key, types[key], value)
        return dataclasses.replace(self, **out)

    def with_env(self, environ: Mapping[str, str] | None = None) -> PipelineConfig:
        environ = os.environ if environ is None else environ
        values = {}
        for key in self.keys():
            name = ENV_PREFIX + key.upper()
            if name in environ:
                values[key] = environ[name]
        return self.updated(values)

    @classmethod
    def load(cls, path: str | Path | None = None, environ: Mapping[str, str] | None = None) -> PipelineConfig:
        config = cls()
        if path is not None:
            try:
                data = json.loads(Path(path).read_text(encoding="utf-8"))
            except FileNotFoundError:
                raise ConfigError(f"config file {path} not found") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None
            if not isinstance(data, dict):
                raise ConfigError(f"{path}: config must be a JSON object")
            config = cls.from_dict(data)
        return config.with_env(environ)

    def snapshot(self) -> dict:
        return {k: v for k, v in sorted(dataclasses.asdict(self).items()) if k not in _UNSNAPSHOTTED}

    def generation(self) -> GenerationParams:
        try:
            return GenerationParams(self.nucleus_p, self.temperature, self.max_length, self.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def endpoint(self, capability: str) -> str | None:
        """Per-capability URL, else the shared provider_url; None means fixtures."""
        return getattr(self, f"{capability}_url") or self.provider_url

    def validate(self, need_providers: bool = True) -> None:
        if not 0.0 < self.dedup_threshold <= 1.0:
            raise ConfigError(f"dedup_threshold must be in (0, 1], got {self.dedup_threshold}")
        if self.commonsense_per_relation < 1 or self.theme_concepts < 1:
            raise ConfigError("commonsense_per_relation and theme_concepts must be >= 1")
        if not self.separator:
            raise ConfigError("separator must be non-empty")
        if self.strategy not in ("cosine", "npmi", "learned", "learned_cosine"):
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if self.strategy == "npmi":
            if not self.corpus_path or not Path(self.corpus_path).is_file():
                raise ConfigError(f"npmi weighting needs an existing corpus file, got {self.corpus_path!r}")
        if self.strategy in ("learned", "learned_cosine"):
            if not self.embeddings_path or not Path(self.embeddings_path).is_file():
                raise ConfigError(f"learned weighting needs an existing embeddings file, got {self.embeddings_path!r}")
        self.generation()
        if need_providers:
            if self.fixtures_path and not Path(self.fixtures_path).is_file():
                raise ConfigError(f"fixtures file {self.fixtures_path} not found")
            if self.fixtures_path and self.provider_url:
                raise ConfigError("set either fixtures_path or provider_url, not both")
            for cap in CAPABILITIES:
                if not self.endpoint(cap) and not self.fixtures_path:
                    raise ConfigError(f"capability {cap!r} resolves to neither fixtures_path nor an endpoint")
            try:
                ProviderEndpointConfig("x", self.timeout, self.max_retries, self.max_in_flight)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None


def _coerce(key: str, type_name: str, value):
    if value is None or not isinstance(value, str):
        if "bool" in type_name and not isinstance(value, bool) and value is not None:
            raise ConfigError(f"{key} must be a boolean")
        if "float" in type_name and isinstance(value, int) and not isinstance(value, bool):
            return float(value)
        return value
    try:
        if type_name.startswith("bool"):
            lowered = value.strip().lower()
            if lowered not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(value)
            return lowered in ("1", "true", "yes")
        if type_name.startswith("int"):
            return int(value)
        if type_name.startswith("float"):
            return float(value)
    except ValueError:
        raise ConfigError(f"cannot read {value!r} as {type_name} for {key}") from None
    return value


@dataclass
class RunManifest:
    sequence_id: str
    config: dict
    artifacts: dict[str, str]
    provider_calls: dict[str, int]
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        # timings vary run to run, so they live in a sidecar file
        return {
            "sequence_id": self.sequence_id,
            "config": self.config,
            "artifacts": self.artifacts,
            "provider_calls": self.provider_calls,
        }


# -- providers and strategies --------------------------------------------------

_semaphores: dict[tuple, threading.BoundedSemaphore] = {}
_semaphores_lock = threading.Lock()


def _shared_slots(config: ProviderEndpointConfig) -> threading.BoundedSemaphore:
    key = (config.base_url, config.max_in_flight)
    with _semaphores_lock:
        if key not in _semaphores:
            _semaphores[key] = threading.BoundedSemaphore(config.max_in_flight)
        return _semaphores[key]


def make_providers(config: PipelineConfig) -> ProviderHub:
    config.validate()
    fixture = FixtureProvider.load(config.fixtures_path) if config.fixtures_path else None
    backends = {}
    for cap in CAPABILITIES:
        url = config.endpoint(cap)
        if url:
            endpoint = ProviderEndpointConfig(
                url, config.timeout, config.max_retries, config.max_in_flight, config.auth_token
            )
            backends[cap] = HttpProvider(endpoint, semaphore=_shared_slots(endpoint))
        else:
            backends[cap] = fixture
    return ProviderHub(**backends)


def make_strategy(config: PipelineConfig, embedder=None) -> WeightingStrategy:
    if config.strategy == "cosine":
        if embedder is None:
            raise ConfigError("cosine weighting needs an embedding provider")
        return WeightingStrategy.cosine(embedder)
    if config.strategy == "npmi":
        return WeightingStrategy.npmi(read_corpus(config.corpus_path, config.drop_stopwords))
    return WeightingStrategy.learned(import_learned_embeddings(config.embeddings_path))


# -- stages ---------------------------------------------------------------------


def stage_ingest(record: PhotoSequenceRecord, providers: ProviderHub, config: PipelineConfig) -> dict:
    captions = build_caption_nodes(record, providers)
    groups = [
        dedup_commonsense(
            build_commonsense_nodes(c, providers, config.commonsense_per_relation),
            providers,
            config.dedup_threshold,
        )
        for c in captions
    ]
    themes = build_theme_nodes(record, providers, config.theme_concepts)
    return nodes_to_dict(record.sequence_id, captions, groups, themes)


def stage_build_graph(nodes_doc: dict) -> StoryGraph:
    _, captions, groups, themes = nodes_from_dict(nodes_doc)
    return wire_story_graph(captions, groups, themes)


def stage_extract(weighted: StoryGraph, config: PipelineConfig, sequence_id: str) -> dict:
    storyline = plan_storyline(weighted, config.dummy_weight)
    return storyline_to_dict(storyline, sequence_id, config.separator)


def stage_generate(storyline_doc: dict, providers: ProviderHub, config: PipelineConfig) -> dict:
    params = config.generation()
    story = providers.generate(storyline_doc["serialized"], params, config.separator)
    return {
        "sequence_id": storyline_doc["sequence_id"],
        "storyline": storyline_doc["serialized"],
        "story": story,
        "generation": dataclasses.asdict(params),
    }


def read_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from exc


def write_json(path: str | Path, obj) -> None:
    Path(path).write_bytes(dumps_json(obj))


def read_graph(path: str | Path) -> StoryGraph:
    return import_graph(Path(path).read_bytes())


def write_graph(path: str | Path, graph: StoryGraph) -> None:
    Path(path).write_bytes(export_graph(graph, "json"))


def run_pipeline(
    record: PhotoSequenceRecord,
    config: PipelineConfig,
    providers: ProviderHub | None = None,
) -> RunManifest:
    """Run every stage for one sequence, persisting each artifact as it completes."""
    config.validate(need_providers=providers is None)
    if providers is None:
        providers = make_providers(config)
    run_dir = Path(config.output_dir) / record.sequence_id
    run_dir.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}

    def stage(name: str, fn, *args):
        t0 = time.perf_counter()
        try:
            result = fn(*args)
        except ScoVistError as exc:
            raise StageError(name, record.sequence_id, exc) from exc
        except (OSError, ValueError) as exc:
            raise StageError(name, record.sequence_id, exc) from exc
        timings[name] = time.perf_counter() - t0
        log.info("[%s] %s done in %.3fs", record.sequence_id, name, timings[name])
        return result

    nodes_doc = stage("ingest", stage_ingest, record, providers, config)
    write_json(run_dir / NODES_FILE, nodes_doc)

    graph = stage("build-graph", stage_build_graph, nodes_doc)
    write_graph(run_dir / ARTIFACTS["graph"], graph)

    strategy = stage("load-weighting", make_strategy, config, providers)
    weighted = stage("weigh", assign_weights, graph, strategy)
    write_graph(run_dir / ARTIFACTS["weighted_graph"], weighted)

    storyline_doc = stage("extract", stage_extract, weighted, config, record.sequence_id)
    write_json(run_dir / ARTIFACTS["storyline"], storyline_doc)

    story_doc = stage("generate", stage_generate, storyline_doc, providers, config)
    write_json(run_dir / ARTIFACTS["story"], story_doc)

    manifest = RunManifest(
        sequence_id=record.sequence_id,
        config=config.snapshot(),
        artifacts=dict(ARTIFACTS),
        provider_calls=providers.call_counts(),
        timings=timings,
    )
    write_json(run_dir / MANIFEST_FILE, manifest.to_dict())
    write_json(run_dir / TIMINGS_FILE, timings)
    return manifest
