"""Command-line entry point: ``scovist <subcommand> ...``.

Exit codes: 0 success, 2 usage/config error, 3 provider error, 4 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline as pl
from .errors import ConfigError, ScoVistError
from .graph import export_graph
from .nodes import PhotoSequenceRecord
from .weighting import assign_weights, build_corpus_index

log = logging.getLogger("scovist")

# flag dest -> config key
_FLAG_KEYS = {
    "fixtures": "fixtures_path",
    "strategy": "strategy",
    "corpus": "corpus_path",
    "embeddings": "embeddings_path",
    "out_dir": "output_dir",
    "seed": "seed",
    "separator": "separator",
    "dummy_weight": "dummy_weight",
    "dedup_threshold": "dedup_threshold",
    "record": "record_path",
}


def _common(p: argparse.ArgumentParser, *flags: str) -> None:
    p.add_argument("--config", help="JSON config file (SCOVIST_* env vars override it)")
    if "fixtures" in flags:
        p.add_argument("--fixtures", help="fixture JSON serving every provider capability")
    if "strategy" in flags:
        p.add_argument("--strategy", choices=["cosine", "npmi", "learned"])
        p.add_argument("--corpus", help="corpus text (one sentence per line) or saved index .json")
        p.add_argument("--embeddings", help="learned node embeddings JSON {node_id: [floats]}")
    if "extract" in flags:
        p.add_argument("--separator")
        p.add_argument("--dummy-weight", type=float)
    if "seed" in flags:
        p.add_argument("--seed", type=int)
    if "dedup" in flags:
        p.add_argument("--dedup-threshold", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scovist", description="Commonsense storyline planning for photo sequences")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build caption/commonsense/theme nodes for one record")
    p.add_argument("--record", help="photo sequence record JSON")
    p.add_argument("--out", dest="out_dir", help="output root; writes <out>/<sequence_id>/nodes.json")
    _common(p, "fixtures", "dedup")

    p = sub.add_parser("build-graph", help="wire nodes.json into the story graph")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("weigh", help="assign edge weights")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    _common(p, "fixtures", "strategy")

    p = sub.add_parser("extract", help="extract the storyline from a weighted graph")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sequence-id", help="defaults to the input file's directory name")
    _common(p, "extract")

    p = sub.add_parser("generate", help="generate a story from a storyline file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    _common(p, "fixtures", "seed", "extract")

    p = sub.add_parser("pipeline", help="run every stage for one record")
    p.add_argument("--record", help="photo sequence record JSON (or config key record_path)")
    p.add_argument("--out", dest="out_dir", help="output root directory")
    _common(p, "fixtures", "strategy", "extract", "seed", "dedup")

    p = sub.add_parser("corpus-index", help="index a corpus for NPMI weighting")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--drop-stopwords", action="store_true")

    p = sub.add_parser("export", help="export a stored graph as DOT or JSON")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--format", choices=["dot", "json"], default="dot")
    p.add_argument("--out", help="output file (stdout when omitted)")
    return parser


def _config(args: argparse.Namespace) -> pl.PipelineConfig:
    config = pl.PipelineConfig.load(getattr(args, "config", None))
    overrides = {}
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[key] = value
    return config.updated(overrides)


def _record(config: pl.PipelineConfig) -> PhotoSequenceRecord:
    if not config.record_path:
        raise ConfigError("no photo sequence record given (--record or record_path)")
    if not Path(config.record_path).is_file():
        raise ConfigError(f"record file {config.record_path} not found")
    return PhotoSequenceRecord.load(config.record_path)


def _mkparent(path: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def cmd_ingest(args) -> None:
    config = _config(args)
    record = _record(config)
    providers = pl.make_providers(config)
    run_dir = Path(config.output_dir) / record.sequence_id
    run_dir.mkdir(parents=True, exist_ok=True)
    pl.write_json(run_dir / pl.NODES_FILE, pl.stage_ingest(record, providers, config))
    print(run_dir / pl.NODES_FILE)


def cmd_build_graph(args) -> None:
    graph = pl.stage_build_graph(pl.read_json(args.inp))
    pl.write_graph(_mkparent(args.out), graph)


def cmd_weigh(args) -> None:
    config = _config(args)
    config.validate(need_providers=False)
    embedder = pl.make_providers(config) if config.strategy == "cosine" else None
    strategy = pl.make_strategy(config, embedder)
    weighted = assign_weights(pl.read_graph(args.inp), strategy)
    pl.write_graph(_mkparent(args.out), weighted)


def cmd_extract(args) -> None:
    config = _config(args)
    sequence_id = args.sequence_id or Path(args.inp).resolve().parent.name
    doc = pl.stage_extract(pl.read_graph(args.inp), config, sequence_id)
    pl.write_json(_mkparent(args.out), doc)


def cmd_generate(args) -> None:
    config = _config(args)
    providers = pl.make_providers(config)
    pl.write_json(_mkparent(args.out), pl.stage_generate(pl.read_json(args.inp), providers, config))


def cmd_pipeline(args) -> None:
    config = _config(args)
    config.validate()
    manifest = pl.run_pipeline(_record(config), config)
    print(Path(config.output_dir) / manifest.sequence_id / pl.MANIFEST_FILE)


def cmd_corpus_index(args) -> None:
    with open(args.corpus, encoding="utf-8") as fh:
        index = build_corpus_index((line for line in fh if line.strip()), args.drop_stopwords)
    index.save(_mkparent(args.out))


def cmd_export(args) -> None:
    data = export_graph(pl.read_graph(args.inp), args.format)
    if args.out:
        _mkparent(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))


COMMANDS = {
    "ingest": cmd_ingest,
    "build-graph": cmd_build_graph,
    "weigh": cmd_weigh,
    "extract": cmd_extract,
    "generate": cmd_generate,
    "pipeline": cmd_pipeline,
    "corpus-index": cmd_corpus_index,
    "export": cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except ScoVistError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
