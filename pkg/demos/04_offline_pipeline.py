"""End-to-end offline run against fixtures, then a look at the artifacts."""

# %%
import json
import tempfile
from pathlib import Path

from scovist.nodes import PhotoSequenceRecord
from scovist.pipeline import PipelineConfig, run_pipeline

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
out = Path(tempfile.mkdtemp(prefix="scovist-demo-"))

config = PipelineConfig(
    strategy="npmi",
    corpus_path=str(FIXTURES / "wedding_corpus.txt"),
    fixtures_path=str(FIXTURES / "wedding_fixture.json"),
    output_dir=str(out),
)
manifest = run_pipeline(PhotoSequenceRecord.load(FIXTURES / "wedding_record.json"), config)
print(json.dumps(manifest.provider_calls))
print(sorted(p.name for p in (out / manifest.sequence_id).iterdir()))

# %% The storyline, event by event
doc = json.loads((out / manifest.sequence_id / "storyline.json").read_text())
for e in doc["events"]:
    print(f"{e['node_id']:8s} {e.get('relation', ''):8s} {e['text']}")

# %% And the story handed back by the (canned) generator
print(json.loads((out / manifest.sequence_id / "story.json").read_text())["story"])

# %% The same run from the shell
print(f"scovist pipeline --record {FIXTURES / 'wedding_record.json'} "
      f"--fixtures {FIXTURES / 'wedding_fixture.json'} --strategy npmi "
      f"--corpus {FIXTURES / 'wedding_corpus.txt'} --out {out}")
