"""Regenerate wedding_fixture.json (and the canned stories inside it).

    python tests/fixtures/make_wedding_fixture.py

Embeddings are seeded Gaussian vectors, one per distinct text, so identical
texts share a vector and unrelated texts are nearly orthogonal (no dedup drops
at the 0.50 threshold for this content).
"""

import json
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent
DIM = 64

IMAGES = ["img1.jpg", "img2.jpg", "img3.jpg", "img4.jpg", "img5.jpg"]

CAPTIONS = [
    "a man in uniform standing next to a woman in a white dress",
    "the bride and groom cutting a large wedding cake",
    "guests raising their glasses at a long table",
    "the couple dancing together on the dance floor",
    "the bride and groom waving goodbye from a decorated car",
]

TAILS = [
    {
        "xNeed": ["to put on his uniform", "to propose to her", "to plan a wedding", "to invite their families", "to get dressed up"],
        "xIntent": ["to get married", "to start a family", "to honor his service", "to celebrate their love", "to look his best"],
        "xEffect": ["feels proud", "smiles for the camera", "gets congratulated", "holds her hand", "feels nervous"],
        "xWant": ["to kiss the bride", "to take photos", "to greet the guests", "to walk down the aisle", "to say his vows"],
    },
    {
        "xNeed": ["to order a cake", "to pick up a knife", "to stand at the table", "to gather the guests", "to hold hands"],
        "xIntent": ["to share the first slice", "to celebrate the wedding", "to follow tradition", "to make a memory", "to feed each other"],
        "xEffect": ["gets frosting on his face", "laughs with joy", "hears the guests cheer", "feels happy", "eats a piece of cake"],
        "xWant": ["to serve the guests", "to taste the cake", "to make a toast", "to save the top tier", "to dance together"],
    },
    {
        "xNeed": ["to pour the champagne", "to find their seats", "to listen to the speech", "to fill the glasses", "to stand up"],
        "xIntent": ["to toast the couple", "to wish them luck", "to share the moment", "to show their support", "to have fun"],
        "xEffect": ["clinks glasses", "drinks champagne", "feels merry", "cheers loudly", "gets a little tipsy"],
        "xWant": ["to give a speech", "to eat dinner", "to hug the bride", "to sing along", "to hit the dance floor"],
    },
    {
        "xNeed": ["to learn the steps", "to choose a song", "to take her hand", "to clear the floor", "to ask her to dance"],
        "xIntent": ["to enjoy the night", "to show their love", "to have the first dance", "to impress the crowd", "to be close"],
        "xEffect": ["spins her around", "steps on her toes", "gets applause", "feels romantic", "loses track of time"],
        "xWant": ["to keep dancing", "to invite everyone to join", "to catch their breath", "to kiss her", "to remember this forever"],
    },
    {
        "xNeed": ["to pack the luggage", "to decorate the car", "to say goodbye to family", "to change clothes", "to walk outside"],
        "xIntent": ["to leave for the honeymoon", "to start their new life", "to thank everyone", "to make a grand exit", "to be alone together"],
        "xEffect": ["drives away", "gets showered with rice", "feels relieved", "waves to the crowd", "cries happy tears"],
        "xWant": ["to go on a honeymoon", "to relax at the beach", "to open the gifts", "to look at the photos", "to live happily ever after"],
    },
]

CONCEPTS = [
    ["wedding", "bride", "groom", "uniform", "dress", "love", "couple", "ceremony", "marriage", "celebration",
     "man", "woman", "portrait", "flowers", "veil", "formal", "smile", "together", "romance", "people"],
    ["cake", "wedding", "knife", "bride", "groom", "dessert", "celebration", "party", "sweet", "table",
     "couple", "frosting", "reception", "tradition", "food", "hands", "white", "love", "people", "indoors"],
    ["glasses", "toast", "guests", "table", "champagne", "dinner", "party", "celebration", "people", "drink",
     "reception", "wine", "friends", "family", "restaurant", "evening", "cheers", "group", "happy", "indoors"],
    ["dance", "couple", "music", "floor", "wedding", "bride", "groom", "night", "party", "lights",
     "romance", "love", "together", "celebration", "reception", "motion", "people", "fun", "evening", "hall"],
    ["car", "goodbye", "bride", "groom", "wave", "street", "decoration", "wedding", "couple", "departure",
     "vehicle", "ribbon", "guests", "outdoors", "travel", "happy", "love", "celebration", "people", "road"],
]


def build() -> dict:
    commonsense = {cap: tails for cap, tails in zip(CAPTIONS, TAILS)}
    texts = list(CAPTIONS)
    for tails in TAILS:
        for rel in ("xNeed", "xIntent", "xEffect", "xWant"):
            texts.extend(tails[rel])
    texts.extend(" ".join(c) for c in CONCEPTS)
    texts = sorted(set(texts))
    rng = np.random.default_rng(20240101)
    vectors = np.round(rng.standard_normal((len(texts), DIM)), 6)
    return {
        "captions": dict(zip(IMAGES, CAPTIONS)),
        "commonsense": commonsense,
        "concepts": dict(zip(IMAGES, CONCEPTS)),
        "embeddings": {t: [float(x) for x in v] for t, v in zip(texts, vectors)},
        "stories": {},
    }


def canned_story(serialized: str) -> str:
    events = serialized.split("</s>")
    return "Our story. " + " ".join(f"Then, {e}." for e in events)


if __name__ == "__main__":
    import tempfile

    from scovist.nodes import PhotoSequenceRecord
    from scovist.pipeline import PipelineConfig, run_pipeline
    from scovist.providers import FixtureProvider, ProviderHub

    class Drafting(FixtureProvider):
        def generate(self, storyline, params, separator):
            return canned_story(storyline)

    fixture = build()
    record = PhotoSequenceRecord.load(HERE / "wedding_record.json")
    for strategy in ("cosine", "npmi"):
        with tempfile.TemporaryDirectory() as tmp:
            config = PipelineConfig(strategy=strategy, corpus_path=str(HERE / "wedding_corpus.txt"), output_dir=tmp)
            run_pipeline(record, config, providers=ProviderHub.single(Drafting(fixture)))
            doc = json.loads((Path(tmp) / record.sequence_id / "storyline.json").read_text())
            fixture["stories"][doc["serialized"]] = canned_story(doc["serialized"])
    (HERE / "wedding_fixture.json").write_text(json.dumps(fixture, indent=1) + "\n")
    print("wrote", HERE / "wedding_fixture.json")
