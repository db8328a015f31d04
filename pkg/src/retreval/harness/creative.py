"""Seeded random-sentence prompts for the four-sentence story task."""

from __future__ import annotations

import random

from retreval.errors import InvalidArgument
from retreval.harness.dataset import DatasetRecord

ADJECTIVES = [
    "ancient", "bright", "curious", "distant", "eager", "fragile", "gentle", "hollow",
    "icy", "jagged", "lonely", "mossy", "noisy", "patient", "quiet", "rusty",
    "silver", "tired", "velvet", "wandering", "yellow", "forgotten", "crooked", "restless",
]
NOUNS = [
    "lighthouse", "violin", "fox", "teacup", "train", "garden", "astronaut", "river",
    "clock", "library", "kite", "baker", "mountain", "lantern", "robot", "whale",
    "painter", "umbrella", "bridge", "orchard", "sailor", "mirror", "owl", "village",
]
VERBS = [
    "whispered to", "followed", "repaired", "chased", "painted", "forgot", "discovered",
    "guarded", "carried", "sang about", "waited for", "borrowed", "traded", "dreamed of",
]
PLACES = [
    "at midnight", "under the old bridge", "during the storm", "on the last day of summer",
    "beside the frozen lake", "in a crowded market", "before anyone woke up", "far beyond the hills",
    "inside a forgotten attic", "while the bells were ringing",
]
PATTERNS = [
    "The {a1} {n1} {v} the {a2} {n2} {p}.",
    "{p_cap}, the {a1} {n1} {v} the {a2} {n2}.",
    "Nobody noticed when the {a1} {n1} {v} the {n2} {p}.",
]

TASK = (
    'Starting sentence: "{sentence}"\n'
    "Write four coherent, creative sentences that continue this sentence into a complete micro-story."
)


def random_sentence(rng: random.Random) -> str:
    pattern = rng.choice(PATTERNS)
    verb = rng.choice(VERBS)
    place = rng.choice(PLACES)
    return pattern.format(
        a1=rng.choice(ADJECTIVES),
        a2=rng.choice(ADJECTIVES),
        n1=rng.choice(NOUNS),
        n2=rng.choice(NOUNS),
        v=verb,
        p=place,
        p_cap=place[0].upper() + place[1:],
    )


def generate_creative_prompts(count: int, seed: int = 0) -> list[DatasetRecord]:
    """``count`` story prompts, identical for identical ``(count, seed)``."""
    if count < 1:
        raise InvalidArgument("count must be >= 1")
    rng = random.Random(seed)
    records = []
    for i in range(count):
        sentence = random_sentence(rng)
        records.append(
            DatasetRecord(
                id=f"creative-{seed}-{i:04d}",
                statement=TASK.format(sentence=sentence),
                domain="creative",
                source="random-sentence-generator",
                metadata={"seed": seed, "index": i, "sentence": sentence},
            )
        )
    return records
