"""Templated toy corpus for smoke-testing the training pipeline.

Six fine classes, one from each coarse group, are filled into short
sentence templates from small gazetteers.
"""

from __future__ import annotations

import random
import re

from .corpus import Corpus, Sentence, Token
from .taxonomy import OUTSIDE, BioTag

GAZETTEER: dict[str, tuple[str, ...]] = {
    "Artist": (
        "Ravi Shankar", "Adele", "Bob Dylan", "Shakira", "Lata Mangeshkar",
        "Miles Davis", "Bjork", "Nina Simone", "Elton John", "Asha Bhosle",
    ),
    "HumanSettlement": (
        "Delhi", "Berlin", "Madrid", "Lagos", "New York", "Kyoto",
        "Sao Paulo", "Lima", "Oslo", "Cape Town",
    ),
    "VisualWork": (
        "Sholay", "Casablanca", "Metropolis", "Spirited Away", "Vertigo",
        "Amelie", "Roma", "The Godfather", "Parasite", "Lagaan",
    ),
    "SportsGRP": (
        "Real Madrid", "Chennai Super Kings", "Bayern Munich", "Boca Juniors",
        "Ajax", "Lakers", "Celtic", "Juventus", "Mumbai Indians", "Arsenal",
    ),
    "Food": (
        "biryani", "paella", "sushi", "pretzel", "ramen",
        "tacos", "samosa", "lasagna", "falafel", "dumplings",
    ),
    "Disease": (
        "malaria", "influenza", "measles", "diabetes", "asthma",
        "cholera", "tuberculosis", "dengue", "hepatitis", "mumps",
    ),
}  # fmt: skip

TEMPLATES: tuple[str, ...] = (
    "{Artist} sang in {HumanSettlement} today",
    "we watched {VisualWork} in {HumanSettlement}",
    "{SportsGRP} fans ate {Food} after the game",
    "{Artist} stars in {VisualWork}",
    "doctors fear {Disease} may spread in {HumanSettlement}",
    "{Artist} was treated for {Disease}",
    "{SportsGRP} beat the hosts in {HumanSettlement}",
    "my aunt cooks {Food} every week",
    "a new vaccine for {Disease} is ready",
    "{VisualWork} is a classic film",
    "{SportsGRP} signed a young player",
    "she had {Food} and watched {VisualWork}",
)

_SLOT_RE = re.compile(r"\{(\w+)\}")


def _fill(template: str, rng: random.Random) -> list[Token]:
    tokens: list[Token] = []
    for piece in template.split():
        m = _SLOT_RE.fullmatch(piece)
        if not m:
            tokens.append(Token(piece, OUTSIDE))
            continue
        label = m.group(1)
        words = rng.choice(GAZETTEER[label]).split()
        tokens.append(Token(words[0], BioTag("B", label)))
        tokens.extend(Token(w, BioTag("I", label)) for w in words[1:])
    return tokens


def generate_corpus(n: int, seed: int = 0, split_name: str = "other", prefix: str = "synth") -> Corpus:
    rng = random.Random(seed)
    sentences = tuple(
        Sentence(f"{prefix}-{i:04d}", tuple(_fill(rng.choice(TEMPLATES), rng)), "en")
        for i in range(n)
    )
    return Corpus(sentences, split_name)


def synthetic_splits(seed: int = 0, n_train: int = 250, n_dev: int = 50) -> tuple[Corpus, Corpus]:
    """Disjoint train/dev corpora drawn from the same templates and gazetteers."""
    full = generate_corpus(n_train + n_dev, seed)
    train = Corpus(full.sentences[:n_train], "train")
    dev = Corpus(full.sentences[n_train:], "dev")
    return train, dev
