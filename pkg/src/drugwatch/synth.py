"""Seeded synthetic corpora for demos and pipeline sanity checks.

Each generated post carries one class's slang plus class-distinctive filler
vocabulary, cue phrases for its (co-occurring, class-typical) symptom
labels, and a fraction of shared noise tokens. Texts are deterministic for a
seed and unique within a batch, so downstream dedup keeps counts intact.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import LabeledPost, Post
from .labels import DRUG_CLASSES, default_vocabulary
from .lexicon import seed_lexicon

_FILLERS = {
    "Alcohol": ("hangover", "bottle", "bar", "shots", "drunk", "blackout",
                "pint", "chaser", "happy", "hour"),
    "Cocaine": ("rail", "binge", "party", "jittery", "club", "bathroom",
                "mirror", "grinding", "teeth", "afterparty"),
    "Ecstasy": ("rave", "festival", "rolling", "dancefloor", "glowsticks",
                "dj", "warehouse", "peak", "comedown", "kandi"),
    "Fentanyl": ("patch", "pressed", "counterfeit", "narcan", "micrograms",
                 "laced", "batch", "test", "strips", "potent"),
    "Heroin": ("needle", "spoon", "nodding", "vein", "rig", "cooker",
               "cotton", "tie", "dopesick", "score"),
    "Ketamine": ("khole", "infusion", "dissociative", "clinic", "bump",
                 "melted", "couch", "floating", "vial", "tolerance"),
    "LSD": ("tab", "blotter", "trip", "visuals", "geometry", "microdose",
            "sitter", "fractals", "breathing", "walls"),
    "Methamphetamine": ("tweaking", "pipe", "shards", "awake", "spun",
                        "scabs", "hustle", "chores", "jaw", "clenched"),
}

_SYMPTOM_BUNDLES = {
    "Alcohol": ("dizziness", "nausea", "loss of consciousness", "confusion",
                "fainting"),
    "Cocaine": ("tachycardia", "paranoia", "sweating", "agitation",
                "shortness of breath"),
    "Ecstasy": ("hyperthermia", "sweating", "tachycardia", "restlessness",
                "headache"),
    "Fentanyl": ("respiratory depression", "drowsiness",
                 "loss of consciousness", "fainting"),
    "Heroin": ("respiratory depression", "nausea", "coma", "drowsiness",
               "shortness of breath"),
    "Ketamine": ("dissociation", "confusion", "blurred vision", "dizziness"),
    "LSD": ("hallucinations", "paranoia", "agitation", "blurred vision",
            "headache"),
    "Methamphetamine": ("agitation", "paranoia", "tachycardia",
                        "restlessness", "tremors"),
}

_NOISE = ("today", "yesterday", "friend", "house", "night", "morning",
          "really", "kinda", "still", "week", "found", "later", "told",
          "woke", "room")


@dataclass(frozen=True)
class SynthConfig:
    docs_per_class: int = 200
    seed: int = 0
    noise_rate: float = 0.10
    polydrug_rate: float = 0.02


def _slang_by_class() -> dict[str, list[str]]:
    out: dict[str, list[str]] = {c: [] for c in DRUG_CLASSES}
    for phrase, cls in seed_lexicon().entries.items():
        if len(phrase) > 1:  # skip single-letter street names in generated text
            out[cls].append(phrase)
    for phrases in out.values():
        phrases.sort()
    return out


def _compose(rng: random.Random, cls: str, slang: dict[str, list[str]],
             cues: dict[str, tuple[str, ...]], noise_rate: float,
             polydrug_rate: float) -> tuple[str, tuple[str, ...], tuple[str, ...]]:
    vocab = default_vocabulary()
    bundle = _SYMPTOM_BUNDLES[cls]
    n_sym = rng.randint(2, min(3, len(bundle)))
    symptoms = tuple(sorted(rng.sample(bundle, n_sym), key=vocab.index))

    segments = [rng.choice(slang[cls])]
    for s in symptoms:
        segments.append(rng.choice(cues[s]))
    n_fill = rng.randint(5, 9)
    segments.extend(rng.choice(_FILLERS[cls]) for _ in range(n_fill))

    flags: tuple[str, ...] = ()
    if rng.random() < polydrug_rate:
        other = rng.choice([c for c in DRUG_CLASSES if c != cls])
        segments.append(rng.choice(slang[other]))
        flags = ("polydrug_uncertainty",)

    n_tokens = sum(len(seg.split()) for seg in segments)
    n_noise = max(1, round(noise_rate * n_tokens))
    segments.extend(rng.choice(_NOISE) for _ in range(n_noise))
    rng.shuffle(segments)
    return " ".join(segments), symptoms, flags


def generate_labeled(cfg: SynthConfig = SynthConfig()) -> list[LabeledPost]:
    """docs_per_class posts per drug class, in class-then-index order."""
    rng = random.Random(cfg.seed)
    vocab = default_vocabulary()
    cues = {label: tuple(vocab.cues.get(label, ())) or (label,)
            for label in vocab.labels}
    slang = _slang_by_class()
    seen: set[str] = set()
    out: list[LabeledPost] = []
    counter = 0
    for cls in DRUG_CLASSES:
        for _ in range(cfg.docs_per_class):
            counter += 1
            for attempt in range(10):
                text, symptoms, flags = _compose(
                    rng, cls, slang, cues, cfg.noise_rate, cfg.polydrug_rate)
                if text not in seen:
                    break
            else:
                text = f"{text} entry {counter}"
            seen.add(text)
            out.append(LabeledPost(
                post=Post(id=f"synth-{counter:06d}", text=text, source="synth"),
                drug=cls, symptoms=symptoms, flags=flags))
    return out


def generate_posts(n: int, seed: int = 0) -> tuple[list[Post], dict[str, dict]]:
    """Unlabeled posts plus a hidden truth table, for annotation-loop demos.

    Classes rotate so any prefix stays roughly balanced. Truth values are
    {"drug", "symptoms", "flags"} keyed by post id.
    """
    rng = random.Random(seed)
    vocab = default_vocabulary()
    cues = {label: tuple(vocab.cues.get(label, ())) or (label,)
            for label in vocab.labels}
    slang = _slang_by_class()
    seen: set[str] = set()
    posts: list[Post] = []
    truth: dict[str, dict] = {}
    for i in range(n):
        cls = DRUG_CLASSES[i % len(DRUG_CLASSES)]
        for attempt in range(10):
            text, symptoms, flags = _compose(rng, cls, slang, cues, 0.10, 0.02)
            if text not in seen:
                break
        else:
            text = f"{text} entry {i}"
        seen.add(text)
        pid = f"batch-{i + 1:06d}"
        posts.append(Post(id=pid, text=text, source="synth"))
        truth[pid] = {"drug": cls, "symptoms": list(symptoms),
                      "flags": list(flags)}
    return posts, truth
