"""Closed label sets: the 8 drug classes, annotation flags, and the symptom vocabulary.

Drug class order is fixed and doubles as the tie-break order everywhere a
deterministic "lowest class index" rule is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

DRUG_CLASSES: tuple[str, ...] = (
    "Alcohol",
    "Cocaine",
    "Ecstasy",
    "Fentanyl",
    "Heroin",
    "Ketamine",
    "LSD",
    "Methamphetamine",
)

DRUG_INDEX: dict[str, int] = {name: i for i, name in enumerate(DRUG_CLASSES)}

# Accepted spellings for canonical class names (inputs are lower-cased first).
# MDMA is the clinical name the guidelines map "molly" to; it is the Ecstasy class.
_DRUG_ALIASES: dict[str, str] = {
    **{name.lower(): name for name in DRUG_CLASSES},
    "mdma": "Ecstasy",
    "lysergic acid diethylamide": "LSD",
    "meth": "Methamphetamine",
    "crystal meth": "Methamphetamine",
}

FLAGS: tuple[str, str] = ("polydrug_uncertainty", "withdrawal_suspected")


def canonical_drug(name: str) -> str | None:
    """Resolve a drug-class spelling to its canonical name, or None if unknown."""
    return _DRUG_ALIASES.get(name.strip().lower())


# Seed symptom labels, in stable index order.
SEED_SYMPTOMS: tuple[str, ...] = (
    "dizziness",
    "fainting",
    "blurred vision",
    "headache",
    "tachycardia",
    "shortness of breath",
    "tremors",
    "hyperthermia",
    "sweating",
    "respiratory depression",
    "drowsiness",
    "loss of consciousness",
    "nausea",
    "coma",
    "dissociation",
    "confusion",
    "hallucinations",
    "paranoia",
    "agitation",
    "restlessness",
)

# Surface cues that count as a mention of each symptom label. Keys are scanned
# on cleaned, pre-stemming text (apostrophes already stripped, so "couldnt").
# Every phrase is at most 3 tokens and maps to exactly one label.
SEED_SYMPTOM_CUES: dict[str, tuple[str, ...]] = {
    "dizziness": ("dizzy",),
    "fainting": ("fainted", "faint", "passed out", "pass out"),
    "blurred vision": ("blurry vision", "vision went blurry", "vision blurred"),
    "headache": ("headaches",),
    "tachycardia": ("heart racing", "heart was racing", "heart was pounding",
                    "heart pounding", "racing heart"),
    "shortness of breath": ("short of breath", "couldnt breathe",
                            "cant breathe", "could not breathe"),
    "tremors": ("tremor", "shaking", "trembling", "shaking uncontrollably"),
    "hyperthermia": ("overheating", "really hot", "burning up", "feverish"),
    "sweating": ("sweats", "sweat"),
    "respiratory depression": ("breathing slowed", "breathing slowed down",
                               "slow breathing", "shallow breathing",
                               "stopped breathing"),
    "drowsiness": ("drowsy", "tired", "sleepy"),
    "loss of consciousness": ("blacked out", "went black", "lost consciousness",
                              "everything went black"),
    "nausea": ("nauseous", "nauseated", "vomiting", "threw up"),
    "coma": ("out cold", "comatose"),
    "dissociation": ("dissociated", "floating", "feel distant", "felt distant"),
    "confusion": ("confused",),
    "hallucinations": ("hallucinating", "hallucination", "heard voices",
                       "seeing things"),
    "paranoia": ("paranoid", "panicked", "panic"),
    "agitation": ("agitated",),
    "restlessness": ("restless", "couldnt stop moving"),
}


@dataclass(frozen=True)
class SymptomVocabulary:
    """Ordered symptom labels with per-label surface cue phrases.

    Indices are stable once constructed. The label itself always counts as a
    cue phrase; extra cues extend mention scanning but never add labels.
    """

    labels: tuple[str, ...]
    cues: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        seen = set()
        for label in self.labels:
            if label != label.lower():
                raise ValueError(f"symptom label not lower-cased: {label!r}")
            if not label:
                raise ValueError("empty symptom label")
            if label in seen:
                raise ValueError(f"duplicate symptom label: {label!r}")
            seen.add(label)
        for label in self.cues:
            if label not in seen:
                raise ValueError(f"cue phrases for unknown label: {label!r}")

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown symptom label: {label!r}") from None

    def phrase_map(self) -> dict[str, int]:
        """phrase -> label index, for the longest-match scanner."""
        out: dict[str, int] = {}
        for i, label in enumerate(self.labels):
            out[label] = i
            for cue in self.cues.get(label, ()):
                out.setdefault(cue, i)
        return out


def default_vocabulary(extra_labels: tuple[str, ...] = ()) -> SymptomVocabulary:
    """The Table-1 seed vocabulary, optionally extended with custom labels."""
    labels = SEED_SYMPTOMS + tuple(l.lower() for l in extra_labels)
    return SymptomVocabulary(labels=labels, cues=dict(SEED_SYMPTOM_CUES))
