"""Block-structured one-hot encoding of the five categorical clinical variables.

The encoded vector has five fixed-order blocks (breast density, mass
shape, mass margins, calcification type, calcification distribution)
with cardinalities 4/8/5/14/5, giving 36 dimensions in total. An absent
variable encodes as an all-zero block, so a downstream model sees missing
data as zeros rather than as a dedicated "missing" category. Category
names are configuration (loaded from a JSON vocabulary file); only the
block order and cardinalities are contractual.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, VocabularyError

__all__ = [
    "BLOCK_NAMES",
    "BLOCK_SIZES",
    "TOTAL_DIM",
    "ClinicalVocabulary",
    "ClinicalRecord",
    "ClinicalVector",
    "default_vocabulary",
    "encode",
    "decode",
    "mask_clinical",
    "sample_drop_flags",
]

BLOCK_NAMES = (
    "breast_density",
    "mass_shape",
    "mass_margins",
    "calcification_type",
    "calcification_distribution",
)
BLOCK_SIZES = (4, 8, 5, 14, 5)
TOTAL_DIM = 36

# Offsets of each block within the 36-vector.
BLOCK_OFFSETS = tuple(int(x) for x in np.cumsum((0,) + BLOCK_SIZES[:-1]))

# Default category names. The four density grades are the standard
# BI-RADS ones; the remaining blocks carry the CBIS-DDSM single-label
# category names. Any vocabulary with the right cardinalities works.
_DEFAULT_CATEGORIES: dict[str, tuple[str, ...]] = {
    "breast_density": (
        "entirely_fatty",
        "scattered_fibroglandular",
        "heterogeneously_dense",
        "extremely_dense",
    ),
    "mass_shape": (
        "round",
        "oval",
        "irregular",
        "lobulated",
        "architectural_distortion",
        "asymmetric_breast_tissue",
        "focal_asymmetric_density",
        "lymph_node",
    ),
    "mass_margins": (
        "circumscribed",
        "ill_defined",
        "microlobulated",
        "obscured",
        "spiculated",
    ),
    "calcification_type": (
        "amorphous",
        "coarse",
        "dystrophic",
        "eggshell",
        "fine_linear_branching",
        "large_rodlike",
        "lucent_center",
        "lucent_centered",
        "milk_of_calcium",
        "pleomorphic",
        "punctate",
        "round_and_regular",
        "skin",
        "vascular",
    ),
    "calcification_distribution": (
        "clustered",
        "linear",
        "regional",
        "segmental",
        "diffusely_scattered",
    ),
}


@dataclass(frozen=True)
class ClinicalVocabulary:
    """Ordered category names for each of the five blocks."""

    breast_density: tuple[str, ...]
    mass_shape: tuple[str, ...]
    mass_margins: tuple[str, ...]
    calcification_type: tuple[str, ...]
    calcification_distribution: tuple[str, ...]

    def __post_init__(self):
        for name, size in zip(BLOCK_NAMES, BLOCK_SIZES):
            cats = getattr(self, name)
            if len(cats) != size:
                raise VocabularyError(
                    f"block '{name}' must have exactly {size} categories, "
                    f"got {len(cats)}"
                )
            if len(set(cats)) != len(cats):
                raise VocabularyError(f"block '{name}' has duplicate category names")

    def block(self, name: str) -> tuple[str, ...]:
        if name not in BLOCK_NAMES:
            raise VocabularyError(f"unknown clinical block '{name}'")
        return getattr(self, name)

    def category_index(self, block: str, category: str) -> int:
        cats = self.block(block)
        try:
            return cats.index(category)
        except ValueError:
            raise VocabularyError(
                f"unknown category '{category}' in block '{block}'"
            ) from None

    def to_dict(self) -> dict:
        return {name: list(getattr(self, name)) for name in BLOCK_NAMES}

    @classmethod
    def from_dict(cls, obj: dict) -> "ClinicalVocabulary":
        if not isinstance(obj, dict):
            raise VocabularyError("vocabulary must be a JSON object")
        extra = set(obj) - set(BLOCK_NAMES)
        if extra:
            raise VocabularyError(f"unknown vocabulary keys: {sorted(extra)}")
        missing = set(BLOCK_NAMES) - set(obj)
        if missing:
            raise VocabularyError(f"vocabulary missing blocks: {sorted(missing)}")
        return cls(**{name: tuple(obj[name]) for name in BLOCK_NAMES})

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ClinicalVocabulary":
        try:
            obj = json.loads(Path(path).read_text())
        except OSError as exc:
            raise VocabularyError(f"cannot read vocabulary file {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise VocabularyError(f"vocabulary file {path} is not valid JSON: {exc}")
        return cls.from_dict(obj)


def default_vocabulary() -> ClinicalVocabulary:
    return ClinicalVocabulary(**_DEFAULT_CATEGORIES)


@dataclass(frozen=True)
class ClinicalRecord:
    """Raw categorical assignments for one lesion; None marks a variable
    that was not reported."""

    breast_density: str | None = None
    mass_shape: str | None = None
    mass_margins: str | None = None
    calcification_type: str | None = None
    calcification_distribution: str | None = None

    def get(self, block: str) -> str | None:
        if block not in BLOCK_NAMES:
            raise VocabularyError(f"unknown clinical block '{block}'")
        return getattr(self, block)


@dataclass(frozen=True, eq=False)
class ClinicalVector:
    """36-d block one-hot encoding plus a per-block presence flag.

    presence[b] is False exactly when block b is all zeros.
    """

    values: np.ndarray
    presence: tuple[bool, bool, bool, bool, bool]


_ZERO_PRESENCE = (False, False, False, False, False)


def zero_clinical_vector() -> ClinicalVector:
    return ClinicalVector(np.zeros(TOTAL_DIM), _ZERO_PRESENCE)


def encode(record: ClinicalRecord, vocab: ClinicalVocabulary) -> ClinicalVector:
    """One-hot encode a record, leaving absent blocks at zero."""
    values = np.zeros(TOTAL_DIM)
    presence = []
    for block, offset in zip(BLOCK_NAMES, BLOCK_OFFSETS):
        category = record.get(block)
        if category is None:
            presence.append(False)
            continue
        idx = vocab.category_index(block, category)
        values[offset + idx] = 1.0
        presence.append(True)
    return ClinicalVector(values, tuple(presence))


def decode(vec: ClinicalVector, vocab: ClinicalVocabulary) -> ClinicalRecord:
    """Invert encode(); raises if any block is not a valid one-hot or the
    presence flags disagree with the zero pattern."""
    if vec.values.shape != (TOTAL_DIM,):
        raise VocabularyError(
            f"clinical vector must have shape ({TOTAL_DIM},), got {vec.values.shape}"
        )
    assignments: dict[str, str] = {}
    for b, (block, offset, size) in enumerate(zip(BLOCK_NAMES, BLOCK_OFFSETS, BLOCK_SIZES)):
        chunk = vec.values[offset:offset + size]
        hot = np.flatnonzero(chunk)
        if not vec.presence[b]:
            if hot.size:
                raise VocabularyError(
                    f"block '{block}' marked absent but is not all-zero"
                )
            continue
        if hot.size != 1 or chunk[hot[0]] != 1.0:
            raise VocabularyError(f"block '{block}' is not a valid one-hot")
        assignments[block] = vocab.block(block)[int(hot[0])]
    return ClinicalRecord(**assignments)


def mask_clinical(vec: ClinicalVector, drop: bool) -> ClinicalVector:
    """Bait-and-switch masking: dropping replaces the whole clinical
    vector with zeros (all blocks at once); otherwise the input is
    returned unchanged."""
    if drop:
        return zero_clinical_vector()
    return vec


def sample_drop_flags(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """n independent Bernoulli(p) draws from the given generator."""
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"drop probability must be in [0, 1], got {p}")
    return rng.random(n) < p
