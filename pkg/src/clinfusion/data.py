"""Dataset file I/O and synthetic data generation.

Dataset files are CSV with a fixed header::

    id,label,breast_density,mass_shape,mass_margins,calcification_type,
    calcification_distribution,emb_0,...,emb_{D-1}

Clinical cells hold a category name or are empty (= missing). Embedding
cells are float64 written with shortest round-trip repr, so a file
regenerated from the same seed is byte-identical. Loading validates every
row and fails with a line-numbered error; rows are never silently dropped.

Synthetic data draws image embeddings from per-class isotropic Gaussians
and clinical categories from per-class distributions over each block,
with a global per-block missingness rate.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clinical import (
    BLOCK_NAMES,
    ClinicalRecord,
    ClinicalVocabulary,
    default_vocabulary,
    encode,
)
from .errors import ConfigError, DataFormatError, DimensionError, VocabularyError
from .persist import atomic_write_text

__all__ = [
    "SampleRecord",
    "SynthClassSpec",
    "SynthSpec",
    "dataset_header",
    "load_dataset",
    "write_dataset",
    "generate_records",
    "gen_synth",
]


@dataclass
class SampleRecord:
    sample_id: str
    label: str
    image_embedding: np.ndarray
    clinical: ClinicalRecord


def dataset_header(image_dim: int) -> list[str]:
    return ["id", "label", *BLOCK_NAMES, *(f"emb_{i}" for i in range(image_dim))]


_N_PREFIX = 2 + len(BLOCK_NAMES)  # id, label, five clinical columns


def load_dataset(
    path: str | Path,
    vocab: ClinicalVocabulary | None = None,
    image_dim: int | None = None,
    class_names=None,
) -> list[SampleRecord]:
    """Parse and validate a dataset file, preserving row order.

    ``image_dim`` defaults to whatever the header declares; passing it
    pins the expectation. ``class_names``, when given, restricts labels.
    """
    vocab = vocab or default_vocabulary()
    path = Path(path)
    allowed = set(class_names) if class_names is not None else None
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataFormatError(f"cannot read dataset {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file, expected a header row")
        if len(header) < _N_PREFIX + 1 or header[:_N_PREFIX] != dataset_header(1)[:_N_PREFIX]:
            raise DataFormatError(
                f"{path}: line 1: header does not match the dataset schema"
            )
        file_dim = len(header) - _N_PREFIX
        if header != dataset_header(file_dim):
            raise DataFormatError(
                f"{path}: line 1: embedding columns must be emb_0..emb_{file_dim - 1}"
            )
        if image_dim is not None and file_dim != image_dim:
            raise DimensionError(
                f"{path}: header declares {file_dim} embedding columns, "
                f"expected {image_dim}"
            )
        dim = file_dim

        records: list[SampleRecord] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != _N_PREFIX + dim:
                got = len(row) - _N_PREFIX
                raise DimensionError(
                    f"{path}: line {lineno}: expected {dim} embedding values, got {got}"
                )
            sample_id, label = row[0], row[1]
            if not sample_id:
                raise DataFormatError(f"{path}: line {lineno}: empty sample id")
            if allowed is not None and label not in allowed:
                raise DataFormatError(
                    f"{path}: line {lineno}: label '{label}' not in configured classes"
                )
            assignments = {
                block: cell
                for block, cell in zip(BLOCK_NAMES, row[2:_N_PREFIX])
                if cell != ""
            }
            clinical = ClinicalRecord(**assignments)
            try:
                encode(clinical, vocab)  # validates category names
            except VocabularyError as exc:
                raise VocabularyError(f"{path}: line {lineno}: {exc}") from None
            try:
                embedding = np.array([float(x) for x in row[_N_PREFIX:]], dtype=np.float64)
            except ValueError:
                raise DataFormatError(
                    f"{path}: line {lineno}: non-numeric embedding value"
                ) from None
            records.append(SampleRecord(sample_id, label, embedding, clinical))
    return records


def _format_float(x: float) -> str:
    return repr(float(x))


def write_dataset(path: str | Path, records, image_dim: int) -> None:
    """Write records in the documented CSV schema (atomically)."""
    lines = [",".join(dataset_header(image_dim))]
    for rec in records:
        if rec.image_embedding.shape != (image_dim,):
            raise DimensionError(
                f"record '{rec.sample_id}' embedding has shape "
                f"{rec.image_embedding.shape}, expected ({image_dim},)"
            )
        cells = [rec.sample_id, rec.label]
        cells += [(rec.clinical.get(b) or "") for b in BLOCK_NAMES]
        cells += [_format_float(x) for x in rec.image_embedding]
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


@dataclass
class SynthClassSpec:
    """Generator for one class: Gaussian embedding plus categorical
    distributions over each clinical block."""

    name: str
    embedding_mean: np.ndarray
    embedding_std: float
    block_probs: dict[str, np.ndarray]

    def validate(self, image_dim: int, vocab: ClinicalVocabulary) -> None:
        if self.embedding_mean.shape != (image_dim,):
            raise ConfigError(
                f"class '{self.name}': embedding mean has shape "
                f"{self.embedding_mean.shape}, expected ({image_dim},)"
            )
        if not self.embedding_std > 0.0:
            raise ConfigError(f"class '{self.name}': embedding std must be positive")
        for block in BLOCK_NAMES:
            if block not in self.block_probs:
                raise ConfigError(f"class '{self.name}': missing probs for '{block}'")
            probs = self.block_probs[block]
            size = len(vocab.block(block))
            if probs.shape != (size,):
                raise ConfigError(
                    f"class '{self.name}': block '{block}' needs {size} "
                    f"probabilities, got {probs.shape}"
                )
            if np.any(probs < 0.0) or abs(float(probs.sum()) - 1.0) > 1e-9:
                raise ConfigError(
                    f"class '{self.name}': block '{block}' probabilities must be "
                    f"non-negative and sum to 1 within 1e-9"
                )


@dataclass
class SynthSpec:
    """Full recipe for a seeded synthetic train/test pair."""

    seed: int
    image_dim: int
    train_count: int
    test_count: int
    classes: list[SynthClassSpec]
    missing_rates: dict[str, float]

    def validate(self, vocab: ClinicalVocabulary | None = None) -> None:
        vocab = vocab or default_vocabulary()
        if self.image_dim < 1:
            raise ConfigError("image_dim must be positive")
        if self.train_count < 1 or self.test_count < 1:
            raise ConfigError("sample counts must be positive")
        if not self.classes:
            raise ConfigError("at least one class is required")
        names = [c.name for c in self.classes]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate class names in synth spec")
        for c in self.classes:
            c.validate(self.image_dim, vocab)
        for block, rate in self.missing_rates.items():
            if block not in BLOCK_NAMES:
                raise ConfigError(f"missing-rate for unknown block '{block}'")
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"missing rate for '{block}' must be in [0, 1]")

    def class_names(self) -> list[str]:
        return [c.name for c in self.classes]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "image_dim": self.image_dim,
            "train_count": self.train_count,
            "test_count": self.test_count,
            "missing_rates": {b: float(r) for b, r in self.missing_rates.items()},
            "classes": [
                {
                    "name": c.name,
                    "embedding_mean": [float(x) for x in c.embedding_mean],
                    "embedding_std": float(c.embedding_std),
                    "block_probs": {
                        b: [float(x) for x in p] for b, p in c.block_probs.items()
                    },
                }
                for c in self.classes
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SynthSpec":
        try:
            classes = [
                SynthClassSpec(
                    name=c["name"],
                    embedding_mean=np.asarray(c["embedding_mean"], dtype=np.float64),
                    embedding_std=float(c["embedding_std"]),
                    block_probs={
                        b: np.asarray(p, dtype=np.float64)
                        for b, p in c["block_probs"].items()
                    },
                )
                for c in obj["classes"]
            ]
            spec = cls(
                seed=int(obj["seed"]),
                image_dim=int(obj["image_dim"]),
                train_count=int(obj["train_count"]),
                test_count=int(obj["test_count"]),
                classes=classes,
                missing_rates={b: float(r) for b, r in obj.get("missing_rates", {}).items()},
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed synth spec: {exc}") from None
        spec.validate()
        return spec

    @classmethod
    def from_json_file(cls, path: str | Path) -> "SynthSpec":
        try:
            obj = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read synth spec {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"synth spec {path} is not valid JSON: {exc}")
        return cls.from_dict(obj)


def generate_records(
    spec: SynthSpec, vocab: ClinicalVocabulary | None = None
) -> tuple[list[SampleRecord], list[SampleRecord]]:
    """Draw the (train, test) record lists for a spec; fully seeded."""
    vocab = vocab or default_vocabulary()
    spec.validate(vocab)
    rng = np.random.default_rng(spec.seed)
    splits = []
    for split, count in (("train", spec.train_count), ("test", spec.test_count)):
        records = []
        for i in range(count):
            cls = spec.classes[int(rng.integers(len(spec.classes)))]
            emb = cls.embedding_mean + cls.embedding_std * rng.standard_normal(spec.image_dim)
            assignments = {}
            for block in BLOCK_NAMES:
                if rng.random() < spec.missing_rates.get(block, 0.0):
                    continue
                cats = vocab.block(block)
                idx = int(rng.choice(len(cats), p=cls.block_probs[block]))
                assignments[block] = cats[idx]
            records.append(
                SampleRecord(f"{split}-{i:05d}", cls.name, emb, ClinicalRecord(**assignments))
            )
        splits.append(records)
    return splits[0], splits[1]


def gen_synth(
    spec: SynthSpec,
    out_dir: str | Path,
    vocab: ClinicalVocabulary | None = None,
) -> tuple[Path, Path]:
    """Generate and write train.csv/test.csv under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_records, test_records = generate_records(spec, vocab)
    train_path = out_dir / "train.csv"
    test_path = out_dir / "test.csv"
    write_dataset(train_path, train_records, spec.image_dim)
    write_dataset(test_path, test_records, spec.image_dim)
    return train_path, test_path
