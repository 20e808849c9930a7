"""Experiment configuration files.

A config is a single JSON object tying together data paths, the fusion
variant and the training hyperparameters::

    {
      "train_data": "out/synth/train.csv",
      "test_data": "out/synth/test.csv",          // optional
      "vocabulary": "configs/vocabulary.json",     // optional -> default
      "output_dir": "out/run1",
      "class_names": ["benign_mass", ...],
      "image_dim": 32,
      "variant": {"kind": "cross-attention", "proj_dim": 16, "hidden_dim": 32},
      "train": {"stage_learning_rates": [1e-3, 1e-4, 1e-5],
                "epochs_per_stage": [4, 2, 2], "batch_size": 32,
                "mask_probability": 0.0, "seed": 7}
    }

image_dim and num_classes are taken from the top level, the clinical
width from the vocabulary, so the variant block cannot contradict them.
Referenced input files must exist at load time.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

from .clinical import ClinicalVocabulary, default_vocabulary
from .errors import ConfigError
from .fusion import FusionVariant
from .training import TrainConfig

__all__ = ["ExperimentConfig", "normalize_kind"]

_VARIANT_KEYS = {"kind", "proj_dim", "hidden_dim", "gate_on_projected"}
_TRAIN_KEYS = {
    "stage_learning_rates",
    "epochs_per_stage",
    "batch_size",
    "mask_probability",
    "seed",
    "adam_beta1",
    "adam_beta2",
    "adam_eps",
}
_TOP_KEYS = {
    "train_data",
    "test_data",
    "vocabulary",
    "output_dir",
    "class_names",
    "image_dim",
    "variant",
    "train",
}


def normalize_kind(kind: str) -> str:
    """Accept CLI-style hyphens for variant kinds."""
    return str(kind).replace("-", "_")


@dataclass
class ExperimentConfig:
    train_data: Path
    output_dir: Path
    class_names: tuple[str, ...]
    image_dim: int
    train: TrainConfig
    vocabulary: ClinicalVocabulary
    vocabulary_path: Path | None = None
    test_data: Path | None = None

    @property
    def variant(self) -> FusionVariant:
        return self.train.variant

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        try:
            obj = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}")
        if not isinstance(obj, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        extra = set(obj) - _TOP_KEYS
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        for key in ("train_data", "output_dir", "class_names", "image_dim", "variant"):
            if key not in obj:
                raise ConfigError(f"config is missing required key '{key}'")

        base = path.parent

        def resolve(p) -> Path:
            p = Path(p)
            return p if p.is_absolute() else Path(os.path.normpath(base / p))

        train_data = resolve(obj["train_data"])
        if not train_data.exists():
            raise ConfigError(f"train_data file {train_data} does not exist")
        test_data = None
        if obj.get("test_data") is not None:
            test_data = resolve(obj["test_data"])
            if not test_data.exists():
                raise ConfigError(f"test_data file {test_data} does not exist")
        vocab_path = None
        if obj.get("vocabulary") is not None:
            vocab_path = resolve(obj["vocabulary"])
            if not vocab_path.exists():
                raise ConfigError(f"vocabulary file {vocab_path} does not exist")
            vocab = ClinicalVocabulary.from_json_file(vocab_path)
        else:
            vocab = default_vocabulary()

        class_names = tuple(str(c) for c in obj["class_names"])
        if len(class_names) < 2 or len(set(class_names)) != len(class_names):
            raise ConfigError("class_names must be at least two distinct names")
        image_dim = int(obj["image_dim"])

        vblock = dict(obj["variant"])
        extra = set(vblock) - _VARIANT_KEYS
        if extra:
            raise ConfigError(f"unknown variant keys: {sorted(extra)}")
        if "kind" not in vblock:
            raise ConfigError("variant block is missing 'kind'")
        vblock["kind"] = normalize_kind(vblock["kind"])
        variant = FusionVariant(
            image_dim=image_dim,
            clinical_dim=36,
            num_classes=len(class_names),
            **vblock,
        )

        tblock = dict(obj.get("train", {}))
        extra = set(tblock) - _TRAIN_KEYS
        if extra:
            raise ConfigError(f"unknown train keys: {sorted(extra)}")
        for key in ("stage_learning_rates", "epochs_per_stage"):
            if key in tblock:
                tblock[key] = tuple(tblock[key])
        train_cfg = TrainConfig(variant=variant, **tblock)

        return cls(
            train_data=train_data,
            test_data=test_data,
            output_dir=resolve(obj["output_dir"]),
            class_names=class_names,
            image_dim=image_dim,
            train=train_cfg,
            vocabulary=vocab,
            vocabulary_path=vocab_path,
        )

    def with_overrides(
        self,
        seed: int | None = None,
        mask_probability: float | None = None,
        output_dir: str | Path | None = None,
        kind: str | None = None,
    ) -> "ExperimentConfig":
        cfg = self
        train = cfg.train
        if kind is not None:
            train = replace(train, variant=replace(train.variant, kind=normalize_kind(kind)))
        if seed is not None:
            train = replace(train, seed=int(seed))
        if mask_probability is not None:
            train = replace(train, mask_probability=float(mask_probability))
        if train is not cfg.train:
            cfg = replace(cfg, train=train)
        if output_dir is not None:
            cfg = replace(cfg, output_dir=Path(output_dir))
        return cfg
