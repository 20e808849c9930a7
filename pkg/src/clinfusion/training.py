"""Mini-batch Adam training with a staged learning-rate schedule and
bait-and-switch clinical masking.

The schedule runs a fixed number of epochs per stage at that stage's
learning rate (defaults 1e-3/1e-4/1e-5). Masking draws one Bernoulli(p)
flag per sample per batch from a dedicated RNG stream and zeroes the
clinical vector of flagged samples; the stream is separate from the
init/split/shuffle streams, so masking at p=0 is bit-for-bit equivalent
to no masking code at all.

Everything is derived from config.seed: parameter init, the 75/25
train/validation split, per-epoch shuffles, and mask draws each get their
own spawned generator, making (seed, config, dataset) fully determine the
trained parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .clinical import (
    ClinicalVocabulary,
    default_vocabulary,
    encode,
    mask_clinical,
    sample_drop_flags,
)
from .errors import ConfigError, DegenerateInputError, DimensionError, NumericError
from .fusion import FusionModel, FusionVariant, default_class_names
from .metrics import EvalReport, ScoredSample, one_vs_rest_report
from .tensor import Tape, Tensor, add, scale

__all__ = [
    "TrainConfig",
    "AdamState",
    "EpochRecord",
    "adam_step",
    "train",
    "evaluate_masked",
]

VALIDATION_FRACTION = 0.25


@dataclass(frozen=True)
class TrainConfig:
    variant: FusionVariant
    stage_learning_rates: tuple[float, ...] = (1e-3, 1e-4, 1e-5)
    epochs_per_stage: tuple[int, ...] = (20, 10, 10)
    batch_size: int = 32
    mask_probability: float = 0.0
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        lrs = tuple(float(x) for x in self.stage_learning_rates)
        eps = tuple(int(x) for x in self.epochs_per_stage)
        object.__setattr__(self, "stage_learning_rates", lrs)
        object.__setattr__(self, "epochs_per_stage", eps)
        if not lrs:
            raise ConfigError("at least one stage is required")
        if len(lrs) != len(eps):
            raise ConfigError(
                f"{len(lrs)} learning rates for {len(eps)} stage epoch counts"
            )
        if any(lr <= 0.0 for lr in lrs):
            raise ConfigError("learning rates must be positive")
        if any(b > a for a, b in zip(lrs, lrs[1:])):
            raise ConfigError("stage learning rates must be non-increasing")
        if any(e < 0 for e in eps):
            raise ConfigError("epoch counts must be non-negative")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")
        if not 0.0 <= self.mask_probability <= 1.0:
            raise ConfigError(
                f"mask_probability must be in [0, 1], got {self.mask_probability}"
            )
        if not 0.0 <= self.adam_beta1 < 1.0 or not 0.0 <= self.adam_beta2 < 1.0:
            raise ConfigError("Adam betas must lie in [0, 1)")
        if self.adam_eps <= 0.0:
            raise ConfigError("Adam eps must be positive")


@dataclass
class AdamState:
    """First/second moment accumulators mirroring the parameter shapes."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def for_model(cls, model: FusionModel) -> "AdamState":
        return cls(
            m={name: np.zeros_like(p.value) for name, p in model.parameters()},
            v={name: np.zeros_like(p.value) for name, p in model.parameters()},
        )


def adam_step(
    named_params: Sequence[tuple[str, Tensor]],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One bias-corrected Adam update, in place, from the grads currently
    accumulated on the parameters."""
    if lr <= 0.0:
        raise ConfigError(f"learning rate must be positive, got {lr}")
    state.t += 1
    c1 = 1.0 - beta1 ** state.t
    c2 = 1.0 - beta2 ** state.t
    for name, p in named_params:
        g = p.grad
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient in parameter '{name}'")
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p.value -= lr * (m / c1) / (np.sqrt(v / c2) + eps)


@dataclass
class EpochRecord:
    epoch: int
    stage: int
    learning_rate: float
    train_loss: float
    val_loss: float
    val_macro_auc_roc: float

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "stage": self.stage,
            "learning_rate": self.learning_rate,
            "train_loss": self.train_loss,
            "val_loss": self.val_loss,
            "val_macro_auc_roc": self.val_macro_auc_roc,
        }


def _prepared_samples(dataset, vocab: ClinicalVocabulary, class_names) -> list[tuple]:
    index = {name: i for i, name in enumerate(class_names)}
    prepared = []
    for rec in dataset:
        if rec.label not in index:
            raise ConfigError(
                f"sample '{rec.sample_id}' has label '{rec.label}' "
                f"outside the configured classes {list(class_names)}"
            )
        prepared.append((rec.image_embedding, encode(rec.clinical, vocab), index[rec.label]))
    return prepared


def _apply_drop_flags(batch: list[tuple], flags) -> list[tuple]:
    # seam kept separate so tests can disable masking wholesale
    return [(e, mask_clinical(cv, bool(f)), y) for (e, cv, y), f in zip(batch, flags)]


def _mean_batch_loss(model: FusionModel, batch: list[tuple], tape: Tape) -> Tensor:
    total = None
    for e, cv, y in batch:
        li = model.loss(e, cv, y, tape)
        total = li if total is None else add(total, li, tape)
    return scale(total, 1.0 / len(batch), tape)


def _validation_metrics(model: FusionModel, samples, class_names) -> tuple[float, float]:
    if not samples:
        return float("nan"), float("nan")
    losses = []
    scored = []
    for e, cv, y in samples:
        losses.append(float(model.loss(e, cv, y).value))
        scored.append(ScoredSample(y, model.predict_proba(e, cv)))
    try:
        auc = one_vs_rest_report(scored, class_names).macro_auc_roc
    except DegenerateInputError:
        auc = float("nan")
    return float(np.mean(losses)), auc


def train(
    dataset,
    config: TrainConfig,
    vocab: ClinicalVocabulary | None = None,
    class_names: Sequence[str] | None = None,
    on_epoch: Callable[[EpochRecord], None] | None = None,
) -> tuple[FusionModel, list[EpochRecord]]:
    """Train one fusion model; returns the model and per-epoch history.

    ``on_epoch`` is called with each completed EpochRecord, which carries
    the stage index and the learning rate actually used.
    """
    dataset = list(dataset)
    if not dataset:
        raise ConfigError("training dataset is empty")
    vocab = vocab or default_vocabulary()
    variant = config.variant
    names = (
        tuple(class_names)
        if class_names is not None
        else default_class_names(variant.num_classes)
    )
    if len(names) != variant.num_classes:
        raise ConfigError(
            f"{len(names)} class names for variant with {variant.num_classes} classes"
        )
    samples = _prepared_samples(dataset, vocab, names)
    for e, _, _ in samples:
        if e.shape != (variant.image_dim,):
            raise DimensionError(
                f"image embedding has shape {e.shape}, expected ({variant.image_dim},)"
            )

    init_ss, split_ss, shuffle_ss, mask_ss = np.random.SeedSequence(config.seed).spawn(4)
    model = FusionModel.initialize(variant, np.random.default_rng(init_ss), names)
    state = AdamState.for_model(model)

    n = len(samples)
    perm = np.random.default_rng(split_ss).permutation(n)
    n_train = max(1, int(round(n * (1.0 - VALIDATION_FRACTION))))
    train_samples = [samples[i] for i in perm[:n_train]]
    val_samples = [samples[i] for i in perm[n_train:]]

    shuffle_rng = np.random.default_rng(shuffle_ss)
    mask_rng = np.random.default_rng(mask_ss)
    p = config.mask_probability

    history: list[EpochRecord] = []
    epoch = 0
    for stage, (lr, n_epochs) in enumerate(
        zip(config.stage_learning_rates, config.epochs_per_stage)
    ):
        for _ in range(n_epochs):
            order = shuffle_rng.permutation(n_train)
            batch_losses = []
            for start in range(0, n_train, config.batch_size):
                chunk = order[start:start + config.batch_size]
                batch = [train_samples[i] for i in chunk]
                flags = sample_drop_flags(len(batch), p, mask_rng)
                batch = _apply_drop_flags(batch, flags)
                tape = Tape()
                mean_loss = _mean_batch_loss(model, batch, tape)
                if not math.isfinite(float(mean_loss.value)):
                    raise NumericError(
                        f"non-finite loss at epoch {epoch}, batch {start // config.batch_size}"
                    )
                tape.backward(mean_loss)
                adam_step(
                    model.parameters(), state, lr,
                    config.adam_beta1, config.adam_beta2, config.adam_eps,
                )
                model.zero_grads()
                batch_losses.append(float(mean_loss.value))
            val_loss, val_auc = _validation_metrics(model, val_samples, names)
            record = EpochRecord(
                epoch=epoch,
                stage=stage,
                learning_rate=lr,
                train_loss=float(np.mean(batch_losses)),
                val_loss=val_loss,
                val_macro_auc_roc=val_auc,
            )
            history.append(record)
            if on_epoch is not None:
                on_epoch(record)
            epoch += 1
    return model, history


def evaluate_masked(
    model: FusionModel,
    dataset,
    p: float,
    seed: int,
    vocab: ClinicalVocabulary | None = None,
) -> EvalReport:
    """Zero the clinical vector of a seeded Bernoulli(p) subset of the
    dataset, then score the model one-vs-rest."""
    dataset = list(dataset)
    if not dataset:
        raise ConfigError("evaluation dataset is empty")
    vocab = vocab or default_vocabulary()
    names = model.class_names
    samples = _prepared_samples(dataset, vocab, names)
    flags = sample_drop_flags(len(samples), p, np.random.default_rng(seed))
    scored = []
    for (e, cv, y), f in zip(samples, flags):
        cv = mask_clinical(cv, bool(f))
        scored.append(ScoredSample(y, model.predict_proba(e, cv)))
    return one_vs_rest_report(scored, names)
