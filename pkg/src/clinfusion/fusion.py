"""The three fusion architectures: plain concatenation, co-attention and
cross-attention gating, plus the shared two-layer classifier head.

All variants first project both modalities to proj_dim through affine+relu
layers. The attention variants then compute sigmoid gates and scale the
projected embeddings elementwise before concatenation:

* co-attention: both gates are computed from the concatenation of the two
  raw (unprojected) embeddings.
* cross-attention: each modality's gate is computed only from the other
  modality's raw embedding, so a zeroed clinical vector pins the image
  gate at sigmoid(bias).

Gates read the raw embeddings and scale the projected ones; that is the
published formulation and the default. ``gate_on_projected=True`` switches
the gate inputs to the projected embeddings instead (a tidier but
different model), which changes the gate weight shapes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import clinical as clin
from .errors import ConfigError, DimensionError
from .tensor import (
    Tape,
    Tensor,
    concat,
    hadamard,
    linear,
    relu,
    sigmoid,
    softmax_cross_entropy,
    softmax_values,
)

__all__ = ["VARIANT_KINDS", "FusionVariant", "FusionModel", "default_class_names"]

VARIANT_KINDS = ("concat", "co_attention", "cross_attention")


def default_class_names(num_classes: int) -> tuple[str, ...]:
    if num_classes == 4:
        return (
            "benign_mass",
            "malignant_mass",
            "benign_calcification",
            "malignant_calcification",
        )
    return tuple(f"class_{i}" for i in range(num_classes))


@dataclass(frozen=True)
class FusionVariant:
    """Architecture hyperparameters; parameter shapes follow from these."""

    kind: str
    image_dim: int = 2048
    clinical_dim: int = clin.TOTAL_DIM
    proj_dim: int = 100
    hidden_dim: int = 200
    num_classes: int = 4
    gate_on_projected: bool = False

    def __post_init__(self):
        if self.kind not in VARIANT_KINDS:
            raise ConfigError(
                f"unknown fusion variant '{self.kind}', expected one of {VARIANT_KINDS}"
            )
        for name in ("image_dim", "clinical_dim", "proj_dim", "hidden_dim"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.num_classes < 2:
            raise ConfigError("num_classes must be at least 2")

    @property
    def fused_dim(self) -> int:
        return 2 * self.proj_dim

    @property
    def has_gates(self) -> bool:
        return self.kind != "concat"

    def gate_input_dims(self) -> tuple[int, int] | None:
        """(image-gate input width, clinical-gate input width), or None for
        the gateless concat variant."""
        if not self.has_gates:
            return None
        src_e, src_c = (
            (self.proj_dim, self.proj_dim)
            if self.gate_on_projected
            else (self.image_dim, self.clinical_dim)
        )
        if self.kind == "co_attention":
            both = src_e + src_c
            return both, both
        return src_c, src_e  # cross: each gate sees only the other modality


class FusionModel:
    """Parameter set for one fusion variant, plus class-name metadata.

    Parameters live in a fixed declared order (see parameter_shapes);
    serialization and Adam state both follow that order.
    """

    def __init__(self, variant: FusionVariant, params: dict[str, Tensor],
                 class_names=None):
        expected = self.parameter_shapes(variant)
        if list(params) != list(expected):
            raise ConfigError(
                f"parameter names {list(params)} do not match the "
                f"{variant.kind} layout {list(expected)}"
            )
        for name, shape in expected.items():
            got = params[name].value.shape
            if got != shape:
                raise DimensionError(f"parameter '{name}' has shape {got}, expected {shape}")
        if class_names is None:
            class_names = default_class_names(variant.num_classes)
        class_names = tuple(str(c) for c in class_names)
        if len(class_names) != variant.num_classes:
            raise ConfigError(
                f"{len(class_names)} class names for {variant.num_classes} classes"
            )
        self.variant = variant
        self.params = params
        self.class_names = class_names

    @staticmethod
    def parameter_shapes(variant: FusionVariant) -> dict[str, tuple[int, ...]]:
        """Declared parameter order for a variant."""
        p = variant.proj_dim
        shapes: dict[str, tuple[int, ...]] = {
            "image_proj_w": (variant.image_dim, p),
            "image_proj_b": (p,),
            "clinical_proj_w": (variant.clinical_dim, p),
            "clinical_proj_b": (p,),
        }
        gate_dims = variant.gate_input_dims()
        if gate_dims is not None:
            gi, gc = gate_dims
            shapes["image_gate_w"] = (gi, p)
            shapes["image_gate_b"] = (p,)
            shapes["clinical_gate_w"] = (gc, p)
            shapes["clinical_gate_b"] = (p,)
        shapes["hidden_w"] = (variant.fused_dim, variant.hidden_dim)
        shapes["hidden_b"] = (variant.hidden_dim,)
        shapes["out_w"] = (variant.hidden_dim, variant.num_classes)
        shapes["out_b"] = (variant.num_classes,)
        return shapes

    @classmethod
    def initialize(cls, variant: FusionVariant, seed=0, class_names=None) -> "FusionModel":
        """Weights uniform in ±1/sqrt(fan_in), biases zero."""
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        params: dict[str, Tensor] = {}
        for name, shape in cls.parameter_shapes(variant).items():
            if name.endswith("_b"):
                params[name] = Tensor(np.zeros(shape))
            else:
                bound = 1.0 / np.sqrt(shape[0])
                params[name] = Tensor(rng.uniform(-bound, bound, size=shape))
        return cls(variant, params, class_names)

    def parameters(self) -> list[tuple[str, Tensor]]:
        return list(self.params.items())

    def zero_grads(self) -> None:
        for t in self.params.values():
            t.zero_grad()

    # --- forward pieces ---------------------------------------------------

    def project_image(self, e: Tensor, tape: Tape | None = None) -> Tensor:
        return relu(linear(e, self.params["image_proj_w"], self.params["image_proj_b"], tape), tape)

    def project_clinical(self, c: Tensor, tape: Tape | None = None) -> Tensor:
        return relu(linear(c, self.params["clinical_proj_w"], self.params["clinical_proj_b"], tape), tape)

    def _gate_tensors(self, e: Tensor, c: Tensor, e_proj: Tensor, c_proj: Tensor,
                      tape: Tape | None) -> tuple[Tensor, Tensor]:
        src_e, src_c = (e_proj, c_proj) if self.variant.gate_on_projected else (e, c)
        if self.variant.kind == "co_attention":
            joint = concat(src_e, src_c, tape)
            img_in = clin_in = joint
        else:
            img_in, clin_in = src_c, src_e
        alpha_e = sigmoid(
            linear(img_in, self.params["image_gate_w"], self.params["image_gate_b"], tape), tape
        )
        alpha_c = sigmoid(
            linear(clin_in, self.params["clinical_gate_w"], self.params["clinical_gate_b"], tape), tape
        )
        return alpha_e, alpha_c

    def fuse(self, e: Tensor, c: Tensor, e_proj: Tensor, c_proj: Tensor,
             tape: Tape | None = None) -> Tensor:
        """Combine projected embeddings per the variant; image half first."""
        if not self.variant.has_gates:
            return concat(e_proj, c_proj, tape)
        alpha_e, alpha_c = self._gate_tensors(e, c, e_proj, c_proj, tape)
        return concat(hadamard(alpha_e, e_proj, tape), hadamard(alpha_c, c_proj, tape), tape)

    def _head_logits(self, fused: Tensor, tape: Tape | None = None) -> Tensor:
        hidden = relu(linear(fused, self.params["hidden_w"], self.params["hidden_b"], tape), tape)
        return linear(hidden, self.params["out_w"], self.params["out_b"], tape)

    @staticmethod
    def _clinical_values(clinical) -> np.ndarray:
        if isinstance(clinical, clin.ClinicalVector):
            return clinical.values
        return np.asarray(clinical, dtype=np.float64)

    def _check_inputs(self, e: np.ndarray, c: np.ndarray) -> None:
        if e.shape != (self.variant.image_dim,):
            raise DimensionError(
                f"image embedding has shape {e.shape}, expected ({self.variant.image_dim},)"
            )
        if c.shape != (self.variant.clinical_dim,):
            raise DimensionError(
                f"clinical vector has shape {c.shape}, expected ({self.variant.clinical_dim},)"
            )

    def logits(self, e, clinical, tape: Tape | None = None) -> Tensor:
        """Full forward pass up to the classifier logits, recorded on
        ``tape`` when one is given."""
        e = np.asarray(e, dtype=np.float64)
        c = self._clinical_values(clinical)
        self._check_inputs(e, c)
        e_t = Tensor(e)
        c_t = Tensor(c)
        e_proj = self.project_image(e_t, tape)
        c_proj = self.project_clinical(c_t, tape)
        fused = self.fuse(e_t, c_t, e_proj, c_proj, tape)
        return self._head_logits(fused, tape)

    def loss(self, e, clinical, target: int, tape: Tape | None = None) -> Tensor:
        """Cross-entropy of the softmax over the logits, as a scalar."""
        return softmax_cross_entropy(self.logits(e, clinical, tape), target, tape)

    def predict_proba(self, e, clinical) -> np.ndarray:
        """Class probabilities; sums to 1."""
        return softmax_values(self.logits(e, clinical).value)

    def classify(self, fused: np.ndarray) -> np.ndarray:
        """Probabilities from an already-fused vector (classifier head only)."""
        fused = np.asarray(fused, dtype=np.float64)
        if fused.shape != (self.variant.fused_dim,):
            raise DimensionError(
                f"fused vector has shape {fused.shape}, expected ({self.variant.fused_dim},)"
            )
        return softmax_values(self._head_logits(Tensor(fused)).value)

    def gates(self, e, clinical) -> tuple[np.ndarray, np.ndarray]:
        """Inference-time gate activations (image gate, clinical gate)."""
        if not self.variant.has_gates:
            raise ConfigError("the concat variant has no attention gates")
        e = np.asarray(e, dtype=np.float64)
        c = self._clinical_values(clinical)
        self._check_inputs(e, c)
        e_t = Tensor(e)
        c_t = Tensor(c)
        e_proj = self.project_image(e_t)
        c_proj = self.project_clinical(c_t)
        alpha_e, alpha_c = self._gate_tensors(e_t, c_t, e_proj, c_proj, None)
        return alpha_e.value, alpha_c.value

    def with_class_names(self, class_names) -> "FusionModel":
        return FusionModel(self.variant, self.params, class_names)
