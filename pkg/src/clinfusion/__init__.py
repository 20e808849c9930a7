"""clinfusion: multimodal fusion of precomputed image embeddings with
block-structured categorical clinical features.

The package trains three fusion architectures (concatenation,
co-attention, cross-attention) with a from-scratch reverse-mode autodiff
engine and Adam, supports bait-and-switch masking for missing-modality
robustness, and reports per-class ROC/PR AUCs.
"""

from .clinical import (
    BLOCK_NAMES,
    BLOCK_SIZES,
    TOTAL_DIM,
    ClinicalRecord,
    ClinicalVector,
    ClinicalVocabulary,
    decode,
    default_vocabulary,
    encode,
    mask_clinical,
    sample_drop_flags,
)
from .data import (
    SampleRecord,
    SynthClassSpec,
    SynthSpec,
    gen_synth,
    generate_records,
    load_dataset,
    write_dataset,
)
from .errors import (
    ClinFusionError,
    ConfigError,
    DataFormatError,
    DegenerateInputError,
    DimensionError,
    NumericError,
    PersistenceError,
    VariantMismatchError,
    VocabularyError,
)
from .fusion import FusionModel, FusionVariant, default_class_names
from .metrics import (
    EvalReport,
    ScoredSample,
    one_vs_rest_report,
    pr_curve,
    roc_curve,
)
from .persist import load_model, save_model, write_eval_report, write_history
from .tensor import (
    Tape,
    Tensor,
    gradient_check,
    sigmoid_values,
    softmax_values,
)
from .training import (
    AdamState,
    EpochRecord,
    TrainConfig,
    adam_step,
    evaluate_masked,
    train,
)

__version__ = "0.1.0"
