import numpy as np
import pytest
from hypothesis import settings

from clinfusion import (
    BLOCK_NAMES,
    BLOCK_SIZES,
    SynthClassSpec,
    SynthSpec,
    default_class_names,
)

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")


def tiny_variant_kwargs():
    return dict(image_dim=12, proj_dim=6, hidden_dim=8, num_classes=4)


@pytest.fixture
def separable_spec():
    """Tiny 4-class set with class means 5 std apart: image alone solves it."""
    names = default_class_names(4)
    dim = 8
    rng = np.random.default_rng(99)
    classes = []
    for k, name in enumerate(names):
        mean = rng.normal(size=dim)
        mean = 5.0 * mean / np.linalg.norm(mean)
        probs = {}
        for block, size in zip(BLOCK_NAMES, BLOCK_SIZES):
            p = np.full(size, 0.5 / (size - 1))
            p[k % size] = 0.5
            probs[block] = p
        classes.append(SynthClassSpec(name, mean, 1.0, probs))
    return SynthSpec(
        seed=13,
        image_dim=dim,
        train_count=100,
        test_count=60,
        classes=classes,
        missing_rates={b: 0.1 for b in BLOCK_NAMES},
    )
