#!/usr/bin/env python3
"""Regenerate the committed synthetic-dataset specs and the default
vocabulary file under configs/. Deterministic; safe to re-run."""

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from clinfusion import BLOCK_NAMES, BLOCK_SIZES, default_class_names, default_vocabulary
from clinfusion.data import SynthClassSpec, SynthSpec


def acceptance_spec() -> SynthSpec:
    """2000/500 split where the clinical categories are deterministic per
    class and the image embeddings share a zero mean but differ in scale.

    The radial image signal needs the hidden layer (no linear cut works),
    so it trains slowly; the clinical signal saturates almost instantly.
    That combination makes masked training visibly matter: without it the
    image pathway stops learning once the clinical loss hits zero.
    """
    names = default_class_names(4)
    stds = (0.6, 1.0, 1.6, 2.5)
    dim = 32
    classes = []
    for k, name in enumerate(names):
        probs = {}
        for block, size in zip(BLOCK_NAMES, BLOCK_SIZES):
            p = np.zeros(size)
            p[(2 * k + 1) % size] = 1.0
            probs[block] = p
        classes.append(SynthClassSpec(name, np.zeros(dim), stds[k], probs))
    return SynthSpec(
        seed=7,
        image_dim=dim,
        train_count=2000,
        test_count=500,
        classes=classes,
        missing_rates={b: 0.0 for b in BLOCK_NAMES},
    )


def small_spec() -> SynthSpec:
    """Quick well-separated fixture for pipeline/demo runs: class means
    5 std apart, mildly noisy clinical, some natural missingness."""
    names = default_class_names(4)
    dim = 16
    rng = np.random.default_rng(20260811)
    classes = []
    for k, name in enumerate(names):
        mean = rng.normal(size=dim)
        mean = 5.0 * mean / np.linalg.norm(mean)
        probs = {}
        for block, size in zip(BLOCK_NAMES, BLOCK_SIZES):
            p = np.full(size, 0.4 / (size - 1))
            p[(3 * k) % size] = 0.6
            probs[block] = p
        classes.append(SynthClassSpec(name, mean, 1.0, probs))
    return SynthSpec(
        seed=11,
        image_dim=dim,
        train_count=240,
        test_count=120,
        classes=classes,
        missing_rates={b: 0.15 for b in BLOCK_NAMES},
    )


def main() -> None:
    out = ROOT / "configs"
    out.mkdir(exist_ok=True)
    (out / "vocabulary.json").write_text(
        json.dumps(default_vocabulary().to_dict(), indent=2) + "\n"
    )
    (out / "synth_acceptance.json").write_text(
        json.dumps(acceptance_spec().to_dict(), indent=2) + "\n"
    )
    (out / "synth_small.json").write_text(
        json.dumps(small_spec().to_dict(), indent=2) + "\n"
    )
    print(f"wrote specs under {out}")


if __name__ == "__main__":
    main()
