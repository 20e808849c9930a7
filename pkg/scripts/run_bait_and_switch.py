#!/usr/bin/env python3
"""Missing-clinical robustness experiment.

For each fusion variant, trains one model without masking and one with
mask probability 0.3, then evaluates both with test-time masking 0.3 and
prints per-class and macro AUC-PR / AUC-ROC. Repeats over several seeds
and reports medians.

Usage:
    python3 scripts/run_bait_and_switch.py [--seeds 101 202 303]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from clinfusion import (
    FusionVariant,
    SynthSpec,
    TrainConfig,
    evaluate_masked,
    generate_records,
    train,
)

VARIANTS = ("concat", "co_attention", "cross_attention")


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--spec", default=str(ROOT / "configs" / "synth_acceptance.json"))
    ap.add_argument("--mask-p", type=float, default=0.3)
    ap.add_argument("--proj-dim", type=int, default=16)
    ap.add_argument("--hidden-dim", type=int, default=32)
    ap.add_argument("--epochs", type=int, nargs=3, default=[10, 5, 2],
                    metavar=("E1", "E2", "E3"))
    ap.add_argument("--seeds", type=int, nargs="+", default=[101, 202, 303])
    return ap.parse_args()


def main():
    args = parse_args()
    spec = SynthSpec.from_json_file(args.spec)
    train_records, test_records = generate_records(spec)
    names = spec.class_names()
    print(f"dataset: {len(train_records)} train / {len(test_records)} test, "
          f"test-time mask p={args.mask_p}, seeds {args.seeds}")

    def run(kind, p_train, seed):
        variant = FusionVariant(
            kind=kind, image_dim=spec.image_dim, proj_dim=args.proj_dim,
            hidden_dim=args.hidden_dim, num_classes=len(names),
        )
        cfg = TrainConfig(
            variant=variant, epochs_per_stage=tuple(args.epochs),
            mask_probability=p_train, seed=seed,
        )
        model, _ = train(train_records, cfg, class_names=names)
        return evaluate_masked(model, test_records, args.mask_p, seed=11)

    header = f"{'variant':<18} {'train p':>8} {'macro PR':>9} {'macro ROC':>10}"
    header += "".join(f" {n[:12]:>13}" for n in names)
    print("\nmedians over seeds (per-class columns are AUC-PR):")
    print(header)
    summary = {}
    for kind in VARIANTS:
        for p_train in (0.0, args.mask_p):
            reports = [run(kind, p_train, s) for s in args.seeds]
            med_pr = float(np.median([r.macro_auc_pr for r in reports]))
            med_roc = float(np.median([r.macro_auc_roc for r in reports]))
            per_class = [
                float(np.median([r.classes[i].auc_pr for r in reports]))
                for i in range(len(names))
            ]
            summary[(kind, p_train)] = med_pr
            row = f"{kind:<18} {p_train:>8.1f} {med_pr:>9.4f} {med_roc:>10.4f}"
            row += "".join(f" {v:>13.4f}" for v in per_class)
            print(row)

    print("\nmasked-training gain in median macro AUC-PR:")
    for kind in VARIANTS:
        gain = summary[(kind, args.mask_p)] - summary[(kind, 0.0)]
        print(f"  {kind}: {gain:+.4f}")


if __name__ == "__main__":
    main()
