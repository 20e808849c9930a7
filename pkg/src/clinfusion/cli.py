"""Command-line interface.

Subcommands::

    gen-synth  --spec spec.json --out DIR          write train.csv/test.csv
    train      --config cfg.json [--seed N] [--mask-p P] [--variant K] [--out DIR]
    evaluate   --model m.clf --data d.csv [--vocab v.json] [--mask-p P]
               [--seed N] --out DIR
    predict    --model m.clf --data d.csv [--vocab v.json] [--index I | --id ID]
    gradcheck  --variant K [--seeds N] [--epsilon E] [--threshold T] [dims...]

Exit codes: 0 success; 1 gradcheck threshold exceeded; 2 usage;
3 config error; 4 vocabulary error; 5 dimension error; 6 data format
error; 7 persistence error; 8 numeric error; 9 degenerate metric input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .clinical import ClinicalVocabulary, default_vocabulary, encode
from .config import ExperimentConfig, normalize_kind
from .data import SynthSpec, gen_synth, load_dataset
from .errors import (
    ConfigError,
    DataFormatError,
    DegenerateInputError,
    DimensionError,
    NumericError,
    PersistenceError,
    VocabularyError,
)
from .fusion import FusionModel, FusionVariant
from .persist import load_model, save_model, write_eval_report, write_history
from .tensor import gradient_check
from .training import evaluate_masked, train

__all__ = ["main", "entry", "EXIT_CODES"]

EXIT_CODES = {
    ConfigError: 3,
    VocabularyError: 4,
    DimensionError: 5,
    DataFormatError: 6,
    PersistenceError: 7,
    NumericError: 8,
    DegenerateInputError: 9,
}


def _load_vocab(path: str | None) -> ClinicalVocabulary:
    return ClinicalVocabulary.from_json_file(path) if path else default_vocabulary()


def _cmd_gen_synth(args) -> int:
    spec = SynthSpec.from_json_file(args.spec)
    vocab = _load_vocab(args.vocab)
    train_path, test_path = gen_synth(spec, args.out, vocab)
    print(f"wrote {train_path} ({spec.train_count} rows)")
    print(f"wrote {test_path} ({spec.test_count} rows)")
    return 0


def _cmd_train(args) -> int:
    cfg = ExperimentConfig.from_json_file(args.config)
    cfg = cfg.with_overrides(
        seed=args.seed,
        mask_probability=args.mask_p,
        output_dir=args.out,
        kind=args.variant,
    )
    dataset = load_dataset(cfg.train_data, cfg.vocabulary, cfg.image_dim, cfg.class_names)
    model, history = train(dataset, cfg.train, cfg.vocabulary, cfg.class_names)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    model_path = cfg.output_dir / "model.clf"
    history_path = cfg.output_dir / "history.jsonl"
    save_model(model, model_path)
    write_history(history, history_path)
    last = history[-1] if history else None
    if last is not None:
        print(
            f"trained {cfg.variant.kind} for {len(history)} epochs: "
            f"train_loss={last.train_loss:.4f} val_loss={last.val_loss:.4f} "
            f"val_macro_auc_roc={last.val_macro_auc_roc:.4f}"
        )
    print(f"wrote {model_path}")
    print(f"wrote {history_path}")
    return 0


def _cmd_evaluate(args) -> int:
    model = load_model(args.model)
    vocab = _load_vocab(args.vocab)
    dataset = load_dataset(args.data, vocab, model.variant.image_dim, model.class_names)
    report = evaluate_masked(model, dataset, args.mask_p, args.seed, vocab)
    out_dir = Path(args.out)
    json_path, csv_path = write_eval_report(report, out_dir)
    for name, auc_roc, auc_pr in report.summary_rows():
        print(f"{name}: auc_roc={auc_roc:.4f} auc_pr={auc_pr:.4f}")
    print(f"wrote {json_path}")
    print(f"wrote {csv_path}")
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    vocab = _load_vocab(args.vocab)
    dataset = load_dataset(args.data, vocab, model.variant.image_dim)
    if args.id is not None:
        matches = [r for r in dataset if r.sample_id == args.id]
        if not matches:
            raise DataFormatError(f"no sample with id '{args.id}' in {args.data}")
        record = matches[0]
    else:
        if not 0 <= args.index < len(dataset):
            raise DataFormatError(
                f"index {args.index} out of range for {len(dataset)} samples"
            )
        record = dataset[args.index]
    probs = model.predict_proba(record.image_embedding, encode(record.clinical, vocab))
    out = {
        "id": record.sample_id,
        "probabilities": {
            name: float(p) for name, p in zip(model.class_names, probs)
        },
    }
    print(json.dumps(out, indent=2))
    return 0


def _cmd_gradcheck(args) -> int:
    variant = FusionVariant(
        kind=normalize_kind(args.variant),
        image_dim=args.image_dim,
        proj_dim=args.proj_dim,
        hidden_dim=args.hidden_dim,
        num_classes=args.classes,
    )
    worst = 0.0
    for seed in range(args.seeds):
        rng = np.random.default_rng(seed)
        model = FusionModel.initialize(variant, rng)
        e = rng.normal(size=variant.image_dim)
        c = rng.normal(size=variant.clinical_dim)
        target = int(rng.integers(variant.num_classes))
        params = [t for _, t in model.parameters()]
        err = gradient_check(
            lambda tape: model.loss(e, c, target, tape), params, args.epsilon
        )
        worst = max(worst, err)
    print(f"max relative gradient error over {args.seeds} seeds: {worst:.3e}")
    if worst > args.threshold:
        print(f"FAIL: exceeds threshold {args.threshold:.3e}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clinfusion",
        description="Multimodal fusion of image embeddings and clinical features.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="generate a synthetic dataset from a spec")
    p.add_argument("--spec", required=True, help="synthetic dataset spec (JSON)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--vocab", default=None, help="vocabulary JSON (default: built-in)")
    p.set_defaults(func=_cmd_gen_synth)

    p = sub.add_parser("train", help="train a fusion model from a config file")
    p.add_argument("--config", required=True, help="experiment config (JSON)")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--mask-p", type=float, default=None, help="override mask probability")
    p.add_argument("--variant", default=None, help="override fusion variant kind")
    p.add_argument("--out", default=None, help="override output directory")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a trained model on a dataset")
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--vocab", default=None, help="vocabulary JSON (default: built-in)")
    p.add_argument("--mask-p", type=float, default=0.0, help="test-time mask probability")
    p.add_argument("--seed", type=int, default=0, help="mask RNG seed")
    p.add_argument("--out", required=True, help="output directory for report files")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("predict", help="print class probabilities for one record")
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--vocab", default=None, help="vocabulary JSON (default: built-in)")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--index", type=int, default=0, help="row index (default 0)")
    group.add_argument("--id", default=None, help="sample id")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("gradcheck", help="finite-difference check of model gradients")
    p.add_argument("--variant", required=True, help="concat | co-attention | cross-attention")
    p.add_argument("--seeds", type=int, default=5, help="number of random models")
    p.add_argument("--epsilon", type=float, default=1e-5)
    p.add_argument("--threshold", type=float, default=1e-4)
    p.add_argument("--image-dim", type=int, default=32)
    p.add_argument("--proj-dim", type=int, default=8)
    p.add_argument("--hidden-dim", type=int, default=16)
    p.add_argument("--classes", type=int, default=4)
    p.set_defaults(func=_cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except tuple(EXIT_CODES) as exc:
        print(f"error: {exc}", file=sys.stderr)
        for klass, code in EXIT_CODES.items():
            if isinstance(exc, klass):
                return code
        return 1  # unreachable


def entry() -> None:  # console-script hook
    sys.exit(main())
