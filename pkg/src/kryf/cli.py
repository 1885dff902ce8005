"""Command-line pipeline: generate -> train -> evaluate -> ablate, plus the
single-sequence reconstruction and moments utilities.

Exit codes: 0 success, 1 usage error, 2 data error (wrong split, bad file,
version mismatch), 3 numerical failure (breakdown, invalid moments).
A JSON config file may supply defaults for any long flag; explicit flags
win.
"""

import argparse
import csv
import json
import logging
import sys

import numpy as np

from . import chain, datasets, evaluate
from .checkpoint import load_checkpoint, save_checkpoint
from .exceptions import (
    DataLeak,
    DimensionTooLarge,
    GenerationExhausted,
    KryfError,
    LanczosBreakdown,
    NonPositiveCoefficient,
    NonPositiveSquare,
    PrefixMismatch,
    SingularDesign,
    VersionMismatch,
)
from .model import MaskPolicy, ModelConfig, averaged_attention_map
from .training import TrainConfig, increments_from_sequences, train

logger = logging.getLogger("kryf")

_NUMERICAL_ERRORS = (LanczosBreakdown, NonPositiveSquare, NonPositiveCoefficient,
                     GenerationExhausted, SingularDesign)
_DATA_ERRORS = (DataLeak, PrefixMismatch, VersionMismatch, DimensionTooLarge,
                OSError, json.JSONDecodeError, KeyError, ValueError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; spec says 1
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_generate(sub):
    p = sub.add_parser("generate", help="generate a Lanczos sequence dataset")
    p.add_argument("--family", choices=datasets.FAMILIES, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--length", type=int, required=True, help="sequence length T")
    p.add_argument("--sites", type=int, default=8, help="chain length L (tfim)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", choices=("train", "test"), default="train")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)


def _add_train(sub):
    p = sub.add_parser("train", help="train the transformer on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--report", help="write the per-epoch report stream (JSONL)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--n-in", type=int, default=10)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--val-fraction", type=float, default=0.1)
    p.add_argument("--d-model", type=int, default=64)
    p.add_argument("--n-layers", type=int, default=3)
    p.add_argument("--n-heads", type=int, default=4)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--max-position", type=int, default=128)


def _eval_common(p):
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True, help="test-tagged dataset")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--n-in", type=int, default=10)
    p.add_argument("--fit-form", choices=baseline_forms(), default=None,
                   help="default: loglinear for tfim (d=1), linear for xyz")
    p.add_argument("--time-max", type=float, default=10.0)
    p.add_argument("--time-points", type=int, default=200)


def baseline_forms():
    from .baseline import FORMS

    return FORMS


def _add_evaluate(sub):
    p = sub.add_parser("evaluate", help="compare transformer vs baseline")
    _eval_common(p)
    p.add_argument("--mask", default="full",
                   choices=("full", "parity", "long_range", "early"))
    p.add_argument("--mask-k", type=int, default=3)


def _add_ablate(sub):
    p = sub.add_parser("ablate", help="run attention-mask ablations")
    _eval_common(p)
    p.add_argument("--k", type=int, default=3, help="window for long_range/early")


def _add_reconstruct(sub):
    p = sub.add_parser("reconstruct", help="dump K(t), C(t) for one sequence")
    p.add_argument("--coefficients", help="comma-separated b values")
    p.add_argument("--dataset", help="read the sequence from a dataset file")
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--time-max", type=float, default=10.0)
    p.add_argument("--time-points", type=int, default=200)
    p.add_argument("--out", required=True)


def _add_moments(sub):
    p = sub.add_parser("moments", help="convert moments <-> Lanczos coefficients")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--from-lanczos", help="comma-separated b values")
    group.add_argument("--from-moments", help="comma-separated mu_0, mu_2, ...")
    p.add_argument("--order", type=int, default=None,
                   help="number of even moments to emit (default: len(b))")


def build_parser():
    parser = _Parser(prog="kryf", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", help="JSON file with default flag values")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_generate(sub)
    _add_train(sub)
    _add_evaluate(sub)
    _add_ablate(sub)
    _add_reconstruct(sub)
    _add_moments(sub)
    return parser


def _apply_config_defaults(parser, argv):
    """Pre-scan for --config and install its values as parser defaults."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if known.config:
        with open(known.config) as fh:
            defaults = json.load(fh)
        for action in parser._subparsers._group_actions[0].choices.values():
            action.set_defaults(**{
                k.replace("-", "_"): v for k, v in defaults.items()
            })
    return parser


def _parse_values(text):
    return np.array([float(v) for v in text.replace(",", " ").split()])


def _times(args):
    return np.linspace(0.0, args.time_max, args.time_points)


def cmd_generate(args):
    ds = datasets.generate_dataset(
        family=args.family, count=args.count, T=args.length,
        master_seed=args.seed, split=args.split,
        L=args.sites if args.family == "tfim" else None, workers=args.workers,
    )
    datasets.save_dataset(ds, args.out)
    logger.info("wrote %d %s sequences to %s", len(ds), args.family, args.out)
    return 0


def cmd_train(args):
    ds = datasets.load_dataset(args.dataset)
    if ds.split != "train":
        raise DataLeak(f"training requires a train-tagged dataset, got {ds.split!r}")
    model_cfg = ModelConfig(
        d_model=args.d_model, n_layers=args.n_layers, n_heads=args.n_heads,
        dropout_rate=args.dropout, max_position=args.max_position,
    )
    train_cfg = TrainConfig(
        learning_rate=args.learning_rate, batch_size=args.batch_size,
        epochs=args.epochs, n_in=args.n_in, weight_decay=args.weight_decay,
        val_fraction=args.val_fraction, seed=args.seed,
    )
    increments = increments_from_sequences(ds.sequences)
    params, report = train(increments, train_cfg, model_cfg)
    provenance = {
        "dataset_checksum": ds.checksum(),
        "trained_on": ds.describe(),
        "final_checksum": report.final_checksum,
        "run_config": {"train": report.config["train"],
                       "model": report.config["model"]},
    }
    save_checkpoint(args.out, params, model_cfg, train_cfg, provenance)
    if args.report:
        with open(args.report, "w") as fh:
            for row in report.epochs:
                fh.write(json.dumps(row) + "\n")
    logger.info("checkpoint written to %s (final val loss %.3e)",
                args.out, report.final_val_loss)
    return 0


def _load_eval_inputs(args):
    params, model_cfg, train_cfg, manifest = load_checkpoint(args.checkpoint)
    ds = datasets.load_dataset(args.dataset)
    form = args.fit_form or ("loglinear" if ds.family == "tfim" else "linear")
    extra = {"trained_on": manifest["provenance"].get("trained_on")}
    return params, model_cfg, ds, form, extra


def cmd_evaluate(args):
    params, model_cfg, ds, form, extra = _load_eval_inputs(args)
    mask = MaskPolicy(args.mask, args.mask_k)
    report = evaluate.compare_methods(
        ds, params, model_cfg, form, n_in=args.n_in, times=_times(args),
        mask=mask, extra_metadata=extra,
    )
    paths = evaluate.write_report(report, args.out_prefix)
    logger.info("wrote %s", ", ".join(paths))
    return 0


def cmd_ablate(args):
    params, model_cfg, ds, form, extra = _load_eval_inputs(args)
    policies = {
        "full": MaskPolicy.full(),
        "parity": MaskPolicy.parity(),
        "long_range": MaskPolicy.long_range(args.k),
        "early": MaskPolicy.early(args.k),
    }
    for name, policy in policies.items():
        report = evaluate.compare_methods(
            ds, params, model_cfg, form, n_in=args.n_in, times=_times(args),
            mask=policy, extra_metadata={**extra, "ablation": name},
        )
        evaluate.write_report(report, f"{args.out_prefix}.{name}")
    increments = increments_from_sequences(ds.sequences)
    maps = averaged_attention_map(params, model_cfg, increments)
    for head in range(maps.shape[0]):
        path = f"{args.out_prefix}.attention.head{head}.csv"
        np.savetxt(path, maps[head], delimiter=",", fmt="%.12g")
    logger.info("ablation reports and %d attention maps written", maps.shape[0])
    return 0


def cmd_reconstruct(args):
    if bool(args.coefficients) == bool(args.dataset):
        print("kryf: error: pass exactly one of --coefficients/--dataset",
              file=sys.stderr)
        return 1
    if args.coefficients:
        b = _parse_values(args.coefficients)
    else:
        ds = datasets.load_dataset(args.dataset)
        b = ds.sequences[args.index]
    series = chain.observable_series(b, _times(args))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "complexity", "autocorr_re", "autocorr_im"])
        for t, k, c in zip(series.times, series.complexity, series.autocorrelation):
            writer.writerow([f"{t:.12g}", f"{k:.12g}", f"{c.real:.12g}", f"{c.imag:.12g}"])
    logger.info("wrote %s", args.out)
    return 0


def cmd_moments(args):
    if args.from_lanczos:
        b = _parse_values(args.from_lanczos)
        order = args.order or b.size
        mu = chain.moments_from_tridiagonal(b, order)
        print(json.dumps({"moments": [float(v) for v in mu]}))
    else:
        mu = _parse_values(args.from_moments)
        b = chain.moments_to_lanczos(mu)
        print(json.dumps({"b": [float(v) for v in b]}))
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
    "reconstruct": cmd_reconstruct,
    "moments": cmd_moments,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    _apply_config_defaults(parser, argv)
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except _NUMERICAL_ERRORS as exc:
        logger.error("numerical failure: %s", exc)
        return 3
    except _DATA_ERRORS as exc:
        logger.error("data error: %s", exc)
        return 2
    except KryfError as exc:
        logger.error("%s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
