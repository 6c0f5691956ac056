"""Command-line front end: ``mvgt {synth,extract,train,eval,attention,ablate}``.

Exit codes: 0 success, 2 usage or configuration error, 3 data or I/O error,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import logging
import os
import sys
from pathlib import Path

from . import eegsig
from .attention import export_attention
from .errors import ConfigError, DataError, MVGTError
from .model import ModelConfig, load_checkpoint, save_checkpoint
from .spatial import bundled_layout, load_layout, load_scheme
from .train import TrainSpec, ablation_sweep, evaluate, split_by_trial, train

def _layout(path):
    return bundled_layout() if path is None else load_layout(path)


def load_feature_batch(directory, T: int, stride: int):
    """All ``.deft`` files under ``directory`` as one segment batch plus channel names."""
    manifests = eegsig.feature_manifests(directory)
    if not manifests:
        raise DataError(f"no feature files in {directory}")
    batches, names = [], None
    for i, mpath in enumerate(manifests):
        feat = eegsig.read_features(mpath)
        if feat.label is None:
            raise DataError(f"{mpath} has no label")
        if names is None:
            names = feat.channel_names
        elif feat.channel_names != names:
            raise DataError(f"{mpath} lists different channels from {manifests[0]}")
        batch = eegsig.segment(feat, T, stride)
        trial = feat.trial if feat.trial is not None else i
        batch.trial_ids[:] = trial
        batches.append(batch)
    return eegsig.SegmentBatch.concatenate(batches), list(names)


def _layout_for(names, layout_path):
    layout = _layout(layout_path)
    if list(layout.names) == list(names):
        return layout
    missing = [n for n in names if n not in layout.names]
    if missing:
        raise ConfigError(f"channels {missing} are not in the electrode layout")
    return layout.subset(names)


def _report_paths(out: Path) -> dict[str, Path]:
    stem = out.with_suffix("")
    return {k: Path(f"{stem}_{k}.csv") for k in ("curve", "confusion", "summary")}


def cmd_synth(args):
    layout = _layout(args.channels_layout)
    scheme = load_scheme(args.scheme)
    scheme.validate(layout)
    recs = eegsig.synth_dataset(args.classes, layout, scheme, noise=args.noise,
                                n_trials=args.trials, seed=args.seed, duration_s=args.duration,
                                sample_rate=args.sample_rate)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for rec in recs:
        eegsig.write_recording(rec, out / f"rec_{rec.trial:04d}.eegr")
    print(f"wrote {len(recs)} recordings to {out}")


def cmd_extract(args):
    manifests = eegsig.recording_manifests(args.input)
    if not manifests:
        raise DataError(f"no recordings in {args.input}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for mpath in manifests:
        rec = eegsig.read_recording(mpath)
        feat = eegsig.extract_features(rec, args.window_seconds)
        eegsig.write_features(feat, out / mpath.with_suffix(".deft").name)
    print(f"wrote {len(manifests)} feature files to {out}")


def _config_from_args(args, n_classes: int) -> ModelConfig:
    return ModelConfig(
        d=args.hidden, K=args.kernels, L=args.layers, M=args.heads, R=args.recycles,
        dropout_p=args.dropout, n_classes=n_classes, T=args.T,
        use_centrality=not args.no_centrality, use_bre=not args.no_bre,
        use_gse=not args.no_gse, use_inverted=not args.pointwise,
        graph_norm_mode=args.graph_norm,
    )


def cmd_train(args):
    scheme = load_scheme(args.scheme)
    batch, names = load_feature_batch(args.features, args.T, args.stride)
    layout = _layout_for(names, args.channels_layout)
    config = _config_from_args(args, int(batch.labels.max()) + 1)
    spec = TrainSpec(batch_size=args.batch_size, lr=args.lr, epochs=args.epochs, seed=args.seed)
    result = train(batch, spec, config, layout, scheme, args.test_fraction)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    extra = {"T": args.T, "stride": args.stride, "test_fraction": args.test_fraction}
    save_checkpoint(result.model, out, extra=extra)
    paths = _report_paths(out)
    result.report.write_curve_csv(paths["curve"])
    result.report.write_confusion_csv(paths["confusion"])
    result.report.write_summary_csv(paths["summary"])
    print(f"test accuracy {result.report.accuracy:.4f}; checkpoint {out}")


def _eval_split(model, extra, features):
    batch, names = load_feature_batch(features, extra.get("T", model.config.T),
                                      extra.get("stride", 1))
    if model.config.use_inverted and list(model.layout.names) != names:
        raise DataError("feature channels do not match the checkpoint's layout")
    _, test = split_by_trial(batch, extra.get("test_fraction", 0.4))
    return test


def cmd_eval(args):
    model, extra = load_checkpoint(args.model)
    data = _eval_split(model, extra, args.features)
    report = evaluate(model, data.segments, data.labels)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    report.write_summary_csv(out)
    report.write_confusion_csv(out.with_name(out.stem + "_confusion.csv"))
    print(f"accuracy {report.accuracy:.4f} on {len(data)} test segments")


def cmd_attention(args):
    model, extra = load_checkpoint(args.model)
    data = _eval_split(model, extra, args.features)
    rows = export_attention(model, data.segments, args.topk, args.out)
    print(f"wrote {len(rows)} attention rows to {args.out}")


def cmd_ablate(args):
    scheme = load_scheme(args.scheme)
    batch, names = load_feature_batch(args.features, args.T, args.stride)
    layout = _layout_for(names, args.channels_layout)
    base = _config_from_args(args, int(batch.labels.max()) + 1)
    base = dataclasses.replace(base, use_centrality=True, use_bre=True, use_gse=True,
                               use_inverted=True)
    spec = TrainSpec(batch_size=args.batch_size, lr=args.lr, epochs=args.epochs, seed=0)
    rows = ablation_sweep(batch, spec, base, layout, scheme, seeds=range(args.seeds),
                          out_csv=args.out, test_fraction=args.test_fraction)
    for row in rows:
        flags = "".join("x" if f else "-" for f in row.flags)
        print(f"{flags}  {100 * row.mean:6.2f} +- {100 * row.std:5.2f}")


def _model_args(p):
    p.add_argument("--features", required=True, help="directory of .deft files")
    p.add_argument("--scheme", default="frontal", help="lobe|general|frontal|hemisphere|FILE")
    p.add_argument("--channels-layout", default=None, help="layout JSON (default: bundled 62)")
    p.add_argument("--T", type=int, default=5, help="windows per segment")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--kernels", type=int, default=32)
    p.add_argument("--layers", type=int, default=4)
    p.add_argument("--heads", type=int, default=2)
    p.add_argument("--recycles", type=int, default=3)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--graph-norm", choices=["standard", "minmax"], default="standard")
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--test-fraction", type=float, default=0.4)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvgt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-epoch progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write synthetic labelled recordings")
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--trials", type=int, default=5, help="trials per class")
    p.add_argument("--channels-layout", default=None)
    p.add_argument("--scheme", default="frontal")
    p.add_argument("--noise", type=float, default=1.0, help="per-trial gain jitter in dB")
    p.add_argument("--duration", type=float, default=20.0, help="seconds per trial")
    p.add_argument("--sample-rate", type=float, default=200.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="band differential-entropy features")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--window-seconds", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train a model and write a checkpoint plus reports")
    _model_args(p)
    p.add_argument("--no-centrality", action="store_true")
    p.add_argument("--no-bre", action="store_true", help="disable brain-region encoding")
    p.add_argument("--no-gse", action="store_true", help="disable the structure attention bias")
    p.add_argument("--pointwise", action="store_true", help="time-step tokens instead of channels")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="model.mvgt")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on its test trials")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", default="report.csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("attention", help="export top-k attention pairs")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--topk", type=int, default=10)
    p.add_argument("--out", default="att.csv")
    p.set_defaults(func=cmd_attention)

    p = sub.add_parser("ablate", help="run the nine-row component ablation")
    _model_args(p)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--out", default="ablation.csv")
    p.set_defaults(func=cmd_ablate, no_centrality=False, no_bre=False, no_gse=False,
                   pointwise=False)
    return parser


def _thread_limit():
    value = os.environ.get("MVGT_THREADS")
    if not value:
        return contextlib.nullcontext()
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"MVGT_THREADS must be a positive integer, got {value!r}") from None
    if n < 1:
        raise ConfigError(f"MVGT_THREADS must be a positive integer, got {value!r}")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with _thread_limit():
            args.func(args)
    except MVGTError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DataError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
