"""Command-line entry point: ``pcc <command> [flags]``.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import datasets, experiments
from . import model as pcc_model
from .encoding import EncodingSpec
from .errors import DataFormatError, NumericalError, PccError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_range(text, kind=float):
    """``start:step:stop`` (inclusive) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) == 2:
            start, stop = (kind(p) for p in parts)
            step = kind(1)
        elif len(parts) == 3:
            start, step, stop = (kind(p) for p in parts)
        else:
            raise UsageError(f"bad range {text!r}")
        if step <= 0 or stop < start:
            raise UsageError(f"bad range {text!r}")
        count = int(round((stop - start) / step)) + 1
        values = start + step * np.arange(count)
        return np.round(values, 10) if kind is float else values.astype(int)
    return np.array([kind(p) for p in text.split(",") if p.strip()])


def _add_data_args(p):
    g = p.add_argument_group("data")
    g.add_argument("--data", help="delimited text table")
    g.add_argument("--label-col", type=int, default=0,
                   help="label column index, negative counts from the end (default 0)")
    g.add_argument("--delimiter", default=",",
                   help="field delimiter; 'ws' for whitespace (default ',')")
    g.add_argument("--skip-header", action="store_true")
    g.add_argument("--idx-images", help="IDX image file (MNIST training)")
    g.add_argument("--idx-labels", help="IDX label file (MNIST training)")
    g.add_argument("--idx-test-images", help="IDX image file used as test pool")
    g.add_argument("--idx-test-labels", help="IDX label file used as test pool")
    s = p.add_argument_group("split")
    s.add_argument("--per-class", type=int,
                   help="training instances per class (default: all for IDX)")
    s.add_argument("--test-per-class", type=int,
                   help="balanced test draw per class (default: whole test pool)")
    s.add_argument("--seed", type=int, default=42, help="split seed (default 42)")
    s.add_argument("--rescale", choices=datasets.RESCALE_SCOPES,
                   help="max-divisor scope (default: train for tables, none for IDX)")
    p.add_argument("--threads", type=int, help="worker cap (fallback: PCC_THREADS)")


def _load(args):
    if args.data and args.idx_images:
        raise UsageError("give either --data or --idx-images, not both")
    if args.data:
        delim = None if args.delimiter == "ws" else args.delimiter
        return datasets.load_table(args.data, args.label_col, delim, args.skip_header), None
    if not (args.idx_images and args.idx_labels):
        raise UsageError("need --data, or --idx-images with --idx-labels")
    train = datasets.load_idx(args.idx_images, args.idx_labels, "mnist")
    test = None
    test_images = getattr(args, "idx_test_images", None)
    test_labels = getattr(args, "idx_test_labels", None)
    if test_images or test_labels:
        if not (test_images and test_labels):
            raise UsageError("--idx-test-images and --idx-test-labels go together")
        test = datasets.load_idx(test_images, test_labels, "mnist-test")
    return train, test


def _split(args):
    """Load, split and rescale per the flags; returns (data, train, test, rescaler)."""
    data, test_data = _load(args)
    rescale = args.rescale or ("none" if args.idx_images else "train")
    if args.per_class is None:
        if test_data is None:
            raise UsageError("--per-class is required unless a separate test pool is given")
        train, test = data, test_data
        if args.test_per_class:
            test, _ = datasets.balanced_split(test, args.test_per_class, args.seed)
    else:
        train, test = datasets.balanced_split(data, args.per_class, args.seed)
        if test_data is not None:
            test = test_data
        if args.test_per_class:
            test, _ = datasets.balanced_split(test, args.test_per_class, args.seed)
    train, test, scaler = datasets.rescale_pair(train, test, rescale)
    return data, train, test, scaler


def _check_alpha_ne(args, d_z=None):
    if not 0.0 <= args.alpha <= 1.0:
        raise UsageError(f"--alpha must lie in [0, 1], got {args.alpha}")
    if args.ne < 1 or (d_z is not None and args.ne > d_z):
        raise UsageError(f"--ne must lie in 1..{d_z if d_z else 'd_z'}, got {args.ne}")


def cmd_fit(args, out):
    _check_alpha_ne(args)
    data, train, test, scaler = _split(args)
    spec = EncodingSpec(train.d_x, train.n_c, args.alpha)
    _check_alpha_ne(args, spec.d_z)
    if args.scale_out and scaler is None:
        raise UsageError("--scale-out needs a rescaled dataset")
    m = pcc_model.fit(spec, train, args.ne, seed=args.seed)
    pcc_model.save_model(m, args.out)
    if args.scale_out:
        np.savetxt(args.scale_out, scaler.divisors, fmt="%.17g")
    accs = {
        kind: experiments.evaluate(m, test if kind is experiments.InputSetKind.TEST_NO_LABELS
                                   else train, kind)
        for kind in experiments.KINDS
    }
    print(f"fit dataset={data.name} N={train.n} N'={test.n} alpha={args.alpha:g} "
          f"n_e={args.ne} parameters={m.n_parameters} out={args.out}", file=out)
    print("accuracy " + " ".join(f"{k.value}={v:.4f}" for k, v in accs.items()), file=out)


def cmd_predict(args, out):
    m = pcc_model.load_model(args.model)
    delim = None if args.delimiter == "ws" else args.delimiter
    rows = []
    with open(args.input) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text[0] in "#@%":
                continue
            cells = text.split() if delim is None else text.split(delim)
            if args.label_col is not None:
                del cells[args.label_col]
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                raise DataFormatError(
                    f"{args.input}:{lineno}: unparseable number") from None
    if not rows:
        raise DataFormatError(f"{args.input}: no feature rows")
    widths = {len(r) for r in rows}
    if widths != {m.spec.d_x}:
        raise DataFormatError(
            f"{args.input}: rows have {sorted(widths)} features, model expects {m.spec.d_x}")
    features = np.array(rows).T
    if args.scale:
        divisors = np.loadtxt(args.scale, ndmin=1)
        if divisors.shape != (m.spec.d_x,):
            raise DataFormatError(f"{args.scale}: expected {m.spec.d_x} divisors")
        features = features / divisors[:, None]
    labels, scores = pcc_model.predict_batch(m, features)
    for label, col in zip(labels, scores.T):
        print(f"{int(label)}," + ",".join(f"{s:.6f}" for s in col), file=out)


def cmd_grid(args, out):
    data, train, test, _ = _split(args)
    rescale = args.rescale or ("none" if args.idx_images else "train")
    d_z = train.d_x + train.n_c
    alphas = parse_range(args.alphas, float) if args.alphas else None
    n_es = parse_range(args.nes, int) if args.nes else np.arange(1, d_z + 1)
    if alphas is not None and (alphas.min() < 0 or alphas.max() > 1):
        raise UsageError("--alphas must lie in [0, 1]")
    if n_es.min() < 1 or n_es.max() > d_z:
        raise UsageError(f"--nes must lie in 1..{d_z}")
    grid = experiments.grid_search(
        train, test, alphas, n_es, threads=args.threads,
        metadata={"dataset": data.name, "seed": args.seed, "rescale": rescale},
    )
    experiments.emit_heatmap(grid, args.out)
    alpha, n_e = experiments.select_hyperparameters(grid)
    best = grid.cell(alpha, n_e)
    print(f"grid dataset={data.name} N={train.n} N'={test.n} cells="
          f"{grid.alphas.size}x{grid.n_es.size} out={args.out}", file=out)
    print(f"selected alpha={alpha:g} n_e={n_e} " + " ".join(
        f"{k.value}={v:.4f}" for k, v in best.items()), file=out)


def cmd_multirun(args, out):
    _check_alpha_ne(args)
    data, test_data = _load(args)
    if args.per_class is None:
        raise UsageError("--per-class is required for multirun")
    rescale = args.rescale or ("none" if args.idx_images else "train")
    _check_alpha_ne(args, data.d_x + data.n_c)
    result = experiments.run_multi(
        data, args.alpha, args.ne, args.runs, args.seed, args.per_class,
        rescale=rescale, test_data=test_data, test_per_class=args.test_per_class,
    )
    lines = ["set,mean,std"]
    for kind in experiments.KINDS:
        lines.append(f"{kind.value},{result.means[kind]:.4f},{result.stds[kind]:.4f}")
    lines.append(f"# dataset={data.name} alpha={args.alpha:g} n_e={args.ne} "
                 f"runs={args.runs} seeds={result.seeds[0]}..{result.seeds[-1]} "
                 f"rescale={rescale}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    out.write(text)


def cmd_bench(args, out):
    train = datasets.load_idx(args.train_images, args.train_labels, "mnist")
    test = datasets.load_idx(args.test_images, args.test_labels, "mnist-test")
    rows = experiments.benchmark_mnist_full(train, test)
    text = experiments.format_benchmark_report(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    out.write(text)


def cmd_emit_proj(args, out):
    _check_alpha_ne(args)
    data, train, _, _ = _split(args)
    spec = EncodingSpec(train.d_x, train.n_c, args.alpha)
    _check_alpha_ne(args, spec.d_z)
    pairs = []
    for item in args.pairs:
        try:
            a, b = (int(v) for v in item.split(","))
        except ValueError:
            raise UsageError(f"bad pair {item!r}, expected a,b") from None
        if not (1 <= a <= args.ne and 1 <= b <= args.ne):
            raise UsageError(f"pair {item} outside 1..{args.ne}")
        pairs.append((a, b))
    m = pcc_model.fit(spec, train, args.ne, seed=args.seed)
    experiments.emit_projections(m, train, pairs, args.out, with_labels=not args.no_labels)
    print(f"emit-proj dataset={data.name} N={train.n} pairs="
          f"{' '.join(args.pairs)} out={args.out}", file=out)


def build_parser():
    parser = _Parser(prog="pcc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="train a model and save it")
    _add_data_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--ne", type=int, required=True)
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--scale-out", help="write the rescaling divisors here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="classify feature rows with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="delimited feature rows")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--label-col", type=int, help="column to drop before predicting")
    p.add_argument("--scale", help="divisor file written by fit --scale-out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("grid", help="accuracy heatmaps over (alpha, n_e)")
    _add_data_args(p)
    p.add_argument("--alphas", help="start:step:stop or list (default 0:0.02:1)")
    p.add_argument("--nes", help="start:stop, start:step:stop or list (default 1:d_z)")
    p.add_argument("--out", required=True, help="heatmap file")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("multirun", help="mean and std over re-split runs")
    _add_data_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--ne", type=int, required=True)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_multirun)

    p = sub.add_parser("bench-mnist", help="full MNIST benchmark table")
    p.add_argument("--train-images", required=True)
    p.add_argument("--train-labels", required=True)
    p.add_argument("--test-images", required=True)
    p.add_argument("--test-labels", required=True)
    p.add_argument("--threads", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("emit-proj", help="training-set coordinates on component pairs")
    _add_data_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--ne", type=int, required=True)
    p.add_argument("--pairs", nargs="+", required=True, help="pairs like 2,3 3,4")
    p.add_argument("--no-labels", action="store_true",
                   help="project with a zero class block")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit_proj)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is not None and args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        args.func(args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pcc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"pcc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (PccError, OSError) as exc:
        print(f"pcc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
