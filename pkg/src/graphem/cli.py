"""Command line front end.

Subcommands: fetch, split, train, grid, table2, hop, timing, rate,
verify. Dataset names accept a registered dataset, a directory holding
the native on-disk layout, or a synthetic block-model spec such as
"sbm" or "sbm:n=2000,c=4". The cache directory resolves from --cache,
then the GRAPHEM_CACHE environment variable, then a per-user default.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench
from .bench import (ExperimentManifest, cmd_hop, cmd_rate, cmd_table2,
                    cmd_timing, cmd_train_single, default_config,
                    resolve_dataset, verify_properties)
from .data_io import (DATASETS, SplitSpec, fetch_dataset, make_hop_split,
                      make_rate_split, make_semi_split, save_split)
from .errors import DataFormatError, FetchError, InputError
from .training import GEM_TABLE_GRID, OKDEEM_TABLE_GRID, grid_search


def _methods(text):
    return tuple(m.strip() for m in text.split(",") if m.strip())


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def _add_common(sub, methods_default):
    sub.add_argument("--dataset", default="sbm",
                     help="dataset name, directory, or sbm spec")
    sub.add_argument("--method", default=methods_default,
                     help="comma separated method list")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--repeats", type=int, default=10)
    sub.add_argument("--out", default="runs")
    sub.add_argument("--cache", default=None,
                     help="dataset cache directory")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="graphem",
        description="semi-supervised node classification via entropy "
                    "minimization over graph aggregations")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download and convert a dataset")
    p.add_argument("--dataset", required=True,
                   help=f"one of: {', '.join(sorted(DATASETS))}")
    p.add_argument("--cache", default=None)
    p.add_argument("--force", action="store_true",
                   help="re-download even when cached")
    p.set_defaults(func=_cmd_fetch)

    p = sub.add_parser("split", help="derive and save a train/val/test split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--kind", default="per-class",
                   choices=("public", "per-class", "rate", "hop-distance"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output split JSON path")
    p.add_argument("--cache", default=None)
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--val-size", type=int, default=500)
    p.add_argument("--test-size", type=int, default=1000)
    p.add_argument("--rate", type=float, default=5.0)
    p.add_argument("--group-size", type=int, default=100)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("train", help="train one run")
    p.add_argument("--dataset", required=True)
    p.add_argument("--method", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None,
                   help="directory for report.json and model.npz")
    p.add_argument("--config", default=None,
                   help="JSON file of training-config overrides")
    p.add_argument("--eval", default="one-hop",
                   choices=("one-hop", "non-hop"))
    p.add_argument("--cache", default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("grid", help="exhaustive hyperparameter search")
    p.add_argument("--dataset", required=True)
    p.add_argument("--method", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=1,
                   help="seeds per combo")
    p.add_argument("--out", default=None, help="grid result JSON path")
    p.add_argument("--config", default=None,
                   help='JSON file; a "grid" key of value lists overrides '
                        "the built-in grid, other keys the base config")
    p.add_argument("--cache", default=None)
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("table2", help="score table over datasets x methods")
    _add_common(p, "gcn,gem,eem,okdeem,okdeem0,mlp")
    p.set_defaults(func=_cmd_table2)

    p = sub.add_parser("hop", help="score by distance from the labeled set")
    _add_common(p, "gem,gcn1")
    p.add_argument("--baseline", default="gcn")
    p.add_argument("--group-size", type=int, default=100)
    p.add_argument("--val-size", type=int, default=500)
    p.set_defaults(func=_cmd_hop)

    p = sub.add_parser("timing", help="wall clock to best epoch")
    _add_common(p, "gem,eem,okdeem")
    p.set_defaults(func=_cmd_timing)

    p = sub.add_parser("rate", help="score as the label rate grows")
    _add_common(p, "mlp,gcn,gcn1,gem,eem,okdeem")
    p.add_argument("--rates", type=_floats, default=(1.0, 2.0, 5.0, 10.0,
                                                     20.0))
    p.set_defaults(func=_cmd_rate)

    p = sub.add_parser("verify", help="run the built-in property checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify)

    return parser


def _cmd_fetch(args):
    path = fetch_dataset(args.dataset, cache_dir=args.cache,
                         force=args.force)
    print(path)
    return 0


def _cmd_split(args):
    resolved = resolve_dataset(args.dataset, seed=args.seed,
                               cache_dir=args.cache)
    rng = np.random.default_rng(args.seed)
    if args.kind == "public":
        if resolved.public_split is None:
            raise InputError(f"{args.dataset} ships no public split")
        split = resolved.public_split
    elif args.kind == "per-class":
        spec = SplitSpec(per_class=args.per_class, val_size=args.val_size,
                         test_size=args.test_size, seed=args.seed)
        split = make_semi_split(resolved.labels, spec, rng)
    elif args.kind == "rate":
        split = make_rate_split(resolved.labels, args.rate, rng)
    else:
        split, groups = make_hop_split(resolved.graph, resolved.labels, rng,
                                       per_class=args.per_class,
                                       val_size=args.val_size,
                                       group_size=args.group_size)
        sizes = {d: len(nodes) for d, nodes in sorted(groups.items())}
        print(f"test groups by distance: {sizes}")
    save_split(split, args.out)
    print(f"wrote {args.out}: train={split.train.size} val={split.val.size} "
          f"test={split.test.size}")
    return 0


def _cmd_train(args):
    report, summary = cmd_train_single(
        args.dataset, args.method, seed=args.seed, out_dir=args.out,
        cache_dir=args.cache, eval_mode=args.eval, config_file=args.config)
    print(f"{args.dataset} {args.method} seed={args.seed} "
          f"[{summary['eval']}] best_epoch={summary['best_epoch']} "
          f"val={summary['val_f1']:.4f} test={summary['test_f1']:.4f}")
    if args.out:
        print(f"artifacts in {args.out}")
    return 0


def _cmd_grid(args):
    overrides = {}
    grid = None
    if args.config:
        overrides = json.loads(Path(args.config).read_text())
        grid = overrides.pop("grid", None)
    method = args.method
    train_method = "okdeem" if method == "okdeem0" else method
    if grid is None:
        grid = (OKDEEM_TABLE_GRID if train_method == "okdeem"
                else GEM_TABLE_GRID)
    resolved = resolve_dataset(args.dataset, seed=args.seed,
                               cache_dir=args.cache)
    split, label_set = bench._make_label_set(resolved, args.seed)
    base_cfg = default_config(train_method, args.dataset, seed=args.seed,
                              **overrides)
    seeds = tuple(range(args.seed, args.seed + args.repeats))
    result = grid_search(base_cfg, grid, resolved.graph, resolved.features,
                         label_set, seeds=seeds,
                         objective="val_aux" if method == "okdeem0"
                         else "val")
    idx = result.select("val_aux" if method == "okdeem0" else "val")
    combo = result.combos[idx]
    mean = (result.mean_val_aux if method == "okdeem0"
            else result.mean_val)[idx]
    print(f"best combo: {combo} (mean val {mean:.4f} over "
          f"{len(seeds)} seed(s), {len(result.combos)} combos)")
    if args.out:
        doc = {
            "dataset": args.dataset,
            "dataset_identity": resolved.identity,
            "method": method,
            "seeds": list(seeds),
            "grid": {k: list(v) for k, v in grid.items()},
            "combos": result.combos,
            "mean_val": result.mean_val,
            "mean_val_aux": result.mean_val_aux,
            "best_combo": combo,
        }
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True))
        print(f"wrote {args.out}")
    return 0


def _manifest(args, kind, **extras):
    return ExperimentManifest(
        kind=kind, datasets=(args.dataset,)
        if "," not in args.dataset else tuple(args.dataset.split(",")),
        methods=_methods(args.method), repeats=args.repeats,
        seed_base=args.seed, out_dir=args.out, **extras)


def _cmd_table2(args):
    rows = cmd_table2(_manifest(args, "table2"), cache_dir=args.cache)
    width = max(len(r.dataset) for r in rows) + 2
    for r in rows:
        print(f"{r.dataset:<{width}}{r.method:<10}"
              f"{r.mean:6.2f} +- {r.std:4.2f}  ({len(r.scores)} runs)")
    print(f"artifacts in {args.out}")
    return 0


def _cmd_hop(args):
    scores, diffs = cmd_hop(_manifest(args, "hop"), cache_dir=args.cache,
                            group_size=args.group_size,
                            val_size=args.val_size, baseline=args.baseline)
    for (method, d) in sorted(diffs, key=lambda k: (k[0], k[1])):
        delta = float(np.mean(diffs[(method, d)]))
        print(f"distance {d}: {method} - {args.baseline} = {delta:+.2f}")
    print(f"artifacts in {args.out}")
    return 0


def _cmd_timing(args):
    rows = cmd_timing(_manifest(args, "timing"), cache_dir=args.cache)
    for r in rows:
        print(f"{r.dataset} {r.method}: {r.mean:.2f}% at "
              f"{r.sampling_seconds:.3f}s sampling + "
              f"{r.training_seconds:.3f}s training to best epoch")
    print(f"artifacts in {args.out}")
    return 0


def _cmd_rate(args):
    scores = cmd_rate(_manifest(args, "rate", rates=args.rates),
                      cache_dir=args.cache)
    for (method, rate) in sorted(scores, key=lambda k: (k[0], k[1])):
        cell = scores[(method, rate)]
        print(f"rate {rate:g}%: {method} = {float(np.mean(cell)):.2f}")
    print(f"artifacts in {args.out}")
    return 0


def _cmd_verify(args):
    results = verify_properties(seed=args.seed, verbose=True)
    return 0 if all(ok for _, ok, _ in results) else 1


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, DataFormatError, FetchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
