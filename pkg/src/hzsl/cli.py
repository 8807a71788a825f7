"""Command-line harness: build trees, generate data, train, evaluate, check.

Subcommands map one-to-one onto pipeline stages::

    hzsl build-tree GRAPH --root R --out TREE [--keep FILE]
    hzsl synth OUTDIR [generator flags]
    hzsl train DATADIR --model {conse-head,devise,crf} --out CKPT [...]
    hzsl eval DATADIR --task T --methods a,b,c [--level N] [...]
    hzsl gradcheck [--seed S] [--nodes N]
    hzsl dump-attributes EMBEDDINGS HIERARCHY --out FILE

Exit codes: 0 success, 1 validation error, 2 numerical-check failure. The
``HZSL_SEED`` environment variable supplies the default seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import errors
from .attributes import load_embeddings, save_embeddings
from .checkpoint import load_checkpoint, save_checkpoint
from .crf import CrfParameters, init_crf, train_crf
from .dataio import SynthConfig, emit_dataset, load_dataset_dir, synth_generate
from .gradcheck import GROUPS, run_gradient_check
from .harness import MethodSet, evaluate, parse_method
from .hierarchy import LabelHierarchy, WeightedDigraph, max_arborescence, prune_to_support
from .zsl import (CompatModel, SoftmaxHead, TrainConfig, init_compat,
                  train_compat, train_softmax_head)

TRACE_FORMAT = "# format: loss-trace v1"


def _default_seed():
    return int(os.environ.get("HZSL_SEED", "0"))


def _write_trace(path, trace):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(TRACE_FORMAT + "\n")
        fh.write("epoch,nll\n")
        for epoch, value in enumerate(trace):
            fh.write(f"{epoch},{value!r}\n")


def _load_keep_file(path):
    keep = set()
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if line and not line.startswith("#"):
                keep.add(line)
    return keep


def _require_checkpoint(kind, path, expected_kind, fingerprint):
    if path is None or not os.path.exists(path):
        raise errors.MissingPrerequisiteCheckpoint(kind, path or "<unset>")
    found_kind, fields = load_checkpoint(path)
    if found_kind != expected_kind:
        raise errors.ConfigInvalid(
            f"{path} holds a {found_kind!r} checkpoint, expected {expected_kind!r}"
        )
    found = fields.get("fingerprint")
    if fingerprint is not None and found != fingerprint:
        raise errors.FingerprintMismatch(fingerprint, found)
    return fields


# ---------------------------------------------------------------------------
# subcommands


def cmd_build_tree(args):
    graph = WeightedDigraph.read(args.graph)
    if args.keep:
        graph = prune_to_support(graph, _load_keep_file(args.keep))
    tree = max_arborescence(graph, args.root)
    tree.write(args.out)
    print(f"nodes={tree.n} leaves={len(tree.leaves())} root={tree.labels[tree.root]}")
    return 0


def cmd_synth(args):
    config = SynthConfig(
        depth=args.depth, branching=args.branching,
        d_feature=args.d_feature, d_embed=args.d_embed,
        per_class=args.per_class, test_per_class=args.test_per_class,
        zeroshot_fraction=args.zeroshot_fraction, novel_fraction=args.novel_fraction,
        separation=args.separation, attr_noise=args.attr_noise, seed=args.seed,
    )
    dataset = synth_generate(config)
    emit_dataset(dataset, args.outdir)
    counts = " ".join(
        f"{name}={len(dataset.split(name))}" for name in dataset.split_names()
    )
    print(f"nodes={dataset.hierarchy.n} leaves={len(dataset.hierarchy.leaves())} {counts}")
    return 0


def _train_config(args):
    overrides = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            overrides = json.load(fh)
    cfg = TrainConfig(
        learning_rate=overrides.get("learning_rate", 0.2),
        epochs=overrides.get("epochs", 30),
        batch_size=overrides.get("batch_size", 32),
        seed=overrides.get("seed", args.seed),
        lr_decay=overrides.get("lr_decay", 1.0),
    )
    if args.epochs is not None:
        cfg.epochs = args.epochs
    if args.learning_rate is not None:
        cfg.learning_rate = args.learning_rate
    if args.batch_size is not None:
        cfg.batch_size = args.batch_size
    if args.lr_decay is not None:
        cfg.lr_decay = args.lr_decay
    d_hidden = args.d_hidden if args.d_hidden is not None else overrides.get("d_hidden", 32)
    conse_m = args.conse_m if args.conse_m is not None else overrides.get("conse_m", 10)
    return cfg, d_hidden, conse_m


def cmd_train(args):
    dataset = load_dataset_dir(args.datadir)
    fingerprint = dataset.hierarchy.fingerprint()
    cfg, d_hidden, conse_m = _train_config(args)
    H, y = dataset.train_matrix()
    class_ids = dataset.train_class_ids()

    if args.model == "conse-head":
        head, trace = train_softmax_head(H, y, class_ids, cfg)
        fields = head.to_fields("head.")
        fields["fingerprint"] = fingerprint
        save_checkpoint(args.out, "softmax-head", fields)
    elif args.model == "devise":
        compat = init_compat(dataset.d_feature, d_hidden, dataset.attrs.dim, cfg.seed)
        compat, trace = train_compat(compat, H, y, dataset.attrs, class_ids, cfg)
        fields = compat.to_fields("compat.")
        fields["fingerprint"] = fingerprint
        save_checkpoint(args.out, "compat", fields)
    elif args.model == "crf":
        head_fields = _require_checkpoint("head", args.head, "softmax-head", fingerprint)
        compat_fields = _require_checkpoint("compat", args.compat, "compat", fingerprint)
        head = SoftmaxHead.from_fields(head_fields, "head.")
        compat = CompatModel.from_fields(compat_fields, "compat.")
        if args.conse_m is None:
            conse_m = min(conse_m, head.class_ids.shape[0])
        params = init_crf(dataset.hierarchy, dataset.attrs, head, compat, conse_m, cfg.seed)
        params, trace = train_crf(params, H, y, cfg)
        save_checkpoint(args.out, "crf", params.to_fields())
    else:
        raise errors.ConfigInvalid(f"unknown model {args.model!r}")

    trace_path = args.trace or args.out + ".trace.csv"
    _write_trace(trace_path, trace)
    last = trace[-1] if trace else float("nan")
    print(f"model={args.model} epochs={cfg.epochs} final-loss={last:.6f} out={args.out}")
    return 0


def cmd_eval(args):
    dataset = load_dataset_dir(args.datadir)
    fingerprint = dataset.hierarchy.fingerprint()
    names = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not names:
        raise errors.ConfigInvalid("no methods given")
    needs = {parse_method(m) for m in names}

    head = compat = crf_params = None
    conse_m = args.conse_m if args.conse_m is not None else 10
    if any(mode == "native" or base == "crf" for mode, base in needs):
        fields = _require_checkpoint("crf", args.crf, "crf", fingerprint)
        crf_params = CrfParameters.from_fields(fields, dataset.hierarchy, dataset.attrs)
    if any(base == "conse" for _, base in needs):
        fields = _require_checkpoint("head", args.head, "softmax-head", fingerprint)
        head = SoftmaxHead.from_fields(fields, "head.")
        if args.conse_m is None:
            conse_m = min(conse_m, head.class_ids.shape[0])
    if any(base == "devise" for _, base in needs):
        fields = _require_checkpoint("compat", args.compat, "compat", fingerprint)
        compat = CompatModel.from_fields(fields, "compat.")

    methods = MethodSet(dataset, head=head, compat=compat, crf_params=crf_params,
                        conse_m=conse_m)
    report = evaluate(
        methods, names, dataset, args.task,
        level=args.level, split=args.split, seed=args.seed,
        decision=args.decision, utility_kind=args.utility,
    )
    print(report.to_text())
    if args.out:
        report.write(args.out)
    return 0


def cmd_gradcheck(args):
    results, bias_abs, passed = run_gradient_check(
        seed=args.seed, n_nodes=args.nodes, corrupt=args.corrupt
    )
    for group in GROUPS:
        print(f"{group:<10} max-rel-err={results[group]:.3e}")
    print(f"{'bias':<10} abs-grad={bias_abs:.3e}")
    print("gradcheck " + ("PASS" if passed else "FAIL"))
    return 0 if passed else 2


def cmd_dump_attributes(args):
    hierarchy = LabelHierarchy.read(args.hierarchy)
    table = load_embeddings(args.embeddings, hierarchy.index)
    save_embeddings(args.out, table, hierarchy.labels)
    print(f"labels={len(table)} dim={table.dim} out={args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hzsl",
        description="Hierarchical zero-shot classification toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-tree", help="prune a graph and solve for its spanning tree")
    p.add_argument("graph", help="edge-list file (child<TAB>parent[<TAB>weight])")
    p.add_argument("--root", required=True, help="root label")
    p.add_argument("--keep", help="file of leaf labels to preserve during pruning")
    p.add_argument("--out", required=True, help="output hierarchy file")
    p.set_defaults(func=cmd_build_tree)

    p = sub.add_parser("synth", help="generate a synthetic benchmark dataset")
    p.add_argument("outdir")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--branching", type=int, default=4)
    p.add_argument("--d-feature", type=int, default=32)
    p.add_argument("--d-embed", type=int, default=16)
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--test-per-class", type=int, default=10)
    p.add_argument("--zeroshot-fraction", type=float, default=0.25)
    p.add_argument("--novel-fraction", type=float, default=0.125)
    p.add_argument("--separation", type=float, default=5.0)
    p.add_argument("--attr-noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    p.add_argument("datadir", help="directory with the four dataset files")
    p.add_argument("--model", required=True, choices=("conse-head", "devise", "crf"))
    p.add_argument("--out", required=True)
    p.add_argument("--head", help="softmax-head checkpoint (crf prerequisite)")
    p.add_argument("--compat", help="compat checkpoint (crf prerequisite)")
    p.add_argument("--config", help="JSON file with training settings")
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr-decay", type=float)
    p.add_argument("--d-hidden", type=int)
    p.add_argument("--conse-m", type=int)
    p.add_argument("--trace", help="loss trace output (default: OUT.trace.csv)")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate methods on a benchmark task")
    p.add_argument("datadir")
    p.add_argument("--task", required=True,
                   choices=("finegrained-train", "finegrained-zeroshot", "level", "free"))
    p.add_argument("--level", type=int)
    p.add_argument("--split", help="test split to draw instances from")
    p.add_argument("--methods", required=True,
                   help="comma list: crf-native, lifted:<base>, direct:<base>")
    p.add_argument("--crf", help="crf checkpoint")
    p.add_argument("--head", help="softmax-head checkpoint")
    p.add_argument("--compat", help="compat checkpoint")
    p.add_argument("--conse-m", type=int)
    p.add_argument("--utility", choices=("exact", "pathlen", "subtreedepth"),
                   default="subtreedepth")
    p.add_argument("--decision", choices=("max-path", "expected-utility"),
                   default="max-path")
    p.add_argument("--out", help="write the machine-readable report here")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--nodes", type=int, default=9)
    p.add_argument("--corrupt", choices=GROUPS + ("bias",),
                   help=argparse.SUPPRESS)  # negative-control hook
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("dump-attributes", help="re-emit an embedding file")
    p.add_argument("embeddings")
    p.add_argument("hierarchy")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dump_attributes)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except errors.HzslError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
