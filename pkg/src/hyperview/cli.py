"""Command-line surface over every pipeline stage."""
from __future__ import annotations

import argparse
import json
import os
import pathlib
import sys

import numpy as np

from .blocks import hb_to_json_dict, matrix_from_normalized
from .classifier import (
    HyperModel, ModelConfig, apply_threshold_rule, classify,
    threshold_rule_search,
)
from .dataset import SplitSpec, canonical_json, normalize, parse_table
from .evaluation import cross_validate
from .linguistic import describe, profile
from .mhyper import MergeConfig, merge_dominant, merge_pure
from .scene import (
    compile_polylines, frequency_widths, heat_scene, render_svg, side_by_side,
)


def add_data_flags(p: argparse.ArgumentParser):
    p.add_argument("data", help="delimiter-separated table file")
    p.add_argument("--class-col", default="-1",
                   help="class column name or index (default: last)")
    p.add_argument("--id-col", default=None,
                   help="optional id column name or index")
    p.add_argument("--delimiter", default=None)


def load_dataset(args):
    text = pathlib.Path(args.data).read_text()
    col = int(args.class_col) if _intish(args.class_col) else args.class_col
    idc = None
    if args.id_col is not None:
        idc = int(args.id_col) if _intish(args.id_col) else args.id_col
    return parse_table(text, class_column=col, id_column=idc,
                       delimiter=args.delimiter)


def _intish(s) -> bool:
    try:
        int(s)
        return True
    except (TypeError, ValueError):
        return False


def _write_or_print(text: str, path):
    if path:
        pathlib.Path(path).write_text(text)
    else:
        print(text)


def cmd_load(args) -> int:
    ds = load_dataset(args)
    _write_or_print(ds.to_json(), args.json)
    print(f"{len(ds.cases)} cases, {ds.n_coordinates} coordinates, "
          f"classes {ds.class_labels}, complete {len(ds.complete_indices())}",
          file=sys.stderr)
    return 0


def cmd_hb(args) -> int:
    ds = load_dataset(args)
    nd = normalize(ds)
    tm = matrix_from_normalized(nd, tie_class=args.tie_class)
    cfg = MergeConfig(impurity_threshold=args.impurity, order_seed=args.order_seed)
    hbs = merge_pure(tm, cfg, half_length=args.half_length)
    if args.hb_command == "merge" and args.impurity > 0:
        hbs = merge_dominant(hbs, tm, cfg)
    pure, mixed = hbs.pure_blocks(), hbs.mixed_blocks()
    print(f"{len(hbs.blocks)} blocks: {len(pure)} pure, {len(mixed)} mixed")
    for b in sorted(hbs.blocks, key=lambda b: -b.size):
        counts = {tm.class_names[c]: int(n) for c, n in enumerate(b.class_counts) if n}
        print(f"  label {b.label(tm.class_names)} size {b.size} "
              f"impurity {b.impurity():.3f} counts {counts}")
    if args.json:
        doc = [hb_to_json_dict(b, ds.coordinate_names, tm.class_names, tm.case_ids)
               for b in hbs.blocks]
        pathlib.Path(args.json).write_text(canonical_json(doc))
    if args.trace:
        with open(args.trace, "w") as f:
            for rec in hbs.trace:
                f.write(canonical_json(rec) + "\n")
    return 0


def cmd_learn(args) -> int:
    from .classifier import learn
    ds = load_dataset(args)
    nd = normalize(ds)
    complete = ds.complete_indices()
    from .dataset import Dataset, NormalizedDataset
    sub = Dataset(ds.coordinate_names, [ds.cases[i] for i in complete],
                  ds.class_labels, ds.raw_ranges)
    sub_nd = NormalizedDataset(base=sub, values=nd.values[complete],
                               lows=nd.lows, highs=nd.highs)
    model = learn(sub_nd,
                  SplitSpec(fold_count=2, seed=args.seed, hb_fraction=args.hb_fraction),
                  MergeConfig(impurity_threshold=args.impurity),
                  ModelConfig(k=args.k, distance_variant=args.variant,
                              tie_class=args.tie_class,
                              select_k=args.hb_fraction < 1.0),
                  half_length=args.half_length)
    doc = model.to_json_dict()
    doc["rules"] = []
    _write_or_print(canonical_json(doc), args.json)
    print(f"{len(model.blocks.blocks)} blocks, k={model.k}, variant {model.distance_variant}",
          file=sys.stderr)
    return 0


def cmd_classify(args) -> int:
    ds = load_dataset(args)
    nd = normalize(ds)
    tm = matrix_from_normalized(nd, tie_class=args.tie_class)
    cfg = MergeConfig(impurity_threshold=args.impurity)
    hbs = merge_pure(tm, cfg, half_length=args.half_length)
    if args.impurity > 0:
        hbs = merge_dominant(hbs, tm, cfg)
    model = HyperModel(blocks=hbs, tm=tm, k=args.k,
                       distance_variant=args.variant, tie_class=args.tie_class)
    raw = [float(v) for v in args.point.split(",")]
    if len(raw) != ds.n_coordinates:
        print(f"error: point needs {ds.n_coordinates} values", file=sys.stderr)
        return 2
    x = np.array([nd.normalize_value(j, v) for j, v in enumerate(raw)])
    p = classify(model, x)
    print(canonical_json({"class": p.label, "rule_used": p.rule_used,
                          "votes": p.votes}))
    return 0


def cmd_crossval(args) -> int:
    ds = load_dataset(args)
    rep = cross_validate(ds, SplitSpec(fold_count=args.folds, seed=args.seed,
                                       hb_fraction=args.hb_fraction),
                         MergeConfig(impurity_threshold=args.impurity),
                         ModelConfig(k=args.k, distance_variant=args.variant,
                                     tie_class=args.tie_class),
                         half_length=args.half_length)
    if args.json:
        pathlib.Path(args.json).write_text(canonical_json(rep.to_json_dict()))
    print(rep.table())
    if args.assert_mean is not None and rep.mean_accuracy < args.assert_mean:
        print(f"FAIL mean accuracy {rep.mean_accuracy:.4f} < {args.assert_mean}",
              file=sys.stderr)
        return 1
    return 0


def cmd_rules(args) -> int:
    ds = load_dataset(args)
    rule = threshold_rule_search(ds, max_dims=args.max_dims)
    nd = normalize(ds)
    vals, codes, idx = nd.complete_matrix()
    raw = np.column_stack([nd.denormalize(j, vals[:, j])
                           for j in range(vals.shape[1])])
    labels = [ds.cases[i].label for i in idx]
    _, acc = apply_threshold_rule(rule, raw, labels)
    correct = round(acc * len(labels))
    print(f"{rule.format(ds.coordinate_names)} "
          f"({correct}/{len(labels)} = {acc * 100:.2f}%)")
    if args.json:
        doc = {"conjuncts": [{"coordinate": ds.coordinate_names[c], "threshold": t,
                              "direction": "<"} for c, t in rule.conjuncts],
               "then_class": rule.then_class, "else_class": rule.else_class,
               "correct": correct, "total": len(labels), "accuracy": acc}
        pathlib.Path(args.json).write_text(canonical_json(doc))
    return 0


def cmd_describe(args) -> int:
    ds = load_dataset(args)
    nd = normalize(ds)
    vals, codes, _ = nd.complete_matrix()
    profiles = {cls: profile(vals[codes == ci], cutoff=args.cutoff)
                for ci, cls in enumerate(ds.class_labels)}
    print(describe(profiles, ds.coordinate_names, style=args.style))
    return 0


def cmd_render(args) -> int:
    ds = load_dataset(args)
    nd = normalize(ds)
    if args.view == "polylines":
        scene = compile_polylines(nd)
    elif args.view == "frequency":
        scene = compile_polylines(nd)
        scene.segments = frequency_widths(nd)
        scene.visible[:] = False
    else:
        tm = matrix_from_normalized(nd, tie_class=args.tie_class)
        hbs = merge_pure(tm, MergeConfig(), half_length=args.half_length)
        if args.view == "heat":
            scene = heat_scene(nd, hbs.pure_blocks())
        elif args.view == "sidebyside":
            scene = side_by_side(nd, hbs.blocks, tm)
        else:
            print(f"error: unknown view {args.view}", file=sys.stderr)
            return 2
    if args.svg:
        pathlib.Path(args.svg).write_bytes(render_svg(scene))
    if args.json:
        pathlib.Path(args.json).write_text(scene.to_json())
    if not args.svg and not args.json:
        sys.stdout.write(scene.to_json())
    return 0


def cmd_serve(args) -> int:
    from .service import serve
    serve(port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperview",
                                 description="hyperblock workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load", help="parse a table and dump canonical JSON")
    add_data_flags(p)
    p.add_argument("--json", default=None, help="write dataset JSON here")
    p.set_defaults(fn=cmd_load)

    hb = sub.add_parser("hb", help="hyperblock generation and merging")
    hb_sub = hb.add_subparsers(dest="hb_command", required=True)
    for name, help_text in (("gen", "grow pure blocks from seeds"),
                            ("merge", "grow pure blocks, then merge to dominant")):
        q = hb_sub.add_parser(name, help=help_text)
        add_data_flags(q)
        q.add_argument("--half-length", type=float, default=0.0)
        q.add_argument("--impurity", type=float,
                       default=0.0 if name == "gen" else 0.10)
        q.add_argument("--order-seed", type=int, default=None)
        q.add_argument("--tie-class", default=None)
        q.add_argument("--json", default=None)
        q.add_argument("--trace", default=None, help="merge trace JSONL path")
        q.set_defaults(fn=cmd_hb)

    p = sub.add_parser("learn", help="learn a model and dump its JSON bundle")
    add_data_flags(p)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--variant", choices=("N1", "N2", "N3"), default="N2")
    p.add_argument("--hb-fraction", type=float, default=1.0)
    p.add_argument("--impurity", type=float, default=0.0)
    p.add_argument("--half-length", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--tie-class", default=None)
    p.add_argument("--json", default=None)
    p.set_defaults(fn=cmd_learn)

    p = sub.add_parser("classify", help="classify one raw point")
    add_data_flags(p)
    p.add_argument("--point", required=True, help="comma-separated raw values")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--variant", choices=("N1", "N2", "N3"), default="N2")
    p.add_argument("--impurity", type=float, default=0.0)
    p.add_argument("--half-length", type=float, default=0.0)
    p.add_argument("--tie-class", default=None)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("crossval", help="k-fold cross validation report")
    add_data_flags(p)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--variant", choices=("N1", "N2", "N3"), default="N2")
    p.add_argument("--impurity", type=float, default=0.0)
    p.add_argument("--hb-fraction", type=float, default=1.0)
    p.add_argument("--half-length", type=float, default=0.0)
    p.add_argument("--tie-class", default=None)
    p.add_argument("--json", default=None)
    p.add_argument("--assert", dest="assert_mean", type=float, default=None,
                   help="exit nonzero when mean accuracy falls below this")
    p.set_defaults(fn=cmd_crossval)

    p = sub.add_parser("rules", help="threshold-rule discovery")
    add_data_flags(p)
    p.add_argument("--max-dims", type=int, default=3)
    p.add_argument("--json", default=None)
    p.set_defaults(fn=cmd_rules)

    p = sub.add_parser("describe", help="thirds-concentration description")
    add_data_flags(p)
    p.add_argument("--cutoff", type=float, default=0.5)
    p.add_argument("--style", choices=("structured", "sentence"),
                   default="structured")
    p.set_defaults(fn=cmd_describe)

    p = sub.add_parser("render", help="compile a scene to SVG/JSON")
    add_data_flags(p)
    p.add_argument("--view", choices=("polylines", "sidebyside", "heat", "frequency"),
                   default="polylines")
    p.add_argument("--half-length", type=float, default=0.0)
    p.add_argument("--tie-class", default=None)
    p.add_argument("--svg", default=None)
    p.add_argument("--json", default=None)
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("serve", help="run the HTTP session server")
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("HYPERVIEW_PORT", "8707")))
    p.set_defaults(fn=cmd_serve)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
