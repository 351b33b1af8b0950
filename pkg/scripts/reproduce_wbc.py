#!/usr/bin/env python3
"""End-to-end reproduction run on the bundled 683-case tumor dataset:
threshold rules, full-data block model, pruning trade-off, 10-fold CV for
pure and dominant blocks, and the linguistic summary."""
import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from hyperview import (
    HyperModel, MergeConfig, ModelConfig, SplitSpec, apply_threshold_rule,
    classify, cross_validate, describe, matrix_from_normalized, merge_dominant,
    merge_pure, normalize, parse_table, profile, prune_small,
    threshold_rule_search,
)

DATA = pathlib.Path(__file__).resolve().parent.parent / "data" / "wbc" / "breast-cancer-wisconsin.data"


def main():
    ds = parse_table(DATA.read_text(), class_column=-1, id_column=0)
    nd = normalize(ds)
    tm = matrix_from_normalized(nd, tie_class="4")
    print(f"dataset: {len(ds.cases)} cases, {len(tm.values)} complete")

    print("\n== threshold rules (dimension reduction)")
    vals, codes, idx = nd.complete_matrix()
    raw = np.column_stack([nd.denormalize(j, vals[:, j]) for j in range(9)])
    labels = [ds.cases[i].label for i in idx]
    for dims in (1, 2, 3):
        rule = threshold_rule_search(ds, max_dims=dims)
        _, acc = apply_threshold_rule(rule, raw, labels)
        print(f"  {dims}-D: {rule.format(ds.coordinate_names)} "
              f"({round(acc * len(labels))}/{len(labels)} = {acc * 100:.2f}%)")

    print("\n== full-data block model (0.2 seeding)")
    t0 = time.perf_counter()
    hbs = merge_pure(tm, MergeConfig(), half_length=0.2)
    print(f"  {len(hbs.pure_blocks())} pure + {len(hbs.mixed_blocks())} mixed "
          f"in {time.perf_counter() - t0:.2f}s")
    model = HyperModel(blocks=hbs, tm=tm, k=1, tie_class="4")
    correct = sum(classify(model, tm.values[i]).label
                  == tm.class_names[tm.labels[i]] for i in range(len(tm.values)))
    print(f"  containment accuracy {correct}/{len(tm.values)} "
          f"= {correct / len(tm.values) * 100:.2f}%")
    for ms in (10, 26):
        rep = prune_small(model, min_size=ms)
        print(f"  prune <{ms}: removed {rep.removed_blocks} blocks "
              f"({rep.removed_cases} cases), recall {rep.recall * 100:.2f}%, "
              f"covered accuracy {rep.covered_accuracy * 100:.2f}%")

    print("\n== 10-fold cross validation")
    for tag, merge_cfg, k in (("pure, k=3, N2", MergeConfig(), 3),
                              ("dominant 10%, k=5, N2",
                               MergeConfig(impurity_threshold=0.10), 5)):
        rep = cross_validate(ds, SplitSpec(fold_count=10, seed=7), merge_cfg,
                             ModelConfig(k=k, distance_variant="N2", tie_class="4"))
        print(f"  {tag}: mean {rep.mean_accuracy * 100:.2f}% "
              f"min {rep.min_accuracy * 100:.2f}% max {rep.max_accuracy * 100:.2f}% "
              f"blocks/fold {rep.mean_block_count:.1f}")

    print("\n== linguistic summary")
    profiles = {cls: profile(vals[codes == ci], cutoff=0.5)
                for ci, cls in enumerate(ds.class_labels)}
    print(describe(profiles, ds.coordinate_names))


if __name__ == "__main__":
    main()
