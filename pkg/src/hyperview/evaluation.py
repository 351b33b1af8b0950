"""Cross-validation harness, confusion matrices, small-block pruning
analysis, and block-versus-tree complexity accounting."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .blocks import DTBranch, HyperBlock, TrainingMatrix, contains, matrix_from_normalized
from .classifier import HyperModel, ModelConfig, classify_batch, learn
from .dataset import Dataset, NormalizedDataset, SplitSpec, make_folds, normalize
from .mhyper import MergeConfig

REFUSED = "refused"


@dataclass
class FoldResult:
    accuracy: float
    confusion: dict
    block_count: int


@dataclass
class EvaluationReport:
    per_fold: list[FoldResult]
    mean_accuracy: float
    min_accuracy: float
    max_accuracy: float
    mean_block_count: float
    config: dict

    def to_json_dict(self) -> dict:
        return {
            "folds": [
                {"accuracy": f.accuracy, "confusion": f.confusion,
                 "block_count": f.block_count}
                for f in self.per_fold
            ],
            "summary": {
                "mean_accuracy": self.mean_accuracy,
                "min_accuracy": self.min_accuracy,
                "max_accuracy": self.max_accuracy,
                "mean_block_count": self.mean_block_count,
            },
            "config": self.config,
        }

    def table(self) -> str:
        lines = [f"{'fold':>4} {'accuracy':>9} {'blocks':>7}"]
        for i, f in enumerate(self.per_fold):
            lines.append(f"{i:>4} {f.accuracy * 100:>8.2f}% {f.block_count:>7}")
        lines.append(f"mean {self.mean_accuracy * 100:>8.2f}% {self.mean_block_count:>7.1f}")
        lines.append(f" min {self.min_accuracy * 100:>8.2f}%")
        lines.append(f" max {self.max_accuracy * 100:>8.2f}%")
        return "\n".join(lines)


def confusion(preds: Sequence[Optional[str]], truth: Sequence[str],
              class_order: Sequence[str]) -> dict:
    """truth-by-prediction counts; refusals (None predictions) land in their
    own column instead of counting as errors."""
    if len(preds) != len(truth):
        raise ValueError("predictions and truth differ in length")
    known = set(class_order)
    mat = {t: {p: 0 for p in list(class_order) + [REFUSED]} for t in class_order}
    for p, t in zip(preds, truth):
        if t not in known or (p is not None and p not in known):
            raise ValueError(f"unknown label in ({t!r}, {p!r})")
        mat[t][p if p is not None else REFUSED] += 1
    return mat


def accuracy_from_confusion(mat: dict) -> float:
    total = sum(sum(row.values()) for row in mat.values())
    correct = sum(mat[t].get(t, 0) for t in mat)
    return correct / total if total else 0.0


def cross_validate(data: Dataset, split: SplitSpec, merge_cfg: MergeConfig,
                   model_cfg: ModelConfig = ModelConfig(),
                   half_length: float = 0.0) -> EvaluationReport:
    """Per fold: learn on the training part, classify the validation part,
    record accuracy, confusion and block count. Incomplete cases are left
    out of both sides. Deterministic for a fixed split seed."""
    nd = normalize(data)
    complete = data.complete_indices()
    sub = Dataset(data.coordinate_names,
                  [data.cases[i] for i in complete],
                  data.class_labels, data.raw_ranges)
    folds = make_folds(sub, split)
    values = nd.values[complete]
    labels = [data.cases[i].label for i in complete]

    results = []
    for fold_index, (train_idx, val_idx) in enumerate(folds):
        train_ds = Dataset(data.coordinate_names,
                           [sub.cases[i] for i in train_idx],
                           data.class_labels, data.raw_ranges)
        train_nd = NormalizedDataset(base=train_ds, values=values[train_idx],
                                     lows=nd.lows, highs=nd.highs)
        try:
            model = learn(train_nd, split, merge_cfg, model_cfg, half_length)
        except ValueError as e:
            raise ValueError(f"fold {fold_index}: {e}") from e
        preds = classify_batch(model, values[val_idx])
        pred_labels = [p.label for p in preds]
        truth = [labels[i] for i in val_idx]
        mat = confusion(pred_labels, truth, data.class_labels)
        classified = [(p, t) for p, t in zip(pred_labels, truth) if p is not None]
        acc = (sum(p == t for p, t in classified) / len(classified)
               if classified else 0.0)
        results.append(FoldResult(acc, mat, len(model.blocks.blocks)))

    accs = [r.accuracy for r in results]
    return EvaluationReport(
        per_fold=results,
        mean_accuracy=float(np.mean(accs)),
        min_accuracy=float(np.min(accs)),
        max_accuracy=float(np.max(accs)),
        mean_block_count=float(np.mean([r.block_count for r in results])),
        config={"folds": split.fold_count, "seed": split.seed,
                "impurity": merge_cfg.impurity_threshold,
                "k": model_cfg.k, "variant": model_cfg.distance_variant,
                "half_length": half_length},
    )


@dataclass
class PruningReport:
    min_block_size: int
    removed_blocks: int
    removed_cases: int          # summed sizes of the dropped blocks
    recall: float               # (total - removed_cases) / total
    covered_accuracy: float     # accuracy among cases still inside a block
    refused_case_rows: list[int]

    @property
    def precision(self) -> float:
        return self.covered_accuracy


def prune_small(model: HyperModel, min_size: int) -> PruningReport:
    """Drop blocks below the size floor and report the recall/precision
    trade-off on the model's own training data.

    Recall follows the case-count arithmetic of the companion analysis:
    the sum of the dropped blocks' sizes comes off the covered total.
    Accuracy is then measured on the cases still inside some kept block;
    cases only ever covered by dropped blocks are refusals.
    """
    tm = model.tm
    kept = [b for b in model.blocks.blocks if b.size >= min_size]
    dropped = [b for b in model.blocks.blocks if b.size < min_size]
    removed_cases = sum(b.size for b in dropped)
    n = len(tm.values)

    refused_rows = []
    covered = correct = 0
    tie = model.tie_code()
    for i in range(n):
        inside = [b for b in kept if contains(b, tm.values[i])]
        if not inside:
            refused_rows.append(i)
            continue
        covered += 1
        counts = np.bincount([b.label_code for b in inside], minlength=tm.n_classes)
        top = counts.max()
        winners = np.nonzero(counts == top)[0]
        pred = tie if (len(winners) > 1 and tie in winners) else int(winners[0])
        correct += pred == tm.labels[i]

    return PruningReport(
        min_block_size=min_size,
        removed_blocks=len(dropped),
        removed_cases=removed_cases,
        recall=(n - removed_cases) / n if n else 0.0,
        covered_accuracy=correct / covered if covered else 0.0,
        refused_case_rows=refused_rows,
    )


def complexity_counts(model: HyperModel, branches: Sequence[DTBranch]) -> dict:
    """Storage-size comparison: a block costs two values per active
    coordinate; a branch costs two per conjunct (threshold plus direction)
    and one for its leaf."""
    hb_values = sum(2 * int(b.active.sum()) for b in model.blocks.blocks)
    dt_values = sum(2 * len(b.canonicalized().conjuncts) + 1 for b in branches)
    return {
        "hb_values": hb_values,
        "dt_values": dt_values,
        "ratio": dt_values / hb_values if hb_values else float("inf"),
        "hb_min_members": min((b.size for b in model.blocks.blocks), default=0),
    }
