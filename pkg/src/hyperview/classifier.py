"""The hyperblock classifier: containment (R1), nearest-block (R2), and
k-nearest-block voting (R3), plus the threshold-rule search used for
dimension reduction."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .blocks import HyperBlock, TrainingMatrix, contains, distance, matrix_from_normalized
from .dataset import Dataset, NormalizedDataset, SplitSpec, normalize
from .mhyper import HBSet, MergeConfig, merge_dominant, merge_pure


@dataclass
class HyperModel:
    blocks: HBSet
    tm: TrainingMatrix
    k: int = 3
    distance_variant: str = "N2"
    k_candidates: tuple[int, ...] = (1, 3, 5)
    accuracy_threshold: float = 0.0
    refusal_radius: Optional[float] = None
    tie_class: Optional[str] = None
    unclassified_residue: bool = False

    def __post_init__(self):
        if self.k not in self.k_candidates:
            self.k_candidates = tuple(sorted(set(self.k_candidates) | {self.k}))
        if not self.blocks.blocks:
            raise ValueError("model requires at least one block")

    def tie_code(self) -> int:
        if self.tie_class is not None:
            return self.tm.class_names.index(self.tie_class)
        return self.tm.tie_code()

    def to_json_dict(self) -> dict:
        from .blocks import hb_to_json_dict
        names = [f"x{j + 1}" for j in range(self.tm.values.shape[1])]
        return {
            "blocks": [hb_to_json_dict(b, names, self.tm.class_names, self.tm.case_ids)
                       for b in self.blocks.blocks],
            "k": self.k,
            "variant": self.distance_variant,
            "tie_class": self.tm.class_names[self.tie_code()],
        }


@dataclass(frozen=True)
class Prediction:
    label: Optional[str]
    rule_used: str                      # R1 | R2 | R3 | refused
    votes: dict = field(default_factory=dict)
    containing_blocks: tuple[int, ...] = ()


def classify(model: HyperModel, x: np.ndarray) -> Prediction:
    """R1 when the point sits inside at least one block (majority over the
    containing blocks' labels, ties to the risk class); otherwise the k
    nearest blocks vote. With k of one that is the plain nearest-block rule."""
    x = np.asarray(x, dtype=float)
    tm = model.tm
    blocks = model.blocks.blocks
    inside = tuple(i for i, b in enumerate(blocks) if contains(b, x))
    tie = model.tie_code()
    if inside:
        codes = [blocks[i].label_code for i in inside]
        counts = np.bincount(codes, minlength=tm.n_classes)
        label = _vote(counts, tie)
        votes = {tm.class_names[c]: int(n) for c, n in enumerate(counts) if n}
        return Prediction(tm.class_names[label], "R1", votes, inside)

    dists = np.array([distance(x, b, model.distance_variant, tm) for b in blocks])
    if model.refusal_radius is not None:
        if int((dists <= model.refusal_radius).sum()) < min(model.k, len(blocks)):
            return Prediction(None, "refused")
    k = min(model.k, len(blocks))
    nearest = np.argsort(dists, kind="stable")[:k]
    counts = np.bincount([blocks[i].label_code for i in nearest], minlength=tm.n_classes)
    label = _vote(counts, tie)
    votes = {tm.class_names[c]: int(n) for c, n in enumerate(counts) if n}
    return Prediction(tm.class_names[label], "R2" if k == 1 else "R3", votes)


def _vote(counts: np.ndarray, tie_code: int) -> int:
    top = counts.max()
    winners = np.nonzero(counts == top)[0]
    if len(winners) > 1 and tie_code in winners:
        return tie_code
    return int(winners[0])


def classify_batch(model: HyperModel, points: np.ndarray) -> list[Prediction]:
    return [classify(model, p) for p in points]


def k_selection(blocks: HBSet, tm: TrainingMatrix, tune_values: np.ndarray,
                tune_labels: np.ndarray, candidates: Sequence[int],
                variant: str, q: float) -> tuple[int, float, bool]:
    """Pick the vote size with the best tuning accuracy (ties go to the
    smallest candidate). Flags an unclassified residue when even the best
    accuracy misses the target q."""
    if not len(tune_values):
        raise ValueError("empty tuning set")
    if not candidates or any(k % 2 == 0 for k in candidates):
        raise ValueError("candidates must be odd and non-empty")
    best_k, best_acc = None, -1.0
    for k in sorted(candidates):
        model = HyperModel(blocks=blocks, tm=tm, k=k, distance_variant=variant,
                           k_candidates=tuple(sorted(candidates)))
        preds = classify_batch(model, tune_values)
        acc = float(np.mean([
            p.label == tm.class_names[t] for p, t in zip(preds, tune_labels)
        ]))
        if acc > best_acc:
            best_k, best_acc = k, acc
    return best_k, best_acc, best_acc < q


@dataclass(frozen=True)
class ModelConfig:
    k: int = 3
    distance_variant: str = "N2"
    k_candidates: tuple[int, ...] = (1, 3, 5)
    accuracy_threshold: float = 0.0
    refusal_radius: Optional[float] = None
    tie_class: Optional[str] = None
    select_k: bool = False


def learn(train: NormalizedDataset, split: SplitSpec, merge_cfg: MergeConfig,
          model_cfg: ModelConfig = ModelConfig(), half_length: float = 0.0) -> HyperModel:
    """Build the block model on the block-learning share of the training
    data, optionally tuning k on the held-out remainder."""
    tm_all = matrix_from_normalized(train, tie_class=model_cfg.tie_class)
    n = len(tm_all.values)
    if split.hb_fraction >= 1.0:
        hb_rows = np.arange(n)
        k_rows = np.array([], dtype=int)
    else:
        rng = np.random.default_rng(split.seed)
        perm = rng.permutation(n)
        cut = max(1, int(round(split.hb_fraction * n)))
        hb_rows, k_rows = np.sort(perm[:cut]), np.sort(perm[cut:])

    tm = TrainingMatrix(tm_all.values[hb_rows], tm_all.labels[hb_rows],
                        tm_all.class_names,
                        [tm_all.case_ids[i] for i in hb_rows], tm_all.tie_class)
    present = set(int(v) for v in np.unique(tm.labels))
    if present != set(range(tm.n_classes)):
        missing = [tm.class_names[c] for c in range(tm.n_classes) if c not in present]
        raise ValueError(f"class absent from block-learning split: {missing}")

    hbs = merge_pure(tm, merge_cfg, half_length=half_length)
    if merge_cfg.impurity_threshold > 0.0:
        hbs = merge_dominant(hbs, tm, merge_cfg)

    k, acc, residue = model_cfg.k, None, False
    if model_cfg.select_k and len(k_rows):
        k, acc, residue = k_selection(
            hbs, tm, tm_all.values[k_rows], tm_all.labels[k_rows],
            model_cfg.k_candidates, model_cfg.distance_variant,
            model_cfg.accuracy_threshold)
    return HyperModel(blocks=hbs, tm=tm, k=k,
                      distance_variant=model_cfg.distance_variant,
                      k_candidates=model_cfg.k_candidates,
                      accuracy_threshold=model_cfg.accuracy_threshold,
                      refusal_radius=model_cfg.refusal_radius,
                      tie_class=model_cfg.tie_class,
                      unclassified_residue=residue)


# ---------------------------------------------------------------------------
# Threshold rules


@dataclass(frozen=True)
class ThresholdRule:
    """Conjunction of strict upper bounds: if every `coordinate < threshold`
    holds (raw units) the case gets `then_class`, otherwise `else_class`."""

    conjuncts: tuple[tuple[int, float], ...]
    then_class: str
    else_class: str

    def format(self, names: Sequence[str]) -> str:
        if not self.conjuncts:
            return f"(always) -> {self.else_class}"
        cond = " & ".join(f"{names[c]} < {t:g}" for c, t in self.conjuncts)
        return f"{cond} -> {self.then_class}"


def apply_threshold_rule(rule: ThresholdRule, values: np.ndarray,
                         labels: Sequence[str]) -> tuple[list[str], float]:
    """Predictions plus accuracy of the rule over complete raw-value rows."""
    preds = []
    correct = 0
    for row, truth in zip(values, labels):
        # an empty rule predicts the else class for everything
        hold = bool(rule.conjuncts) and all(row[c] < t for c, t in rule.conjuncts)
        p = rule.then_class if hold else rule.else_class
        preds.append(p)
        correct += p == truth
    return preds, correct / max(len(preds), 1)


def rank_coordinates(nd: NormalizedDataset, merge_cfg: MergeConfig = MergeConfig()) -> list[int]:
    """Coordinates ordered by how often pairs of learned pure blocks are
    disjoint on them (the non-overlap shading, darkest first)."""
    tm = matrix_from_normalized(nd)
    hbs = merge_pure(tm, merge_cfg)
    pure = hbs.pure_blocks()
    d = tm.values.shape[1]
    shade = np.zeros(d)
    pairs = 0
    for a, b in itertools.combinations(pure, 2):
        shade += (a.hi < b.lo) | (b.hi < a.lo)
        pairs += 1
    if pairs:
        shade /= pairs
    return sorted(range(d), key=lambda j: (-shade[j], j))


def threshold_rule_search(data: Dataset, max_dims: int,
                          coordinate_order: Optional[Sequence[int]] = None) -> ThresholdRule:
    """Greedy conjunction growth along a separability ranking of the
    coordinates.

    Candidate cut points are the observed values of the coordinate (strict
    upper bounds) plus a sentinel above the maximum that leaves the
    coordinate unconstrained. Earlier thresholds are not frozen outright:
    all threshold vectors tied at the running optimum stay live, and later
    steps may settle them. The reported rule is the tied optimum with the
    smallest thresholds, which errs toward the else class.
    """
    if len(data.class_labels) != 2:
        raise ValueError("threshold rules require a two-class dataset")
    nd = normalize(data)
    vals, codes, _ = nd.complete_matrix()
    raw = np.column_stack([nd.denormalize(j, vals[:, j]) for j in range(vals.shape[1])])
    labels = np.asarray(codes)

    order = list(coordinate_order) if coordinate_order is not None else rank_coordinates(nd)
    order = order[:max_dims]

    # then-branch class: whichever class dominates below the candidate cuts;
    # on this form of rule that is the class with the lower values overall
    medians = [np.median(raw[labels == c], axis=0).sum() for c in (0, 1)]
    then_code = int(np.argmin(medians))
    else_code = 1 - then_code

    def accuracy(cuts: tuple[float, ...], coords: list[int]) -> int:
        hold = np.ones(len(raw), dtype=bool)
        for c, t in zip(coords, cuts):
            hold &= raw[:, c] < t
        pred = np.where(hold, then_code, else_code)
        return int((pred == labels).sum())

    chosen: list[int] = []
    tied: list[tuple[float, ...]] = [()]
    for coord in order:
        grid = np.unique(raw[:, coord]).tolist()
        grid.append(grid[-1] + 1.0)     # sentinel: conjunct always true
        best = -1
        nxt: list[tuple[float, ...]] = []
        for prev in tied:
            for t in grid:
                cand = prev + (t,)
                a = accuracy(cand, chosen + [coord])
                if a > best:
                    best, nxt = a, [cand]
                elif a == best:
                    nxt.append(cand)
        chosen.append(coord)
        tied = nxt
    final = min(tied)
    sentinel_free = tuple(
        (c, float(t)) for c, t in zip(chosen, final)
        if t <= np.max(raw[:, c])
    )
    return ThresholdRule(conjuncts=sentinel_free,
                         then_class=data.class_labels[then_code],
                         else_class=data.class_labels[else_code])
