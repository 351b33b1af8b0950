import pathlib

import numpy as np
import pytest

from hyperview import (
    HyperModel, MergeConfig, ModelConfig, SplitSpec, TrainingMatrix,
    block_from_bounds, complexity_counts, confusion, cross_validate,
    matrix_from_normalized, merge_pure, normalize, parse_dt_text, parse_table,
    prune_small,
)
from hyperview.evaluation import REFUSED, accuracy_from_confusion
from hyperview.mhyper import HBSet


def test_confusion_all_correct():
    mat = confusion(["A", "B", "A"], ["A", "B", "A"], ["A", "B"])
    assert mat["A"]["A"] == 2 and mat["B"]["B"] == 1
    assert mat["A"]["B"] == 0 and mat["B"]["A"] == 0
    assert accuracy_from_confusion(mat) == 1.0


def test_confusion_replica_table():
    # 45 correct B, 2 B read as M, 5 M read as B, 17 correct M
    preds = ["B"] * 45 + ["M"] * 2 + ["B"] * 5 + ["M"] * 17
    truth = ["B"] * 47 + ["M"] * 22
    mat = confusion(preds, truth, ["B", "M"])
    assert mat["B"] == {"B": 45, "M": 2, REFUSED: 0}
    assert mat["M"] == {"B": 5, "M": 17, REFUSED: 0}


def test_confusion_refusal_column():
    mat = confusion(["A", None, "B"], ["A", "A", "B"], ["A", "B"])
    assert mat["A"][REFUSED] == 1
    assert sum(row[REFUSED] for row in mat.values()) == 1


def test_confusion_unknown_label_rejected():
    with pytest.raises(ValueError):
        confusion(["A"], ["Z"], ["A", "B"])
    with pytest.raises(ValueError):
        confusion(["A", "B"], ["A"], ["A", "B"])


def test_cross_validate_trivially_separable():
    d = parse_table("0.1,0.1,A\n0.12,0.1,A\n0.9,0.9,B\n0.88,0.9,B", class_column=-1)
    rep = cross_validate(d, SplitSpec(fold_count=2, seed=3), MergeConfig(),
                         ModelConfig(k=1))
    assert rep.mean_accuracy == 1.0
    assert rep.min_accuracy == 1.0
    assert all(f.accuracy == 1.0 for f in rep.per_fold)


def test_cross_validate_deterministic(wbc):
    cfg = dict(split=SplitSpec(fold_count=10, seed=7), merge_cfg=MergeConfig(),
               model_cfg=ModelConfig(k=3, distance_variant="N2"))
    a = cross_validate(wbc, **cfg)
    b = cross_validate(wbc, **cfg)
    assert a.to_json_dict() == b.to_json_dict()


def test_cross_validate_wbc_pure_band(wbc):
    rep = cross_validate(wbc, SplitSpec(fold_count=10, seed=7), MergeConfig(),
                         ModelConfig(k=3, distance_variant="N2"))
    assert rep.mean_accuracy >= 0.945
    assert rep.min_accuracy <= rep.mean_accuracy <= rep.max_accuracy
    for f in rep.per_fold:
        row_sums = {t: sum(f.confusion[t].values()) for t in f.confusion}
        assert sum(row_sums.values()) in (68, 69)


def test_report_accuracy_matches_confusion(wbc):
    rep = cross_validate(wbc, SplitSpec(fold_count=10, seed=7), MergeConfig(),
                         ModelConfig(k=3, distance_variant="N2"))
    for f in rep.per_fold:
        assert np.isclose(f.accuracy, accuracy_from_confusion(f.confusion))


def _wbc_full_model(wbc_tm):
    blocks = merge_pure(wbc_tm, MergeConfig(), half_length=0.2)
    return HyperModel(blocks=blocks, tm=wbc_tm, k=1, tie_class="4")


def test_prune_min_size_one_removes_nothing(wbc_tm):
    rep = prune_small(_wbc_full_model(wbc_tm), min_size=1)
    assert rep.removed_blocks == 0 and rep.removed_cases == 0
    assert rep.recall == 1.0


def test_prune_wbc_trade_off(wbc_tm):
    model = _wbc_full_model(wbc_tm)
    r10 = prune_small(model, min_size=10)
    assert 0.93 <= r10.recall <= 0.98
    assert r10.covered_accuracy >= 0.995
    r26 = prune_small(model, min_size=26)
    assert 0.84 <= r26.recall <= 0.90
    assert r26.covered_accuracy >= 0.995
    assert r26.recall <= r10.recall


def test_prune_monotone_recall(wbc_tm):
    model = _wbc_full_model(wbc_tm)
    recalls = [prune_small(model, s).recall for s in (1, 5, 10, 20, 26, 40)]
    assert all(b <= a + 1e-12 for a, b in zip(recalls, recalls[1:]))


def test_prune_refusals_not_counted_as_errors(wbc_tm):
    model = _wbc_full_model(wbc_tm)
    rep = prune_small(model, min_size=26)
    n = len(wbc_tm.values)
    covered_set = n - len(rep.refused_case_rows)
    assert rep.covered_accuracy * covered_set == pytest.approx(
        round(rep.covered_accuracy * covered_set))


def test_complexity_full_domain_block():
    tm = TrainingMatrix(np.zeros((2, 9)), np.array([0, 0]), ["A", "B"], ["0", "1"])
    blk = block_from_bounds(tm, [0.0] * 9, [1.0] * 9)
    model = HyperModel(blocks=HBSet(blocks=[blk]), tm=tm, k=1)
    out = complexity_counts(model, [])
    assert out["hb_values"] == 18


def test_complexity_ratio_on_imported_tree(wbc_tm):
    text = (pathlib.Path(__file__).parent / "data" / "id3_branch_dump.txt").read_text()
    branches = parse_dt_text(text)
    blocks = merge_pure(wbc_tm, MergeConfig(), half_length=0.0)
    from hyperview.mhyper import merge_dominant
    dom = merge_dominant(blocks, wbc_tm, MergeConfig(impurity_threshold=0.10))
    model = HyperModel(blocks=dom, tm=wbc_tm, k=1, tie_class="4")
    out = complexity_counts(model, branches)
    assert out["ratio"] > 1.0
    assert out["dt_values"] == sum(2 * len(b.canonicalized().conjuncts) + 1
                                   for b in branches)
    assert out["hb_min_members"] > 1
