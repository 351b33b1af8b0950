"""Acceptance gate: every criterion below runs at its stated tolerance and
prints one PASS line (failures surface as assertion errors)."""
import itertools
import json
import pathlib
import sys
import time

import numpy as np
import pytest

from hyperview import (
    HyperModel, MergeConfig, ModelConfig, SplitSpec, TrainingMatrix,
    apply_axis_shift, apply_threshold_rule, block_from_bounds, classify,
    compile_polylines, contains, cross_validate, describe, dt_branch_to_hb,
    envelope, distance, hb_to_dt_branch, make_folds, matrix_from_normalized,
    merge_dominant, merge_pure, normalize, parse_dt_text, parse_table, profile,
    prune_small, render_svg, seed_hb, threshold_rule_search,
)
from hyperview.blocks import rows_inside
from hyperview.dataset import Dataset

ROOT = pathlib.Path(__file__).resolve().parent.parent
WBC = ROOT / "data" / "wbc" / "breast-cancer-wisconsin.data"
FIXTURES = pathlib.Path(__file__).parent / "data"


RESULTS: list[tuple] = []


def report(n, text):
    RESULTS.append((str(n), text))
    print(f"ACCEPTANCE {n}: PASS  {text}")


@pytest.fixture(scope="module")
def wbc_full():
    return parse_table(WBC.read_text(), class_column=-1, id_column=0)


@pytest.fixture(scope="module")
def raw_and_labels(wbc_full):
    nd = normalize(wbc_full)
    vals, codes, idx = nd.complete_matrix()
    raw = np.column_stack([nd.denormalize(j, vals[:, j]) for j in range(9)])
    labels = [wbc_full.cases[i].label for i in idx]
    return raw, labels


@pytest.fixture(scope="module")
def wbc_tm_acc(wbc_full):
    return matrix_from_normalized(normalize(wbc_full), tie_class="4")


def test_criterion_1_rule_one_dim(wbc_full, raw_and_labels):
    t0 = time.perf_counter()
    rule = threshold_rule_search(wbc_full, max_dims=1)
    elapsed = time.perf_counter() - t0
    assert rule.conjuncts == ((5, 3.0),), rule.conjuncts
    raw, labels = raw_and_labels
    _, acc = apply_threshold_rule(rule, raw, labels)
    correct = round(acc * 683)
    assert correct == 623
    assert round(acc * 100, 2) == 91.22
    assert elapsed < 1.0, f"took {elapsed:.2f}s"
    report(1, f"x6 < 3, 623/683 = 91.22%, {elapsed:.2f}s")


def test_criterion_2_rule_two_dim(wbc_full, raw_and_labels):
    rule = threshold_rule_search(wbc_full, max_dims=2)
    assert tuple(c for c, _ in rule.conjuncts) == (5, 7)
    raw, labels = raw_and_labels
    _, acc = apply_threshold_rule(rule, raw, labels)
    assert round(acc * 683) == 641
    assert round(acc * 100, 2) == 93.85
    report(2, "x6 & x8 rule, 641/683 = 93.85%")


def test_criterion_3_rule_three_dim(wbc_full, raw_and_labels):
    rule = threshold_rule_search(wbc_full, max_dims=3)
    assert tuple(c for c, _ in rule.conjuncts) == (5, 7, 4)
    raw, labels = raw_and_labels
    _, acc = apply_threshold_rule(rule, raw, labels)
    assert round(acc * 683) == 646
    assert round(acc * 100, 2) == 94.58
    report(3, "x6 & x8 & x5 rule, 646/683 = 94.58%")


def test_criterion_4_full_data_blocks(wbc_tm_acc):
    t0 = time.perf_counter()
    hbs = merge_pure(wbc_tm_acc, MergeConfig(), half_length=0.2)
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0, f"merge took {elapsed:.1f}s"
    pure = hbs.pure_blocks()
    assert 16 <= len(pure) <= 26, f"{len(pure)} pure blocks"
    model = HyperModel(blocks=hbs, tm=wbc_tm_acc, k=1, tie_class="4")
    correct = 0
    for i in range(683):
        p = classify(model, wbc_tm_acc.values[i])
        correct += p.label == wbc_tm_acc.class_names[wbc_tm_acc.labels[i]]
    acc = correct / 683
    assert acc >= 0.994, f"containment accuracy {acc:.4f}"
    report(4, f"{len(pure)} pure + {len(hbs.mixed_blocks())} mixed, "
              f"containment {correct}/683 = {acc * 100:.2f}%, {elapsed:.2f}s")


def test_criterion_5_pruning(wbc_tm_acc):
    hbs = merge_pure(wbc_tm_acc, MergeConfig(), half_length=0.2)
    model = HyperModel(blocks=hbs, tm=wbc_tm_acc, k=1, tie_class="4")
    r10 = prune_small(model, min_size=10)
    assert 0.93 <= r10.recall <= 0.98, f"min10 recall {r10.recall:.4f}"
    assert r10.covered_accuracy >= 0.995, f"min10 acc {r10.covered_accuracy:.4f}"
    r26 = prune_small(model, min_size=26)
    assert 0.84 <= r26.recall <= 0.90, f"min26 recall {r26.recall:.4f}"
    assert r26.covered_accuracy >= 0.995, f"min26 acc {r26.covered_accuracy:.4f}"
    report(5, f"min10 recall {r10.recall * 100:.2f}% acc {r10.covered_accuracy * 100:.2f}%; "
              f"min26 recall {r26.recall * 100:.2f}% acc {r26.covered_accuracy * 100:.2f}%")


def test_criterion_6_cross_validation(wbc_full):
    t0 = time.perf_counter()
    pure_rep = cross_validate(wbc_full, SplitSpec(fold_count=10, seed=7),
                              MergeConfig(),
                              ModelConfig(k=3, distance_variant="N2", tie_class="4"))
    assert pure_rep.mean_accuracy >= 0.945, f"pure mean {pure_rep.mean_accuracy:.4f}"
    dom_means = {}
    dom_blocks = {}
    for variant in ("N1", "N2", "N3"):
        rep = cross_validate(wbc_full, SplitSpec(fold_count=10, seed=7),
                             MergeConfig(impurity_threshold=0.10),
                             ModelConfig(k=5, distance_variant=variant, tie_class="4"))
        dom_means[variant] = rep.mean_accuracy
        dom_blocks[variant] = rep.mean_block_count
        assert rep.mean_accuracy >= 0.93, f"{variant} mean {rep.mean_accuracy:.4f}"
        assert rep.mean_block_count <= 9, f"{variant} blocks {rep.mean_block_count:.1f}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0, f"CV took {elapsed:.0f}s"
    report(6, f"pure k3 N2 mean {pure_rep.mean_accuracy * 100:.2f}%; dominant k5 "
              + ", ".join(f"{v} {a * 100:.2f}%" for v, a in dom_means.items())
              + f"; mean blocks {np.mean(list(dom_blocks.values())):.1f}; {elapsed:.0f}s")


def test_criterion_7_dominant_invariants(wbc_full):
    nd = normalize(wbc_full)
    complete = wbc_full.complete_indices()
    sub = Dataset(wbc_full.coordinate_names, [wbc_full.cases[i] for i in complete],
                  wbc_full.class_labels, wbc_full.raw_ranges)
    folds = make_folds(sub, SplitSpec(fold_count=10, seed=7))
    values = nd.values[complete]
    labels_all = [wbc_full.cases[i].label for i in complete]
    order = {c: k for k, c in enumerate(wbc_full.class_labels)}
    worst = 0
    for train_idx, _ in folds:
        tm = TrainingMatrix(values[train_idx],
                            np.array([order[labels_all[i]] for i in train_idx]),
                            list(wbc_full.class_labels),
                            [sub.cases[i].id for i in train_idx], tie_class="4")
        pure = merge_pure(tm, MergeConfig())
        dom = merge_dominant(pure, tm, MergeConfig(impurity_threshold=0.10))
        assert len(dom.blocks) <= 8, f"{len(dom.blocks)} blocks"
        worst = max(worst, len(dom.blocks))
        for b in dom.blocks:
            assert b.impurity() < 0.10
            assert b.size > 1, "single-point block survived"
    report(7, f"all folds: impurity < 10%, no singletons, max {worst} blocks")


def test_criterion_8a_geometry_oracles():
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 1000:
        n = int(rng.integers(20, 60))
        d = int(rng.integers(2, 6))
        tm = TrainingMatrix(rng.random((n, d)), rng.integers(0, 2, n),
                            ["A", "B"], [str(i) for i in range(n)])
        for _ in range(10):
            lo = rng.random(d) * 0.7
            hi = lo + rng.random(d) * 0.35
            blk = block_from_bounds(tm, lo, hi)
            expected = [i for i in range(n)
                        if all(lo[j] <= tm.values[i, j] <= hi[j] for j in range(d))]
            assert blk.member_rows.tolist() == expected
            i, k = int(rng.integers(n)), int(rng.integers(n))
            a = seed_hb(tm, i, float(rng.random() * 0.2))
            b = seed_hb(tm, k, float(rng.random() * 0.2))
            e = envelope(a, b, tm)
            elo, ehi = np.minimum(a.lo, b.lo), np.maximum(a.hi, b.hi)
            assert e.member_rows.tolist() == [
                r for r in range(n)
                if all(elo[j] <= tm.values[r, j] <= ehi[j] for j in range(d))]
            if blk.size:
                x = rng.random(d)
                pts = tm.values[blk.member_rows]
                assert np.isclose(distance(x, blk, "N1", tm),
                                  np.linalg.norm(x - (blk.lo + blk.hi) / 2))
                assert np.isclose(distance(x, blk, "N2", tm),
                                  np.linalg.norm(x - pts.mean(axis=0)))
                assert np.isclose(distance(x, blk, "N3", tm),
                                  np.sqrt(((pts - x) ** 2).sum(axis=1)).min())
            checked += 1
            if checked >= 1000:
                break
    report("8a", "membership, envelope, N1/N2/N3 match brute force on 1000 instances")


def test_criterion_8b_dt_round_trip():
    branches = parse_dt_text((FIXTURES / "id3_branch_dump.txt").read_text())
    assert len(branches) == 29
    dom = [(0.0, 10.0)] * 9
    rng = np.random.default_rng(4)
    pts = rng.random((10_000, 9)) * 10.0
    for br in branches:
        hb = dt_branch_to_hb(br, dom)
        back = hb_to_dt_branch(hb, dom, br.predicted_class)
        canon = br.canonicalized()
        want = np.array([canon.holds(x) for x in pts])
        got_back = np.array([back.holds(x) for x in pts])
        got_hb = np.array([contains(hb, x) is True for x in pts])
        assert np.array_equal(want, got_back)
        assert np.array_equal(want, got_hb)
    report("8b", f"{len(branches)} imported branches, 10k points each, predicates equal")


def test_criterion_8c_merge_purity_maximality():
    rng = np.random.default_rng(5)
    for trial in range(5):
        n = int(rng.integers(100, 300))
        d = int(rng.integers(2, 5))
        tm = TrainingMatrix(rng.random((n, d)), rng.integers(0, 2, n),
                            ["A", "B"], [str(i) for i in range(n)])
        out = merge_pure(tm, MergeConfig())
        for b in out.pure_blocks():
            assert b.impurity() == 0.0
        pure = out.pure_blocks()
        for a, b in itertools.combinations(pure, 2):
            if a.label_code != b.label_code:
                continue
            lo, hi = np.minimum(a.lo, b.lo), np.maximum(a.hi, b.hi)
            mem = rows_inside(tm, lo, hi)
            assert not np.all(tm.labels[mem] == a.label_code)
        covered = set()
        for b in out.blocks:
            covered.update(int(r) for r in b.member_rows)
        assert covered == set(range(n))
    report("8c", "purity, maximality, and coverage verified by brute force")


def test_criterion_8d_singleton_knn_equivalence():
    vals = np.array([[i / 19.0, (i * 7 % 20) / 19.0] for i in range(20)])
    labels = np.array([i % 2 for i in range(20)])
    tm = TrainingMatrix(vals, labels, ["A", "B"], [str(i) for i in range(20)])
    blocks = merge_pure(tm, MergeConfig())
    singleton = all(b.size == 1 for b in blocks.blocks)
    if not singleton:
        blocks.blocks = [block_from_bounds(tm, vals[i], vals[i]) for i in range(20)]
    rng = np.random.default_rng(6)
    for variant in ("N1", "N2", "N3"):
        model = HyperModel(blocks=blocks, tm=tm, k=3, distance_variant=variant)
        agree = 0
        total = 0
        for x in rng.random((200, 2)):
            p = classify(model, x)
            if p.rule_used == "R1":
                continue
            dists = np.sqrt(((vals - x) ** 2).sum(axis=1))
            member_of = [int(b.member_rows[0]) for b in blocks.blocks]
            nearest = np.argsort(dists[member_of], kind="stable")[:3]
            votes = np.bincount([labels[member_of[i]] for i in nearest], minlength=2)
            total += 1
            agree += p.label == tm.class_names[int(np.argmax(votes))]
        assert total > 0 and agree == total
    report("8d", "singleton-block classifier equals plain 3-NN for N1/N2/N3")


@pytest.mark.slow
def test_criterion_9_performance():
    rng = np.random.default_rng(0)
    n = 250_000
    vals = rng.random((n, 4))
    labels = rng.integers(0, 3, n)
    rows = "\n".join(",".join(f"{v:.6f}" for v in vals[i]) + f",C{labels[i]}"
                     for i in range(n))
    d = parse_table(rows, class_column=-1)
    nd = normalize(d)
    t0 = time.perf_counter()
    scene = compile_polylines(nd)
    compile_s = time.perf_counter() - t0
    assert compile_s < 2.0, f"compile {compile_s:.2f}s"
    t0 = time.perf_counter()
    apply_axis_shift(scene, 1, 0.2)
    shift_s = time.perf_counter() - t0
    assert shift_s < 0.1, f"shift {shift_s * 1000:.1f}ms"
    report(9, f"250k x 4 compile {compile_s:.2f}s, shift {shift_s * 1000:.1f}ms")


def test_criterion_10_ecv_losslessness():
    text = (FIXTURES / "mixed_missing.csv").read_text()
    d = parse_table(text, class_column="class")
    tokens_in = {cell.missing_token for c in d.cases for cell in c.cells
                 if cell.is_missing}
    assert tokens_in == {"n/c", "did not record", "Empty", "?",
                         "in other place", "n/a"}
    n_missing = sum(1 for c in d.cases for cell in c.cells if cell.is_missing)
    scene = compile_polylines(normalize(d))
    doc = json.loads(scene.to_json())
    marker_tokens = {p["token"] for p in doc["primitives"] if p["type"] == "marker"}
    assert marker_tokens == tokens_in
    routed = sum(len(p["case_ids"]) for p in doc["primitives"]
                 if p["type"] == "marker")
    assert routed == n_missing
    svg = render_svg(scene).decode()
    for tok in tokens_in:
        assert tok in svg
    report(10, f"six tokens verbatim through Scene JSON and SVG, "
               f"{routed} routed vertices")


def test_criterion_11_linguistic_golden(wbc_full):
    from tests.test_linguistic import GOLDEN_WBC
    nd = normalize(wbc_full)
    vals, codes, _ = nd.complete_matrix()
    profiles = {cls: profile(vals[codes == ci], cutoff=0.5)
                for ci, cls in enumerate(wbc_full.class_labels)}
    for cls, p in profiles.items():
        for j in range(9):
            assert p.concentration[j] in (None, "lower", "middle", "upper")
    out = describe(profiles, wbc_full.coordinate_names, style="structured")
    assert out == GOLDEN_WBC
    report(11, "structured description is byte-identical to the golden fixture")
