"""Greedy hyperblock merger: grow maximal pure blocks from per-case seeds,
then combine blocks into dominant ones under an impurity threshold.

The result is order-dependent, so the processing order is pinned: seeds are
taken in dataset order by default, or in a seeded shuffle when an order seed
is configured. Within one growth step the first merge candidate (in worklist
order) whose envelope stays pure is taken; the grown block keeps absorbing
candidates until none fits, which makes it maximal against the remaining
worklist. A final pairwise pass restores mutual maximality between finished
blocks. Seeds are snapped to the tight envelope of the cases they capture,
so every block is the exact bounding box of real data.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .blocks import HyperBlock, TrainingMatrix, block_from_bounds, rows_inside, distance


@dataclass(frozen=True)
class MergeConfig:
    impurity_threshold: float = 0.0
    order_seed: Optional[int] = None
    deterministic_order: bool = True

    def __post_init__(self):
        if not 0.0 <= self.impurity_threshold < 1.0:
            raise ValueError("impurity_threshold must be in [0, 1)")


@dataclass
class HBSet:
    blocks: list[HyperBlock]
    provenance: list[dict] = field(default_factory=list)
    trace: list[dict] = field(default_factory=list)

    def pure_blocks(self) -> list[HyperBlock]:
        return [b for b in self.blocks if b.impurity() == 0.0]

    def mixed_blocks(self) -> list[HyperBlock]:
        return [b for b in self.blocks if b.impurity() > 0.0]

    def covers_all(self, n_rows: int) -> bool:
        covered = set()
        for b in self.blocks:
            covered.update(int(r) for r in b.member_rows)
        return covered == set(range(n_rows))


def _seed_blocks(tm: TrainingMatrix, half_length: float) -> list[HyperBlock]:
    """One seed per case: the cube of the given half length around it,
    snapped to the envelope of the cases it captures. Seeds capturing the
    same case set are emitted once."""
    seeds = []
    seen = set()
    for i in range(len(tm.values)):
        lo = np.clip(tm.values[i] - half_length, 0.0, 1.0)
        hi = np.clip(tm.values[i] + half_length, 0.0, 1.0)
        mem = rows_inside(tm, lo, hi)
        key = mem.tobytes()
        if key in seen:
            continue
        seen.add(key)
        pts = tm.values[mem]
        blk = block_from_bounds(tm, pts.min(axis=0), pts.max(axis=0))
        seeds.append((i, blk))
    return seeds


def merge_pure(tm: TrainingMatrix, cfg: MergeConfig = MergeConfig(),
               half_length: float = 0.0) -> HBSet:
    """Phase one: maximal pure blocks covering every training case.

    Seeds that capture cases of more than one class can never merge purely
    and are carried through as mixed blocks. After a pure block finishes,
    seeds centered inside it no longer start their own growth.
    """
    if len(np.unique(tm.labels)) < 1:
        raise ValueError("training data has no cases")
    entries = _seed_blocks(tm, half_length)
    if not cfg.deterministic_order or cfg.order_seed is not None:
        rng = random.Random(cfg.order_seed)
        rng.shuffle(entries)

    queue: list[tuple[int, HyperBlock]] = list(entries)
    done: list[HyperBlock] = []
    mixed: list[HyperBlock] = []
    provenance: list[dict] = []
    trace: list[dict] = []
    step = 0

    while queue:
        center, x = queue.pop(0)
        if x.impurity() > 0:
            mixed.append(x)
            provenance.append({"block": len(done) + len(mixed) - 1, "seed": center,
                               "kind": "mixed_seed"})
            continue
        cls = x.label_code
        lineage = [center]
        j = 0
        while j < len(queue):
            _, h = queue[j]
            if h.impurity() > 0 or h.label_code != cls:
                j += 1
                continue
            lo = np.minimum(x.lo, h.lo)
            hi = np.maximum(x.hi, h.hi)
            mem = rows_inside(tm, lo, hi)
            if np.all(tm.labels[mem] == cls):
                captured = len(mem) - len(x.member_rows) - len(h.member_rows)
                x = block_from_bounds(tm, lo, hi)
                lineage.append(queue[j][0])
                trace.append({"step": step, "left": center, "right": queue[j][0],
                              "resulting_impurity": 0.0,
                              "captured_points": max(captured, 0)})
                step += 1
                queue.pop(j)
            else:
                j += 1
        done.append(x)
        provenance.append({"block": len(done) - 1, "seeds": lineage, "kind": "pure"})
        inside = set(int(r) for r in x.member_rows)
        queue = [(c, h) for c, h in queue if c not in inside or h.impurity() > 0]

    done = _mutual_maximality_pass(done, tm, trace)
    return HBSet(blocks=done + mixed, provenance=provenance, trace=trace)


def _mutual_maximality_pass(blocks: list[HyperBlock], tm: TrainingMatrix,
                            trace: list[dict]) -> list[HyperBlock]:
    """Merge any same-class pair of finished pure blocks whose envelope is
    still pure, until no such pair remains."""
    blocks = list(blocks)
    changed = True
    while changed:
        changed = False
        for a in range(len(blocks)):
            for b in range(a + 1, len(blocks)):
                A, B = blocks[a], blocks[b]
                if A.label_code != B.label_code:
                    continue
                lo = np.minimum(A.lo, B.lo)
                hi = np.maximum(A.hi, B.hi)
                mem = rows_inside(tm, lo, hi)
                if np.all(tm.labels[mem] == A.label_code):
                    blocks[a] = block_from_bounds(tm, lo, hi)
                    blocks.pop(b)
                    trace.append({"step": len(trace), "left": a, "right": b,
                                  "resulting_impurity": 0.0, "captured_points": 0})
                    changed = True
                    break
            if changed:
                break
    return blocks


def merge_dominant(pure: HBSet, tm: TrainingMatrix, cfg: MergeConfig) -> HBSet:
    """Phase two: repeatedly envelope the pair whose joint block has the
    lowest impurity, as long as that impurity stays below the threshold.

    Each selected block is tried against every other block regardless of
    class; the joint block re-enters the worklist. Terminates when a full
    pass makes no merge.
    """
    work = list(pure.blocks)
    trace = list(pure.trace)
    provenance = list(pure.provenance)
    if cfg.impurity_threshold <= 0.0:
        return HBSet(blocks=work, provenance=provenance, trace=trace)

    progress = True
    while progress:
        progress = False
        i = 0
        while i < len(work):
            x = work[i]
            best = None
            for j, h in enumerate(work):
                if j == i:
                    continue
                lo = np.minimum(x.lo, h.lo)
                hi = np.maximum(x.hi, h.hi)
                mem = rows_inside(tm, lo, hi)
                counts = np.bincount(tm.labels[mem], minlength=tm.n_classes)
                imp = 1.0 - counts.max() / counts.sum()
                if best is None or imp < best[0]:
                    best = (imp, j, lo, hi)
            if best is not None and best[0] < cfg.impurity_threshold:
                imp, j, lo, hi = best
                joint = block_from_bounds(tm, lo, hi)
                trace.append({"step": len(trace), "left": i, "right": j,
                              "resulting_impurity": imp,
                              "captured_points": joint.size - x.size - work[j].size})
                provenance.append({"kind": "dominant", "left": i, "right": j,
                                   "impurity": imp})
                work = [w for k, w in enumerate(work) if k not in (i, j)]
                work.append(joint)
                progress = True
            else:
                i += 1
    return HBSet(blocks=work, provenance=provenance, trace=trace)


def single_point_report(hbs: HBSet, tm: TrainingMatrix) -> list[dict]:
    """For each single-member block, the nearest multi-member pure block by
    center distance and whether the classes agree."""
    singles = [b for b in hbs.blocks if b.size == 1]
    refs = [b for b in hbs.blocks if b.size > 1 and b.impurity() == 0.0]
    out = []
    for s in singles:
        row = int(s.member_rows[0])
        x = tm.values[row]
        if not refs:
            out.append({"case_id": tm.case_ids[row], "nearest": None,
                        "same_class": None, "note": "no reference HB"})
            continue
        dists = [distance(x, r, "N1", tm) for r in refs]
        k = int(np.argmin(dists))
        out.append({
            "case_id": tm.case_ids[row],
            "nearest": k,
            "same_class": bool(refs[k].label_code == s.label_code),
        })
    return out
