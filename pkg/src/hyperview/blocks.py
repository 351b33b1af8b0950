"""Hyperblock geometry: membership, envelopes, impurity, point-to-block
distances, overlap and adjacency predicates, and the bidirectional mapping
between blocks and decision-tree branches."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

EPS_EQ = 1e-9


@dataclass
class TrainingMatrix:
    """Complete-case view a block set is built against: normalized values,
    integer class codes, and the originating case ids."""

    values: np.ndarray        # (n, d) in [0, 1]
    labels: np.ndarray        # (n,) int codes into class_names
    class_names: list[str]
    case_ids: list[str]
    tie_class: Optional[str] = None   # label used when class counts tie

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def tie_code(self) -> int:
        if self.tie_class is not None:
            return self.class_names.index(self.tie_class)
        # fall back to the minority class: the risky side of a tie
        counts = np.bincount(self.labels, minlength=self.n_classes)
        order = np.argsort(counts, kind="stable")
        return int(order[0])


def matrix_from_normalized(nd, tie_class: Optional[str] = None) -> TrainingMatrix:
    vals, labels, idx = nd.complete_matrix()
    ids = [nd.base.cases[i].id for i in idx]
    return TrainingMatrix(vals, labels, list(nd.base.class_labels), ids, tie_class)


@dataclass
class HyperBlock:
    """Axis-aligned box over the active coordinates with its member cases.

    Bounds are closed unless the corresponding open flag is set; open
    endpoints only come from decision-tree imports. Center and side lengths
    derive from the bounds.
    """

    lo: np.ndarray
    hi: np.ndarray
    member_rows: np.ndarray            # row indices into the TrainingMatrix
    class_counts: np.ndarray           # per class code
    label_code: int
    active: np.ndarray = None          # bool mask; None means all coordinates
    lo_open: np.ndarray = None
    hi_open: np.ndarray = None

    def __post_init__(self):
        d = len(self.lo)
        if self.active is None:
            self.active = np.ones(d, dtype=bool)
        if self.lo_open is None:
            self.lo_open = np.zeros(d, dtype=bool)
        if self.hi_open is None:
            self.hi_open = np.zeros(d, dtype=bool)
        if np.any(self.lo[self.active] > self.hi[self.active] + EPS_EQ):
            raise ValueError("lo > hi on an active coordinate")

    @property
    def center(self) -> np.ndarray:
        return (self.lo + self.hi) / 2.0

    @property
    def lengths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def size(self) -> int:
        return len(self.member_rows)

    def impurity(self) -> float:
        total = int(self.class_counts.sum())
        if total == 0:
            raise ValueError("impurity undefined for an empty block")
        return 1.0 - int(self.class_counts.max()) / total

    def label(self, class_names: list[str]) -> str:
        return class_names[self.label_code]


def _label_code(counts: np.ndarray, tie_code: int) -> int:
    top = counts.max()
    winners = np.nonzero(counts == top)[0]
    if len(winners) > 1 and tie_code in winners:
        return tie_code
    return int(winners[0])


def rows_inside(tm: TrainingMatrix, lo, hi, active=None, lo_open=None, hi_open=None) -> np.ndarray:
    """Row indices of every case inside the box; inclusive bounds unless an
    open flag is set."""
    V = tm.values
    above = V >= lo if lo_open is None else np.where(lo_open, V > lo, V >= lo)
    below = V <= hi if hi_open is None else np.where(hi_open, V < hi, V <= hi)
    ok = above & below
    if active is not None:
        ok = ok | ~active
    return np.nonzero(ok.all(axis=1))[0]


def block_from_bounds(tm: TrainingMatrix, lo, hi, active=None, lo_open=None, hi_open=None) -> HyperBlock:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    mem = rows_inside(tm, lo, hi, active, lo_open, hi_open)
    counts = np.bincount(tm.labels[mem], minlength=tm.n_classes)
    return HyperBlock(
        lo=lo, hi=hi, member_rows=mem, class_counts=counts,
        label_code=_label_code(counts, tm.tie_code()),
        active=active, lo_open=lo_open, hi_open=hi_open,
    )


def contains(hb: HyperBlock, x: np.ndarray) -> Optional[bool]:
    """Inclusive-interval membership over the active coordinates.

    Returns None ("not evaluable") when x is missing a value on an active
    coordinate, which is distinct from False.
    """
    x = np.asarray(x, dtype=float)
    act = hb.active
    if np.isnan(x[act]).any():
        return None
    lo_ok = np.where(hb.lo_open, x > hb.lo, x >= hb.lo)
    hi_ok = np.where(hb.hi_open, x < hb.hi, x <= hb.hi)
    return bool((lo_ok | ~act).all() and (hi_ok | ~act).all())


def seed_hb(tm: TrainingMatrix, row: int, half_length: float) -> HyperBlock:
    """Cube of the given half side length around one case, clipped to the
    unit interval, with membership recomputed against the full matrix."""
    if not 0.0 <= half_length <= 0.5:
        raise ValueError("half_length must be in [0, 0.5]")
    x = tm.values[row]
    lo = np.clip(x - half_length, 0.0, 1.0)
    hi = np.clip(x + half_length, 0.0, 1.0)
    return block_from_bounds(tm, lo, hi)


def envelope(a: HyperBlock, b: HyperBlock, tm: TrainingMatrix) -> HyperBlock:
    """Smallest block containing both inputs: per-coordinate min of lows and
    max of highs, with membership and class counts recomputed."""
    if not np.array_equal(a.active, b.active):
        raise ValueError("envelope requires matching active coordinates")
    lo = np.minimum(a.lo, b.lo)
    hi = np.maximum(a.hi, b.hi)
    return block_from_bounds(tm, lo, hi, active=a.active.copy())


def distance(x: np.ndarray, hb: HyperBlock, variant: str, tm: TrainingMatrix) -> float:
    """Euclidean distance from a point to a block under one of the three
    reference conventions: block center (N1), member mean (N2), or nearest
    member (N3)."""
    x = np.asarray(x, dtype=float)
    act = hb.active
    if variant == "N1":
        ref = hb.center
        return float(np.sqrt(((x - ref)[act] ** 2).sum()))
    if hb.size == 0:
        raise ValueError(f"{variant} undefined for an empty block")
    pts = tm.values[hb.member_rows]
    if variant == "N2":
        ref = pts.mean(axis=0)
        return float(np.sqrt(((x - ref)[act] ** 2).sum()))
    if variant == "N3":
        return float(np.sqrt(((pts - x)[:, act] ** 2).sum(axis=1).min()))
    raise ValueError(f"unknown distance variant {variant!r}")


MODE_OVERLAP = "M1_overlap"
MODE_SHARED_POINT = "M2_shared_point"
MODE_MATCHED_EDGES = "M3_matched_edges"


@dataclass(frozen=True)
class CombinationVerdict:
    mode: str
    holds: bool
    witness: Optional[object] = None


def combine_check(a: HyperBlock, b: HyperBlock, mode: str, tm: TrainingMatrix) -> CombinationVerdict:
    """Test one of the three block-combination conditions.

    M1: intervals intersect on every coordinate. M2: some case is a member
    of both. M3: bounds identical on exactly n-1 coordinates while the
    remaining coordinate's intervals intersect or touch.
    """
    act = a.active & b.active
    if mode == MODE_OVERLAP:
        inter = (a.lo <= b.hi) & (b.lo <= a.hi)
        return CombinationVerdict(mode, bool(inter[act].all()))
    if mode == MODE_SHARED_POINT:
        shared = np.intersect1d(a.member_rows, b.member_rows)
        if len(shared):
            return CombinationVerdict(mode, True, witness=tm.case_ids[int(shared[0])])
        return CombinationVerdict(mode, False)
    if mode == MODE_MATCHED_EDGES:
        same = (np.abs(a.lo - b.lo) <= EPS_EQ) & (np.abs(a.hi - b.hi) <= EPS_EQ)
        differing = np.nonzero(~same & act)[0]
        if len(differing) != 1:
            return CombinationVerdict(mode, False)
        i = int(differing[0])
        touch = a.lo[i] <= b.hi[i] and b.lo[i] <= a.hi[i]
        return CombinationVerdict(mode, bool(touch), witness=i if touch else None)
    raise ValueError(f"unknown combination mode {mode!r}")


def adjacency(a: HyperBlock, b: HyperBlock, threshold: float) -> bool:
    """Blocks are adjacent when half the summed absolute bound differences
    stays within the threshold."""
    diff = np.abs(a.lo - b.lo) + np.abs(a.hi - b.hi)
    return float(diff[a.active & b.active].sum()) / 2.0 <= threshold


def nonoverlap_coordinates(a: HyperBlock, b: HyperBlock) -> set[int]:
    """Coordinates where the two blocks' intervals are disjoint."""
    act = a.active & b.active
    disjoint = (a.hi < b.lo) | (b.hi < a.lo)
    return set(int(i) for i in np.nonzero(disjoint & act)[0])


# ---------------------------------------------------------------------------
# Decision-tree branches


@dataclass(frozen=True)
class Conjunct:
    coordinate: int
    comparator: str              # one of < <= > >=
    threshold: float


@dataclass
class DTBranch:
    conjuncts: list[Conjunct]
    predicted_class: str

    def canonicalized(self) -> "DTBranch":
        """Collapse to at most one lower and one upper conjunct per
        coordinate; rejects contradictory (empty-interval) branches."""
        lower: dict[int, tuple[float, bool]] = {}   # coord -> (bound, open)
        upper: dict[int, tuple[float, bool]] = {}
        for c in self.conjuncts:
            if c.comparator in (">", ">="):
                cur = lower.get(c.coordinate)
                cand = (c.threshold, c.comparator == ">")
                if cur is None or cand[0] > cur[0] or (cand[0] == cur[0] and cand[1]):
                    lower[c.coordinate] = cand
            else:
                cur = upper.get(c.coordinate)
                cand = (c.threshold, c.comparator == "<")
                if cur is None or cand[0] < cur[0] or (cand[0] == cur[0] and cand[1]):
                    upper[c.coordinate] = cand
        out = []
        for coord in sorted(set(lower) | set(upper)):
            if coord in lower and coord in upper:
                (lo, lo_open), (hi, hi_open) = lower[coord], upper[coord]
                if lo > hi or (lo == hi and (lo_open or hi_open)):
                    raise ValueError(f"contradictory branch on coordinate {coord}")
            if coord in lower:
                lo, lo_open = lower[coord]
                out.append(Conjunct(coord, ">" if lo_open else ">=", lo))
            if coord in upper:
                hi, hi_open = upper[coord]
                out.append(Conjunct(coord, "<" if hi_open else "<=", hi))
        return DTBranch(out, self.predicted_class)

    def holds(self, x: np.ndarray) -> bool:
        ops = {"<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal}
        return all(bool(ops[c.comparator](x[c.coordinate], c.threshold)) for c in self.conjuncts)


def dt_branch_to_hb(branch: DTBranch, domain: list[tuple[float, float]],
                    tm: Optional[TrainingMatrix] = None) -> HyperBlock:
    """Intersect a branch's half-lines with the domain box, keeping the
    strict/inclusive distinction as open/closed bound flags. Raw units."""
    br = branch.canonicalized()
    d = len(domain)
    lo = np.array([dom[0] for dom in domain], dtype=float)
    hi = np.array([dom[1] for dom in domain], dtype=float)
    lo_open = np.zeros(d, dtype=bool)
    hi_open = np.zeros(d, dtype=bool)
    for c in br.conjuncts:
        j = c.coordinate
        if not lo[j] - EPS_EQ <= c.threshold <= hi[j] + EPS_EQ:
            raise ValueError(f"threshold {c.threshold} outside domain on coordinate {j}")
        if c.comparator in (">", ">="):
            if c.threshold > lo[j]:
                lo[j] = c.threshold
                lo_open[j] = c.comparator == ">"
        else:
            if c.threshold < hi[j]:
                hi[j] = c.threshold
                hi_open[j] = c.comparator == "<"
    bad = (lo > hi) | ((lo == hi) & (lo_open | hi_open))
    if bad.any():
        raise ValueError("contradictory branch: empty interval")
    if tm is not None:
        return block_from_bounds(tm, lo, hi, lo_open=lo_open, hi_open=hi_open)
    counts = np.zeros(1, dtype=int)
    return HyperBlock(lo, hi, np.array([], dtype=int), counts, 0,
                      lo_open=lo_open, hi_open=hi_open)


def hb_to_dt_branch(hb: HyperBlock, domain: list[tuple[float, float]],
                    predicted_class: str = "") -> DTBranch:
    """Emit the conjunction equivalent to the block, omitting conjuncts that
    sit on the domain edge."""
    conj = []
    for j, (dom_lo, dom_hi) in enumerate(domain):
        if not hb.active[j]:
            continue
        if hb.lo[j] > dom_lo + EPS_EQ or (hb.lo_open[j] and hb.lo[j] >= dom_lo):
            conj.append(Conjunct(j, ">" if hb.lo_open[j] else ">=", float(hb.lo[j])))
        if hb.hi[j] < dom_hi - EPS_EQ or (hb.hi_open[j] and hb.hi[j] <= dom_hi):
            conj.append(Conjunct(j, "<" if hb.hi_open[j] else "<=", float(hb.hi[j])))
    return DTBranch(conj, predicted_class)


_DT_TOKEN = re.compile(r"(x\d+)\s*(<=|>=|<|>)\s*([-\d.]+)|class:\s*(\S+)")


def parse_dt_text(text: str) -> list[DTBranch]:
    """Parse the indented branch dump format: tokens separated by `---`,
    each a split condition like `x2 <= 2.50` or a leaf `class: 2`.

    Depth information may be lost in flattened dumps, so the structure is
    recovered from the token stream itself: a condition re-opens its point
    in the path when its negation or itself is already on the stack.
    """
    branches: list[DTBranch] = []
    stack: list[tuple[int, str, float]] = []

    def flip(op: str) -> str:
        return {"<=": ">", ">": "<=", "<": ">=", ">=": "<"}[op]

    for m in _DT_TOKEN.finditer(text):
        if m.group(4) is not None:
            conj = [Conjunct(c, op, t) for c, op, t in stack]
            branches.append(DTBranch(conj, m.group(4)))
            continue
        coord = int(m.group(1)[1:]) - 1
        op, thr = m.group(2), float(m.group(3))
        entry = (coord, op, thr)
        twin = (coord, flip(op), thr)
        if entry in stack:
            del stack[stack.index(entry) + 1:]
        elif twin in stack:
            i = stack.index(twin)
            del stack[i:]
            stack.append(entry)
        else:
            stack.append(entry)
    return branches


def branches_from_json(text: str) -> list[DTBranch]:
    doc = json.loads(text)
    out = []
    for rec in doc:
        conj = [Conjunct(int(c["coordinate"]), c["comparator"], float(c["threshold"]))
                for c in rec["conjuncts"]]
        out.append(DTBranch(conj, str(rec["class"])))
    return out


def branches_to_json(branches: list[DTBranch]) -> str:
    from .dataset import canonical_json
    return canonical_json([
        {
            "class": b.predicted_class,
            "conjuncts": [
                {"coordinate": c.coordinate, "comparator": c.comparator, "threshold": c.threshold}
                for c in b.conjuncts
            ],
        }
        for b in branches
    ])


def hb_to_json_dict(hb: HyperBlock, coordinate_names: list[str], class_names: list[str],
                    case_ids: Optional[list[str]] = None) -> dict:
    bounds = {}
    for j, name in enumerate(coordinate_names):
        if not hb.active[j]:
            continue
        bounds[name] = {
            "lo": float(hb.lo[j]), "hi": float(hb.hi[j]),
            "lo_open": bool(hb.lo_open[j]), "hi_open": bool(hb.hi_open[j]),
        }
    members = ([case_ids[int(r)] for r in hb.member_rows]
               if case_ids is not None else [int(r) for r in hb.member_rows])
    counts = {class_names[k]: int(v) for k, v in enumerate(hb.class_counts) if v}
    return {"label": class_names[hb.label_code], "bounds": bounds,
            "members": members, "counts": counts}
