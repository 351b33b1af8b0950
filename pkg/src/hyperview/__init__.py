"""Hyperblock classifiers in parallel coordinates: learning, merging,
evaluation, linguistic summaries, and scene geometry."""

from .dataset import (
    Cell, Case, Dataset, NormalizedDataset, SplitSpec,
    parse_table, normalize, make_folds, dataset_from_json, canonical_json,
)
from .blocks import (
    HyperBlock, TrainingMatrix, DTBranch, Conjunct, CombinationVerdict,
    contains, seed_hb, envelope, distance, combine_check, adjacency,
    nonoverlap_coordinates, dt_branch_to_hb, hb_to_dt_branch,
    parse_dt_text, matrix_from_normalized, block_from_bounds,
)
from .mhyper import MergeConfig, HBSet, merge_pure, merge_dominant, single_point_report
from .classifier import (
    HyperModel, ModelConfig, Prediction, ThresholdRule,
    learn, classify, classify_batch, k_selection,
    threshold_rule_search, apply_threshold_rule, rank_coordinates,
)
from .evaluation import (
    EvaluationReport, PruningReport, cross_validate, confusion,
    prune_small, complexity_counts,
)
from .linguistic import ThirdsProfile, profile, describe
from .scene import (
    Scene, compile_polylines, frequency_widths, quantile_bands,
    side_by_side, nonoverlap_heat, heat_scene, apply_axis_shift,
    straighten_case, missing_markers, render_svg,
)

__version__ = "0.1.0"
