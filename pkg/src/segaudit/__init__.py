"""Model-agnostic label-quality scoring for semantic segmentation datasets."""

from .confident import ClassThresholds, class_thresholds, clc_score, downsample, flag_mask
from .components import Component, coco_score, component_grid, extract_components
from .inject import (
    CorruptionPlan,
    ErrorLog,
    corrupt_dataset,
    inject_drop,
    inject_shift,
    inject_swap,
)
from .io import (
    DatasetManifest,
    ManifestEntry,
    METHODS,
    ScoreRecord,
    emit_overlay,
    read_manifest,
    read_mask,
    read_tensor,
    write_manifest,
    write_mask,
    write_report,
    write_tensor,
)
from .metrics import LabeledScore, auprc, auroc, lift_at_t, precision_at_t, summarize
from .pixels import predicted_mask, self_confidence
from .scores import ccp, cil, iou, softmin, tccp

__version__ = "0.1.0"

__all__ = [
    "ClassThresholds",
    "Component",
    "CorruptionPlan",
    "DatasetManifest",
    "ErrorLog",
    "LabeledScore",
    "METHODS",
    "ManifestEntry",
    "ScoreRecord",
    "auprc",
    "auroc",
    "ccp",
    "cil",
    "class_thresholds",
    "clc_score",
    "coco_score",
    "component_grid",
    "corrupt_dataset",
    "downsample",
    "emit_overlay",
    "extract_components",
    "flag_mask",
    "inject_drop",
    "inject_shift",
    "inject_swap",
    "iou",
    "lift_at_t",
    "precision_at_t",
    "predicted_mask",
    "read_manifest",
    "read_mask",
    "read_tensor",
    "self_confidence",
    "softmin",
    "summarize",
    "tccp",
    "write_manifest",
    "write_mask",
    "write_report",
    "write_tensor",
]
