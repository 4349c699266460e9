"""Confusion-matrix based mean-IoU scoring, PASCAL style.

A single confusion matrix is accumulated over the whole dataset (rows are
ground truth, columns are predictions) and IoU is computed from it once.
Averaging per-image IoUs gives a different, non-standard number; see
:func:`mean_of_image_ious`.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .voc import VOC, VOID, ClassTaxonomy, LabelError, read_label


class EvaluationError(RuntimeError):
    pass


def empty_confusion(n: int = 21) -> np.ndarray:
    return np.zeros((n, n), dtype=np.int64)


def accumulate(conf: np.ndarray, gt: np.ndarray, pred: np.ndarray) -> np.ndarray:
    """Return ``conf`` plus the pixel tallies of one (gt, pred) pair.

    Ground-truth void pixels are skipped.  Predictions must be total.
    """
    gt = np.asarray(gt)
    pred = np.asarray(pred)
    n = conf.shape[0]
    if gt.shape != pred.shape:
        raise ValueError(f"shape mismatch: gt {gt.shape} vs pred {pred.shape}")
    if (pred == VOID).any():
        raise ValueError("prediction contains void pixels")
    if (pred >= n).any() or (pred < 0).any():
        raise ValueError("prediction contains out-of-range class indices")
    keep = gt != VOID
    g = gt[keep].astype(np.int64)
    if (g >= n).any() or (g < 0).any():
        raise ValueError("ground truth contains out-of-range class indices")
    p = pred[keep].astype(np.int64)
    tally = np.bincount(g * n + p, minlength=n * n).reshape(n, n)
    return conf + tally


def per_class_iou(conf: np.ndarray) -> np.ndarray:
    """TP / (TP + FP + FN) per class; NaN where the denominator is zero."""
    conf = np.asarray(conf, dtype=np.float64)
    tp = np.diag(conf)
    denom = conf.sum(axis=0) + conf.sum(axis=1) - tp
    iou = np.full(conf.shape[0], np.nan)
    np.divide(tp, denom, out=iou, where=denom > 0)
    return iou


def mean_iou(per_class) -> float:
    """Arithmetic mean over the defined (non-NaN) entries."""
    values = np.asarray(per_class, dtype=np.float64)
    defined = values[~np.isnan(values)]
    if defined.size == 0:
        raise ValueError("no class has a defined IoU")
    return float(defined.mean())


def mean_of_image_ious(pairs, n: int = 21) -> float:
    """Average of per-image mean IoUs.

    Not the PASCAL metric; kept only to show how it differs from the
    dataset-level value.
    """
    scores = [mean_iou(per_class_iou(accumulate(empty_confusion(n), g, p))) for g, p in pairs]
    return float(np.mean(scores))


@dataclass(frozen=True)
class IoUReport:
    confusion: np.ndarray
    per_class: np.ndarray
    mean: float
    num_images: int = 0

    @classmethod
    def from_confusion(cls, conf: np.ndarray, num_images: int = 0) -> "IoUReport":
        iou = per_class_iou(conf)
        return cls(conf, iou, mean_iou(iou), num_images)

    def format_table(self, taxonomy: ClassTaxonomy = VOC) -> str:
        width = max(len(n) for n in taxonomy.names + ("Mean IoU",))
        lines = [f"{'Class':<{width}}  {'IoU (%)':>8}", "-" * (width + 10)]
        for name, v in zip(taxonomy.names, self.per_class):
            cell = "     n/a" if np.isnan(v) else f"{100 * v:8.2f}"
            lines.append(f"{name:<{width}}  {cell}")
        lines.append("-" * (width + 10))
        lines.append(f"{'Mean IoU':<{width}}  {100 * self.mean:8.2f}")
        return "\n".join(lines) + "\n"

    def format_keyvalue(self, taxonomy: ClassTaxonomy = VOC) -> str:
        lines = [f"images = {self.num_images}", f"mean_iou = {self.mean!r}"]
        for name, v in zip(taxonomy.names, self.per_class):
            lines.append(f"iou.{name} = {'nan' if np.isnan(v) else repr(float(v))}")
        return "\n".join(lines) + "\n"


def evaluate_pairs(pairs, n: int = 21) -> IoUReport:
    conf = empty_confusion(n)
    count = 0
    for gt, pred in pairs:
        conf = accumulate(conf, gt, pred)
        count += 1
    return IoUReport.from_confusion(conf, count)


def evaluate_dataset(pred_dir: str | os.PathLike, gt_dir: str | os.PathLike,
                     taxonomy: ClassTaxonomy = VOC) -> IoUReport:
    """Score every ``<id>.png`` in ``gt_dir`` against ``pred_dir/<id>.png``."""
    gt_files = sorted(Path(gt_dir).glob("*.png"))
    if not gt_files:
        raise EvaluationError(f"no ground-truth label files in {gt_dir}")
    n = taxonomy.num_classes
    conf = empty_confusion(n)
    for gt_path in gt_files:
        image_id = gt_path.stem
        pred_path = Path(pred_dir) / gt_path.name
        if not pred_path.is_file():
            raise EvaluationError(f"{image_id}: missing prediction {pred_path}")
        try:
            conf = accumulate(conf, read_label(gt_path), read_label(pred_path))
        except (ValueError, LabelError) as exc:
            raise EvaluationError(f"{image_id}: {exc}") from exc
    return IoUReport.from_confusion(conf, len(gt_files))
