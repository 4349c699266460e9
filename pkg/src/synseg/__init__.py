"""Synthetic scenes, box-to-mask weak labels and mean-IoU scoring for VOC-style segmentation."""
from .evaluation import IoUReport, accumulate, evaluate_dataset, mean_iou, per_class_iou
from .plan import FineTunePlan, emit_plan
from .voc import (VOC, VOID, Box, BoxAnnotation, ClassTaxonomy, decode_label_png,
                  encode_label_png, voc_colormap)

__version__ = "0.1.0"

__all__ = [
    "VOC", "VOID", "Box", "BoxAnnotation", "ClassTaxonomy", "FineTunePlan", "IoUReport",
    "accumulate", "decode_label_png", "emit_plan", "encode_label_png", "evaluate_dataset",
    "mean_iou", "per_class_iou", "voc_colormap",
]
