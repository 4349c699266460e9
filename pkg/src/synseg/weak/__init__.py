"""Box annotations to pixel labels: GrabCut and dense-CRF refinement."""
from .convert import convert_dataset, label_image, merge_instance_masks
from .crf import CrfParams, UnaryField, boxes_to_unary, dense_crf_refine, mean_field
from .gmm import GMM, fit_gmm
from .grabcut import GrabCutParams, compute_beta, grabcut, grabcut_segment
from .maxflow import mincut

__all__ = [
    "CrfParams", "GMM", "GrabCutParams", "UnaryField", "boxes_to_unary", "compute_beta",
    "convert_dataset", "dense_crf_refine", "fit_gmm", "grabcut", "grabcut_segment",
    "label_image", "mean_field", "merge_instance_masks", "mincut",
]
