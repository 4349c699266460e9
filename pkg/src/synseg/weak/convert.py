"""Dataset-level conversion of box annotations into VOC label files."""
from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..voc import BoxAnnotation, read_rgb, write_label
from .crf import CrfParams, boxes_to_unary, dense_crf_refine
from .grabcut import GrabCutParams, grabcut_segment

IMAGE_EXTENSIONS = (".jpg", ".jpeg", ".png", ".bmp", ".ppm")
METHODS = ("grabcut", "crf")


def merge_instance_masks(annotation: BoxAnnotation, masks: Sequence[np.ndarray],
                         shape: tuple[int, int] | None = None) -> np.ndarray:
    """Combine per-box foreground masks into one label image.

    Where several masks claim a pixel the smallest box wins, ties going to
    the lower class index.
    """
    if len(masks) != len(annotation.boxes):
        raise ValueError(f"{len(masks)} masks for {len(annotation.boxes)} boxes")
    if not masks:
        if shape is None:
            raise ValueError("shape is required when there are no boxes")
        return np.zeros(shape, dtype=np.uint8)
    shape = masks[0].shape
    if any(m.shape != shape for m in masks):
        raise ValueError("all masks must have the same shape")
    label = np.zeros(shape, dtype=np.uint8)
    # paint large boxes first so smaller ones end on top
    order = sorted(range(len(masks)),
                   key=lambda i: (annotation.boxes[i].area, annotation.boxes[i].class_index),
                   reverse=True)
    for i in order:
        label[np.asarray(masks[i], dtype=bool)] = annotation.boxes[i].class_index
    return label


def image_seed(seed: int, image_id: str) -> int:
    """Per-image seed independent of processing order."""
    return int(np.random.SeedSequence([seed, zlib.crc32(image_id.encode())]).generate_state(1)[0])


def label_image(image: np.ndarray, annotation: BoxAnnotation, method: str = "crf",
                grabcut_params: GrabCutParams = GrabCutParams(),
                crf_params: CrfParams = CrfParams(), seed: int = 0,
                inside_fg_prob: float = 0.9, outside_bg_prob: float = 0.99) -> np.ndarray:
    """Box annotation -> label image for a single RGB image."""
    h, w = image.shape[:2]
    annotation.validate(w, h)
    if method == "grabcut":
        seeds = np.random.SeedSequence(seed).generate_state(max(len(annotation.boxes), 1))
        masks = [grabcut_segment(image, box, grabcut_params, seed=int(s))
                 for box, s in zip(annotation.boxes, seeds)]
        return merge_instance_masks(annotation, masks, (h, w))
    if method == "crf":
        unary = boxes_to_unary(annotation, w, h, inside_fg_prob, outside_bg_prob)
        return dense_crf_refine(image, unary, crf_params)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def find_image(image_dir: str | os.PathLike, image_id: str) -> Path:
    for ext in IMAGE_EXTENSIONS:
        path = Path(image_dir) / f"{image_id}{ext}"
        if path.is_file():
            return path
    raise FileNotFoundError(f"{image_id}: no image found in {image_dir}")


def convert_dataset(image_dir: str | os.PathLike, annotations: Mapping[str, BoxAnnotation],
                    out_dir: str | os.PathLike, method: str = "crf",
                    grabcut_params: GrabCutParams = GrabCutParams(),
                    crf_params: CrfParams = CrfParams(), seed: int = 0, threads: int = 1,
                    inside_fg_prob: float = 0.9, outside_bg_prob: float = 0.99) -> list[tuple[str, str]]:
    """Write ``out_dir/<image_id>.png`` for every annotated image.

    Also writes ``out_dir/manifest.txt`` with ``image_id path`` lines and
    returns the same pairs.  Output does not depend on ``threads``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ids = list(annotations)
    sources = {i: find_image(image_dir, i) for i in ids}

    def work(image_id: str) -> tuple[str, str]:
        image = read_rgb(sources[image_id])
        label = label_image(image, annotations[image_id], method, grabcut_params, crf_params,
                            image_seed(seed, image_id), inside_fg_prob, outside_bg_prob)
        path = out / f"{image_id}.png"
        write_label(path, label)
        return image_id, path.name

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            manifest = list(pool.map(work, ids))
    else:
        manifest = [work(i) for i in ids]
    with open(out / "manifest.txt", "w") as f:
        f.writelines(f"{i} {p}\n" for i, p in manifest)
    return manifest
