"""PASCAL VOC class taxonomy, label images and box annotations.

Label images are plain ``(H, W)`` ``uint8`` arrays holding class indices
(0-20) or the void value 255.  RGB images are ``(H, W, 3)`` ``uint8``
arrays.  On disk, labels are single-channel PNGs with the VOC palette.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from PIL import Image

VOID = 255

VOC_CLASSES = (
    "background", "aeroplane", "bicycle", "bird", "boat", "bottle", "bus",
    "car", "cat", "chair", "cow", "diningtable", "dog", "horse", "motorbike",
    "person", "pottedplant", "sheep", "sofa", "train", "tvmonitor",
)


class LabelError(ValueError):
    """Raised for label data that violates the VOC index conventions."""


@dataclass(frozen=True)
class ClassTaxonomy:
    names: tuple[str, ...] = VOC_CLASSES
    void_index: int = VOID

    def __post_init__(self):
        if len(self.names) != 21:
            raise ValueError(f"expected 21 class names, got {len(self.names)}")
        if len(set(self.names)) != len(self.names):
            raise ValueError("class names must be unique")
        if self.names[0] != "background":
            raise ValueError("index 0 must be 'background'")
        if not 0 <= self.void_index <= 255 or self.void_index < len(self.names):
            raise ValueError("void index must lie outside the class range")

    @property
    def num_classes(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown class name {name!r}") from None

    def name(self, index: int) -> str:
        if index == self.void_index:
            return "void"
        return self.names[index]

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "ClassTaxonomy":
        """Read one class name per line; blank lines and ``#`` comments are skipped."""
        with open(path) as f:
            names = [ln.split("#", 1)[0].strip() for ln in f]
        return cls(tuple(n for n in names if n))


VOC = ClassTaxonomy()


def voc_colormap(index: int) -> tuple[int, int, int]:
    """Display colour of a class index under the canonical VOC palette."""
    if not 0 <= index <= 255:
        raise ValueError(f"palette index out of range: {index}")
    r = g = b = 0
    c = index
    for j in range(8):
        r |= ((c >> 0) & 1) << (7 - j)
        g |= ((c >> 1) & 1) << (7 - j)
        b |= ((c >> 2) & 1) << (7 - j)
        c >>= 3
    return r, g, b


def voc_palette() -> np.ndarray:
    """The full 256-entry palette as a ``(256, 3)`` uint8 array."""
    return np.array([voc_colormap(i) for i in range(256)], dtype=np.uint8)


def check_label(label: np.ndarray, num_classes: int = 21) -> np.ndarray:
    label = np.asarray(label)
    if label.ndim != 2:
        raise LabelError(f"label image must be 2D, got shape {label.shape}")
    if label.size == 0:
        raise LabelError("label image is empty")
    bad = (label != VOID) & ((label < 0) | (label >= num_classes))
    if bad.any():
        values = np.unique(label[bad])
        raise LabelError(f"label values out of range: {values.tolist()[:10]}")
    return label.astype(np.uint8, copy=False)


def check_rgb(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.shape[0] == 0 or image.shape[1] == 0:
        raise ValueError(f"expected a non-empty (H, W, 3) image, got shape {image.shape}")
    if image.dtype != np.uint8:
        raise ValueError(f"expected uint8 RGB data, got {image.dtype}")
    return image


def encode_label_png(label: np.ndarray) -> bytes:
    """Encode a label image as an indexed PNG carrying the VOC palette."""
    label = check_label(label)
    h, w = label.shape
    img = Image.frombytes("P", (w, h), np.ascontiguousarray(label).tobytes())
    img.putpalette(voc_palette().tobytes())
    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def decode_label_png(data: bytes) -> np.ndarray:
    """Decode an indexed (or greyscale) label PNG back to class indices."""
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except Exception as exc:
        raise LabelError(f"malformed label image: {exc}") from exc
    if img.mode not in ("P", "L"):
        raise LabelError(f"label image must be indexed or greyscale, got mode {img.mode}")
    return check_label(np.array(img))


def read_label(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as f:
        return decode_label_png(f.read())


def write_label(path: str | os.PathLike, label: np.ndarray) -> None:
    data = encode_label_png(label)
    with open(path, "wb") as f:
        f.write(data)


def read_rgb(path: str | os.PathLike) -> np.ndarray:
    with Image.open(path) as img:
        return np.array(img.convert("RGB"))


def write_rgb(path: str | os.PathLike, image: np.ndarray) -> None:
    Image.fromarray(check_rgb(image)).save(path, format="PNG", optimize=False)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with half-open pixel ranges ``[xmin, xmax) x [ymin, ymax)``."""

    class_index: int
    xmin: int
    ymin: int
    xmax: int
    ymax: int

    def __post_init__(self):
        if not 1 <= self.class_index <= 20:
            raise ValueError(f"box class must be in 1..20, got {self.class_index}")
        if self.xmin < 0 or self.ymin < 0 or self.xmin >= self.xmax or self.ymin >= self.ymax:
            raise ValueError(f"degenerate box {self.xmin, self.ymin, self.xmax, self.ymax}")

    @property
    def area(self) -> int:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)

    @property
    def slices(self) -> tuple[slice, slice]:
        return slice(self.ymin, self.ymax), slice(self.xmin, self.xmax)

    def fits(self, width: int, height: int) -> bool:
        return self.xmax <= width and self.ymax <= height


@dataclass(frozen=True)
class BoxAnnotation:
    image_id: str
    boxes: tuple[Box, ...] = field(default_factory=tuple)

    def validate(self, width: int, height: int) -> None:
        for box in self.boxes:
            if not box.fits(width, height):
                raise ValueError(
                    f"{self.image_id}: box {box} exceeds image size {width}x{height}")


def parse_box_annotations(lines: Iterable[str],
                          taxonomy: ClassTaxonomy = VOC) -> dict[str, BoxAnnotation]:
    """Parse ``image_id class_name xmin ymin xmax ymax`` lines.

    Images keep their first-seen order; boxes keep file order.
    """
    boxes: dict[str, list[Box]] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6:
            raise ValueError(f"line {lineno}: expected 6 fields, got {len(parts)}")
        image_id, name = parts[0], parts[1]
        try:
            cls = taxonomy.index(name)
            xmin, ymin, xmax, ymax = (int(p) for p in parts[2:])
            box = Box(cls, xmin, ymin, xmax, ymax)
        except (KeyError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        boxes.setdefault(image_id, []).append(box)
    return {k: BoxAnnotation(k, tuple(v)) for k, v in boxes.items()}


def read_box_annotations(path: str | os.PathLike,
                         taxonomy: ClassTaxonomy = VOC) -> dict[str, BoxAnnotation]:
    with open(path) as f:
        return parse_box_annotations(f, taxonomy)


def format_box_annotations(annotations: Iterable[BoxAnnotation],
                           taxonomy: ClassTaxonomy = VOC) -> str:
    out = []
    for ann in annotations:
        for b in ann.boxes:
            out.append(f"{ann.image_id} {taxonomy.names[b.class_index]} "
                       f"{b.xmin} {b.ymin} {b.xmax} {b.ymax}\n")
    return "".join(out)
