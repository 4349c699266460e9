"""Fully connected CRF with Gaussian pairwise kernels, solved by mean field.

Each pixel i has a distribution ``Q_i`` over labels.  One update is::

    Q_i(l) ∝ exp(-U_i(l) + sum_{j != i} k(i, j) Q_j(l))

with Potts compatibility and ``k = w_s exp(-|p_i - p_j|^2 / 2 theta_gamma^2)
+ w_b exp(-|p_i - p_j|^2 / 2 theta_alpha^2 - |I_i - I_j|^2 / 2 theta_beta^2)``.
Small images use the exact O(N^2) kernel; larger ones use a separable
spatial filter and a permutohedral lattice for the bilateral term.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d
from scipy.special import softmax

from ..voc import BoxAnnotation, check_rgb
from .lattice import PermutohedralLattice

PROB_FLOOR = 1e-10
# cost of a label with no probability mass at a pixel
UNSUPPORTED_COST = float(-np.log(PROB_FLOOR))
EXACT_MAX_PIXELS = 3000
_CALIBRATION_PROBES = 256


@dataclass(frozen=True)
class CrfParams:
    spatial_weight: float = 3.0
    spatial_sigma: float = 3.0
    bilateral_weight: float = 10.0
    bilateral_spatial_sigma: float = 80.0
    bilateral_color_sigma: float = 13.0
    iterations: int = 10

    def __post_init__(self):
        if self.spatial_weight < 0 or self.bilateral_weight < 0:
            raise ValueError("kernel weights must be >= 0")
        if min(self.spatial_sigma, self.bilateral_spatial_sigma, self.bilateral_color_sigma) <= 0:
            raise ValueError("kernel widths must be > 0")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")


@dataclass(frozen=True)
class UnaryField:
    """Per-pixel, per-label costs (negative log-probabilities), shape ``(H, W, L)``."""

    costs: np.ndarray

    def __post_init__(self):
        c = self.costs
        if c.ndim != 3 or 0 in c.shape:
            raise ValueError(f"unary costs must be a non-empty (H, W, L) array, got {c.shape}")
        if not np.isfinite(c).all() or (c < 0).any():
            raise ValueError("unary costs must be finite and non-negative")

    @property
    def height(self) -> int:
        return self.costs.shape[0]

    @property
    def width(self) -> int:
        return self.costs.shape[1]

    @property
    def num_labels(self) -> int:
        return self.costs.shape[2]

    def argmin(self) -> np.ndarray:
        return np.argmin(self.costs, axis=2).astype(np.uint8)


def boxes_to_unary(annotation: BoxAnnotation, width: int, height: int,
                   inside_fg_prob: float = 0.9, outside_bg_prob: float = 0.99,
                   num_labels: int = 21) -> UnaryField:
    """Turn box annotations into a per-pixel label prior.

    Outside every box, background gets ``outside_bg_prob`` and the rest is
    shared by the classes annotated in the image.  Inside boxes, the classes
    of all covering boxes share ``inside_fg_prob`` equally and background
    keeps the remainder.  Labels with no mass cost ``UNSUPPORTED_COST``.
    """
    if not 0 < inside_fg_prob <= 1 or not 0 < outside_bg_prob <= 1:
        raise ValueError("probabilities must lie in (0, 1]")
    annotation.validate(width, height)
    classes = sorted({b.class_index for b in annotation.boxes})
    covers = np.zeros((height, width, num_labels), dtype=bool)
    for b in annotation.boxes:
        covers[b.ymin:b.ymax, b.xmin:b.xmax, b.class_index] = True

    prob = np.zeros((height, width, num_labels))
    n_cover = covers.sum(axis=2)
    inside = n_cover > 0
    if classes:
        prob[..., 0] = outside_bg_prob
        prob[..., classes] = (1.0 - outside_bg_prob) / len(classes)
    else:
        prob[..., 0] = 1.0
    prob[inside] = 0.0
    prob[inside, 0] = 1.0 - inside_fg_prob
    share = np.divide(inside_fg_prob, n_cover, out=np.zeros(n_cover.shape), where=inside)
    prob += covers * share[..., None]
    costs = np.minimum(-np.log(np.maximum(prob, PROB_FLOOR)), UNSUPPORTED_COST)
    return UnaryField(np.maximum(costs, 0.0))


def _features(image: np.ndarray, spatial_sigma: float, color_sigma: float | None):
    h, w = image.shape[:2]
    yy, xx = np.mgrid[:h, :w]
    pos = np.stack([xx, yy], axis=-1).reshape(-1, 2) / spatial_sigma
    if color_sigma is None:
        return pos
    return np.concatenate([pos, image.reshape(-1, 3).astype(np.float64) / color_sigma], axis=1)


class ExactKernel:
    """Direct evaluation of ``sum_{j != i} k(i, j) v_j``."""

    def __init__(self, image: np.ndarray, params: CrfParams, chunk: int = 1024):
        self.fs = _features(image, params.spatial_sigma, None)
        self.fb = _features(image, params.bilateral_spatial_sigma, params.bilateral_color_sigma)
        self.ws, self.wb = params.spatial_weight, params.bilateral_weight
        self.n = self.fs.shape[0]
        self.chunk = chunk
        self.dense = self._rows(0, self.n) if self.n <= EXACT_MAX_PIXELS else None

    def _rows(self, start: int, stop: int) -> np.ndarray:
        k = np.zeros((stop - start, self.n))
        for weight, f in ((self.ws, self.fs), (self.wb, self.fb)):
            if weight:
                d2 = ((f[start:stop, None, :] - f[None, :, :]) ** 2).sum(axis=2)
                k += weight * np.exp(-0.5 * d2)
        k[np.arange(stop - start), np.arange(start, stop)] = 0.0
        return k

    def __call__(self, q: np.ndarray) -> np.ndarray:
        if self.dense is not None:
            return self.dense @ q
        out = np.empty_like(q)
        for s in range(0, self.n, self.chunk):
            e = min(s + self.chunk, self.n)
            out[s:e] = self._rows(s, e) @ q
        return out


class LatticeKernel:
    """Separable spatial Gaussian plus lattice-approximated bilateral Gaussian.

    The lattice response is rescaled by one gain per image, measured
    against exact kernel sums at a fixed set of probe pixels.
    """

    def __init__(self, image: np.ndarray, params: CrfParams):
        self.h, self.w = image.shape[:2]
        self.ws, self.wb = params.spatial_weight, params.bilateral_weight
        radius = int(np.ceil(4 * params.spatial_sigma))
        x = np.arange(-radius, radius + 1)
        self.taps = np.exp(-0.5 * (x / params.spatial_sigma) ** 2)
        self.lattice = None
        if self.wb:
            fb = _features(image, params.bilateral_spatial_sigma, params.bilateral_color_sigma)
            self.lattice = PermutohedralLattice(fb)
            probes = np.linspace(0, fb.shape[0] - 1, _CALIBRATION_PROBES).astype(np.int64)
            exact = np.exp(-0.5 * ((fb[probes, None, :] - fb[None, :, :]) ** 2).sum(axis=2)).sum(axis=1)
            approx = self.lattice.filter(np.ones(fb.shape[0]))[probes]
            self.gain = float(np.median(exact / approx))

    def __call__(self, q: np.ndarray) -> np.ndarray:
        out = np.zeros_like(q)
        if self.ws:
            grid = q.reshape(self.h, self.w, -1)
            sm = correlate1d(grid, self.taps, axis=0, mode="constant")
            sm = correlate1d(sm, self.taps, axis=1, mode="constant")
            out += self.ws * (sm.reshape(q.shape) - q)
        if self.lattice is not None:
            out += self.wb * (self.gain * self.lattice.filter(q) - q)
        return out


def mean_field(image: np.ndarray, unary: UnaryField, params: CrfParams = CrfParams(),
               method: str = "auto", callback=None):
    """Run mean-field inference.

    Labels whose cost is ``UNSUPPORTED_COST`` at every pixel are dropped.

    Returns:
        ``(q, labels)``: ``q`` has shape ``(H*W, len(labels))`` and column
        ``c`` is the distribution of label ``labels[c]``.
    """
    image = check_rgb(image)
    if image.shape[:2] != unary.costs.shape[:2]:
        raise ValueError(f"unary size {unary.costs.shape[:2]} does not match image {image.shape[:2]}")
    if method not in ("auto", "exact", "lattice"):
        raise ValueError(f"unknown method {method!r}")
    costs = unary.costs.reshape(-1, unary.num_labels)
    labels = np.flatnonzero((costs < UNSUPPORTED_COST).any(axis=0))
    if labels.size == 0:
        labels = np.arange(unary.num_labels)
    u = costs[:, labels]
    q = softmax(-u, axis=1)
    if params.iterations == 0 or (params.spatial_weight == 0 and params.bilateral_weight == 0):
        kernel = None
    elif method == "exact" or (method == "auto" and u.shape[0] <= EXACT_MAX_PIXELS):
        kernel = ExactKernel(image, params)
    else:
        kernel = LatticeKernel(image, params)
    for it in range(params.iterations):
        msg = kernel(q) if kernel is not None else 0.0
        q = softmax(-u + msg, axis=1)
        if callback is not None:
            callback(it, q)
    return q, labels


def dense_crf_refine(image: np.ndarray, unary: UnaryField, params: CrfParams = CrfParams(),
                     method: str = "auto") -> np.ndarray:
    """Label image (``uint8``) from mean-field marginals."""
    q, labels = mean_field(image, unary, params, method)
    best = labels[np.argmax(q, axis=1)]
    return best.reshape(unary.costs.shape[:2]).astype(np.uint8)
