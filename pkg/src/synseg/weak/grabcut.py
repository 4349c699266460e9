"""Box-initialised GrabCut: alternating colour-GMM fits and exact min cuts.

Energy of a foreground mask ``a`` (pixels outside the box are pinned to
background)::

    E(a) = sum_p D_{a_p}(z_p) + sum_{p~q, a_p != a_q} gamma / dist(p, q) * exp(-beta |z_p - z_q|^2)

with ``D_fg = -log p_fg(z)`` and ``D_bg = -log p_bg(z)`` from the two colour
mixtures.  Every term is rounded to an integer multiple of
``1 / ENERGY_SCALE`` before optimisation, so the min cut is exact on the
quantised energy and energies compare exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..voc import Box, check_rgb
from .gmm import GMM, em_refine, fit_gmm
from .maxflow import mincut

ENERGY_SCALE = 1024
REFIT_EM_ROUNDS = 3

_SQRT2 = float(np.sqrt(2.0))
_OFFSETS = {
    4: ((0, 1, 1.0), (1, 0, 1.0)),
    8: ((0, 1, 1.0), (1, 0, 1.0), (1, 1, _SQRT2), (1, -1, _SQRT2)),
}


@dataclass(frozen=True)
class GrabCutParams:
    gmm_components: int = 5
    gamma: float = 50.0
    iterations: int = 5
    neighborhood: int = 8

    def __post_init__(self):
        if self.gmm_components < 1:
            raise ValueError("gmm_components must be >= 1")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.neighborhood not in _OFFSETS:
            raise ValueError("neighborhood must be 4 or 8")


@dataclass
class GrabCutResult:
    mask: np.ndarray
    fg_gmm: GMM
    bg_gmm: GMM
    beta: float
    energies: list[int] = field(default_factory=list)


def _pair_slices(h: int, w: int, dy: int, dx: int):
    """Slices selecting p and q = p + (dy, dx) for all in-image pairs."""
    if dx >= 0:
        p = (slice(0, h - dy), slice(0, w - dx))
        q = (slice(dy, h), slice(dx, w))
    else:
        p = (slice(0, h - dy), slice(-dx, w))
        q = (slice(dy, h), slice(0, w + dx))
    return p, q


def compute_beta(image: np.ndarray, neighborhood: int = 8) -> float:
    """``1 / (2 * mean squared colour difference)`` over neighbouring pairs.

    Returns 0 for images without colour variation (or a single pixel).
    """
    z = check_rgb(image).astype(np.float64)
    h, w = z.shape[:2]
    total = 0.0
    count = 0
    for dy, dx, _ in _OFFSETS[neighborhood]:
        p, q = _pair_slices(h, w, dy, dx)
        diff = z[p] - z[q]
        total += float((diff ** 2).sum())
        count += diff.shape[0] * diff.shape[1]
    if count == 0 or total == 0.0:
        return 0.0
    return 1.0 / (2.0 * total / count)


def pairwise_terms(image: np.ndarray, gamma: float, beta: float, neighborhood: int = 8):
    """Quantised boundary weights as ``[(p_index, q_index, weight)]`` per offset.

    Indices are flat row-major pixel indices.
    """
    z = check_rgb(image).astype(np.float64)
    h, w = z.shape[:2]
    flat = np.arange(h * w).reshape(h, w)
    out = []
    for dy, dx, dist in _OFFSETS[neighborhood]:
        p, q = _pair_slices(h, w, dy, dx)
        d2 = ((z[p] - z[q]) ** 2).sum(axis=2)
        weight = np.rint(gamma / dist * np.exp(-beta * d2) * ENERGY_SCALE).astype(np.int64)
        out.append((flat[p].ravel(), flat[q].ravel(), weight.ravel()))
    return out


def data_terms(image: np.ndarray, gmm: GMM) -> np.ndarray:
    """Quantised ``-log p(z)`` for every pixel, shape ``(H, W)``."""
    z = check_rgb(image)
    cost = -gmm.log_pdf(z.reshape(-1, 3))
    return np.rint(cost * ENERGY_SCALE).astype(np.int64).reshape(z.shape[:2])


def box_mask(shape: tuple[int, int], box) -> np.ndarray:
    h, w = shape
    xmin, ymin, xmax, ymax = _box_coords(box)
    if xmin < 0 or ymin < 0 or xmax > w or ymax > h:
        raise ValueError(f"box {xmin, ymin, xmax, ymax} outside {w}x{h} image")
    inside = np.zeros(shape, dtype=bool)
    inside[ymin:ymax, xmin:xmax] = True
    return inside


def _box_coords(box):
    if isinstance(box, Box):
        return box.xmin, box.ymin, box.xmax, box.ymax
    xmin, ymin, xmax, ymax = (int(v) for v in box)
    if xmax <= xmin or ymax <= ymin:
        raise ValueError(f"degenerate box {xmin, ymin, xmax, ymax}")
    return xmin, ymin, xmax, ymax


def grabcut_energy(mask, inside, d_fg, d_bg, pairs) -> int:
    """Exact quantised energy of a foreground mask."""
    mask = np.asarray(mask, dtype=bool)
    if (mask & ~inside).any():
        raise ValueError("mask marks pixels outside the box")
    energy = int(d_fg[mask].sum()) + int(d_bg[~mask].sum())
    flat = mask.ravel()
    for p, q, weight in pairs:
        energy += int(weight[flat[p] != flat[q]].sum())
    return energy


def _cut(inside, d_fg, d_bg, pairs) -> np.ndarray:
    h, w = inside.shape
    flat_inside = inside.ravel()
    node = np.full(h * w, -1, dtype=np.int64)
    node[flat_inside] = np.arange(int(flat_inside.sum()))
    source_cap = d_bg.ravel()[flat_inside].copy()
    sink_cap = d_fg.ravel()[flat_inside].copy()
    us, vs, ws = [], [], []
    for p, q, weight in pairs:
        ip, iq = flat_inside[p], flat_inside[q]
        both = ip & iq
        us.append(node[p[both]])
        vs.append(node[q[both]])
        ws.append(weight[both])
        # an in-box pixel next to a pinned background pixel pays the edge if foreground
        np.add.at(sink_cap, node[p[ip & ~iq]], weight[ip & ~iq])
        np.add.at(sink_cap, node[q[iq & ~ip]], weight[iq & ~ip])
    shift = np.minimum(source_cap, sink_cap)
    edge_w = np.concatenate(ws)
    _, fg = mincut(source_cap - shift, sink_cap - shift,
                   np.concatenate(us), np.concatenate(vs), edge_w, edge_w)
    mask = np.zeros(h * w, dtype=bool)
    mask[flat_inside] = fg
    return mask.reshape(h, w)


def _refit(gmm: GMM, pixels: np.ndarray, seed: int) -> GMM:
    """Warm-started EM; the old model is kept unless the new one lowers the data energy."""
    if pixels.shape[0] == 0:
        return gmm
    candidate = em_refine(gmm, pixels, REFIT_EM_ROUNDS, seed=seed)
    z = pixels.reshape(1, -1, 3)
    old = int(data_terms(z, gmm).sum())
    new = int(data_terms(z, candidate).sum())
    return candidate if new <= old else gmm


def grabcut(image: np.ndarray, box, params: GrabCutParams = GrabCutParams(),
            seed: int = 0) -> GrabCutResult:
    """Run GrabCut inside ``box`` and return the mask with the final models.

    ``box`` is a :class:`~synseg.voc.Box` or an ``(xmin, ymin, xmax, ymax)``
    half-open tuple.  When the box covers the whole image the background
    model starts from all pixels.  A model whose pixel set becomes empty
    keeps its previous parameters.
    """
    image = check_rgb(image)
    inside = box_mask(image.shape[:2], box)
    seeds = np.random.SeedSequence(seed).generate_state(2)
    k = params.gmm_components
    beta = compute_beta(image, params.neighborhood)
    pairs = pairwise_terms(image, params.gamma, beta, params.neighborhood)

    pixels = image.reshape(-1, 3)
    flat_inside = inside.ravel()
    fg_gmm = fit_gmm(pixels[flat_inside], k, seed=int(seeds[0]))
    bg_init = pixels[~flat_inside] if (~flat_inside).any() else pixels
    bg_gmm = fit_gmm(bg_init, k, seed=int(seeds[1]))

    mask = inside.copy()
    energies = []
    for it in range(params.iterations):
        if it:
            flat = mask.ravel()
            fg_gmm = _refit(fg_gmm, pixels[flat], int(seeds[0]))
            bg_gmm = _refit(bg_gmm, pixels[~flat], int(seeds[1]))
        d_fg = data_terms(image, fg_gmm)
        d_bg = data_terms(image, bg_gmm)
        mask = _cut(inside, d_fg, d_bg, pairs)
        energies.append(grabcut_energy(mask, inside, d_fg, d_bg, pairs))
    return GrabCutResult(mask, fg_gmm, bg_gmm, beta, energies)


def grabcut_segment(image: np.ndarray, box, params: GrabCutParams = GrabCutParams(),
                    seed: int = 0) -> np.ndarray:
    """Foreground mask (``bool``, same size as the image) for one box."""
    return grabcut(image, box, params, seed).mask
