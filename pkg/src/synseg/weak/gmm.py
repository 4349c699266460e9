"""Full-covariance Gaussian mixtures over RGB colours."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

COV_EPS = 1e-3
MAX_SAMPLES = 20000
_LOG_2PI = np.log(2 * np.pi)


@dataclass(frozen=True)
class GMM:
    weights: np.ndarray  # (k,)
    means: np.ndarray  # (k, 3)
    covs: np.ndarray  # (k, 3, 3)

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    def component_log_pdf(self, pixels: np.ndarray) -> np.ndarray:
        """``log(w_j N(x | mu_j, S_j))`` for every pixel and component, ``(n, k)``."""
        x = np.asarray(pixels, dtype=np.float64).reshape(-1, 3)
        chol = np.linalg.cholesky(self.covs)
        out = np.empty((x.shape[0], self.k))
        with np.errstate(divide="ignore"):
            log_w = np.log(self.weights)
        for j in range(self.k):
            # solve L z = (x - mu)
            z = np.linalg.solve(chol[j], (x - self.means[j]).T)
            maha = np.einsum("ij,ij->j", z, z)
            log_det = 2 * np.log(np.diag(chol[j])).sum()
            out[:, j] = log_w[j] - 0.5 * (maha + log_det + 3 * _LOG_2PI)
        return out

    def log_pdf(self, pixels: np.ndarray) -> np.ndarray:
        return logsumexp(self.component_log_pdf(pixels), axis=1)


def _mstep(x: np.ndarray, resp: np.ndarray, prev: GMM | None) -> GMM:
    nk = resp.sum(axis=0)
    k = resp.shape[1]
    weights = nk / nk.sum()
    means = np.empty((k, 3))
    covs = np.empty((k, 3, 3))
    for j in range(k):
        if nk[j] <= 0:
            # dead component keeps its old location with zero weight
            means[j] = prev.means[j] if prev is not None else x.mean(axis=0)
            covs[j] = COV_EPS * np.eye(3)
            continue
        means[j] = resp[:, j] @ x / nk[j]
        d = x - means[j]
        covs[j] = (resp[:, j, None] * d).T @ d / nk[j] + COV_EPS * np.eye(3)
    return GMM(weights, means, covs)


def _quantile_init(x: np.ndarray, k: int) -> np.ndarray:
    """Hard labels from equal-count slices along the principal colour axis, then Lloyd steps."""
    centred = x - x.mean(axis=0)
    cov = centred.T @ centred
    _, vecs = np.linalg.eigh(cov)
    proj = centred @ vecs[:, -1]
    order = np.argsort(proj, kind="stable")
    labels = np.empty(x.shape[0], dtype=np.int64)
    labels[order] = np.arange(x.shape[0]) * k // x.shape[0]
    for _ in range(10):
        means = np.array([x[labels == j].mean(axis=0) if (labels == j).any() else x[0]
                          for j in range(k)])
        d2 = ((x[:, None, :] - means[None]) ** 2).sum(axis=2)
        new = np.argmin(d2, axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
    return labels


def fit_gmm(pixels, k: int = 5, seed: int = 0, em_rounds: int = 10,
            max_samples: int = MAX_SAMPLES) -> GMM:
    """Fit a ``k``-component GMM to RGB pixels.

    Initialisation splits the pixels into ``k`` equal-count groups along the
    principal colour axis and polishes them with k-means; ``em_rounds`` EM
    iterations follow.  With fewer pixels than components, ``k`` drops to
    the pixel count.  Large inputs are subsampled with ``seed``.
    """
    x = np.asarray(pixels, dtype=np.float64).reshape(-1, 3)
    if x.shape[0] == 0:
        raise ValueError("cannot fit a GMM to zero pixels")
    if k < 1:
        raise ValueError("need at least one component")
    if x.shape[0] > max_samples:
        rng = np.random.default_rng(seed)
        x = x[np.sort(rng.choice(x.shape[0], max_samples, replace=False))]
    k = min(k, x.shape[0])
    labels = _quantile_init(x, k)
    resp = np.zeros((x.shape[0], k))
    resp[np.arange(x.shape[0]), labels] = 1.0
    gmm = _mstep(x, resp, None)
    return em_refine(gmm, x, em_rounds, max_samples=max_samples, seed=seed)


def em_refine(gmm: GMM, pixels, rounds: int, max_samples: int = MAX_SAMPLES,
              seed: int = 0) -> GMM:
    """Run ``rounds`` EM iterations starting from ``gmm``."""
    x = np.asarray(pixels, dtype=np.float64).reshape(-1, 3)
    if x.shape[0] > max_samples:
        rng = np.random.default_rng(seed)
        x = x[np.sort(rng.choice(x.shape[0], max_samples, replace=False))]
    for _ in range(rounds):
        logp = gmm.component_log_pdf(x)
        resp = np.exp(logp - logsumexp(logp, axis=1, keepdims=True))
        gmm = _mstep(x, resp, gmm)
    return gmm
