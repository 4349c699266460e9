"""Permutohedral-lattice Gaussian filtering (splat, blur, slice).

Approximates ``out_i = sum_j exp(-|f_i - f_j|^2 / 2) v_j`` for points with
feature vectors ``f`` in O(N d^2) instead of O(N^2).  The lattice is built
once per feature set and reused for any number of value channels, which is
what mean-field inference needs.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class PermutohedralLattice:
    def __init__(self, features: np.ndarray):
        f = np.asarray(features, dtype=np.float64)
        if f.ndim != 2:
            raise ValueError("features must be (n, d)")
        n, d = f.shape
        self.n, self.d = n, d
        d1 = d + 1

        # embed in the hyperplane x . 1 = 0 of R^{d+1}, scaled so the lattice
        # blur matches a unit-variance Gaussian
        inv_std = np.sqrt(2.0 / 3.0) * d1
        scale = inv_std / np.sqrt((np.arange(d) + 2) * (np.arange(d) + 1))
        cf = f * scale
        elevated = np.zeros((n, d1))
        running = np.zeros(n)
        for j in range(d, 0, -1):
            elevated[:, j] = running - j * cf[:, j - 1]
            running += cf[:, j - 1]
        elevated[:, 0] = running

        # nearest remainder-0 lattice point and the permutation sorting the residual
        v = elevated / d1
        up = np.ceil(v) * d1
        down = np.floor(v) * d1
        rem0 = np.where(up - elevated < elevated - down, up, down)
        total = np.rint(rem0.sum(axis=1) / d1).astype(np.int64)
        resid = elevated - rem0
        rank = np.zeros((n, d1), dtype=np.int64)
        for i in range(d1):
            for j in range(i + 1, d1):
                less = resid[:, i] < resid[:, j]
                rank[:, i] += less
                rank[:, j] += ~less

        pos = total > 0
        neg = total < 0
        ts = total[:, None]
        wrap_hi = pos[:, None] & (rank >= d1 - ts)
        wrap_lo = neg[:, None] & (rank < -ts)
        rem0 = rem0 - d1 * wrap_hi + d1 * wrap_lo
        rank = rank + ts - d1 * wrap_hi + d1 * wrap_lo

        bary = np.zeros((n, d + 2))
        delta = (elevated - rem0) / d1
        rows = np.arange(n)
        for i in range(d1):
            np.add.at(bary, (rows, d - rank[:, i]), delta[:, i])
            np.add.at(bary, (rows, d - rank[:, i] + 1), -delta[:, i])
        bary[:, 0] += 1.0 + bary[:, d + 1]
        bary = bary[:, :d1]

        # lattice vertices of the enclosing simplex; only the first d coordinates are stored
        rem0_i = np.rint(rem0[:, :d]).astype(np.int64)
        keys = np.empty((n, d1, d), dtype=np.int64)
        for r in range(d1):
            canonical = np.where(rank[:, :d] <= d - r, r, r - d1)
            keys[:, r, :] = rem0_i + canonical

        flat_keys = keys.reshape(-1, d)
        lo = flat_keys.min(axis=0) - d1
        radix = flat_keys.max(axis=0) + d1 - lo + 1
        if np.prod(radix.astype(np.float64)) >= 2.0 ** 62:
            raise ValueError("feature range too large for the lattice key encoding")
        self._lo, self._radix = lo, radix
        codes = self._encode(flat_keys)
        uniq, inverse = np.unique(codes, return_inverse=True)
        m = uniq.shape[0]
        self.m = m

        self.splat = sp.csr_matrix(
            (bary.ravel(), (inverse.ravel(), np.repeat(np.arange(n), d1))), shape=(m, n))

        uniq_keys = self._decode(uniq)
        self.blur = []
        eye = sp.identity(m, format="csr")
        for j in range(d1):
            step = -np.ones(d, dtype=np.int64)
            if j < d:
                step[j] += d1
            nb = []
            for sign in (1, -1):
                cand = self._encode(uniq_keys + sign * step)
                idx = np.searchsorted(uniq, cand)
                idx = np.minimum(idx, m - 1)
                hit = uniq[idx] == cand
                nb.append(sp.csr_matrix((np.full(hit.sum(), 0.5), (np.flatnonzero(hit), idx[hit])),
                                        shape=(m, m)))
            self.blur.append(eye + nb[0] + nb[1])
        self.alpha = 1.0 / (1.0 + 2.0 ** -d)

    def _encode(self, keys: np.ndarray) -> np.ndarray:
        code = np.zeros(keys.shape[0], dtype=np.int64)
        for j in range(self.d):
            code = code * self._radix[j] + (keys[:, j] - self._lo[j])
        return code

    def _decode(self, codes: np.ndarray) -> np.ndarray:
        keys = np.empty((codes.shape[0], self.d), dtype=np.int64)
        rest = codes.copy()
        for j in range(self.d - 1, -1, -1):
            keys[:, j] = rest % self._radix[j] + self._lo[j]
            rest //= self._radix[j]
        return keys

    def filter(self, values: np.ndarray) -> np.ndarray:
        """Gaussian-weighted sums of ``values`` (shape ``(n,)`` or ``(n, c)``), self term included."""
        v = np.asarray(values, dtype=np.float64)
        lat = self.splat @ v
        for b in self.blur:
            lat = b @ lat
        return self.alpha * (self.splat.T @ lat)
