import numpy as np
import pytest

from synseg.weak.lattice import PermutohedralLattice


def exact_filter(f, v):
    d2 = ((f[:, None] - f[None]) ** 2).sum(-1)
    return np.exp(-0.5 * d2) @ v


@pytest.mark.parametrize("d", [1, 2, 5])
def test_shape_and_linearity(d):
    rng = np.random.default_rng(d)
    f = rng.normal(size=(200, d)) * 2
    lat = PermutohedralLattice(f)
    a, b = rng.normal(size=200), rng.normal(size=200)
    np.testing.assert_allclose(lat.filter(2 * a + b), 2 * lat.filter(a) + lat.filter(b), atol=1e-9)
    assert lat.filter(np.ones((200, 3))).shape == (200, 3)


def image_features(d, rng):
    # pixel grid plus a two-region colour image, as the CRF bilateral kernel sees them
    yy, xx = np.mgrid[:24, :24]
    pos = np.stack([xx, yy], -1).reshape(-1, 2) / 4.0
    colour = np.where(xx > 11, 200.0, 30.0)[..., None] + rng.normal(0, 6, (24, 24, 3))
    return pos if d == 2 else np.hstack([pos, colour.reshape(-1, 3) / 13.0])


@pytest.mark.parametrize("d", [2, 5])
def test_tracks_exact_gaussian_up_to_gain(d):
    rng = np.random.default_rng(d)
    f = image_features(d, rng)
    v = rng.uniform(0, 1, size=f.shape[0])
    approx = PermutohedralLattice(f).filter(v)
    exact = exact_filter(f, v)
    gain = np.median(exact / approx)
    assert np.corrcoef(approx, exact)[0, 1] > 0.97
    assert np.median(np.abs(gain * approx - exact) / exact) < 0.08


def test_bad_features():
    with pytest.raises(ValueError):
        PermutohedralLattice(np.zeros(5))
