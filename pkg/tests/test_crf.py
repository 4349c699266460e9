import numpy as np
import pytest
from scipy.special import softmax

from synseg.voc import Box, BoxAnnotation
from synseg.weak.crf import (UNSUPPORTED_COST, CrfParams, UnaryField, boxes_to_unary,
                             dense_crf_refine, mean_field)

NO_PAIRWISE = CrfParams(spatial_weight=0.0, bilateral_weight=0.0)


def random_fixture(rng, h=None, w=None, labels=None):
    h = h or int(rng.integers(1, 12))
    w = w or int(rng.integers(1, 12))
    labels = labels or int(rng.integers(2, 22))
    img = rng.integers(0, 256, (h, w, 3)).astype(np.uint8)
    costs = rng.uniform(0, 10, (h, w, labels))
    return img, UnaryField(costs)


def test_no_boxes_is_all_background():
    u = boxes_to_unary(BoxAnnotation("a"), 5, 4)
    assert (u.argmin() == 0).all()
    assert u.costs.shape == (4, 5, 21)


def test_single_box_prior():
    u = boxes_to_unary(BoxAnnotation("a", (Box(7, 1, 1, 3, 4),)), 5, 5)
    am = u.argmin()
    assert (am[1:4, 1:3] == 7).all()
    am[1:4, 1:3] = 0
    assert (am == 0).all()
    assert u.costs[2, 2, 7] == pytest.approx(-np.log(0.9))
    assert u.costs[2, 2, 0] == pytest.approx(-np.log(0.1))
    assert u.costs[0, 0, 0] == pytest.approx(-np.log(0.99))
    assert u.costs[0, 0, 3] == pytest.approx(UNSUPPORTED_COST)


def test_overlapping_boxes_split_evenly():
    ann = BoxAnnotation("a", (Box(3, 0, 0, 4, 4), Box(5, 2, 2, 6, 6)))
    u = boxes_to_unary(ann, 6, 6)
    assert u.costs[3, 3, 3] == u.costs[3, 3, 5] == pytest.approx(-np.log(0.45))
    assert u.costs[0, 0, 3] < u.costs[0, 0, 5]


def test_unary_validation():
    with pytest.raises(ValueError):
        UnaryField(np.full((2, 2, 3), np.inf))
    with pytest.raises(ValueError):
        UnaryField(-np.ones((2, 2, 3)))
    with pytest.raises(ValueError):
        boxes_to_unary(BoxAnnotation("a", (Box(1, 0, 0, 9, 9),)), 5, 5)
    with pytest.raises(ValueError):
        CrfParams(spatial_sigma=0)


@pytest.mark.parametrize("seed", range(30))
def test_zero_weights_give_unary_argmin(seed):
    img, unary = random_fixture(np.random.default_rng(seed))
    np.testing.assert_array_equal(dense_crf_refine(img, unary, NO_PAIRWISE), unary.argmin())


def test_zero_weights_on_box_prior():
    ann = BoxAnnotation("a", (Box(3, 0, 0, 4, 4), Box(5, 2, 2, 6, 6)))
    img = np.random.default_rng(0).integers(0, 256, (6, 7, 3)).astype(np.uint8)
    u = boxes_to_unary(ann, 7, 6)
    np.testing.assert_array_equal(dense_crf_refine(img, u, NO_PAIRWISE), u.argmin())


@pytest.mark.parametrize("method", ["exact", "lattice"])
def test_q_normalised_every_iteration(method):
    img, unary = random_fixture(np.random.default_rng(1), 9, 11, 5)
    sums = []
    mean_field(img, unary, CrfParams(iterations=6), method,
               callback=lambda it, q: sums.append(q.sum(axis=1)))
    assert len(sums) == 6
    for s in sums:
        assert np.abs(s - 1).max() <= 1e-6


def test_single_update_matches_hand_computation():
    # uniform grey 5x5 region preferring label 0, centre pixel mildly prefers 1
    h = w = 5
    img = np.full((h, w, 3), 128, np.uint8)
    costs = np.zeros((h, w, 2))
    costs[..., 1] = 2.0
    costs[2, 2] = (1.0, 0.0)
    params = CrfParams(spatial_weight=5.0, spatial_sigma=3.0, bilateral_weight=0.0, iterations=1)
    q, labels = mean_field(img, UnaryField(costs), params, "exact")
    assert labels.tolist() == [0, 1]

    q0 = softmax(-costs.reshape(-1, 2), axis=1)
    hand = np.empty_like(q0)
    for i in range(h * w):
        yi, xi = divmod(i, w)
        msg = np.zeros(2)
        for j in range(h * w):
            if j == i:
                continue
            yj, xj = divmod(j, w)
            k = 5.0 * np.exp(-((yi - yj) ** 2 + (xi - xj) ** 2) / (2 * 3.0**2))
            msg += k * q0[j]
        hand[i] = np.exp(-costs.reshape(-1, 2)[i] + msg)
        hand[i] /= hand[i].sum()
    np.testing.assert_allclose(q, hand, rtol=1e-12, atol=1e-12)
    assert q0[12].argmax() == 1 and hand[12].argmax() == 0
    assert (dense_crf_refine(img, UnaryField(costs), params, "exact") == 0).all()


@pytest.mark.parametrize("seed", range(4))
def test_mirror_symmetry(seed):
    img, unary = random_fixture(np.random.default_rng(seed), 8, 9, 4)
    img = img // 16 * 16  # give the bilateral term something to bite on
    params = CrfParams(spatial_weight=3.0, bilateral_weight=5.0, iterations=5)
    q, _ = mean_field(img, unary, params, "exact")
    qm, _ = mean_field(img[:, ::-1].copy(), UnaryField(unary.costs[:, ::-1].copy()), params, "exact")
    np.testing.assert_allclose(qm.reshape(8, 9, -1), q.reshape(8, 9, -1)[:, ::-1], atol=1e-9)


def test_output_labels_are_supported():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, (20, 30, 3)).astype(np.uint8)
    ann = BoxAnnotation("a", (Box(4, 2, 2, 12, 15), Box(9, 10, 5, 28, 18)))
    out = dense_crf_refine(img, boxes_to_unary(ann, 30, 20), CrfParams(iterations=5))
    assert set(np.unique(out)) <= {0, 4, 9}


def test_lattice_close_to_exact():
    rng = np.random.default_rng(4)
    img = np.zeros((40, 50, 3), np.uint8)
    img[:, 25:] = (200, 40, 40)
    img = np.clip(img + rng.integers(0, 12, img.shape), 0, 255).astype(np.uint8)
    ann = BoxAnnotation("a", (Box(12, 20, 5, 48, 35),))
    unary = boxes_to_unary(ann, 50, 40)
    params = CrfParams(bilateral_spatial_sigma=20.0)
    exact = dense_crf_refine(img, unary, params, "exact")
    approx = dense_crf_refine(img, unary, params, "lattice")
    assert (exact == approx).mean() > 0.98


def test_dimension_mismatch():
    img = np.zeros((3, 3, 3), np.uint8)
    with pytest.raises(ValueError):
        dense_crf_refine(img, UnaryField(np.zeros((3, 4, 2))))
    with pytest.raises(ValueError):
        mean_field(img, UnaryField(np.zeros((3, 3, 2))), method="fast")
