import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synseg.evaluation import (EvaluationError, IoUReport, accumulate, empty_confusion,
                               evaluate_dataset, evaluate_pairs, mean_iou,
                               mean_of_image_ious, per_class_iou)
from synseg.voc import VOID, write_label

from tabledata import REPORTED, WEAK_10K, WEAK_SYN_2K, REAL_1_5K


def tally(gt, pred, n=21):
    # pixel-by-pixel reference
    conf = np.zeros((n, n), dtype=np.int64)
    for g, p in zip(np.ravel(gt), np.ravel(pred)):
        if g != VOID:
            conf[g, p] += 1
    return conf


def test_perfect_prediction_is_diagonal():
    gt = np.array([[0, 1], [2, 3]], dtype=np.uint8)
    conf = accumulate(empty_confusion(), gt, gt)
    assert conf.trace() == 4 and conf.sum() == 4


def test_all_void_leaves_matrix_unchanged():
    conf = empty_confusion()
    conf[1, 1] = 5
    gt = np.full((3, 3), VOID, dtype=np.uint8)
    out = accumulate(conf, gt, np.zeros((3, 3), dtype=np.uint8))
    np.testing.assert_array_equal(out, conf)


def test_hand_tally_fixture():
    gt = np.array([[0, 1], [1, 255]], dtype=np.uint8)
    pred = np.array([[0, 1], [0, 0]], dtype=np.uint8)
    conf = accumulate(empty_confusion(), gt, pred)
    assert conf[0, 0] == 1 and conf[1, 1] == 1 and conf[1, 0] == 1
    assert conf.sum() == 3
    iou = per_class_iou(conf)
    assert iou[0] == pytest.approx(0.5) and iou[1] == pytest.approx(0.5)
    assert np.isnan(iou[2:]).all()
    assert mean_iou(iou) == pytest.approx(0.5)


def test_accumulate_errors():
    with pytest.raises(ValueError):
        accumulate(empty_confusion(), np.zeros((2, 2), np.uint8), np.zeros((2, 3), np.uint8))
    with pytest.raises(ValueError):
        accumulate(empty_confusion(), np.zeros((1, 1), np.uint8), np.full((1, 1), VOID, np.uint8))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_accumulate_matches_reference_and_is_symmetric(seed):
    rng = np.random.default_rng(seed)
    gt = rng.integers(0, 21, size=(5, 6)).astype(np.uint8)
    pred = rng.integers(0, 21, size=(5, 6)).astype(np.uint8)
    conf = accumulate(empty_confusion(), gt, pred)
    np.testing.assert_array_equal(conf, tally(gt, pred))
    np.testing.assert_array_equal(accumulate(empty_confusion(), pred, gt), conf.T)
    gt[rng.random(gt.shape) < 0.3] = VOID
    np.testing.assert_array_equal(accumulate(empty_confusion(), gt, pred), tally(gt, pred))


def test_order_independence():
    rng = np.random.default_rng(3)
    pairs = [(rng.integers(0, 21, (4, 4)).astype(np.uint8),
              rng.integers(0, 21, (4, 4)).astype(np.uint8)) for _ in range(6)]
    a = evaluate_pairs(pairs).confusion
    b = evaluate_pairs(pairs[::-1]).confusion
    np.testing.assert_array_equal(a, b)


def test_diagonal_matrix_gives_one():
    conf = np.diag([3, 0, 5] + [0] * 18)
    iou = per_class_iou(conf)
    assert iou[0] == 1 and iou[2] == 1 and np.isnan(iou[1])


def test_mean_iou_edges():
    assert mean_iou([1.0] * 21) == 1.0
    assert mean_iou([0.5, np.nan, 1.0]) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        mean_iou([np.nan] * 21)


@pytest.mark.parametrize("values,expected", [(WEAK_10K, 52.80), (WEAK_SYN_2K, 55.47),
                                             (REAL_1_5K, 47.62)])
def test_table_columns(values, expected):
    assert len(values) == 21
    assert abs(mean_iou(values) - expected) <= 0.01


def test_all_table_columns_round_to_reported_mean():
    for name, (values, reported) in REPORTED.items():
        assert round(mean_iou(values), 2) == pytest.approx(reported, abs=0.01), name


def two_image_fixture():
    # image A: class 1 everywhere, predicted perfectly (4 px)
    # image B: gt 0,0,1,1 and pred 0,0,0,0
    a = np.ones((2, 2), np.uint8)
    gb = np.array([[0, 0], [1, 1]], np.uint8)
    pb = np.zeros((2, 2), np.uint8)
    return [(a, a.copy()), (gb, pb)]


def test_global_iou_differs_from_per_image_average():
    pairs = two_image_fixture()
    report = evaluate_pairs(pairs)
    # global: class 0 TP=2 FP=2 -> 1/2; class 1 TP=4 FN=2 -> 2/3
    assert report.per_class[0] == pytest.approx(0.5)
    assert report.per_class[1] == pytest.approx(2 / 3)
    assert report.mean == pytest.approx(7 / 12)
    # per image: A -> 1, B -> (1/2 + 0)/2 = 1/4; average 5/8
    assert mean_of_image_ious(pairs) == pytest.approx(5 / 8)


def test_report_formats():
    report = evaluate_pairs(two_image_fixture())
    table = report.format_table()
    assert "Mean IoU" in table and "58.33" in table and "n/a" in table
    kv = dict(line.split(" = ") for line in report.format_keyvalue().splitlines())
    assert float(kv["mean_iou"]) == pytest.approx(7 / 12)
    assert kv["images"] == "2" and kv["iou.bird"] == "nan"
    assert isinstance(IoUReport.from_confusion(report.confusion).mean, float)


def write_dir(path, labels):
    path.mkdir()
    for name, label in labels.items():
        write_label(path / f"{name}.png", label)


def test_evaluate_dataset_copies_score_one(tmp_path):
    rng = np.random.default_rng(0)
    labels = {f"im{i}": rng.integers(0, 21, (6, 5)).astype(np.uint8) for i in range(3)}
    write_dir(tmp_path / "gt", labels)
    report = evaluate_dataset(tmp_path / "gt", tmp_path / "gt")
    assert report.mean == 1.0 and report.num_images == 3


def test_evaluate_dataset_all_background(tmp_path):
    gt = np.zeros((4, 4), np.uint8)
    gt[:2, :2] = 5
    gt[3, 3] = VOID
    write_dir(tmp_path / "gt", {"a": gt})
    write_dir(tmp_path / "pred", {"a": np.zeros((4, 4), np.uint8)})
    report = evaluate_dataset(tmp_path / "pred", tmp_path / "gt")
    # class 0: TP 11, FP 4 -> 11/15; class 5: 0
    assert report.per_class[0] == pytest.approx(11 / 15)
    assert report.per_class[5] == 0
    assert report.mean == pytest.approx(11 / 30)


def test_evaluate_dataset_errors(tmp_path):
    (tmp_path / "empty").mkdir()
    with pytest.raises(EvaluationError):
        evaluate_dataset(tmp_path / "empty", tmp_path / "empty")
    write_dir(tmp_path / "gt", {"a": np.zeros((2, 2), np.uint8)})
    write_dir(tmp_path / "pred", {"b": np.zeros((2, 2), np.uint8)})
    with pytest.raises(EvaluationError, match="a"):
        evaluate_dataset(tmp_path / "pred", tmp_path / "gt")
    write_label(tmp_path / "pred" / "a.png", np.zeros((3, 2), np.uint8))
    with pytest.raises(EvaluationError, match="a"):
        evaluate_dataset(tmp_path / "pred", tmp_path / "gt")
