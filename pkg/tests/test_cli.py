import subprocess
import sys

import numpy as np
import pytest

from synseg.cli import build_parser, run
from synseg.voc import read_label, write_rgb

TINY = "width = 32\nheight = 24\nclasses = car, cat\nsamples_per_class = 2\n"


def tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text(TINY)
    return p


def test_no_subcommand(capsys):
    assert run([]) == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_and_bad_value(capsys):
    assert run(["plan", "--stage", "baseline", "--bogus"]) == 1
    assert run(["render", "--threads", "many"]) == 1
    assert run(["--threads", "0", "plan", "--stage", "baseline"]) == 1


def test_help_lists_flags_and_defaults(capsys):
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["convert", "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for flag in ("--method", "--gamma", "--gmm-components", "--spatial-weight",
                 "--bilateral-color-sigma", "--inside-fg-prob", "--seed", "--threads"):
        assert flag in out
    assert "[50]" in out and "[0.99]" in out
    assert run(["--help"]) == 0


def test_render_deterministic(tmp_path, cfg, capsys):
    assert run(["render", "--config", str(cfg), "--out", str(tmp_path / "a"), "--seed", "7"]) == 0
    assert run(["--seed", "7", "render", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    assert run(["render", "--config", str(cfg), "--out", str(tmp_path / "c"), "--seed", "7",
                "--threads", "8"]) == 0
    a = tree(tmp_path / "a")
    assert len(a) == 9
    assert a == tree(tmp_path / "b") == tree(tmp_path / "c")
    assert run(["render", "--config", str(cfg), "--out", str(tmp_path / "d"), "--seed", "8"]) == 0
    assert tree(tmp_path / "d") != a


def test_render_overrides_and_env(tmp_path, cfg, monkeypatch):
    monkeypatch.setenv("SYNSEG_OUT", str(tmp_path / "env"))
    assert run(["render", "--config", str(cfg), "--samples-per-class", "1", "--size", "16x12"]) == 0
    labels = sorted((tmp_path / "env" / "labels").glob("*.png"))
    assert len(labels) == 2 and read_label(labels[0]).shape == (12, 16)
    assert run(["render", "--config", str(cfg), "--size", "sixteen"]) == 1
    monkeypatch.delenv("SYNSEG_OUT")
    assert run(["render", "--config", str(cfg)]) == 1


def test_render_runtime_errors(tmp_path):
    assert run(["render", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert run(["render", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_evaluate_self_is_perfect(tmp_path, cfg, capsys):
    run(["render", "--config", str(cfg), "--out", str(tmp_path / "d")])
    capsys.readouterr()
    labels = str(tmp_path / "d" / "labels")
    assert run(["evaluate", "--pred", labels, "--gt", labels, "--report", str(tmp_path / "r.txt")]) == 0
    out = capsys.readouterr().out
    assert "Mean IoU" in out and "mean_iou = 1.0" in out
    assert "mean_iou = 1.0" in (tmp_path / "r.txt").read_text()


def test_evaluate_errors(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert run(["evaluate", "--pred", str(tmp_path / "empty"), "--gt", str(tmp_path / "empty")]) == 2
    assert "error" in capsys.readouterr().err
    assert run(["evaluate", "--pred", str(tmp_path)]) == 1


def test_evaluate_custom_classes(tmp_path, cfg, capsys):
    from synseg.voc import VOC
    run(["render", "--config", str(cfg), "--out", str(tmp_path / "d")])
    names = tmp_path / "names.txt"
    names.write_text("\n".join([VOC.names[0]] + [n.upper() for n in VOC.names[1:]]))
    labels = str(tmp_path / "d" / "labels")
    assert run(["evaluate", "--pred", labels, "--gt", labels, "--classes", str(names)]) == 0
    assert "iou.CAR = 1.0" in capsys.readouterr().out


def test_plan(tmp_path, capsys):
    assert run(["plan", "--stage", "synthetic"]) == 0
    kv = dict(line.split(" = ", 1) for line in capsys.readouterr().out.splitlines())
    assert kv["trainable_layers"] == "score_pool3,score_pool4,upscore2,upscore_pool4,upscore8"
    assert float(kv["base_learning_rate"]) == 1e-6
    m = tmp_path / "manifest.txt"
    m.write_text("")
    assert run(["plan", "--stage", "baseline", "--dataset", str(m), "--out", str(tmp_path / "p")]) == 0
    assert f"dataset_refs = {m}" in (tmp_path / "p").read_text()
    assert run(["plan", "--stage", "x"]) == 1
    assert run(["plan", "--stage", "baseline", "--dataset", str(tmp_path / "nope")]) == 2


@pytest.fixture
def boxes(tmp_path):
    img = np.zeros((20, 24, 3), np.uint8)
    img[:] = (20, 40, 200)
    img[6:14, 7:17] = (230, 20, 20)
    (tmp_path / "img").mkdir()
    write_rgb(tmp_path / "img" / "a.png", img)
    p = tmp_path / "boxes.txt"
    p.write_text("a car 5 4 19 16\n")
    return p


@pytest.mark.parametrize("method", ["crf", "grabcut"])
def test_convert(tmp_path, boxes, method):
    out = tmp_path / method
    assert run(["convert", "--images", str(tmp_path / "img"), "--boxes", str(boxes),
                "--out", str(out), "--method", method, "--iterations", "2"]) == 0
    label = read_label(out / "a.png")
    assert (label[7:13, 8:16] == 7).all()
    assert (out / "manifest.txt").read_text() == "a a.png\n"


def test_convert_config_file(tmp_path, boxes):
    conf = tmp_path / "conv.cfg"
    conf.write_text("method = crf\nspatial_weight = 0\nbilateral_weight = 0\n")
    assert run(["convert", "--images", str(tmp_path / "img"), "--boxes", str(boxes),
                "--out", str(tmp_path / "o"), "--config", str(conf)]) == 0
    label = read_label(tmp_path / "o" / "a.png")
    assert (label[4:16, 5:19] == 7).all() and label.sum() == 7 * 12 * 14
    conf.write_text("speed = fast\n")
    assert run(["convert", "--images", str(tmp_path / "img"), "--boxes", str(boxes),
                "--out", str(tmp_path / "o"), "--config", str(conf)]) == 1
    conf.write_text("method = magic\n")
    assert run(["convert", "--images", str(tmp_path / "img"), "--boxes", str(boxes),
                "--out", str(tmp_path / "o"), "--config", str(conf)]) == 1


def test_convert_runtime_errors(tmp_path, boxes):
    assert run(["convert", "--images", str(tmp_path / "nowhere"), "--boxes", str(boxes),
                "--out", str(tmp_path / "o")]) == 2
    assert run(["convert", "--images", str(tmp_path / "img"), "--boxes", str(boxes),
                "--out", str(tmp_path / "o"), "--gamma", "-1"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "synseg"], capture_output=True, text=True)
    assert proc.returncode == 1 and "usage" in proc.stderr
