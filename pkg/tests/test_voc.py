import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from synseg.voc import (VOC, VOID, Box, BoxAnnotation, ClassTaxonomy, LabelError,
                        decode_label_png, encode_label_png, format_box_annotations,
                        parse_box_annotations, read_label, voc_colormap, voc_palette,
                        write_label)


def reference_colormap(i):
    # straight transcription of the bit-interleaving loop
    r = g = b = 0
    c = i
    for j in range(8):
        r |= ((c >> 0) & 1) << (7 - j)
        g |= ((c >> 1) & 1) << (7 - j)
        b |= ((c >> 2) & 1) << (7 - j)
        c >>= 3
    return r, g, b


def test_colormap_known_entries():
    assert voc_colormap(0) == (0, 0, 0)
    assert voc_colormap(1) == (128, 0, 0)
    assert voc_colormap(15) == (192, 128, 128)
    assert voc_colormap(255) == (224, 224, 192)


def test_colormap_matches_reference_everywhere():
    for i in range(256):
        assert voc_colormap(i) == reference_colormap(i)
    assert voc_palette().shape == (256, 3)


@pytest.mark.parametrize("bad", [-1, 256])
def test_colormap_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        voc_colormap(bad)


def test_encoded_palette_is_bit_exact():
    label = np.array([[0, 1, 2], [15, 20, 255]], dtype=np.uint8)
    img = Image.open(io.BytesIO(encode_label_png(label)))
    assert img.mode == "P"
    pal = np.frombuffer(bytes(img.getpalette()), dtype=np.uint8).reshape(-1, 3)
    for i in list(range(21)) + [255]:
        assert tuple(pal[i]) == voc_colormap(i)


@pytest.mark.parametrize("label", [np.array([[0]]), np.array([[7, 255]])])
def test_small_round_trips(label):
    out = decode_label_png(encode_label_png(label.astype(np.uint8)))
    np.testing.assert_array_equal(out, label)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_random_round_trip(h, w, seed):
    rng = np.random.default_rng(seed)
    values = np.array(list(range(21)) + [VOID], dtype=np.uint8)
    label = rng.choice(values, size=(h, w))
    np.testing.assert_array_equal(decode_label_png(encode_label_png(label)), label)


def test_decode_rejects_out_of_range_index():
    img = Image.frombytes("P", (2, 1), bytes([3, 42]))
    img.putpalette(voc_palette().tobytes())
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    with pytest.raises(LabelError):
        decode_label_png(buf.getvalue())


def test_decode_rejects_garbage_and_rgb():
    with pytest.raises(LabelError):
        decode_label_png(b"not a png")
    buf = io.BytesIO()
    Image.new("RGB", (2, 2)).save(buf, format="PNG")
    with pytest.raises(LabelError):
        decode_label_png(buf.getvalue())


def test_encode_rejects_bad_values():
    with pytest.raises(LabelError):
        encode_label_png(np.array([[21]], dtype=np.uint8))
    with pytest.raises(LabelError):
        encode_label_png(np.zeros((2, 2, 2), dtype=np.uint8))


def test_label_file_io(tmp_path):
    label = np.arange(21, dtype=np.uint8).reshape(3, 7)
    write_label(tmp_path / "a.png", label)
    np.testing.assert_array_equal(read_label(tmp_path / "a.png"), label)


def test_taxonomy_round_trip():
    assert VOC.num_classes == 21
    for i, name in enumerate(VOC.names):
        assert VOC.index(name) == i
        assert VOC.name(VOC.index(name)) == name
    with pytest.raises(KeyError):
        VOC.index("unicorn")


def test_taxonomy_from_file(tmp_path):
    p = tmp_path / "classes.txt"
    p.write_text("\n".join(VOC.names) + "\n")
    assert ClassTaxonomy.from_file(p) == VOC


def test_box_invariants():
    b = Box(3, 2, 1, 6, 4)
    assert b.area == 12
    assert b.fits(6, 4) and not b.fits(5, 4)
    for args in [(0, 0, 0, 1, 1), (21, 0, 0, 1, 1), (1, 2, 0, 2, 1), (1, -1, 0, 1, 1)]:
        with pytest.raises(ValueError):
            Box(*args)
    ann = BoxAnnotation("x", (b,))
    ann.validate(6, 4)
    with pytest.raises(ValueError):
        ann.validate(5, 4)


def test_box_file_round_trip():
    text = "img1 car 0 0 10 5\nimg1 person 2 2 4 4  # rider\n\nimg2 aeroplane 1 1 3 3\n"
    parsed = parse_box_annotations(text.splitlines())
    assert list(parsed) == ["img1", "img2"]
    assert parsed["img1"].boxes[1] == Box(VOC.index("person"), 2, 2, 4, 4)
    again = parse_box_annotations(format_box_annotations(parsed.values()).splitlines())
    assert again == parsed


@pytest.mark.parametrize("line", ["img car 0 0 10", "img unicorn 0 0 1 1", "img car 0 0 a 1",
                                  "img car 5 0 5 1", "img background 0 0 1 1"])
def test_box_parse_errors(line):
    with pytest.raises(ValueError):
        parse_box_annotations([line])
