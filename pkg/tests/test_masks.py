"""Mask file ingestion: text rasters and both PGM flavors."""

from __future__ import annotations

import numpy as np
import pytest

from visbound import VisboundError, load_mask


def test_text_mask_roundtrip(tmp_path):
    ref = np.array([[1, 0, 1], [1, 1, 1]], dtype=bool)
    lines = ["".join("#" if v else "." for v in row) for row in ref]
    p = tmp_path / "m.txt"
    p.write_text("\n".join(lines) + "\n")
    np.testing.assert_array_equal(load_mask(str(p)), ref)


def test_text_mask_skips_blank_lines(tmp_path):
    p = tmp_path / "m.txt"
    p.write_text("##\n\n.#\n")
    assert load_mask(str(p)).shape == (2, 2)


@pytest.mark.parametrize(
    "body",
    ["", "##\n#\n", "#x\n##\n"],
    ids=["empty", "ragged", "bad-char"],
)
def test_text_mask_rejects_malformed(tmp_path, body):
    p = tmp_path / "m.txt"
    p.write_text(body)
    with pytest.raises(VisboundError, match="bad-mask"):
        load_mask(str(p))


def test_pgm_ascii(tmp_path):
    p = tmp_path / "m.pgm"
    p.write_text("P2\n# a comment\n3 2\n255\n255 0 255\n0 255 0\n")
    ref = np.array([[1, 0, 1], [0, 1, 0]], dtype=bool)
    np.testing.assert_array_equal(load_mask(str(p)), ref)


def test_pgm_binary(tmp_path):
    p = tmp_path / "m.pgm"
    pixels = bytes([255, 0, 255, 0, 255, 0])
    p.write_bytes(b"P5\n3 2\n255\n" + pixels)
    ref = np.array([[1, 0, 1], [0, 1, 0]], dtype=bool)
    np.testing.assert_array_equal(load_mask(str(p)), ref)


def test_pgm_threshold_is_half_maxval(tmp_path):
    p = tmp_path / "m.pgm"
    p.write_text("P2\n2 1\n100\n50 51\n")
    np.testing.assert_array_equal(load_mask(str(p)), [[False, True]])


def test_pgm_rejects_wrong_magic_and_truncation(tmp_path):
    p = tmp_path / "m.pgm"
    p.write_text("P3\n1 1\n255\n1 2 3\n")
    with pytest.raises(VisboundError, match="bad-mask"):
        load_mask(str(p))
    p.write_bytes(b"P5\n4 4\n255\n\x00\x01")
    with pytest.raises(VisboundError, match="bad-mask"):
        load_mask(str(p))
