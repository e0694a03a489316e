"""Mask ingestion (text grids, PGM) and named weight functions."""

from __future__ import annotations

import os
from typing import Callable, Dict

import numpy as np

from .errors import VisboundError


def load_mask_text(path: str) -> np.ndarray:
    """Text raster: '#' marks cells inside, '.' outside. Rows must align."""
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip() != ""]
    if not lines:
        raise VisboundError("bad-mask", f"{path}: no rows")
    width = len(lines[0])
    rows = []
    for i, ln in enumerate(lines):
        if len(ln) != width:
            raise VisboundError("bad-mask", f"{path}: ragged row {i}")
        bad = set(ln) - {"#", "."}
        if bad:
            raise VisboundError("bad-mask", f"{path}: invalid characters {sorted(bad)}")
        rows.append([c == "#" for c in ln])
    return np.asarray(rows, dtype=bool)


def _read_pgm_tokens(data: bytes, count: int, start: int):
    """Read whitespace/comment-separated ASCII tokens from a PGM header."""
    tokens = []
    i = start
    while len(tokens) < count:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < len(data) and not data[j : j + 1].isspace():
            j += 1
        if j == i:
            raise VisboundError("bad-mask", "truncated PGM header")
        tokens.append(data[i:j])
        i = j
    return tokens, i


def load_mask_pgm(path: str) -> np.ndarray:
    """PGM (P2 ascii or P5 binary); cells brighter than maxval/2 are inside."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] not in (b"P2", b"P5"):
        raise VisboundError("bad-mask", f"{path}: not a P2/P5 PGM")
    magic = data[:2]
    tokens, pos = _read_pgm_tokens(data, 3, 2)
    width, height, maxval = (int(t) for t in tokens)
    if width <= 0 or height <= 0 or maxval <= 0:
        raise VisboundError("bad-mask", f"{path}: bad dimensions")
    if magic == b"P2":
        values = np.array(data[pos:].split(), dtype=int)
        if values.size != width * height:
            raise VisboundError("bad-mask", f"{path}: pixel count mismatch")
    else:
        pos += 1  # single whitespace after maxval
        dtype = np.dtype(np.uint8 if maxval < 256 else ">u2")
        need = width * height * dtype.itemsize
        if len(data) - pos < need:
            raise VisboundError("bad-mask", f"{path}: pixel count mismatch")
        values = np.frombuffer(data, dtype=dtype, offset=pos, count=width * height)
    img = values.reshape(height, width)
    return img > (maxval / 2)


def load_mask(path: str) -> np.ndarray:
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        return load_mask_pgm(path)
    return load_mask_text(path)


def _uniform(params: dict, h: float) -> Callable[[np.ndarray], np.ndarray]:
    value = float(params.get("value", 1.0))

    def w(coords: np.ndarray) -> np.ndarray:
        return np.full(coords.shape[0], value)

    return w


def _radial_power(params: dict, h: float) -> Callable[[np.ndarray], np.ndarray]:
    cx, cy = (float(v) for v in params["center"])
    a = float(params["exponent"])
    floor = float(params.get("floor", h / 2))

    def w(coords: np.ndarray) -> np.ndarray:
        r = np.hypot(coords[:, 0] - cx, coords[:, 1] - cy)
        return np.maximum(r, floor) ** a

    return w


_WEIGHTS: Dict[str, Callable] = {"uniform": _uniform, "radial_power": _radial_power}


def make_weight(name: str, params: dict, h: float) -> Callable[[np.ndarray], np.ndarray]:
    """Weight function selected by name, as used in run configs."""
    if name not in _WEIGHTS:
        raise VisboundError("bad-weight", f"unknown weight {name!r}")
    return _WEIGHTS[name](params or {}, h)
