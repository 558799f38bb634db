"""Grayscale image I/O.  PGM (P5) is the lossless interchange format."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

LUMA = np.array([0.299, 0.587, 0.114])


def to_gray(arr):
    """BT.601 luma of an RGB(A) array, or the array itself if already 2-D."""
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 3:
        return arr[..., :3] @ LUMA
    if arr.ndim != 2:
        raise ValueError(f"unsupported image shape {arr.shape}")
    return arr


def read_image(path):
    """Load an image as a float array in [0, 1]."""
    with Image.open(path) as im:
        if im.mode in ("I;16", "I;16B", "I;16L", "I"):
            arr = np.asarray(im, dtype=float)
            top = 65535.0 if im.mode.startswith("I;16") else max(arr.max(), 1.0)
            return arr / top
        if im.mode not in ("L", "RGB", "RGBA"):
            im = im.convert("RGB")
        arr = np.asarray(im, dtype=float) / 255.0
    return to_gray(arr)


def to_uint8(img):
    return np.rint(np.clip(np.asarray(img, dtype=float), 0.0, 1.0) * 255).astype(np.uint8)


def write_pgm(path, img):
    """Binary P5 with maxval 255."""
    data = to_uint8(img)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def write_image(path, img):
    """PGM for ``.pgm`` paths, otherwise whatever Pillow infers from the suffix."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        write_pgm(path, img)
    else:
        Image.fromarray(to_uint8(img), mode="L").save(path)
