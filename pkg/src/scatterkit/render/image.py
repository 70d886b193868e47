"""Image output: 8-bit sRGB PNG for looking at, float PFM for measuring.

PFM uses the de-facto layout: ``PF\\n<width> <height>\\n<scale>\\n`` then
rows bottom-to-top, and a negative scale marking little-endian floats. The
PFM path must round-trip bit-exactly; it is what the determinism tests
compare.
"""

from __future__ import annotations

import enum
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from scatterkit.errors import InvalidInputError, IoFailureError, MalformedHeaderError


class ImageFormat(str, enum.Enum):
    PNG8_SRGB = "PNG8_sRGB"
    PFM_LINEAR = "PFM_linear"


def srgb_encode(linear: np.ndarray) -> np.ndarray:
    """Linear [0,1] to the sRGB transfer curve, elementwise."""
    a = np.clip(linear, 0.0, 1.0)
    return np.where(a <= 0.0031308, 12.92 * a, 1.055 * a ** (1.0 / 2.4) - 0.055)


def _check_buffer(buffer: np.ndarray) -> np.ndarray:
    arr = np.asarray(buffer)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidInputError(f"expected (h, w, 3) buffer, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("image buffer contains non-finite values")
    return arr


def write_image(buffer: np.ndarray, path: str | Path, fmt: ImageFormat) -> int:
    """Write the radiance buffer; returns bytes written."""
    arr = _check_buffer(buffer)
    path = Path(path)
    fmt = ImageFormat(fmt)
    try:
        if fmt is ImageFormat.PNG8_SRGB:
            quantized = np.rint(srgb_encode(arr.astype(np.float64)) * 255.0).astype(np.uint8)
            Image.fromarray(quantized, mode="RGB").save(path, format="PNG")
            return path.stat().st_size
        h, w, _ = arr.shape
        header = f"PF\n{w} {h}\n-1.0\n".encode("ascii")
        body = np.ascontiguousarray(arr[::-1], dtype="<f4").tobytes()
        with open(path, "wb") as fh:
            written = fh.write(header)
            written += fh.write(body)
        return written
    except OSError as exc:
        raise IoFailureError(f"cannot write image {path}: {exc}") from exc


def read_pfm(path: str | Path) -> np.ndarray:
    """Read a color PFM written by write_image back into (h, w, 3) float32."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IoFailureError(f"cannot read image {path}: {exc}") from exc
    parts = blob.split(b"\n", 3)
    if len(parts) != 4 or parts[0] != b"PF":
        raise MalformedHeaderError(f"{path}: not a color PFM", offset=0)
    try:
        w, h = (int(v) for v in parts[1].split())
        scale = float(parts[2])
    except ValueError as exc:
        raise MalformedHeaderError(f"{path}: bad PFM dimensions: {exc}", offset=3)
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.frombuffer(parts[3], dtype=dtype, count=w * h * 3)
    if data.size != w * h * 3:
        raise MalformedHeaderError(f"{path}: truncated PFM payload", offset=len(blob) - len(parts[3]))
    return np.ascontiguousarray(data.reshape(h, w, 3)[::-1]).astype(np.float32)
