"""Factored-material archive I/O.

Binary layout (integers little-endian):

    offset 0   magic ``GPSF`` (4 bytes)
    offset 4   format version, u16 (currently 1)
    offset 6   header length h, u32
    offset 10  JSON header, UTF-8, h bytes: k, n_i, n_o and the per-channel
               rho at full float64 precision
    10 + h     three channel blocks in R, G, B order

Each channel block is one u32 channel tag (0, 1, 2) followed by the float32
factors u (n_i * k), s (k) and v (n_o * k), contiguous in that order. The
payload therefore totals exactly 3 * (k * (n_i + n_o + 1) + 1) * 4 bytes,
and ``storage_bytes`` reproduces the full file size from the model alone.

rho lives in the JSON header rather than the float32 payload so that a
save/load round trip preserves it bit-exactly; optimizer output sitting
right on a rho bound must not drift outside it through a narrowing cast.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from scatterkit.errors import (
    DimensionMismatchError,
    IoFailureError,
    MalformedHeaderError,
    UnsupportedVersionError,
)
from scatterkit.factored.model import ChannelFactors, FactoredBSSRDF
from scatterkit.factored.transform import TransformParams
from scatterkit.materials.types import CHANNELS

MAGIC = b"GPSF"
VERSION = 1
_FIXED_PREFIX = 10


def _header_bytes(factored: FactoredBSSRDF) -> bytes:
    header = {
        "k": factored.k,
        "n_i": factored.n_receivers,
        "n_o": factored.n_sources,
        "rho": {c.value: factored.channels[c].params.rho for c in CHANNELS},
    }
    return json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _payload_bytes(k: int, n_i: int, n_o: int) -> int:
    return 3 * (k * (n_i + n_o + 1) + 1) * 4


def storage_bytes(factored: FactoredBSSRDF) -> int:
    """Exact archive size in bytes for this model."""
    header = _header_bytes(factored)
    return _FIXED_PREFIX + len(header) + _payload_bytes(
        factored.k, factored.n_receivers, factored.n_sources
    )


def save_factored_archive(factored: FactoredBSSRDF, path: str | Path) -> int:
    """Write the archive. Returns bytes written, always == storage_bytes()."""
    header = _header_bytes(factored)
    try:
        with open(path, "wb") as fh:
            written = fh.write(MAGIC)
            written += fh.write(struct.pack("<HI", VERSION, len(header)))
            written += fh.write(header)
            for tag, channel in enumerate(CHANNELS):
                cf = factored.channels[channel]
                written += fh.write(struct.pack("<I", tag))
                for arr in (cf.u, cf.s, cf.v):
                    written += fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    except OSError as exc:
        raise IoFailureError(f"cannot write factored archive {path}: {exc}") from exc
    return written


def load_factored_archive(path: str | Path) -> FactoredBSSRDF:
    """Read an archive written by ``save_factored_archive``."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IoFailureError(f"cannot read factored archive {path}: {exc}") from exc

    if len(blob) < _FIXED_PREFIX:
        raise MalformedHeaderError(f"{path}: truncated before header", offset=0)
    if blob[:4] != MAGIC:
        raise MalformedHeaderError(f"{path}: bad magic {blob[:4]!r}", offset=0)
    version, header_len = struct.unpack_from("<HI", blob, 4)
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: version {version} not supported", offset=4)
    if _FIXED_PREFIX + header_len > len(blob):
        raise MalformedHeaderError(
            f"{path}: declared header length {header_len} runs past end of file", offset=6
        )
    try:
        header = json.loads(blob[_FIXED_PREFIX : _FIXED_PREFIX + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedHeaderError(f"{path}: header is not valid JSON: {exc}", offset=_FIXED_PREFIX)

    def field(key, kind):
        if not isinstance(header, dict) or key not in header:
            raise MalformedHeaderError(f"{path}: header misses required key", field=key)
        value = header[key]
        if not isinstance(value, kind) or isinstance(value, bool):
            raise MalformedHeaderError(
                f"{path}: header key has wrong type {type(value).__name__}", field=key
            )
        return value

    k = field("k", int)
    n_i = field("n_i", int)
    n_o = field("n_o", int)
    rho_map = field("rho", dict)
    if n_i <= 0 or n_o <= 0 or k <= 0:
        raise MalformedHeaderError(f"{path}: dimensions must be positive", field="k")

    expected = _FIXED_PREFIX + header_len + _payload_bytes(k, n_i, n_o)
    if len(blob) != expected:
        raise DimensionMismatchError(
            f"{path}: payload for k={k}, n_i={n_i}, n_o={n_o} needs {expected} bytes total, "
            f"file has {len(blob)}"
        )

    channels = {}
    cursor = _FIXED_PREFIX + header_len
    for tag, channel in enumerate(CHANNELS):
        (found,) = struct.unpack_from("<I", blob, cursor)
        if found != tag:
            raise MalformedHeaderError(
                f"{path}: expected channel tag {tag}, found {found}", offset=cursor
            )
        cursor += 4
        if channel.value not in rho_map or not isinstance(rho_map[channel.value], (int, float)):
            raise MalformedHeaderError(f"{path}: rho missing a channel", field=f"rho.{channel.value}")
        counts = (n_i * k, k, n_o * k)
        parts = []
        for count in counts:
            parts.append(
                np.frombuffer(blob, dtype="<f4", count=count, offset=cursor).astype(np.float64)
            )
            cursor += count * 4
        u = parts[0].reshape(n_i, k)
        s = parts[1]
        v = parts[2].reshape(n_o, k)
        params = TransformParams(float(rho_map[channel.value]))
        channels[channel] = ChannelFactors(params, u, s, v)
    return FactoredBSSRDF(k, channels)
