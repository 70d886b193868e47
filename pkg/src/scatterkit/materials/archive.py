"""Measured-material archive I/O.

Binary layout (all integers little-endian):

    offset 0   magic ``GPSS`` (4 bytes)
    offset 4   format version, u16 (currently 1)
    offset 6   header length h, u32
    offset 10  JSON header, UTF-8, h bytes
    10 + h     sample table, n rows of 7 float32: x y z nx ny nz area
    then       three n x n channel matrices (R, G, B), row-major float32

The JSON header carries ``name``, ``material_type``, ``k_parameter`` and
``n``. The file must end exactly after the blue matrix; any surplus or
shortfall is reported as a dimension mismatch. Matrices are stored receiver-
major: row i is everything observed at sample i.

A second, much smaller on-disk form exists for analytic materials: a JSON
file with dipole diffusion parameters and no measured data. ``load_dipole_material``
reads those.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from scatterkit.errors import (
    DimensionMismatchError,
    InvalidInputError,
    IoFailureError,
    MalformedHeaderError,
    NegativeEntryError,
    UnsupportedVersionError,
)
from scatterkit.materials.types import (
    CHANNELS,
    Channel,
    DipoleParameters,
    MaterialDescriptor,
    MaterialType,
    ScatteringMatrix,
    SurfaceSampleSet,
    channel_stack,
)

MAGIC = b"GPSS"
VERSION = 1
_FIXED_PREFIX = 10  # magic + version + header length


def _header_bytes(name: str, material_type: MaterialType, k_parameter: int, n: int) -> bytes:
    header = {
        "k_parameter": int(k_parameter),
        "material_type": material_type.value,
        "n": int(n),
        "name": name,
    }
    return json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")


def save_material_archive(
    path: str | Path,
    name: str,
    material_type: MaterialType,
    k_parameter: int,
    samples: SurfaceSampleSet,
    matrices: dict[Channel, ScatteringMatrix],
) -> int:
    """Write a measured-material archive. Returns the number of bytes written."""
    stack = channel_stack(matrices)
    n = samples.count
    if stack.shape[1] != n or stack.shape[2] != n:
        raise DimensionMismatchError(
            f"matrices are {stack.shape[1]}x{stack.shape[2]} but the sample set has {n} samples"
        )
    # Exercises the descriptor invariants (k rules per material type) before
    # any bytes hit the disk.
    MaterialDescriptor(name, material_type, k_parameter, source=Path(path))

    header = _header_bytes(name, material_type, k_parameter, n)
    table = np.column_stack(
        [samples.positions, samples.normals, samples.areas[:, None]]
    ).astype("<f4")
    payload = stack.astype("<f4")

    try:
        with open(path, "wb") as fh:
            written = fh.write(MAGIC)
            written += fh.write(struct.pack("<HI", VERSION, len(header)))
            written += fh.write(header)
            written += fh.write(table.tobytes())
            written += fh.write(payload.tobytes())
    except OSError as exc:
        raise IoFailureError(f"cannot write material archive {path}: {exc}") from exc
    return written


def _read_header(blob: bytes, path):
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
    raw = blob[_FIXED_PREFIX : _FIXED_PREFIX + header_len]
    try:
        header = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedHeaderError(f"{path}: header is not valid JSON: {exc}", offset=_FIXED_PREFIX)
    if not isinstance(header, dict):
        raise MalformedHeaderError(f"{path}: header must be a JSON object", offset=_FIXED_PREFIX)
    return header, _FIXED_PREFIX + header_len


def _header_field(header: dict, path, key: str, kind):
    if key not in header:
        raise MalformedHeaderError(f"{path}: header misses required key", field=key)
    value = header[key]
    if kind is int and isinstance(value, bool) or not isinstance(value, kind):
        raise MalformedHeaderError(f"{path}: header key has wrong type {type(value).__name__}", field=key)
    return value


def load_material_archive(
    path: str | Path,
) -> tuple[MaterialDescriptor, SurfaceSampleSet, dict[Channel, ScatteringMatrix]]:
    """Read a measured-material archive written by ``save_material_archive``.

    Errors name the byte offset (or header field) at fault: bad magic at 0,
    unsupported version at 4, an oversized header length at 6, JSON problems
    at 10, and negative matrix entries at their exact payload position.
    """
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IoFailureError(f"cannot read material archive {path}: {exc}") from exc

    header, data_start = _read_header(blob, path)
    name = _header_field(header, path, "name", str)
    type_str = _header_field(header, path, "material_type", str)
    try:
        material_type = MaterialType(type_str)
    except ValueError:
        raise MalformedHeaderError(
            f"{path}: unknown material type {type_str!r}", field="material_type"
        )
    k_parameter = _header_field(header, path, "k_parameter", int)
    n = _header_field(header, path, "n", int)
    if n <= 0:
        raise MalformedHeaderError(f"{path}: sample count must be positive, got {n}", field="n")

    table_bytes = n * 7 * 4
    matrix_bytes = n * n * 4
    expected = data_start + table_bytes + 3 * matrix_bytes
    if len(blob) != expected:
        raise DimensionMismatchError(
            f"{path}: payload for n={n} needs {expected} bytes total, file has {len(blob)}"
        )

    table = np.frombuffer(blob, dtype="<f4", count=n * 7, offset=data_start)
    table = table.reshape(n, 7).astype(np.float64)
    samples = SurfaceSampleSet(table[:, 0:3], table[:, 3:6], table[:, 6])

    matrices: dict[Channel, ScatteringMatrix] = {}
    for ci, channel in enumerate(CHANNELS):
        start = data_start + table_bytes + ci * matrix_bytes
        values = np.frombuffer(blob, dtype="<f4", count=n * n, offset=start)
        values = values.reshape(n, n).astype(np.float64)
        neg = np.argwhere(values < 0.0)
        if neg.size:
            i, j = map(int, neg[0])
            at = start + (i * n + j) * 4
            raise NegativeEntryError(
                f"{path}: channel {channel.value} entry ({i}, {j}) is negative "
                f"at byte offset {at}"
            )
        matrices[channel] = ScatteringMatrix(channel, values)

    descriptor = MaterialDescriptor(name, material_type, k_parameter, source=path)
    return descriptor, samples, matrices


def load_dipole_material(path: str | Path) -> MaterialDescriptor:
    """Read an analytic homogeneous material from its JSON parameter file.

    Expected keys: ``name``, ``sigma_s_prime`` (3 floats), ``sigma_a``
    (3 floats), ``eta``, and optional ``units`` (``"1/m"`` default, or
    ``"1/mm"`` which scales coefficients by 1000).
    """
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot read material file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedHeaderError(f"{path}: not valid JSON: {exc}", offset=0)
    if not isinstance(doc, dict):
        raise MalformedHeaderError(f"{path}: document must be a JSON object", offset=0)

    name = _header_field(doc, path, "name", str)
    eta = _header_field(doc, path, "eta", (int, float))
    units = doc.get("units", "1/m")
    if units not in ("1/m", "1/mm"):
        raise MalformedHeaderError(f"{path}: unknown units {units!r}", field="units")
    scale = 1000.0 if units == "1/mm" else 1.0

    def coefficients(key):
        raw = _header_field(doc, path, key, list)
        if len(raw) != 3 or not all(isinstance(v, (int, float)) for v in raw):
            raise MalformedHeaderError(f"{path}: expected three numbers", field=key)
        return tuple(float(v) * scale for v in raw)

    try:
        params = DipoleParameters(coefficients("sigma_s_prime"), coefficients("sigma_a"), float(eta))
    except InvalidInputError as exc:
        raise MalformedHeaderError(f"{path}: {exc}", field="dipole parameters")
    return MaterialDescriptor(
        name, MaterialType.HOMOGENEOUS, k_parameter=1, source=None, dipole_params=params
    )
