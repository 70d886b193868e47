"""Benchmark suite: per-material render metrics and chart-ready CSVs.

Wall-clock time is recorded but treated as informational; the stable,
assertable outputs are evaluation counts and byte sizes. Everything except
wall_time is byte-identical across reruns of the same suite.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from scatterkit.errors import (
    EmptyGroupError,
    InvalidInputError,
    IoFailureError,
    ScatterkitError,
)
from scatterkit.factored.archive import load_factored_archive
from scatterkit.library import LibraryEntry
from scatterkit.materials.archive import load_material_archive
from scatterkit.materials.types import ALLOWED_K, MaterialType
from scatterkit.render import (
    FactoredBinding,
    ImageFormat,
    RenderSettings,
    build_preview_scene,
    render,
    write_image,
)

TIMES_CSV = "times_by_material.csv"
STORAGE_CSV = "storage_by_material.csv"
AGGREGATE_CSV = "homo_vs_hetero.csv"

_TIMES_COLUMNS = ("material", "material_type", "k", "wall_time_s", "bssrdf_eval_count")
_STORAGE_COLUMNS = (
    "material",
    "material_type",
    "k",
    "factored_storage_bytes",
    "raw_storage_bytes",
)
_AGGREGATE_COLUMNS = (
    "group",
    "record_count",
    "mean_wall_time_s",
    "mean_bssrdf_eval_count",
    "mean_factored_storage_bytes",
    "mean_raw_storage_bytes",
)


@dataclass(frozen=True)
class BenchmarkRecord:
    material: str
    material_type: MaterialType
    k: int
    wall_time_s: float
    bssrdf_eval_count: int
    factored_storage_bytes: int
    raw_storage_bytes: int
    image_path: str
    error: str | None = None

    def __post_init__(self):
        if self.material_type is MaterialType.HOMOGENEOUS:
            if self.k != 1:
                raise InvalidInputError("homogeneous records must have k = 1")
        elif self.k not in ALLOWED_K:
            raise InvalidInputError(f"k must be one of {ALLOWED_K}, got {self.k}")
        for name in ("wall_time_s", "bssrdf_eval_count", "factored_storage_bytes", "raw_storage_bytes"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"{name} must be nonnegative")

    @property
    def failed(self) -> bool:
        return self.error is not None


def run_benchmark_suite(
    entries: Sequence[LibraryEntry],
    settings: RenderSettings,
    seed: int,
    out_dir: str | Path,
    scene_builder: Callable = build_preview_scene,
    use_k: int | None = None,
    progress: Callable[[str], None] | None = None,
) -> list[BenchmarkRecord]:
    """Render every entry against the identical scene template and settings.

    A material that fails to load or render yields a failed record (error
    message set, metrics zero) and the suite continues. `use_k` overrides
    each entry's default rank, for rerunning the same materials at another
    rank.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailureError(f"cannot create benchmark directory {out_dir}: {exc}") from exc

    records = []
    for entry in entries:
        descriptor = entry.descriptor
        k = descriptor.k_parameter if use_k is None else use_k
        # failed records still satisfy the record's k/type invariants, so a
        # nonsensical override is reported under the entry's own rank
        record_k = k
        if descriptor.material_type is MaterialType.HOMOGENEOUS:
            record_k = k if k == 1 else descriptor.k_parameter
        elif k not in ALLOWED_K:
            record_k = descriptor.k_parameter
        try:
            factored_path = entry.factored_paths[k]
        except KeyError:
            records.append(
                BenchmarkRecord(
                    descriptor.name, descriptor.material_type, record_k,
                    0.0, 0, 0, 0, "",
                    error=f"no factored archive at k={k}",
                )
            )
            continue
        try:
            factored = load_factored_archive(factored_path)
            _, samples, _ = load_material_archive(entry.measured_path)
            scene = scene_builder(FactoredBinding(factored, samples))
            report = render(scene, settings, seed)
            image_name = f"{entry.measured_path.stem}-k{factored.k}.png"
            write_image(report.image, out_dir / image_name, ImageFormat.PNG8_SRGB)
            record = BenchmarkRecord(
                descriptor.name,
                descriptor.material_type,
                factored.k,
                report.wall_time,
                report.bssrdf_eval_count,
                factored_path.stat().st_size,
                entry.measured_path.stat().st_size,
                image_name,
            )
        except ScatterkitError as exc:
            record = BenchmarkRecord(
                descriptor.name, descriptor.material_type, record_k, 0.0, 0, 0, 0, "",
                error=str(exc),
            )
        records.append(record)
        if progress:
            status = record.error or f"{record.wall_time_s:.2f}s, {record.bssrdf_eval_count} evals"
            progress(f"{descriptor.name} [{descriptor.material_type.value} k={record.k}]: {status}")
    return records


@dataclass(frozen=True)
class GroupAggregate:
    group: str
    record_count: int
    mean_wall_time_s: float
    mean_bssrdf_eval_count: float
    mean_factored_storage_bytes: float
    mean_raw_storage_bytes: float


def aggregate(
    records: Iterable[BenchmarkRecord], group_by: str = "material_type"
) -> dict[str, GroupAggregate]:
    """Arithmetic means per group over the successful records."""
    if group_by not in ("material_type", "k"):
        raise InvalidInputError(f"cannot group by {group_by!r}")
    groups: dict[str, list[BenchmarkRecord]] = {}
    for record in records:
        if record.failed:
            continue
        value = getattr(record, group_by)
        key = value.value if isinstance(value, MaterialType) else str(value)
        groups.setdefault(key, []).append(record)
    if not groups:
        raise EmptyGroupError("no successful records to aggregate")

    out = {}
    for key in sorted(groups):
        members = groups[key]
        n = len(members)
        out[key] = GroupAggregate(
            group=key,
            record_count=n,
            mean_wall_time_s=sum(r.wall_time_s for r in members) / n,
            mean_bssrdf_eval_count=sum(r.bssrdf_eval_count for r in members) / n,
            mean_factored_storage_bytes=sum(r.factored_storage_bytes for r in members) / n,
            mean_raw_storage_bytes=sum(r.raw_storage_bytes for r in members) / n,
        )
    return out


def _write_csv(path: Path, columns: tuple[str, ...], rows: Iterable[tuple]) -> None:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            writer.writerows(rows)
    except OSError as exc:
        raise IoFailureError(f"cannot write chart data {path}: {exc}") from exc


def emit_chart_data(
    records: Sequence[BenchmarkRecord], out_dir: str | Path
) -> dict[str, Path]:
    """Write the three chart CSVs; returns {chart name: path}.

    Per-material files carry one row per record (floats via repr, so a
    reparse reproduces the values exactly); the aggregate file carries one
    row per material type.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailureError(f"cannot create chart directory {out_dir}: {exc}") from exc

    times = out_dir / TIMES_CSV
    storage = out_dir / STORAGE_CSV
    aggregates = out_dir / AGGREGATE_CSV

    _write_csv(
        times,
        _TIMES_COLUMNS,
        (
            (r.material, r.material_type.value, r.k, repr(r.wall_time_s), r.bssrdf_eval_count)
            for r in records
        ),
    )
    _write_csv(
        storage,
        _STORAGE_COLUMNS,
        (
            (r.material, r.material_type.value, r.k, r.factored_storage_bytes, r.raw_storage_bytes)
            for r in records
        ),
    )
    successful = [r for r in records if not r.failed]
    rows = []
    if successful:
        rows = [
            (
                agg.group,
                agg.record_count,
                repr(agg.mean_wall_time_s),
                repr(agg.mean_bssrdf_eval_count),
                repr(agg.mean_factored_storage_bytes),
                repr(agg.mean_raw_storage_bytes),
            )
            for agg in aggregate(successful).values()
        ]
    _write_csv(aggregates, _AGGREGATE_COLUMNS, rows)
    return {"times": times, "storage": storage, "aggregates": aggregates}


def _read_rows(path: Path, expected: tuple[str, ...]) -> list[dict[str, str]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader, ()))
            if header != expected:
                raise InvalidInputError(f"{path}: unexpected columns {header}")
            return [dict(zip(expected, row)) for row in reader]
    except OSError as exc:
        raise IoFailureError(f"cannot read chart data {path}: {exc}") from exc


def read_times_csv(path: str | Path) -> list[dict[str, str]]:
    return _read_rows(Path(path), _TIMES_COLUMNS)


def read_storage_csv(path: str | Path) -> list[dict[str, str]]:
    return _read_rows(Path(path), _STORAGE_COLUMNS)


def read_aggregate_csv(path: str | Path) -> list[dict[str, str]]:
    return _read_rows(Path(path), _AGGREGATE_COLUMNS)
