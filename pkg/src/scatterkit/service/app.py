"""HTTP service exposing the material/preview/benchmark workflow.

The service is a thin stateless layer over the library: the materials
directory is rescanned per request, job state lives in memory, and the
only on-disk state the service itself produces is rendered previews under
`<output_dir>/jobs/` plus any factored archives written back into the
materials directory by compress-if-needed. Restarting forgets job ids but
loses no materials or benchmark data.
"""

from __future__ import annotations

import dataclasses
import zlib
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Any, Callable

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from scatterkit.bench import (
    AGGREGATE_CSV,
    STORAGE_CSV,
    TIMES_CSV,
    read_aggregate_csv,
    read_storage_csv,
    read_times_csv,
)
from scatterkit.config import AppConfig
from scatterkit.dipole import DipoleMaterial
from scatterkit.errors import IoFailureError, ScatterkitError
from scatterkit.factored.archive import load_factored_archive, save_factored_archive
from scatterkit.factored.model import compress
from scatterkit.ga.evolve import evolve
from scatterkit.library import LibraryEntry, factored_path_for, scan_material_dir
from scatterkit.materials.archive import load_material_archive
from scatterkit.materials.types import ALLOWED_K, MaterialDescriptor, MaterialType
from scatterkit.render import (
    DipoleBinding,
    FactoredBinding,
    ImageFormat,
    build_preview_scene,
    render,
    write_image,
)
from scatterkit.service.jobs import JobManager, JobStatus
from scatterkit.service.schemas import (
    BenchLatest,
    JobCreated,
    JobStateOut,
    MaterialDetail,
    MaterialSummary,
    MaterialVariant,
    PreviewRequest,
)

BENCH_SUBDIR = "bench"
JOBS_SUBDIR = "jobs"

_TYPE_NAMES = tuple(t.value for t in MaterialType)


def default_preview_seed(name: str, material_type: str, k: int) -> int:
    """Stable per-(material, type, k) seed so previews are cacheable."""
    return zlib.crc32(f"preview|{name}|{material_type}|{k}".encode()) & 0x7FFFFFFF


def _compression_seed(stem: str, k: int) -> int:
    return zlib.crc32(f"ga|{stem}|{k}".encode()) & 0x7FFFFFFF


def _summary(descriptor: MaterialDescriptor) -> MaterialSummary:
    return MaterialSummary(
        name=descriptor.name,
        material_type=descriptor.material_type.value,
        default_k=descriptor.k_parameter,
    )


def _variant(descriptor: MaterialDescriptor, sample_count: int | None) -> MaterialVariant:
    hetero = descriptor.material_type is MaterialType.HETEROGENEOUS
    return MaterialVariant(
        material_type=descriptor.material_type.value,
        applicable=hetero,
        allowed_k=list(ALLOWED_K) if hetero else [1],
        default_k=descriptor.k_parameter,
        sample_count=sample_count,
        analytic=descriptor.dipole_params is not None,
    )


def _resolve_factored(entry: LibraryEntry, k: int, config: AppConfig, progress, stem: str):
    """Load the rank-k archive for an entry, building it first if absent."""
    path = entry.factored_paths.get(k)
    if path is not None and path.exists():
        factored = load_factored_archive(path)
        _, samples, _ = load_material_archive(entry.measured_path)
        progress(0.5)
        return factored, samples

    _, samples, matrices = load_material_archive(entry.measured_path)
    progress(0.1)
    ga_cfg = dataclasses.replace(config.ga, seed=_compression_seed(stem, k))
    result = evolve(matrices, k, ga_cfg)
    progress(0.45)
    factored = compress(matrices, result.best.transform_params(), k)
    save_factored_archive(factored, factored_path_for(config.materials_dir, stem, k))
    progress(0.5)
    return factored, samples


def _preview_work(
    config: AppConfig,
    entry: LibraryEntry | None,
    dipole: MaterialDescriptor | None,
    k: int,
    seed: int,
) -> Callable:
    jobs_dir = config.output_dir / JOBS_SUBDIR

    def work(progress: Callable[[float], None], job_id: str):
        if dipole is not None:
            descriptor = dipole
            binding = DipoleBinding(DipoleMaterial.from_parameters(dipole.dipole_params))
            progress(0.5)
        else:
            descriptor = entry.descriptor
            factored, samples = _resolve_factored(
                entry, k, config, progress, entry.measured_path.stem
            )
            binding = FactoredBinding(factored, samples)

        scene = build_preview_scene(
            binding, descriptor, config.preview_width, config.preview_height
        )
        report = render(scene, config.render, seed)
        progress(0.95)

        jobs_dir.mkdir(parents=True, exist_ok=True)
        image_path = jobs_dir / f"{job_id}.png"
        write_image(report.image, image_path, ImageFormat.PNG8_SRGB)
        result = report.as_json_dict()
        result.update(
            material=descriptor.name,
            material_type=descriptor.material_type.value,
            seed=seed,
            image_url=f"/jobs/{job_id}/image",
        )
        return result, image_path

    return work


def _typed_rows(rows: list[dict[str, str]], casts: dict[str, Callable]) -> list[dict[str, Any]]:
    return [
        {col: casts[col](text) if col in casts else text for col, text in row.items()}
        for row in rows
    ]


def create_app(config: AppConfig) -> FastAPI:
    manager = JobManager(config.job_workers)

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        manager.close()

    app = FastAPI(title="scatterkit", lifespan=lifespan)
    app.state.config = config
    app.state.jobs = manager
    # the browser panel is served from its own origin during development
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def inventory() -> tuple[list[LibraryEntry], list[MaterialDescriptor]]:
        try:
            return scan_material_dir(config.materials_dir)
        except IoFailureError:
            # a missing directory is an empty library, not a dead service
            return [], []

    @app.get("/materials", response_model=list[MaterialSummary])
    def list_materials():
        entries, dipoles = inventory()
        descriptors = [e.descriptor for e in entries] + list(dipoles)
        descriptors.sort(key=lambda d: (d.name.lower(), d.material_type.value))
        return [_summary(d) for d in descriptors]

    @app.get("/materials/{name}", response_model=MaterialDetail)
    def material_detail(name: str):
        entries, dipoles = inventory()
        variants = []
        for entry in entries:
            if entry.descriptor.name == name:
                _, samples, _ = load_material_archive(entry.measured_path)
                variants.append(_variant(entry.descriptor, samples.count))
        for descriptor in dipoles:
            if descriptor.name == name:
                variants.append(_variant(descriptor, None))
        if not variants:
            raise HTTPException(404, f"unknown material {name!r}")
        variants.sort(key=lambda v: v.material_type)
        return MaterialDetail(name=name, variants=variants)

    @app.post("/jobs/preview", status_code=202, response_model=JobCreated)
    def submit_preview(request: PreviewRequest):
        if request.type not in _TYPE_NAMES:
            raise HTTPException(400, f"material type must be one of {_TYPE_NAMES}")
        material_type = MaterialType(request.type)
        if material_type is MaterialType.HOMOGENEOUS and request.k is not None:
            raise HTTPException(
                400, "k does not apply to Homogeneous materials; omit it"
            )
        if request.k is not None and request.k not in ALLOWED_K:
            raise HTTPException(400, f"k must be one of {list(ALLOWED_K)}")

        entries, dipoles = inventory()
        entry = next(
            (
                e
                for e in entries
                if e.descriptor.name == request.material
                and e.descriptor.material_type is material_type
            ),
            None,
        )
        dipole = None
        if entry is None:
            dipole = next(
                (
                    d
                    for d in dipoles
                    if d.name == request.material and d.material_type is material_type
                ),
                None,
            )
        if entry is None and dipole is None:
            raise HTTPException(
                404, f"unknown material {request.material!r} of type {request.type}"
            )

        descriptor = entry.descriptor if entry is not None else dipole
        k = request.k if request.k is not None else descriptor.k_parameter
        seed = (
            request.seed
            if request.seed is not None
            else default_preview_seed(request.material, request.type, k)
        )
        key = (request.material, request.type, k)
        job_id, created = app.state.jobs.submit(
            key, _preview_work(config, entry, dipole, k, seed)
        )
        if not created:
            return JSONResponse(
                status_code=409,
                content={
                    "detail": "an identical job is already queued or running",
                    "job_id": job_id,
                },
            )
        return JobCreated(job_id=job_id, status_url=f"/jobs/{job_id}")

    @app.get("/jobs/{job_id}", response_model=JobStateOut)
    def job_state(job_id: str):
        snap = app.state.jobs.snapshot(job_id)
        if snap is None:
            raise HTTPException(404, f"unknown job {job_id!r}")
        return JobStateOut(
            id=snap.id,
            status=snap.status.value,
            progress=snap.progress,
            result=snap.result,
            error=snap.error,
        )

    @app.get("/jobs/{job_id}/image")
    def job_image(job_id: str):
        snap = app.state.jobs.snapshot(job_id)
        if snap is None:
            raise HTTPException(404, f"unknown job {job_id!r}")
        if snap.status is not JobStatus.DONE or snap.image_path is None:
            raise HTTPException(404, f"job {job_id!r} has no image (status {snap.status.value})")
        try:
            blob = Path(snap.image_path).read_bytes()
        except OSError as exc:
            raise HTTPException(500, f"preview image unreadable: {exc}") from exc
        return Response(content=blob, media_type="image/png")

    @app.get("/bench/latest", response_model=BenchLatest)
    def bench_latest():
        bench_dir = config.output_dir / BENCH_SUBDIR
        paths = [bench_dir / name for name in (TIMES_CSV, STORAGE_CSV, AGGREGATE_CSV)]
        if not all(p.exists() for p in paths):
            raise HTTPException(404, "no benchmark results recorded yet")
        try:
            times = read_times_csv(paths[0])
            storage = read_storage_csv(paths[1])
            aggregates = read_aggregate_csv(paths[2])
        except ScatterkitError as exc:
            raise HTTPException(500, f"benchmark data unreadable: {exc}") from exc
        return BenchLatest(
            times=_typed_rows(
                times, {"k": int, "wall_time_s": float, "bssrdf_eval_count": int}
            ),
            storage=_typed_rows(
                storage,
                {"k": int, "factored_storage_bytes": int, "raw_storage_bytes": int},
            ),
            aggregates=_typed_rows(
                aggregates,
                {
                    "record_count": int,
                    "mean_wall_time_s": float,
                    "mean_bssrdf_eval_count": float,
                    "mean_factored_storage_bytes": float,
                    "mean_raw_storage_bytes": float,
                },
            ),
        )

    return app
