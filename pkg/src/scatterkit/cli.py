"""Command-line entry points.

Every command is a thin wrapper over the library: load, call, write,
report. Machine-readable output goes to stdout as single-line JSON;
progress chatter goes to stderr. Failures print `{"error": ...}` on
stderr and exit 1; bad invocations exit 2 through click's usage errors.
"""

from __future__ import annotations

import dataclasses
import json
import re
import sys
from pathlib import Path

import click

from scatterkit.bench import emit_chart_data, run_benchmark_suite
from scatterkit.config import AppConfig, load_config
from scatterkit.dipole import DipoleMaterial
from scatterkit.errors import ScatterkitError
from scatterkit.factored import compress, load_factored_archive, save_factored_archive
from scatterkit.ga import GaConfig, evolve
from scatterkit.library import generate_material_library, scan_material_dir
from scatterkit.materials import ALLOWED_K, load_dipole_material, load_material_archive
from scatterkit.render import (
    DipoleBinding,
    FactoredBinding,
    ImageFormat,
    RenderSettings,
    build_preview_scene,
    load_scene,
    render,
    write_image,
)

_TRAILING_RANK = re.compile(r"-k\d+$")


def _fail(message: str, code: int = 1) -> None:
    click.echo(json.dumps({"error": message}), err=True)
    sys.exit(code)


def _emit(payload: dict) -> None:
    click.echo(json.dumps(payload))


def _note(message: str) -> None:
    click.echo(message, err=True)


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    default=None,
    help="TOML/JSON config file providing GA/render defaults, directories and bind address.",
)
@click.pass_context
def main(ctx: click.Context, config_path: Path | None):
    """Compress, render, benchmark and serve subsurface-scattering materials."""
    try:
        ctx.obj = load_config(config_path)
    except ScatterkitError as exc:
        _fail(str(exc))


def _render_settings(config: AppConfig, spp, points, radius, threads) -> RenderSettings:
    updates = {}
    if spp is not None:
        updates["samples_per_pixel"] = spp
    if points is not None:
        updates["irradiance_sample_count"] = points
    if radius is not None:
        updates["gather_truncation_radius"] = radius
    if threads is not None:
        updates["thread_count"] = threads
    return dataclasses.replace(config.render, **updates) if updates else config.render


def _load_ga_config(path: Path | None, config: AppConfig, seed: int | None) -> GaConfig:
    cfg = config.ga
    if path is not None:
        loaded = load_config(path)  # reuse the [ga] section of a config file
        cfg = loaded.ga
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    return cfg


@main.command("compress")
@click.argument("input_path", type=click.Path(path_type=Path))
@click.argument("output_path", type=click.Path(path_type=Path))
@click.option("-k", "--rank", "k", type=int, required=True, help="Factorization rank.")
@click.option(
    "--allow-any-k",
    is_flag=True,
    help=f"Accept ranks outside the standard menu {list(ALLOWED_K)}.",
)
@click.option(
    "--ga-config",
    type=click.Path(path_type=Path),
    default=None,
    help="Config file whose [ga] section replaces the optimizer defaults.",
)
@click.option("--seed", type=int, default=None, help="Optimizer seed override.")
@click.pass_obj
def compress_cmd(config: AppConfig, input_path, output_path, k, allow_any_k, ga_config, seed):
    """Fit the range transform with a GA and write a rank-K factored archive."""
    if k not in ALLOWED_K and not allow_any_k:
        raise click.UsageError(
            f"k={k} is outside the standard menu {list(ALLOWED_K)}; pass --allow-any-k to force it"
        )
    try:
        ga_cfg = _load_ga_config(ga_config, config, seed)
        _, _, matrices = load_material_archive(input_path)
        result = evolve(matrices, k, ga_cfg)
        factored = compress(matrices, result.best.transform_params(), k)
        written = save_factored_archive(factored, output_path)
    except ScatterkitError as exc:
        _fail(str(exc))
    fitness = result.best_fitness
    _emit(
        {
            "rmse": fitness.rmse,
            "per_channel_rmse": list(fitness.per_channel),
            "clamped_entry_count": fitness.clamped_entry_count,
            "rho": list(result.best.rho()),
            "k": factored.k,
            "generations": len(result.history),
            "converged": result.converged,
            "output": str(output_path),
            "storage_bytes": written,
        }
    )


def _preview_binding(material_path: Path, samples_path: Path | None):
    """Build a preview material binding from a material file on disk."""
    name = material_path.name
    if name.endswith(".dipole.json"):
        descriptor = load_dipole_material(material_path)
        return DipoleBinding(DipoleMaterial.from_parameters(descriptor.dipole_params)), descriptor
    if material_path.suffix == ".gpsf":
        factored = load_factored_archive(material_path)
        if samples_path is None:
            # jade-hetero-k10.gpsf pairs with jade-hetero.gpss by convention
            stem = _TRAILING_RANK.sub("", material_path.stem)
            samples_path = material_path.with_name(f"{stem}.gpss")
        descriptor, samples, _ = load_material_archive(samples_path)
        return FactoredBinding(factored, samples), descriptor
    raise ScatterkitError(
        f"cannot preview {name}: expected a .gpsf factored archive or a "
        ".dipole.json parameter file (compress .gpss archives first)"
    )


@main.command("render")
@click.argument("scene_path", type=click.Path(path_type=Path), required=False)
@click.option(
    "--preview",
    "preview_path",
    type=click.Path(path_type=Path),
    default=None,
    help="Render the canonical preview scene for this material file instead of a scene.",
)
@click.option(
    "--samples",
    "samples_path",
    type=click.Path(path_type=Path),
    default=None,
    help="Measured archive providing sample geometry for a --preview .gpsf.",
)
@click.option("-o", "--out", "out_dir", type=click.Path(path_type=Path), default=Path("."))
@click.option("--name", "stem", default=None, help="Basename for the output files.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--spp", type=int, default=None, help="Samples per pixel.")
@click.option("--points", type=int, default=None, help="Irradiance sample count.")
@click.option("--radius", type=float, default=None, help="Gather truncation radius.")
@click.option("--threads", type=int, default=None)
@click.option("--width", type=int, default=None, help="Preview image width.")
@click.option("--height", type=int, default=None, help="Preview image height.")
@click.pass_obj
def render_cmd(
    config: AppConfig,
    scene_path,
    preview_path,
    samples_path,
    out_dir,
    stem,
    seed,
    spp,
    points,
    radius,
    threads,
    width,
    height,
):
    """Render a scene file, or a material's canonical preview, to PNG + PFM + JSON."""
    if (scene_path is None) == (preview_path is None):
        raise click.UsageError("pass exactly one of SCENE_PATH or --preview MATERIAL")
    settings = _render_settings(config, spp, points, radius, threads)
    try:
        if preview_path is not None:
            binding, descriptor = _preview_binding(preview_path, samples_path)
            scene = build_preview_scene(
                binding,
                descriptor,
                width if width is not None else config.preview_width,
                height if height is not None else config.preview_height,
            )
            default_stem = _TRAILING_RANK.sub("", preview_path.stem.replace(".dipole", ""))
        else:
            if width is not None or height is not None:
                raise click.UsageError("--width/--height apply to --preview only")
            scene = load_scene(scene_path)
            default_stem = scene_path.stem
        report = render(scene, settings, seed)

        stem = stem or default_stem
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        png = out_dir / f"{stem}.png"
        pfm = out_dir / f"{stem}.pfm"
        meta = out_dir / f"{stem}.json"
        write_image(report.image, png, ImageFormat.PNG8_SRGB)
        write_image(report.image, pfm, ImageFormat.PFM_LINEAR)
        payload = report.as_json_dict()
        payload.update(seed=seed, png=str(png), pfm=str(pfm))
        meta.write_text(json.dumps(payload, indent=2) + "\n", "utf-8")
    except ScatterkitError as exc:
        _fail(str(exc))
    _emit(payload)


@main.command("bench")
@click.argument("materials_dir", type=click.Path(path_type=Path))
@click.option(
    "-o",
    "--out",
    "out_dir",
    type=click.Path(path_type=Path),
    default=None,
    help="Output directory [default: <output_dir>/bench from config].",
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--use-k", type=int, default=None, help="Render every material at this rank.")
@click.option("--spp", type=int, default=None)
@click.option("--points", type=int, default=None)
@click.option("--threads", type=int, default=None)
@click.pass_obj
def bench_cmd(config: AppConfig, materials_dir, out_dir, seed, use_k, spp, points, threads):
    """Benchmark every material in a directory on the shared preview scene."""
    settings = _render_settings(config, spp, points, None, threads)
    out_dir = Path(out_dir) if out_dir is not None else config.output_dir / "bench"
    try:
        entries, _ = scan_material_dir(materials_dir)
        if not entries:
            _fail(f"no material archives in {materials_dir}", code=2)
        records = run_benchmark_suite(
            entries, settings, seed, out_dir, use_k=use_k, progress=_note
        )
        paths = emit_chart_data(records, out_dir)
        rows = [
            {
                "material": r.material,
                "material_type": r.material_type.value,
                "k": r.k,
                "wall_time_s": r.wall_time_s,
                "bssrdf_eval_count": r.bssrdf_eval_count,
                "factored_storage_bytes": r.factored_storage_bytes,
                "raw_storage_bytes": r.raw_storage_bytes,
                "image_path": r.image_path,
                "error": r.error,
            }
            for r in records
        ]
        records_path = Path(out_dir) / "records.json"
        records_path.write_text(json.dumps(rows, indent=2) + "\n", "utf-8")
    except ScatterkitError as exc:
        _fail(str(exc))
    succeeded = sum(not r.failed for r in records)
    _emit(
        {
            "records": len(records),
            "succeeded": succeeded,
            "failed": len(records) - succeeded,
            "out_dir": str(out_dir),
            "records_json": str(records_path),
            "charts": {name: str(path) for name, path in paths.items()},
        }
    )
    if succeeded == 0:
        sys.exit(2)


@main.command("synth")
@click.argument("out_dir", type=click.Path(path_type=Path))
@click.option("--force", is_flag=True, help="Rebuild archives that already exist.")
@click.pass_obj
def synth_cmd(config: AppConfig, out_dir, force):
    """Generate the bundled synthetic material suite into a directory."""
    try:
        entries = generate_material_library(out_dir, force=force, progress=_note)
    except ScatterkitError as exc:
        _fail(str(exc))
    _emit({"materials": len(entries), "out_dir": str(out_dir)})


@main.command("serve")
@click.option("--host", default=None, help="Bind host override.")
@click.option("--port", type=int, default=None, help="Bind port override.")
@click.option(
    "--generate",
    is_flag=True,
    help="Generate the bundled material suite into the materials dir before serving.",
)
@click.pass_obj
def serve_cmd(config: AppConfig, host, port, generate):
    """Run the HTTP service."""
    import uvicorn

    from scatterkit.service import create_app

    try:
        if generate:
            generate_material_library(config.materials_dir, progress=_note)
    except ScatterkitError as exc:
        _fail(str(exc))
    app = create_app(config)
    uvicorn.run(
        app,
        host=host if host is not None else config.bind_host,
        port=port if port is not None else config.bind_port,
    )


if __name__ == "__main__":
    main()
