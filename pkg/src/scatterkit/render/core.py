"""Two-pass renderer: irradiance point cloud, then per-pixel gather.

Primary rays are generated and intersected up front in one batch; the
gather pass is partitioned by image row across a thread pool. Every pixel
is owned by exactly one worker and all randomness is pre-drawn from seeded
streams, so the image is bit-identical for any thread_count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from scatterkit.errors import InvalidInputError, RenderSanityError
from scatterkit.render.bvh import build_bvh, intersect_closest
from scatterkit.render.gather import DipoleGatherState, GatherState
from scatterkit.render.sampling import sample_irradiance_points
from scatterkit.render.scene import DipoleBinding, SceneDescription


@dataclass(frozen=True)
class RenderSettings:
    samples_per_pixel: int = 4
    irradiance_sample_count: int = 2048
    gather_truncation_radius: float | None = None
    thread_count: int = 1

    def __post_init__(self):
        if self.samples_per_pixel < 1:
            raise InvalidInputError("samples_per_pixel must be positive")
        if self.irradiance_sample_count < 1:
            raise InvalidInputError("irradiance_sample_count must be positive")
        if self.gather_truncation_radius is not None and not (
            self.gather_truncation_radius > 0.0
        ):
            raise InvalidInputError("gather_truncation_radius must be positive or None")
        if self.thread_count < 1:
            raise InvalidInputError("thread_count must be positive")


@dataclass
class RenderReport:
    image: np.ndarray  # (height, width, 3) float32 linear radiance
    wall_time: float
    bssrdf_eval_count: int
    k_used: int
    peak_memory_estimate: int

    def as_json_dict(self) -> dict:
        h, w, _ = self.image.shape
        return {
            "width": w,
            "height": h,
            "wall_time_s": self.wall_time,
            "bssrdf_eval_count": self.bssrdf_eval_count,
            "k_used": self.k_used,
            "peak_memory_estimate_bytes": self.peak_memory_estimate,
            "mean_luminance": float(self.image.mean()),
        }


def _camera_rays(scene: SceneDescription, spp: int, seed: int):
    cam = scene.camera
    w, h = cam.width, cam.height
    forward, right, up = cam.basis()
    tan_half = math.tan(math.radians(cam.vfov_deg) / 2.0)
    aspect = w / h

    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(2,)))
    jitter = rng.random((spp, h, w, 2))

    xs = np.arange(w)[None, None, :, None]
    ys = np.arange(h)[None, :, None, None]
    ndc_x = ((xs + jitter[..., 0:1]) / w * 2.0 - 1.0) * tan_half * aspect
    ndc_y = (1.0 - (ys + jitter[..., 1:2]) / h * 2.0) * tan_half
    dirs = (
        forward[None, None, None, :]
        + ndc_x * right[None, None, None, :]
        + ndc_y * up[None, None, None, :]
    ).reshape(-1, 3)
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    origins = np.broadcast_to(cam.position, dirs.shape).copy()
    return origins, dirs


def render(scene: SceneDescription, settings: RenderSettings, seed: int = 0) -> RenderReport:
    """Render the scene. Deterministic for (scene, settings, seed); the
    thread count changes scheduling only, never the image."""
    start = time.perf_counter()
    binding = scene.require_material()
    spp = settings.samples_per_pixel
    w, h = scene.camera.width, scene.camera.height

    bvh = build_bvh(scene.mesh)
    origins, dirs = _camera_rays(scene, spp, seed)
    t_hit, tri, _, _ = intersect_closest(bvh, origins, dirs)
    hit_mask = tri >= 0
    hit_points = origins + t_hit[:, None] * dirs
    del origins

    irr = sample_irradiance_points(scene, settings.irradiance_sample_count, seed, bvh)

    if isinstance(binding, DipoleBinding):
        state = DipoleGatherState.for_dipole(binding, irr, settings.gather_truncation_radius)
        receiver_of = None
        k_used = 1
    else:
        mapper = scene.sample_index_mapper()
        state = GatherState.for_factored(
            binding, irr, mapper, settings.gather_truncation_radius
        )
        receivers = np.full(len(hit_points), -1, dtype=np.int64)
        if hit_mask.any():
            receivers[hit_mask] = mapper(hit_points[hit_mask])
        receiver_of = receivers
        k_used = binding.factored.k

    background = np.asarray(scene.background, dtype=float)
    hw = h * w
    image = np.zeros((hw, 3))

    def run_block(y0: int, y1: int) -> int:
        """Gather every sample whose pixel lies in rows [y0, y1).

        Each pixel is owned by exactly one block and its samples are
        visited in ascending spp order, so accumulation order (and the
        image) never depends on how blocks map to threads.
        """
        p0 = y0 * w
        nblk = (y1 - y0) * w
        acc = np.zeros((nblk, 3))
        hit_count = np.zeros(nblk, dtype=np.int64)
        terms_acc = 0
        for s in range(spp):
            base = s * hw + p0
            local = np.flatnonzero(hit_mask[base : base + nblk])
            hit_count[local] += 1
            pts = hit_points[base + local]
            rcvs = receiver_of[base + local] if receiver_of is not None else None
            for n in range(len(local)):
                rcv = int(rcvs[n]) if rcvs is not None else -1
                radiance, terms = state.radiance_at(pts[n], rcv)
                acc[local[n]] += radiance
                terms_acc += terms
        full_miss = hit_count == 0
        acc += (spp - hit_count)[:, None] * background
        acc /= spp
        acc[full_miss] = background
        image[p0 : p0 + nblk] = acc
        return terms_acc

    threads = min(settings.thread_count, h)
    bounds = np.linspace(0, h, threads + 1, dtype=int)
    total_terms = 0
    if threads == 1:
        total_terms = run_block(0, h)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(run_block, int(y0), int(y1))
                for y0, y1 in zip(bounds[:-1], bounds[1:])
                if y1 > y0
            ]
            for future in futures:
                total_terms += future.result()

    eval_count = total_terms * k_used
    image = image.reshape(h, w, 3)

    final = image.astype(np.float32)
    if not np.all(np.isfinite(final)) or float(final.mean()) < 0.0:
        raise RenderSanityError("render produced non-finite or negative radiance")

    peak_memory = (
        dirs.nbytes * 2  # primary ray origins + directions
        + t_hit.nbytes
        + tri.nbytes
        + hit_points.nbytes
        + irr.points.positions.nbytes * 3
        + irr.irradiance.nbytes
        + _state_bytes(state)
        + image.nbytes
        + final.nbytes
    )
    wall = time.perf_counter() - start
    return RenderReport(
        image=final,
        wall_time=wall,
        bssrdf_eval_count=int(eval_count),
        k_used=k_used,
        peak_memory_estimate=int(peak_memory),
    )


def _state_bytes(state) -> int:
    if isinstance(state, GatherState):
        return state.sv.nbytes + state.u.nbytes + state.w.nbytes + state.positions.nbytes
    return state.w.nbytes + state.positions.nbytes
