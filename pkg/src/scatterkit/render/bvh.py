"""Bounding volume hierarchy over triangles with numba traversal kernels.

The tree is built in Python (median split on the longest centroid axis,
small flat arrays) and traversed in nopython kernels. Kernels are cached so
the compile cost is paid once per machine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from scatterkit.errors import EmptyMeshError
from scatterkit.render.mesh import TriangleMesh

_LEAF_SIZE = 4
_STACK_DEPTH = 64


@dataclass(frozen=True)
class Bvh:
    node_min: np.ndarray
    node_max: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    node_start: np.ndarray
    node_count: np.ndarray
    perm: np.ndarray
    p0: np.ndarray
    e1: np.ndarray
    e2: np.ndarray


def build_bvh(mesh: TriangleMesh) -> Bvh:
    if mesh.triangle_count == 0:
        raise EmptyMeshError("cannot build a BVH over zero triangles")
    p0, p1, p2 = mesh.corners()
    tri_min = np.minimum(np.minimum(p0, p1), p2)
    tri_max = np.maximum(np.maximum(p0, p1), p2)
    centroids = 0.5 * (tri_min + tri_max)

    order = np.arange(mesh.triangle_count, dtype=np.int32)
    node_min, node_max = [], []
    node_left, node_right = [], []
    node_start, node_count = [], []

    def new_node():
        node_min.append(None)
        node_max.append(None)
        node_left.append(-1)
        node_right.append(-1)
        node_start.append(0)
        node_count.append(0)
        return len(node_min) - 1

    root = new_node()
    stack = [(root, 0, mesh.triangle_count)]
    while stack:
        node, lo, hi = stack.pop()
        tris = order[lo:hi]
        node_min[node] = tri_min[tris].min(axis=0)
        node_max[node] = tri_max[tris].max(axis=0)
        if hi - lo <= _LEAF_SIZE:
            node_start[node] = lo
            node_count[node] = hi - lo
            continue
        cents = centroids[tris]
        axis = int(np.argmax(cents.max(axis=0) - cents.min(axis=0)))
        mid = (hi - lo) // 2
        part = np.argpartition(cents[:, axis], mid)
        order[lo:hi] = tris[part]
        left = new_node()
        right = new_node()
        node_left[node] = left
        node_right[node] = right
        stack.append((left, lo, lo + mid))
        stack.append((right, lo + mid, hi))

    return Bvh(
        node_min=np.ascontiguousarray(node_min, dtype=np.float64),
        node_max=np.ascontiguousarray(node_max, dtype=np.float64),
        node_left=np.array(node_left, dtype=np.int32),
        node_right=np.array(node_right, dtype=np.int32),
        node_start=np.array(node_start, dtype=np.int32),
        node_count=np.array(node_count, dtype=np.int32),
        perm=np.ascontiguousarray(order),
        p0=np.ascontiguousarray(p0),
        e1=np.ascontiguousarray(p1 - p0),
        e2=np.ascontiguousarray(p2 - p0),
    )


@njit(cache=True)
def _slab_hit(nmin, nmax, ox, oy, oz, ix, iy, iz, tmax):
    t0 = (nmin[0] - ox) * ix
    t1 = (nmax[0] - ox) * ix
    if t0 > t1:
        t0, t1 = t1, t0
    lo = t0
    hi = t1
    t0 = (nmin[1] - oy) * iy
    t1 = (nmax[1] - oy) * iy
    if t0 > t1:
        t0, t1 = t1, t0
    if t0 > lo:
        lo = t0
    if t1 < hi:
        hi = t1
    t0 = (nmin[2] - oz) * iz
    t1 = (nmax[2] - oz) * iz
    if t0 > t1:
        t0, t1 = t1, t0
    if t0 > lo:
        lo = t0
    if t1 < hi:
        hi = t1
    return hi >= max(lo, 0.0) and lo <= tmax


@njit(cache=True)
def closest_hit(
    origins,
    directions,
    t_near,
    node_min,
    node_max,
    node_left,
    node_right,
    node_start,
    node_count,
    perm,
    p0,
    e1,
    e2,
):
    """Nearest intersection per ray: (t, triangle index or -1, bary u, bary v)."""
    n = origins.shape[0]
    out_t = np.full(n, np.inf)
    out_tri = np.full(n, -1, dtype=np.int32)
    out_u = np.zeros(n)
    out_v = np.zeros(n)
    stack = np.empty(_STACK_DEPTH, dtype=np.int32)
    for r in range(n):
        ox, oy, oz = origins[r, 0], origins[r, 1], origins[r, 2]
        dx, dy, dz = directions[r, 0], directions[r, 1], directions[r, 2]
        ix = 1.0 / dx if dx != 0.0 else np.inf
        iy = 1.0 / dy if dy != 0.0 else np.inf
        iz = 1.0 / dz if dz != 0.0 else np.inf
        best_t = np.inf
        best_tri = -1
        best_u = 0.0
        best_v = 0.0
        top = 0
        stack[top] = 0
        top += 1
        while top > 0:
            top -= 1
            node = stack[top]
            if not _slab_hit(node_min[node], node_max[node], ox, oy, oz, ix, iy, iz, best_t):
                continue
            count = node_count[node]
            if count > 0:
                start = node_start[node]
                for s in range(start, start + count):
                    tri = perm[s]
                    # Moller-Trumbore
                    hx = dy * e2[tri, 2] - dz * e2[tri, 1]
                    hy = dz * e2[tri, 0] - dx * e2[tri, 2]
                    hz = dx * e2[tri, 1] - dy * e2[tri, 0]
                    det = e1[tri, 0] * hx + e1[tri, 1] * hy + e1[tri, 2] * hz
                    if -1e-12 < det < 1e-12:
                        continue
                    inv = 1.0 / det
                    sx = ox - p0[tri, 0]
                    sy = oy - p0[tri, 1]
                    sz = oz - p0[tri, 2]
                    u = (sx * hx + sy * hy + sz * hz) * inv
                    if u < 0.0 or u > 1.0:
                        continue
                    qx = sy * e1[tri, 2] - sz * e1[tri, 1]
                    qy = sz * e1[tri, 0] - sx * e1[tri, 2]
                    qz = sx * e1[tri, 1] - sy * e1[tri, 0]
                    v = (dx * qx + dy * qy + dz * qz) * inv
                    if v < 0.0 or u + v > 1.0:
                        continue
                    t = (e2[tri, 0] * qx + e2[tri, 1] * qy + e2[tri, 2] * qz) * inv
                    if t_near <= t < best_t:
                        best_t = t
                        best_tri = tri
                        best_u = u
                        best_v = v
            else:
                stack[top] = node_left[node]
                top += 1
                stack[top] = node_right[node]
                top += 1
        out_t[r] = best_t
        out_tri[r] = best_tri
        out_u[r] = best_u
        out_v[r] = best_v
    return out_t, out_tri, out_u, out_v


@njit(cache=True)
def any_hit(
    origins,
    directions,
    t_near,
    t_far,
    node_min,
    node_max,
    node_left,
    node_right,
    node_start,
    node_count,
    perm,
    p0,
    e1,
    e2,
):
    """Occlusion test per ray within (t_near, t_far[r])."""
    n = origins.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    stack = np.empty(_STACK_DEPTH, dtype=np.int32)
    for r in range(n):
        ox, oy, oz = origins[r, 0], origins[r, 1], origins[r, 2]
        dx, dy, dz = directions[r, 0], directions[r, 1], directions[r, 2]
        limit = t_far[r]
        ix = 1.0 / dx if dx != 0.0 else np.inf
        iy = 1.0 / dy if dy != 0.0 else np.inf
        iz = 1.0 / dz if dz != 0.0 else np.inf
        hit = False
        top = 0
        stack[top] = 0
        top += 1
        while top > 0 and not hit:
            top -= 1
            node = stack[top]
            if not _slab_hit(node_min[node], node_max[node], ox, oy, oz, ix, iy, iz, limit):
                continue
            count = node_count[node]
            if count > 0:
                start = node_start[node]
                for s in range(start, start + count):
                    tri = perm[s]
                    hx = dy * e2[tri, 2] - dz * e2[tri, 1]
                    hy = dz * e2[tri, 0] - dx * e2[tri, 2]
                    hz = dx * e2[tri, 1] - dy * e2[tri, 0]
                    det = e1[tri, 0] * hx + e1[tri, 1] * hy + e1[tri, 2] * hz
                    if -1e-12 < det < 1e-12:
                        continue
                    inv = 1.0 / det
                    sx = ox - p0[tri, 0]
                    sy = oy - p0[tri, 1]
                    sz = oz - p0[tri, 2]
                    u = (sx * hx + sy * hy + sz * hz) * inv
                    if u < 0.0 or u > 1.0:
                        continue
                    qx = sy * e1[tri, 2] - sz * e1[tri, 1]
                    qy = sz * e1[tri, 0] - sx * e1[tri, 2]
                    qz = sx * e1[tri, 1] - sy * e1[tri, 0]
                    v = (dx * qx + dy * qy + dz * qz) * inv
                    if v < 0.0 or u + v > 1.0:
                        continue
                    t = (e2[tri, 0] * qx + e2[tri, 1] * qy + e2[tri, 2] * qz) * inv
                    if t_near <= t < limit:
                        hit = True
                        break
            else:
                stack[top] = node_left[node]
                top += 1
                stack[top] = node_right[node]
                top += 1
        out[r] = hit
    return out


def intersect_closest(bvh: Bvh, origins, directions, t_near=1e-9):
    return closest_hit(
        np.ascontiguousarray(origins, dtype=np.float64),
        np.ascontiguousarray(directions, dtype=np.float64),
        float(t_near),
        bvh.node_min,
        bvh.node_max,
        bvh.node_left,
        bvh.node_right,
        bvh.node_start,
        bvh.node_count,
        bvh.perm,
        bvh.p0,
        bvh.e1,
        bvh.e2,
    )


def intersect_any(bvh: Bvh, origins, directions, t_far, t_near=1e-9):
    return any_hit(
        np.ascontiguousarray(origins, dtype=np.float64),
        np.ascontiguousarray(directions, dtype=np.float64),
        float(t_near),
        np.ascontiguousarray(t_far, dtype=np.float64),
        bvh.node_min,
        bvh.node_max,
        bvh.node_left,
        bvh.node_right,
        bvh.node_start,
        bvh.node_count,
        bvh.perm,
        bvh.p0,
        bvh.e1,
        bvh.e2,
    )
