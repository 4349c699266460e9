"""One-bounce ray caster producing an RGB image and an exact label image.

Each pixel casts one primary ray through its centre.  The nearest
triangle hit decides the label (the object's class) and the colour
(Lambertian, two-sided, no shadows); rays that miss show the background
image resized to the frame and get label 0.
"""
from __future__ import annotations

import os
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit
from PIL import Image

from ..voc import read_rgb
from .config import PROCEDURAL_PREFIX
from .mesh import BUILTIN_PREFIX, Mesh, builtin_mesh, load_mesh_file
from .scene import SceneDescription, make_rng

RAY_EPS = 1e-9


class AssetError(LookupError):
    pass


class AssetStore:
    """Read-through cache of meshes and background images.

    Mesh refs are ``builtin:<name>`` or OBJ paths; background refs are image
    paths or ``procedural:<n>``.  Meshes are stored unit-normalised.
    """

    def __init__(self):
        self._meshes: dict[str, Mesh] = {}
        self._backgrounds: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def add_mesh(self, ref: str, mesh: Mesh) -> None:
        with self._lock:
            self._meshes[ref] = mesh.normalized()

    def add_background(self, ref: str, image: np.ndarray) -> None:
        with self._lock:
            self._backgrounds[ref] = np.asarray(image, dtype=np.uint8)

    def mesh(self, ref: str) -> Mesh:
        with self._lock:
            if ref in self._meshes:
                return self._meshes[ref]
        if ref.startswith(BUILTIN_PREFIX):
            try:
                mesh = builtin_mesh(ref[len(BUILTIN_PREFIX):])
            except ValueError as exc:
                raise AssetError(str(exc)) from None
        elif os.path.isfile(ref):
            mesh = load_mesh_file(ref)
        else:
            raise AssetError(f"cannot resolve mesh {ref!r}")
        self.add_mesh(ref, mesh)
        return self.mesh(ref)

    def background(self, ref: str, width: int, height: int) -> np.ndarray:
        with self._lock:
            image = self._backgrounds.get(ref)
        if image is None:
            if ref.startswith(PROCEDURAL_PREFIX):
                try:
                    index = int(ref[len(PROCEDURAL_PREFIX):])
                except ValueError:
                    raise AssetError(f"bad procedural background {ref!r}") from None
                image = procedural_background(index)
            elif Path(ref).is_file():
                image = read_rgb(ref)
            else:
                raise AssetError(f"cannot resolve background {ref!r}")
            self.add_background(ref, image)
        if image.shape[:2] == (height, width):
            return image.copy()
        resized = Image.fromarray(image).resize((width, height), Image.BILINEAR)
        return np.array(resized)


def procedural_background(index: int, size: tuple[int, int] = (240, 320)) -> np.ndarray:
    """Smooth random colour field with grain; deterministic in ``index``."""
    rng = make_rng(0x5EED0000 + index)
    coarse = rng.integers(0, 256, size=(rng.integers(2, 7), rng.integers(2, 7), 3), dtype=np.uint8)
    h, w = size
    field = np.array(Image.fromarray(coarse).resize((w, h), Image.BICUBIC), dtype=np.float64)
    field += rng.normal(0, 8, size=field.shape)
    return np.clip(np.rint(field), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class RenderSample:
    rgb: np.ndarray  # (H, W, 3) uint8
    label: np.ndarray  # (H, W) uint8
    scene: SceneDescription


def scene_triangles(scene: SceneDescription, assets: AssetStore):
    """World-space triangles ``(T, 3, 3)``, owning object per triangle, albedo per triangle."""
    tris, owner, albedo = [], [], []
    for k, obj in enumerate(scene.objects):
        mesh = assets.mesh(obj.mesh_ref)
        world = obj.transform(mesh.vertices)
        tris.append(world[mesh.triangles])
        owner.append(np.full(mesh.triangles.shape[0], k, dtype=np.int64))
        albedo.append(mesh.albedo * np.asarray(obj.tint))
    return np.concatenate(tris), np.concatenate(owner), np.concatenate(albedo)


@njit(cache=True, nogil=True)
def _cast(tris, origin, dirs, boxes, depth, hit):
    for t in range(tris.shape[0]):
        v0 = tris[t, 0]
        e1 = tris[t, 1] - v0
        e2 = tris[t, 2] - v0
        s = origin - v0
        q0 = s[1] * e1[2] - s[2] * e1[1]
        q1 = s[2] * e1[0] - s[0] * e1[2]
        q2 = s[0] * e1[1] - s[1] * e1[0]
        for i in range(boxes[t, 0], boxes[t, 1]):
            for j in range(boxes[t, 2], boxes[t, 3]):
                d = dirs[i, j]
                p0 = d[1] * e2[2] - d[2] * e2[1]
                p1 = d[2] * e2[0] - d[0] * e2[2]
                p2 = d[0] * e2[1] - d[1] * e2[0]
                det = e1[0] * p0 + e1[1] * p1 + e1[2] * p2
                if det == 0.0:
                    continue
                inv = 1.0 / det
                u = (s[0] * p0 + s[1] * p1 + s[2] * p2) * inv
                if u < 0.0 or u > 1.0:
                    continue
                v = (d[0] * q0 + d[1] * q1 + d[2] * q2) * inv
                if v < 0.0 or u + v > 1.0:
                    continue
                dist = (e2[0] * q0 + e2[1] * q1 + e2[2] * q2) * inv
                if dist > RAY_EPS and dist < depth[i, j]:
                    depth[i, j] = dist
                    hit[i, j] = t


def _screen_boxes(camera, tris: np.ndarray) -> np.ndarray:
    """Conservative pixel row/column ranges per triangle (full frame if it crosses the camera plane)."""
    h, w = camera.height, camera.width
    u, v, depth = camera.project(tris.reshape(-1, 3))
    u, v, depth = u.reshape(-1, 3), v.reshape(-1, 3), depth.reshape(-1, 3)
    boxes = np.empty((tris.shape[0], 4), dtype=np.int64)
    front = (depth > 1e-6).all(axis=1)
    boxes[:] = (0, h, 0, w)
    if front.any():
        uf, vf = u[front], v[front]
        boxes[front, 0] = np.floor(vf.min(axis=1) - 0.5) - 1
        boxes[front, 1] = np.ceil(vf.max(axis=1) - 0.5) + 2
        boxes[front, 2] = np.floor(uf.min(axis=1) - 0.5) - 1
        boxes[front, 3] = np.ceil(uf.max(axis=1) - 0.5) + 2
    boxes[:, 0:2] = np.clip(boxes[:, 0:2], 0, h)
    boxes[:, 2:4] = np.clip(boxes[:, 2:4], 0, w)
    return boxes


def cast_primary_rays(scene: SceneDescription, assets: AssetStore):
    """Nearest-hit ray parameter and triangle index per pixel (``inf`` / ``-1`` on a miss)."""
    cam = scene.camera
    tris, owner, albedo = scene_triangles(scene, assets)
    dirs = cam.ray_directions()
    depth = np.full((cam.height, cam.width), np.inf)
    hit = np.full((cam.height, cam.width), -1, dtype=np.int64)
    _cast(np.ascontiguousarray(tris), np.asarray(cam.position, dtype=np.float64),
          np.ascontiguousarray(dirs), _screen_boxes(cam, tris), depth, hit)
    return depth, hit, tris, owner, albedo, dirs


def render(scene: SceneDescription, assets: AssetStore) -> RenderSample:
    cam = scene.camera
    depth, hit, tris, owner, albedo, dirs = cast_primary_rays(scene, assets)
    rgb = assets.background(scene.background_ref, cam.width, cam.height)
    label = np.zeros((cam.height, cam.width), dtype=np.uint8)
    mask = hit >= 0
    if mask.any():
        t = hit[mask]
        normals = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
        normals /= np.maximum(np.linalg.norm(normals, axis=1, keepdims=True), 1e-300)
        n = normals[t]
        # two-sided: use the side facing the viewer
        facing = np.einsum("ij,ij->i", n, dirs[mask])
        n[facing > 0] *= -1
        light = np.asarray(scene.light.direction)
        shade = np.maximum(0.0, n @ light) * scene.light.intensity
        color = np.clip(albedo[t] * shade[:, None], 0.0, 1.0)
        rgb[mask] = np.floor(color * 255 + 0.5).astype(np.uint8)
        classes = np.array([o.class_index for o in scene.objects], dtype=np.uint8)
        label[mask] = classes[owner[t]]
    return RenderSample(rgb, label, scene)
