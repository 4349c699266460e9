"""Randomised scene descriptions.

A scene is fully determined by ``(config, class_index, seed)``: each sample
draws from its own counter-based Philox stream, so samples can be produced
in any order or in parallel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .config import ForgeConfig

MAX_PLACEMENT_TRIES = 1000
WORLD_UP = np.array([0.0, 1.0, 0.0])


@dataclass(frozen=True)
class Camera:
    position: tuple[float, float, float]
    look_at: tuple[float, float, float]
    fov_deg: float
    width: int
    height: int

    def basis(self):
        """Unit ``(forward, right, up)`` vectors."""
        forward = np.subtract(self.look_at, self.position).astype(np.float64)
        norm = np.linalg.norm(forward)
        if norm == 0:
            raise ValueError("camera position equals look-at point")
        forward /= norm
        right = np.cross(forward, WORLD_UP)
        if np.linalg.norm(right) < 1e-12:
            right = np.cross(forward, np.array([0.0, 0.0, -1.0]))
        right /= np.linalg.norm(right)
        up = np.cross(right, forward)
        return forward, right, up

    @property
    def focal_px(self) -> float:
        """Focal length in pixels along the vertical axis."""
        return (self.height / 2) / math.tan(math.radians(self.fov_deg) / 2)

    def project(self, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Pixel coordinates ``(u, v)`` and depth of world points.

        ``u`` grows rightwards and ``v`` downwards, pixel centres at ``+0.5``.
        """
        p = np.atleast_2d(np.asarray(points, dtype=np.float64)) - np.asarray(self.position)
        forward, right, up = self.basis()
        depth = p @ forward
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.width / 2 + self.focal_px * (p @ right) / depth
            v = self.height / 2 - self.focal_px * (p @ up) / depth
        return u, v, depth

    def sees(self, point) -> bool:
        u, v, depth = self.project(point)
        return bool(depth[0] > 0 and 0 <= u[0] < self.width and 0 <= v[0] < self.height)

    def ray_directions(self) -> np.ndarray:
        """Unit directions of the primary rays through every pixel centre, ``(H, W, 3)``."""
        forward, right, up = self.basis()
        j = np.arange(self.width) + 0.5
        i = np.arange(self.height) + 0.5
        x = (j - self.width / 2) / self.focal_px
        y = (self.height / 2 - i) / self.focal_px
        d = forward + x[None, :, None] * right + y[:, None, None] * up
        return d / np.linalg.norm(d, axis=2, keepdims=True)


@dataclass(frozen=True)
class Light:
    direction: tuple[float, float, float]  # unit vector pointing towards the light
    intensity: float

    def __post_init__(self):
        if abs(float(np.linalg.norm(self.direction)) - 1.0) > 1e-9:
            raise ValueError("light direction must be a unit vector")
        if self.intensity < 0:
            raise ValueError("light intensity must be >= 0")


@dataclass(frozen=True)
class SceneObject:
    mesh_ref: str
    class_index: int
    scale: float
    rotation: tuple[float, float, float]
    translation: tuple[float, float, float]
    tint: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be > 0")
        if not 1 <= self.class_index <= 20:
            raise ValueError("object class must be in 1..20")

    def transform(self, vertices: np.ndarray) -> np.ndarray:
        """Model (unit-normalised) to world coordinates."""
        rot = Rotation.from_euler("xyz", self.rotation).as_matrix()
        return (self.scale * vertices) @ rot.T + np.asarray(self.translation)


@dataclass(frozen=True)
class SceneDescription:
    objects: tuple[SceneObject, ...]
    camera: Camera
    light: Light
    background_ref: str
    seed: int

    def __post_init__(self):
        if not self.objects:
            raise ValueError("a scene needs at least one object")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def sample_seed(dataset_seed: int, class_index: int, sample_index: int) -> int:
    """64-bit seed of one dataset sample."""
    ss = np.random.SeedSequence([dataset_seed, class_index, sample_index])
    return int(ss.generate_state(1, np.uint64)[0])


def _uniform3(rng, lo, hi) -> tuple[float, float, float]:
    return tuple(float(x) for x in rng.uniform(lo, hi))


def sample_scene(config: ForgeConfig, class_index: int, seed: int) -> SceneDescription:
    """Draw a random scene containing at least one object of ``class_index``.

    Every sampled value lies in its configured range and every object centre
    projects inside the frame.
    """
    pool = config.pool(class_index)
    if not pool:
        raise ValueError(f"empty mesh pool for class {class_index}")
    rng = make_rng(seed)

    jitter = np.asarray(config.camera_jitter)
    position = np.asarray(config.camera_position) + rng.uniform(-jitter, jitter)
    camera = Camera(tuple(float(x) for x in position), tuple(config.camera_look_at),
                    config.fov_deg, config.width, config.height)

    count = int(rng.integers(config.min_objects, config.max_objects + 1))
    objects = []
    for k in range(count):
        cls = class_index
        if k and config.mixed_classes:
            cls = int(config.classes[rng.integers(len(config.classes))])
        refs = config.pool(cls)
        mesh_ref = refs[int(rng.integers(len(refs)))]
        scale = float(rng.uniform(config.scale_min, config.scale_max))
        rotation = _uniform3(rng, config.rotation_min, config.rotation_max)
        for _ in range(MAX_PLACEMENT_TRIES):
            translation = _uniform3(rng, config.translation_min, config.translation_max)
            if camera.sees(translation):
                break
        else:
            raise ValueError("could not place an object inside the camera frustum; "
                             "check translation ranges against the camera")
        tint = _uniform3(rng, [config.tint_min] * 3, [config.tint_max] * 3)
        objects.append(SceneObject(mesh_ref, cls, scale, rotation, translation, tint))

    # direction towards the light, on the hemisphere facing the camera
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    view = np.asarray(camera.position) - np.asarray(camera.look_at)
    if d @ view < 0:
        d = -d
    intensity = float(rng.uniform(config.light_intensity_min, config.light_intensity_max))
    light = Light(tuple(float(x) for x in d), intensity)

    backgrounds = config.background_pool()
    background = backgrounds[int(rng.integers(len(backgrounds)))]
    return SceneDescription(tuple(objects), camera, light, background, int(seed))
