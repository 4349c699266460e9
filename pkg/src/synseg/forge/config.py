"""Renderer/dataset configuration read from a flat ``key = value`` file.

Keys and defaults (vectors are comma-separated ``x,y,z``; world units are
arbitrary but consistent, camera looks down -z by default):

===========================  ===============  =========================================
key                          default          meaning
===========================  ===============  =========================================
width, height                500, 375         frame size in pixels
classes                      all              comma-separated class names, or ``all``
samples_per_class            100              images rendered per class
dataset_seed                 0                root seed for per-sample seeds
min_objects, max_objects     1, 3             objects per scene (inclusive)
mixed_classes                false            allow other classes besides the target
scale_min, scale_max         1.0, 2.0         largest object extent, world units
rotation_min, rotation_max   0,0,0 / 2pi x3   Euler angles (xyz, radians)
translation_min/max          -2.5,-1.5,-2 /   box sampled for object centres
                             2.5,1.5,1
camera_position              0,0,8            camera centre
camera_look_at               0,0,0            point the camera looks at
camera_jitter                0,0,0            uniform +/- jitter on camera_position
fov_deg                      45               vertical field of view
light_intensity_min/max      0.7, 1.3         directional light intensity
tint_min, tint_max           0.4, 1.0         per-object RGB albedo multiplier range
mesh_dir                     (unset)          root with one ``<class>/`` folder of .obj files
mesh.<class>                 (unset)          explicit comma-separated mesh list
background_dir               (unset)          folder of background images
procedural_backgrounds       64               pool size when background_dir is unset
===========================  ===============  =========================================

Classes left without meshes fall back to the built-in primitive pool
(``builtin:cube``, ``builtin:sphere``, ...).  Relative paths resolve
against the config file's directory.
"""
from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from ..voc import VOC
from .mesh import DEFAULT_POOL

IMAGE_EXTENSIONS = (".jpg", ".jpeg", ".png", ".bmp", ".ppm")
PROCEDURAL_PREFIX = "procedural:"

Vec3 = tuple[float, float, float]


@dataclass(frozen=True)
class ForgeConfig:
    width: int = 500
    height: int = 375
    classes: tuple[int, ...] = tuple(range(1, 21))
    samples_per_class: int = 100
    dataset_seed: int = 0
    min_objects: int = 1
    max_objects: int = 3
    mixed_classes: bool = False
    scale_min: float = 1.0
    scale_max: float = 2.0
    rotation_min: Vec3 = (0.0, 0.0, 0.0)
    rotation_max: Vec3 = (2 * math.pi,) * 3
    translation_min: Vec3 = (-2.5, -1.5, -2.0)
    translation_max: Vec3 = (2.5, 1.5, 1.0)
    camera_position: Vec3 = (0.0, 0.0, 8.0)
    camera_look_at: Vec3 = (0.0, 0.0, 0.0)
    camera_jitter: Vec3 = (0.0, 0.0, 0.0)
    fov_deg: float = 45.0
    light_intensity_min: float = 0.7
    light_intensity_max: float = 1.3
    tint_min: float = 0.4
    tint_max: float = 1.0
    mesh_pools: dict[int, tuple[str, ...]] = field(default_factory=dict)
    backgrounds: tuple[str, ...] = ()
    procedural_backgrounds: int = 64

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("frame size must be positive")
        if not self.classes or any(not 1 <= c <= 20 for c in self.classes):
            raise ValueError("classes must be a non-empty subset of 1..20")
        if self.samples_per_class < 0:
            raise ValueError("samples_per_class must be >= 0")
        if not 1 <= self.min_objects <= self.max_objects:
            raise ValueError("need 1 <= min_objects <= max_objects")
        ranges = [(self.scale_min, self.scale_max), (self.light_intensity_min, self.light_intensity_max),
                  (self.tint_min, self.tint_max)]
        ranges += list(zip(self.rotation_min, self.rotation_max))
        ranges += list(zip(self.translation_min, self.translation_max))
        for lo, hi in ranges:
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ValueError(f"invalid range [{lo}, {hi}]")
        if self.scale_min <= 0 or self.light_intensity_min < 0 or self.tint_min < 0:
            raise ValueError("scale must be > 0; intensity and tint must be >= 0")
        if not 0 < self.fov_deg < 180:
            raise ValueError("fov_deg must be in (0, 180)")
        if any(j < 0 for j in self.camera_jitter):
            raise ValueError("camera_jitter must be >= 0")
        if not self.backgrounds and self.procedural_backgrounds < 1:
            raise ValueError("need background images or procedural_backgrounds >= 1")
        for c in self.classes:
            if not self.pool(c):
                raise ValueError(f"class {VOC.names[c]} has an empty mesh pool")

    def pool(self, class_index: int) -> tuple[str, ...]:
        return self.mesh_pools.get(class_index, DEFAULT_POOL)

    def background_pool(self) -> tuple[str, ...]:
        if self.backgrounds:
            return self.backgrounds
        return tuple(f"{PROCEDURAL_PREFIX}{i}" for i in range(self.procedural_backgrounds))

    def with_overrides(self, **kw) -> "ForgeConfig":
        return replace(self, **kw)

    @classmethod
    def from_text(cls, text: str, base_dir: str | os.PathLike = ".") -> "ForgeConfig":
        parser = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                           comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
        parser.optionxform = str
        parser.read_string("[forge]\n" + text)
        raw = dict(parser["forge"])
        return cls._from_mapping(raw, Path(base_dir))

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "ForgeConfig":
        path = Path(path)
        return cls.from_text(path.read_text(), path.parent)

    @classmethod
    def _from_mapping(cls, raw: dict[str, str], base: Path) -> "ForgeConfig":
        kw = {}
        types = {f.name: f.type for f in fields(cls)}

        def resolve(p: str) -> str:
            p = p.strip()
            if p.startswith(("builtin:", PROCEDURAL_PREFIX)) or os.path.isabs(p):
                return p
            return str(base / p)

        pools: dict[int, tuple[str, ...]] = {}
        mesh_dir = raw.pop("mesh_dir", "").strip()
        if mesh_dir:
            root = Path(resolve(mesh_dir))
            if not root.is_dir():
                raise ValueError(f"mesh_dir {root} is not a directory")
            for c in range(1, 21):
                sub = root / VOC.names[c]
                if sub.is_dir():
                    found = tuple(str(p) for p in sorted(sub.glob("*.obj")))
                    if found:
                        pools[c] = found
        for key in [k for k in raw if k.startswith("mesh.")]:
            name = key[len("mesh."):]
            refs = tuple(resolve(p) for p in raw.pop(key).split(",") if p.strip())
            pools[VOC.index(name)] = refs
        kw["mesh_pools"] = pools

        bg_dir = raw.pop("background_dir", "").strip()
        if bg_dir:
            root = Path(resolve(bg_dir))
            if not root.is_dir():
                raise ValueError(f"background_dir {root} is not a directory")
            found = tuple(str(p) for p in sorted(root.iterdir()) if p.suffix.lower() in IMAGE_EXTENSIONS)
            if not found:
                raise ValueError(f"no background images in {root}")
            kw["backgrounds"] = found

        if "classes" in raw:
            value = raw.pop("classes").strip()
            kw["classes"] = tuple(range(1, 21)) if value == "all" else tuple(
                VOC.index(n.strip()) for n in value.split(",") if n.strip())

        for key, value in raw.items():
            if key not in types or key in ("mesh_pools", "backgrounds"):
                raise ValueError(f"unknown config key {key!r}")
            kw[key] = _convert(types[key], value, key)
        return cls(**kw)

    def to_text(self) -> str:
        """Serialise to the key-value format (explicit mesh and background lists)."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "mesh_pools":
                for c, refs in sorted(v.items()):
                    lines.append(f"mesh.{VOC.names[c]} = {','.join(refs)}")
                continue
            if f.name == "backgrounds":
                continue
            if f.name == "classes":
                v = ",".join(VOC.names[c] for c in v)
            elif isinstance(v, tuple):
                v = ",".join(repr(float(x)) for x in v)
            elif isinstance(v, bool):
                v = str(v).lower()
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


def _convert(type_name, value: str, key: str):
    value = value.strip()
    try:
        if type_name in ("int", int):
            return int(value)
        if type_name in ("float", float):
            return float(value)
        if type_name in ("bool", bool):
            if value.lower() in ("1", "true", "yes", "on"):
                return True
            if value.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if type_name in ("Vec3", Vec3):
            parts = tuple(float(p) for p in value.split(","))
            if len(parts) != 3:
                raise ValueError(value)
            return parts
    except ValueError:
        raise ValueError(f"bad value for {key}: {value!r}") from None
    raise ValueError(f"key {key!r} cannot be set from text")
