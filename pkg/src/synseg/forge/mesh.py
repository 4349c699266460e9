"""Triangle meshes: Wavefront OBJ loading and a few procedural primitives."""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEFAULT_ALBEDO = (0.5, 0.5, 0.5)


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray  # (V, 3) float64
    triangles: np.ndarray  # (T, 3) int64
    albedo: np.ndarray  # (T, 3) float64 in [0, 1]

    def __post_init__(self):
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError("vertices must be (V, 3)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3 or self.triangles.shape[0] == 0:
            raise MeshError("mesh has no triangles")
        if self.triangles.min() < 0 or self.triangles.max() >= self.vertices.shape[0]:
            raise MeshError("triangle index out of range")
        if self.albedo.shape != (self.triangles.shape[0], 3):
            raise MeshError("need one albedo per triangle")

    def normalized(self) -> "Mesh":
        """Copy centred on its bounding box with largest extent 1."""
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        extent = float((hi - lo).max())
        if extent == 0:
            raise MeshError("mesh is degenerate (zero extent)")
        return Mesh((self.vertices - (lo + hi) / 2) / extent, self.triangles, self.albedo)

    def with_albedo(self, rgb) -> "Mesh":
        albedo = np.tile(np.asarray(rgb, dtype=np.float64), (self.triangles.shape[0], 1))
        return Mesh(self.vertices, self.triangles, albedo)


def parse_mtl(text: str) -> dict[str, tuple[float, float, float]]:
    """Diffuse colours (``Kd``) keyed by material name."""
    colors = {}
    name = None
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "newmtl" and len(parts) > 1:
            name = " ".join(parts[1:])
        elif parts[0] == "Kd" and name is not None and len(parts) >= 4:
            colors[name] = tuple(float(np.clip(float(v), 0, 1)) for v in parts[1:4])
    return colors


def load_mesh(data: bytes | str, materials: dict | None = None) -> Mesh:
    """Parse OBJ text (``v`` and ``f`` records; others ignored).

    Faces with more than three vertices are fan-triangulated.  ``usemtl``
    colours come from ``materials``; unknown or absent materials give mid-grey.
    """
    text = data.decode("utf-8", errors="replace") if isinstance(data, bytes) else data
    materials = materials or {}
    vertices = []
    faces = []
    colors = []
    current = DEFAULT_ALBEDO
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise MeshError(f"line {lineno}: vertex needs 3 coordinates")
            try:
                vertices.append([float(p) for p in parts[1:4]])
            except ValueError:
                raise MeshError(f"line {lineno}: bad vertex {raw.strip()!r}") from None
        elif tag == "f":
            if len(parts) < 4:
                raise MeshError(f"line {lineno}: face needs at least 3 vertices")
            idx = []
            for p in parts[1:]:
                try:
                    i = int(p.split("/", 1)[0])
                except ValueError:
                    raise MeshError(f"line {lineno}: bad face index {p!r}") from None
                # OBJ is 1-based; negative indices count back from the last vertex
                i = i - 1 if i > 0 else len(vertices) + i
                if i < 0 or i >= len(vertices):
                    raise MeshError(f"line {lineno}: face index {p} out of range")
                idx.append(i)
            for k in range(1, len(idx) - 1):
                faces.append((idx[0], idx[k], idx[k + 1]))
                colors.append(current)
        elif tag == "usemtl":
            current = materials.get(" ".join(parts[1:]), DEFAULT_ALBEDO)
    if not faces:
        raise MeshError("no faces in model")
    return Mesh(np.array(vertices, dtype=np.float64), np.array(faces, dtype=np.int64),
                np.array(colors, dtype=np.float64))


def load_mesh_file(path: str | os.PathLike) -> Mesh:
    """Load an OBJ file, picking up ``mtllib`` files next to it if present."""
    path = Path(path)
    text = path.read_text(errors="replace")
    materials = {}
    for line in text.splitlines():
        parts = line.split()
        if len(parts) > 1 and parts[0] == "mtllib":
            mtl = path.parent / " ".join(parts[1:])
            if mtl.is_file():
                materials.update(parse_mtl(mtl.read_text(errors="replace")))
    return load_mesh(text, materials)


def _grey(t: int) -> np.ndarray:
    return np.tile(np.array(DEFAULT_ALBEDO), (t, 1))


def square() -> Mesh:
    """Unit square in the z = 0 plane, facing +z."""
    v = np.array([[-0.5, -0.5, 0], [0.5, -0.5, 0], [0.5, 0.5, 0], [-0.5, 0.5, 0]], dtype=np.float64)
    t = np.array([[0, 1, 2], [0, 2, 3]])
    return Mesh(v, t, _grey(2))


def cube() -> Mesh:
    v = np.array([[x, y, z] for x in (-0.5, 0.5) for y in (-0.5, 0.5) for z in (-0.5, 0.5)])
    quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
    t = np.array([tri for a, b, c, d in quads for tri in ((a, b, c), (a, c, d))])
    return Mesh(v, t, _grey(len(t)))


def uv_sphere(stacks: int = 12, slices: int = 16) -> Mesh:
    verts = [[0.0, 0.5, 0.0]]
    for i in range(1, stacks):
        phi = np.pi * i / stacks
        for j in range(slices):
            th = 2 * np.pi * j / slices
            verts.append([0.5 * np.sin(phi) * np.cos(th), 0.5 * np.cos(phi), 0.5 * np.sin(phi) * np.sin(th)])
    verts.append([0.0, -0.5, 0.0])
    bottom = len(verts) - 1
    tris = []
    for j in range(slices):
        tris.append((0, 1 + (j + 1) % slices, 1 + j))
    for i in range(stacks - 2):
        a0 = 1 + i * slices
        b0 = a0 + slices
        for j in range(slices):
            j1 = (j + 1) % slices
            tris.append((a0 + j, a0 + j1, b0 + j1))
            tris.append((a0 + j, b0 + j1, b0 + j))
    last = 1 + (stacks - 2) * slices
    for j in range(slices):
        tris.append((last + j, last + (j + 1) % slices, bottom))
    return Mesh(np.array(verts), np.array(tris), _grey(len(tris)))


def cylinder(slices: int = 20, apex: bool = False) -> Mesh:
    """Closed cylinder along y, or a cone when ``apex`` is set."""
    ring = [[0.5 * np.cos(2 * np.pi * j / slices), -0.5, 0.5 * np.sin(2 * np.pi * j / slices)]
            for j in range(slices)]
    top = [[0.0, 0.5, 0.0]] if apex else [[x, 0.5, z] for x, _, z in ring]
    verts = ring + top + [[0.0, -0.5, 0.0], [0.0, 0.5, 0.0]]
    bc = len(verts) - 2
    tc = len(verts) - 1
    tris = []
    for j in range(slices):
        j1 = (j + 1) % slices
        tris.append((bc, j1, j))
        if apex:
            tris.append((j, j1, slices))
        else:
            tris.append((j, j1, slices + j1))
            tris.append((j, slices + j1, slices + j))
            tris.append((tc, slices + j, slices + j1))
    return Mesh(np.array(verts), np.array(tris), _grey(len(tris)))


def torus(major: int = 24, minor: int = 10, ratio: float = 0.35) -> Mesh:
    verts = []
    for i in range(major):
        u = 2 * np.pi * i / major
        for j in range(minor):
            v = 2 * np.pi * j / minor
            r = 1 + ratio * np.cos(v)
            verts.append([r * np.cos(u), ratio * np.sin(v), r * np.sin(u)])
    tris = []
    for i in range(major):
        for j in range(minor):
            a = i * minor + j
            b = ((i + 1) % major) * minor + j
            c = ((i + 1) % major) * minor + (j + 1) % minor
            d = i * minor + (j + 1) % minor
            tris += [(a, b, c), (a, c, d)]
    return Mesh(np.array(verts), np.array(tris), _grey(len(tris)))


BUILTIN = {
    "square": square,
    "cube": cube,
    "sphere": uv_sphere,
    "cylinder": cylinder,
    "cone": lambda: cylinder(apex=True),
    "torus": torus,
}
BUILTIN_PREFIX = "builtin:"
DEFAULT_POOL = tuple(BUILTIN_PREFIX + k for k in ("cube", "sphere", "cylinder", "cone", "torus"))


def builtin_mesh(name: str) -> Mesh:
    try:
        return BUILTIN[name]()
    except KeyError:
        raise MeshError(f"unknown builtin mesh {name!r}") from None
