"""Randomised synthetic scenes rendered with pixel-exact labels."""
from .config import ForgeConfig
from .dataset import ManifestEntry, generate_dataset, read_manifest, render_entry
from .mesh import Mesh, MeshError, load_mesh, load_mesh_file
from .render import AssetError, AssetStore, RenderSample, render
from .scene import Camera, Light, SceneDescription, SceneObject, sample_scene, sample_seed

__all__ = [
    "AssetError", "AssetStore", "Camera", "ForgeConfig", "Light", "ManifestEntry", "Mesh",
    "MeshError", "RenderSample", "SceneDescription", "SceneObject", "generate_dataset",
    "load_mesh", "load_mesh_file", "read_manifest", "render", "render_entry", "sample_scene",
    "sample_seed",
]
