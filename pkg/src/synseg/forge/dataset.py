"""Render a whole synthetic dataset to disk.

Layout under the output directory::

    images/<image_id>.png    rendered RGB
    labels/<image_id>.png    VOC indexed-palette labels
    manifest.txt             "image_id class_name seed" per line
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ..voc import VOC, write_label, write_rgb
from .config import ForgeConfig
from .render import AssetStore, RenderSample, render
from .scene import sample_scene, sample_seed


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    class_index: int
    seed: int

    def to_line(self) -> str:
        return f"{self.image_id} {VOC.names[self.class_index]} {self.seed}\n"


def plan_samples(config: ForgeConfig) -> list[ManifestEntry]:
    entries = []
    for c in config.classes:
        for i in range(config.samples_per_class):
            entries.append(ManifestEntry(f"syn_{VOC.names[c]}_{i:04d}", c,
                                         sample_seed(config.dataset_seed, c, i)))
    return entries


def read_manifest(path: str | os.PathLike) -> list[ManifestEntry]:
    entries = []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'image_id class_name seed'")
            entries.append(ManifestEntry(parts[0], VOC.index(parts[1]), int(parts[2])))
    return entries


def render_entry(config: ForgeConfig, entry: ManifestEntry, assets: AssetStore) -> RenderSample:
    return render(sample_scene(config, entry.class_index, entry.seed), assets)


def generate_dataset(config: ForgeConfig, out_dir: str | os.PathLike, threads: int = 1,
                     assets: AssetStore | None = None) -> list[ManifestEntry]:
    """Render ``samples_per_class`` images for every configured class.

    Output bytes do not depend on ``threads``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    assets = assets or AssetStore()
    entries = plan_samples(config)
    if entries:
        (out / "images").mkdir(exist_ok=True)
        (out / "labels").mkdir(exist_ok=True)

    def work(entry: ManifestEntry) -> None:
        sample = render_entry(config, entry, assets)
        write_rgb(out / "images" / f"{entry.image_id}.png", sample.rgb)
        write_label(out / "labels" / f"{entry.image_id}.png", sample.label)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, entries))
    else:
        for e in entries:
            work(e)
    with open(out / "manifest.txt", "w") as f:
        f.writelines(e.to_line() for e in entries)
    return entries
