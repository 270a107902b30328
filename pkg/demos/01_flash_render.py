"""Render a procedural material under a collocated camera flash.

Builds a small spatially varying material, renders it with the default
mobile-capture geometry (43.35 degree field of view, inverse-square point
light at the camera), and writes both the linear PFM and a tonemapped
preview PNG to demos/out/.
"""

from pathlib import Path

import numpy as np

import svbrdfkit as kit

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

# A checkered material: waxy red tiles with rough grout lines and a gentle
# normal bump per tile.
resolution = (128, 128)
scene = kit.default_scene(resolution)
points = kit.pixel_grid(scene)
x, y = points[..., 0], points[..., 1]

tile = ((np.floor(3 * (x + 1)) + np.floor(3 * (y + 1))) % 2).astype(bool)
albedo = np.where(tile[..., None], [0.55, 0.12, 0.10], [0.35, 0.33, 0.30])
roughness = np.where(tile, 0.25, 0.8)
bump_x = 0.25 * np.sin(3 * np.pi * (x + 1))
bump_y = 0.25 * np.sin(3 * np.pi * (y + 1))
normal = kit.normalize_vectors(np.stack([bump_x, bump_y, np.ones_like(x)], axis=-1))

maps = kit.SvbrdfMaps(albedo=albedo, normal=normal, roughness=roughness, f0=0.05)
maps.validate()

image = kit.render_image(maps, scene)
print(f"rendered {resolution[0]}x{resolution[1]}, radiance range "
      f"[{image.min():.3f}, {image.max():.3f}]")

kit.write_pfm(out_dir / "flash_render.pfm", image.astype(np.float32))
preview = np.clip(np.round(255 * kit.tonemap(image)), 0, 255).astype(np.uint8)
kit.write_png(out_dir / "flash_render.png", preview)
print(f"wrote {out_dir / 'flash_render.pfm'} and {out_dir / 'flash_render.png'}")

# Relight the same material from a sampled oblique direction: the specular
# highlight moves off-center.
novel = kit.sample_novel_light(7, radius=float(scene.camera_height))
relit = kit.render_image(maps, scene.with_light(novel))
kit.write_png(out_dir / "flash_relit.png",
              np.clip(np.round(255 * kit.tonemap(relit)), 0, 255).astype(np.uint8))
print(f"relit under light at {np.round(novel, 3)} -> {out_dir / 'flash_relit.png'}")
