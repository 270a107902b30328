"""Dataset augmentation arithmetic and parameter-scaling transforms.

A source material expands into 270 patches (27 multi-scale crops times 10
geometric variants); each patch's maps are randomly rescaled. This script
shows the bookkeeping and the distributions of the scale draws.
"""

import numpy as np

import svbrdfkit as kit

plan = kit.AugmentPlan()
descriptors = kit.patch_plan(plan)
print(f"default plan: {len(descriptors)} descriptors "
      f"({sum(plan.crop_counts)} crops x 10 variants)")
by_rot = {}
for d in descriptors:
    key = (d.flip, d.rotation_deg)
    by_rot[key] = by_rot.get(key, 0) + 1
print("variants per crop:", dict(sorted(by_rot.items())))

# materialize a few patches from a toy source material
rng = np.random.default_rng(0)
size = 256
albedo = 0.2 + 0.6 * rng.random((size, size, 3))
xy = 0.2 * rng.standard_normal((size, size, 2))
normal = kit.normalize_vectors(np.concatenate([xy, np.ones((size, size, 1))], axis=-1))
rough = 0.2 + 0.7 * rng.random((size, size))
material = kit.SvbrdfMaps(albedo, normal, rough, f0=0.05)

small_plan = kit.AugmentPlan(crop_sizes=(128, 192), crop_counts=(2, 1),
                             output_size=64, seed=4, source_size=size)
for desc in kit.patch_plan(small_plan)[:6]:
    patch = kit.materialize_patch(material, desc, small_plan.output_size)
    patch.albedo = kit.scale_albedo(patch.albedo, rng)
    patch.normal = kit.scale_normal(patch.normal, rng)
    patch.roughness = kit.scale_roughness(patch.roughness, rng)
    patch.validate()
    print(f"crop@({desc.row0:3d},{desc.col0:3d}) size {desc.size} "
          f"flip={desc.flip:4s} rot={desc.rotation_deg:3d} -> {patch.resolution}")

# distribution of the scale draws
draws = np.random.default_rng(1)
albedo_scales = np.array([kit.scale_albedo(np.ones((1, 1, 3)), draws)[0, 0, 0]
                          for _ in range(10_000)])
rough_mults = np.array([kit.scale_roughness(np.full((1, 1), 0.5), draws)[0, 0] / 0.5
                        for _ in range(10_000)])
print(f"albedo scale: uniform on [0.8, 1.4], sample mean {albedo_scales.mean():.3f}")
print(f"roughness multiplier: normal(1, 0.2^2), sample std {rough_mults.std():.3f}")
