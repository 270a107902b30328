"""Tour of the loss suite on a pair of materials.

Shows the per-map L2 losses, the angle-binned normal loss (rare oblique
normals get upweighted), the tonemapped reconstruction loss under the input
flash plus sampled novel lights, and the combined objectives with and
without the material-classifier term.
"""

import numpy as np

import svbrdfkit as kit

resolution = (24, 24)
scene = kit.default_scene(resolution)
rng = np.random.default_rng(1)

gt_albedo = 0.3 + 0.4 * rng.random((*resolution, 3))
gt_norm = kit.normalize_vectors(np.concatenate(
    [0.3 * rng.standard_normal((*resolution, 2)), np.ones((*resolution, 1))], axis=-1))
gt = kit.SvbrdfMaps(gt_albedo, gt_norm, 0.4 + 0.4 * rng.random(resolution), f0=0.05)

pred = gt.copy()
pred.albedo = np.clip(pred.albedo + 0.05 * rng.standard_normal(pred.albedo.shape), 0, None)
pred.normal = kit.normalize_vectors(pred.normal + 0.05 * rng.standard_normal(pred.normal.shape))
pred.roughness = np.clip(pred.roughness + 0.05 * rng.standard_normal(resolution), 0.1, 1.0)

table = kit.NormalBinTable()
print("normal bins:", table.boundaries_deg, "probs:", table.probabilities)
print("bin weights (0.7 + 1/(10 P)):", np.round(table.weights, 3))

print(f"\nalbedo L2          : {kit.l2_map_loss(pred.albedo, gt.albedo):.5f}")
print(f"weighted normal L2 : {kit.weighted_normal_loss(pred.normal, gt.normal, table):.5f}")
print(f"roughness L2       : {kit.l2_map_loss(pred.roughness, gt.roughness):.5f}")

novel = [kit.sample_novel_light(s, float(scene.camera_height)) for s in range(3)]
print(f"reconstruction     : {kit.recon_loss(pred, gt, scene, novel):.5f} "
      f"(input flash + {len(novel)} novel lights)")

weights = kit.LossWeights()
total, terms = kit.total_loss(pred, gt, weights, table, scene, novel)
print(f"\ncombined objective : {total:.5f}")
for name, value in terms.items():
    print(f"  {name:10s} {value:.5f}")

probs = np.array([0.05, 0.6, 0.1, 0.05, 0.05, 0.05, 0.05, 0.05])
total_cls, terms_cls = kit.total_loss_cls(pred, gt, weights, table, scene, probs,
                                          label=1, novel_lights=novel)
print(f"with classifier    : {total_cls:.5f} "
      f"(cross entropy {terms_cls['classifier']:.4f} at weight {weights.lambda_cls})")
