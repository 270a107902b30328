"""Reference normals from many-light Lambertian photometric stereo.

52 directional lights shine on a sphere-cap material; per pixel, the 5
brightest and 5 darkest observations are discarded before the least-squares
solve. The trimming is what keeps the estimator usable when observations
carry specular highlights or shadows.
"""

import numpy as np

import svbrdfkit as kit

rng = np.random.default_rng(3)

# lights within 40 degrees of the zenith
count = 52
z = rng.uniform(np.cos(np.radians(40.0)), 1.0, count)
phi = rng.uniform(0, 2 * np.pi, count)
s = np.sqrt(1 - z * z)
dirs = np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)

# sphere-cap normals (up to 45 degrees of tilt) with varied albedo
size = 24
lim = np.sin(np.radians(45.0)) / np.sqrt(2)
yy, xx = np.meshgrid(np.linspace(-lim, lim, size), np.linspace(-lim, lim, size), indexing="ij")
zz = np.sqrt(1 - xx**2 - yy**2)
normals = kit.normalize_vectors(np.stack([xx, yy, zz], axis=-1))
albedo = 0.3 + 0.5 * rng.random((size, size, 3))

cos = np.einsum("lk,hwk->lhw", dirs, normals).clip(0)
images = cos[..., None] * albedo[None]

obs = kit.PsObservationSet(images=images, light_dirs=dirs, trim_high=5, trim_low=5)
est_n, est_a = kit.lambertian_ps(obs)
err = np.degrees(np.arccos(np.clip(np.sum(est_n * normals, -1), -1, 1)))
print(f"noiseless solve: mean angular error {err.mean():.2e} deg over {size * size} pixels")

# corrupt 10% of observations with strong highlights, compare trims
corrupt = rng.random((count, size, size)) < 0.10
dirty = images + corrupt[..., None] * 4.0
for trim in (0, 5):
    n_est, _ = kit.lambertian_ps(kit.PsObservationSet(dirty, dirs, trim, trim))
    e = np.degrees(np.arccos(np.clip(np.sum(n_est * normals, -1), -1, 1))).mean()
    print(f"10% outliers, trim {trim}/{trim}: mean angular error {e:.2f} deg")

# the per-pixel trim indices are recomputable with the pointwise helper
luma = images.mean(axis=3)
kept = kit.trim_observations(luma[:, 0, 0], trim_high=5, trim_low=5)
print(f"pixel (0,0) keeps {len(kept)} of {count} observations")
