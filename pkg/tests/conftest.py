import numpy as np
import pytest

import svbrdfkit as kit


def random_maps(seed, resolution, rough_range=(0.35, 0.95), tilt=0.25, f0=0.05):
    """Smooth random material: positive albedo, tilted unit normals."""
    rng = np.random.default_rng(seed)
    h, w = resolution
    albedo = np.clip(0.25 + 0.5 * rng.random((h, w, 3)), 0.0, None)
    xy = tilt * rng.standard_normal((h, w, 2))
    normal = kit.normalize_vectors(np.concatenate([xy, np.ones((h, w, 1))], axis=-1))
    lo, hi = rough_range
    rough = lo + (hi - lo) * rng.random((h, w))
    maps = kit.SvbrdfMaps(albedo=albedo, normal=normal, roughness=rough, f0=f0)
    maps.validate()
    return maps


def jitter_maps(maps, seed, albedo_amp=0.1, normal_deg=10.0, rough_amp=0.1):
    """Perturbed copy: uniform albedo noise, angular normal jitter, roughness noise."""
    rng = np.random.default_rng(seed)
    h, w = maps.resolution
    out = maps.copy()
    out.albedo = np.clip(out.albedo + rng.uniform(-albedo_amp, albedo_amp, out.albedo.shape), 0.0, None)
    axis = rng.standard_normal((h, w, 3))
    axis -= np.sum(axis * maps.normal, axis=-1, keepdims=True) * maps.normal
    axis = kit.normalize_vectors(axis)
    ang = np.radians(rng.uniform(-normal_deg, normal_deg, (h, w)))[..., None]
    n = np.cos(ang) * maps.normal + np.sin(ang) * axis
    n[..., 2] = np.clip(np.abs(n[..., 2]), 1e-3, None)
    out.normal = kit.normalize_vectors(n)
    out.roughness = np.clip(out.roughness + rng.uniform(-rough_amp, rough_amp, (h, w)), kit.R_MIN, 1.0)
    out.validate()
    return out


@pytest.fixture
def scene16():
    return kit.default_scene((16, 16))
