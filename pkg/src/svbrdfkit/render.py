"""Forward rendering of an SVBRDF map under a point light plus ambient.

Per pixel the radiance is

    rho(params, vectors) * max(n.l, 0) * intensity / dist^2 + albedo * ambient

with no shadowing or interreflection. Everything is a deterministic
per-pixel map, so identical inputs produce bit-identical images.
"""

from __future__ import annotations

import numpy as np

from .brdf import EPS_COS, distribution_term, fresnel_term, geometry_term
from .scene import SceneConfig, SvbrdfMaps, normalize_vectors, pixel_grid

GAMMA = 2.2
CLAMP_HI = 1.5


def tonemap(x):
    """clamp to [0, 1.5], then gamma 1/2.2; applied before loss comparison."""
    return np.clip(np.asarray(x, dtype=float), 0.0, CLAMP_HI) ** (1.0 / GAMMA)


def tonemap_grad(x):
    """Derivative of tonemap; 0 inside the saturated clamp.

    Points exactly at the upper clamp take the smooth branch. At x = 0 the
    power law is unbounded, so the subgradient 0 is returned instead.
    """
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    live = (x > 0.0) & (x <= CLAMP_HI)
    g[live] = (1.0 / GAMMA) * x[live] ** (1.0 / GAMMA - 1.0)
    return g


def _shading_geometry(maps: SvbrdfMaps, config: SceneConfig, view_from_camera: bool):
    """Per-pixel vectors and cosines shared by the renderer and its gradients."""
    points = pixel_grid(config)
    if view_from_camera:
        view = normalize_vectors(config.camera_position[None, None, :] - points)
    else:
        view = np.broadcast_to(np.array([0.0, 0.0, 1.0]), points.shape).copy()
    to_light = np.asarray(config.light_position, dtype=float)[None, None, :] - points
    dist_sq = np.sum(to_light * to_light, axis=-1)
    light = to_light / np.sqrt(dist_sq)[..., None]
    half = normalize_vectors(view + light)
    n = maps.normal
    return {
        "view": view,
        "light": light,
        "half": half,
        "dist_sq": dist_sq,
        "nl": np.sum(n * light, axis=-1),
        "nv": np.sum(n * view, axis=-1),
        "nh": np.sum(n * half, axis=-1),
        "vh": np.sum(view * half, axis=-1),
    }


def render_forward(maps: SvbrdfMaps, config: SceneConfig, view_from_camera: bool = True):
    """Render and return the image together with all shading intermediates."""
    if maps.resolution != tuple(config.resolution):
        raise ValueError("maps and scene config disagree on resolution")
    geo = _shading_geometry(maps, config, view_from_camera)
    nl, nv = geo["nl"], geo["nv"]
    nlc = np.maximum(nl, EPS_COS)
    nvc = np.maximum(nv, EPS_COS)
    d_term = distribution_term(geo["nh"], maps.roughness)
    f_term = fresnel_term(geo["vh"], maps.f0)
    g_term = geometry_term(nvc, nlc, maps.roughness)
    spec = d_term * f_term * g_term / (4.0 * nlc * nvc)

    intensity = np.asarray(config.light_intensity, dtype=float)
    ambient = np.asarray(config.ambient, dtype=float)
    falloff = intensity[None, None, :] / geo["dist_sq"][..., None]
    cos_shade = np.maximum(nl, 0.0)
    shade = cos_shade[..., None] * falloff
    image = (maps.albedo + spec[..., None]) * shade + maps.albedo * ambient[None, None, :]

    geo.update({
        "nlc": nlc, "nvc": nvc,
        "d_term": d_term, "f_term": f_term, "g_term": g_term,
        "spec": spec, "falloff": falloff, "cos_shade": cos_shade,
        "shade": shade, "ambient": ambient, "image": image,
    })
    return geo


def render_image(maps: SvbrdfMaps, config: SceneConfig, view_from_camera: bool = True) -> np.ndarray:
    """(H, W, 3) linear RGB radiance of the surface under the configured light."""
    return render_forward(maps, config, view_from_camera)["image"]


def sample_novel_light(rng_seed: int, radius: float) -> np.ndarray:
    """Point uniform by solid angle on the upper hemisphere of the given radius.

    Draw order is fixed (z first, then azimuth) so a seed pins the sample.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    rng = np.random.default_rng(rng_seed)
    z = 1.0 - rng.uniform()  # (0, 1]: z stays strictly positive
    phi = rng.uniform(0.0, 2.0 * np.pi)
    s = np.sqrt(max(1.0 - z * z, 0.0))
    return radius * np.array([s * np.cos(phi), s * np.sin(phi), z])


def sample_flash_position(rng_seed: int, config: SceneConfig, sigma_frac: float) -> np.ndarray:
    """Camera position plus isotropic Gaussian jitter, z clamped positive.

    The per-axis standard deviation is sigma_frac times the camera height.
    """
    if sigma_frac < 0:
        raise ValueError("sigma_frac must be non-negative")
    rng = np.random.default_rng(rng_seed)
    pos = config.camera_position + rng.normal(0.0, 1.0, size=3) * (sigma_frac * config.camera_height)
    pos[2] = max(pos[2], 1e-6)
    return pos
