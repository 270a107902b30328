"""Scene geometry: a planar surface, a pinhole camera and a point light.

The surface spans [-e, e]^2 at z = 0. The camera sits on the +z axis at the
height where its full horizontal field of view exactly covers the surface,
looking down -z. The point light has a position, an RGB radiant intensity
and inverse-square falloff; a constant ambient term lights the diffuse
component only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .brdf import R_MIN

# Defaults for the mobile-flash capture geometry.
DEFAULT_FOV_DEG = 43.35
DEFAULT_F0 = 0.05
METAL_F0 = 0.5

_SCENE_FIELDS = (
    "fov_deg",
    "surface_half_extent",
    "light_position",
    "light_intensity",
    "ambient",
    "resolution",
)


@dataclass(frozen=True)
class SceneConfig:
    fov_deg: float
    surface_half_extent: float
    light_position: tuple[float, float, float]
    light_intensity: tuple[float, float, float]
    ambient: tuple[float, float, float]
    resolution: tuple[int, int]  # (H, W)

    def __post_init__(self):
        if not 0.0 < self.fov_deg < 180.0:
            raise ValueError("fov_deg must lie in (0, 180)")
        if self.surface_half_extent <= 0:
            raise ValueError("surface_half_extent must be positive")
        if self.light_position[2] <= 0:
            raise ValueError("light_position must have positive z")
        h, w = self.resolution
        if h < 1 or w < 1:
            raise ValueError("resolution must be positive")

    @property
    def camera_height(self) -> float:
        return self.surface_half_extent / math.tan(math.radians(self.fov_deg) / 2.0)

    @property
    def camera_position(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.camera_height])

    def with_light(self, position) -> "SceneConfig":
        p = tuple(float(x) for x in np.asarray(position).reshape(3))
        return replace(self, light_position=p)

    def to_json(self) -> str:
        doc = {
            "fov_deg": self.fov_deg,
            "surface_half_extent": self.surface_half_extent,
            "light_position": list(self.light_position),
            "light_intensity": list(self.light_intensity),
            "ambient": list(self.ambient),
            "resolution": list(self.resolution),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "SceneConfig":
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise ValueError("scene config must be a JSON object")
        unknown = set(doc) - set(_SCENE_FIELDS)
        if unknown:
            raise ValueError(f"unknown scene config fields: {sorted(unknown)}")
        missing = set(_SCENE_FIELDS) - set(doc)
        if missing:
            raise ValueError(f"missing scene config fields: {sorted(missing)}")
        return cls(
            fov_deg=float(doc["fov_deg"]),
            surface_half_extent=float(doc["surface_half_extent"]),
            light_position=tuple(float(x) for x in doc["light_position"]),
            light_intensity=tuple(float(x) for x in doc["light_intensity"]),
            ambient=tuple(float(x) for x in doc["ambient"]),
            resolution=tuple(int(x) for x in doc["resolution"]),
        )


def default_flash_intensity(fov_deg: float = DEFAULT_FOV_DEG, surface_half_extent: float = 1.0) -> float:
    """Intensity for which a flat white Lambertian center pixel renders to 0.8.

    With a collocated flash the center pixel sees n.l = 1 at distance equal
    to the camera height, so radiance = intensity / height^2 there.
    """
    height = surface_half_extent / math.tan(math.radians(fov_deg) / 2.0)
    return 0.8 * height * height


def default_scene(resolution=(64, 64), fov_deg=DEFAULT_FOV_DEG, surface_half_extent=1.0,
                  ambient=(0.0, 0.0, 0.0), intensity=None) -> SceneConfig:
    """Collocated-flash scene with the standard capture geometry."""
    if intensity is None:
        intensity = default_flash_intensity(fov_deg, surface_half_extent)
    height = surface_half_extent / math.tan(math.radians(fov_deg) / 2.0)
    return SceneConfig(
        fov_deg=fov_deg,
        surface_half_extent=surface_half_extent,
        light_position=(0.0, 0.0, height),
        light_intensity=(intensity, intensity, intensity),
        ambient=tuple(float(a) for a in ambient),
        resolution=tuple(int(x) for x in resolution),
    )


def pixel_world_position(config: SceneConfig, row: int, col: int) -> np.ndarray:
    """Intersection of the pinhole ray through a pixel center with z = 0.

    The top-left pixel maps toward (-e, +e); pixel centers sit at half-pixel
    offsets, so the center pixel of an odd resolution lands on the origin.
    """
    h, w = config.resolution
    if not (0 <= row < h and 0 <= col < w):
        raise ValueError("pixel index out of range")
    e = config.surface_half_extent
    x = -e + (col + 0.5) * (2.0 * e / w)
    y = e - (row + 0.5) * (2.0 * e / h)
    return np.array([x, y, 0.0])


def pixel_grid(config: SceneConfig) -> np.ndarray:
    """(H, W, 3) world positions of all pixel centers on the surface plane."""
    h, w = config.resolution
    e = config.surface_half_extent
    xs = -e + (np.arange(w) + 0.5) * (2.0 * e / w)
    ys = e - (np.arange(h) + 0.5) * (2.0 * e / h)
    grid = np.zeros((h, w, 3))
    grid[..., 0] = xs[None, :]
    grid[..., 1] = ys[:, None]
    return grid


@dataclass
class SvbrdfMaps:
    """Per-pixel material under estimation: albedo, normal, roughness, F0."""

    albedo: np.ndarray     # (H, W, 3) linear RGB, >= 0
    normal: np.ndarray     # (H, W, 3) unit vectors, z > 0
    roughness: np.ndarray  # (H, W) in [R_MIN, 1]
    f0: float = DEFAULT_F0

    @property
    def resolution(self) -> tuple[int, int]:
        return self.albedo.shape[0], self.albedo.shape[1]

    def validate(self) -> None:
        a, n, r = self.albedo, self.normal, self.roughness
        if a.ndim != 3 or a.shape[2] != 3:
            raise ValueError("albedo must be (H, W, 3)")
        if n.shape != a.shape:
            raise ValueError("normal map dimensions must match albedo")
        if r.shape != a.shape[:2]:
            raise ValueError("roughness map dimensions must match albedo")
        if np.any(a < 0):
            raise ValueError("albedo must be non-negative")
        norms = np.linalg.norm(n, axis=-1)
        if np.any(np.abs(norms - 1.0) > 1e-5):
            raise ValueError("normals must be unit length within 1e-5")
        if np.any(n[..., 2] <= 0):
            raise ValueError("normals must have positive z")
        if np.any(r < R_MIN - 1e-9) or np.any(r > 1.0 + 1e-9):
            raise ValueError(f"roughness must lie in [{R_MIN}, 1]")
        if not 0.0 <= self.f0 <= 1.0:
            raise ValueError("f0 must lie in [0, 1]")

    def copy(self) -> "SvbrdfMaps":
        return SvbrdfMaps(self.albedo.copy(), self.normal.copy(), self.roughness.copy(), self.f0)


def flat_normal_map(resolution) -> np.ndarray:
    h, w = resolution
    n = np.zeros((h, w, 3))
    n[..., 2] = 1.0
    return n


def uniform_maps(resolution, albedo=(0.5, 0.5, 0.5), roughness=0.5, f0=DEFAULT_F0) -> SvbrdfMaps:
    """Constant-parameter material, handy as a test fixture and fit seed."""
    h, w = resolution
    a = np.broadcast_to(np.asarray(albedo, dtype=float), (h, w, 3)).copy()
    r = np.full((h, w), float(roughness))
    return SvbrdfMaps(albedo=a, normal=flat_normal_map(resolution), roughness=r, f0=f0)


def normalize_vectors(v: np.ndarray) -> np.ndarray:
    """Unit-normalize along the last axis; zero vectors pass through."""
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.where(norm > 0, norm, 1.0)
