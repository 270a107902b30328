"""Dataset augmentation: multi-scale crops with geometric variants, plus
random scaling of the BRDF parameters.

Each source material yields crops at several sizes, and every crop is
expanded into 10 geometric variants (identity, two axis flips, seven
45-degree rotations). Flips and rotations transform the normal vectors'
tangential components along with the pixel grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .brdf import R_MIN
from .scene import SvbrdfMaps, normalize_vectors

FLIPS = ("x", "y")
NON_IDENTITY_ROTATIONS = (45, 90, 135, 180, 225, 270, 315)
VARIANTS_PER_CROP = 1 + len(FLIPS) + len(NON_IDENTITY_ROTATIONS)  # 10


@dataclass(frozen=True)
class AugmentPlan:
    crop_sizes: tuple[int, ...] = (512, 1024, 2048, 3072, 4096)
    crop_counts: tuple[int, ...] = (12, 8, 4, 2, 1)
    output_size: int = 256
    seed: int = 0
    source_size: int = 4096

    def __post_init__(self):
        if len(self.crop_sizes) != len(self.crop_counts):
            raise ValueError("crop_sizes and crop_counts must align")
        if any(c < 0 for c in self.crop_counts):
            raise ValueError("crop counts must be non-negative")
        if self.output_size < 1:
            raise ValueError("output_size must be positive")

    def total_patches(self) -> int:
        return sum(self.crop_counts) * VARIANTS_PER_CROP


@dataclass(frozen=True)
class PatchDescriptor:
    row0: int
    col0: int
    size: int
    flip: str          # "none", "x" or "y"
    rotation_deg: int  # 0 or a multiple of 45


def patch_plan(plan: AugmentPlan) -> list[PatchDescriptor]:
    """Deterministic list of patch descriptors for one source material.

    The default plan emits exactly 270 descriptors: 27 crops times 10
    geometric variants. Crop offsets are drawn from the plan's seed.
    """
    for size in plan.crop_sizes:
        if size > plan.source_size:
            raise ValueError(f"source of size {plan.source_size} cannot fit a {size} crop")
    rng = np.random.default_rng(plan.seed)
    descriptors = []
    for size, count in zip(plan.crop_sizes, plan.crop_counts):
        for _ in range(count):
            row0 = int(rng.integers(0, plan.source_size - size + 1))
            col0 = int(rng.integers(0, plan.source_size - size + 1))
            descriptors.append(PatchDescriptor(row0, col0, size, "none", 0))
            for flip in FLIPS:
                descriptors.append(PatchDescriptor(row0, col0, size, flip, 0))
            for rot in NON_IDENTITY_ROTATIONS:
                descriptors.append(PatchDescriptor(row0, col0, size, "none", rot))
    return descriptors


def resize_bilinear(image: np.ndarray, out_size: int) -> np.ndarray:
    """Bilinear resample of a square (H, H[, C]) image to (out, out[, C])."""
    in_size = image.shape[0]
    coords = (np.arange(out_size) + 0.5) * in_size / out_size - 0.5
    rr, cc = np.meshgrid(coords, coords, indexing="ij")
    if image.ndim == 2:
        return ndimage.map_coordinates(image, [rr, cc], order=1, mode="nearest")
    out = np.empty((out_size, out_size, image.shape[2]))
    for c in range(image.shape[2]):
        out[..., c] = ndimage.map_coordinates(image[..., c], [rr, cc], order=1, mode="nearest")
    return out


def _rotation_matrix_xy(deg: float) -> np.ndarray:
    th = np.radians(deg)
    return np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])


def _rotate_channels(image: np.ndarray, deg: int) -> np.ndarray:
    """Rotate image content by deg counterclockwise in x-right/y-up terms.

    Multiples of 90 are exact; the 45-degree family resamples bilinearly
    and crops to the largest inscribed axis-aligned square.
    """
    if deg % 90 == 0:
        return np.rot90(image, k=(deg // 90) % 4, axes=(0, 1)).copy()
    # Array rows grow downward, so a CCW content rotation in x/y-up
    # convention is a rotation by -deg in (row, col) index space.
    rotated = ndimage.rotate(image, -deg, axes=(1, 0), reshape=False, order=1, mode="nearest")
    size = image.shape[0]
    inner = int(np.floor(size / np.sqrt(2.0)))
    start = (size - inner) // 2
    return rotated[start:start + inner, start:start + inner].copy()


def _apply_flip(image: np.ndarray, flip: str) -> np.ndarray:
    if flip == "none":
        return image
    if flip == "x":  # mirror across the vertical axis
        return image[:, ::-1].copy()
    if flip == "y":  # mirror across the horizontal axis
        return image[::-1, :].copy()
    raise ValueError(f"unknown flip {flip!r}")


def materialize_patch(maps: SvbrdfMaps, desc: PatchDescriptor,
                      output_size: int = 256) -> SvbrdfMaps:
    """Crop, flip/rotate (vectors included) and resize one patch."""
    sl = (slice(desc.row0, desc.row0 + desc.size), slice(desc.col0, desc.col0 + desc.size))
    albedo = maps.albedo[sl].copy()
    normal = maps.normal[sl].copy()
    rough = maps.roughness[sl].copy()

    albedo = _apply_flip(albedo, desc.flip)
    normal = _apply_flip(normal, desc.flip)
    rough = _apply_flip(rough, desc.flip)
    if desc.flip == "x":
        normal[..., 0] = -normal[..., 0]
    elif desc.flip == "y":
        normal[..., 1] = -normal[..., 1]

    if desc.rotation_deg != 0:
        albedo = _rotate_channels(albedo, desc.rotation_deg)
        normal = _rotate_channels(normal, desc.rotation_deg)
        rough = _rotate_channels(rough, desc.rotation_deg)
        rot = _rotation_matrix_xy(desc.rotation_deg)
        normal[..., :2] = normal[..., :2] @ rot.T

    albedo = np.clip(resize_bilinear(albedo, output_size), 0.0, None)
    normal = normalize_vectors(resize_bilinear(normal, output_size))
    rough = np.clip(resize_bilinear(rough, output_size), R_MIN, 1.0)
    return SvbrdfMaps(albedo=albedo, normal=normal, roughness=rough, f0=maps.f0)


def scale_albedo(albedo: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """All channels scaled by one draw from U[0.8, 1.4]."""
    return albedo * rng.uniform(0.8, 1.4)


def scale_normal(normal: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """x and y components scaled by one draw from U[0.8, 1.4], then renormalized."""
    scale = rng.uniform(0.8, 1.4)
    out = normal.copy()
    out[..., 0] *= scale
    out[..., 1] *= scale
    return normalize_vectors(out)


def scale_roughness(roughness: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Scaled by one draw from N(1, 0.2^2), clamped back to [R_MIN, 1]."""
    return np.clip(roughness * rng.normal(1.0, 0.2), R_MIN, 1.0)
