"""Trimmed Lambertian photometric stereo.

Many images under known directional lights; per pixel, the brightest and
darkest observations are discarded (robustness against highlights and
shadows) and the rest solve a linear least-squares system for the scaled
normal. Albedo is recovered per channel with the same kept set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEGENERATE_NORM = 1e-9


@dataclass
class PsObservationSet:
    """L images with matching directional lights plus trim counts."""

    images: np.ndarray      # (L, H, W, 3)
    light_dirs: np.ndarray  # (L, 3), unit, surface-to-light
    trim_high: int = 5
    trim_low: int = 5

    def validate(self) -> None:
        imgs = np.asarray(self.images, dtype=float)
        dirs = np.asarray(self.light_dirs, dtype=float)
        if imgs.ndim != 4 or imgs.shape[3] != 3:
            raise ValueError("images must be (L, H, W, 3)")
        if dirs.shape != (imgs.shape[0], 3):
            raise ValueError("light_dirs must be (L, 3)")
        if self.trim_high < 0 or self.trim_low < 0:
            raise ValueError("trim counts must be non-negative")
        if imgs.shape[0] <= self.trim_high + self.trim_low + 2:
            raise ValueError("need at least 3 usable observations per pixel")
        if np.any(np.abs(np.linalg.norm(dirs, axis=1) - 1.0) > 1e-6):
            raise ValueError("light directions must be unit length")


def _keep_mask(values: np.ndarray, trim_high: int, trim_low: int) -> np.ndarray:
    """(P, L) keep mask after removing the trim_low darkest and trim_high
    brightest entries per row; ties resolve toward removing lower indices."""
    p, l = values.shape
    if trim_high + trim_low >= l:
        raise ValueError("trim counts exceed the number of observations")
    keep = np.ones((p, l), dtype=bool)
    rows = np.arange(p)[:, None]
    if trim_low > 0:
        ascending = np.argsort(values, axis=1, kind="stable")
        keep[rows, ascending[:, :trim_low]] = False
    if trim_high > 0:
        masked = np.where(keep, values, -np.inf)  # already-removed entries can't double count
        descending = np.argsort(-masked, axis=1, kind="stable")
        keep[rows, descending[:, :trim_high]] = False
    return keep


def trim_observations(intensities, trim_high: int, trim_low: int) -> np.ndarray:
    """Indices surviving the brightest/darkest trim of a single pixel's stack."""
    values = np.asarray(intensities, dtype=float).reshape(1, -1)
    mask = _keep_mask(values, trim_high, trim_low)[0]
    return np.nonzero(mask)[0]


def lambertian_ps(obs: PsObservationSet):
    """Least-squares normals and per-channel albedo from the kept set.

    The scaled normal g solves I_k ~ l_k . g over the kept observations of
    the luma channel; normal = g / |g| (z flipped positive), albedo channel
    c = |g_c| / pi from re-solving channel c with the same kept set. Pixels
    with |g| below 1e-9 are degenerate and get normal (0, 0, 1).
    """
    obs.validate()
    images = np.asarray(obs.images, dtype=float)
    dirs = np.asarray(obs.light_dirs, dtype=float)
    l, h, w, _ = images.shape
    p = h * w

    stack = images.reshape(l, p, 3)
    luma = stack.mean(axis=2).T  # (P, L)
    keep = _keep_mask(luma, obs.trim_high, obs.trim_low)

    # Per-pixel normal equations: A = sum_k m_k l_k l_k^T, b = sum_k m_k I_k l_k.
    mask = keep.astype(float)
    lhs = np.einsum("pk,ki,kj->pij", mask, dirs, dirs)
    eigvals = np.linalg.eigvalsh(lhs)
    singular = eigvals[:, 0] < 1e-10 * np.maximum(eigvals[:, -1], 1e-300)
    if np.all(singular):
        raise ValueError("kept light directions are coplanar everywhere")
    safe_lhs = lhs.copy()
    safe_lhs[singular] = np.eye(3)

    rhs_luma = np.einsum("pk,pk,ki->pi", mask, luma, dirs)
    g = np.linalg.solve(safe_lhs, rhs_luma[..., None])[..., 0]
    g_norm = np.linalg.norm(g, axis=1)
    degenerate = singular | (g_norm < DEGENERATE_NORM)

    normals = np.where(degenerate[:, None], [0.0, 0.0, 1.0],
                       g / np.where(g_norm > 0, g_norm, 1.0)[:, None])
    flip = normals[:, 2] < 0
    normals[flip] = -normals[flip]

    albedo = np.zeros((p, 3))
    for c in range(3):
        rhs_c = np.einsum("pk,pk,ki->pi", mask, stack[:, :, c].T, dirs)
        g_c = np.linalg.solve(safe_lhs, rhs_c[..., None])[..., 0]
        albedo[:, c] = np.linalg.norm(g_c, axis=1) / np.pi
    albedo[singular] = 0.0

    return normals.reshape(h, w, 3), albedo.reshape(h, w, 3)
