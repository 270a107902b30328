"""Analytic derivatives of rendered radiance with respect to BRDF maps.

The radiance at a pixel is

    R_c = (d_c + S) * max(n.l, 0) * I_c / dist^2 + d_c * ambient_c

with S the achromatic specular lobe. Radiance is affine in albedo, so that
Jacobian is exact; normal and roughness derivatives differentiate the
post-clamp shading expression, treating active clamps as locally constant
(points exactly at a clamp take the smooth branch). Normal gradients are
defined through normalization of an unconstrained 3-vector, so they
annihilate the radial direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .brdf import EPS_COS, R_MIN
from .render import render_forward
from .scene import SceneConfig, SvbrdfMaps, normalize_vectors


@dataclass
class GradientField:
    """Per-pixel Jacobians of radiance RGB w.r.t. the BRDF maps.

    d_albedo: (H, W, 3, 3), radiance channel x albedo channel (diagonal)
    d_normal: (H, W, 3, 3), radiance channel x unnormalized-normal component
    d_roughness: (H, W, 3)
    """

    d_albedo: np.ndarray
    d_normal: np.ndarray
    d_roughness: np.ndarray


def render_with_gradients(maps: SvbrdfMaps, config: SceneConfig,
                          view_from_camera: bool = True):
    """Render and differentiate; the image matches render_image bit for bit."""
    fw = render_forward(maps, config, view_from_camera)
    h, w = maps.resolution
    n = maps.normal
    r = maps.roughness
    nh, vh = fw["nh"], fw["vh"]
    nlc, nvc = fw["nlc"], fw["nvc"]
    d_term, f_term, g_term = fw["d_term"], fw["f_term"], fw["g_term"]
    spec = fw["spec"]
    falloff = fw["falloff"]            # (H, W, 3)
    cos_shade = fw["cos_shade"]        # (H, W)
    shade = fw["shade"]                # (H, W, 3)
    ambient = fw["ambient"]            # (3,)

    # Albedo: radiance is affine, Jacobian diagonal and exact.
    d_albedo = np.zeros((h, w, 3, 3))
    diag = shade + ambient[None, None, :]
    for c in range(3):
        d_albedo[..., c, c] = diag[..., c]

    # Shared specular pieces.
    alpha = r * r
    a2 = alpha * alpha
    t = nh * nh * (a2 - 1.0) + 1.0
    inv_denom = 1.0 / (4.0 * nlc * nvc)
    k = (r + 1.0) ** 2 / 8.0
    den_v = nvc * (1.0 - k) + k
    den_l = nlc * (1.0 - k) + k
    g1_v = nvc / den_v
    g1_l = nlc / den_l

    # Roughness: through alpha in D and k in G.
    dD_dalpha = (2.0 * alpha * t - 4.0 * alpha ** 3 * nh * nh) / (np.pi * t ** 3)
    dD_dr = dD_dalpha * 2.0 * r
    dG1v_dk = nvc * (nvc - 1.0) / (den_v * den_v)
    dG1l_dk = nlc * (nlc - 1.0) / (den_l * den_l)
    dG_dr = (dG1v_dk * g1_l + g1_v * dG1l_dk) * (r + 1.0) / 4.0
    dS_dr = (dD_dr * f_term * g_term + d_term * f_term * dG_dr) * inv_denom
    d_roughness = dS_dr[..., None] * shade

    # Normal: through n.h in D, the clamped cosines in G and the denominator,
    # and the shading cosine. Active clamps contribute zero.
    dD_dnh = 4.0 * a2 * nh * (1.0 - a2) / (np.pi * t ** 3)
    dS_dnh = f_term * g_term * inv_denom * dD_dnh
    dG1v_dx = k / (den_v * den_v)
    dG1l_dx = k / (den_l * den_l)
    live_l = (fw["nl"] >= EPS_COS).astype(float)
    live_v = (fw["nv"] >= EPS_COS).astype(float)
    dS_dnl = live_l * (d_term * f_term * g1_v * dG1l_dx * inv_denom - spec / nlc)
    dS_dnv = live_v * (d_term * f_term * g1_l * dG1v_dx * inv_denom - spec / nvc)
    dS_dn = (dS_dnh[..., None] * fw["half"]
             + dS_dnl[..., None] * fw["light"]
             + dS_dnv[..., None] * fw["view"])

    live_shade = (fw["nl"] >= 0.0).astype(float)
    d_normal = np.zeros((h, w, 3, 3))
    for c in range(3):
        brdf_c = maps.albedo[..., c] + spec
        grad_c = (brdf_c * falloff[..., c] * live_shade)[..., None] * fw["light"] \
            + (cos_shade * falloff[..., c])[..., None] * dS_dn
        # Compose through normalization: project out the normal direction.
        grad_c -= np.sum(grad_c * n, axis=-1, keepdims=True) * n
        d_normal[..., c, :] = grad_c

    return fw["image"], GradientField(d_albedo=d_albedo, d_normal=d_normal,
                                      d_roughness=d_roughness)


def _perturbed_render(maps, config, view_from_camera, kind, row, col, idx, delta):
    m = maps.copy()
    if kind == "albedo":
        m.albedo[row, col, idx] += delta
    elif kind == "normal":
        vec = m.normal[row, col].copy()
        vec[idx] += delta
        m.normal[row, col] = normalize_vectors(vec)
    elif kind == "roughness":
        m.roughness[row, col] += delta
    else:
        raise ValueError(f"unknown parameter kind {kind!r}")
    fw = render_forward(m, config, view_from_camera)
    return fw["image"][row, col]


def finite_diff_check(maps: SvbrdfMaps, config: SceneConfig, step: float = 1e-4,
                      pixel_sample=None, view_from_camera: bool = True,
                      rel_threshold: float = 1e-4, abs_threshold: float = 1e-7,
                      small_grad: float = 1e-3):
    """Compare analytic gradients against central finite differences.

    For every sampled pixel, each of the 7 scalar parameters (3 albedo
    channels, 3 unnormalized normal components, roughness) is perturbed by
    +-step; normals are re-normalized after perturbation, matching the
    normalization-composed Jacobian. Pixels within EPS_COS of the shading
    boundary, or with roughness within a step of its bounds, are skipped
    and reported. Returns a dict with worst-case discrepancies per
    parameter class and the overall pass verdict.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if pixel_sample is None:
        h, w = maps.resolution
        pixel_sample = [(r, c) for r in range(h) for c in range(w)]

    image, grads = render_with_gradients(maps, config, view_from_camera)
    fw = render_forward(maps, config, view_from_camera)
    nl = fw["nl"]

    report = {
        kind: {"max_rel": 0.0, "max_abs_small": 0.0, "count": 0, "failures": 0}
        for kind in ("albedo", "normal", "roughness")
    }
    skipped = []

    def compare(kind, analytic_rgb, fd_rgb):
        entry = report[kind]
        for a, f in zip(np.atleast_1d(analytic_rgb), np.atleast_1d(fd_rgb)):
            entry["count"] += 1
            scale = max(abs(a), abs(f))
            if scale < small_grad:
                err = abs(a - f)
                entry["max_abs_small"] = max(entry["max_abs_small"], err)
                if err > abs_threshold:
                    entry["failures"] += 1
            else:
                err = abs(a - f) / scale
                entry["max_rel"] = max(entry["max_rel"], err)
                if err > rel_threshold:
                    entry["failures"] += 1

    for row, col in pixel_sample:
        if abs(nl[row, col]) <= EPS_COS:
            skipped.append({"pixel": [int(row), int(col)], "reason": "shading-boundary"})
            continue
        r_here = maps.roughness[row, col]
        skip_rough = r_here - step < R_MIN or r_here + step > 1.0
        if skip_rough:
            skipped.append({"pixel": [int(row), int(col)], "reason": "roughness-boundary"})

        for c in range(3):
            hi = _perturbed_render(maps, config, view_from_camera, "albedo", row, col, c, step)
            lo = _perturbed_render(maps, config, view_from_camera, "albedo", row, col, c, -step)
            compare("albedo", grads.d_albedo[row, col, :, c], (hi - lo) / (2.0 * step))
        for k in range(3):
            hi = _perturbed_render(maps, config, view_from_camera, "normal", row, col, k, step)
            lo = _perturbed_render(maps, config, view_from_camera, "normal", row, col, k, -step)
            compare("normal", grads.d_normal[row, col, :, k], (hi - lo) / (2.0 * step))
        if not skip_rough:
            hi = _perturbed_render(maps, config, view_from_camera, "roughness", row, col, 0, step)
            lo = _perturbed_render(maps, config, view_from_camera, "roughness", row, col, 0, -step)
            compare("roughness", grads.d_roughness[row, col], (hi - lo) / (2.0 * step))

    passed = all(entry["failures"] == 0 for entry in report.values())
    return {
        "step": step,
        "rel_threshold": rel_threshold,
        "abs_threshold": abs_threshold,
        "classes": report,
        "skipped": skipped,
        "passed": passed,
    }
