"""Non-neural SVBRDF estimation.

Two estimators: a per-pixel coarse-to-fine roughness grid search given
diffuse and normals, and a full projected-gradient fitter driven by the
analytic rendering gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .brdf import R_MIN
from .gradients import render_with_gradients
from .render import render_image, tonemap, tonemap_grad
from .scene import SceneConfig, SvbrdfMaps, normalize_vectors, pixel_grid


@dataclass(frozen=True)
class GridSearchConfig:
    levels: int = 3
    coarse_samples: int = 16
    search_range: tuple[float, float] = (R_MIN, 1.0)
    shrink: float = 0.25  # bracket width fraction per level

    def __post_init__(self):
        lo, hi = self.search_range
        if self.levels < 1:
            raise ValueError("levels must be positive")
        if self.coarse_samples < 3:
            raise ValueError("coarse_samples must be at least 3")
        if not (R_MIN - 1e-12 <= lo < hi <= 1.0 + 1e-12):
            raise ValueError(f"search range must lie within [{R_MIN}, 1]")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")

    def finest_spacing(self) -> float:
        lo, hi = self.search_range
        width = (hi - lo) * self.shrink ** (self.levels - 1)
        return width / (self.coarse_samples - 1)


def roughness_grid_search(observed: np.ndarray, albedo: np.ndarray,
                          normal: np.ndarray, f0: float, config: SceneConfig,
                          gs: GridSearchConfig = GridSearchConfig()) -> np.ndarray:
    """Per-pixel roughness minimizing the squared RGB rendering residual.

    Each level lays a uniform grid over a per-pixel bracket around the
    previous best, shrinking the bracket width by `shrink` per level. The
    best objective is kept across levels, so refinement can only improve
    it. Grid candidates are visited from rough to smooth, so exact ties
    (flat objectives in diffuse regions) resolve toward the larger
    roughness.
    """
    if observed.shape[:2] != albedo.shape[:2] or normal.shape[:2] != albedo.shape[:2]:
        raise ValueError("observed, albedo and normal dimensions must match")
    h, w = albedo.shape[:2]
    lo_bound, hi_bound = gs.search_range
    full_width = hi_bound - lo_bound
    m = gs.coarse_samples

    best_r = np.full((h, w), hi_bound)
    best_obj = np.full((h, w), np.inf)
    maps = SvbrdfMaps(albedo=albedo, normal=normal,
                      roughness=np.full((h, w), hi_bound), f0=f0)

    for level in range(gs.levels):
        width = full_width * gs.shrink ** level
        if level == 0:
            lo = np.full((h, w), lo_bound)
        else:
            lo = np.clip(best_r - width / 2.0, lo_bound, hi_bound - width)
        for s in range(m - 1, -1, -1):
            candidate = lo + width * (s / (m - 1))
            maps.roughness = candidate
            rendered = render_image(maps, config)
            obj = np.sum(np.square(rendered - observed), axis=-1)
            better = obj < best_obj
            best_obj[better] = obj[better]
            best_r[better] = candidate[better]
    return best_r


@dataclass
class FitConfig:
    step_albedo: float = 1.0
    step_normal: float = 1.0
    step_roughness: float = 1.0
    max_iters: int = 200
    loss_tolerance: float = 0.0
    novel_lights: list = field(default_factory=list)
    max_halvings: int = 12  # rungs of the per-iteration step ladder

    def __post_init__(self):
        if min(self.step_albedo, self.step_normal, self.step_roughness) <= 0:
            raise ValueError("step sizes must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")


def _fit_targets(observed, config, fit, novel_observations):
    configs = [config]
    targets = [tonemap(observed)]
    if fit.novel_lights:
        if novel_observations is None or len(novel_observations) != len(fit.novel_lights):
            raise ValueError("novel_lights requires one observation per light")
        for light, obs in zip(fit.novel_lights, novel_observations):
            configs.append(config.with_light(light))
            targets.append(tonemap(obs))
    return configs, targets


def _residual_and_grads(maps, configs, targets, want_grads=True):
    """Per-pixel residual map (mean over channels and lights) and gradients.

    The renderer has no cross-pixel coupling, so the total loss is the mean
    of this map and per-pixel comparisons are exact.
    """
    n_pix = maps.roughness.size
    residual = np.zeros(maps.roughness.shape)
    g_albedo = np.zeros_like(maps.albedo)
    g_normal = np.zeros_like(maps.normal)
    g_rough = np.zeros_like(maps.roughness)
    for cfg, target in zip(configs, targets):
        if want_grads:
            image, grads = render_with_gradients(maps, cfg)
        else:
            image = render_image(maps, cfg)
        delta = tonemap(image) - target
        residual += np.mean(np.square(delta), axis=-1)
        if want_grads:
            # Chain: d/dmap of sum_pixels mean_{c,lights} (T(R) - T(O))^2.
            chain = 2.0 * delta * tonemap_grad(image) / (3.0 * len(configs))
            g_albedo += np.einsum("hwc,hwck->hwk", chain, grads.d_albedo)
            g_normal += np.einsum("hwc,hwck->hwk", chain, grads.d_normal)
            g_rough += np.einsum("hwc,hwc->hw", chain, grads.d_roughness)
    residual /= len(configs)
    if not want_grads:
        return residual, None
    return residual, (g_albedo * n_pix, g_normal * n_pix, g_rough * n_pix)


def _project(albedo, normal, roughness):
    albedo = np.clip(albedo, 0.0, None)
    normal = normal.copy()
    normal[..., 2] = np.maximum(normal[..., 2], 1e-3)
    normal = normalize_vectors(normal)
    roughness = np.clip(roughness, R_MIN, 1.0)
    return albedo, normal, roughness


def fit_svbrdf_gd(observed: np.ndarray, init: SvbrdfMaps, config: SceneConfig,
                  fit: FitConfig | None = None, novel_observations=None):
    """Projected gradient descent on the tonemapped reconstruction loss.

    Rendering has no cross-pixel coupling, so the line search works per
    pixel: each iteration walks the step-halving ladder and every pixel
    keeps the step that lowered its own residual the most, staying put when
    no rung helps (which also keeps pixels out of the zero-gradient tonemap
    saturation plateau). An iteration is rejected only when no pixel
    improves at any rung, so the returned loss trace is non-increasing.
    Albedo stays non-negative, roughness stays in [R_MIN, 1] and normals
    are renormalized after every step. Returns the best iterate and the
    trace.
    """
    init.validate()
    if fit is None:
        fit = FitConfig()
    configs, targets = _fit_targets(observed, config, fit, novel_observations)
    maps = init.copy()
    residual, grads = _residual_and_grads(maps, configs, targets)
    if not np.all(np.isfinite(residual)):
        raise ValueError("non-finite loss at the initial iterate")
    loss = float(residual.mean())
    trace = [loss]
    base_steps = np.array([fit.step_albedo, fit.step_normal, fit.step_roughness])

    for _ in range(fit.max_iters):
        if loss <= fit.loss_tolerance:
            break
        g_albedo, g_normal, g_rough = grads
        steps = base_steps.copy()
        best_res = residual.copy()
        best = maps
        for _ in range(fit.max_halvings):
            albedo, normal, roughness = _project(
                maps.albedo - steps[0] * g_albedo,
                maps.normal - steps[1] * g_normal,
                maps.roughness - steps[2] * g_rough,
            )
            candidate = SvbrdfMaps(albedo, normal, roughness, maps.f0)
            cand_res, _ = _residual_and_grads(candidate, configs, targets, want_grads=False)
            improved = np.isfinite(cand_res) & (cand_res < best_res)
            if np.any(improved):
                best = SvbrdfMaps(
                    np.where(improved[..., None], candidate.albedo, best.albedo),
                    np.where(improved[..., None], candidate.normal, best.normal),
                    np.where(improved, candidate.roughness, best.roughness),
                    maps.f0,
                )
                best_res = np.where(improved, cand_res, best_res)
            steps = steps / 2.0
        if best is maps:
            break  # no pixel improved at any rung: stationary
        maps = best
        residual, grads = _residual_and_grads(maps, configs, targets)
        loss = float(residual.mean())
        trace.append(loss)
    return maps, trace


def albedo_from_observation(observed: np.ndarray, config: SceneConfig) -> np.ndarray:
    """Observation divided by flat-normal shading: a crude albedo seed.

    Assumes the diffuse term dominates; specular highlights inflate the
    estimate near the center, which the fitter then corrects.
    """
    points = pixel_grid(config)
    to_light = np.asarray(config.light_position, dtype=float)[None, None, :] - points
    dist_sq = np.sum(to_light * to_light, axis=-1)
    cos = np.maximum(to_light[..., 2] / np.sqrt(dist_sq), 0.0)  # flat normals: n.l = l_z
    intensity = np.asarray(config.light_intensity, dtype=float)
    ambient = np.asarray(config.ambient, dtype=float)
    shading = cos[..., None] * intensity / dist_sq[..., None] + ambient
    return np.clip(observed / np.maximum(shading, 1e-9), 0.0, None)
