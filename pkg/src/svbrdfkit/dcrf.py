"""Continuous densely connected CRF refinement of SVBRDF maps.

The energy over a map x with unary targets t_u and Gaussian pairwise
weights is

    E(x) = sum_i sum_u alpha_u,i |x_i - t_u,i|^2
         + sum_{i != j} |x_i - x_j|^2 sum_k beta_k kappa_k(i, j)

a convex quadratic whose stationarity system is symmetric and diagonally
dominant. Inference is exact minimization: Gauss-Seidel coordinate sweeps
(monotone in energy) or damped Jacobi, both converging to the same fixed
point. The dense O(N^2) pairwise evaluation is the reference path, meant
for desk-scale maps (<= 64x64).

Position conventions: pairwise kernel features use per-axis coordinates in
[0, 1]; unary weight maps use centered coordinates in [-1, 1]. The shipped
kernel standard deviations are only consistent under this split.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

# Unary weight map standard deviations (position, color-saturation).
SIGMA_D0, SIGMA_D1 = 0.5, 0.08   # diffuse
SIGMA_R0, SIGMA_R1 = 0.5, 0.2    # roughness

FEATURE_NAMES = ("position", "input_color", "pred_diffuse", "diffuse_grad", "refined_diffuse")

PRESET_NAMES = ("diffuse", "normal", "roughness")


@dataclass(frozen=True)
class KernelSpec:
    """One Gaussian pairwise kernel: named feature groups with their stds.

    feature_stds maps a feature name to the standard deviation applied to
    that whole group; beta scales the kernel's contribution to the energy.
    """

    feature_stds: dict[str, float]
    beta: float

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        for name, std in self.feature_stds.items():
            if name not in FEATURE_NAMES:
                raise ValueError(f"unknown feature channel {name!r}")
            if std <= 0:
                raise ValueError(f"std for {name!r} must be strictly positive")


def gaussian_kernel_weight(f_i: dict, f_j: dict, spec: KernelSpec) -> float:
    """exp(-sum_groups |f_i,g - f_j,g|^2 / (2 sigma_g^2)) for one pixel pair."""
    expo = 0.0
    for name, std in spec.feature_stds.items():
        a = np.asarray(f_i[name], dtype=float)
        b = np.asarray(f_j[name], dtype=float)
        expo += float(np.sum(np.square(a - b))) / (2.0 * std * std)
    return float(np.exp(-expo))


@dataclass
class DcrfProblem:
    """One refinement instance: unary targets/weights, kernels, features.

    unaries: list of (target, alpha) pairs; target is (H, W) or (H, W, C),
    alpha is (H, W). features maps feature names to (H, W, d) arrays.
    mode selects the sweep: "gauss_seidel" (raster order) or "jacobi".
    kernels and features are treated as fixed once the pairwise matrix has
    been built; mutate them only before the first solve or energy call.
    """

    unaries: list
    kernels: list
    features: dict
    iterations: int = 500
    tolerance: float = 1e-9
    mode: str = "gauss_seidel"
    jacobi_damping: float = 1.0
    renormalize: bool = False
    truncate_below: float = 0.0
    _pairwise_cache: np.ndarray | None = field(default=None, repr=False, compare=False)

    def resolution(self):
        return self.unaries[0][0].shape[:2]

    def validate(self) -> None:
        if not self.unaries:
            raise ValueError("at least one unary term is required")
        h, w = self.resolution()
        total_alpha = np.zeros((h, w))
        for target, alpha in self.unaries:
            if target.shape[:2] != (h, w) or alpha.shape != (h, w):
                raise ValueError("unary maps must share dimensions")
            if np.any(alpha < 0):
                raise ValueError("unary weights must be non-negative")
            total_alpha += alpha
        if not np.any(total_alpha > 0):
            raise ValueError("no positive unary weight anywhere: system is underdetermined")
        for name, feat in self.features.items():
            if name not in FEATURE_NAMES:
                raise ValueError(f"unknown feature channel {name!r}")
            if feat.shape[:2] != (h, w):
                raise ValueError("feature maps must share dimensions")
            if not np.all(np.isfinite(feat)):
                raise ValueError("features must be finite")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.mode not in ("gauss_seidel", "jacobi"):
            raise ValueError("mode must be 'gauss_seidel' or 'jacobi'")

    def pairwise_matrix(self) -> np.ndarray:
        """Dense symmetric (N, N) weight matrix sum_k beta_k kappa_k, zero diagonal."""
        if self._pairwise_cache is not None:
            return self._pairwise_cache
        h, w = self.resolution()
        n = h * w
        total = np.zeros((n, n))
        for spec in self.kernels:
            expo = np.zeros((n, n))
            for name, std in spec.feature_stds.items():
                f = self.features[name].reshape(n, -1)
                sq = np.sum(np.square(f[:, None, :] - f[None, :, :]), axis=-1)
                expo += sq / (2.0 * std * std)
            total += spec.beta * np.exp(-expo)
        np.fill_diagonal(total, 0.0)
        if self.truncate_below > 0.0:
            total[total < self.truncate_below] = 0.0
        self._pairwise_cache = total
        return total


def unit_position_map(resolution) -> np.ndarray:
    """(H, W, 2) pixel-center coordinates, each axis in (0, 1) — kernel features."""
    h, w = resolution
    xs = (np.arange(w) + 0.5) / w
    ys = (np.arange(h) + 0.5) / h
    grid = np.zeros((h, w, 2))
    grid[..., 0] = xs[None, :]
    grid[..., 1] = ys[:, None]
    return grid


def centered_position_map(resolution) -> np.ndarray:
    """(H, W, 2) pixel-center coordinates in (-1, 1) — unary weight maps."""
    return 2.0 * unit_position_map(resolution) - 1.0


def _min_channel(input_image: np.ndarray) -> np.ndarray:
    # Saturation proxy: the smallest channel of the clamped input is near 1
    # only where a white flash highlight saturates all three channels.
    return np.min(np.clip(input_image, 0.0, 1.0), axis=-1)


def diffuse_unary_weight_map(positions: np.ndarray, input_image: np.ndarray,
                             a0: float, a1: float) -> np.ndarray:
    """Confidence map for the diffuse unary term.

    Low near the image center and near saturated (white) pixels, where
    highlight artifacts are expected; the pairwise terms take over there.
    """
    p_sq = np.sum(np.square(positions), axis=-1)
    c_min = _min_channel(input_image)
    pos_term = 1.0 - np.exp(-p_sq / (SIGMA_D0 * SIGMA_D0))
    col_term = 1.0 - np.exp(-np.square(c_min - 1.0) / (SIGMA_D1 * SIGMA_D1))
    return a0 * np.maximum(pos_term, col_term) + a1


def roughness_unary_weight_map(positions: np.ndarray, input_image: np.ndarray,
                               a0: float):
    """(alpha0, alpha1) weight maps for the two roughness unary targets.

    alpha1 weights the grid-search target: high near the image center and
    near saturated pixels, where the collocated highlight makes the search
    informative. alpha0 is constant and weights the upstream prediction.
    """
    p_sq = np.sum(np.square(positions), axis=-1)
    c_min = _min_channel(input_image)
    alpha1 = np.maximum(np.exp(-p_sq / (SIGMA_R0 * SIGMA_R0)),
                        np.exp(-np.square(c_min - 1.0) / (SIGMA_R1 * SIGMA_R1)))
    alpha0 = np.full(alpha1.shape, float(a0))
    return alpha0, alpha1


def normalized_color(image: np.ndarray) -> np.ndarray:
    """Unit-norm RGB per pixel; removes the light-intensity falloff."""
    norm = np.linalg.norm(image, axis=-1, keepdims=True)
    return image / np.where(norm > 0, norm, 1.0)


def diffuse_gradient_feature(diffuse: np.ndarray) -> np.ndarray:
    """Forward-difference 2-vector per channel, normalized by image width.

    Shape (H, W, 2 * C); the last row/column reuse the previous difference.
    """
    w = diffuse.shape[1]
    dx = np.diff(diffuse, axis=1, append=diffuse[:, -1:, :])
    dy = np.diff(diffuse, axis=0, append=diffuse[-1:, :, :])
    dx[:, -1, :] = dx[:, -2, :]
    dy[-1, :, :] = dy[-2, :, :]
    return np.concatenate([dx, dy], axis=-1) / w


def dcrf_energy(x: np.ndarray, problem: DcrfProblem) -> float:
    """Quadratic CRF energy of a candidate map (ordered pairwise sum)."""
    h, w = problem.resolution()
    if x.shape[:2] != (h, w):
        raise ValueError("candidate map dimensions must match the problem")
    n = h * w
    xf = x.reshape(n, -1)
    energy = 0.0
    for target, alpha in problem.unaries:
        diff = xf - target.reshape(n, -1)
        energy += float(np.sum(alpha.reshape(n) * np.sum(diff * diff, axis=-1)))
    weights = problem.pairwise_matrix()
    deg = weights.sum(axis=1)
    # sum_{i != j} w_ij |x_i - x_j|^2 = 2 x^T (D - W) x summed over channels
    quad = 2.0 * (np.sum(deg[:, None] * xf * xf) - np.sum(xf * (weights @ xf)))
    return energy + float(quad)


def dcrf_solve(problem: DcrfProblem, return_info: bool = False):
    """Minimize the CRF energy; returns the refined map.

    Initialization is the alpha-weighted average of the unary targets.
    Gauss-Seidel sweeps the stationarity updates in raster order and is
    monotone in energy; Jacobi applies them simultaneously with optional
    damping and reaches the same fixed point. Iteration stops after
    `iterations` sweeps or when the largest per-pixel update falls below
    `tolerance`. Normal-style maps are renormalized at the end when the
    problem asks for it.
    """
    problem.validate()
    h, w = problem.resolution()
    n = h * w
    first_target = problem.unaries[0][0]
    channels = 1 if first_target.ndim == 2 else first_target.shape[2]

    a = np.zeros(n)
    b = np.zeros((n, channels))
    for target, alpha in problem.unaries:
        af = alpha.reshape(n)
        a += af
        b += af[:, None] * target.reshape(n, channels)

    if len(problem.unaries) == 1:
        # Algebraically (alpha t) / alpha = t; taking the shortcut keeps the
        # beta = 0 case exact instead of within rounding.
        x = problem.unaries[0][0].reshape(n, channels).astype(float).copy()
    else:
        x = np.where(a[:, None] > 0, b / np.where(a[:, None] > 0, a[:, None], 1.0),
                     np.mean([t.reshape(n, channels) for t, _ in problem.unaries], axis=0))

    weights = problem.pairwise_matrix()
    rowsum = weights.sum(axis=1)
    denom = a + 2.0 * rowsum
    decoupled = not np.any(weights)

    info = {"sweeps": 0, "energies": [], "max_updates": []}
    if return_info:
        info["energies"].append(dcrf_energy(x.reshape(first_target.shape), problem))

    for sweep in range(problem.iterations):
        max_update = 0.0
        if decoupled:
            # No pairwise coupling: the initialization already minimizes the
            # per-pixel quadratic, so the sweep is a no-op.
            info["sweeps"] = sweep + 1
            info["max_updates"].append(0.0)
            if return_info:
                info["energies"].append(dcrf_energy(x.reshape(first_target.shape), problem))
            break
        if problem.mode == "gauss_seidel":
            for i in range(n):
                if denom[i] == 0.0:
                    continue  # fully unconstrained pixel keeps its init value
                new = (b[i] + 2.0 * (weights[i] @ x)) / denom[i]
                max_update = max(max_update, float(np.max(np.abs(new - x[i]))))
                x[i] = new
        else:
            safe = np.where(denom > 0, denom, 1.0)
            new = (b + 2.0 * (weights @ x)) / safe[:, None]
            new = np.where(denom[:, None] > 0, new, x)
            omega = problem.jacobi_damping
            new = (1.0 - omega) * x + omega * new
            max_update = float(np.max(np.abs(new - x)))
            x = new
        info["sweeps"] = sweep + 1
        info["max_updates"].append(max_update)
        if return_info:
            info["energies"].append(dcrf_energy(x.reshape(first_target.shape), problem))
        if max_update < problem.tolerance:
            break

    out = x.reshape(first_target.shape)
    if problem.renormalize:
        norm = np.linalg.norm(out, axis=-1, keepdims=True)
        out = out / np.where(norm > 0, norm, 1.0)
    if return_info:
        return out, info
    return out


def normalize_coefficients(theta) -> np.ndarray:
    """Clip to non-negative and rescale to sum to 1."""
    t = np.clip(np.asarray(theta, dtype=float), 0.0, None)
    total = t.sum()
    if total <= 0:
        raise ValueError("at least one coefficient must be positive")
    return t / total


def blend_params_by_class(param_sets, class_probs) -> np.ndarray:
    """Convex combination of per-class coefficient sets, componentwise."""
    sets = np.asarray(param_sets, dtype=float)
    probs = np.asarray(class_probs, dtype=float)
    if sets.ndim != 2:
        raise ValueError("param_sets must be K coefficient lists of equal length")
    if probs.shape != (sets.shape[0],):
        raise ValueError("class_probs length must match the number of sets")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-3:
        raise ValueError("class_probs must be a probability vector")
    return probs @ sets


# ---------------------------------------------------------------------------
# Shipped presets: kernel geometry per refined quantity. Coefficients are
# config-supplied (they would normally be learned); the defaults below keep
# the unary dominant at desk scale.
# ---------------------------------------------------------------------------

def load_preset(name_or_path: str) -> dict:
    """Load a preset by name ('diffuse', 'normal', 'roughness') or JSON path."""
    if name_or_path in PRESET_NAMES:
        text = resources.files("svbrdfkit.presets").joinpath(f"{name_or_path}.json").read_text()
    else:
        with open(name_or_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    doc = json.loads(text)
    doc["kernels"] = [KernelSpec(feature_stds=k["features"], beta=float(k["beta"]))
                      for k in doc["kernels"]]
    return doc


def _solver_fields(preset: dict) -> dict:
    return {
        "iterations": int(preset.get("iterations", 500)),
        "tolerance": float(preset.get("tolerance", 1e-9)),
        "mode": preset.get("mode", "gauss_seidel"),
    }


def build_diffuse_problem(pred_diffuse: np.ndarray, input_image: np.ndarray,
                          preset: dict | None = None) -> DcrfProblem:
    """Diffuse refinement: one weighted unary, three pairwise kernels."""
    preset = preset or load_preset("diffuse")
    res = pred_diffuse.shape[:2]
    alpha = diffuse_unary_weight_map(centered_position_map(res), input_image,
                                     float(preset["unary"]["a0"]), float(preset["unary"]["a1"]))
    features = {
        "position": unit_position_map(res),
        "input_color": normalized_color(input_image),
        "pred_diffuse": pred_diffuse,
    }
    return DcrfProblem(unaries=[(pred_diffuse, alpha)], kernels=preset["kernels"],
                       features=features, **_solver_fields(preset))


def build_normal_problem(pred_normal: np.ndarray, refined_diffuse: np.ndarray,
                         preset: dict | None = None) -> DcrfProblem:
    """Normal refinement: uniform unary, position and diffuse-gradient kernels."""
    preset = preset or load_preset("normal")
    res = pred_normal.shape[:2]
    alpha = np.full(res, float(preset["unary"]["alpha"]))
    features = {
        "position": unit_position_map(res),
        "diffuse_grad": diffuse_gradient_feature(refined_diffuse),
    }
    return DcrfProblem(unaries=[(pred_normal, alpha)], kernels=preset["kernels"],
                       features=features, renormalize=True, **_solver_fields(preset))


def build_roughness_problem(pred_roughness: np.ndarray, grid_roughness: np.ndarray,
                            refined_diffuse: np.ndarray, input_image: np.ndarray,
                            preset: dict | None = None) -> DcrfProblem:
    """Roughness refinement: two unaries (prediction and grid search)."""
    preset = preset or load_preset("roughness")
    res = pred_roughness.shape[:2]
    alpha0, alpha1 = roughness_unary_weight_map(centered_position_map(res), input_image,
                                                float(preset["unary"]["a0"]))
    features = {
        "position": unit_position_map(res),
        "refined_diffuse": refined_diffuse,
    }
    return DcrfProblem(unaries=[(pred_roughness, alpha0), (grid_roughness, alpha1)],
                       kernels=preset["kernels"], features=features,
                       **_solver_fields(preset))
