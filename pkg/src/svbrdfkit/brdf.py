"""Microfacet BRDF terms and pointwise evaluation.

The material model is a diffuse albedo plus a single achromatic specular
lobe built from a half-vector distribution D, a Fresnel factor F and a
Smith-style shadowing/masking factor G:

    rho = d + D(n.h, r) * F(v.h, f0) * G(n.v, n.l, r) / (4 (n.l)(n.v))

All functions broadcast over numpy arrays, so they serve both as per-pixel
scalar evaluators and as the vectorized core of the renderer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Lower roughness bound. alpha = roughness**2 collapses the distribution
# toward a delta as roughness -> 0, with unbounded derivatives; every
# search and fit path shares this floor.
R_MIN = 0.1

# Shading cosines are clamped from below by this before any division.
EPS_COS = 1e-6


@dataclass(frozen=True)
class BrdfParams:
    """Material parameters at one or many points.

    diffuse: (..., 3) linear reflectance, >= 0
    normal: (..., 3) unit vectors with positive z
    roughness: (...,) values in [R_MIN, 1]
    f0: scalar specular reflectance at normal incidence, in [0, 1]
    """

    diffuse: np.ndarray
    normal: np.ndarray
    roughness: np.ndarray
    f0: float

    def validate(self) -> None:
        d = np.asarray(self.diffuse, dtype=float)
        n = np.asarray(self.normal, dtype=float)
        r = np.asarray(self.roughness, dtype=float)
        if d.shape[-1] != 3 or n.shape[-1] != 3:
            raise ValueError("diffuse and normal must have a trailing RGB/xyz axis")
        if np.any(d < 0):
            raise ValueError("diffuse channels must be non-negative")
        norms = np.linalg.norm(n, axis=-1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ValueError("normals must be unit length within 1e-6")
        if np.any(n[..., 2] <= 0):
            raise ValueError("normals must have positive z")
        if np.any(r < R_MIN - 1e-12) or np.any(r > 1.0 + 1e-12):
            raise ValueError(f"roughness must lie in [{R_MIN}, 1]")
        if not 0.0 <= self.f0 <= 1.0:
            raise ValueError("f0 must lie in [0, 1]")


@dataclass(frozen=True)
class ShadingVectors:
    """View, light and half vectors at one or many points, all unit length."""

    view: np.ndarray
    light: np.ndarray
    half: np.ndarray

    def validate(self) -> None:
        for name in ("view", "light", "half"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if np.any(np.abs(np.linalg.norm(vec, axis=-1) - 1.0) > 1e-6):
                raise ValueError(f"{name} vectors must be unit length within 1e-6")
        s = np.asarray(self.view, dtype=float) + np.asarray(self.light, dtype=float)
        ns = np.linalg.norm(s, axis=-1, keepdims=True)
        ok = ns.squeeze(-1) > 1e-12
        if np.any(ok):
            expected = np.where(ok[..., None], s / np.where(ns > 0, ns, 1.0), self.half)
            if np.any(np.abs(expected - self.half) > 1e-6):
                raise ValueError("half must equal normalize(view + light)")


def half_vector(view: np.ndarray, light: np.ndarray) -> np.ndarray:
    """Unit bisector of the view and light directions."""
    s = np.asarray(view, dtype=float) + np.asarray(light, dtype=float)
    norm = np.linalg.norm(s, axis=-1, keepdims=True)
    return s / np.where(norm > 0, norm, 1.0)


def distribution_term(n_dot_h, roughness):
    """Half-vector distribution with alpha = roughness**2.

    D = alpha^2 / (pi * ((n.h)^2 (alpha^2 - 1) + 1)^2)
    """
    alpha = np.square(np.asarray(roughness, dtype=float))
    a2 = np.square(alpha)
    t = np.square(np.asarray(n_dot_h, dtype=float)) * (a2 - 1.0) + 1.0
    return a2 / (np.pi * np.square(t))


def fresnel_term(v_dot_h, f0):
    """Schlick-style Fresnel with a base-2 exponential fit.

    F = (1 - f0) * 2^((-5.55473 (v.h) - 6.98316)(v.h)) + f0
    """
    c = np.asarray(v_dot_h, dtype=float)
    return (1.0 - f0) * np.exp2((-5.55473 * c - 6.98316) * c) + f0


def _g1(cosine, k):
    return cosine / (cosine * (1.0 - k) + k)


def geometry_term(n_dot_v, n_dot_l, roughness):
    """Smith shadowing/masking with k = (r + 1)^2 / 8.

    G = G1(n.v) * G1(n.l); each G1 factor divides by the cosine of its own
    direction, which keeps the product symmetric in view and light.
    """
    k = np.square(np.asarray(roughness, dtype=float) + 1.0) / 8.0
    return _g1(np.asarray(n_dot_v, dtype=float), k) * _g1(np.asarray(n_dot_l, dtype=float), k)


def specular_term(n_dot_l, n_dot_v, n_dot_h, v_dot_h, roughness, f0):
    """Achromatic specular lobe D*F*G / (4 (n.l)(n.v)).

    The two denominator cosines are clamped from below at EPS_COS; the same
    clamped values feed the geometry term.
    """
    nl = np.maximum(np.asarray(n_dot_l, dtype=float), EPS_COS)
    nv = np.maximum(np.asarray(n_dot_v, dtype=float), EPS_COS)
    d = distribution_term(n_dot_h, roughness)
    f = fresnel_term(v_dot_h, f0)
    g = geometry_term(nv, nl, roughness)
    return d * f * g / (4.0 * nl * nv)


def eval_brdf(params: BrdfParams, vectors: ShadingVectors) -> np.ndarray:
    """Full BRDF value, diffuse plus achromatic specular, per channel."""
    n = np.asarray(params.normal, dtype=float)
    v = np.asarray(vectors.view, dtype=float)
    l = np.asarray(vectors.light, dtype=float)
    h = np.asarray(vectors.half, dtype=float)
    nl = np.sum(n * l, axis=-1)
    nv = np.sum(n * v, axis=-1)
    nh = np.sum(n * h, axis=-1)
    vh = np.sum(v * h, axis=-1)
    spec = specular_term(nl, nv, nh, vh, np.asarray(params.roughness, dtype=float), params.f0)
    return np.asarray(params.diffuse, dtype=float) + spec[..., None]


def f0_dielectric(eta):
    """Normal-incidence reflectance of a dielectric: (1 - eta)^2 / (1 + eta)^2."""
    eta = np.asarray(eta, dtype=float)
    return np.square(1.0 - eta) / np.square(1.0 + eta)


def f0_conductor(eta, kappa):
    """Normal-incidence reflectance of a conductor.

    ((eta - 1)^2 + kappa^2) / ((eta + 1)^2 + kappa^2); reduces to the
    dielectric form at kappa = 0 and stays below 1 for finite kappa.
    """
    eta = np.asarray(eta, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    k2 = np.square(kappa)
    return (np.square(eta - 1.0) + k2) / (np.square(eta + 1.0) + k2)
