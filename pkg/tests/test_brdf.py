import numpy as np
import pytest

from svbrdfkit import (
    BrdfParams,
    R_MIN,
    ShadingVectors,
    distribution_term,
    eval_brdf,
    f0_conductor,
    f0_dielectric,
    fresnel_term,
    geometry_term,
    half_vector,
    normalize_vectors,
)

# Frozen from an independent evaluation of the Fresnel exponent at v.h = 1:
# 0.05 + 0.95 * 2**(-5.55473 - 6.98316)
FRESNEL_AT_ONE_F005 = 0.050159750649648394


def hemisphere_integral(roughness, samples=512):
    """Independent quadrature of D(n.h) (n.h) over the upper hemisphere.

    Substituting xi = tan(theta) / alpha concentrates Gauss-Legendre nodes
    inside the lobe; the integrand still calls distribution_term pointwise.
    """
    alpha = roughness * roughness
    xi, w = np.polynomial.legendre.leggauss(samples)
    upper = 1000.0
    x = (xi + 1.0) * 0.5 * upper
    wt = w * 0.5 * upper
    theta = np.arctan(alpha * x)
    jac = alpha / (1.0 + (alpha * x) ** 2)
    integrand = (2.0 * np.pi * distribution_term(np.cos(theta), roughness)
                 * np.cos(theta) * np.sin(theta) * jac)
    return float(np.sum(integrand * wt))


def test_distribution_frontal_rough_one():
    assert distribution_term(1.0, 1.0) == pytest.approx(1.0 / np.pi, abs=1e-12)


def test_distribution_perpendicular_half_vector():
    # alpha = 0.25, so D(0, 0.5) = alpha^2 / pi
    assert distribution_term(0.0, 0.5) == pytest.approx(0.0625 / np.pi, rel=1e-12)


def test_distribution_peak_grows_as_roughness_falls():
    sweep = np.linspace(R_MIN, 1.0, 25)
    peak = distribution_term(1.0, sweep)
    assert np.all(np.diff(peak) < 0)


@pytest.mark.parametrize("roughness", [0.1, 0.3, 0.6, 1.0])
def test_distribution_integrates_to_one(roughness):
    assert hemisphere_integral(roughness) == pytest.approx(1.0, rel=0.02)


def test_fresnel_grazing_is_one():
    assert fresnel_term(0.0, 0.05) == pytest.approx(1.0, abs=1e-15)


def test_fresnel_f0_one_is_one():
    assert fresnel_term(1.0, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_fresnel_normal_incidence_value():
    assert fresnel_term(1.0, 0.05) == pytest.approx(FRESNEL_AT_ONE_F005, abs=1e-12)


def test_fresnel_bounds_and_underflow_limit():
    c = np.linspace(0.0, 1.0, 101)
    for f0 in (0.0, 0.05, 0.5, 1.0):
        f = fresnel_term(c, f0)
        assert np.all(f <= 1.0 + 1e-15)
        assert np.all(f >= min(f0, 1.0) - 1e-15)
    # 2^(exponent) underflows for cosines far outside the physical range,
    # leaving exactly f0.
    assert fresnel_term(40.0, 0.05) == 0.05


def test_geometry_unit_cosines():
    assert geometry_term(1.0, 1.0, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert geometry_term(1.0, 1.0, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_geometry_midrange_value():
    # k = (1.6)^2 / 8 = 0.32; G1 = 0.5 / (0.5 * 0.68 + 0.32); frozen oracle
    g1 = 0.5 / (0.5 * 0.68 + 0.32)
    assert geometry_term(0.5, 0.5, 0.6) == pytest.approx(g1 * g1, rel=1e-12)
    assert geometry_term(0.5, 0.5, 0.6) == pytest.approx(0.573921028466483, rel=1e-12)


def test_f0_dielectric_examples():
    assert f0_dielectric(1.0) == 0.0
    assert f0_dielectric(1.5) == pytest.approx(0.04, rel=1e-12)
    assert f0_dielectric(3.0) == pytest.approx(0.25, rel=1e-12)


def test_f0_conductor_examples():
    assert f0_conductor(1.0, 0.0) == 0.0
    assert f0_conductor(1.5, 0.0) == pytest.approx(f0_dielectric(1.5), rel=1e-12)
    big = f0_conductor(2.0, 1e8)
    assert big < 1.0
    assert big == pytest.approx(1.0, abs=1e-10)


def test_f0_conductor_never_exceeds_one():
    rng = np.random.default_rng(0)
    eta = 10.0 ** rng.uniform(-1, 1, 200)
    kappa = 10.0 ** rng.uniform(-2, 2, 200)
    vals = f0_conductor(eta, kappa)
    assert np.all((vals >= 0.0) & (vals <= 1.0))


def _frontal_params(diffuse, roughness, f0):
    z = np.array([0.0, 0.0, 1.0])
    params = BrdfParams(diffuse=np.asarray(diffuse, float), normal=z,
                        roughness=np.asarray(roughness, float), f0=f0)
    vectors = ShadingVectors(view=z, light=z, half=z)
    return params, vectors


def test_eval_brdf_collocated_frontal():
    params, vectors = _frontal_params((0.0, 0.0, 0.0), 1.0, 0.05)
    value = eval_brdf(params, vectors)
    expected = FRESNEL_AT_ONE_F005 / (4.0 * np.pi)
    assert value == pytest.approx(np.full(3, expected), rel=1e-9)


def test_eval_brdf_additive_diffuse():
    params, vectors = _frontal_params((0.3, 0.5, 0.7), 0.7, 0.05)
    base, _ = _frontal_params((0.0, 0.0, 0.0), 0.7, 0.05)
    spec = eval_brdf(base, vectors)
    assert eval_brdf(params, vectors) - spec == pytest.approx([0.3, 0.5, 0.7], abs=1e-15)


def test_eval_brdf_f0_zero_exponential_only():
    params, vectors = _frontal_params((0.0, 0.0, 0.0), 0.8, 0.0)
    value = eval_brdf(params, vectors)[0]
    d = distribution_term(1.0, 0.8)
    g = geometry_term(1.0, 1.0, 0.8)
    assert value == pytest.approx(d * g * 2.0 ** (-12.53789) / 4.0, rel=1e-9)


def _random_geometry(rng):
    n = normalize_vectors(np.array([0.2, -0.1, 1.0]) + 0.2 * rng.standard_normal(3))
    if n[2] < 0:
        n = -n
    view = normalize_vectors(np.array([0.1, 0.3, 1.0]) + 0.3 * rng.standard_normal(3))
    light = normalize_vectors(np.array([-0.2, 0.1, 1.0]) + 0.3 * rng.standard_normal(3))
    return n, view, light


def test_eval_brdf_nonnegative_and_achromatic_specular():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n, view, light = _random_geometry(rng)
        params = BrdfParams(diffuse=np.full(3, rng.uniform(0, 1)), normal=n,
                            roughness=rng.uniform(R_MIN, 1.0), f0=rng.uniform(0, 1))
        vectors = ShadingVectors(view=view, light=light, half=half_vector(view, light))
        value = eval_brdf(params, vectors)
        assert np.all(value >= 0)
        assert np.ptp(value) < 1e-12  # equal diffuse means equal channels


def test_specular_reciprocity():
    rng = np.random.default_rng(4)
    for _ in range(100):
        n, view, light = _random_geometry(rng)
        params = BrdfParams(diffuse=np.zeros(3), normal=n,
                            roughness=rng.uniform(R_MIN, 1.0), f0=rng.uniform(0, 1))
        fwd = eval_brdf(params, ShadingVectors(view, light, half_vector(view, light)))
        rev = eval_brdf(params, ShadingVectors(light, view, half_vector(light, view)))
        assert fwd == pytest.approx(rev, rel=1e-11)


def test_params_validation():
    z = np.array([0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        BrdfParams(np.array([-0.1, 0, 0]), z, np.array(0.5), 0.05).validate()
    with pytest.raises(ValueError):
        BrdfParams(np.zeros(3), np.array([0, 0, 2.0]), np.array(0.5), 0.05).validate()
    with pytest.raises(ValueError):
        BrdfParams(np.zeros(3), z, np.array(0.01), 0.05).validate()
    with pytest.raises(ValueError):
        ShadingVectors(z, z, np.array([1.0, 0, 0])).validate()
    BrdfParams(np.zeros(3), z, np.array(0.5), 0.05).validate()
    ShadingVectors(z, z, z).validate()
