import numpy as np
import pytest

import svbrdfkit as kit
from svbrdfkit import (
    DcrfProblem,
    KernelSpec,
    blend_params_by_class,
    centered_position_map,
    dcrf_energy,
    dcrf_solve,
    diffuse_unary_weight_map,
    gaussian_kernel_weight,
    load_preset,
    normalize_coefficients,
    roughness_unary_weight_map,
    unit_position_map,
)
from svbrdfkit.dcrf import SIGMA_D0, SIGMA_D1, SIGMA_R0, SIGMA_R1


def test_gaussian_kernel_identity_and_one_std():
    spec = KernelSpec({"position": 0.04}, beta=1.0)
    f = {"position": np.array([0.3, 0.7])}
    assert gaussian_kernel_weight(f, f, spec) == 1.0
    g = {"position": np.array([0.3 + 0.04, 0.7])}
    assert gaussian_kernel_weight(f, g, spec) == pytest.approx(np.exp(-0.5), rel=1e-12)
    assert gaussian_kernel_weight(g, f, spec) == gaussian_kernel_weight(f, g, spec)


def test_gaussian_kernel_multi_group():
    spec = KernelSpec({"position": 0.06, "input_color": 0.2}, beta=1.0)
    f = {"position": np.zeros(2), "input_color": np.zeros(3)}
    g = {"position": np.full(2, 0.06), "input_color": np.full(3, 0.2)}
    expected = np.exp(-(2 * 0.5 + 3 * 0.5))
    assert gaussian_kernel_weight(f, g, spec) == pytest.approx(expected, rel=1e-12)


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec({"position": 0.0}, beta=1.0)
    with pytest.raises(ValueError):
        KernelSpec({"mystery": 0.1}, beta=1.0)
    with pytest.raises(ValueError):
        KernelSpec({"position": 0.1}, beta=-1.0)


def test_diffuse_unary_weight_examples():
    positions = np.zeros((1, 1, 2))
    saturated = np.ones((1, 1, 3))
    assert diffuse_unary_weight_map(positions, saturated, a0=1.0, a1=0.25)[0, 0] \
        == pytest.approx(0.25, abs=1e-15)

    corner = np.array([[[1.0, 1.0]]])
    dark = np.zeros((1, 1, 3))
    value = diffuse_unary_weight_map(corner, dark, a0=2.0, a1=0.25)[0, 0]
    expected = 2.0 * max(1 - np.exp(-2 / SIGMA_D0**2), 1 - np.exp(-1 / SIGMA_D1**2)) + 0.25
    assert value == pytest.approx(expected, rel=1e-12)
    assert value == pytest.approx(2.0 + 0.25, rel=1e-3)  # both branches are ~1 here


def test_diffuse_unary_weight_monotone_in_radius():
    h = w = 9
    positions = centered_position_map((h, w))
    image = np.full((h, w, 3), 0.5)
    weights = diffuse_unary_weight_map(positions, image, a0=1.0, a1=0.0)
    radius = np.sum(positions**2, axis=-1)
    order = np.argsort(radius.ravel())
    assert np.all(np.diff(weights.ravel()[order]) >= -1e-12)


def test_roughness_unary_weight_examples():
    center_sat = roughness_unary_weight_map(np.zeros((1, 1, 2)), np.ones((1, 1, 3)), a0=0.7)
    alpha0, alpha1 = center_sat
    assert alpha0[0, 0] == 0.7
    assert alpha1[0, 0] == 1.0

    far_dark = roughness_unary_weight_map(np.array([[[1.0, 1.0]]]), np.zeros((1, 1, 3)), a0=0.7)
    assert far_dark[1][0, 0] == pytest.approx(
        max(np.exp(-2 / SIGMA_R0**2), np.exp(-1 / SIGMA_R1**2)), rel=1e-12)
    assert far_dark[1][0, 0] == pytest.approx(np.exp(-8.0), rel=1e-12)

    rng = np.random.default_rng(0)
    pos = rng.uniform(-1, 1, (6, 6, 2))
    img = rng.uniform(0, 2, (6, 6, 3))
    _, alpha1 = roughness_unary_weight_map(pos, img, a0=1.0)
    assert np.all((alpha1 > 0) & (alpha1 <= 1))


def _random_problem(seed, channels=3, betas=(5.0, 5.0, 5.0), resolution=(8, 8)):
    rng = np.random.default_rng(seed)
    h, w = resolution
    shape = (h, w, channels) if channels > 1 else (h, w)
    target = rng.random(shape)
    alpha = 0.2 + rng.random((h, w))
    image = rng.random((h, w, 3))
    features = {
        "position": unit_position_map((h, w)),
        "input_color": kit.normalized_color(image),
        "pred_diffuse": rng.random((h, w, 3)),
    }
    kernels = [
        KernelSpec({"position": 0.04}, beta=betas[0]),
        KernelSpec({"position": 0.06, "input_color": 0.2}, beta=betas[1]),
        KernelSpec({"position": 0.06, "pred_diffuse": 0.1}, beta=betas[2]),
    ]
    return DcrfProblem(unaries=[(target, alpha)], kernels=kernels, features=features,
                       iterations=3000, tolerance=1e-13)


def dense_solution(problem):
    """Independent oracle: assemble and solve the stationarity system."""
    h, w = problem.resolution()
    n = h * w
    weights = problem.pairwise_matrix()
    a = np.zeros(n)
    b = None
    for target, alpha in problem.unaries:
        af = alpha.reshape(n)
        a += af
        t = target.reshape(n, -1)
        b = af[:, None] * t if b is None else b + af[:, None] * t
    system = np.diag(a + 2.0 * weights.sum(axis=1)) - 2.0 * weights
    x = np.linalg.solve(system, b)
    return x.reshape(problem.unaries[0][0].shape)


def test_energy_zero_at_target_with_zero_betas():
    problem = _random_problem(0, betas=(0.0, 0.0, 0.0))
    target = problem.unaries[0][0]
    assert dcrf_energy(target, problem) == 0.0


def test_energy_constant_map_counts_unaries_only():
    h = w = 4
    target = np.full((h, w), 0.25)
    alpha = np.full((h, w), 0.5)
    features = {"position": unit_position_map((h, w))}
    problem = DcrfProblem(unaries=[(target, alpha)],
                          kernels=[KernelSpec({"position": 0.04}, beta=3.0)],
                          features=features)
    x = np.full((h, w), 0.75)
    expected = h * w * 0.5 * 0.25  # N * alpha * (x - t)^2, no pairwise cost
    assert dcrf_energy(x, problem) == pytest.approx(expected, rel=1e-12)


def test_solver_beats_initialization_energy():
    for seed in range(5):
        problem = _random_problem(seed)
        refined, info = dcrf_solve(problem, return_info=True)
        assert info["energies"][-1] <= info["energies"][0]
        assert dcrf_energy(refined, problem) == pytest.approx(info["energies"][-1], rel=1e-9)


def test_gauss_seidel_energy_monotone_per_sweep():
    problem = _random_problem(7)
    _, info = dcrf_solve(problem, return_info=True)
    energies = info["energies"]
    assert len(energies) > 2
    assert all(energies[i + 1] <= energies[i] + 1e-10 for i in range(len(energies) - 1))


def test_converged_matches_dense_solve():
    for seed in range(4):
        problem = _random_problem(seed, channels=3)
        refined = dcrf_solve(problem)
        assert np.max(np.abs(refined - dense_solution(problem))) < 1e-6


def test_beta_zero_single_unary_exact():
    problem = _random_problem(3, betas=(0.0, 0.0, 0.0))
    refined = dcrf_solve(problem)
    assert np.array_equal(refined, problem.unaries[0][0])


def test_beta_zero_two_unaries_weighted_average():
    rng = np.random.default_rng(5)
    h = w = 8
    t0, t1 = rng.random((h, w)), rng.random((h, w))
    a0, a1 = 0.1 + rng.random((h, w)), 0.1 + rng.random((h, w))
    problem = DcrfProblem(unaries=[(t0, a0), (t1, a1)],
                          kernels=[KernelSpec({"position": 0.04}, beta=0.0)],
                          features={"position": unit_position_map((h, w))})
    refined = dcrf_solve(problem)
    assert np.array_equal(refined, (a0 * t0 + a1 * t1) / (a0 + a1))


def test_jacobi_reaches_same_fixed_point():
    problem = _random_problem(9)
    gs = dcrf_solve(problem)
    problem_j = _random_problem(9)
    problem_j.mode = "jacobi"
    problem_j.iterations = 20000
    jac = dcrf_solve(problem_j)
    assert np.max(np.abs(gs - jac)) < 1e-9


def test_truncated_kernel_path_agrees():
    # Position-only kernel at this scale: nearest and diagonal neighbours sit
    # well above the 1e-4 cutoff, the next ring sits near 1e-8, so the
    # truncation drops a genuinely negligible tail.
    rng = np.random.default_rng(11)
    h = w = 8
    target = rng.random((h, w, 3))
    alpha = 0.2 + rng.random((h, w))
    features = {"position": unit_position_map((h, w))}
    kernels = [KernelSpec({"position": 0.04}, beta=3.0)]

    def solve(truncate):
        problem = DcrfProblem(unaries=[(target, alpha)], kernels=kernels,
                              features=features, iterations=3000, tolerance=1e-13,
                              truncate_below=truncate)
        dropped = np.sum((problem.pairwise_matrix() == 0.0)) if truncate else None
        return dcrf_solve(problem), dropped

    full, _ = solve(0.0)
    cut, dropped = solve(1e-4)
    assert dropped > h * w  # truncation actually removed entries
    assert np.max(np.abs(full - cut)) < 1e-4


def test_scale_covariance_of_minimizer():
    problem = _random_problem(13)
    base = dcrf_solve(problem)
    scaled = _random_problem(13)
    scaled.unaries = [(t, 7.5 * a) for t, a in scaled.unaries]
    scaled.kernels = [KernelSpec(k.feature_stds, 7.5 * k.beta) for k in scaled.kernels]
    assert np.max(np.abs(dcrf_solve(scaled) - base)) < 1e-9


def test_pairwise_matrix_symmetric_zero_diagonal():
    problem = _random_problem(15)
    weights = problem.pairwise_matrix()
    assert np.array_equal(weights, weights.T)
    assert np.all(np.diag(weights) == 0.0)


def test_solver_rejects_all_zero_unary():
    problem = _random_problem(17)
    problem.unaries = [(problem.unaries[0][0], np.zeros((8, 8)))]
    with pytest.raises(ValueError, match="underdetermined"):
        dcrf_solve(problem)


def test_normal_map_renormalized():
    rng = np.random.default_rng(19)
    h = w = 6
    target = kit.normalize_vectors(rng.standard_normal((h, w, 3)))
    target[..., 2] = np.abs(target[..., 2])
    target = kit.normalize_vectors(target)
    problem = DcrfProblem(unaries=[(target, np.full((h, w), 1.0))],
                          kernels=[KernelSpec({"position": 0.03}, beta=10.0)],
                          features={"position": unit_position_map((h, w))},
                          renormalize=True)
    refined = dcrf_solve(problem)
    assert np.linalg.norm(refined, axis=-1) == pytest.approx(np.ones((h, w)), abs=1e-12)


def test_presets_carry_table_stds():
    diffuse = load_preset("diffuse")
    stds = [k.feature_stds for k in diffuse["kernels"]]
    assert stds == [{"position": 0.04},
                    {"position": 0.06, "input_color": 0.2},
                    {"position": 0.06, "pred_diffuse": 0.1}]
    normal = load_preset("normal")
    assert [k.feature_stds for k in normal["kernels"]] == [
        {"position": 0.03}, {"position": 0.06, "diffuse_grad": 0.1}]
    rough = load_preset("roughness")
    assert [k.feature_stds for k in rough["kernels"]] == [
        {"position": 0.04}, {"position": 0.06, "refined_diffuse": 0.2}]


def test_preset_problem_builders_run():
    rng = np.random.default_rng(21)
    h = w = 8
    image = rng.random((h, w, 3))
    pred_d = rng.random((h, w, 3))
    refined_d = kit.build_diffuse_problem(pred_d, image)
    out_d = dcrf_solve(refined_d)
    assert out_d.shape == (h, w, 3)

    pred_n = kit.normalize_vectors(np.concatenate(
        [0.2 * rng.standard_normal((h, w, 2)), np.ones((h, w, 1))], axis=-1))
    out_n = dcrf_solve(kit.build_normal_problem(pred_n, out_d))
    assert np.linalg.norm(out_n, axis=-1) == pytest.approx(np.ones((h, w)), abs=1e-9)

    pred_r = 0.2 + 0.6 * rng.random((h, w))
    grid_r = np.clip(pred_r + 0.1 * rng.standard_normal((h, w)), 0.1, 1.0)
    out_r = dcrf_solve(kit.build_roughness_problem(pred_r, grid_r, out_d, image))
    assert out_r.shape == (h, w)


def test_normalize_coefficients():
    assert normalize_coefficients([1.0, 1.0, 2.0]) == pytest.approx([0.25, 0.25, 0.5])
    assert normalize_coefficients([5.0]) == pytest.approx([1.0])
    rng = np.random.default_rng(2)
    for _ in range(20):
        theta = rng.uniform(0, 10, rng.integers(1, 8))
        assert normalize_coefficients(theta).sum() == pytest.approx(1.0, abs=1e-12)
    assert normalize_coefficients([-1.0, 3.0]) == pytest.approx([0.0, 1.0])
    with pytest.raises(ValueError):
        normalize_coefficients([0.0, 0.0])


def test_blend_params_by_class():
    sets = [[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]]
    one_hot = blend_params_by_class(sets, [0.0, 1.0])
    assert np.array_equal(one_hot, [1.0, 2.0, 3.0])
    same = blend_params_by_class([[1.0, 2.0], [1.0, 2.0]], [0.3, 0.7])
    assert same == pytest.approx([1.0, 2.0])
    mixed = blend_params_by_class([[0.0, 0.0], [1.0, 1.0]], [0.5, 0.5])
    assert mixed == pytest.approx([0.5, 0.5])
    with pytest.raises(ValueError):
        blend_params_by_class(sets, [0.5, 0.2])
