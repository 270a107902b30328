"""svbrdfkit: inverse rendering of spatially varying BRDF maps.

A numpy library for the full flash-photograph material pipeline: microfacet
BRDF evaluation, differentiable point-light rendering, loss functions,
continuous densely connected CRF refinement, roughness grid search, a
photometric-stereo baseline and dataset augmentation.
"""

__version__ = "0.1.0"

from .augment import (
    AugmentPlan,
    PatchDescriptor,
    materialize_patch,
    patch_plan,
    scale_albedo,
    scale_normal,
    scale_roughness,
)
from .brdf import (
    EPS_COS,
    R_MIN,
    BrdfParams,
    ShadingVectors,
    distribution_term,
    eval_brdf,
    f0_conductor,
    f0_dielectric,
    fresnel_term,
    geometry_term,
    half_vector,
    specular_term,
)
from .dcrf import (
    DcrfProblem,
    KernelSpec,
    blend_params_by_class,
    build_diffuse_problem,
    build_normal_problem,
    build_roughness_problem,
    centered_position_map,
    dcrf_energy,
    dcrf_solve,
    diffuse_gradient_feature,
    diffuse_unary_weight_map,
    gaussian_kernel_weight,
    load_preset,
    normalize_coefficients,
    normalized_color,
    roughness_unary_weight_map,
    unit_position_map,
)
from .estimators import (
    FitConfig,
    GridSearchConfig,
    albedo_from_observation,
    fit_svbrdf_gd,
    roughness_grid_search,
)
from .gradients import GradientField, finite_diff_check, render_with_gradients
from .imageio import (
    MapFileSet,
    PfmFormatError,
    decode_normal_png,
    encode_normal_png,
    read_pfm,
    read_png,
    write_pfm,
    write_png,
)
from .losses import (
    LossWeights,
    NormalBinTable,
    cross_entropy,
    l2_map_loss,
    normal_bin_weights,
    recon_loss,
    total_loss,
    total_loss_cls,
    weighted_normal_loss,
)
from .photometric import PsObservationSet, lambertian_ps, trim_observations
from .render import (
    render_image,
    sample_flash_position,
    sample_novel_light,
    tonemap,
    tonemap_grad,
)
from .scene import (
    SceneConfig,
    SvbrdfMaps,
    default_flash_intensity,
    default_scene,
    flat_normal_map,
    normalize_vectors,
    pixel_grid,
    pixel_world_position,
    uniform_maps,
)
