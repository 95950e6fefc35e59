"""Slice curation and GLCM-entropy adaptive slice sampling for CT volumes."""

from .curation import (
    CurationManifest,
    connected_components,
    curate_volume,
    fallback_lung_mask,
    lung_fraction,
    otsu_threshold,
)
from .glcm import (
    EntropyProfile,
    Glcm,
    GlcmConfig,
    cooccurrence,
    entropy_profile,
    glcm_entropy,
    quantize,
)
from .metrics import ConfusionCounts, confusion, macro_f1, sensitivity, specificity
from .sampler import (
    SamplingConfig,
    SamplingPlan,
    build_cdf,
    diff_abs_normalize,
    inverse_cdf_sample,
    sample_center,
    sample_glcm,
    sample_profile,
    sample_uniform,
)
from .smoothing import SgConfig, sg_coefficients, sg_smooth
from .volume_io import (
    PhantomSpec,
    Volume,
    generate_phantom,
    load_image_stack,
    load_raw_volume,
    load_volume,
    write_raw_volume,
)

__version__ = "0.1.0"
