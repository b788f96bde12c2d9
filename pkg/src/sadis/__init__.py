"""Color-texture disentanglement toolkit.

Tensor-level building blocks for separating color and texture style
attributes: token-embedding extraction, a noise-regularized
whitening-coloring transform on channel-major latents, color and frequency
metrics, and a closed-form Gaussian diffusion sandbox that exercises the
whole pipeline without any neural network.
"""

from .cte import (
    CteConfig,
    StyleCondition,
    combine,
    concat_tokens,
    extract_color_embedding,
    extract_texture_embedding,
    reweight_singular_values,
)
from .errors import (
    DecompositionError,
    DegenerateInputError,
    DegenerateReferenceError,
    DimensionError,
    DomainError,
    FormatError,
    NumericalError,
    SadisError,
    SizeError,
    UnsupportedDtypeError,
    UnsupportedFormatError,
    UnsupportedLayoutError,
)
from .imageops import GrayImage, average_gray, downsample2x, gray_to_rgb, grayscale
from .metrics import (
    HistogramSet,
    SpectrumProfile,
    chist_distance,
    covariance_distance,
    radial_spectrum,
    rgb_histograms,
    spectrum_gap,
    swd_color_distance,
)
from .regwct import (
    RegWctConfig,
    blend_step,
    channel_moments,
    color,
    in_gate,
    reg_wct,
    wct,
    whiten,
)
from .sandbox import (
    SimConfig,
    TrajectoryReport,
    arm_configs,
    exact_eps,
    make_schedule,
    report_summary,
    report_to_csv,
    run_trajectory,
    sample_data,
)
from .tensorio import (
    Embedding,
    LatentTensor,
    RgbImage,
    read_embedding,
    read_image,
    read_latent,
    read_npy,
    write_image,
    write_npy,
)

__version__ = "0.1.0"
