"""Learned-resampling engine for arbitrary geometric image transformations."""

from .errors import (
    ConfigError,
    DecodeError,
    EvaluationError,
    FormatError,
    LerfError,
    ParameterError,
    ShapeError,
)
from .image import (
    BoundaryPolicy,
    ImageBuffer,
    gaussian_filter,
    load_image,
    pad_read,
    rgb_to_luma,
    save_image,
)
from .geometry import (
    Flow,
    Homography,
    SampleGrid,
    Scale,
    back_project_homography,
    back_project_scale,
    build_sample_grid,
    load_flow,
    load_homography,
    save_flow,
)
from .kernels import (
    KernelFamily,
    clamp_hyperparams,
    eval_fixed_1d,
    weights_amplified_linear,
    weights_aniso_gaussian,
    weights_fixed_2d,
)
from .lut import (
    LutBank,
    LutTable,
    Pattern,
    apply_g_enhancer,
    load_lut_bank,
    make_constant_bank,
    predict_hyperparams,
    quantize_index,
    save_lut_bank,
    simplex_interp,
)
from .resample import (
    PreprocessConfig,
    ResampleJob,
    ResampleResult,
    downsample_lerf,
    preprocess,
    resample,
    resample_fixed,
    resample_lerf,
)
from .metrics import degrade_bicubic, mpsnr, psnr_y, ssim
from .bench import BenchReport, MetricRecord, bench_run, warp_bench_run, write_csv

__version__ = "0.1.0"
