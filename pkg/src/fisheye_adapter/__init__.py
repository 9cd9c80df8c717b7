"""Convert calibrated fisheye camera models between families without images."""

from .converter import ConversionNotConverged, ConversionReport, convert
from .errors import (
    AllSamplesInvalid,
    DimensionMismatch,
    FisheyeAdapterError,
    MalformedHeader,
    NoConvergence,
    NonFinite,
    NumericalFailure,
    OutOfDomain,
    ParseError,
    RankDeficient,
    SingularJacobian,
    TooFewValidSamples,
    UnsupportedFormat,
    ValidationError,
)
from .evaluation import EvalSummary, Raster, RemapResult, coeff_rmse, parameter_error, psnr, remap, reprojection_error, ssim
from .io import load_model, load_raster, save_model, save_raster
from .lm import LmOptions, LmOutcome, Status
from .models import (
    KINDS,
    CameraModel,
    DsParams,
    EucmParams,
    ImageSize,
    KbParams,
    OccParams,
    RtParams,
    UcmParams,
    WoodscapeParams,
    project,
    project_many,
    ucm_from_legacy,
    unproject,
    unproject_many,
)
from .sampler import SampleSet, sample_grid

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
