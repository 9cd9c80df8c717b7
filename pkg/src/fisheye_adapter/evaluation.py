"""Conversion quality metrics: reprojection and parameter error, image remapping, PSNR, SSIM."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionMismatch
from .models import CameraModel, OccParams, project_many, unproject_many
from .sampler import DEFAULT_N, SampleSet, sample_grid

SSIM_WINDOW = 8
SSIM_K1 = 0.01
SSIM_K2 = 0.03
PEAK = 255.0
# remap tolerance for source coordinates that land a hair outside the image
_EDGE_EPS = 1e-6


@dataclass(frozen=True)
class Raster:
    """8-bit image, ``pixels`` shaped (H, W) or (H, W, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.dtype != np.uint8:
            raise ValueError("raster samples must be uint8")
        if px.ndim == 3 and px.shape[2] == 1:
            px = px[:, :, 0]
        if not (px.ndim == 2 or (px.ndim == 3 and px.shape[2] == 3)):
            raise ValueError(f"raster must be (H, W) or (H, W, 3), got {px.shape}")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3


@dataclass(frozen=True)
class RemapResult:
    image: Raster
    mask: np.ndarray  # (H, W) bool, True where the output pixel was filled

    @property
    def invalid_count(self) -> int:
        return int(self.mask.size - np.count_nonzero(self.mask))


@dataclass(frozen=True)
class EvalSummary:
    psnr: float
    ssim: float
    re: float
    pe: float
    rmse_coeffs: float


def reprojection_error(
    input_model: CameraModel,
    output_model: CameraModel,
    samples: SampleSet | None = None,
    n: int = DEFAULT_N,
) -> tuple[float, float]:
    """RMS and max of ``|project(out, unproject(in, u)) - u|`` in pixels.

    Uses ``samples`` when given (their bearings already come from the input
    model), otherwise grid-samples ``n`` pixels through ``input_model``.
    Samples outside the output model's projection domain are skipped.
    """
    if samples is None:
        samples = sample_grid(input_model, n)
    uv, ok = project_many(output_model, samples.bearings)
    err = np.linalg.norm(uv[ok] - samples.pixels[ok], axis=1)
    if err.size == 0:
        return math.inf, math.inf
    return float(np.sqrt(np.mean(err * err))), float(np.max(err))


def parameter_error(est, gt) -> float:
    """L2 norm of the difference of two canonical parameter vectors."""
    est, gt = np.asarray(est, dtype=np.float64), np.asarray(gt, dtype=np.float64)
    if est.shape != gt.shape:
        raise ValueError("parameter vectors must have equal length")
    return float(np.linalg.norm(est - gt))


def coeff_rmse(est, gt) -> float:
    est, gt = np.asarray(est, dtype=np.float64), np.asarray(gt, dtype=np.float64)
    if est.shape != gt.shape:
        raise ValueError("coefficient vectors must have equal length")
    return float(np.sqrt(np.mean((est - gt) ** 2)))


def distortion_coeffs(params, reference=None) -> np.ndarray:
    """Distortion part of the canonical vector.

    For OCC this is a0..a_q where q is the last nonzero index of the
    reference's ``a`` (so an order-2 ground truth compares a0..a2).
    """
    if isinstance(params, OccParams):
        ref = reference if reference is not None else params
        nz = np.flatnonzero(np.asarray(ref.a))
        q = int(nz[-1]) if nz.size else 0
        return np.asarray(params.a[: q + 1])
    return params.to_vector()[4:]


def _bilinear(img: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    h, w = img.shape[:2]
    u = np.clip(u, 0.0, w - 1.0)
    v = np.clip(v, 0.0, h - 1.0)
    u0 = np.minimum(np.floor(u).astype(np.intp), w - 2)
    v0 = np.minimum(np.floor(v).astype(np.intp), h - 2)
    du, dv = u - u0, v - v0
    if img.ndim == 3:
        du, dv = du[..., None], dv[..., None]
    f = img.astype(np.float64)
    top = f[v0, u0] * (1 - du) + f[v0, u0 + 1] * du
    bottom = f[v0 + 1, u0] * (1 - du) + f[v0 + 1, u0 + 1] * du
    return top * (1 - dv) + bottom * dv


def remap(image: Raster, input_model: CameraModel, output_model: CameraModel) -> RemapResult:
    """Re-render ``image`` (taken with ``input_model``) as seen through ``output_model``.

    Works backwards from each output pixel: unproject through the output
    model, project through the input model, bilinearly sample the source.
    Pixels failing either domain test or landing outside the source are 0
    and cleared in the returned mask.
    """
    w, h = image.width, image.height
    for m in (input_model, output_model):
        if (m.width, m.height) != (w, h):
            raise DimensionMismatch(
                f"model image size {m.width}x{m.height} != raster {w}x{h}"
            )
    vv, uu = np.mgrid[0:h, 0:w].astype(np.float64)
    grid = np.stack([uu, vv], axis=-1).reshape(-1, 2)
    bearings, ok = unproject_many(output_model, grid)
    src, ok_in = project_many(input_model, np.where(ok[:, None], bearings, 1.0))
    ok &= ok_in
    su, sv = src[:, 0], src[:, 1]
    with np.errstate(invalid="ignore"):
        ok &= (su >= -_EDGE_EPS) & (su <= w - 1 + _EDGE_EPS)
        ok &= (sv >= -_EDGE_EPS) & (sv <= h - 1 + _EDGE_EPS)
    flat = image.pixels.reshape(h * w, -1)
    out = np.zeros_like(flat)
    vals = _bilinear(image.pixels, su[ok], sv[ok]).reshape(np.count_nonzero(ok), -1)
    out[ok] = np.clip(np.rint(vals), 0, 255).astype(np.uint8)
    return RemapResult(Raster(out.reshape(image.pixels.shape)), ok.reshape(h, w))


def _pair(a: Raster, b: Raster, mask):
    if a.pixels.shape != b.pixels.shape:
        raise DimensionMismatch(f"raster shapes differ: {a.pixels.shape} vs {b.pixels.shape}")
    x = a.pixels.astype(np.float64)
    y = b.pixels.astype(np.float64)
    if x.ndim == 2:
        x, y = x[..., None], y[..., None]
    if mask is None:
        mask = np.ones(x.shape[:2], dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x.shape[:2]:
        raise DimensionMismatch("mask shape must match the raster")
    return x, y, mask


def psnr(a: Raster, b: Raster, mask=None) -> float:
    """Peak signal-to-noise ratio in dB (peak 255), over all channels of the masked pixels.

    Identical inputs give ``math.inf``.
    """
    x, y, mask = _pair(a, b, mask)
    if not np.any(mask):
        raise ValueError("empty mask")
    mse = float(np.mean((x[mask] - y[mask]) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)


def ssim_map(x: np.ndarray, y: np.ndarray, window: int = SSIM_WINDOW) -> np.ndarray:
    """SSIM of every ``window`` x ``window`` patch (stride 1) of two 2-D float arrays."""
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    px = sliding_window_view(x, (window, window))
    py = sliding_window_view(y, (window, window))
    mx = px.mean(axis=(-1, -2))
    my = py.mean(axis=(-1, -2))
    vx = (px * px).mean(axis=(-1, -2)) - mx * mx
    vy = (py * py).mean(axis=(-1, -2)) - my * my
    cov = (px * py).mean(axis=(-1, -2)) - mx * my
    return ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))


def ssim(a: Raster, b: Raster, mask=None, window: int = SSIM_WINDOW) -> float:
    """Mean SSIM over all windows lying entirely inside ``mask``.

    Colour images are scored per channel and averaged.
    """
    x, y, mask = _pair(a, b, mask)
    if min(mask.shape) < window:
        raise ValueError(f"image smaller than the {window}x{window} SSIM window")
    inside = sliding_window_view(mask, (window, window)).all(axis=(-1, -2))
    if not np.any(inside):
        raise ValueError("no SSIM window lies fully inside the mask")
    scores = [ssim_map(x[..., c], y[..., c], window)[inside].mean() for c in range(x.shape[2])]
    return float(np.mean(scores))
