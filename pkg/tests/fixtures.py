"""Representative models shared by the test modules."""

from __future__ import annotations

import numpy as np

from fisheye_adapter.converter import complete_occ
from fisheye_adapter.models import (
    CameraModel,
    DsParams,
    EucmParams,
    ImageSize,
    KbParams,
    RtParams,
    UcmParams,
    WoodscapeParams,
)

# synthetic desk-scale double-sphere lens (about 197 degrees across the diagonal)
DS_DESK = CameraModel(DsParams(158.0, 158.0, 256.0, 256.0, 0.57, -0.27), ImageSize(512, 512))

# UCM recovered from the legacy (gamma, xi) calibration of a 190-degree lens
REF_UCM = CameraModel(UcmParams(131.5893, 131.3089, 514.168, 382.797, 0.4937), ImageSize(1028, 766))
REF_OCC_A = (131.0074, 0.0, -0.0018)


def reference_occ() -> CameraModel:
    return complete_occ(516.4379, 383.014, REF_OCC_A + (0.0, 0.0), (1028, 766))


def representative_models() -> dict[str, CameraModel]:
    return {
        "ucm": CameraModel(UcmParams(300.0, 298.0, 640.0, 400.0, 0.6), ImageSize(1280, 800)),
        "eucm": CameraModel(EucmParams(191.39, 191.37, 254.93, 256.90, 0.629, 1.04), ImageSize(512, 512)),
        "ds": DS_DESK,
        "kb": CameraModel(
            KbParams(190.97, 190.98, 254.93, 256.90, 0.0034823894, 0.000715035, -0.002053236, 0.000202937),
            ImageSize(512, 512),
        ),
        "occ": reference_occ(),
        "rt": CameraModel(
            RtParams(458.654, 457.296, 367.215, 248.375, -0.28340811, 0.07395907, -0.0104, 0.00019359, 1.76187114e-05),
            ImageSize(752, 480),
        ),
        "woodscape": CameraModel(
            WoodscapeParams(1.0, 1.0, 640.0, 483.0, 339.749, -31.988, 48.275, -7.201), ImageSize(1280, 966)
        ),
    }


def pixel_grid(model: CameraModel, n: int = 50) -> np.ndarray:
    """n x n pixels spanning the full image, corners included."""
    us = np.linspace(0.0, model.width - 1.0, n)
    vs = np.linspace(0.0, model.height - 1.0, n)
    return np.stack(np.meshgrid(us, vs), axis=-1).reshape(-1, 2)


def unit_rays(rng, n, min_z=-1.0):
    """Uniform random unit vectors with z >= min_z."""
    out = []
    while sum(len(o) for o in out) < n:
        v = rng.normal(size=(2 * n, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        out.append(v[v[:, 2] >= min_z])
    return np.concatenate(out)[:n]


def random_provider_point(kind: str, rng):
    """A random parameter vector, pixels and in-domain bearings for a provider."""
    f = rng.uniform(150.0, 500.0, size=2)
    c = rng.uniform(200.0, 600.0, size=2)
    n = 20
    rays = unit_rays(rng, n, min_z=-0.3)
    if kind == "ucm":
        x = np.r_[f, c, rng.uniform(0.05, 0.95)]
    elif kind == "eucm":
        x = np.r_[f, c, rng.uniform(0.05, 0.95), rng.uniform(0.5, 2.0)]
    elif kind == "ds":
        x = np.r_[f, c, rng.uniform(0.05, 0.95), rng.uniform(-0.5, 0.5)]
    elif kind == "kb":
        x = np.r_[f, c, rng.normal(0.0, [0.05, 0.01, 0.003, 0.001])]
    elif kind == "woodscape":
        x = np.r_[f, c, rng.uniform(0.8, 1.2), rng.normal(0.0, [0.05, 0.02, 0.005])]
    elif kind == "rt":
        x = np.r_[f, c, rng.normal(0.0, [0.2, 0.05, 0.01, 0.003, 0.003])]
        rays = unit_rays(rng, n, min_z=0.5)
    elif kind == "occ":
        x = np.r_[c, rng.uniform(100.0, 300.0), rng.normal(0.0, [0.05, 2e-3, 5e-6, 1e-8])]
    else:
        raise ValueError(kind)
    pixels = c + rng.uniform(-400.0, 400.0, size=(n, 2))
    return x, pixels, rays


def fd_jacobian(provider, x, pixels, bearings, rel_step=1e-6):
    """Central-difference Jacobian, shape (N, 2, dim)."""
    J = np.zeros((len(pixels), 2, len(x)))
    for i in range(len(x)):
        h = rel_step * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        J[:, :, i] = (provider.residuals(xp, pixels, bearings) - provider.residuals(xm, pixels, bearings)) / (2 * h)
    return J


def jacobian_column_errors(J, fd):
    """Per-parameter relative error max|J - fd| / max|fd| over all samples."""
    num = np.max(np.abs(J - fd), axis=(0, 1))
    den = np.max(np.abs(fd), axis=(0, 1))
    return num / np.maximum(den, 1e-12)


def relative_parameter_deltas(out: CameraModel, ref: CameraModel) -> np.ndarray:
    """|out - ref| / max(|ref|, floor) per canonical parameter.

    The floor only matters for parameters that are exactly zero. For OCC's
    a_i it is a0 / r_max^i, the size at which a_i r^i matches a0 at the image
    corner; elsewhere it is 1e-12.
    """
    a, b = out.params.to_vector(), ref.params.to_vector()
    floor = np.full(b.shape, 1e-12)
    if ref.kind == "occ":
        r_max = 0.5 * float(np.hypot(ref.width, ref.height))
        floor[2:] = abs(b[2]) / r_max ** np.arange(len(b) - 2)
    return np.abs(a - b) / np.maximum(np.abs(b), floor)


def render_sphere_checkerboard(model: CameraModel, cells: int = 4, supersample: int = 4) -> np.ndarray:
    """8-bit image of a checkerboard painted on the sphere of directions.

    The colour of a direction is the parity of floor(cells x) + floor(cells y)
    + floor(cells z) on the unit bearing; each pixel averages a
    supersample x supersample grid of sub-pixel rays. Sub-rays outside the
    model's unprojection domain contribute black.
    """
    from fisheye_adapter.models import unproject_many

    h, w = model.height, model.width
    offs = (np.arange(supersample) + 0.5) / supersample - 0.5
    acc = np.zeros((h, w))
    vv, uu = np.mgrid[0:h, 0:w].astype(np.float64)
    for dv in offs:
        for du in offs:
            pix = np.stack([uu + du, vv + dv], axis=-1).reshape(-1, 2)
            b, ok = unproject_many(model, pix)
            cell = np.floor(cells * np.where(ok[:, None], b, 0.0)).sum(axis=1)
            acc += np.where(ok & (cell % 2 == 0), 255.0, 0.0).reshape(h, w)
    return np.rint(acc / supersample**2).astype(np.uint8)
