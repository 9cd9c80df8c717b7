"""Closed-form linear initialization of output-model parameters.

Each routine stacks one row per pixel coordinate per sample (x-rows and
y-rows unweighted) and solves the resulting system with ``solve_lsq``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient
from .models import CameraModel, OccParams, WoodscapeParams
from .numeric import solve_lsq
from .sampler import SampleSet

# rows whose coordinate denominator is smaller than this are dropped
ROW_EPS = 1e-9


@dataclass(frozen=True)
class InheritedIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    @property
    def f(self) -> np.ndarray:
        return np.array([self.fx, self.fy])

    @property
    def c(self) -> np.ndarray:
        return np.array([self.cx, self.cy])


def inherit_intrinsics(input_model: CameraModel, target_kind: str | None = None) -> InheritedIntrinsics:
    """Copy focal lengths and principal point.

    OCC inputs use a0 as focal length. WoodScape inputs converted to another
    family use fx * k1 (the image-radius slope at the centre): calibrations
    in that family commonly keep fx = 1 and put the focal length in k1, and
    (fx, k) -> (s fx, k / s) leaves the projection unchanged.
    """
    p = input_model.params
    if isinstance(p, OccParams):
        return InheritedIntrinsics(p.a[0], p.a[0], p.cx, p.cy)
    if isinstance(p, WoodscapeParams) and target_kind != "woodscape":
        return InheritedIntrinsics(p.fx * p.k1, p.fy * p.k1, p.cx, p.cy)
    return InheritedIntrinsics(p.fx, p.fy, p.cx, p.cy)


def _flatten(samples: SampleSet, cols: np.ndarray, rhs: np.ndarray, keep: np.ndarray):
    """(N, 2, k) columns and (N, 2) right-hand sides -> filtered 2-D system."""
    k = cols.shape[-1]
    keep = keep.reshape(-1)
    return cols.reshape(-1, k)[keep], rhs.reshape(-1)[keep]


def init_ucm_alpha(samples: SampleSet, intr: InheritedIntrinsics) -> float:
    """Least-squares alpha with the focal lengths and principal point held fixed.

    From (u - c)(alpha d + (1 - alpha) z) = f x:
        alpha (d - z)(u - c) = f x - z (u - c)
    """
    X = samples.bearings
    d = np.linalg.norm(X, axis=1)
    z = X[:, 2]
    uc = samples.pixels - intr.c
    A = ((d - z)[:, None] * uc).reshape(-1, 1)
    b = (intr.f * X[:, :2] - z[:, None] * uc).reshape(-1)
    if np.max(np.abs(A)) < ROW_EPS:
        raise RankDeficient("all samples are on the optical axis; alpha is unobservable")
    (alpha,) = solve_lsq(A, b)
    return float(np.clip(alpha, 0.0, 1.0))


def init_eucm(samples: SampleSet, intr: InheritedIntrinsics) -> tuple[float, float]:
    """beta is pinned to 1, which reduces EUCM to UCM for the alpha solve."""
    return init_ucm_alpha(samples, intr), 1.0


def init_ds(samples: SampleSet, intr: InheritedIntrinsics) -> tuple[float, float]:
    """xi is pinned to 0, which reduces DS to UCM for the alpha solve."""
    return init_ucm_alpha(samples, intr), 0.0


def _radial_system(samples: SampleSet, intr: InheritedIntrinsics, powers, subtract_theta: bool):
    X = samples.bearings
    r = np.hypot(X[:, 0], X[:, 1])
    theta = np.arctan2(r, X[:, 2])
    p = X[:, :2]
    keep = np.abs(p) > ROW_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        rhs = (samples.pixels - intr.c) / (intr.f * p) * r[:, None]
    if subtract_theta:
        rhs = rhs - theta[:, None]
    cols = theta[:, None] ** np.asarray(powers)[None, :]
    cols = np.broadcast_to(cols[:, None, :], (len(theta), 2, len(powers)))
    return _flatten(samples, cols, rhs, keep)


def init_kb(samples: SampleSet, intr: InheritedIntrinsics) -> np.ndarray:
    """k1..k4 from sum_i k_i theta^(2i+1) = (u - c) r / (f x) - theta."""
    A, b = _radial_system(samples, intr, (3, 5, 7, 9), subtract_theta=True)
    return solve_lsq(A, b)


def init_woodscape(samples: SampleSet, intr: InheritedIntrinsics) -> np.ndarray:
    """k1..k4 from sum_i k_i theta^i = (u - c) r / (f x)."""
    A, b = _radial_system(samples, intr, (1, 2, 3, 4), subtract_theta=False)
    return solve_lsq(A, b)


def init_occ(samples: SampleSet, cx: float, cy: float) -> np.ndarray:
    """a0..a4 with the affine part fixed to identity.

    Each coordinate gives m_z = z (u - c) / x with m_z a quartic in r_u = |u - c|.
    """
    X = samples.bearings
    uc = samples.pixels - np.array([cx, cy])
    ru = np.hypot(uc[:, 0], uc[:, 1])
    p = X[:, :2]
    keep = np.abs(p) > ROW_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        rhs = X[:, 2:3] * uc / p
    cols = ru[:, None] ** np.arange(5)[None, :]
    cols = np.broadcast_to(cols[:, None, :], (len(ru), 2, 5))
    A, b = _flatten(samples, cols, rhs, keep)
    return solve_lsq(A, b)


def init_rt(samples: SampleSet, intr: InheritedIntrinsics) -> np.ndarray:
    """k1..k3 (p1 = p2 = 0) from k . [r^2, r^4, r^6] = (u - c) / (f x') - 1.

    Samples must have z > 0.
    """
    X = samples.bearings
    pp = X[:, :2] / X[:, 2:3]
    r2 = np.sum(pp * pp, axis=1)
    keep = np.abs(pp) > ROW_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        rhs = (samples.pixels - intr.c) / (intr.f * pp) - 1.0
    cols = np.stack([r2, r2**2, r2**3], axis=1)
    cols = np.broadcast_to(cols[:, None, :], (len(r2), 2, 3))
    A, b = _flatten(samples, cols, rhs, keep)
    return solve_lsq(A, b)
