"""Model conversion: sample, unproject through the input, initialize and fit the output."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import initializer as init
from .errors import NoConvergence, RankDeficient, TooFewValidSamples
from .evaluation import reprojection_error
from .lm import LmOptions, LmOutcome, Status, minimize
from .models import KINDS, CameraModel, ImageSize, OccParams, occ_sensor
from .numeric import solve_lsq
from .providers import PROVIDERS, RT_Z_EPS
from .sampler import DEFAULT_N, MIN_SAMPLES, SampleSet, grid_pixels, sample_grid

OCC_MAX_ORDER = 15
OCC_MIN_ORDER = 2
# an order is "as good as the best" within 1% plus this absolute floor (px)
OCC_ORDER_SLACK_PX = 1e-9


@dataclass
class ConversionReport:
    target_kind: str
    requested_n: int
    accepted_n: int
    used_n: int
    init_params: np.ndarray
    final_params: np.ndarray
    iterations: int
    status: str
    final_cost: float
    init_rms_reprojection_error: float
    rms_reprojection_error: float
    max_reprojection_error: float
    wall_time_ms: float
    coverage_loss: int = 0
    occ_order: int | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        """The flat ``key: value`` report block used by the CLI."""
        return {
            "n": self.requested_n,
            "accepted_n": self.accepted_n,
            "iterations": self.iterations,
            "rms_re_px": self.rms_reprojection_error,
            "max_re_px": self.max_reprojection_error,
            "wall_time_ms": self.wall_time_ms,
        }


class ConversionNotConverged(NoConvergence):
    def __init__(self, message, model, report):
        super().__init__(message)
        self.model = model
        self.report = report


def fit_occ_forward_poly(
    samples: SampleSet, occ_partial: OccParams, max_order: int = OCC_MAX_ORDER
) -> tuple[np.ndarray, int]:
    """Fit the forward polynomial k0..kp of an OCC model to the sample set.

    For every order p in 2..max_order solve
        (x / r) * sum_j k_j theta^j = m_x,  (y / r) * sum_j k_j theta^j = m_y
    with theta = atan2(z, r) and (m_x, m_y) the affine-corrected pixel offsets,
    then keep the smallest p whose RMS reprojection error is within 1% of the
    best order's.

    Raises:
        RankDeficient: if no order can be fitted.
    """
    X = samples.bearings
    r = np.hypot(X[:, 0], X[:, 1])
    keep = r > 1e-9
    X, r = X[keep], r[keep]
    theta = np.arctan2(X[:, 2], r)
    mx, my = occ_sensor(occ_partial, samples.pixels[keep])
    target = np.stack([mx, my], axis=1).reshape(-1)
    dirs = X[:, :2] / r[:, None]

    fits = []
    for p in range(OCC_MIN_ORDER, max_order + 1):
        powers = theta[:, None] ** np.arange(p + 1)[None, :]
        A = (dirs[:, :, None] * powers[:, None, :]).reshape(-1, p + 1)
        try:
            k = solve_lsq(A, target)
        except RankDeficient:
            continue
        res = (A @ k - target).reshape(-1, 2)
        rms = float(np.sqrt(np.mean(np.sum(res * res, axis=1))))
        fits.append((p, k, rms))
    if not fits:
        raise RankDeficient("forward polynomial could not be fitted at any order")
    best = min(f[2] for f in fits)
    for p, k, rms in fits:
        if rms <= 1.01 * best + OCC_ORDER_SLACK_PX:
            return k, p
    raise AssertionError("unreachable")


def complete_occ(
    cx: float,
    cy: float,
    a,
    image_size,
    c: float = 1.0,
    d: float = 0.0,
    e: float = 0.0,
    n: int = 2000,
    max_order: int = OCC_MAX_ORDER,
) -> CameraModel:
    """Build a full OCC model from its unprojection polynomial alone.

    The forward polynomial is fitted over ``n`` grid pixels whose rays come
    straight from ``a``; pixels giving a non-finite ray are skipped.
    """
    partial = OccParams(cx, cy, tuple(a), (0.0, 1.0), c, d, e)
    size = image_size if isinstance(image_size, ImageSize) else ImageSize(*image_size)
    pixels = grid_pixels(n, size.width, size.height)
    mx, my = occ_sensor(partial, pixels)
    mz = np.polynomial.polynomial.polyval(np.hypot(mx, my), partial.a)
    rays = np.stack([mx, my, mz], axis=1)
    norm = np.linalg.norm(rays, axis=1)
    ok = np.isfinite(norm) & (norm > 0)
    samples = SampleSet(pixels[ok], rays[ok] / norm[ok, None], size, n)
    k, _ = fit_occ_forward_poly(samples, partial, max_order)
    return CameraModel(OccParams(cx, cy, tuple(a), tuple(k), c, d, e), size)


def initial_vector(target_kind: str, samples: SampleSet, intr: init.InheritedIntrinsics) -> np.ndarray:
    base = [intr.fx, intr.fy, intr.cx, intr.cy]
    if target_kind == "ucm":
        return np.array(base + [init.init_ucm_alpha(samples, intr)])
    if target_kind == "eucm":
        return np.array(base + list(init.init_eucm(samples, intr)))
    if target_kind == "ds":
        return np.array(base + list(init.init_ds(samples, intr)))
    if target_kind == "kb":
        return np.array(base + list(init.init_kb(samples, intr)))
    if target_kind == "woodscape":
        return np.array(base + list(init.init_woodscape(samples, intr)))
    if target_kind == "rt":
        return np.array(base + list(init.init_rt(samples, intr)) + [0.0, 0.0])
    if target_kind == "occ":
        return np.array([intr.cx, intr.cy, *init.init_occ(samples, intr.cx, intr.cy)])
    raise ValueError(f"unknown target kind {target_kind!r}; expected one of {', '.join(KINDS)}")


def _build(target_kind: str, x: np.ndarray, samples: SampleSet, image_size):
    provider = PROVIDERS[target_kind]
    if target_kind == "occ":
        partial = provider.to_params(x)
        k, p = fit_occ_forward_poly(samples, partial)
        return CameraModel(provider.to_params(x, k), image_size), p
    return CameraModel(provider.to_params(x), image_size), None


def incidence_angles(bearings: np.ndarray) -> np.ndarray:
    return np.arctan2(np.hypot(bearings[:, 0], bearings[:, 1]), bearings[:, 2])


def convert(
    input_model: CameraModel,
    target_kind: str,
    n: int = DEFAULT_N,
    opts: LmOptions | None = None,
    max_incidence: float | None = None,
    strict: bool = False,
) -> tuple[CameraModel, ConversionReport]:
    """Convert ``input_model`` to the ``target_kind`` family.

    Args:
        input_model: calibrated source model.
        target_kind: one of ``KINDS``.
        n: number of grid samples.
        opts: optimizer settings.
        max_incidence: optional cap (radians) on the angle between a sample's
            ray and the optical axis; useful when fitting RT to wide lenses.
        strict: raise :class:`ConversionNotConverged` unless the optimizer
            reports convergence.

    Returns:
        The converted model (same image size) and a :class:`ConversionReport`.
    """
    if target_kind not in PROVIDERS:
        raise ValueError(f"unknown target kind {target_kind!r}; expected one of {', '.join(KINDS)}")
    t0 = time.perf_counter()
    samples = sample_grid(input_model, n)
    accepted_n = samples.accepted_n

    keep = np.ones(accepted_n, dtype=bool)
    if max_incidence is not None:
        keep &= incidence_angles(samples.bearings) <= max_incidence
    if target_kind == "rt":
        # RT cannot see rays at or behind 90 degrees
        keep &= samples.bearings[:, 2] > RT_Z_EPS
    coverage_loss = int(accepted_n - np.count_nonzero(keep))
    if coverage_loss:
        samples = samples.subset(keep)
    if samples.accepted_n < MIN_SAMPLES:
        raise TooFewValidSamples(f"only {samples.accepted_n} usable samples for {target_kind}")

    intr = init.inherit_intrinsics(input_model, target_kind)
    x0 = initial_vector(target_kind, samples, intr)
    outcome: LmOutcome = minimize(PROVIDERS[target_kind], samples, x0, opts)

    init_model, init_order = _build(target_kind, PROVIDERS[target_kind].clip(x0), samples, input_model.image_size)
    out_model, order = _build(target_kind, outcome.params, samples, input_model.image_size)
    init_rms, init_worst = reprojection_error(input_model, init_model, samples)
    rms, worst = reprojection_error(input_model, out_model, samples)
    # UCM, EUCM, DS and OCC minimize an algebraic residual, whose optimum can
    # sit slightly above the initial guess in pixel terms; never hand back a
    # model that reprojects worse than where the optimizer started
    kept_initial = bool(rms > init_rms)
    if kept_initial:
        out_model, order, rms, worst = init_model, init_order, init_rms, init_worst
    wall_ms = (time.perf_counter() - t0) * 1e3

    report = ConversionReport(
        target_kind=target_kind,
        requested_n=n,
        accepted_n=accepted_n,
        used_n=samples.accepted_n,
        init_params=init_model.params.to_vector(),
        final_params=out_model.params.to_vector(),
        iterations=outcome.iterations,
        status=outcome.status.value,
        final_cost=outcome.final_cost,
        init_rms_reprojection_error=init_rms,
        rms_reprojection_error=rms,
        max_reprojection_error=worst,
        wall_time_ms=wall_ms,
        coverage_loss=coverage_loss,
        occ_order=order,
        extra={"kept_initial": kept_initial},
    )
    if strict and outcome.status is not Status.CONVERGED:
        raise ConversionNotConverged(f"optimizer {outcome.status.value}", out_model, report)
    return out_model, report
