"""Camera model parameter records with projection, unprojection and domain tests.

Seven families are supported: UCM, EUCM, Double Sphere, Kannala-Brandt,
OCamCalib, radial-tangential (pinhole + Brown distortion) and the WoodScape
variant of Kannala-Brandt. Pixel coordinates have their origin at the centre
of the top-left pixel; angles are radians.

The ``*_many`` functions are vectorized over a leading batch axis and report
failures through a boolean mask (invalid rows hold NaN). The scalar
``project``/``unproject`` wrappers raise instead.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from functools import cached_property
from typing import ClassVar, Union

import numpy as np

from . import numeric
from .errors import NoConvergence, NonFinite, OutOfDomain, ValidationError

KINDS = ("ucm", "eucm", "ds", "kb", "occ", "rt", "woodscape")

# radius below which a ray counts as lying on the optical axis
AXIS_EPS = 1e-12
# above this alpha the UCM unprojection switches to the form without xi = a/(1-a)
_UCM_ALPHA_SWITCH = 0.999
OCC_CONSISTENCY_PX = 1.0


def _finite(name: str, *values: float) -> None:
    for v in values:
        if not np.isfinite(v):
            raise ValidationError(f"{name} must be finite")


def _check_focal(fx: float, fy: float, cx: float, cy: float) -> None:
    _finite("intrinsics", fx, fy, cx, cy)
    if not (fx > 0 and fy > 0):
        raise ValidationError("fx > 0 and fy > 0")


def _check_alpha(alpha: float) -> None:
    _finite("alpha", alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError("alpha in [0,1]")


@dataclass(frozen=True)
class ImageSize:
    width: int
    height: int

    def __post_init__(self):
        for name in ("width", "height"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 2:
                raise ValidationError(f"image {name} must be an integer >= 2")
            object.__setattr__(self, name, int(v))


class _Params:
    """Mixin giving parameter records a canonical flat vector form."""

    KIND: ClassVar[str]
    VECTOR_FIELDS: ClassVar[tuple[str, ...]]

    def to_vector(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in self.VECTOR_FIELDS], dtype=np.float64)

    @classmethod
    def vector_names(cls) -> tuple[str, ...]:
        return cls.VECTOR_FIELDS

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class UcmParams(_Params):
    fx: float
    fy: float
    cx: float
    cy: float
    alpha: float

    KIND: ClassVar[str] = "ucm"
    VECTOR_FIELDS: ClassVar[tuple[str, ...]] = ("fx", "fy", "cx", "cy", "alpha")

    def __post_init__(self):
        _check_focal(self.fx, self.fy, self.cx, self.cy)
        _check_alpha(self.alpha)


@dataclass(frozen=True)
class EucmParams(_Params):
    fx: float
    fy: float
    cx: float
    cy: float
    alpha: float
    beta: float

    KIND: ClassVar[str] = "eucm"
    VECTOR_FIELDS: ClassVar[tuple[str, ...]] = ("fx", "fy", "cx", "cy", "alpha", "beta")

    def __post_init__(self):
        _check_focal(self.fx, self.fy, self.cx, self.cy)
        _check_alpha(self.alpha)
        _finite("beta", self.beta)
        if not self.beta > 0:
            raise ValidationError("beta > 0")


@dataclass(frozen=True)
class DsParams(_Params):
    fx: float
    fy: float
    cx: float
    cy: float
    alpha: float
    xi: float

    KIND: ClassVar[str] = "ds"
    VECTOR_FIELDS: ClassVar[tuple[str, ...]] = ("fx", "fy", "cx", "cy", "alpha", "xi")

    def __post_init__(self):
        _check_focal(self.fx, self.fy, self.cx, self.cy)
        _check_alpha(self.alpha)
        _finite("xi", self.xi)


@dataclass(frozen=True)
class KbParams(_Params):
    fx: float
    fy: float
    cx: float
    cy: float
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    k4: float = 0.0

    KIND: ClassVar[str] = "kb"
    VECTOR_FIELDS: ClassVar[tuple[str, ...]] = ("fx", "fy", "cx", "cy", "k1", "k2", "k3", "k4")

    def __post_init__(self):
        _check_focal(self.fx, self.fy, self.cx, self.cy)
        _finite("k", self.k1, self.k2, self.k3, self.k4)

    @property
    def theta_poly(self) -> np.ndarray:
        """Ascending coefficients of d(theta) = theta + k1 theta^3 + ... + k4 theta^9."""
        return np.array([0, 1, 0, self.k1, 0, self.k2, 0, self.k3, 0, self.k4], dtype=np.float64)

    @cached_property
    def theta_max(self) -> float:
        """Upper end of the interval [0, t] (t <= pi) on which d(theta) increases."""
        return numeric.first_nonincreasing(self.theta_poly, 0.0, np.pi)


@dataclass(frozen=True)
class WoodscapeParams(_Params):
    fx: float
    fy: float
    cx: float
    cy: float
    k1: float = 1.0
    k2: float = 0.0
    k3: float = 0.0
    k4: float = 0.0

    KIND: ClassVar[str] = "woodscape"
    VECTOR_FIELDS: ClassVar[tuple[str, ...]] = ("fx", "fy", "cx", "cy", "k1", "k2", "k3", "k4")

    def __post_init__(self):
        _check_focal(self.fx, self.fy, self.cx, self.cy)
        _finite("k", self.k1, self.k2, self.k3, self.k4)
        if not self.k1 > 0:
            raise ValidationError("k1 > 0 (d(theta) must increase from theta = 0)")

    @property
    def theta_poly(self) -> np.ndarray:
        return np.array([0, self.k1, self.k2, self.k3, self.k4], dtype=np.float64)

    @cached_property
    def theta_max(self) -> float:
        return numeric.first_nonincreasing(self.theta_poly, 0.0, np.pi)


@dataclass(frozen=True)
class OccParams(_Params):
    """OCamCalib parameters.

    ``a`` holds the unprojection polynomial in the sensor radius (a0..a4) and
    ``k`` the forward polynomial in the elevation angle atan(z/r) (k0..kp).
    The canonical vector is (cx, cy, a0..a4); the affine entries and the
    forward polynomial are not part of it.
    """

    cx: float
    cy: float
    a: tuple[float, ...]
    k: tuple[float, ...]
    c: float = 1.0
    d: float = 0.0
    e: float = 0.0

    KIND: ClassVar[str] = "occ"
    VECTOR_FIELDS: ClassVar[tuple[str, ...]] = ("cx", "cy", "a0", "a1", "a2", "a3", "a4")

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "k", tuple(float(v) for v in self.k))
        _finite("principal point", self.cx, self.cy)
        _finite("affine", self.c, self.d, self.e)
        _finite("a", *self.a)
        _finite("k", *self.k)
        if len(self.a) != 5:
            raise ValidationError("a must have exactly 5 coefficients")
        if not 2 <= len(self.k) <= 16:
            raise ValidationError("k must have between 2 and 16 coefficients")
        if self.c - self.d * self.e == 0.0:
            raise ValidationError("affine determinant c - d*e must be nonzero")

    def to_vector(self) -> np.ndarray:
        return np.array([self.cx, self.cy, *self.a], dtype=np.float64)

    @property
    def order(self) -> int:
        return len(self.k) - 1


@dataclass(frozen=True)
class RtParams(_Params):
    fx: float
    fy: float
    cx: float
    cy: float
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    p1: float = 0.0
    p2: float = 0.0

    KIND: ClassVar[str] = "rt"
    VECTOR_FIELDS: ClassVar[tuple[str, ...]] = ("fx", "fy", "cx", "cy", "k1", "k2", "k3", "p1", "p2")

    def __post_init__(self):
        _check_focal(self.fx, self.fy, self.cx, self.cy)
        _finite("distortion", self.k1, self.k2, self.k3, self.p1, self.p2)


Params = Union[UcmParams, EucmParams, DsParams, KbParams, OccParams, RtParams, WoodscapeParams]

PARAM_TYPES: dict[str, type] = {
    cls.KIND: cls
    for cls in (UcmParams, EucmParams, DsParams, KbParams, OccParams, RtParams, WoodscapeParams)
}


@dataclass(frozen=True)
class CameraModel:
    """A parameter record plus the image size it was calibrated for."""

    params: Params
    image_size: ImageSize

    def __post_init__(self):
        if type(self.params) not in PARAM_TYPES.values():
            raise ValidationError(f"unsupported parameter record {type(self.params).__name__}")
        if not isinstance(self.image_size, ImageSize):
            object.__setattr__(self, "image_size", ImageSize(*self.image_size))

    @property
    def kind(self) -> str:
        return self.params.KIND

    @property
    def width(self) -> int:
        return self.image_size.width

    @property
    def height(self) -> int:
        return self.image_size.height


def ucm_from_legacy(gamma_x: float, gamma_y: float, cx: float, cy: float, xi_legacy: float) -> UcmParams:
    """Convert the (gamma, xi) UCM parameterization to (f, alpha).

    Uses xi = alpha / (1 - alpha) and gamma = f / (1 - alpha).
    """
    if not (gamma_x > 0 and gamma_y > 0):
        raise ValidationError("gamma_x > 0 and gamma_y > 0")
    if not xi_legacy >= 0:
        raise ValidationError("legacy xi >= 0")
    alpha = xi_legacy / (1.0 + xi_legacy)
    return UcmParams(gamma_x * (1.0 - alpha), gamma_y * (1.0 - alpha), cx, cy, alpha)


# ---------------------------------------------------------------------------
# per-family kernels: X is (..., 3), uv is (..., 2)
# project kernels return (uv, in_domain); unproject kernels return
# (bearing, in_domain, converged)
# ---------------------------------------------------------------------------


def _split(X):
    return X[..., 0], X[..., 1], X[..., 2]


def _pixels(p, mx, my):
    return np.stack([p.fx * mx + p.cx, p.fy * my + p.cy], axis=-1)


def _normalized(p, uv):
    return (uv[..., 0] - p.cx) / p.fx, (uv[..., 1] - p.cy) / p.fy


def _unit(mx, my, mz):
    b = np.stack([mx, my, mz], axis=-1)
    return b / np.linalg.norm(b, axis=-1, keepdims=True)


def ucm_w(alpha: float) -> float:
    if alpha <= 0.5:
        return alpha / (1.0 - alpha)
    return (1.0 - alpha) / alpha


def _project_ucm(p: UcmParams, X):
    x, y, z = _split(X)
    a = p.alpha
    d = np.sqrt((x * x + y * y) + z * z)
    ok = z > -ucm_w(a) * d
    den = a * d + (1.0 - a) * z
    with np.errstate(divide="ignore", invalid="ignore"):
        return _pixels(p, x / den, y / den), ok


def _unproject_ucm(p: UcmParams, uv):
    a = p.alpha
    mx, my = _normalized(p, uv)
    with np.errstate(divide="ignore", invalid="ignore"):
        if a > _UCM_ALPHA_SWITCH:
            # same ray written without xi = a/(1-a), which blows up as a -> 1
            r2 = mx * mx + my * my
            ok = r2 <= 1.0 / (2.0 * a - 1.0)
            mz = (1.0 - a * a * r2) / (a * np.sqrt(1.0 - (2.0 * a - 1.0) * r2) + 1.0 - a)
            b = _unit(mx, my, mz)
        else:
            mx, my = mx * (1.0 - a), my * (1.0 - a)
            xi = a / (1.0 - a)
            r2 = mx * mx + my * my
            ok = np.ones(r2.shape, dtype=bool) if a <= 0.5 else r2 <= (1.0 - a) ** 2 / (2.0 * a - 1.0)
            s = (xi + np.sqrt(1.0 + (1.0 - xi * xi) * r2)) / (1.0 + r2)
            b = _unit(s * mx, s * my, s - xi)
    return b, ok, np.ones(ok.shape, dtype=bool)


def _project_eucm(p: EucmParams, X):
    x, y, z = _split(X)
    a, beta = p.alpha, p.beta
    d = np.sqrt(beta * (x * x + y * y) + z * z)
    den = a * d + (1.0 - a) * z
    if a <= 0.5:
        # the textbook domain is all of R^3 here; rays behind the denominator's
        # zero would project mirrored, so they are excluded
        ok = den > 0
    else:
        ok = z >= (a - 1.0) * den / (2.0 * a - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _pixels(p, x / den, y / den), ok


def _unproject_eucm(p: EucmParams, uv):
    a, beta = p.alpha, p.beta
    mx, my = _normalized(p, uv)
    r2 = mx * mx + my * my
    ok = np.ones(r2.shape, dtype=bool) if a <= 0.5 else r2 <= 1.0 / (beta * (2.0 * a - 1.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        mz = (1.0 - beta * a * a * r2) / (a * np.sqrt(1.0 - (2.0 * a - 1.0) * beta * r2) + (1.0 - a))
        b = _unit(mx, my, mz)
    return b, ok, np.ones(ok.shape, dtype=bool)


def ds_w2(alpha: float, xi: float) -> float:
    w1 = ucm_w(alpha)
    return (w1 + xi) / np.sqrt(2.0 * w1 * xi + xi * xi + 1.0)


def _project_ds(p: DsParams, X):
    x, y, z = _split(X)
    a, xi = p.alpha, p.xi
    d1 = np.sqrt((x * x + y * y) + z * z)
    ok = z > -ds_w2(a, xi) * d1
    k = xi * d1 + z
    d2 = np.sqrt((x * x + y * y) + k * k)
    den = a * d2 + (1.0 - a) * k
    with np.errstate(divide="ignore", invalid="ignore"):
        return _pixels(p, x / den, y / den), ok


def _unproject_ds(p: DsParams, uv):
    a, xi = p.alpha, p.xi
    mx, my = _normalized(p, uv)
    r2 = mx * mx + my * my
    ok = np.ones(r2.shape, dtype=bool) if a <= 0.5 else r2 <= 1.0 / (2.0 * a - 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mz = (1.0 - a * a * r2) / (a * np.sqrt(1.0 - (2.0 * a - 1.0) * r2) + 1.0 - a)
        rad = mz * mz + (1.0 - xi * xi) * r2
        ok &= rad >= 0
        s = (mz * xi + np.sqrt(rad)) / (mz * mz + r2)
        b = _unit(s * mx, s * my, s * mz - xi)
    return b, ok, np.ones(ok.shape, dtype=bool)


def _project_radial_poly(p, X):
    """KB and WoodScape share everything except d(theta)."""
    x, y, z = _split(X)
    r = np.hypot(x, y)
    theta = np.arctan2(r, z)
    dist = numeric.poly_eval(p.theta_poly, theta)
    ok = (r > 0) | (z != 0)
    # d(pi) is not zero, so the cut must be relative to |X| (see occ_forward)
    on_axis = r <= AXIS_EPS * np.sqrt(r * r + z * z)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(on_axis, 0.0, dist / r)
    return _pixels(p, scale * x, scale * y), ok


def _unproject_radial_poly(p, uv, opts: numeric.NewtonOptions = numeric.DEFAULT_NEWTON):
    mx, my = _normalized(p, uv)
    ru = np.hypot(mx, my)
    poly = p.theta_poly
    dpoly = np.polynomial.polynomial.polyder(poly)
    t_max = p.theta_max
    ok = ru <= numeric.poly_eval(poly, t_max)
    target = np.where(ok, ru, 0.0)
    theta0 = np.clip(target / poly[1], 0.0, t_max)
    theta, conv = numeric._newton_scalar(
        lambda t: numeric.poly_eval(poly, t) - target,
        lambda t: numeric.poly_eval(dpoly, t),
        theta0,
        opts.tol,
        opts.max_iters,
        0.0,
        t_max,
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        sx = np.where(ru > AXIS_EPS, mx / ru, 0.0)
        sy = np.where(ru > AXIS_EPS, my / ru, 0.0)
    st = np.sin(theta)
    b = np.stack([st * sx, st * sy, np.cos(theta)], axis=-1)
    return b, ok, conv


def occ_forward(p: OccParams, X):
    """Sensor-plane coordinates (before affine and offset) from the forward polynomial."""
    x, y, z = _split(X)
    r = np.hypot(x, y)
    theta = np.arctan2(z, r)
    rho = numeric.poly_eval(p.k, theta)
    # a fitted k need not vanish at theta = pi/2, so the on-axis cut is taken
    # relative to |X| to keep projection invariant to scaling the point
    on_axis = r <= AXIS_EPS * np.sqrt(r * r + z * z)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        scale = np.where(on_axis, 0.0, rho / r)
    return scale * x, scale * y


def _project_occ(p: OccParams, X):
    x, y, z = _split(X)
    mx, my = occ_forward(p, X)
    uv = np.stack([p.c * mx + p.d * my + p.cx, p.e * mx + my + p.cy], axis=-1)
    return uv, (x != 0) | (y != 0) | (z != 0)


def occ_sensor(p: OccParams, uv):
    """Undo the principal point and affine misalignment."""
    du, dv = uv[..., 0] - p.cx, uv[..., 1] - p.cy
    det = p.c - p.d * p.e
    return (du - p.d * dv) / det, (-p.e * du + p.c * dv) / det


def _unproject_occ(p: OccParams, uv):
    mx, my = occ_sensor(p, uv)
    ru = np.hypot(mx, my)
    mz = numeric.poly_eval(p.a, ru)
    with np.errstate(invalid="ignore", divide="ignore"):
        b = _unit(mx, my, mz)
    ok = np.all(np.isfinite(b), axis=-1)
    # OCC defines no validity set of its own: accept pixels whose ray reprojects within 1 px
    back, _ = _project_occ(p, np.where(ok[..., None], b, 1.0))
    ok &= np.linalg.norm(back - uv, axis=-1) < OCC_CONSISTENCY_PX
    return b, ok, np.ones(ok.shape, dtype=bool)


def rt_distort(p: RtParams, xp, yp):
    r2 = xp * xp + yp * yp
    radial = 1.0 + r2 * (p.k1 + r2 * (p.k2 + r2 * p.k3))
    xpp = radial * xp + 2.0 * p.p1 * xp * yp + p.p2 * (r2 + 2.0 * xp * xp)
    ypp = radial * yp + 2.0 * p.p2 * xp * yp + p.p1 * (r2 + 2.0 * yp * yp)
    return xpp, ypp


def rt_distort_jacobian(p: RtParams, xp, yp):
    """d(x'', y'') / d(x', y') as a (..., 2, 2) array."""
    r2 = xp * xp + yp * yp
    radial = 1.0 + r2 * (p.k1 + r2 * (p.k2 + r2 * p.k3))
    dk = p.k1 + 2.0 * r2 * p.k2 + 3.0 * r2 * r2 * p.k3
    j11 = radial + 2.0 * xp * xp * dk + 2.0 * p.p1 * yp + 6.0 * p.p2 * xp
    j12 = 2.0 * xp * yp * dk + 2.0 * p.p1 * xp + 2.0 * p.p2 * yp
    j21 = 2.0 * xp * yp * dk + 2.0 * p.p2 * yp + 2.0 * p.p1 * xp
    j22 = radial + 2.0 * yp * yp * dk + 2.0 * p.p2 * xp + 6.0 * p.p1 * yp
    return np.stack([np.stack([j11, j12], -1), np.stack([j21, j22], -1)], -2)


def _project_rt(p: RtParams, X):
    x, y, z = _split(X)
    ok = z > 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        xpp, ypp = rt_distort(p, x / z, y / z)
    return _pixels(p, xpp, ypp), ok


def _unproject_rt(p: RtParams, uv, opts: numeric.NewtonOptions = numeric.DEFAULT_NEWTON):
    xpp, ypp = _normalized(p, uv)
    target = np.stack([xpp, ypp], axis=-1)

    def F(q):
        dx, dy = rt_distort(p, q[..., 0], q[..., 1])
        return np.stack([dx, dy], axis=-1) - target

    def J(q):
        return rt_distort_jacobian(p, q[..., 0], q[..., 1])

    q, conv, _ = numeric._newton_2d(F, J, target, opts.tol, opts.max_iters)
    # roots past the fold of the radial polynomial reproduce the pixel from a
    # mirrored or reversed ray; keep the orientation-preserving branch that
    # points the same way as the distorted coordinates
    ok = (np.linalg.det(J(q)) > 0.0) & (np.sum(q * target, axis=-1) >= 0.0)
    b = _unit(q[..., 0], q[..., 1], np.ones(q.shape[:-1]))
    return b, ok, conv


_PROJECT = {
    "ucm": _project_ucm,
    "eucm": _project_eucm,
    "ds": _project_ds,
    "kb": _project_radial_poly,
    "woodscape": _project_radial_poly,
    "occ": _project_occ,
    "rt": _project_rt,
}

_UNPROJECT = {
    "ucm": _unproject_ucm,
    "eucm": _unproject_eucm,
    "ds": _unproject_ds,
    "kb": _unproject_radial_poly,
    "woodscape": _unproject_radial_poly,
    "occ": _unproject_occ,
    "rt": _unproject_rt,
}

# families whose unprojection is an iterative solve
NEWTON_KINDS = frozenset({"kb", "woodscape", "rt"})


def _params(model) -> Params:
    return model.params if isinstance(model, CameraModel) else model


def _as_points(a, width: int, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.shape[-1] != width:
        raise ValueError(f"{name} must have shape (..., {width}), got {a.shape}")
    return a


def project_many(model, points) -> tuple[np.ndarray, np.ndarray]:
    """Project ``(..., 3)`` points; returns ``(pixels, valid)`` with NaN where invalid."""
    p = _params(model)
    X = _as_points(points, 3, "points")
    uv, ok = _PROJECT[p.KIND](p, X)
    ok = ok & np.all(np.isfinite(X), axis=-1) & np.all(np.isfinite(uv), axis=-1)
    return np.where(ok[..., None], uv, np.nan), ok


def unproject_many(model, pixels) -> tuple[np.ndarray, np.ndarray]:
    """Unproject ``(..., 2)`` pixels to unit bearings; returns ``(bearings, valid)``."""
    p = _params(model)
    uv = _as_points(pixels, 2, "pixels")
    b, ok, conv = _UNPROJECT[p.KIND](p, uv)
    ok = ok & conv & np.all(np.isfinite(uv), axis=-1) & np.all(np.isfinite(b), axis=-1)
    return np.where(ok[..., None], b, np.nan), ok


def project(model, point) -> np.ndarray:
    """Project one 3-D point to a pixel.

    Raises:
        NonFinite: for NaN/Inf input.
        OutOfDomain: when the point is outside the model's projection domain.
    """
    X = _as_points(point, 3, "point")
    if X.shape != (3,):
        raise ValueError("project takes a single 3-vector; use project_many for batches")
    if not np.all(np.isfinite(X)):
        raise NonFinite("point has non-finite coordinates")
    uv, ok = project_many(model, X)
    if not ok:
        raise OutOfDomain(f"{X} is outside the {_params(model).KIND} projection domain")
    return uv


def unproject(model, pixel) -> np.ndarray:
    """Unproject one pixel to a unit bearing.

    Raises:
        NonFinite: for NaN/Inf input.
        OutOfDomain: when the pixel is outside the unprojection domain.
        NoConvergence: when the Newton inversion (KB, WoodScape, RT) fails.
    """
    uv = _as_points(pixel, 2, "pixel")
    if uv.shape != (2,):
        raise ValueError("unproject takes a single 2-vector; use unproject_many for batches")
    if not np.all(np.isfinite(uv)):
        raise NonFinite("pixel has non-finite coordinates")
    p = _params(model)
    b, ok, conv = _UNPROJECT[p.KIND](p, uv)
    if not ok:
        raise OutOfDomain(f"{uv} is outside the {p.KIND} unprojection domain")
    if not conv:
        raise NoConvergence(f"Newton inversion failed at pixel {uv}")
    return b


def in_projection_domain(model, point):
    """Membership in the projection domain; scalar bool or bool array."""
    _, ok = project_many(model, point)
    return bool(ok) if np.ndim(ok) == 0 else ok


def in_unprojection_domain(model, pixel):
    """Membership in the unprojection domain; scalar bool or bool array.

    For RT the domain is the set of pixels whose Newton undistortion converges.
    """
    _, ok = unproject_many(model, pixel)
    return bool(ok) if np.ndim(ok) == 0 else ok
