"""Residuals and analytic Jacobians of each output family, vectorized over samples.

UCM, EUCM and DS use the denominator-cleared residual
``f * x - (u - c) * den`` rather than the pixel error; OCC uses
``z (u - c) - m_z (x, y)`` from its unprojection polynomial; KB, WoodScape and RT use the plain pixel
error ``project(bearing) - u``. Every provider works on the canonical
parameter vector of its family (``Params.to_vector``).
"""

from __future__ import annotations

import numpy as np

from .models import (
    AXIS_EPS,
    DsParams,
    EucmParams,
    KbParams,
    OccParams,
    RtParams,
    UcmParams,
    WoodscapeParams,
    ds_w2,
    ucm_w,
)

# RT cannot see rays at or behind the image plane
RT_Z_EPS = 1e-9
_MIN_FOCAL = 1e-6
_MIN_BETA = 1e-9


class Provider:
    """Residual/Jacobian contract consumed by :func:`lm.minimize`.

    ``residuals`` returns ``(N, 2)``, ``jacobian`` returns ``(N, 2, dim)`` and
    ``valid`` an ``(N,)`` mask of samples inside the family's projection domain
    at the given parameters.
    """

    kind: str
    params_type: type
    dim: int

    def residuals(self, x: np.ndarray, pixels: np.ndarray, bearings: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, x: np.ndarray, pixels: np.ndarray, bearings: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def valid(self, x: np.ndarray, pixels: np.ndarray, bearings: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def clip(self, x: np.ndarray) -> np.ndarray:
        x = np.array(x, dtype=np.float64)
        x[0] = max(x[0], _MIN_FOCAL)
        x[1] = max(x[1], _MIN_FOCAL)
        return x

    def to_params(self, x: np.ndarray):
        return self.params_type(*(float(v) for v in x))


# ---------------------------------------------------------------------------
# unified family
# ---------------------------------------------------------------------------


def _denominator_residual(x, pixels, bearings, den):
    uc = pixels - x[2:4]
    return x[0:2] * bearings[:, :2] - uc * den[:, None], uc


def _intrinsic_block(J, bearings, den):
    J[:, 0, 0] = bearings[:, 0]
    J[:, 1, 1] = bearings[:, 1]
    J[:, 0, 2] = den
    J[:, 1, 3] = den


class UcmProvider(Provider):
    kind = "ucm"
    params_type = UcmParams
    dim = 5

    @staticmethod
    def _terms(x, bearings):
        X, Y, Z = bearings.T
        a = x[4]
        d = np.sqrt((X * X + Y * Y) + Z * Z)
        return a, d, Z, a * d + (1.0 - a) * Z

    def residuals(self, x, pixels, bearings):
        *_, den = self._terms(x, bearings)
        return _denominator_residual(x, pixels, bearings, den)[0]

    def jacobian(self, x, pixels, bearings):
        a, d, z, den = self._terms(x, bearings)
        uc = pixels - x[2:4]
        J = np.zeros((len(pixels), 2, self.dim))
        _intrinsic_block(J, bearings, den)
        J[:, :, 4] = (z - d)[:, None] * uc
        return J

    def valid(self, x, pixels, bearings):
        a, d, z, _ = self._terms(x, bearings)
        return z > -ucm_w(a) * d

    def clip(self, x):
        x = super().clip(x)
        x[4] = min(max(x[4], 0.0), 1.0)
        return x


class EucmProvider(UcmProvider):
    kind = "eucm"
    params_type = EucmParams
    dim = 6

    @staticmethod
    def _terms(x, bearings):
        X, Y, Z = bearings.T
        a, beta = x[4], x[5]
        rho2 = X * X + Y * Y
        d = np.sqrt(beta * rho2 + Z * Z)
        return a, d, Z, a * d + (1.0 - a) * Z, rho2

    def residuals(self, x, pixels, bearings):
        _, _, _, den, _ = self._terms(x, bearings)
        return _denominator_residual(x, pixels, bearings, den)[0]

    def jacobian(self, x, pixels, bearings):
        a, d, z, den, rho2 = self._terms(x, bearings)
        uc = pixels - x[2:4]
        J = np.zeros((len(pixels), 2, self.dim))
        _intrinsic_block(J, bearings, den)
        J[:, :, 4] = (z - d)[:, None] * uc
        J[:, :, 5] = -(a * rho2 / (2.0 * d))[:, None] * uc
        return J

    def valid(self, x, pixels, bearings):
        a, d, z, den, _ = self._terms(x, bearings)
        if a <= 0.5:
            return den > 0
        return z >= (a - 1.0) * den / (2.0 * a - 1.0)

    def clip(self, x):
        x = super().clip(x)
        x[5] = max(x[5], _MIN_BETA)
        return x


class DsProvider(UcmProvider):
    kind = "ds"
    params_type = DsParams
    dim = 6

    @staticmethod
    def _terms(x, bearings):
        X, Y, Z = bearings.T
        a, xi = x[4], x[5]
        rho2 = X * X + Y * Y
        d1 = np.sqrt(rho2 + Z * Z)
        k = xi * d1 + Z
        d2 = np.sqrt(rho2 + k * k)
        return a, xi, d1, d2, k, a * d2 + (1.0 - a) * k

    def residuals(self, x, pixels, bearings):
        den = self._terms(x, bearings)[-1]
        return _denominator_residual(x, pixels, bearings, den)[0]

    def jacobian(self, x, pixels, bearings):
        a, xi, d1, d2, k, den = self._terms(x, bearings)
        uc = pixels - x[2:4]
        J = np.zeros((len(pixels), 2, self.dim))
        _intrinsic_block(J, bearings, den)
        J[:, :, 4] = (k - d2)[:, None] * uc
        J[:, :, 5] = -(a * d1 * k / d2 + (1.0 - a) * d1)[:, None] * uc
        return J

    def valid(self, x, pixels, bearings):
        a, xi, d1, *_ = self._terms(x, bearings)
        return bearings[:, 2] > -ds_w2(a, xi) * d1


# ---------------------------------------------------------------------------
# angle-polynomial family (pixel residual)
# ---------------------------------------------------------------------------


class KbProvider(Provider):
    kind = "kb"
    params_type = KbParams
    dim = 8
    powers = (3, 5, 7, 9)

    def _dist(self, x, theta):
        return theta + sum(k * theta**n for k, n in zip(x[4:8], self.powers))

    def _terms(self, x, bearings):
        X, Y, Z = bearings.T
        r = np.hypot(X, Y)
        theta = np.arctan2(r, Z)
        with np.errstate(divide="ignore", invalid="ignore"):
            dirs = np.where(r[:, None] > AXIS_EPS, bearings[:, :2] / r[:, None], 0.0)
        return theta, dirs

    def residuals(self, x, pixels, bearings):
        theta, dirs = self._terms(x, bearings)
        return x[0:2] * self._dist(x, theta)[:, None] * dirs + x[2:4] - pixels

    def jacobian(self, x, pixels, bearings):
        theta, dirs = self._terms(x, bearings)
        J = np.zeros((len(pixels), 2, self.dim))
        dd = self._dist(x, theta)[:, None] * dirs
        J[:, 0, 0] = dd[:, 0]
        J[:, 1, 1] = dd[:, 1]
        J[:, 0, 2] = 1.0
        J[:, 1, 3] = 1.0
        fdir = x[0:2] * dirs
        for i, n in enumerate(self.powers):
            J[:, :, 4 + i] = fdir * (theta**n)[:, None]
        return J

    def valid(self, x, pixels, bearings):
        r = np.hypot(bearings[:, 0], bearings[:, 1])
        return (r > AXIS_EPS) | (bearings[:, 2] > 0)


class WoodscapeProvider(KbProvider):
    kind = "woodscape"
    params_type = WoodscapeParams
    powers = (1, 2, 3, 4)

    def _dist(self, x, theta):
        return sum(k * theta**n for k, n in zip(x[4:8], self.powers))

    def clip(self, x):
        x = super().clip(x)
        x[4] = max(x[4], _MIN_FOCAL)
        return x


# ---------------------------------------------------------------------------
# radial-tangential
# ---------------------------------------------------------------------------


class RtProvider(Provider):
    kind = "rt"
    params_type = RtParams
    dim = 9

    @staticmethod
    def _terms(x, bearings):
        with np.errstate(divide="ignore", invalid="ignore"):
            xp = bearings[:, 0] / bearings[:, 2]
            yp = bearings[:, 1] / bearings[:, 2]
        k1, k2, k3, p1, p2 = x[4:9]
        r2 = xp * xp + yp * yp
        radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3))
        xpp = radial * xp + 2.0 * p1 * xp * yp + p2 * (r2 + 2.0 * xp * xp)
        ypp = radial * yp + 2.0 * p2 * xp * yp + p1 * (r2 + 2.0 * yp * yp)
        return xp, yp, r2, xpp, ypp

    def residuals(self, x, pixels, bearings):
        _, _, _, xpp, ypp = self._terms(x, bearings)
        return x[0:2] * np.stack([xpp, ypp], axis=1) + x[2:4] - pixels

    def jacobian(self, x, pixels, bearings):
        xp, yp, r2, xpp, ypp = self._terms(x, bearings)
        fx, fy = x[0], x[1]
        J = np.zeros((len(pixels), 2, self.dim))
        J[:, 0, 0] = xpp
        J[:, 1, 1] = ypp
        J[:, 0, 2] = 1.0
        J[:, 1, 3] = 1.0
        for i, rn in enumerate((r2, r2 * r2, r2 * r2 * r2)):
            J[:, 0, 4 + i] = fx * xp * rn
            J[:, 1, 4 + i] = fy * yp * rn
        J[:, 0, 7] = fx * 2.0 * xp * yp
        J[:, 1, 7] = fy * (r2 + 2.0 * yp * yp)
        J[:, 0, 8] = fx * (r2 + 2.0 * xp * xp)
        J[:, 1, 8] = fy * 2.0 * xp * yp
        return J

    def valid(self, x, pixels, bearings):
        return bearings[:, 2] > RT_Z_EPS


# ---------------------------------------------------------------------------
# OCamCalib (unprojection-side residual, affine part fixed to identity)
# ---------------------------------------------------------------------------


class OccProvider(Provider):
    """Parameters (cx, cy, a0..a4); the forward polynomial is fitted afterwards."""

    kind = "occ"
    params_type = OccParams
    dim = 7

    # The residual is z (u - c) - m_z (x, y): the unprojection condition with
    # the division by z cleared. Dividing by z instead weights each sample by
    # (x / z)^2, which is unbounded for rays near 90 degrees and makes the fit
    # depend on how close the grid happens to land to that ring.

    @staticmethod
    def _terms(x, pixels, bearings):
        uc = pixels - x[0:2]
        ru = np.hypot(uc[:, 0], uc[:, 1])
        powers = ru[:, None] ** np.arange(5)[None, :]
        mz = powers @ x[2:7]
        return uc, ru, powers, mz

    def residuals(self, x, pixels, bearings):
        uc, _, _, mz = self._terms(x, pixels, bearings)
        return bearings[:, 2:3] * uc - mz[:, None] * bearings[:, :2]

    def jacobian(self, x, pixels, bearings):
        uc, ru, powers, _ = self._terms(x, pixels, bearings)
        a = x[2:7]
        z, xy = bearings[:, 2], bearings[:, :2]
        dmz = a[1] + ru * (2.0 * a[2] + ru * (3.0 * a[3] + ru * 4.0 * a[4]))
        with np.errstate(divide="ignore", invalid="ignore"):
            # d r_u / d c = -(u - c) / r_u, undefined on the axis
            dru = np.where(ru[:, None] > AXIS_EPS, -uc / ru[:, None], 0.0)
        J = np.zeros((len(pixels), 2, self.dim))
        zero = np.zeros_like(z)
        J[:, :, 0] = -np.stack([z, zero], axis=1) - xy * (dmz * dru[:, 0])[:, None]
        J[:, :, 1] = -np.stack([zero, z], axis=1) - xy * (dmz * dru[:, 1])[:, None]
        J[:, :, 2:7] = -xy[:, :, None] * powers[:, None, :]
        return J

    def valid(self, x, pixels, bearings):
        return np.all(np.isfinite(bearings), axis=1)

    def clip(self, x):
        return np.array(x, dtype=np.float64)

    def to_params(self, x, k=(0.0, 0.0)):
        return OccParams(float(x[0]), float(x[1]), tuple(float(v) for v in x[2:7]), tuple(k))


PROVIDERS: dict[str, Provider] = {
    p.kind: p
    for p in (
        UcmProvider(),
        EucmProvider(),
        DsProvider(),
        KbProvider(),
        WoodscapeProvider(),
        RtProvider(),
        OccProvider(),
    )
}
