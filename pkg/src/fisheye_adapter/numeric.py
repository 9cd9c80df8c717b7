"""Small numerical kernels: linear least squares, Newton-Raphson, polynomials.

All Newton solvers work elementwise on arrays so the camera models can invert
thousands of pixels in one call. The public ``newton_*`` functions raise when
any element fails; the underscore variants return a success mask instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import NoConvergence, NonFinite, RankDeficient, SingularJacobian

DET_EPS = 1e-14


@dataclass(frozen=True)
class NewtonOptions:
    tol: float = 1e-12
    max_iters: int = 100

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


DEFAULT_NEWTON = NewtonOptions()


def solve_lsq(A, b) -> np.ndarray:
    """Minimize ``||A x - b||`` through an SVD of the column-equilibrated matrix.

    Raises:
        RankDeficient: if the numerical rank of ``A`` is below its column count.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if A.ndim != 2 or b.ndim != 1 or A.shape[0] != b.shape[0]:
        raise ValueError(f"incompatible shapes {A.shape} and {b.shape}")
    m, n = A.shape
    if m < n or n < 1:
        raise RankDeficient(f"need at least as many rows as unknowns, got {m}x{n}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise NonFinite("least-squares system has non-finite entries")

    # equilibrate columns; KB-style Vandermonde columns span many decades
    scale = np.linalg.norm(A, axis=0)
    if np.any(scale == 0.0):
        raise RankDeficient("design matrix has an all-zero column")
    x, _, rank, _ = np.linalg.lstsq(A / scale, b, rcond=None)
    if rank < n:
        raise RankDeficient(f"numerical rank {rank} < {n} unknowns")
    return x / scale


def _newton_scalar(f, fprime, x0, tol, max_iters, lo=None, hi=None):
    x = np.array(x0, dtype=np.float64, copy=True)
    fx = f(x)
    done = np.abs(fx) < tol
    grow = np.zeros(x.shape, dtype=np.int64)
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(max_iters):
            if np.all(done):
                break
            step = fx / fprime(x)
            x_new = x - np.where(done, 0.0, step)
            if lo is not None or hi is not None:
                x_new = np.clip(x_new, lo, hi)
            f_new = f(x_new)

            # divergence guard: two consecutive residual increases -> bisect back
            grow = np.where(np.abs(f_new) > np.abs(fx), grow + 1, 0)
            bisect = (grow >= 2) & ~done
            if np.any(bisect):
                x_new = np.where(bisect, 0.5 * (x_new + x), x_new)
                f_new = f(x_new)
                grow = np.where(bisect, 0, grow)

            ok = np.isfinite(x_new) & np.isfinite(f_new)
            x = np.where(done | ~ok, x, x_new)
            fx = np.where(done | ~ok, fx, f_new)
            done = done | (np.abs(fx) < tol)
    return x, done & np.isfinite(x)


def newton_scalar(
    f: Callable,
    fprime: Callable,
    x0,
    opts: NewtonOptions = DEFAULT_NEWTON,
    lo: float | None = None,
    hi: float | None = None,
):
    """Solve ``f(x) = 0`` elementwise, iterates optionally clamped to ``[lo, hi]``.

    Returns a float for scalar ``x0`` and an array otherwise.

    Raises:
        NoConvergence: if any element misses ``|f| < opts.tol`` within the budget.
    """
    root, ok = _newton_scalar(f, fprime, x0, opts.tol, opts.max_iters, lo, hi)
    if not np.all(ok):
        raise NoConvergence(
            f"{int(np.size(ok) - np.count_nonzero(ok))} element(s) did not converge "
            f"in {opts.max_iters} iterations"
        )
    return float(root) if root.ndim == 0 else root


def _solve2x2(J, r):
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        dx = (J[..., 1, 1] * r[..., 0] - J[..., 0, 1] * r[..., 1]) / det
        dy = (J[..., 0, 0] * r[..., 1] - J[..., 1, 0] * r[..., 0]) / det
    return np.stack([dx, dy], axis=-1), det


def _newton_2d(F, J, x0, tol, max_iters):
    """Vectorized 2-D Newton. Returns (root, converged, singular) arrays."""
    x = np.array(x0, dtype=np.float64, copy=True)
    fx = F(x)
    norm = np.max(np.abs(fx), axis=-1)
    done = norm < tol
    singular = np.zeros(norm.shape, dtype=bool)
    grow = np.zeros(norm.shape, dtype=np.int64)
    for _ in range(max_iters):
        active = ~done & ~singular
        if not np.any(active):
            break
        step, det = _solve2x2(J(x), fx)
        singular |= active & ~(np.abs(det) >= DET_EPS)
        active &= ~singular
        x_new = np.where(active[..., None], x - step, x)
        f_new = F(x_new)
        n_new = np.max(np.abs(f_new), axis=-1)

        grow = np.where(n_new > norm, grow + 1, 0)
        bisect = (grow >= 2) & active
        if np.any(bisect):
            x_new = np.where(bisect[..., None], 0.5 * (x_new + x), x_new)
            f_new = F(x_new)
            n_new = np.max(np.abs(f_new), axis=-1)
            grow = np.where(bisect, 0, grow)

        ok = active & np.isfinite(n_new)
        x = np.where(ok[..., None], x_new, x)
        fx = np.where(ok[..., None], f_new, fx)
        norm = np.where(ok, n_new, norm)
        done |= norm < tol
    return x, done, singular


def newton_2d(F: Callable, J: Callable, x0, opts: NewtonOptions = DEFAULT_NEWTON) -> np.ndarray:
    """Solve ``F(x) = 0`` for 2-vectors; ``x0`` may be ``(2,)`` or ``(..., 2)``.

    ``F`` maps ``(..., 2) -> (..., 2)`` and ``J`` maps ``(..., 2) -> (..., 2, 2)``
    with ``J[..., i, j] = dF_i / dx_j``.

    Raises:
        SingularJacobian: when ``|det J| < 1e-14`` at an iterate.
        NoConvergence: when ``max |F| >= opts.tol`` after ``opts.max_iters``.
    """
    root, ok, singular = _newton_2d(F, J, x0, opts.tol, opts.max_iters)
    if np.any(singular):
        raise SingularJacobian("Jacobian determinant below 1e-14")
    if not np.all(ok):
        raise NoConvergence(f"2-D Newton did not converge in {opts.max_iters} iterations")
    return root


def poly_eval(coeffs, x):
    """Evaluate ``sum(coeffs[i] * x**i)`` (ascending order) by Horner's rule."""
    return npoly.polyval(x, np.asarray(coeffs, dtype=np.float64))


def poly_monotone_on(coeffs, lo: float, hi: float, n: int = 1000) -> bool:
    """True when the polynomial's derivative is strictly positive on ``[lo, hi]``.

    Checked by sampling ``n`` interior points plus both endpoints.
    """
    deriv = npoly.polyder(np.asarray(coeffs, dtype=np.float64))
    xs = np.concatenate(([lo], np.linspace(lo, hi, n), [hi]))
    return bool(np.all(npoly.polyval(xs, deriv) > 0.0))


def first_nonincreasing(coeffs, lo: float, hi: float, n: int = 1000) -> float:
    """Largest sampled ``t`` in ``[lo, hi]`` such that the polynomial increases on ``[lo, t]``."""
    deriv = npoly.polyder(np.asarray(coeffs, dtype=np.float64))
    xs = np.linspace(lo, hi, n + 1)
    bad = np.flatnonzero(npoly.polyval(xs, deriv) <= 0.0)
    if bad.size == 0:
        return float(hi)
    if bad[0] == 0:
        return float(lo)
    return float(xs[bad[0] - 1])
