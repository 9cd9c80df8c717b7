"""Levenberg-Marquardt with Marquardt (diagonal) damping and box projection."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import AllSamplesInvalid, NumericalFailure
from .providers import Provider

logger = logging.getLogger(__name__)


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    STALLED = "stalled"


@dataclass(frozen=True)
class LmOptions:
    max_iters: int = 100
    cost_tol: float = 1e-12
    step_tol: float = 1e-12
    grad_tol: float = 1e-6
    lambda0: float = 1e-4
    lambda_up: float = 10.0
    lambda_down: float = 0.1
    lambda_max: float = 1e10

    def __post_init__(self):
        for name in ("max_iters", "cost_tol", "step_tol", "grad_tol", "lambda0", "lambda_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.lambda_up > 1.0 > self.lambda_down > 0.0:
            raise ValueError("need lambda_up > 1 > lambda_down > 0")


@dataclass
class LmOutcome:
    params: np.ndarray
    final_cost: float
    initial_cost: float
    iterations: int
    status: Status
    gradient_norm: float
    n_valid: int
    cost_history: list[float] = field(default_factory=list)


def _system(provider, x, pixels, bearings, mask):
    e = provider.residuals(x, pixels[mask], bearings[mask]).reshape(-1)
    J = provider.jacobian(x, pixels[mask], bearings[mask]).reshape(e.size, -1)
    return e, J


def _active_bounds(provider, x, g) -> np.ndarray:
    """Parameters sitting on a bound with the descent direction pointing outside."""
    probe = x - np.sign(g) * 1e-9 * (1.0 + np.abs(x))
    return (provider.clip(probe) == x) & (g != 0.0)


def _scaled_gradient_norm(J, e, active=None) -> float:
    """max_j |J_j . e| / |J_j| over free parameters; invariant to rescaling any one of them."""
    if e.size == 0:
        return 0.0
    cols = np.linalg.norm(J, axis=0)
    cols[cols == 0.0] = 1.0
    g = np.abs(J.T @ e) / cols
    if active is not None:
        g = np.where(active, 0.0, g)
    return float(np.max(g))


def _converged(J, e, cost, tol, active) -> bool:
    return _scaled_gradient_norm(J, e, active) < tol * (1.0 + np.sqrt(cost))


def _cost(provider, x, pixels, bearings, mask) -> float:
    e = provider.residuals(x, pixels[mask], bearings[mask])
    return float(np.sum(e * e))


def minimize(provider: Provider, samples, x0, opts: LmOptions | None = None) -> LmOutcome:
    """Minimize the sum of squared residuals of ``provider`` over ``samples``.

    Samples outside the provider's domain at the current iterate are left out of
    that iteration's normal equations. A step is accepted only when it keeps
    every currently valid sample valid and lowers the cost, so the accepted
    cost sequence never increases.

    Raises:
        AllSamplesInvalid: if no sample is valid at ``x0``.
        NumericalFailure: if the starting cost is not finite.
    """
    opts = opts or LmOptions()
    pixels, bearings = samples.pixels, samples.bearings
    x = provider.clip(np.asarray(x0, dtype=np.float64))
    if x.shape != (provider.dim,):
        raise ValueError(f"x0 must have {provider.dim} entries")

    mask = provider.valid(x, pixels, bearings)
    if not np.any(mask):
        raise AllSamplesInvalid("no sample lies in the output model's domain at the start point")
    e, J = _system(provider, x, pixels, bearings, mask)
    cost = float(e @ e)
    if not np.isfinite(cost):
        raise NumericalFailure("non-finite initial cost")

    initial_cost = cost
    history = [cost]
    lam = opts.lambda0
    status = Status.MAX_ITERS
    it = 0
    g = J.T @ e
    while True:
        active = _active_bounds(provider, x, g)
        # a stationary start is returned untouched; otherwise iterate until the
        # cost stops falling and only then judge stationarity, so a converged
        # result is as exact as the data allow
        if it == 0 and _converged(J, e, cost, opts.grad_tol, active):
            status = Status.CONVERGED
            break
        if it >= opts.max_iters:
            break
        it += 1

        # solve (H + lam diag H) step = -g in Jacobi-scaled variables; OCC
        # columns span ~12 decades (r_u^4) so the raw system is unusable.
        # Parameters held by an active bound are frozen for this step.
        free = ~active
        scale = np.linalg.norm(J[:, free], axis=0)
        scale[scale == 0.0] = 1.0
        Js = J[:, free] / scale
        Hs = Js.T @ Js
        gs = g[free] / scale
        eye = np.diag(np.diag(Hs))
        accepted = False
        while lam <= opts.lambda_max:
            step = np.zeros_like(x)
            step[free] = np.linalg.lstsq(Hs + lam * eye, -gs, rcond=None)[0] / scale
            x_new = provider.clip(x + step)
            delta = x_new - x
            if np.linalg.norm(delta) < opts.step_tol * (np.linalg.norm(x) + opts.step_tol):
                break
            mask_new = provider.valid(x_new, pixels, bearings)
            if np.all(mask_new[mask]):
                cost_new = _cost(provider, x_new, pixels, bearings, mask_new)
                if np.isfinite(cost_new) and cost_new < cost:
                    accepted = True
                    break
            lam *= opts.lambda_up

        if not accepted:
            status = Status.CONVERGED if _converged(J, e, cost, opts.grad_tol, active) else Status.STALLED
            break
        rel = (cost - cost_new) / cost if cost > 0 else 0.0
        x, mask, cost = x_new, mask_new, cost_new
        e, J = _system(provider, x, pixels, bearings, mask)
        g = J.T @ e
        history.append(cost)
        lam = max(lam * opts.lambda_down, 1e-15)
        if rel < opts.cost_tol:
            active = _active_bounds(provider, x, g)
            status = Status.CONVERGED if _converged(J, e, cost, opts.grad_tol, active) else Status.STALLED
            break

    logger.debug("LM %s after %d iterations, cost %.3e -> %.3e", status.value, it, initial_cost, cost)
    return LmOutcome(
        params=x,
        final_cost=cost,
        initial_cost=initial_cost,
        iterations=it,
        status=status,
        gradient_norm=_scaled_gradient_norm(J, e, _active_bounds(provider, x, g)),
        n_valid=int(np.count_nonzero(mask)),
        cost_history=history,
    )
