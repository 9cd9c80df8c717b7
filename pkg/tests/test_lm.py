from __future__ import annotations

import numpy as np
import pytest

from fisheye_adapter.converter import convert, initial_vector
from fisheye_adapter.errors import AllSamplesInvalid, NumericalFailure
from fisheye_adapter.evaluation import reprojection_error
from fisheye_adapter.initializer import inherit_intrinsics
from fisheye_adapter.lm import LmOptions, Status, _scaled_gradient_norm, _system, minimize
from fisheye_adapter.models import KINDS, CameraModel, ImageSize, project_many
from fisheye_adapter.providers import PROVIDERS, Provider
from fisheye_adapter.sampler import SampleSet, sample_grid
from fixtures import representative_models, unit_rays


class Shift(Provider):
    """e = p - target in both residual components of every sample."""

    kind = "shift"
    dim = 1

    def __init__(self, target=3.0, upper=np.inf, valid_value=True):
        self.target = target
        self.upper = upper
        self.valid_value = valid_value

    def residuals(self, x, pixels, bearings):
        return np.full((len(pixels), 2), x[0] - self.target)

    def jacobian(self, x, pixels, bearings):
        return np.ones((len(pixels), 2, 1))

    def valid(self, x, pixels, bearings):
        return np.full(len(pixels), self.valid_value)

    def clip(self, x):
        return np.minimum(np.asarray(x, dtype=np.float64), self.upper)


def _dummy_samples(n=10):
    return SampleSet(np.zeros((n, 2)), np.tile([0.0, 0.0, 1.0], (n, 1)), ImageSize(10, 10), n)


def _projected_samples(model, rng, n=400):
    """Pixels made by forward projection, so the generating parameters have zero residual."""
    rays = unit_rays(rng, 4 * n, min_z=0.2 if model.kind == "rt" else -0.2)
    uv, ok = project_many(model, rays)
    ok &= (uv[:, 0] >= 0) & (uv[:, 0] <= model.width) & (uv[:, 1] >= 0) & (uv[:, 1] <= model.height)
    return SampleSet(uv[ok][:n], rays[ok][:n], model.image_size, n)


def test_quadratic_reaches_minimum():
    out = minimize(Shift(), _dummy_samples(), np.array([0.0]))
    assert out.params[0] == pytest.approx(3.0, abs=1e-12)
    assert out.status is Status.CONVERGED
    assert out.cost_history[0] == pytest.approx(10 * 2 * 9.0)


def test_quadratic_single_step_without_damping():
    out = minimize(Shift(), _dummy_samples(), np.array([0.0]), LmOptions(lambda0=1e-15))
    assert out.params[0] == pytest.approx(3.0, abs=1e-12)
    assert len(out.cost_history) == 2


@pytest.mark.parametrize("kind", KINDS)
def test_zero_residual_start_converges_immediately(kind):
    model = representative_models()[kind]
    p = PROVIDERS[kind]
    if kind == "occ":
        samples = sample_grid(model, 500)  # OCC projects through k, not a
    else:
        samples = _projected_samples(model, np.random.default_rng(1))
    out = minimize(p, samples, model.params.to_vector()[: p.dim])
    assert out.status is Status.CONVERGED
    assert out.iterations <= 1
    assert out.final_cost < 1e-18


@pytest.mark.parametrize("kind", ["ucm", "eucm", "ds", "kb", "rt", "woodscape", "occ"])
def test_cost_history_is_non_increasing(kind, ds_desk):
    samples = sample_grid(ds_desk, 300)
    x0 = initial_vector(kind, samples, inherit_intrinsics(ds_desk, kind))
    if kind == "rt":
        samples = samples.subset(samples.bearings[:, 2] > 0.5)
        x0 = initial_vector(kind, samples, inherit_intrinsics(ds_desk, kind))
    out = minimize(PROVIDERS[kind], samples, x0)
    h = np.array(out.cost_history)
    assert np.all(np.diff(h) <= 0.0)
    assert 0.0 <= out.final_cost <= out.initial_cost
    assert out.final_cost == h[-1]


def test_kb_to_eucm_from_linear_init(ds_desk):
    # desk-scale KB: the DS desk lens re-expressed as KB
    kb, _ = convert(ds_desk, "kb")
    samples = sample_grid(kb, 500)
    x0 = initial_vector("eucm", samples, inherit_intrinsics(kb, "eucm"))
    out = minimize(PROVIDERS["eucm"], samples, x0)
    fitted = CameraModel(PROVIDERS["eucm"].to_params(out.params), kb.image_size)
    rms, _ = reprojection_error(kb, fitted, samples)
    assert rms < 0.05


def test_converged_result_is_stationary(ds_desk):
    samples = sample_grid(ds_desk, 500)
    p = PROVIDERS["eucm"]
    out = minimize(p, samples, initial_vector("eucm", samples, inherit_intrinsics(ds_desk, "eucm")))
    assert out.status is Status.CONVERGED
    e, J = _system(p, out.params, samples.pixels, samples.bearings, p.valid(out.params, samples.pixels, samples.bearings))
    assert _scaled_gradient_norm(J, e) < 1e-6 * (1.0 + np.sqrt(out.final_cost))
    assert out.gradient_norm < 1e-6 * (1.0 + np.sqrt(out.final_cost))


def test_bound_holds_and_counts_as_converged():
    # minimum at 3 lies outside the box p <= 1
    out = minimize(Shift(upper=1.0), _dummy_samples(), np.array([0.0]))
    assert out.params[0] == 1.0
    assert out.status is Status.CONVERGED


def test_start_is_clipped_into_the_box():
    out = minimize(Shift(upper=1.0), _dummy_samples(), np.array([5.0]))
    assert out.params[0] == 1.0


def test_all_samples_invalid():
    with pytest.raises(AllSamplesInvalid):
        minimize(Shift(valid_value=False), _dummy_samples(), np.array([0.0]))


def test_non_finite_start_cost():
    with pytest.raises(NumericalFailure):
        minimize(Shift(), _dummy_samples(), np.array([np.inf]))


def test_wrong_dimension():
    with pytest.raises(ValueError):
        minimize(Shift(), _dummy_samples(), np.array([0.0, 1.0]))


def test_max_iters_is_respected(ds_desk):
    samples = sample_grid(ds_desk, 300)
    x0 = initial_vector("kb", samples, inherit_intrinsics(ds_desk, "kb"))
    out = minimize(PROVIDERS["kb"], samples, x0, LmOptions(max_iters=1))
    assert out.iterations == 1
    assert out.status in (Status.MAX_ITERS, Status.CONVERGED)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"max_iters": 0},
        {"cost_tol": 0.0},
        {"step_tol": -1.0},
        {"lambda0": 0.0},
        {"lambda_up": 1.0},
        {"lambda_down": 1.0},
        {"lambda_down": 0.0},
        {"lambda_max": -1.0},
    ],
)
def test_options_validation(kwargs):
    with pytest.raises(ValueError):
        LmOptions(**kwargs)
