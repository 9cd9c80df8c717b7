from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from fisheye_adapter.converter import ConversionNotConverged, convert, fit_occ_forward_poly, incidence_angles
from fisheye_adapter.errors import TooFewValidSamples
from fisheye_adapter.evaluation import coeff_rmse, reprojection_error
from fisheye_adapter.lm import LmOptions
from fisheye_adapter.models import KINDS, CameraModel, ImageSize, OccParams, UcmParams, project_many
from fisheye_adapter.providers import PROVIDERS
from fisheye_adapter.sampler import SampleSet, sample_grid
from fixtures import REF_OCC_A, REF_UCM, relative_parameter_deltas, representative_models, unit_rays

RT_CAP = math.radians(60.0)


@pytest.mark.parametrize("kind", KINDS)
def test_same_kind_conversion_returns_the_input_parameters(models, kind):
    out, report = convert(models[kind], kind)
    assert np.all(relative_parameter_deltas(out, models[kind]) <= 1e-6)
    assert out.image_size == models[kind].image_size
    assert report.status == "converged"


@pytest.mark.parametrize("kind", [k for k in KINDS if k != "occ"])
def test_same_kind_conversion_reprojects_exactly(models, kind):
    _, report = convert(models[kind], kind)
    assert report.rms_reprojection_error < 1e-6


def test_same_kind_occ_is_limited_by_the_forward_polynomial(models):
    # OCC projects through its forward polynomial, itself a fit of the inverse
    # of a; the converted model must not be worse than the input's own round trip
    occ = models["occ"]
    out, report = convert(occ, "occ")
    samples = sample_grid(occ, 500)
    own_rms, _ = reprojection_error(occ, occ, samples)
    assert report.rms_reprojection_error <= own_rms
    assert report.rms_reprojection_error < 1e-5


def test_reference_ucm_to_occ():
    out, report = convert(REF_UCM, "occ")
    a = np.asarray(out.params.a[:3])
    assert coeff_rmse(a, REF_OCC_A) <= 0.26
    assert out.params.c == 1.0 and out.params.d == 0.0 and out.params.e == 0.0
    assert report.occ_order == len(out.params.k) - 1


def test_ds_to_kb_and_back(ds_desk):
    kb, _ = convert(ds_desk, "kb")
    back, report = convert(kb, "ds")
    assert report.rms_reprojection_error < 0.1
    rms, _ = reprojection_error(ds_desk, back)
    assert rms < 0.1


PINHOLE = CameraModel(UcmParams(400.0, 400.0, 320.0, 240.0, 0.0), ImageSize(640, 480))


def test_pinhole_chain_through_unified_families():
    m = PINHOLE
    for kind in ("eucm", "ds"):
        m, report = convert(m, kind)
        assert report.rms_reprojection_error < 1e-6
        assert reprojection_error(PINHOLE, m)[0] < 1e-6


@pytest.mark.xfail(strict=True, reason="KB's degree-9 odd polynomial cannot reproduce tan(theta) exactly")
def test_pinhole_chain_into_kb():
    m = PINHOLE
    for kind in ("eucm", "ds", "kb"):
        m, report = convert(m, kind)
    assert report.rms_reprojection_error < 1e-6


def test_pinhole_to_kb_error_is_the_series_truncation():
    # tan(theta) - degree-9 odd fit at 45 degrees: sub-millipixel, far from zero
    _, report = convert(PINHOLE, "kb")
    assert 1e-6 < report.rms_reprojection_error < 1e-3


def _pairs():
    return list(itertools.product(KINDS, KINDS))


@pytest.mark.parametrize("source,target", _pairs())
def test_final_error_never_exceeds_initial(models, source, target):
    cap = RT_CAP if target == "rt" else None
    out, report = convert(models[source], target, max_incidence=cap)
    assert report.rms_reprojection_error <= report.init_rms_reprojection_error
    assert report.rms_reprojection_error <= report.max_reprojection_error
    assert report.wall_time_ms >= 0.0
    assert out.image_size == models[source].image_size
    assert out.kind == target


def test_kept_initial_is_flagged(models):
    # EUCM -> OCC: the cleared OCC residual's optimum reprojects slightly worse
    # than its linear start, so the start is returned
    out, report = convert(models["eucm"], "occ")
    assert report.extra["kept_initial"] is True
    assert report.rms_reprojection_error == report.init_rms_reprojection_error
    np.testing.assert_array_equal(report.final_params, report.init_params)


@pytest.mark.parametrize("target", ["ucm", "eucm", "ds", "kb", "woodscape", "occ"])
def test_report_error_matches_independent_measurement(ds_desk, target):
    out, report = convert(ds_desk, target)
    samples = sample_grid(ds_desk, 500)
    uv = np.array([_project_one(out, b) for b in samples.bearings])
    err = np.linalg.norm(uv - samples.pixels, axis=1)
    assert abs(report.rms_reprojection_error - math.sqrt(np.mean(err**2))) < 1e-12
    assert abs(report.max_reprojection_error - np.max(err)) < 1e-12


def _project_one(model, bearing):
    uv, ok = project_many(model, bearing[None, :])
    assert ok[0]
    return uv[0]


def test_rt_target_drops_rays_behind_the_image_plane(ds_desk):
    out, report = convert(ds_desk, "rt")
    samples = sample_grid(ds_desk, 500)
    behind = int(np.count_nonzero(samples.bearings[:, 2] <= 1e-9))
    assert behind > 0
    assert report.coverage_loss == behind
    assert report.used_n == report.accepted_n - behind


def test_incidence_cap_limits_the_samples(ds_desk):
    _, report = convert(ds_desk, "rt", max_incidence=RT_CAP)
    samples = sample_grid(ds_desk, 500)
    assert report.used_n == np.count_nonzero(incidence_angles(samples.bearings) <= RT_CAP)


def test_incidence_cap_too_small(ds_desk):
    with pytest.raises(TooFewValidSamples):
        convert(ds_desk, "kb", max_incidence=1e-3)


def test_strict_mode_raises_with_partial_result(ds_desk):
    with pytest.raises(ConversionNotConverged) as info:
        convert(ds_desk, "kb", opts=LmOptions(max_iters=1), strict=True)
    assert info.value.report.status == "max_iters"
    assert info.value.model.kind == "kb"


def test_non_strict_mode_returns_best_effort(ds_desk):
    out, report = convert(ds_desk, "kb", opts=LmOptions(max_iters=1))
    assert report.status == "max_iters"
    assert out.kind == "kb"


def test_unknown_target(ds_desk):
    with pytest.raises(ValueError):
        convert(ds_desk, "pinhole")


def test_too_few_samples_requested(ds_desk):
    with pytest.raises(ValueError):
        convert(ds_desk, "kb", n=4)


def test_conversion_is_deterministic(ds_desk):
    a, ra = convert(ds_desk, "eucm")
    b, rb = convert(ds_desk, "eucm")
    assert a == b
    np.testing.assert_array_equal(ra.final_params, rb.final_params)


def test_report_block_keys(ds_desk):
    _, report = convert(ds_desk, "eucm")
    d = report.as_dict()
    assert d["n"] == 500 and d["accepted_n"] == report.accepted_n
    assert d["rms_re_px"] == report.rms_reprojection_error


# --- providers that the converter relies on ------------------------------


def test_eucm_provider_at_beta_one_matches_ucm(rng):
    rays = unit_rays(rng, 50, min_z=-0.2)
    pixels = rng.uniform(0, 600, size=(50, 2))
    x_ucm = np.array([300.0, 310.0, 320.0, 240.0, 0.6])
    x_eucm = np.r_[x_ucm, 1.0]
    np.testing.assert_allclose(
        PROVIDERS["eucm"].residuals(x_eucm, pixels, rays), PROVIDERS["ucm"].residuals(x_ucm, pixels, rays), rtol=1e-14
    )
    np.testing.assert_allclose(
        PROVIDERS["eucm"].jacobian(x_eucm, pixels, rays)[:, :, :5],
        PROVIDERS["ucm"].jacobian(x_ucm, pixels, rays),
        rtol=1e-14,
        atol=1e-12,
    )


def test_ucm_alpha_derivative_vanishes_on_the_axis():
    J = PROVIDERS["ucm"].jacobian(np.array([300.0, 300.0, 320.0, 240.0, 0.5]), np.array([[320.0, 240.0]]), np.array([[0.0, 0.0, 1.0]]))
    np.testing.assert_array_equal(J[0, :, 4], [0.0, 0.0])


# --- forward polynomial ----------------------------------------------------

OCC_CENTRE = (400.0, 300.0)


def _occ_samples(k, rng, n=300):
    model = CameraModel(OccParams(*OCC_CENTRE, (200.0, 0.0, -1e-3, 0.0, 0.0), tuple(k)), ImageSize(800, 600))
    rays = unit_rays(rng, n, min_z=-0.3)
    uv, ok = project_many(model, rays)
    return SampleSet(uv[ok], rays[ok], model.image_size, n), model.params


def test_forward_poly_recovers_an_exact_cubic(rng):
    k_true = (300.0, -150.0, -20.0, 5.0)
    samples, params = _occ_samples(k_true, rng)
    k, p = fit_occ_forward_poly(samples, params)
    assert p <= 4
    np.testing.assert_allclose(k[:4], k_true, rtol=1e-8)
    np.testing.assert_allclose(k[4:], 0.0, atol=1e-6)


def test_forward_poly_constant_radius(rng):
    # every pixel on a circle of radius 250 around the centre
    rays = unit_rays(rng, 200, min_z=-0.5)
    dirs = rays[:, :2] / np.hypot(rays[:, 0], rays[:, 1])[:, None]
    pixels = np.asarray(OCC_CENTRE) + 250.0 * dirs
    samples = SampleSet(pixels, rays, ImageSize(800, 600), 200)
    params = OccParams(*OCC_CENTRE, (200.0, 0.0, 0.0, 0.0, 0.0), (0.0, 1.0))
    k, p = fit_occ_forward_poly(samples, params)
    assert p == 2
    np.testing.assert_allclose(k, [250.0, 0.0, 0.0], atol=1e-8)


def test_forward_poly_on_the_reference_lens(models):
    occ = models["occ"]
    samples = sample_grid(occ, 500)
    k, _ = fit_occ_forward_poly(samples, occ.params)
    refit = CameraModel(OccParams(occ.params.cx, occ.params.cy, occ.params.a, tuple(k)), occ.image_size)
    rms, _ = reprojection_error(occ, refit, samples)
    assert rms < 0.5
