import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as nps

from conftest import random_unit
from signcone.errors import DimensionMismatch, EmptyList, ValidationError, ZeroVector
from signcone.pocs import (
    PocsConfig,
    PocsResult,
    angle_error,
    mean_angle_error,
    pocs_batch,
    pocs_reconstruct,
    project_band,
    project_signs,
    save_trace,
)
from signcone.sampling import SignSampleSet, full_sample, greedy_sample, random_sample, sign_sample, SignOracle
from signcone.spectral import Band, BandBasis


# ---- P_b ----------------------------------------------------------------------

def test_project_band_identity_on_band(sensor_instance):
    _, _, basis, x = sensor_instance
    assert np.abs(project_band(x, basis) - x).max() <= 1e-12


def test_project_band_kills_out_of_band(sensor_instance):
    _, spec, basis, _ = sensor_instance
    y = spec.eigenvectors[:, :28] @ np.arange(1, 29) / 28
    assert np.abs(project_band(y, basis)).max() <= 1e-12


def test_project_band_coordinate_toy():
    basis = BandBasis(matrix=np.array([[1.0], [0.0]]), band=Band(1, 1))
    np.testing.assert_array_equal(project_band([3.0, 4.0], basis), [3.0, 0.0])


def test_project_band_equals_filter_form(sensor_instance):
    _, spec, basis, _ = sensor_instance
    gamma = np.zeros(40)
    gamma[28:35] = 1
    P = spec.eigenvectors @ np.diag(gamma) @ spec.eigenvectors.T
    y = np.random.default_rng(1).standard_normal(40)
    np.testing.assert_allclose(project_band(y, basis), P @ y, atol=1e-12)


def test_project_band_dimension(sensor_instance):
    with pytest.raises(DimensionMismatch):
        project_band(np.zeros(3), sensor_instance[2])


# ---- P_v ----------------------------------------------------------------------

def test_project_signs_example():
    s = SignSampleSet((0, 1), (1, 1), 3)
    np.testing.assert_array_equal(project_signs([0.5, -0.3, 0.2], s), [0.5, 0.0, 0.2])


def test_project_signs_consistent_unchanged():
    x = np.array([0.5, -0.3, 0.2])
    np.testing.assert_array_equal(project_signs(x, sign_sample(x, [0, 1, 2])), x)


def test_project_signs_zero_sign():
    s = SignSampleSet((1,), (0,), 3)
    np.testing.assert_array_equal(project_signs([0.5, -0.3, 0.2], s), [0.5, 0.0, 0.2])


@given(nps.arrays(np.float64, 8, elements=st.floats(-10, 10)), st.lists(st.sampled_from([-1, 0, 1]), min_size=8, max_size=8))
def test_project_signs_matches_definition(x, signs):
    order = [0, 2, 3, 5, 7]
    s = SignSampleSet(tuple(order), tuple(signs[: len(order)]), 8)
    y = project_signs(x, s)
    for j in range(8):
        if j in order:
            sig = signs[order.index(j)]
            got = 1 if x[j] > 1e-12 else (-1 if x[j] < -1e-12 else 0)
            assert y[j] == (0.0 if got != sig else x[j])
        else:
            assert y[j] == x[j]


# ---- projection lemmas ---------------------------------------------------------

def test_reflections_are_isometries_and_projections_idempotent(sensor_instance):
    _, _, basis, x = sensor_instance
    rng = np.random.default_rng(11)
    s = sign_sample(x, random_sample(40, 16, seed=2))
    for _ in range(1000):
        v = rng.standard_normal(40) * rng.uniform(0.1, 10)
        pb = project_band(v, basis)
        pv = project_signs(v, s)
        assert abs(np.linalg.norm(2 * pb - v) / np.linalg.norm(v) - 1) <= 1e-10
        assert abs(np.linalg.norm(2 * pv - v) - np.linalg.norm(v)) <= 1e-12
        assert np.abs(project_band(pb, basis) - pb).max() <= 1e-12
        assert np.abs(project_signs(pv, s) - pv).max() <= 1e-12


def test_true_signal_is_fixed_point(sensor_instance):
    _, _, basis, x = sensor_instance
    for s in (full_sample(x), sign_sample(x, random_sample(40, 12, seed=1))):
        assert np.linalg.norm(project_band(project_signs(x, s), basis) - x) <= 1e-12


# ---- iteration ------------------------------------------------------------------

def test_start_at_truth_is_fixed_point(sensor_instance):
    _, _, basis, x = sensor_instance
    s = sign_sample(x, random_sample(40, 16, seed=4))
    res = pocs_reconstruct(s, basis, x, PocsConfig(max_iters=100, rel_tol=1e-9), reference=x)
    assert res.iterations_run == 1 and res.converged
    assert res.trace[0][1] == pytest.approx(0.0, abs=1e-6)
    assert angle_error(x, res.x_star) == pytest.approx(0.0, abs=1e-6)


def test_fejer_monotone_run(sensor_instance):
    _, _, basis, x = sensor_instance
    rng = np.random.default_rng(7)
    s = sign_sample(x, random_sample(40, 16, seed=5))
    xn = random_unit(rng, 40)
    dist = np.linalg.norm(xn - x)
    for _ in range(500):
        xn = project_band(project_signs(xn, s), basis)
        d = np.linalg.norm(xn - x)
        assert d <= dist + 1e-12
        dist = d


def test_batch_fejer_tracking(sensor_instance):
    _, _, basis, x = sensor_instance
    rng = np.random.default_rng(8)
    X0 = np.column_stack([random_unit(rng, 40) for _ in range(10)])
    s, _ = greedy_sample(basis, 16, SignOracle(x))
    res = pocs_batch(s, basis, X0, PocsConfig(2000, 0.0, 100), reference=x, check_fejer=True)
    assert res.fejer_violation <= 1e-12


def test_batch_matches_direct_iteration(sensor_instance):
    _, _, basis, x = sensor_instance
    rng = np.random.default_rng(9)
    X0 = np.column_stack([random_unit(rng, 40) for _ in range(3)])
    s = sign_sample(x, random_sample(40, 14, seed=9))
    res = pocs_batch(s, basis, X0, PocsConfig(300, 0.0, 1))
    for k in range(3):
        v = X0[:, k]
        for _ in range(300):
            v = project_band(project_signs(v, s), basis)
        np.testing.assert_allclose(res.X[:, k], v, atol=1e-12)


def _robustness_runs(s, basis, x, seed):
    rng = np.random.default_rng(seed)
    X0 = np.column_stack([random_unit(rng, 40) for _ in range(10)])
    return pocs_batch(s, basis, X0, PocsConfig(10000, 1e-9, 50), reference=x, check_fejer=True)


def test_initialization_robustness(sensor_instance):
    # signs on every vertex of the fixed instance
    _, _, basis, x = sensor_instance
    res = _robustness_runs(full_sample(x), basis, x, seed=10)
    assert res.fejer_violation <= 1e-12
    assert not res.collapsed.any()
    assert res.converged.all()
    assert np.all(res.iterations <= 10000)


def test_step_norms_shrink_for_every_start(sensor_instance):
    # partial greedy samples: some starts converge slowly, but every run is Fejer and its steps shrink
    _, _, basis, x = sensor_instance
    s, _ = greedy_sample(basis, 16, SignOracle(x))
    res = _robustness_runs(s, basis, x, seed=10)
    assert res.fejer_violation <= 1e-12
    steps = np.asarray(res.trace_steps)
    first = steps[0]
    assert np.all(res.final_step < 1e-2 * first)


def test_full_sampling_converges(sensor_instance):
    _, _, basis, x = sensor_instance
    s = full_sample(x)
    rng = np.random.default_rng(12)
    results = [pocs_reconstruct(s, basis, random_unit(rng, 40), PocsConfig(10000, 1e-9), reference=x) for _ in range(5)]
    assert all(r.converged for r in results)
    assert mean_angle_error(x, results) < 90


def test_collapse_is_reported():
    # one vertex, observed sign +1, start pointing the wrong way: P_v zeroes it exactly
    basis = BandBasis(matrix=np.array([[1.0]]), band=Band(1, 1))
    res = pocs_reconstruct(SignSampleSet((0,), (1,), 1), basis, np.array([-1.0]), PocsConfig(10, 0.0))
    assert res.collapsed and not res.converged and res.iterations_run == 1


def test_pocs_config_validation():
    with pytest.raises(ValidationError):
        PocsConfig(max_iters=0)
    with pytest.raises(ValidationError):
        PocsConfig(rel_tol=-1)


def test_zero_start_rejected(sensor_instance):
    _, _, basis, x = sensor_instance
    with pytest.raises(ZeroVector):
        pocs_reconstruct(full_sample(x), basis, np.zeros(40))


# ---- angle error ------------------------------------------------------------------

def test_angle_error_examples():
    x = np.array([1.0, 2.0, -0.5])
    assert angle_error(x, 2 * x) == pytest.approx(0.0, abs=1e-6)
    assert angle_error([1, 0], [0, 3]) == pytest.approx(90.0)
    assert angle_error(x, -x) == pytest.approx(180.0)
    with pytest.raises(ZeroVector):
        angle_error(x, np.zeros(3))


def test_mean_angle_error():
    x = np.array([1.0, 0.0])
    at = lambda deg: PocsResult(np.array([np.cos(np.radians(deg)), np.sin(np.radians(deg))]), 1, True)
    assert mean_angle_error(x, [at(0), at(0)]) == pytest.approx(0.0, abs=1e-6)
    assert mean_angle_error(x, [at(30), at(90)]) == pytest.approx(60.0)
    assert mean_angle_error(x, [at(10)] * 50) == pytest.approx(10.0)
    with pytest.raises(EmptyList):
        mean_angle_error(x, [])


def test_trace_csv(tmp_path):
    save_trace([(1, 10.0, 0.5), (2, 9.0, 0.25)], tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "iteration,angle_error_deg,step_norm"
    assert lines[1:] == ["1,10.0,0.5", "2,9.0,0.25"]
