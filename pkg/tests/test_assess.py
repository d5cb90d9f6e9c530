import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.assessment.bounds import mu_factor, necessity_gamma_bound
from src.assessment.metric import make_mode, measured_mu_nu, mu_metric, worst_neighbor_ratio
from src.assessment.sandwich import guarded_ratio, lowrank_singular_values, validate_sandwich
from src.core.dense import Selection
from src.core.svd import singular_values
from src.factorization.ge import GEMode, build_ge_state, gecp_partial, ge_local_maxvol, ge_lowrank
from src.factorization.qr import cpqr_partial, qr_local_maxvol, qr_lowrank
from src.generators.structured_matrices import NECESSITY_K, necessity_example
from src.generators.random_matrices import gaussian
from src.search.config import SearchConfig
from src.search.oracle import verify_local_maxvol


def test_mu_factor_formulas():
    ge = mu_factor("ge", 40, 30, 5, gamma=2.0)
    assert ge.mu_factor == pytest.approx(1 + 5 * 4 * 5 * math.sqrt(1200))
    qr = mu_factor(GEMode(3), 40, 30, 3)
    assert qr.mode == "ge"
    assert mu_factor("qr", 40, 30, 5, gamma=2.0).mu_factor == pytest.approx(math.sqrt(1 + 5 * 4 * 5 * 30))
    assert ge.to_dict()["gamma_or_mu"] == 2.0


@pytest.mark.parametrize("args", [("lu", 4, 4, 2), ("ge", 0, 4, 2), ("ge", 4, 4, -1)])
def test_mu_factor_rejects(args):
    with pytest.raises(ValueError):
        mu_factor(*args)


def test_necessity_bound_forms():
    assert necessity_gamma_bound("ge", 2.0, 3.0, 10, 10, 2) == pytest.approx(13.0)
    assert necessity_gamma_bound("qr", 2.0, 3.0, 10, 10, 2) == pytest.approx(5.0)
    left = 1 + math.sqrt(2 * 8) * 3
    right = 1 + math.sqrt(2 * 6) * 3
    assert necessity_gamma_bound("ge", 2.0, 3.0, 10, 8, 2, form="uniform") == pytest.approx(9 + 4 * left * right)
    assert necessity_gamma_bound("qr", 2.0, 3.0, 10, 8, 2, form="uniform") == pytest.approx(
        math.sqrt(9 + right ** 2 * 16)
    )
    assert necessity_gamma_bound("ge", 0.5, 0.0, 4, 4, 2) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        necessity_gamma_bound("ge", -1.0, 0.0, 4, 4, 2)
    with pytest.raises(ValueError):
        necessity_gamma_bound("ge", 1.0, 1.0, 4, 4, 2, form="lemma")


def test_guarded_ratio():
    assert guarded_ratio(3.0, 2.0, 1e-12) == 1.5
    assert guarded_ratio(0.0, 0.0, 1e-12) == 1.0
    assert guarded_ratio(1.0, 0.0, 1e-12) == math.inf


def test_make_mode():
    mode = GEMode(2)
    assert make_mode(mode, 5) is mode
    assert make_mode("qr", 3).k == 3
    with pytest.raises(ValueError):
        make_mode("lu", 3)


def test_metric_of_local_maxvol_pivot_is_one():
    A = gaussian(12, 10, seed=9)
    lu, _ = ge_local_maxvol(A, 3, SearchConfig(gamma=1.0))
    assert mu_metric(A, lu.selection, "ge") == pytest.approx(1.0)
    qr, _ = qr_local_maxvol(A, 3, SearchConfig(gamma=1.0))
    assert mu_metric(A, qr.selection, "qr") == pytest.approx(1.0)


def test_worst_ratio_agrees_with_verifier():
    A = gaussian(8, 8, seed=12)
    lu = gecp_partial(A, 3)
    ratio, move = worst_neighbor_ratio(A, lu.selection, "ge")
    cert = verify_local_maxvol(GEMode(3), A, lu.selection)
    assert ratio == pytest.approx(cert.worst_ratio, rel=1e-9)
    assert move == cert.worst_move


def test_worst_ratio_without_neighbours():
    assert worst_neighbor_ratio(np.eye(2), Selection.leading(2), "ge") == (0.0, None)
    assert mu_metric(np.eye(2), Selection.leading(2), "ge") == 1.0


@pytest.mark.parametrize("param", [1.5, 3.0, 10.0])
def test_mu_example_is_sharp(param):
    A = necessity_example("mu", param)
    k = NECESSITY_K["mu"]
    metric = mu_metric(A, Selection.leading(k), "ge")
    assert metric == pytest.approx(param ** 2, rel=1e-10)
    state = build_ge_state(A, np.arange(4), np.arange(4), k)
    mu, nu = measured_mu_nu(A, state.to_partial_lu())
    assert mu == pytest.approx(param, rel=1e-10)
    assert nu == 0.0
    assert necessity_gamma_bound("ge", mu, nu, 4, 4, k) == pytest.approx(metric, rel=1e-10)


@pytest.mark.parametrize("param", [1.5, 4.0])
def test_nu_example_reaches_nu_squared(param):
    A = necessity_example("nu", param)
    k = NECESSITY_K["nu"]
    metric = mu_metric(A, Selection.leading(k), "ge")
    assert metric == pytest.approx(param ** 2, rel=1e-10)


@pytest.mark.parametrize("seed", range(6))
def test_necessity_holds_for_greedy_pivots(seed):
    A = gaussian(20, 16, seed=seed)
    k = 4
    lu = gecp_partial(A, k)
    mu, nu = measured_mu_nu(A, lu)
    assert mu >= 1.0 - 1e-12
    assert mu_metric(A, lu.selection, "ge") <= necessity_gamma_bound("ge", mu, nu, 20, 16, k) * (1 + 1e-9)
    qr = cpqr_partial(A, k)
    mu, nu = measured_mu_nu(A, qr)
    assert mu >= 1.0 - 1e-12
    assert mu_metric(A, qr.selection, "qr") <= necessity_gamma_bound("qr", mu, nu, 20, 16, k) * (1 + 1e-9)


def test_measured_mu_nu_rejects_other_types():
    with pytest.raises(TypeError):
        measured_mu_nu(np.eye(3), object())


def test_lowrank_singular_values():
    X = gaussian(9, 3, seed=1)
    Y = gaussian(7, 3, seed=2)
    assert_allclose(lowrank_singular_values(X, Y), singular_values(X @ Y.T)[:3], rtol=1e-12)
    assert lowrank_singular_values(np.zeros((4, 0)), np.zeros((3, 0))).size == 0


@pytest.mark.parametrize("gamma", [1.0, 2.0])
def test_local_maxvol_factorizations_satisfy_sandwich(gamma):
    A = gaussian(30, 25, seed=7)
    k = 5
    lu, _ = ge_local_maxvol(A, k, SearchConfig(gamma=gamma))
    report = validate_sandwich(A, ge_lowrank(lu), mu_factor("ge", 30, 25, k, gamma).mu_factor)
    assert report.passed and report.violations == 0
    assert report.lower_violation <= 1.0 + 1e-9
    qr, _ = qr_local_maxvol(A, k, SearchConfig(gamma=gamma))
    report = validate_sandwich(A, qr_lowrank(qr), mu_factor("qr", 30, 25, k, gamma).mu_factor)
    assert report.passed


def test_sandwich_detects_a_too_small_factor(caplog):
    A = gaussian(10, 10, seed=3)
    lu = gecp_partial(A, 2)
    with caplog.at_level("WARNING", logger="maxvol"):
        report = validate_sandwich(A, ge_lowrank(lu), 1.0)
    assert not report.passed
    assert report.violations > 0
    assert report.worst_ratio > 1.0
    assert "Sandwich check failed" in caplog.text


def test_sandwich_artifacts(tmp_path):
    A = gaussian(10, 8, seed=4)
    lu = gecp_partial(A, 3)
    report = validate_sandwich(A, ge_lowrank(lu), mu_factor("ge", 10, 8, 3, 10.0).mu_factor)
    frame = report.to_frame()
    assert list(frame.columns) == ["j", "sigma_A", "sigma_Ak", "sigma_residual"]
    assert len(frame) == 8
    assert frame["sigma_Ak"].iloc[3:].isna().all()
    json_path, csv_path = report.save(str(tmp_path / "sv"), "gecp_k3")
    with open(json_path) as handle:
        payload = json.load(handle)
    assert payload["schema_version"] == 1
    assert payload["passed"] is True
