import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from src.core.dense import Selection
from src.core.exceptions import MatrixFormatError, RankDeficientError
from src.core.svd import singular_values
from src.factorization.qr import (
    QRMode,
    build_qr_state,
    cholesky_link_check,
    cpqr_partial,
    cpqr_perm,
    interpolative_bound_qr,
    qr_local_maxvol,
    qr_lowrank,
    qr_ratio,
    qr_ratios,
    r11_inverse_norm,
)
from src.factorization.serialization import load_factorization, read_metadata, save_factorization
from src.generators.structured_matrices import kahan, sharpness_ge, sharpness_qr
from src.generators.random_matrices import gaussian
from src.search.config import InitStrategy, SearchConfig
from src.search.oracle import brute_force_global_maxvol, exact_neighbor_ratios, verify_local_maxvol


def test_cpqr_picks_the_same_columns_as_lapack():
    A = gaussian(30, 20, seed=3)
    _, _, piv = scipy.linalg.qr(A, pivoting=True, mode="economic")
    assert cpqr_perm(A, 8)[:8].tolist() == piv[:8].tolist()


@pytest.mark.parametrize("shape,k", [((10, 7), 3), ((6, 9), 6), ((5, 5), 1)])
def test_partial_qr_blocks(shape, k):
    A = gaussian(*shape, seed=8)
    qr = cpqr_partial(A, k)
    assert qr.shape == shape
    assert np.all(np.diag(qr.R11) >= 0)
    assert_allclose(np.tril(qr.R11, -1), 0.0)
    assert_allclose(qr.Q1.T @ qr.Q1, np.eye(k), atol=1e-12)
    assert_allclose(qr.Q1 @ qr.R11, A[:, qr.col_perm[:k]], atol=1e-12)
    assert_allclose(qr.Q1 @ qr.R12, qr.Q1 @ qr.Q1.T @ A[:, qr.col_perm[k:]], atol=1e-12)
    X, Y = qr_lowrank(qr)
    residual_sv = singular_values(A - X @ Y.T)[: shape[1] - k]
    assert_allclose(qr.residual_singular_values()[: len(residual_sv)], residual_sv, atol=1e-7)


def test_cpqr_rank_deficient():
    A = np.zeros((5, 4))
    A[:, 0] = 1.0
    with pytest.raises(RankDeficientError) as info:
        cpqr_partial(A, 2)
    assert info.value.step == 1


def test_cpqr_rejects_bad_k():
    with pytest.raises(ValueError):
        cpqr_perm(np.eye(3), 5)


@settings(max_examples=30, deadline=None)
@given(
    m=st.integers(2, 8),
    n=st.integers(2, 5),
    k=st.integers(1, 3),
    seed=st.integers(0, 100_000),
)
def test_ratio_formula_matches_volume_oracle(m, n, k, seed):
    k = min(k, m, n)
    A = gaussian(m, n, seed)
    qr = cpqr_partial(A, k)
    state = build_qr_state(A, qr.col_perm, k)
    moves, exact = exact_neighbor_ratios(QRMode(k), A, qr.selection)
    fast = [qr_ratio(state, mv.col_out, mv.col_in) for mv in moves]
    assert_allclose(fast, exact, rtol=1e-9, atol=1e-12)
    if moves:
        assert_allclose(qr_ratios(state).ravel(), fast)


@pytest.mark.parametrize("gamma", [1.0, 2.0])
def test_search_is_certified(gamma):
    A = gaussian(25, 18, seed=31)
    qr, report = qr_local_maxvol(A, 5, SearchConfig(gamma=gamma))
    assert report.mode == "qr"
    assert report.certified_gamma <= gamma * (1 + 1e-10)
    assert verify_local_maxvol(QRMode(5), A, qr.selection, gamma=gamma).passed
    assert interpolative_bound_qr(qr) <= gamma + 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_cpqr_start_respects_path_bound(seed):
    n, k = 60, 10
    A = gaussian(60, n, seed=seed)
    _, report = qr_local_maxvol(A, k, SearchConfig(gamma=2.0))
    assert report.path_bound == pytest.approx(k + math.log2(n - k) / 2)
    assert report.path_length <= report.path_bound
    assert report.max_swaps == math.ceil(report.path_bound) + 2


def test_check_selection_needs_column_subset():
    mode = QRMode(2)
    with pytest.raises(ValueError):
        mode.check_selection(Selection.leading(2), 4, 4)
    mode.check_selection(Selection.leading(2, m=4), 4, 4)


def test_random_selection_keeps_all_rows():
    sel = QRMode(3).random_selection(5, 8, np.random.default_rng(0))
    assert sel.row_idx == tuple(range(5))
    assert len(set(sel.col_idx)) == 3


def test_r11_inverse_norm():
    A = gaussian(12, 9, seed=2)
    qr = cpqr_partial(A, 4)
    assert r11_inverse_norm(qr) == pytest.approx(np.linalg.norm(np.linalg.inv(qr.R11), 2), rel=1e-10)


def test_kahan_columns_stay_in_natural_order():
    K = kahan(10, 0.6)
    assert cpqr_perm(K, 9)[:9].tolist() == list(range(9))


def test_cholesky_link_on_local_maxvol_columns():
    A = gaussian(15, 10, seed=44)
    qr, _ = qr_local_maxvol(A, 4, SearchConfig(gamma=1.0))
    link = cholesky_link_check(A, 4, qr.selection)
    assert link.qr_certified
    assert link.gram_symmetric_certified
    assert link.gram_full_certified
    assert link
    assert link.gram_symmetric_worst_ratio == pytest.approx(link.qr_worst_ratio ** 2, rel=1e-8)


def test_cholesky_link_on_greedy_columns_agrees():
    A = gaussian(15, 10, seed=45)
    cols = cpqr_perm(A, 4)[:4]
    link = cholesky_link_check(A, 4, cols)
    assert link.agree
    with pytest.raises(ValueError):
        cholesky_link_check(A, 3, cols)


def test_cholesky_link_on_brute_force_column_pair():
    A = gaussian(10, 4, seed=46)
    best, _ = brute_force_global_maxvol(A, 10, 2)
    link = cholesky_link_check(A, 2, best)
    assert link.agree
    assert link.qr_certified
    assert link.gram_symmetric_certified


@pytest.mark.parametrize("shape,k", [((8, 6), 2), ((12, 9), 3), ((10, 10), 4), ((20, 12), 5)])
@pytest.mark.parametrize("seed", range(3))
def test_cpqr_volume_floor(shape, k, seed):
    A = gaussian(*shape, seed=seed)
    n = shape[1]
    cols = cpqr_perm(A, k)[:k]
    log_vol = float(np.sum(np.log(singular_values(A[:, cols]))))
    log_floor = float(np.sum(np.log(singular_values(A)[:k]))) - k * math.log(2.0) - 0.5 * math.log(n - k)
    assert log_vol >= log_floor


def test_sharpness_qr_leading_columns_are_local_maxvol():
    k, n = 4, 9
    A = sharpness_qr(k, n)
    assert_allclose(A.T @ A, sharpness_ge(n, n, k), atol=1e-12)
    start = Selection.leading(k, m=k + 1)
    _, report = qr_local_maxvol(A, k, SearchConfig(gamma=1.0, init=InitStrategy.given(start)))
    assert report.path_length == 0
    assert verify_local_maxvol(QRMode(k), A, start).passed


def test_factorization_folder(tmp_path):
    A = gaussian(10, 8, seed=5)
    qr = cpqr_partial(A, 3)
    folder = save_factorization(qr, str(tmp_path / "qr"), gamma=2.0)
    assert read_metadata(folder)["gamma"] == "2.0"
    loaded = load_factorization(folder)
    assert loaded.col_perm.tolist() == qr.col_perm.tolist()
    assert_allclose(loaded.R12, qr.R12)
    assert loaded.selection == qr.selection


def test_load_factorization_rejects_unknown_kind(tmp_path):
    (tmp_path / "metadata.txt").write_text("kind: svd\nk: 1\ncol_perm: 0\nlog_volume: 0.0\n")
    with pytest.raises(MatrixFormatError):
        load_factorization(str(tmp_path))
    with pytest.raises(FileNotFoundError):
        load_factorization(str(tmp_path / "absent"))
