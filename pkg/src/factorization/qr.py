"""
Partial QR factorizations with greedy or (near-)local maximum volume column selection.

For a column permutation ``P`` with the selected columns leading,

    A P = [Q1 Q2] [R11 R12; 0 R22]

``Q2`` and ``R22`` are never formed; the Gram matrix ``R22^T R22`` of the
residual columns is kept instead. ``A_k = Q1 [R11 R12] P^T``.
"""
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from src.core.dense import Selection, as_dense, complete_permutation, max_norm
from src.core.exceptions import RankDeficientError, SingularTriangularError
from src.core.logger import get_logger
from src.core.svd import EPS, log_volume, singular_values
from src.core.triangular import solve_triangular
from src.factorization.ge import build_ge_state, scan_ge
from src.search.config import DEFAULT_QR_GAMMA, DEFAULT_TIE_TOL, SearchConfig
from src.search.engine import ScanTracker, SearchMode, search
from src.search.neighbors import QR, Move

logger = get_logger(__name__)

QR_CAP_SLACK = 2
NORM_RECOMPUTE = math.sqrt(EPS)


@dataclass(frozen=True)
class PartialQR:
    """
    ``k`` Householder steps in block form; ``col_perm[:k]`` are the selected columns.

    ``R11`` has a nonnegative diagonal.
    """

    col_perm: np.ndarray
    k: int
    Q1: np.ndarray
    R11: np.ndarray
    R12: np.ndarray
    R22_gram: np.ndarray
    log_volume: float

    @property
    def selection(self):
        return Selection.columns(self.Q1.shape[0], self.col_perm[: self.k])

    @property
    def shape(self):
        return self.Q1.shape[0], len(self.col_perm)

    def residual_singular_values(self):
        """Singular values of ``R22`` (equal to those of ``A - A_k``), from the Gram eigenvalues."""
        if self.R22_gram.size == 0:
            return np.zeros(0)
        eig = scipy.linalg.eigvalsh(self.R22_gram)[::-1]
        return np.sqrt(np.clip(eig, 0.0, None))


@dataclass(frozen=True)
class QRState:
    """Cached quantities for O(1) column-swap ratios."""

    row_perm: np.ndarray
    col_perm: np.ndarray
    k: int
    Q1: np.ndarray
    R11: np.ndarray
    R12: np.ndarray
    R22_gram: np.ndarray
    Y: np.ndarray
    r11_inv_row_norms2: np.ndarray
    residual_norms2: np.ndarray
    log_volume: float

    @property
    def selection(self):
        return Selection.columns(len(self.row_perm), self.col_perm[: self.k])

    def to_partial_qr(self):
        return PartialQR(self.col_perm, self.k, self.Q1, self.R11, self.R12, self.R22_gram, self.log_volume)


def build_qr_state(A, col_perm, k):
    """
    Rebuilds the partial QR for the columns ``col_perm[:k]`` with an unpivoted Householder QR.

    :raises RankDeficientError: The selected columns are numerically dependent.
    """
    m, _ = A.shape
    col_perm = np.asarray(col_perm, dtype=np.intp)
    A1 = A[:, col_perm[:k]]
    A2 = A[:, col_perm[k:]]
    Q1, R11 = scipy.linalg.qr(A1, mode="economic", check_finite=False)
    signs = np.where(np.diag(R11) < 0, -1.0, 1.0)
    Q1 = Q1 * signs
    R11 = signs[:, None] * R11
    lv = log_volume(R11)
    if lv == -np.inf:
        raise RankDeficientError(0, f"Columns {col_perm[:k].tolist()} are numerically dependent")

    R12 = Q1.T @ A2
    residual = A2 - Q1 @ R12
    # second pass restores orthogonality lost to cancellation
    correction = Q1.T @ residual
    R12 = R12 + correction
    residual = residual - Q1 @ correction

    Y = solve_triangular(R11, R12)
    R11_inv = solve_triangular(R11, np.eye(k))
    return QRState(
        row_perm=np.arange(m),
        col_perm=col_perm,
        k=k,
        Q1=Q1,
        R11=R11,
        R12=R12,
        R22_gram=residual.T @ residual,
        Y=Y,
        r11_inv_row_norms2=np.einsum("ij,ij->i", R11_inv, R11_inv),
        residual_norms2=np.einsum("ij,ij->j", residual, residual),
        log_volume=lv,
    )


def cpqr_perm(A, k):
    """
    Householder QR with column pivoting on the largest residual norm, stopped after ``k`` steps.

    Residual norms are downdated after each step and recomputed whenever a
    downdated norm drops below ``sqrt(eps)`` times its reference value.

    :return: The column permutation.
    :raises RankDeficientError: The largest residual norm is below ``eps * ||A||_max * max(m, n)``.
    """
    m, n = A.shape
    if not 1 <= k <= min(m, n):
        raise ValueError(f"k must be in [1, {min(m, n)}], got {k}")
    M = np.array(A, dtype=np.float64)
    perm = np.arange(n)
    norms = np.linalg.norm(M, axis=0)
    reference = norms.copy()
    tol = EPS * max_norm(A) * max(m, n)
    for step in range(k):
        j = step + int(np.argmax(norms[step:]))
        if norms[j] <= tol:
            raise RankDeficientError(step)
        for arr in (perm, norms, reference):
            arr[[step, j]] = arr[[j, step]]
        M[:, [step, j]] = M[:, [j, step]]

        x = M[step:, step]
        alpha = -math.copysign(np.linalg.norm(x), x[0])
        v = x.copy()
        v[0] -= alpha
        vnorm2 = v @ v
        if vnorm2 > 0.0:
            M[step:, step:] -= np.outer(v * (2.0 / vnorm2), v @ M[step:, step:])

        rest = slice(step + 1, n)
        norms[rest] = np.sqrt(np.clip(norms[rest] ** 2 - M[step, rest] ** 2, 0.0, None))
        stale = np.flatnonzero(norms[rest] < NORM_RECOMPUTE * reference[rest]) + step + 1
        if stale.size:
            norms[stale] = np.linalg.norm(M[step + 1:, stale], axis=0)
            reference[stale] = norms[stale]
    return perm


def cpqr_partial(A, k):
    """
    Column-pivoted QR stopped after ``k`` steps.

    :param A: Input matrix.
    :param k: Number of columns to select, ``1 <= k <= min(m, n)``.
    :return: ``PartialQR`` with the CPQR columns leading.
    """
    A = as_dense(A)
    perm = cpqr_perm(A, k)
    try:
        state = build_qr_state(A, perm, k)
    except RankDeficientError as exc:
        raise RankDeficientError(k - 1, str(exc)) from exc
    return state.to_partial_qr()


def qr_ratio(state, i, j):
    """
    Volume ratio after swapping selected column ``i`` with trailing column ``j`` (0-based positions).
    """
    return math.sqrt(state.Y[i, j] ** 2 + state.r11_inv_row_norms2[i] * state.residual_norms2[j])


def qr_ratios(state):
    """All ``k`` x ``(n-k)`` column-swap ratios at once."""
    return np.sqrt(state.Y ** 2 + np.outer(state.r11_inv_row_norms2, state.residual_norms2))


def scan_qr(state, threshold):
    tracker = ScanTracker(threshold)
    hit = tracker.offer(qr_ratios(state), lambda idx: Move(col_out=int(idx[0]), col_in=int(idx[1])))
    return hit or tracker.finish()


class QRMode(SearchMode):
    """Searches over ``m`` x ``k`` column subsets with single column swaps."""

    name = QR

    def check_selection(self, selection, m, n):
        selection.validate(m, n)
        if not selection.is_column_subset(m) or len(selection.col_idx) != self.k:
            raise ValueError(f"QR selections keep every row and exactly {self.k} columns")

    def random_selection(self, m, n, rng):
        return Selection.columns(m, np.sort(rng.choice(n, size=self.k, replace=False)))

    def greedy_state(self, A):
        return build_qr_state(A, cpqr_perm(A, self.k), self.k)

    def build_state(self, A, row_perm, col_perm):
        return build_qr_state(A, col_perm, self.k)

    def scan(self, state, threshold):
        return scan_qr(state, threshold)

    def default_max_swaps(self, m, n, config):
        bound = self.path_bound(m, n, config)
        if config.init.kind == "greedy" and bound is not None:
            return int(math.ceil(bound)) + QR_CAP_SLACK
        k = self.k
        return int(math.ceil(4 * (k * math.log2(max(m, n, 2)) + k + 64)))

    def path_bound(self, m, n, config):
        """``k log_gamma(2) + log_gamma(n - k) / 2``: the most swaps a CPQR start can need."""
        if config.gamma <= 1.0:
            return None
        lg = math.log(config.gamma)
        return (self.k * math.log(2.0) + 0.5 * math.log(max(n - self.k, 1))) / lg


def qr_local_maxvol(A, k, config=None):
    """
    QR with a (near-)local maximum volume column subset.

    :param A: Input matrix.
    :param k: Number of columns.
    :param config: ``SearchConfig``; defaults to ``gamma=2`` from the CPQR columns.
    :return: ``(PartialQR, SearchReport)``.
    """
    config = config or SearchConfig(gamma=DEFAULT_QR_GAMMA)
    state, report = search(QRMode(k), A, config)
    logger.info(f"QR search done: k={k}, gamma={config.gamma}, {report.path_length} swaps")
    return state.to_partial_qr(), report


def interpolative_bound_qr(qr):
    """
    Returns ``||R11^{-1} R12||_max``.

    :raises RankDeficientError: ``R11`` has a zero diagonal entry.
    """
    try:
        Y = solve_triangular(qr.R11, qr.R12)
    except SingularTriangularError as exc:
        raise RankDeficientError(exc.index, str(exc)) from exc
    return max_norm(Y)


def qr_lowrank(qr):
    """Factors ``(X, Y)`` with ``A_k = X Y^T = Q1 [R11 R12] P^T``."""
    m, n = qr.shape
    Y = np.empty((n, qr.k))
    Y[qr.col_perm] = np.hstack([qr.R11, qr.R12]).T
    return qr.Q1.copy(), Y


def r11_inverse_norm(qr):
    """``||R11^{-1}||_2``, the error constant of DEIM-style point selection."""
    smallest = singular_values(qr.R11)[-1]
    if smallest == 0.0:
        raise RankDeficientError(qr.k - 1, "R11 is singular")
    return float(1.0 / smallest)


@dataclass(frozen=True)
class CholeskyLinkResult:
    """
    Certificates for a column subset ``J`` of ``A`` and the block ``G[J, J]`` of ``G = A^T A``.

    ``qr_certified``: no single column swap increases ``vol(A[:, J])``.
    ``gram_symmetric_certified``: no symmetric row-and-column swap increases ``vol(G[J, J])``.
    ``gram_full_certified``: no GE neighbour at all increases ``vol(G[J, J])``.
    """

    qr_certified: bool
    gram_symmetric_certified: bool
    gram_full_certified: bool
    qr_worst_ratio: float
    gram_symmetric_worst_ratio: float
    gram_full_worst_ratio: float

    @property
    def agree(self):
        return self.qr_certified == self.gram_symmetric_certified

    def __bool__(self):
        return self.agree


def cholesky_link_check(A, k, selection, tie_tol=DEFAULT_TIE_TOL):
    """
    Compares the QR local maxvol certificate of a column subset with the GE
    certificate of the matching principal block of ``A^T A``.

    A symmetric swap of ``G[J, J]`` changes its volume by the square of the
    column-swap ratio, so the two certificates must agree.

    :param A: Input matrix.
    :param k: Subset size.
    :param selection: Column subset (a ``Selection`` or an iterable of column indices).
    :return: ``CholeskyLinkResult``; truthy when the certificates agree.
    """
    A = as_dense(A)
    m, n = A.shape
    cols = selection.col_idx if isinstance(selection, Selection) else tuple(int(c) for c in selection)
    if len(cols) != k:
        raise ValueError(f"Expected {k} columns, got {len(cols)}")
    perm = complete_permutation(cols, n)

    qr_state = build_qr_state(A, perm, k)
    qr_worst = float(np.max(qr_ratios(qr_state))) if n > k else 0.0

    gram = A.T @ A
    ge_state = build_ge_state(gram, perm, perm, k)
    if n > k:
        sym = np.abs(ge_state.Z * ge_state.W.T + np.diag(ge_state.A11_inv)[:, None] * np.diag(ge_state.S)[None, :])
        sym_worst = float(np.max(sym))
    else:
        sym_worst = 0.0
    full_worst = scan_ge(ge_state, np.inf).max_ratio

    qr_threshold = 1.0 + tie_tol
    gram_threshold = (1.0 + tie_tol) ** 2
    return CholeskyLinkResult(
        qr_certified=qr_worst <= qr_threshold,
        gram_symmetric_certified=sym_worst <= gram_threshold,
        gram_full_certified=full_worst <= gram_threshold,
        qr_worst_ratio=qr_worst,
        gram_symmetric_worst_ratio=sym_worst,
        gram_full_worst_ratio=full_worst,
    )
