"""
Partial LU factorizations with greedy or (near-)local maximum volume pivots.

With a row permutation ``P1`` and column permutation ``P2`` chosen so that
the pivot block leads,

    P1 A P2 = [A11 A12; A21 A22] = [I 0; W I] [A11 0; 0 S] [I Z; 0 I]

where ``W = A21 A11^{-1}``, ``Z = A11^{-1} A12`` and ``S = A22 - A21 A11^{-1} A12``
is the Schur complement. ``A_k = [I; W] A11 [I Z]`` is the rank-``k``
approximation whose error is ``S``.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from src.core.dense import Selection, as_dense, max_norm
from src.core.exceptions import RankDeficientError
from src.core.logger import get_logger
from src.core.svd import EPS
from src.search.config import DEFAULT_GE_GAMMA, SearchConfig
from src.search.engine import ScanTracker, SearchMode, search
from src.search.neighbors import GE, Move

logger = get_logger(__name__)

# elements per vectorised block of combined-move ratios
SCAN_BLOCK = 1 << 21


@dataclass(frozen=True)
class PartialLU:
    """
    ``k`` steps of Gaussian elimination, kept in block form.

    ``row_perm[:k]`` and ``col_perm[:k]`` are the pivot rows and columns of ``A``.
    """

    row_perm: np.ndarray
    col_perm: np.ndarray
    k: int
    A11: np.ndarray
    W: np.ndarray
    Z: np.ndarray
    S: np.ndarray
    log_volume: float

    @property
    def selection(self):
        return Selection(self.row_perm[: self.k], self.col_perm[: self.k])

    @property
    def shape(self):
        return len(self.row_perm), len(self.col_perm)

    def permuted_blocks(self):
        """Rebuilds ``P1 A P2`` from the block factors."""
        top = np.hstack([self.A11, self.A11 @ self.Z])
        bottom = np.hstack([self.W @ self.A11, self.W @ self.A11 @ self.Z + self.S])
        return np.vstack([top, bottom])


@dataclass(frozen=True)
class GEState:
    """Cached quantities for O(1) neighbour ratios at the current pivot."""

    row_perm: np.ndarray
    col_perm: np.ndarray
    k: int
    A11: np.ndarray
    A11_inv: np.ndarray
    W: np.ndarray
    Z: np.ndarray
    S: np.ndarray
    log_volume: float

    @property
    def selection(self):
        return Selection(self.row_perm[: self.k], self.col_perm[: self.k])

    def to_partial_lu(self):
        return PartialLU(self.row_perm, self.col_perm, self.k, self.A11, self.W, self.Z, self.S, self.log_volume)


def _lu_solve(lu_piv, B, trans=0):
    if B.shape[1] == 0:
        return np.zeros(B.shape)
    return scipy.linalg.lu_solve(lu_piv, B, trans=trans, check_finite=False)


def build_ge_state(A, row_perm, col_perm, k):
    """
    Computes ``A11^{-1}``, ``W``, ``Z`` and ``S`` for the pivot named by the permutations.

    The block is degenerate under the same rule as complete pivoting: an LU
    pivot of ``A11`` at or below ``eps * ||A||_max * max(m, n)``.

    :raises RankDeficientError: The pivot block is numerically singular; ``step`` is the failing pivot.
    """
    row_perm = np.asarray(row_perm, dtype=np.intp)
    col_perm = np.asarray(col_perm, dtype=np.intp)
    rows, rest_rows = row_perm[:k], row_perm[k:]
    cols, rest_cols = col_perm[:k], col_perm[k:]
    A11 = A[np.ix_(rows, cols)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu_piv = scipy.linalg.lu_factor(A11, check_finite=False)
    pivots = np.abs(np.diag(lu_piv[0]))
    tol = EPS * max_norm(A) * max(A.shape)
    small = np.flatnonzero(pivots <= tol)
    if small.size:
        raise RankDeficientError(
            int(small[0]), f"Pivot block at rows {rows.tolist()}, cols {cols.tolist()} is numerically singular"
        )
    lv = float(np.sum(np.log(pivots)))
    A12 = A[np.ix_(rows, rest_cols)]
    A21 = A[np.ix_(rest_rows, cols)]
    A22 = A[np.ix_(rest_rows, rest_cols)]
    Z = _lu_solve(lu_piv, A12)
    W = _lu_solve(lu_piv, np.ascontiguousarray(A21.T), trans=1).T
    A11_inv = _lu_solve(lu_piv, np.eye(k))
    S = A22 - A21 @ Z
    return GEState(row_perm, col_perm, k, A11, A11_inv, np.ascontiguousarray(W), Z, S, lv)


def gecp_perms(A, k):
    """
    Runs ``k`` steps of complete pivoting and returns the row and column permutations.

    The pivot at each step is the first entry of largest magnitude (row-major
    order) in the active Schur complement.

    :raises RankDeficientError: A pivot falls below ``eps * ||A||_max * max(m, n)``.
    """
    m, n = A.shape
    if not 1 <= k <= min(m, n):
        raise ValueError(f"k must be in [1, {min(m, n)}], got {k}")
    M = np.array(A, dtype=np.float64)
    row_perm = np.arange(m)
    col_perm = np.arange(n)
    tol = EPS * max_norm(A) * max(m, n)
    for step in range(k):
        active = np.abs(M[step:, step:])
        r, c = np.unravel_index(np.argmax(active), active.shape)
        r += step
        c += step
        pivot = M[r, c]
        if abs(pivot) <= tol:
            raise RankDeficientError(step)
        M[[step, r], :] = M[[r, step], :]
        M[:, [step, c]] = M[:, [c, step]]
        row_perm[[step, r]] = row_perm[[r, step]]
        col_perm[[step, c]] = col_perm[[c, step]]
        M[step + 1:, step] /= pivot
        M[step + 1:, step + 1:] -= np.outer(M[step + 1:, step], M[step, step + 1:])
    return row_perm, col_perm


def gecp_partial(A, k):
    """
    Gaussian elimination with complete pivoting, stopped after ``k`` steps.

    :param A: Input matrix.
    :param k: Number of elimination steps, ``1 <= k <= min(m, n)``.
    :return: ``PartialLU`` with the GECP pivot block leading.
    :raises RankDeficientError: Degenerate pivot before step ``k``.
    """
    A = as_dense(A)
    row_perm, col_perm = gecp_perms(A, k)
    try:
        state = build_ge_state(A, row_perm, col_perm, k)
    except RankDeficientError as exc:
        raise RankDeficientError(k - 1, str(exc)) from exc
    return state.to_partial_lu()


def ge_ratio(state, i, j, s, t):
    """
    Volume ratio ``vol(new A11) / vol(A11)`` after swapping pivot row ``i`` with
    trailing row ``j`` and pivot column ``s`` with trailing column ``t``.

    Pass ``i = j = None`` for a column-only move or ``s = t = None`` for a
    row-only move. Indices are 0-based positions in the current permutation.
    """
    if i is None and s is None:
        raise ValueError("A move must swap a row, a column, or both")
    if s is None:
        return abs(float(state.W[j, i]))
    if i is None:
        return abs(float(state.Z[s, t]))
    return abs(float(state.Z[s, t] * state.W[j, i] + state.A11_inv[s, i] * state.S[j, t]))


def scan_ge(state, threshold):
    """
    Scans the neighbours of a GE state in the fixed order and stops at the first ratio above ``threshold``.

    ``threshold=inf`` gives a complete scan whose ``max_ratio`` is the worst neighbour ratio.
    """
    tracker = ScanTracker(threshold)
    k = state.k
    W, Z, S, A11_inv = state.W, state.Z, state.S, state.A11_inv
    m_rest, n_rest = S.shape

    # row-only moves, (i, j) order
    hit = tracker.offer(np.abs(W.T), lambda idx: Move(row_out=int(idx[0]), row_in=int(idx[1])))
    if hit:
        return hit
    # column-only moves, (s, t) order
    hit = tracker.offer(np.abs(Z), lambda idx: Move(col_out=int(idx[0]), col_in=int(idx[1])))
    if hit:
        return hit

    if m_rest and n_rest:
        chunk = max(1, SCAN_BLOCK // (k * n_rest))
        for i in range(k):
            w = W[:, i]
            a = A11_inv[:, i]
            for j0 in range(0, m_rest, chunk):
                wj = w[j0:j0 + chunk]
                ratios = np.abs(wj[:, None, None] * Z[None, :, :] + a[None, :, None] * S[j0:j0 + chunk, None, :])
                hit = tracker.offer(
                    ratios,
                    lambda idx, i=i, j0=j0: Move(i, j0 + int(idx[0]), int(idx[1]), int(idx[2])),
                )
                if hit:
                    return hit
    return tracker.finish()


def wilkinson_growth_bound(size):
    """Wilkinson's bound on the growth factor of complete pivoting on a ``size`` x ``size`` matrix."""
    logs = sum(math.log(j) / (j - 1) for j in range(2, size + 1))
    return math.exp(0.5 * math.log(size) + 0.5 * logs)


class GEMode(SearchMode):
    """Searches over ``k`` x ``k`` pivot blocks with row and column swaps."""

    name = GE

    def greedy_state(self, A):
        row_perm, col_perm = gecp_perms(A, self.k)
        return build_ge_state(A, row_perm, col_perm, self.k)

    def build_state(self, A, row_perm, col_perm):
        return build_ge_state(A, row_perm, col_perm, self.k)

    def scan(self, state, threshold):
        return scan_ge(state, threshold)

    def default_max_swaps(self, m, n, config):
        k = self.k
        return int(math.ceil(4 * (k * math.log2(max(m, n, 2)) + k + 64)))

    def path_bound(self, m, n, config):
        """Largest path length a GECP start allows when ``gamma > 1``."""
        if config.gamma <= 1.0:
            return None
        k = self.k
        rho = config.growth_factor or wilkinson_growth_bound(k + 1)
        lg = math.log(config.gamma)
        return (
            (k + 1) * math.log(4) + math.log(k + rho) + 0.5 * math.log(max(m - k, 1)) + 0.5 * math.log(max(n - k, 1))
        ) / lg


def ge_local_maxvol(A, k, config=None):
    """
    Gaussian elimination with a (near-)local maximum volume ``k`` x ``k`` pivot.

    Starts from the GECP pivot unless ``config.init`` says otherwise, and
    takes the first neighbour whose volume exceeds ``gamma`` times the current
    one until none does.

    :param A: Input matrix.
    :param k: Pivot block size.
    :param config: ``SearchConfig``; defaults to ``gamma=3`` from the GECP pivot.
    :return: ``(PartialLU, SearchReport)``.
    """
    config = config or SearchConfig(gamma=DEFAULT_GE_GAMMA)
    state, report = search(GEMode(k), A, config)
    logger.info(f"GE search done: k={k}, gamma={config.gamma}, {report.path_length} swaps")
    return state.to_partial_lu(), report


def interpolative_bounds_ge(lu):
    """Returns ``(||W||_max, ||Z||_max)``, the left and right interpolative bounds."""
    return max_norm(lu.W), max_norm(lu.Z)


def ge_lowrank(lu):
    """
    Factors of ``A_k = X Y^T`` with ``X = P1^T [A11; W A11]`` and ``Y = P2 [I; Z^T]``.

    ``A - A_k`` vanishes on the pivot rows and columns; on the rest it equals ``S``.
    """
    m, n = lu.shape
    X = np.empty((m, lu.k))
    Y = np.empty((n, lu.k))
    X[lu.row_perm] = np.vstack([lu.A11, lu.W @ lu.A11])
    Y[lu.col_perm] = np.vstack([np.eye(lu.k), lu.Z.T])
    return X, Y
