"""
Slow, independent oracles: exhaustive global search and the local maxvol verifier.

Volumes here always come from fresh singular values of extracted
submatrices; nothing is shared with the fast ratio formulas.
"""
from itertools import combinations, islice
from typing import NamedTuple

import numpy as np
from scipy.special import comb

from src.core.dense import Selection, as_dense, complete_permutation
from src.core.exceptions import RankDeficientError, SizeGuardError
from src.core.svd import log_volume, log_volumes
from src.search.config import DEFAULT_TIE_TOL
from src.search.neighbors import QR, neighbors

BRUTE_FORCE_LIMIT = 10 ** 7
BATCH = 4096


class Certificate(NamedTuple):
    passed: bool
    worst_ratio: float
    worst_move: object


def brute_force_global_maxvol(A, p, q, limit=BRUTE_FORCE_LIMIT):
    """
    Finds a ``p`` x ``q`` submatrix of largest volume by trying all of them.

    Ties go to the first submatrix in lexicographic (rows, cols) order.

    :return: ``(Selection, log_volume)``.
    :raises SizeGuardError: ``C(m, p) * C(n, q)`` exceeds ``limit``.
    """
    A = as_dense(A)
    m, n = A.shape
    if not (1 <= p <= m and 1 <= q <= n):
        raise ValueError(f"Submatrix size {p}x{q} does not fit in {m}x{n}")
    count = int(comb(m, p, exact=True)) * int(comb(n, q, exact=True))
    if count > limit:
        raise SizeGuardError(count, limit)

    best_lv = -np.inf
    best = None
    for rows in combinations(range(m), p):
        row_block = A[list(rows)]
        col_iter = combinations(range(n), q)
        while True:
            cols = list(islice(col_iter, BATCH))
            if not cols:
                break
            idx = np.array(cols, dtype=np.intp)
            stack = row_block[:, idx].transpose(1, 0, 2)
            lvs = log_volumes(stack)
            top = int(np.argmax(lvs))
            if lvs[top] > best_lv:
                best_lv = float(lvs[top])
                best = Selection(rows, cols[top])
    if best is None:
        best = Selection(tuple(range(p)), tuple(range(q)))
    return best, best_lv


def _mode_selection_size(mode, m):
    return (m, mode.k) if mode.name == QR else (mode.k, mode.k)


def exact_neighbor_ratios(mode, A, selection):
    """
    Volume ratio of every neighbour of ``selection``, in scan order, from extracted submatrices.

    :return: ``(moves, ratios)``.
    :raises RankDeficientError: ``selection`` has zero volume.
    """
    A = as_dense(A)
    m, n = A.shape
    selection.validate(m, n)
    if selection.shape != _mode_selection_size(mode, m):
        raise ValueError(f"Selection shape {selection.shape} does not fit {mode!r}")
    base = log_volume(A[np.ix_(selection.row_idx, selection.col_idx)])
    if base == -np.inf:
        raise RankDeficientError(0, "Selection has zero volume")

    p, q = selection.shape
    row_perm = complete_permutation(selection.row_idx, m)
    col_perm = complete_permutation(selection.col_idx, n)
    moves = list(neighbors(mode, m, n))
    ratios = np.empty(len(moves))
    for start in range(0, len(moves), BATCH):
        chunk = moves[start:start + BATCH]
        rows = np.tile(row_perm[:p], (len(chunk), 1))
        cols = np.tile(col_perm[:q], (len(chunk), 1))
        for b, move in enumerate(chunk):
            if move.swaps_rows:
                rows[b, move.row_out] = row_perm[p + move.row_in]
            if move.swaps_cols:
                cols[b, move.col_out] = col_perm[q + move.col_in]
        stack = A[rows[:, :, None], cols[:, None, :]]
        with np.errstate(under="ignore"):
            ratios[start:start + len(chunk)] = np.exp(log_volumes(stack) - base)
    return moves, ratios


def verify_local_maxvol(mode, A, selection, gamma=1.0, tie_tol=DEFAULT_TIE_TOL):
    """
    Checks that no neighbour of ``selection`` has more than ``gamma`` times its volume.

    Zero-volume neighbours have ratio 0 and never fail the check.

    :return: ``Certificate(passed, worst_ratio, worst_move)``; ``worst_move`` is
        ``None`` when there are no neighbours.
    """
    moves, ratios = exact_neighbor_ratios(mode, A, selection)
    if not moves:
        return Certificate(True, 0.0, None)
    worst = int(np.argmax(ratios))
    worst_ratio = float(ratios[worst])
    return Certificate(worst_ratio <= gamma * (1.0 + tie_tol), worst_ratio, moves[worst])
