"""
First-improving ascent on the volume submatrix graph.

The engine knows nothing about LU or QR. A ``SearchMode`` supplies the
greedy start, the cached state for a selection, and a scan that returns
the first neighbour whose volume ratio beats a threshold. Both GE and QR
searches run through ``search``.
"""
from dataclasses import dataclass

import numpy as np

from src.core.dense import Selection, as_dense, complete_permutation
from src.core.exceptions import IterationCapError, RankDeficientError
from src.core.logger import get_logger
from src.search.config import RANDOM_START_ATTEMPTS, SearchConfig, SearchReport, SwapRecord
from src.search.neighbors import apply_move

logger = get_logger(__name__)


@dataclass(frozen=True)
class ScanResult:
    """
    :param move: First move with ratio above the threshold, or ``None``.
    :param ratio: Ratio of ``move``.
    :param max_ratio: Largest ratio among the moves scanned.
    :param argmax_move: First move attaining ``max_ratio``.
    :param complete: Whether every neighbour was scanned.
    """

    move: object
    ratio: float
    max_ratio: float
    argmax_move: object
    complete: bool


class ScanTracker:
    """Walks ratio blocks in scan order, remembering the running maximum."""

    def __init__(self, threshold):
        self.threshold = threshold
        self.max_ratio = 0.0
        self.argmax_move = None

    def offer(self, ratios, to_move):
        """
        Scans one block of ratios laid out in C order of the scan.

        :param ratios: Array of nonnegative ratios.
        :param to_move: Maps a multi-index of ``ratios`` to a ``Move``.
        :return: A finished ``ScanResult`` when a ratio beats the threshold, else ``None``.
        """
        if ratios.size == 0:
            return None
        above = np.flatnonzero(ratios.ravel() > self.threshold)
        stop = above[0] if above.size else None
        scanned = ratios.ravel() if stop is None else ratios.ravel()[: stop + 1]
        best = int(np.argmax(scanned))
        if scanned[best] > self.max_ratio:
            self.max_ratio = float(scanned[best])
            self.argmax_move = to_move(np.unravel_index(best, ratios.shape))
        if stop is None:
            return None
        hit = to_move(np.unravel_index(stop, ratios.shape))
        return ScanResult(hit, float(ratios.ravel()[stop]), self.max_ratio, self.argmax_move, False)

    def finish(self):
        return ScanResult(None, 0.0, self.max_ratio, self.argmax_move, True)


class SearchMode:
    """
    Strategy interface for one flavour of maxvol search.

    Subclasses provide ``greedy_state``, ``build_state``, ``scan``,
    ``default_max_swaps`` and ``path_bound``. States expose ``row_perm``,
    ``col_perm``, ``k``, ``log_volume`` and ``selection``.
    """

    name = None

    def __init__(self, k):
        if int(k) < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.k = int(k)

    def __repr__(self):
        return f"{type(self).__name__}(k={self.k})"

    def check_shape(self, m, n):
        if self.k > min(m, n):
            raise ValueError(f"k={self.k} exceeds min(m, n)={min(m, n)}")

    def check_selection(self, selection, m, n):
        selection.validate(m, n)
        if selection.shape != (self.k, self.k):
            raise ValueError(f"Selection shape {selection.shape} does not match a {self.k}x{self.k} pivot")

    def random_selection(self, m, n, rng):
        rows = np.sort(rng.choice(m, size=self.k, replace=False))
        cols = np.sort(rng.choice(n, size=self.k, replace=False))
        return Selection(rows, cols)

    def state_for(self, A, selection):
        m, n = A.shape
        self.check_selection(selection, m, n)
        row_perm = complete_permutation(selection.row_idx, m)
        col_perm = complete_permutation(selection.col_idx, n)
        return self.build_state(A, row_perm, col_perm)

    def greedy_state(self, A):
        raise NotImplementedError

    def build_state(self, A, row_perm, col_perm):
        raise NotImplementedError

    def scan(self, state, threshold):
        raise NotImplementedError

    def default_max_swaps(self, m, n, config):
        raise NotImplementedError

    def path_bound(self, m, n, config):
        return None


def initial_state(mode, A, config):
    """
    Builds the starting state named by ``config.init``.

    :raises RankDeficientError: Singular start, or no nonsingular random start found.
    """
    init = config.init
    if init.kind == "greedy":
        return mode.greedy_state(A)
    if init.kind == "given":
        return mode.state_for(A, init.selection)
    rng = np.random.default_rng(init.seed)
    m, n = A.shape
    for attempt in range(RANDOM_START_ATTEMPTS):
        try:
            return mode.state_for(A, mode.random_selection(m, n, rng))
        except RankDeficientError:
            logger.debug(f"Random start {attempt} is singular, resampling")
    raise RankDeficientError(0, f"No nonsingular random start found in {RANDOM_START_ATTEMPTS} attempts")


def search(mode, A, config=None):
    """
    Runs the ascent and returns the final state together with its report.

    Each accepted move multiplies the volume by more than ``config.gamma``;
    the search stops once a complete scan finds no such move.

    :param mode: A ``SearchMode``.
    :param A: Input matrix.
    :param config: ``SearchConfig``; defaults to ``gamma=1`` from the greedy start.
    :raises RankDeficientError: The start is singular.
    :raises IterationCapError: More than ``max_swaps`` moves were accepted.
    """
    config = config or SearchConfig()
    A = as_dense(A)
    m, n = A.shape
    mode.check_shape(m, n)
    cap = config.max_swaps or mode.default_max_swaps(m, n, config)
    threshold = config.threshold

    state = initial_state(mode, A, config)
    start_selection = state.selection
    start_log_volume = state.log_volume
    swaps = []
    while True:
        scan = mode.scan(state, threshold)
        if scan.move is None:
            break
        if len(swaps) >= cap:
            partial = _report(mode, config, swaps, scan.max_ratio, start_log_volume, state, start_selection, cap, m, n)
            raise IterationCapError(cap, report=partial)
        row_perm, col_perm = apply_move(state.row_perm, state.col_perm, mode.k, scan.move)
        next_state = mode.build_state(A, row_perm, col_perm)
        swaps.append(SwapRecord(scan.move, scan.ratio, state.log_volume, next_state.log_volume))
        logger.debug(f"Swap {len(swaps)}: {scan.move} ratio={scan.ratio:.6g}")
        state = next_state

    report = _report(mode, config, swaps, scan.max_ratio, start_log_volume, state, start_selection, cap, m, n)
    logger.debug(f"{mode!r} search finished after {report.path_length} swaps, certified gamma {report.certified_gamma:.6g}")
    return state, report


def run_search(mode, A, config=None):
    """Runs the ascent and returns only the ``SearchReport``."""
    return search(mode, A, config)[1]


def _report(mode, config, swaps, certified, start_log_volume, state, start_selection, cap, m, n):
    return SearchReport(
        mode=mode.name,
        k=mode.k,
        gamma=config.gamma,
        swaps=tuple(swaps),
        certified_gamma=float(certified),
        start_log_volume=float(start_log_volume),
        end_log_volume=float(state.log_volume),
        start_selection=start_selection,
        selection=state.selection,
        max_swaps=int(cap),
        path_bound=mode.path_bound(m, n, config) if config.init.kind == "greedy" else None,
    )
