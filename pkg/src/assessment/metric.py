"""
The pivot quality metric: the largest neighbour volume ratio, clamped below at 1.
"""
import numpy as np

from src.assessment.sandwich import guarded_ratio
from src.core.dense import as_dense
from src.core.svd import singular_values, zero_threshold
from src.factorization.ge import GEMode, PartialLU, interpolative_bounds_ge
from src.factorization.qr import PartialQR, QRMode, interpolative_bound_qr
from src.search.neighbors import GE, QR

MODES = {GE: GEMode, QR: QRMode}


def make_mode(mode, k):
    """Builds a search mode from ``"ge"``/``"qr"``; search modes pass through unchanged."""
    if hasattr(mode, "scan"):
        return mode
    try:
        return MODES[mode](k)
    except KeyError:
        raise ValueError(f"Unknown mode: {mode!r}") from None


def worst_neighbor_ratio(A, selection, mode):
    """
    Largest neighbour volume ratio of ``selection`` from the fast ratio formulas.

    :return: ``(ratio, move)``; ``(0.0, None)`` when there are no neighbours.
    :raises RankDeficientError: ``selection`` is singular.
    """
    A = as_dense(A)
    k = len(selection.col_idx)
    search_mode = make_mode(mode, k)
    state = search_mode.state_for(A, selection)
    scan = search_mode.scan(state, np.inf)
    return scan.max_ratio, scan.argmax_move


def mu_metric(A, selection, mode):
    """
    ``max(max over neighbours of vol(B') / vol(B), 1)`` for the submatrix ``B`` named by ``selection``.

    :param mode: ``"ge"`` (row and column swaps, single-sided ones included) or ``"qr"`` (column swaps).
    """
    return max(worst_neighbor_ratio(A, selection, mode)[0], 1.0)


def measured_mu_nu(A, factorization):
    """
    Rank-revealing and interpolative constants actually achieved by a factorization.

    ``mu = max(sigma_k(A) / sigma_k(A11), ||S||_2 / sigma_{k+1}(A))`` with
    ``R11``/``R22`` in place of ``A11``/``S`` for QR; ``nu`` is the
    interpolative bound (the larger of the two for GE).

    :return: ``(mu, nu)``.
    """
    A = as_dense(A)
    sigma = singular_values(A)
    atol = zero_threshold(sigma, A.shape)
    k = factorization.k
    sigma_k1 = sigma[k] if k < len(sigma) else 0.0
    if isinstance(factorization, PartialLU):
        leading = singular_values(factorization.A11)[-1]
        residual = singular_values(factorization.S)[0] if factorization.S.size else 0.0
        nu = max(interpolative_bounds_ge(factorization))
    elif isinstance(factorization, PartialQR):
        leading = singular_values(factorization.R11)[-1]
        residual_sv = factorization.residual_singular_values()
        residual = residual_sv[0] if residual_sv.size else 0.0
        nu = interpolative_bound_qr(factorization)
    else:
        raise TypeError(f"Unsupported factorization type {type(factorization).__name__}")
    mu = max(guarded_ratio(sigma[k - 1], leading, atol), guarded_ratio(residual, sigma_k1, atol))
    return float(mu), float(nu)
