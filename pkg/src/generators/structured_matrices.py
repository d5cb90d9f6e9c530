"""
Structured matrices with known pivoting behaviour.

Index conventions are 0-based; the closed forms in docstrings are written
with 1-based ``i`` where that reads more naturally.
"""
import math

import numpy as np

from src.core.dense import as_dense

KAHAN_TAU = 1e-7


def example_2_1():
    """
    The 4x4 block diagonal matrix ``[[1, 3], [3, 1]] (+) [[sqrt 3, 2], [2, -sqrt 3]]``.

    Its leading and trailing 2x2 blocks (volumes 8 and 7) are its only local maximum volume 2x2 submatrices.
    """
    r3 = math.sqrt(3.0)
    return as_dense(
        [
            [1.0, 3.0, 0.0, 0.0],
            [3.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, r3, 2.0],
            [0.0, 0.0, 2.0, -r3],
        ]
    )


def kahan(n, s, tau=KAHAN_TAU):
    """
    Upper-triangular Kahan matrix with ``c^2 + s^2 = 1``.

    Row ``i`` (0-based) has ``c^i`` on the diagonal and ``-s c^i`` to its right.
    Column ``j`` is then scaled by ``1 - j * tau`` so that column pivoting
    keeps the natural order in floating point; ``tau=0`` gives the unscaled matrix.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    c = math.sqrt(1.0 - s * s)
    powers = c ** np.arange(n)
    K = np.triu(np.full((n, n), -s), k=1) + np.eye(n)
    K = powers[:, None] * K
    K = K * (1.0 - tau * np.arange(n))[None, :]
    return as_dense(K)


def kahan_gram(n, s, tau=KAHAN_TAU):
    """``K^T K`` for the (scaled) Kahan matrix; complete pivoting leaves it in natural order."""
    K = kahan(n, s, tau)
    return as_dense(K.T @ K)


def sharpness_ge(m, n, k):
    """
    ``m`` x ``n`` matrix whose principal ``k`` x ``k`` block is a local maximum volume pivot
    with a large Schur complement.

    Leading block: ``k+1`` on the diagonal, ``-1`` off it. Trailing block: all ``k+1``.
    Off-diagonal blocks: all ``-1``. Then ``A11^{-1} = (2I + ones) / (2(k+2))`` and
    ``S = (k+2)/2 * ones``.
    """
    if not 2 <= k <= min(m, n):
        raise ValueError(f"Need 2 <= k <= min(m, n), got k={k} for {m}x{n}")
    A = -np.ones((m, n))
    A[:k, :k] += (k + 2) * np.eye(k)
    A[k:, k:] = k + 1
    return as_dense(A)


def sharpness_ge_companion(m, n, k):
    """
    Rank ``<= k`` matrix ``B_k`` that differs from ``sharpness_ge(m, n, k)`` only in the
    off-diagonal entries of the leading block, which become ``-1 - beta`` with
    ``beta = (k+2)/(k^2-1)``. ``||A - B_k||_F <= 2`` bounds ``sigma_{k+1}(A)``.
    """
    A = np.array(sharpness_ge(m, n, k))
    beta = (k + 2) / (k * k - 1)
    off = ~np.eye(k, dtype=bool)
    A[:k, :k][off] -= beta
    return as_dense(A)


def sharpness_qr(k, n):
    """
    ``(k+1)`` x ``n`` upper-trapezoidal matrix whose Gram matrix is ``sharpness_ge(n, n, k)``.

    With 1-based ``i``, ``d_i = sqrt(k-i+2)/sqrt(k-i+3)`` and
    ``a_i = -1/sqrt((k-i+2)(k-i+3))``. Column ``j <= k`` holds ``a_1..a_{j-1}``
    above ``d_j``; every trailing column holds ``a_1..a_k`` above ``d_{k+1}``.
    The whole matrix is scaled by ``sqrt(k+2)``.
    """
    if k < 2 or n < k + 1:
        raise ValueError(f"Need k >= 2 and n >= k+1, got k={k}, n={n}")
    i = np.arange(1, k + 2)
    d = np.sqrt(k - i + 2.0) / np.sqrt(k - i + 3.0)
    a = -1.0 / np.sqrt((k - i + 2.0) * (k - i + 3.0))
    A = np.zeros((k + 1, n))
    for col in range(k):
        A[:col, col] = a[:col]
        A[col, col] = d[col]
    A[:k, k:] = a[:k, None]
    A[k, k:] = d[k]
    return as_dense(math.sqrt(k + 2.0) * A)


def necessity_example(which, param):
    """
    Pivots that satisfy the necessity conditions yet are only gamma-local maxima.

    ``which="mu"``: ``diag(1, 1/mu, mu, 1)`` with ``k = 2``; the principal pivot has metric ``mu^2``.
    ``which="nu"``: the 5x5 matrix with ``k = 3`` whose principal identity pivot has
    interpolative bounds ``nu`` and metric ``nu^2``.
    """
    if not param > 1.0:
        raise ValueError(f"Parameter must exceed 1, got {param}")
    if which == "mu":
        return as_dense(np.diag([1.0, 1.0 / param, param, 1.0]))
    if which == "nu":
        nu = param
        return as_dense(
            [
                [1.0, 0.0, 0.0, 1.0, 0.0],
                [0.0, 1.0, 0.0, nu, 0.0],
                [0.0, 0.0, 1.0, 0.0, 0.0],
                [-nu, 1.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 0.0, 1.0],
            ]
        )
    raise ValueError(f"Unknown necessity example: {which!r}")


NECESSITY_K = {"mu": 2, "nu": 3}
