"""
Singular value oracle and the volume primitive.

``svd`` defaults to LAPACK through ``numpy.linalg.svd``; ``method="jacobi"``
runs a self-contained one-sided Jacobi iteration (numpy arrays only) that
serves as an independent cross-check on small matrices.

Rank decisions treat singular values at or below
``eps * sigma_1 * max(m, n)`` as exactly zero.
"""
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from src.core.exceptions import SvdConvergenceError

EPS = np.finfo(np.float64).eps
DEFAULT_MAX_SWEEPS = 60


@dataclass(frozen=True)
class SvdResult:
    """
    Thin SVD ``A = U diag(s) V^T`` with ``r = min(m, n)`` singular triplets.

    :param singular_values: Nonincreasing, nonnegative, length ``r``.
    :param left_vectors: ``m`` x ``r`` with orthonormal columns.
    :param right_vectors: ``n`` x ``r`` with orthonormal columns.
    """

    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    def reconstruct(self):
        return (self.left_vectors * self.singular_values) @ self.right_vectors.T


def svd(A, method="lapack", max_sweeps=DEFAULT_MAX_SWEEPS):
    """
    Computes the thin singular value decomposition of ``A``.

    :param A: Finite ``m`` x ``n`` matrix.
    :param method: ``"lapack"`` (default) or ``"jacobi"``.
    :param max_sweeps: Sweep cap for the Jacobi iteration.
    :return: An ``SvdResult``.
    :raises SvdConvergenceError: The chosen method failed to converge.
    """
    A = np.asarray(A, dtype=np.float64)
    if method == "lapack":
        try:
            U, s, Vt = np.linalg.svd(A, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise SvdConvergenceError(0) from exc
        return SvdResult(s, U, Vt.T)
    if method == "jacobi":
        return _jacobi_svd(A, max_sweeps)
    raise ValueError(f"Unknown SVD method: {method!r}")


def _jacobi_svd(A, max_sweeps):
    m, n = A.shape
    if m < n:
        result = _jacobi_svd(A.T, max_sweeps)
        return SvdResult(result.singular_values, result.right_vectors, result.left_vectors)

    G = A.copy()
    V = np.eye(n)
    tol = m * EPS
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = G[:, p] @ G[:, p]
                beta = G[:, q] @ G[:, q]
                gamma = G[:, p] @ G[:, q]
                if gamma == 0.0 or abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                gp = G[:, p].copy()
                G[:, p] = c * gp - s * G[:, q]
                G[:, q] = s * gp + c * G[:, q]
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
        if not rotated:
            break
    else:
        raise SvdConvergenceError(max_sweeps)

    sigma = np.sqrt(np.einsum("ij,ij->j", G, G))
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    G = G[:, order]
    V = V[:, order]
    U = np.zeros((m, n))
    cutoff = zero_threshold(sigma, (m, n))
    live = sigma > cutoff
    U[:, live] = G[:, live] / sigma[live]
    sigma = np.where(live, sigma, 0.0)
    _complete_orthonormal(U, live)
    return SvdResult(sigma, U, V)


def _complete_orthonormal(U, live):
    """Fills the dead columns of ``U`` with unit vectors orthogonal to the rest (Gram-Schmidt on e_i)."""
    m = U.shape[0]
    basis = [U[:, j] for j in np.flatnonzero(live)]
    candidates = iter(range(m))
    for j in np.flatnonzero(~live):
        for i in candidates:
            v = np.zeros(m)
            v[i] = 1.0
            for _ in range(2):
                for b in basis:
                    v -= (b @ v) * b
            norm = np.linalg.norm(v)
            if norm > 0.5:
                U[:, j] = v / norm
                basis.append(U[:, j])
                break


def zero_threshold(singular_values, shape):
    if len(singular_values) == 0:
        return 0.0
    return EPS * float(singular_values[0]) * max(shape)


def singular_values(A):
    A = np.asarray(A, dtype=np.float64)
    try:
        return np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise SvdConvergenceError(0) from exc


def numerical_rank(A):
    s = singular_values(A)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > zero_threshold(s, np.shape(A))))


def log_volume(A):
    """
    Returns ``sum(log sigma_j)`` over ``j = 1..min(m, n)``; ``-inf`` when ``A`` is rank deficient.

    Search loops compare volumes in log space because the raw product
    overflows or underflows for large blocks.
    """
    s = singular_values(A)
    if s[0] == 0.0 or s[-1] <= zero_threshold(s, np.shape(A)):
        return float("-inf")
    return float(np.sum(np.log(s)))


def volume(A):
    """Product of the singular values of ``A`` (``|det A|`` for square ``A``); 0 when rank deficient."""
    s = singular_values(A)
    if s[0] == 0.0 or s[-1] <= zero_threshold(s, np.shape(A)):
        return 0.0
    return float(np.prod(s))


def log_volumes(stack):
    """Log-volumes of a stack of equally sized matrices, shape ``(b, p, q)``."""
    stack = np.asarray(stack, dtype=np.float64)
    s = np.linalg.svd(stack, compute_uv=False)
    cutoff = EPS * s[:, :1] * max(stack.shape[1:])
    with np.errstate(divide="ignore"):
        logs = np.log(np.where(s > cutoff, s, 0.0))
    out = np.sum(logs, axis=1)
    out[s[:, 0] == 0.0] = -np.inf
    return out


def abs_det_lu(A):
    """``|det A|`` from an LU factorization with partial pivoting."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, _ = scipy.linalg.lu_factor(np.asarray(A, dtype=np.float64), check_finite=False)
    return float(np.abs(np.prod(np.diag(lu))))
