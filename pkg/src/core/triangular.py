import numpy as np
import scipy.linalg

from src.core.exceptions import SingularTriangularError


def solve_triangular(T, B, lower=False, side="left"):
    """
    Solves ``T X = B`` (``side="left"``) or ``X T = B`` (``side="right"``) for triangular ``T``.

    :param T: Square triangular matrix with a nonzero diagonal.
    :param B: Right-hand side, a vector or a matrix.
    :param lower: ``True`` when ``T`` is lower triangular.
    :param side: ``"left"`` or ``"right"``.
    :raises SingularTriangularError: A diagonal entry of ``T`` is zero; the error names its index.
    """
    T = np.asarray(T, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError(f"Triangular factor must be square, got shape {T.shape}")
    zeros = np.flatnonzero(np.diag(T) == 0.0)
    if zeros.size:
        raise SingularTriangularError(int(zeros[0]))
    if side == "left":
        return scipy.linalg.solve_triangular(T, B, lower=lower, check_finite=False)
    if side == "right":
        # X T = B  <=>  T^T X^T = B^T
        return scipy.linalg.solve_triangular(T, B.T, trans="T", lower=lower, check_finite=False).T
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")
