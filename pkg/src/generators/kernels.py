"""
Kernel matrices sampled on Chebyshev points of ``[-1, 1]``.
"""
from dataclasses import dataclass

import numpy as np

from src.core.dense import as_dense

KERNELS = ("runge", "wendland", "runge_ring")
WENDLAND_ORDERS = (0, 1, 3)


@dataclass(frozen=True)
class KernelSpec:
    """
    :param kernel: ``"runge"`` (``1/(1 + beta (x^2+y^2)^2)``), ``"wendland"`` or ``"runge_ring"``
        (``1/(1 + 100 (1/2 - x^2 - y^2)^2)``).
    :param grid: Number of Chebyshev points per dimension, ``>= 2``.
    :param beta: Runge parameter, ``> 0``.
    :param s: Wendland smoothness, one of 0, 1, 3.
    """

    kernel: str
    grid: int
    beta: float = 1.0
    s: int = 0

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"Unknown kernel {self.kernel!r}; choose from {KERNELS}")
        if self.grid < 2:
            raise ValueError(f"grid must be >= 2, got {self.grid}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.kernel == "wendland" and self.s not in WENDLAND_ORDERS:
            raise ValueError(f"Wendland order must be one of {WENDLAND_ORDERS}, got {self.s}")

    @property
    def label(self):
        if self.kernel == "runge":
            return f"runge_beta{self.beta:g}"
        if self.kernel == "wendland":
            return f"wendland_s{self.s}"
        return "runge_ring"


def chebyshev_points(count):
    """``cos(i pi / (count - 1))`` for ``i = 0..count-1``, from 1 down to -1."""
    return np.cos(np.arange(count) * np.pi / (count - 1))


def wendland(d, s):
    t = np.clip(1.0 - d, 0.0, None)
    if s == 0:
        return t ** 2
    if s == 1:
        return t ** 4 * (4.0 * d + 1.0)
    return t ** 8 * (32.0 * d ** 3 + 25.0 * d ** 2 + 8.0 * d + 1.0)


def kernel_matrix(spec):
    """``A[i, j] = f(x_i, x_j)`` on the Chebyshev grid named by ``spec``."""
    x = chebyshev_points(spec.grid)
    X, Y = np.meshgrid(x, x, indexing="ij")
    if spec.kernel == "runge":
        A = 1.0 / (1.0 + spec.beta * (X ** 2 + Y ** 2) ** 2)
    elif spec.kernel == "runge_ring":
        A = 1.0 / (1.0 + 100.0 * (0.5 - X ** 2 - Y ** 2) ** 2)
    else:
        A = wendland(np.abs(X - Y), spec.s)
    return as_dense(A)
