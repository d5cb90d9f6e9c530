"""
Closed-form singular value factors and necessity bounds.
"""
import math
from dataclasses import dataclass

from src.search.neighbors import GE, QR


def _mode_name(mode):
    name = getattr(mode, "name", mode)
    if name not in (GE, QR):
        raise ValueError(f"Unknown mode: {name!r}")
    return name


@dataclass(frozen=True)
class BoundProfile:
    """
    :param gamma_or_mu: The gamma of a gamma-local maxvol pivot, or a measured pivot metric.
    :param mu_factor: Factor such that ``sigma_j(A) / mu <= sigma_j(A_k) <= mu * sigma_j(A)``.
    """

    mode: str
    m: int
    n: int
    k: int
    gamma_or_mu: float
    mu_factor: float

    def to_dict(self):
        return {
            "mode": self.mode,
            "m": self.m,
            "n": self.n,
            "k": self.k,
            "gamma_or_mu": self.gamma_or_mu,
            "mu_factor": self.mu_factor,
        }


def mu_factor(mode, m, n, k, gamma=1.0):
    """
    Evaluates the rank-revealing factor guaranteed by a ``gamma``-local maxvol pivot.

    GE: ``1 + 5 gamma^2 k sqrt(m n)``. QR: ``sqrt(1 + 5 gamma^2 k n)``.

    :return: ``BoundProfile``.
    """
    name = _mode_name(mode)
    if min(m, n) < 1 or k < 0:
        raise ValueError(f"Invalid dimensions m={m}, n={n}, k={k}")
    if gamma < 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    if name == GE:
        value = 1.0 + 5.0 * gamma ** 2 * k * math.sqrt(m * n)
    else:
        value = math.sqrt(1.0 + 5.0 * gamma ** 2 * k * n)
    return BoundProfile(name, m, n, k, float(gamma), value)


def necessity_gamma_bound(mode, mu, nu, m, n, k, form="measured"):
    """
    Largest gamma a pivot can have when its factorization reveals rank with factor ``mu``
    and has interpolative bound ``nu``.

    ``form="measured"``: GE ``nu^2 + mu^2``, QR ``sqrt(nu^2 + mu^4)``.
    ``form="uniform"``: the same with ``mu`` read as the factor on every
    singular value, GE ``nu^2 + mu^2 (1 + sqrt(k(m-k)) nu)(1 + sqrt(k(n-k)) nu)``,
    QR ``sqrt(nu^2 + (1 + sqrt(k(n-k)) nu)^2 mu^4)``.
    """
    name = _mode_name(mode)
    if mu < 0 or nu < 0:
        raise ValueError(f"mu and nu must be nonnegative, got mu={mu}, nu={nu}")
    if form == "measured":
        if name == GE:
            return nu ** 2 + mu ** 2
        return math.sqrt(nu ** 2 + mu ** 4)
    if form == "uniform":
        right = 1.0 + math.sqrt(k * (n - k)) * nu
        if name == GE:
            left = 1.0 + math.sqrt(k * (m - k)) * nu
            return nu ** 2 + mu ** 2 * left * right
        return math.sqrt(nu ** 2 + right ** 2 * mu ** 4)
    raise ValueError(f"Unknown bound form: {form!r}")
