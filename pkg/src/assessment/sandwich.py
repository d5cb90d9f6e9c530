"""
Checks the two-sided singular value bounds of a rank-``k`` approximation ``A_k = X Y^T``:

    sigma_j(A) / mu <= sigma_j(A_k) <= mu * sigma_j(A)              for j <= k
    sigma_{k+j}(A) <= sigma_j(A - A_k) <= mu * sigma_{k+j}(A)      for all j
"""
import json
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from src.core.dense import as_dense
from src.core.logger import get_logger
from src.core.svd import EPS, singular_values
from src.search.config import SCHEMA_VERSION

logger = get_logger(__name__)

RELATIVE_SLACK = 1e-9
ABSOLUTE_SLACK_FACTOR = 64


def lowrank_singular_values(X, Y):
    """
    Singular values of ``X Y^T`` without forming it: ``X = Q R``, then the SVD of the small ``R Y^T``.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape[1] == 0:
        return np.zeros(0)
    _, R = np.linalg.qr(X)
    return singular_values(R @ Y.T)


@dataclass(frozen=True)
class SandwichReport:
    """
    Worst observed ratios against the claimed factor ``mu``.

    ``worst_leading_ratio`` is the largest of ``sigma_j(A)/sigma_j(A_k)`` and
    ``sigma_j(A_k)/sigma_j(A)`` over ``j <= k``; ``worst_residual_ratio`` is the
    largest ``sigma_j(A - A_k) / sigma_{k+j}(A)``; ``lower_violation`` is the
    largest ``sigma_{k+j}(A) / sigma_j(A - A_k)``, at most 1 when the lower
    residual bound holds.
    """

    mu: float
    k: int
    passed: bool
    violations: int
    worst_leading_ratio: float
    worst_residual_ratio: float
    lower_violation: float
    sigma_A: np.ndarray
    sigma_Ak: np.ndarray
    sigma_residual: np.ndarray

    @property
    def worst_ratio(self):
        return max(self.worst_leading_ratio, self.worst_residual_ratio)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "mu": self.mu,
            "k": self.k,
            "passed": self.passed,
            "violations": self.violations,
            "worst_ratio": self.worst_ratio,
            "worst_leading_ratio": self.worst_leading_ratio,
            "worst_residual_ratio": self.worst_residual_ratio,
            "lower_violation": self.lower_violation,
        }

    def to_frame(self):
        """One row per ``j``: ``sigma_A``, ``sigma_Ak`` (blank past ``k``), ``sigma_residual``."""
        r = len(self.sigma_A)
        sigma_Ak = np.full(r, np.nan)
        sigma_Ak[: len(self.sigma_Ak)] = self.sigma_Ak[:r]
        sigma_residual = np.full(r, np.nan)
        sigma_residual[: len(self.sigma_residual)] = self.sigma_residual[:r]
        return pd.DataFrame(
            {"j": np.arange(1, r + 1), "sigma_A": self.sigma_A, "sigma_Ak": sigma_Ak, "sigma_residual": sigma_residual}
        )

    def save(self, folder, stem):
        """Writes ``<stem>.json`` and ``<stem>.csv`` into ``folder``."""
        os.makedirs(folder, exist_ok=True)
        json_path = os.path.join(folder, f"{stem}.json")
        csv_path = os.path.join(folder, f"{stem}.csv")
        with open(json_path, "w") as handle:
            json.dump(self.to_dict(), handle, indent=2)
        self.to_frame().to_csv(csv_path, index=False)
        logger.info(f"Sandwich report saved as: {json_path}")
        return json_path, csv_path


def guarded_ratio(num, den, atol):
    """``num / den``, reading ``0 / 0`` as 1 and ``x / 0`` as infinity below ``atol``."""
    if den > atol:
        return num / den
    return 1.0 if num <= atol else np.inf


def validate_sandwich(A, factors, mu):
    """
    Checks every singular value inequality for ``A_k = X Y^T`` against the factor ``mu``.

    :param A: The matrix.
    :param factors: ``(X, Y)`` with ``X`` of shape ``m x k`` and ``Y`` of shape ``n x k``.
    :param mu: Claimed factor, ``>= 1``.
    :return: ``SandwichReport``.
    """
    A = as_dense(A)
    X, Y = (np.asarray(f, dtype=np.float64) for f in factors)
    k = X.shape[1]
    m, n = A.shape
    sigma_A = singular_values(A)
    sigma_Ak = lowrank_singular_values(X, Y)[:k]
    sigma_res = singular_values(A - X @ Y.T)
    atol = ABSOLUTE_SLACK_FACTOR * EPS * max(m, n) * (sigma_A[0] if sigma_A.size else 0.0)
    slack = 1.0 + RELATIVE_SLACK

    def holds(lhs, rhs):
        return lhs <= rhs * slack + atol

    violations = 0
    leading = [1.0]
    for j in range(min(k, len(sigma_A))):
        a, ak = sigma_A[j], sigma_Ak[j]
        violations += not holds(a / mu, ak)
        violations += not holds(ak, mu * a)
        leading.append(max(guarded_ratio(a, ak, atol), guarded_ratio(ak, a, atol)))

    residual = [1.0]
    lower = [0.0]
    for j in range(max(len(sigma_A) - k, 0)):
        a, res = sigma_A[k + j], sigma_res[j]
        violations += not holds(a, res)
        violations += not holds(res, mu * a)
        residual.append(guarded_ratio(res, a, atol))
        lower.append(guarded_ratio(a, res, atol))

    report = SandwichReport(
        mu=float(mu),
        k=k,
        passed=violations == 0,
        violations=int(violations),
        worst_leading_ratio=float(max(leading)),
        worst_residual_ratio=float(max(residual)),
        lower_violation=float(max(lower)),
        sigma_A=sigma_A,
        sigma_Ak=sigma_Ak,
        sigma_residual=sigma_res,
    )
    if not report.passed:
        logger.warning(f"Sandwich check failed: {violations} violated inequalities at mu={mu:.6g}")
    return report
