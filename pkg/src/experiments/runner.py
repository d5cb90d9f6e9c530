"""
Desk-scale reproductions of the pivoting experiments.

Every run writes its artifacts into ``<out>/<experiment name>/`` with file
names stamped by the experiment parameters and seed: a per-trial CSV and a
JSON summary carrying ``schema_version``. Soft thresholds are logged as
warnings; hard checks land in the summary as booleans.
"""
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations, product

import numpy as np
import pandas as pd

from src.assessment.bounds import mu_factor
from src.assessment.metric import mu_metric
from src.assessment.sandwich import validate_sandwich
from src.core.dense import Selection
from src.core.exceptions import RankDeficientError
from src.core.logger import get_logger
from src.factorization.ge import GEMode, build_ge_state, gecp_partial, ge_local_maxvol, ge_lowrank, ge_ratio
from src.factorization.qr import QRMode, cholesky_link_check, cpqr_partial, qr_local_maxvol
from src.generators.kernels import KernelSpec, kernel_matrix
from src.generators import structured_matrices
from src.generators.random_matrices import gaussian, trial_rng
from src.search.config import DEFAULT_GE_GAMMA, DEFAULT_QR_GAMMA, SCHEMA_VERSION, InitStrategy, SearchConfig
from src.search.engine import run_search
from src.search.oracle import verify_local_maxvol

logger = get_logger(__name__)

GECP_METRIC_SOFT_MAX = 2.5
CPQR_METRIC_SOFT_MAX = 1.6
GECP_METRIC_OBSERVED = 2.0
CPQR_METRIC_OBSERVED = math.sqrt(2.0)
TIMING_SOFT_MAX = 4.0
KERNEL_METRIC_SOFT_MAX = 2.0


def _pathlen_trial(task):
    A, k, gamma, trial, rows, cols = task
    config = SearchConfig(gamma=gamma, init=InitStrategy.given(Selection(rows, cols)))
    try:
        report = run_search(GEMode(k), A, config)
    except RankDeficientError:
        return {"trial": trial, "start_rows": list(rows), "start_cols": list(cols), "path_length": np.nan,
                "certified_gamma": np.nan, "end_log_volume": np.nan, "end_rows": None, "end_cols": None}
    return {
        "trial": trial,
        "start_rows": list(rows),
        "start_cols": list(cols),
        "path_length": report.path_length,
        "certified_gamma": report.certified_gamma,
        "end_log_volume": report.end_log_volume,
        "end_rows": sorted(report.selection.row_idx),
        "end_cols": sorted(report.selection.col_idx),
    }


def _metric_trial(task):
    m, n, k, seed, trial = task
    A = gaussian(m, n, seed, trial)
    lu = gecp_partial(A, k)
    qr = cpqr_partial(A, k)
    return {
        "trial": trial,
        "mu_gecp": mu_metric(A, lu.selection, "ge"),
        "mu_cpqr": mu_metric(A, qr.selection, "qr"),
    }


class ExperimentRunner:
    def __init__(self, spec, out_dir="results"):
        """
        :param spec: The ``ExperimentSpec`` to run.
        :param out_dir: Base results folder; artifacts go to a sub-folder named after the experiment.
        """
        self.spec = spec
        self.results_dir = os.path.abspath(out_dir)
        os.makedirs(self.results_dir, exist_ok=True)
        self.experiment_dir = os.path.join(self.results_dir, spec.name)
        os.makedirs(self.experiment_dir, exist_ok=True)

    def run(self):
        """Runs the experiment and returns its summary dictionary."""
        logger.info(f"Running experiment {self.spec.name} ({self.spec.stem})...")
        summary = getattr(self, self.spec.name)()
        payload = {"schema_version": SCHEMA_VERSION, "experiment": self.spec.name, "parameters": self.spec.to_dict()}
        payload.update(summary)
        self.save_json(payload, self.spec.stem)
        return payload

    def _map(self, fn, tasks):
        if self.spec.workers > 1:
            with ProcessPoolExecutor(max_workers=self.spec.workers) as pool:
                return list(pool.map(fn, tasks, chunksize=16))
        return [fn(task) for task in tasks]

    def save_table(self, frame, name):
        path = os.path.join(self.experiment_dir, f"{name}.csv")
        frame.to_csv(path, index=False)
        logger.info(f"Results saved as: {path}")
        return path

    def save_json(self, payload, name):
        path = os.path.join(self.experiment_dir, f"{name}.json")
        with open(path, "w") as handle:
            json.dump(payload, handle, indent=2, default=_json_default)
        logger.info(f"Results saved as: {path}")
        return path

    def pathlen_sweep(self):
        """Walks the GE search from many starts on one Gaussian matrix and tabulates path lengths."""
        spec = self.spec
        m, n = spec.dims
        A = gaussian(m, n, spec.seed)
        if spec.full:
            starts = list(product(combinations(range(m), spec.k), combinations(range(n), spec.k)))
        else:
            mode = GEMode(spec.k)
            starts = []
            for trial in range(spec.trials):
                sel = mode.random_selection(m, n, trial_rng(spec.seed, trial))
                starts.append((sel.row_idx, sel.col_idx))
        tasks = [(A, spec.k, spec.gamma, t, rows, cols) for t, (rows, cols) in enumerate(starts)]
        frame = pd.DataFrame(self._map(_pathlen_trial, tasks))
        self.save_table(frame, spec.stem)

        lengths = frame["path_length"].dropna().astype(int)
        histogram = lengths.value_counts().sort_index().rename_axis("path_length").reset_index(name="count")
        self.save_table(histogram, f"{spec.stem}_hist")
        maxima = {(tuple(r), tuple(c)) for r, c in zip(frame["end_rows"], frame["end_cols"]) if r is not None}
        return {
            "starts": len(starts),
            "singular_starts": int(frame["path_length"].isna().sum()),
            "max_path_length": int(lengths.max()) if len(lengths) else 0,
            "mean_path_length": float(lengths.mean()) if len(lengths) else 0.0,
            "distinct_local_maxima": len(maxima),
            "all_certified": bool((frame["certified_gamma"].dropna() <= spec.gamma * (1 + 1e-10)).all()),
        }

    def timing_sweep(self):
        """Times greedy pivoting against the near-local maxvol searches that start from it."""
        spec = self.spec
        m, n = spec.dims
        A = gaussian(m, n, spec.seed)
        ge_gamma = spec.gamma or DEFAULT_GE_GAMMA
        qr_gamma = spec.gamma or DEFAULT_QR_GAMMA
        rows = []
        for k in spec.k_values:
            started = time.perf_counter()
            gecp_partial(A, k)
            t_gecp = time.perf_counter() - started
            started = time.perf_counter()
            _, ge_report = ge_local_maxvol(A, k, SearchConfig(gamma=ge_gamma))
            t_ge = time.perf_counter() - started
            started = time.perf_counter()
            cpqr_partial(A, k)
            t_cpqr = time.perf_counter() - started
            started = time.perf_counter()
            _, qr_report = qr_local_maxvol(A, k, SearchConfig(gamma=qr_gamma))
            t_qr = time.perf_counter() - started
            row = {
                "k": k,
                "gecp_seconds": t_gecp,
                "ge_maxvol_seconds": t_ge,
                "ge_ratio": t_ge / t_gecp,
                "ge_path_length": ge_report.path_length,
                "cpqr_seconds": t_cpqr,
                "qr_maxvol_seconds": t_qr,
                "qr_ratio": t_qr / t_cpqr,
                "qr_path_length": qr_report.path_length,
            }
            for label in ("ge_ratio", "qr_ratio"):
                if row[label] > TIMING_SOFT_MAX:
                    logger.warning(f"k={k}: {label} {row[label]:.2f} exceeds {TIMING_SOFT_MAX}x")
            rows.append(row)
        frame = pd.DataFrame(rows)
        self.save_table(frame, spec.stem)
        return {
            "max_ge_ratio": float(frame["ge_ratio"].max()),
            "max_qr_ratio": float(frame["qr_ratio"].max()),
            "soft_max_ratio": TIMING_SOFT_MAX,
        }

    def metric_hist(self):
        """Distribution of the pivot metric of GECP and CPQR pivots on seeded Gaussian matrices."""
        spec = self.spec
        m, n = spec.dims
        tasks = [(m, n, spec.k, spec.seed, trial) for trial in range(spec.trials)]
        frame = pd.DataFrame(self._map(_metric_trial, tasks))
        self.save_table(frame, spec.stem)

        edges = np.linspace(1.0, max(frame["mu_gecp"].max(), frame["mu_cpqr"].max(), 1.0) + 1e-12, 41)
        hist = pd.DataFrame({
            "bin_left": edges[:-1],
            "bin_right": edges[1:],
            "gecp_count": np.histogram(frame["mu_gecp"], bins=edges)[0],
            "cpqr_count": np.histogram(frame["mu_cpqr"], bins=edges)[0],
        })
        self.save_table(hist, f"{spec.stem}_hist")

        max_gecp = float(frame["mu_gecp"].max())
        max_cpqr = float(frame["mu_cpqr"].max())
        if max_gecp > GECP_METRIC_SOFT_MAX:
            logger.warning(f"Largest GECP metric {max_gecp:.4f} exceeds {GECP_METRIC_SOFT_MAX}")
        if max_cpqr > CPQR_METRIC_SOFT_MAX:
            logger.warning(f"Largest CPQR metric {max_cpqr:.4f} exceeds {CPQR_METRIC_SOFT_MAX}")
        return {
            "max_mu_gecp": max_gecp,
            "max_mu_cpqr": max_cpqr,
            "soft_max_gecp": GECP_METRIC_SOFT_MAX,
            "soft_max_cpqr": CPQR_METRIC_SOFT_MAX,
            "observed_ceiling_gecp": GECP_METRIC_OBSERVED,
            "observed_ceiling_cpqr": CPQR_METRIC_OBSERVED,
        }

    def kernel_sv(self):
        """GECP singular value estimates on kernel matrices, checked against the metric-driven bound."""
        spec = self.spec
        grid = spec.dims[0]
        results = []
        for kernel, beta, s in spec.kernels:
            kspec = KernelSpec(kernel, grid, beta=beta, s=int(s))
            A = kernel_matrix(kspec)
            lu = gecp_partial(A, spec.k)
            metric = mu_metric(A, lu.selection, "ge")
            profile = mu_factor("ge", grid, grid, spec.k, gamma=metric)
            report = validate_sandwich(A, ge_lowrank(lu), profile.mu_factor)
            self.save_table(report.to_frame(), f"{spec.stem}_{kspec.label}")
            if metric > KERNEL_METRIC_SOFT_MAX:
                logger.warning(f"{kspec.label}: GECP metric {metric:.4f} exceeds {KERNEL_METRIC_SOFT_MAX}")
            results.append({
                "kernel": kspec.label,
                "mu_b": metric,
                "mu_factor": profile.mu_factor,
                "sandwich_passed": report.passed,
                "worst_leading_ratio": report.worst_leading_ratio,
                "worst_residual_ratio": report.worst_residual_ratio,
            })
        frame = pd.DataFrame(results)
        self.save_table(frame, spec.stem)
        return {"kernels": results, "all_sandwich_passed": bool(frame["sandwich_passed"].all())}

    def sharpness(self):
        """The principal pivot of the sharpness matrices: certified local maxvol with a large residual."""
        spec = self.spec
        m, n = spec.dims
        k = spec.k
        A = structured_matrices.sharpness_ge(m, n, k)
        principal = Selection.leading(k)
        lu, report = ge_local_maxvol(A, k, SearchConfig(gamma=1.0, init=InitStrategy.given(principal)))
        certificate = verify_local_maxvol(GEMode(k), A, principal, gamma=1.0)
        state = build_ge_state(A, lu.row_perm, lu.col_perm, k)
        sandwich = validate_sandwich(A, ge_lowrank(lu), mu_factor("ge", m, n, k).mu_factor)
        self.save_table(sandwich.to_frame(), f"{spec.stem}_sv")

        A_qr = structured_matrices.sharpness_qr(k, n)
        _, qr_report = qr_local_maxvol(A_qr, k, SearchConfig(gamma=1.0, init=InitStrategy.given(Selection.leading(k, k + 1))))
        link = cholesky_link_check(A_qr, k, Selection.leading(k, k + 1))

        residual_top = float(sandwich.sigma_residual[0])
        sigma_next = float(sandwich.sigma_A[k])
        return {
            "ge_path_length": report.path_length,
            "certified": certificate.passed,
            "worst_neighbor_ratio": certificate.worst_ratio,
            "single_entry_swap_ratio": ge_ratio(state, 0, 0, None, None),
            "sigma1_residual": residual_top,
            "sigma_k_plus_1": sigma_next,
            "residual_ratio": residual_top / sigma_next,
            "residual_ratio_floor": (k + 2) * math.sqrt((m - k) * (n - k)) / 4,
            "qr_path_length": qr_report.path_length,
            "cholesky_link_agree": link.agree,
        }

    def kahan(self):
        """Greedy pivots on the Kahan matrix (QR) and its Gram matrix (GE) against the metric floors."""
        spec = self.spec
        n = spec.dims[0]
        s = spec.s
        k = n - 1
        K = structured_matrices.kahan(n, s)
        G = structured_matrices.kahan_gram(n, s)
        qr = cpqr_partial(K, k)
        lu = gecp_partial(G, k)
        leading_cols = Selection.leading(k, n)
        leading = Selection.leading(k)

        rows = [
            {
                "mode": "qr",
                "greedy_keeps_order": sorted(qr.selection.col_idx) == list(range(k)),
                "mu_b": mu_metric(K, leading_cols, "qr"),
                "verifier_worst_ratio": verify_local_maxvol(QRMode(k), K, leading_cols).worst_ratio,
                "floor": s * (1 + s) ** (k - 1),
            },
            {
                "mode": "ge",
                "greedy_keeps_order": sorted(lu.selection.row_idx) == list(range(k))
                and sorted(lu.selection.col_idx) == list(range(k)),
                "mu_b": mu_metric(G, leading, "ge"),
                "verifier_worst_ratio": verify_local_maxvol(GEMode(k), G, leading).worst_ratio,
                "floor": s ** 2 * (1 + s) ** (2 * (k - 1)),
            },
        ]
        frame = pd.DataFrame(rows)
        self.save_table(frame, spec.stem)
        return {"rows": rows, "floors_met": bool((frame["mu_b"] >= frame["floor"] * (1 - 1e-9)).all())}


def _json_default(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Cannot serialize {type(value).__name__}")
