"""
Command-line front door.

    python -m src.cli gen --gen kahan:n=10,s=0.6 --out results/matrices
    python -m src.cli factor --gen gaussian:m=500,n=500,seed=0 --mode qr --k 20 --gamma 2
    python -m src.cli metric --input A.mtx --mode ge --k 5
    python -m src.cli experiment metric_hist --trials 500

Exit codes: 0 success, 1 certificate failed (``verify``), 2 usage or I/O
error, 3 rank deficiency, 4 iteration cap exceeded, 5 SVD non-convergence.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np
import pandas as pd

from src.assessment.bounds import mu_factor
from src.assessment.metric import make_mode, measured_mu_nu, worst_neighbor_ratio
from src.core.dense import Selection
from src.core.exceptions import (
    IterationCapError,
    MatrixFormatError,
    RankDeficientError,
    SelectionError,
    SingularTriangularError,
    SizeGuardError,
    SvdConvergenceError,
)
from src.core.logger import get_logger, set_level
from src.core.svd import numerical_rank, svd
from src.experiments.runner import ExperimentRunner
from src.experiments.spec import EXPERIMENTS, ExperimentSpec
from src.factorization.ge import gecp_partial, ge_local_maxvol, interpolative_bounds_ge
from src.factorization.qr import cpqr_partial, interpolative_bound_qr, qr_local_maxvol, r11_inverse_norm
from src.factorization.serialization import save_factorization
from src.generators import kernels, structured_matrices, random_matrices
from src.matrix_market_io import load_matrix, save_matrix
from src.search.config import DEFAULT_GE_GAMMA, DEFAULT_QR_GAMMA, InitStrategy, SearchConfig
from src.search.oracle import verify_local_maxvol

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CERTIFICATE_FAILED = 1
EXIT_USAGE = 2
EXIT_RANK_DEFICIENT = 3
EXIT_ITERATION_CAP = 4
EXIT_SVD = 5

GENERATORS = {
    "gaussian": lambda p: random_matrices.gaussian(int(p["m"]), int(p["n"]), int(p.get("seed", 0))),
    "lowrank": lambda p: random_matrices.lowrank_gaussian(int(p["m"]), int(p["n"]), int(p["rank"]), int(p.get("seed", 0))),
    "kahan": lambda p: structured_matrices.kahan(int(p["n"]), float(p.get("s", 0.6)), float(p.get("tau", structured_matrices.KAHAN_TAU))),
    "kahan_gram": lambda p: structured_matrices.kahan_gram(int(p["n"]), float(p.get("s", 0.6)), float(p.get("tau", structured_matrices.KAHAN_TAU))),
    "example_2_1": lambda p: structured_matrices.example_2_1(),
    "sharpness_ge": lambda p: structured_matrices.sharpness_ge(int(p["m"]), int(p["n"]), int(p["k"])),
    "sharpness_ge_companion": lambda p: structured_matrices.sharpness_ge_companion(int(p["m"]), int(p["n"]), int(p["k"])),
    "sharpness_qr": lambda p: structured_matrices.sharpness_qr(int(p["k"]), int(p["n"])),
    "necessity": lambda p: structured_matrices.necessity_example(p["which"], float(p["param"])),
    "kernel": lambda p: kernels.kernel_matrix(
        kernels.KernelSpec(p["kernel"], int(p["grid"]), beta=float(p.get("beta", 1.0)), s=int(p.get("s", 0)))
    ),
}


def parse_gen_spec(text):
    """
    Parses ``name:key=value,key=value`` into ``(name, params)``.

    :raises ValueError: Unknown generator or malformed parameter.
    """
    name, _, rest = text.partition(":")
    if name not in GENERATORS:
        raise ValueError(f"Unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"Malformed generator parameter {item!r} (expected key=value)")
        params[key.strip()] = value.strip()
    return name, params


def gen_stem(name, params):
    """Parameter-stamped file stem, e.g. ``kahan_n10_s0.6``."""
    return "_".join([name] + [f"{key}{params[key]}" for key in sorted(params)])


def generate_matrix(text):
    name, params = parse_gen_spec(text)
    try:
        return GENERATORS[name](params), gen_stem(name, params)
    except KeyError as exc:
        raise ValueError(f"Generator {name!r} needs parameter {exc}") from exc


def _load_input(args):
    if args.input:
        return load_matrix(args.input)
    if args.gen:
        return generate_matrix(args.gen)[0]
    raise ValueError("Give a matrix with --input PATH or --gen SPEC")


def _load_selection(path, mode, m):
    if not os.path.isfile(path):
        raise FileNotFoundError(f"Selection file not found: {path}")
    with open(path) as handle:
        payload = json.load(handle)
    if isinstance(payload, dict) and "selection" in payload:
        payload = payload["selection"]
    if mode == "qr" and isinstance(payload, dict) and "rows" not in payload and "cols" in payload:
        payload = {"rows": list(range(m)), "cols": payload["cols"]}
    return Selection.from_dict(payload)


def _selection_for(args, A):
    m, _ = A.shape
    if args.selection:
        return _load_selection(args.selection, args.mode, m)
    if args.k is None:
        raise ValueError("Give --k for a leading selection or --selection FILE")
    return Selection.leading(args.k, m if args.mode == "qr" else None)


def _search_config(args, A):
    gamma = args.gamma if args.gamma is not None else (DEFAULT_GE_GAMMA if args.mode == "ge" else DEFAULT_QR_GAMMA)
    if args.init == "given":
        init = InitStrategy.given(_selection_for(args, A))
    elif args.init == "random":
        init = InitStrategy.random(args.seed)
    else:
        init = InitStrategy.greedy()
    return SearchConfig(gamma=gamma, init=init, max_swaps=args.max_swaps)


def cmd_gen(args):
    A, stem = generate_matrix(args.gen)
    path = save_matrix(os.path.join(args.out, f"{stem}.mtx"), A, comment=args.gen)
    print(f"Matrix saved as: {path}")
    return EXIT_OK


def cmd_factor(args):
    """Factorizes the input and writes the blocks, the search report and the final selection."""
    A = _load_input(args)
    m, n = A.shape
    report = None
    if args.mode == "ge":
        if args.no_search:
            factorization = gecp_partial(A, args.k)
        else:
            factorization, report = ge_local_maxvol(A, args.k, _search_config(args, A))
        nu = max(interpolative_bounds_ge(factorization))
    else:
        if args.no_search:
            factorization = cpqr_partial(A, args.k)
        else:
            factorization, report = qr_local_maxvol(A, args.k, _search_config(args, A))
        nu = interpolative_bound_qr(factorization)

    folder = save_factorization(factorization, args.out, report=report)
    with open(os.path.join(folder, "selection.json"), "w") as handle:
        json.dump(factorization.selection.to_dict(), handle)

    print(f"Mode: {args.mode}, k={args.k}, matrix {m}x{n}")
    if report is not None:
        print(f"Path length: {report.path_length} (cap {report.max_swaps})")
        print(f"Certified gamma: {report.certified_gamma:.6g}")
        if report.path_bound is not None:
            print(f"Path length bound: {report.path_bound:.4f}")
    print(f"Interpolative bound: {nu:.6g}")
    mu_measured, nu_measured = measured_mu_nu(A, factorization)
    print(f"Measured singular value factors: mu={mu_measured:.6g}, nu={nu_measured:.6g}")
    if args.mode == "qr":
        print(f"||R11^-1||_2: {r11_inverse_norm(factorization):.6g}")
    print(f"Results saved as: {folder}")
    return EXIT_OK


def cmd_metric(args):
    """Prints the pivot metric of a selection and the singular value factors it guarantees."""
    A = _load_input(args)
    m, n = A.shape
    selection = _selection_for(args, A)
    k = len(selection.col_idx)
    ratio, move = worst_neighbor_ratio(A, selection, args.mode)
    metric = max(ratio, 1.0)
    profile = mu_factor(args.mode, m, n, k, gamma=metric)
    print(f"mu_B: {metric:.10g}")
    print(f"Worst neighbour ratio: {ratio:.10g} at {move}")
    print(f"Singular value factor: {profile.mu_factor:.6g}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"metric_{args.mode}_k{k}.json")
        payload = {"schema_version": 1, "mu_b": metric, "worst_ratio": ratio,
                   "worst_move": move.to_dict() if move else None, "profile": profile.to_dict()}
        with open(path, "w") as handle:
            json.dump(payload, handle, indent=2)
        print(f"Results saved as: {path}")
    return EXIT_OK


def cmd_svd(args):
    A = _load_input(args)
    result = svd(A, method=args.method)
    sigma = result.singular_values
    print(f"Numerical rank: {numerical_rank(A)}")
    print("Leading singular values: " + ", ".join(f"{s:.10g}" for s in sigma[: args.show]))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"singular_values_{args.method}.csv")
        pd.DataFrame({"j": np.arange(1, len(sigma) + 1), "sigma": sigma}).to_csv(path, index=False)
        print(f"Results saved as: {path}")
    return EXIT_OK


def cmd_verify(args):
    """Runs the exhaustive local maxvol verifier; exit 1 when the certificate fails."""
    A = _load_input(args)
    selection = _selection_for(args, A)
    mode = make_mode(args.mode, len(selection.col_idx))
    gamma = args.gamma if args.gamma is not None else 1.0
    certificate = verify_local_maxvol(mode, A, selection, gamma=gamma)
    status = "PASSED" if certificate.passed else "FAILED"
    print(f"Certificate {status} at gamma={gamma:g}: worst ratio {certificate.worst_ratio:.10g} at {certificate.worst_move}")
    return EXIT_OK if certificate.passed else EXIT_CERTIFICATE_FAILED


def cmd_experiment(args):
    spec = ExperimentSpec(
        name=args.name,
        trials=args.trials,
        dims=(args.m, args.n) if args.m and args.n else None,
        k=args.k,
        gamma=args.gamma,
        seed=args.seed,
        full=args.full,
        workers=args.workers,
        k_values=tuple(args.k_values) if args.k_values else None,
        s=args.s,
    )
    summary = ExperimentRunner(spec, out_dir=args.out).run()
    print(json.dumps({key: value for key, value in summary.items() if key != "parameters"}, indent=2, default=str))
    return EXIT_OK


def _add_input(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--input", help="Matrix Market file")
    group.add_argument("--gen", help="Generator spec, e.g. gaussian:m=50,n=50,seed=0")


def _add_selection(parser):
    parser.add_argument("--mode", choices=["ge", "qr"], default="ge")
    parser.add_argument("--k", type=int, help="Pivot size (leading selection when no --selection)")
    parser.add_argument("--selection", help="JSON selection file with 'rows' and 'cols'")


def build_parser():
    parser = argparse.ArgumentParser(description="Local maximum volume pivoting for rank-revealing LU and QR")
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    parser.add_argument("--quiet", action="store_true", help="Log warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Write a generated matrix to Matrix Market")
    gen.add_argument("--gen", required=True)
    gen.add_argument("--out", default="results/matrices")
    gen.set_defaults(handler=cmd_gen)

    factor = sub.add_parser("factor", help="Factorize with greedy or maxvol pivoting")
    _add_input(factor)
    _add_selection(factor)
    factor.add_argument("--gamma", type=float)
    factor.add_argument("--init", choices=["greedy", "given", "random"], default="greedy")
    factor.add_argument("--seed", type=int, default=0)
    factor.add_argument("--max-swaps", type=int, dest="max_swaps")
    factor.add_argument("--no-search", action="store_true", dest="no_search", help="Stop at the GECP/CPQR pivot")
    factor.add_argument("--out", default="results/factorization")
    factor.set_defaults(handler=cmd_factor)

    metric = sub.add_parser("metric", help="Pivot quality metric of a selection")
    _add_input(metric)
    _add_selection(metric)
    metric.add_argument("--out")
    metric.set_defaults(handler=cmd_metric)

    svd_cmd = sub.add_parser("svd", help="Singular values of a matrix")
    _add_input(svd_cmd)
    svd_cmd.add_argument("--method", choices=["lapack", "jacobi"], default="lapack")
    svd_cmd.add_argument("--show", type=int, default=10)
    svd_cmd.add_argument("--out")
    svd_cmd.set_defaults(handler=cmd_svd)

    verify = sub.add_parser("verify", help="Exhaustive local maxvol certificate")
    _add_input(verify)
    _add_selection(verify)
    verify.add_argument("--gamma", type=float)
    verify.set_defaults(handler=cmd_verify)

    experiment = sub.add_parser("experiment", help="Run a desk-scale experiment")
    experiment.add_argument("name", choices=EXPERIMENTS)
    experiment.add_argument("--trials", type=int)
    experiment.add_argument("--m", type=int)
    experiment.add_argument("--n", type=int)
    experiment.add_argument("--k", type=int)
    experiment.add_argument("--k-values", type=int, nargs="+", dest="k_values")
    experiment.add_argument("--gamma", type=float)
    experiment.add_argument("--s", type=float)
    experiment.add_argument("--seed", type=int, default=0)
    experiment.add_argument("--full", action="store_true", help="Start from every node (pathlen_sweep)")
    experiment.add_argument("--workers", type=int, default=1)
    experiment.add_argument("--out", default="results")
    experiment.set_defaults(handler=cmd_experiment)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_level(logging.DEBUG)
    elif args.quiet:
        set_level(logging.WARNING)
    try:
        return args.handler(args)
    except OSError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SingularTriangularError, RankDeficientError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_RANK_DEFICIENT
    except IterationCapError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_ITERATION_CAP
    except SvdConvergenceError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_SVD
    except (MatrixFormatError, SelectionError, SizeGuardError, ValueError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
