import json
import os
import re

import numpy as np
import pytest

from src.cli import EXIT_CERTIFICATE_FAILED, EXIT_ITERATION_CAP, EXIT_OK, EXIT_RANK_DEFICIENT, EXIT_USAGE
from src.cli import gen_stem, generate_matrix, main, parse_gen_spec


@pytest.fixture
def selection_file(tmp_path):
    def _write(payload, name="selection.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return str(path)

    return _write


def test_parse_gen_spec():
    assert parse_gen_spec("gaussian:m=5,n=4,seed=2") == ("gaussian", {"m": "5", "n": "4", "seed": "2"})
    assert parse_gen_spec("example_2_1") == ("example_2_1", {})
    assert gen_stem("kahan", {"s": "0.6", "n": "10"}) == "kahan_n10_s0.6"
    with pytest.raises(ValueError):
        parse_gen_spec("hilbert:n=3")
    with pytest.raises(ValueError):
        parse_gen_spec("gaussian:m")
    with pytest.raises(ValueError):
        generate_matrix("gaussian:m=4")


def test_gen_writes_matrix_market(tmp_path, capsys):
    assert main(["gen", "--gen", "kahan:n=6,s=0.6", "--out", str(tmp_path)]) == EXIT_OK
    assert os.path.isfile(tmp_path / "kahan_n6_s0.6.mtx")
    assert "Matrix saved as:" in capsys.readouterr().out


def test_factor_example_2_1_takes_no_swaps(tmp_path, capsys):
    out = str(tmp_path / "fact")
    code = main(["factor", "--gen", "example_2_1", "--mode", "ge", "--k", "2", "--gamma", "1", "--out", out])
    assert code == EXIT_OK
    assert "Path length: 0" in capsys.readouterr().out
    for name in ("metadata.txt", "report.jsonl", "selection.json", "A11.mtx", "S.mtx"):
        assert os.path.isfile(os.path.join(out, name))


def test_factor_qr_on_gaussian(tmp_path, capsys):
    out = str(tmp_path / "qr")
    code = main(["factor", "--gen", "gaussian:m=80,n=80,seed=0", "--mode", "qr", "--k", "6", "--gamma", "2", "--out", out])
    assert code == EXIT_OK
    text = capsys.readouterr().out
    assert "||R11^-1||_2" in text
    with open(os.path.join(out, "report.jsonl")) as handle:
        summary = json.loads(handle.readlines()[-1])
    assert summary["path_length"] <= summary["path_bound"]


def test_factor_greedy_only(tmp_path, capsys):
    out = str(tmp_path / "gecp")
    code = main(["factor", "--gen", "gaussian:m=20,n=15,seed=1", "--k", "4", "--no-search", "--out", out])
    assert code == EXIT_OK
    assert not os.path.exists(os.path.join(out, "report.jsonl"))
    assert "Path length" not in capsys.readouterr().out


def test_missing_input_file(tmp_path, capsys):
    path = str(tmp_path / "missing.mtx")
    assert main(["factor", "--input", path, "--k", "2"]) == EXIT_USAGE
    assert path in capsys.readouterr().err


def test_unknown_generator_is_usage_error(capsys):
    assert main(["svd", "--gen", "hilbert:n=4"]) == EXIT_USAGE
    assert "Unknown generator" in capsys.readouterr().err


def test_gen_into_a_file_path_is_usage_error(tmp_path, capsys):
    blocker = tmp_path / "taken"
    blocker.write_text("not a folder")
    assert main(["gen", "--gen", "example_2_1", "--out", str(blocker)]) == EXIT_USAGE
    assert str(blocker) in capsys.readouterr().err


@pytest.mark.parametrize("payload, missing", [({"rows": [0, 1]}, "cols"), ({"cols": [0, 1]}, "rows")])
def test_selection_without_a_key_is_usage_error(selection_file, payload, missing, capsys):
    path = selection_file(payload)
    assert main(["verify", "--gen", "example_2_1", "--mode", "ge", "--selection", path]) == EXIT_USAGE
    assert f'"{missing}"' in capsys.readouterr().err


def test_qr_selection_without_columns_is_usage_error(selection_file, capsys):
    path = selection_file({"picked": [0, 1]})
    assert main(["verify", "--gen", "example_2_1", "--mode", "qr", "--selection", path]) == EXIT_USAGE
    assert "missing" in capsys.readouterr().err


def test_argparse_errors_exit_with_usage_code():
    with pytest.raises(SystemExit) as info:
        main(["factor", "--mode", "lu"])
    assert info.value.code == EXIT_USAGE


def test_local_maxvol_selection_piped_into_metric_gives_one(tmp_path, capsys):
    out = str(tmp_path / "fact")
    gen = "gaussian:m=12,n=10,seed=4"
    assert main(["factor", "--gen", gen, "--k", "3", "--gamma", "1", "--out", out]) == EXIT_OK
    capsys.readouterr()
    selection = os.path.join(out, "selection.json")
    assert main(["metric", "--gen", gen, "--mode", "ge", "--selection", selection]) == EXIT_OK
    assert "mu_B: 1\n" in capsys.readouterr().out
    assert main(["verify", "--gen", gen, "--mode", "ge", "--selection", selection, "--gamma", "1"]) == EXIT_OK


def test_metric_on_kahan_gram_meets_floor(tmp_path, capsys):
    s = 0.6
    code = main(["metric", "--gen", "kahan_gram:n=10,s=0.6", "--mode", "ge", "--k", "9", "--out", str(tmp_path)])
    assert code == EXIT_OK
    metric = float(re.search(r"mu_B: (\S+)", capsys.readouterr().out).group(1))
    assert metric >= s ** 2 * (1 + s) ** 16
    with open(tmp_path / "metric_ge_k9.json") as handle:
        assert json.load(handle)["schema_version"] == 1


def test_verify_fails_on_improvable_selection(write_mtx, staircase, selection_file, capsys):
    path = write_mtx(staircase)
    assert main(["verify", "--input", path, "--k", "2"]) == EXIT_CERTIFICATE_FAILED
    assert "FAILED" in capsys.readouterr().out
    good = selection_file({"rows": [4, 5], "cols": [4, 5]})
    assert main(["verify", "--input", path, "--selection", good]) == EXIT_OK


def test_qr_selection_file_may_list_columns_only(write_mtx, selection_file):
    path = write_mtx(np.diag([1.0, 2.0, 3.0, 4.0]))
    cols = selection_file({"cols": [2, 3]})
    assert main(["verify", "--input", path, "--mode", "qr", "--selection", cols]) == EXIT_OK


def test_rank_deficient_input(write_mtx):
    path = write_mtx(np.ones((4, 4)))
    assert main(["factor", "--input", path, "--k", "2"]) == EXIT_RANK_DEFICIENT


def test_iteration_cap(write_mtx, staircase, selection_file, tmp_path):
    path = write_mtx(staircase)
    start = selection_file({"rows": [0, 1], "cols": [0, 1]})
    args = ["factor", "--input", path, "--k", "2", "--gamma", "1", "--init", "given", "--selection", start,
            "--max-swaps", "1", "--out", str(tmp_path / "capped")]
    assert main(args) == EXIT_ITERATION_CAP


def test_svd_subcommand(tmp_path, capsys):
    code = main(["--quiet", "svd", "--gen", "lowrank:m=8,n=6,rank=2,seed=3", "--method", "jacobi", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert "Numerical rank: 2" in capsys.readouterr().out
    assert os.path.isfile(tmp_path / "singular_values_jacobi.csv")


def test_experiment_subcommand(tmp_path, capsys):
    code = main(["experiment", "kahan", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert '"floors_met": true' in capsys.readouterr().out
    assert os.path.isfile(tmp_path / "kahan" / "kahan_m10_n10_s0.6_t1_seed0.json")
