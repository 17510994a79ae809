import json

import numpy as np
import pytest

import tfhomog.cli as cli
from tfhomog.cli import ExperimentConfig, ConfigError, load_config, main
from tfhomog.sparse_linalg import SolveReport


TINY = ["--grid-n", "16", "--cell-n", "16", "--dt", "0.1", "--T", "0.5",
        "--times", "0.1,0.5", "--eps", "0.25"]


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cell_constant_prints_kappa_star(tmp_path, capsys):
    code, out, _ = run_cli(["cell", "--field", "constant:5", "--cell-n", "16",
                            "--out", str(tmp_path / "c")], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["kappa_star"] == [[5.0, 0.0], [0.0, 5.0]]
    assert (tmp_path / "c" / "chi_1.csv").exists()
    assert (tmp_path / "c" / "manifest.json").exists()


def test_cell_smooth_low_in_bracket(tmp_path, capsys):
    code, out, _ = run_cli(["cell", "--field", "smooth-low", "--cell-n", "32",
                            "--out", str(tmp_path / "c")], capsys)
    assert code == 0
    ks = np.array(json.loads(out)["kappa_star"])
    assert np.all(np.linalg.eigvalsh(ks) > 9.0)
    assert np.all(np.linalg.eigvalsh(ks) < 11.0)


def test_cell_piecewise_high_in_bracket(tmp_path, capsys):
    code, out, _ = run_cli(["cell", "--field", "piecewise-high", "--cell-n", "32",
                            "--out", str(tmp_path / "c")], capsys)
    assert code == 0
    ks = np.array(json.loads(out)["kappa_star"])
    eigs = np.linalg.eigvalsh(ks)
    assert eigs.min() >= 10.0 - 1e-9
    assert eigs.max() <= 20.0 + 1e-9


def test_fine_writes_manifest_and_snapshots(tmp_path, capsys):
    out_dir = tmp_path / "f"
    code, out, _ = run_cli(["fine", *TINY, "--snapshots", "1,6",
                            "--out", str(out_dir)], capsys)
    assert code == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["command"] == "fine"
    assert manifest["solver"]["all_converged"]
    assert manifest["toolkit_version"]
    assert (out_dir / "snapshots" / "fine_k0001.csv").exists()
    assert (out_dir / "plots" / "fine_k0006.svg").exists()


def test_snapshot_step1_is_initial_data(tmp_path, capsys):
    out_dir = tmp_path / "s"
    code, _, _ = run_cli(["snapshots", *TINY, "--run", "fine",
                          "--snapshots", "1", "--out", str(out_dir)], capsys)
    assert code == 0
    rows = (out_dir / "snapshots" / "fine_k0001.csv").read_text().strip().splitlines()[1:]
    import tfhomog as tf
    g = tf.make_grid(16)
    a = tf.smooth_poly()
    for line, x, y in zip(rows, g.node_x, g.node_y):
        _, _, v = line.split(",")
        assert float(v) == pytest.approx(float(a(x, y)), abs=1e-14)


def test_snapshots_empty_steps_ok(tmp_path, capsys):
    code, out, _ = run_cli(["snapshots", *TINY, "--run", "fine", "--out",
                            str(tmp_path / "s")], capsys)
    assert code == 0
    assert json.loads(out)["files"] == 0


def test_snapshots_initial_heatmap(tmp_path, capsys):
    out_dir = tmp_path / "init"
    code, _, _ = run_cli(["snapshots", *TINY, "--run", "initial",
                          "--out", str(out_dir)], capsys)
    assert code == 0
    svg = (out_dir / "plots" / "initial.svg").read_text()
    assert svg.startswith("<svg") and "rect" in svg


def test_snapshot_bad_step_is_config_error(tmp_path, capsys):
    code, _, err = run_cli(["snapshots", *TINY, "--run", "fine",
                            "--snapshots", "99", "--out", str(tmp_path / "s")], capsys)
    assert code == 1
    assert "config error" in err


def test_corrector_outputs_and_theta_variant(tmp_path, capsys):
    base = ["corrector", *TINY, "--out"]
    code, out, _ = run_cli([*base, str(tmp_path / "u")], capsys)
    assert code == 0
    assert json.loads(out)["variant"] == "U1"
    assert (tmp_path / "u" / "snapshots" / "U1_k0002.csv").exists()
    code, out, _ = run_cli([*base, str(tmp_path / "m"), "--theta", "0.2"], capsys)
    assert code == 0
    assert json.loads(out)["variant"] == "modified_u1"
    assert (tmp_path / "m" / "snapshots" / "modified_u1_k0002.csv").exists()


def test_study_outputs_tree(tmp_path, capsys):
    out_dir = tmp_path / "study"
    code, out, _ = run_cli(["study", "--grid-n", "32", "--cell-n", "16",
                            "--dt", "0.1", "--T", "0.5", "--times", "0.1,0.5",
                            "--eps", "0.5,0.25", "--field", "smooth-low",
                            "--out", str(out_dir)], capsys)
    assert code == 0
    assert (out_dir / "errors.csv").exists()
    assert (out_dir / "rates.csv").exists()
    assert (out_dir / "plots" / "convergence.svg").exists()
    for sub in ("eps_1_over_2", "eps_1_over_4"):
        assert (out_dir / sub / "errors.csv").read_text().startswith(
            "t,abs_l2,rel_l2,abs_h1,rel_h1")
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["partial"] is False
    assert "kappa_star" in manifest and "rates" in manifest


def test_study_single_eps_one_constant_field(tmp_path, capsys):
    # eps = 1 with a constant coefficient: homogenized == fine, errors at
    # solver-tolerance level, and no rate fit is attempted
    out_dir = tmp_path / "triv"
    code, _, _ = run_cli(["study", "--grid-n", "16", "--cell-n", "16",
                          "--dt", "0.1", "--T", "0.5", "--times", "0.5",
                          "--eps", "1.0", "--field", "constant:2",
                          "--out", str(out_dir)], capsys)
    assert code == 0
    line = (out_dir / "errors.csv").read_text().strip().splitlines()[1]
    _, _, _, rel_l2, _, rel_h1 = line.split(",")
    assert float(rel_l2) <= 1e-8
    assert float(rel_h1) <= 1e-8
    assert not (out_dir / "rates.csv").exists()


def test_study_jobs_parallel_matches_serial(tmp_path, capsys):
    args = ["study", "--grid-n", "16", "--cell-n", "16", "--dt", "0.1",
            "--T", "0.5", "--times", "0.5", "--eps", "0.5,0.25",
            "--field", "smooth-low"]
    code, _, _ = run_cli([*args, "--out", str(tmp_path / "serial")], capsys)
    assert code == 0
    code, _, _ = run_cli([*args, "--jobs", "2", "--out", str(tmp_path / "par")], capsys)
    assert code == 0
    assert ((tmp_path / "serial" / "errors.csv").read_bytes()
            == (tmp_path / "par" / "errors.csv").read_bytes())


def test_study_rerun_byte_identical(tmp_path, capsys):
    args = ["study", "--grid-n", "32", "--cell-n", "16", "--dt", "0.1",
            "--T", "0.5", "--times", "0.1,0.5", "--eps", "0.5,0.25",
            "--field", "piecewise-low"]
    for name in ("a", "b"):
        code, _, _ = run_cli([*args, "--out", str(tmp_path / name)], capsys)
        assert code == 0
    for rel in ("errors.csv", "rates.csv", "manifest.json",
                "plots/convergence.svg", "eps_1_over_2/errors.csv"):
        fa = (tmp_path / "a" / rel).read_bytes()
        fb = (tmp_path / "b" / rel).read_bytes()
        # manifests embed the out directory; normalize it before comparing
        if rel == "manifest.json":
            fa = fa.replace(str(tmp_path / "a").encode(), b"OUT")
            fb = fb.replace(str(tmp_path / "b").encode(), b"OUT")
        assert fa == fb, rel


def test_study_numerical_failure_exit_2_and_partial_manifest(tmp_path, capsys, monkeypatch):
    def failing_cg(A, b, tol=1e-10, max_iter=None, precond="jacobi", x0=None):
        return np.zeros_like(np.asarray(b, dtype=float)), SolveReport(7, 1.0, False)

    monkeypatch.setattr("tfhomog.timefrac.cg_solve", failing_cg)
    out_dir = tmp_path / "fail"
    code, _, err = run_cli(["study", *TINY[:-2], "--eps", "0.25",
                            "--out", str(out_dir)], capsys)
    assert code == 2
    assert "numerical failure" in err
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["partial"] is True


def test_oracle_ml(capsys):
    code, out, _ = run_cli(["oracle", "--kind", "ml", "--alpha", "0.9",
                            "--z=-1.0"], capsys)
    assert code == 0
    entry = json.loads(out)["entries"][0]
    assert entry["value"] == pytest.approx(0.376066021424641879, rel=1e-10)


def test_oracle_layered(capsys):
    code, out, _ = run_cli(["oracle", "--kind", "layered", "--field",
                            "layered:step", "--cell-n", "16"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["oracle_1d"]["along"] == pytest.approx(380.0 / 29.0, rel=1e-10)
    assert payload["cell_2d"][0][0] == pytest.approx(380.0 / 29.0, rel=1e-7)


def test_oracle_ml_needs_z(capsys):
    code, _, err = run_cli(["oracle", "--kind", "ml"], capsys)
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["study", "--eps", "0.3"],                      # not a reciprocal power of two
    ["study", "--dt", "0.3", "--T", "1.0"],         # dt does not divide T
    ["study", "--grid-n", "24"],                    # not a power of two
    ["study", "--field", "bogus"],
    ["study", "--alpha", "1.5"],
    ["fine", "--eps", "0.25,0.125", *TINY[:-2]],    # fine needs exactly one eps
    ["bogus-command"],
    ["study", "--times", "0.123"],                  # off the time lattice
])
def test_config_errors_exit_1(argv, capsys):
    code, _, err = run_cli(argv, capsys)
    assert code == 1
    assert "config error" in err


def test_config_file_with_overrides(tmp_path, capsys):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"grid_n": 16, "cell_n": 16, "dt": 0.1,
                                    "T": 0.5, "times": [0.5], "eps": [0.25],
                                    "field": "constant:3"}))
    out_dir = tmp_path / "o"
    code, out, _ = run_cli(["cell", "--config", str(cfg_file),
                            "--out", str(out_dir)], capsys)
    assert code == 0
    assert json.loads(out)["kappa_star"][0][0] == pytest.approx(3.0)
    # unknown keys rejected
    cfg_file.write_text(json.dumps({"grid": 16}))
    code, _, err = run_cli(["cell", "--config", str(cfg_file)], capsys)
    assert code == 1


def test_paper_scale_flag_sets_grid():
    parser = cli.build_parser()
    args = parser.parse_args(["study", "--paper-scale", "--eps", "0.125"])
    cfg = load_config(args)
    assert cfg.grid_n == cli.PAPER_GRID_N


def test_eps_list_sorted_descending():
    parser = cli.build_parser()
    args = parser.parse_args(["study", "--eps", "0.125,0.5,0.25"])
    cfg = load_config(args)
    assert cfg.eps == (0.5, 0.25, 0.125)
