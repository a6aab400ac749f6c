import subprocess
import sys

from pdnet.cli import main
from pdnet.experiment import SUMMARY_CSV_HEADER
from pdnet.graphs import load_edge_list

BATCH_MANIFEST = """
network.kind = grid_moore
network.width = 20
network.height = 20
plan.p_values = 1
plan.mu_values = 0, 0.01
plan.replications = 3
plan.ticks = 400
plan.base_seed = 7
"""

RUN_MANIFEST = """
network.kind = grid_moore
network.width = 8
network.height = 8
run.p = 1
run.mu = 0.01
run.ticks = 10
run.seed = 5
"""


def test_gen_grid(tmp_path, capsys):
    out = tmp_path / "g.edges"
    assert main(["gen", "--grid", "50x50", "--moore", "--out", str(out)]) == 0
    g = load_edge_list(out.read_text())
    assert g.node_count == 2500 and g.edge_count == 10000
    assert "2500 nodes, 10000 edges" in capsys.readouterr().out


def test_gen_er_deterministic(tmp_path):
    a, b = tmp_path / "a.edges", tmp_path / "b.edges"
    assert main(["gen", "--er", "--n", "1000", "--edges", "8000", "--seed", "7",
                 "--out", str(a)]) == 0
    assert main(["gen", "--er", "--n", "1000", "--edges", "8000", "--seed", "7",
                 "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert load_edge_list(a.read_text()).edge_count == 8000


def test_gen_infeasible_ring_exits_1(tmp_path, capsys):
    code = main(["gen", "--ring", "--n", "10", "--k", "12", "--out", str(tmp_path / "x")])
    assert code == 1
    assert "infeasible" in capsys.readouterr().err


def test_gen_bad_flags_exit_2(tmp_path, capsys):
    assert main(["gen", "--ring", "--n", "10", "--out", str(tmp_path / "x")]) == 2  # no --k
    assert main(["gen", "--grid", "fivexfive", "--out", str(tmp_path / "x")]) == 2
    assert main(["gen", "--grid", "5x5"]) == 2  # missing --out (argparse)


def test_run_writes_trace_and_frames(tmp_path, capsys):
    manifest = tmp_path / "run.cfg"
    manifest.write_text(RUN_MANIFEST)
    out_dir = tmp_path / "out"
    code = main(["run", "--manifest", str(manifest), "--out", str(out_dir),
                 "--snapshot-every", "5"])
    assert code == 0
    trace = (out_dir / "trace.csv").read_text().strip().splitlines()
    assert trace[0] == "tick,n_c,n_d,n_l,n_p,phi"
    assert len(trace) == 12  # header + init + 10 ticks
    assert (out_dir / "frame_5.ppm").exists()
    assert (out_dir / "frame_10.ppm").read_bytes().startswith(b"P3\n8 8\n255\n")
    assert "tick 10:" in capsys.readouterr().out


def test_run_overrides_and_env_dir(tmp_path, capsys, monkeypatch):
    manifest = tmp_path / "run.cfg"
    manifest.write_text(RUN_MANIFEST)
    env_dir = tmp_path / "envout"
    monkeypatch.setenv("PDNET_OUT_DIR", str(env_dir))
    assert main(["run", "--manifest", str(manifest), "--ticks", "3"]) == 0
    trace = (env_dir / "trace.csv").read_text().strip().splitlines()
    assert len(trace) == 5  # header + init + 3 ticks


def test_run_snapshot_requires_grid(tmp_path, capsys):
    manifest = tmp_path / "run.cfg"
    manifest.write_text(
        "network.kind = erdos_renyi\nnetwork.n = 30\nnetwork.edges = 60\n"
        "run.p = 1\nrun.mu = 0\nrun.ticks = 2\n"
    )
    code = main(["run", "--manifest", str(manifest), "--out", str(tmp_path / "o"),
                 "--snapshot-every", "1"])
    assert code == 2
    assert "grid" in capsys.readouterr().err


def test_batch_summary_and_null_row(tmp_path, capsys):
    manifest = tmp_path / "batch.cfg"
    manifest.write_text(BATCH_MANIFEST)
    out_dir = tmp_path / "results"
    assert main(["batch", "--manifest", str(manifest), "--out", str(out_dir),
                 "--jobs", "1"]) == 0
    lines = (out_dir / "summary.csv").read_text().strip().splitlines()
    assert lines[0] == SUMMARY_CSV_HEADER
    assert len(lines) == 3  # two conditions
    rows = {(float(l.split(",")[0]), float(l.split(",")[1])): l.split(",") for l in lines[1:]}
    phi_mu0 = float(rows[(1.0, 0.0)][14])
    phi_mu001 = float(rows[(1.0, 0.01)][14])
    assert phi_mu001 < phi_mu0
    raw = (out_dir / "raw.csv").read_text().strip().splitlines()
    assert len(raw) == 1 + 2 * 3  # header + 2 conditions x 3 reps
    out = capsys.readouterr().out
    assert "coop_mean" in out and "wrote" in out


def test_batch_byte_identical_reruns(tmp_path):
    manifest = tmp_path / "batch.cfg"
    manifest.write_text(BATCH_MANIFEST.replace("400", "100"))
    dir_a, dir_b = tmp_path / "a", tmp_path / "b"
    assert main(["batch", "--manifest", str(manifest), "--out", str(dir_a), "--jobs", "1"]) == 0
    assert main(["batch", "--manifest", str(manifest), "--out", str(dir_b), "--jobs", "2"]) == 0
    assert (dir_a / "summary.csv").read_bytes() == (dir_b / "summary.csv").read_bytes()
    assert (dir_a / "raw.csv").read_bytes() == (dir_b / "raw.csv").read_bytes()


def test_batch_rejects_single_replication(tmp_path, capsys):
    manifest = tmp_path / "batch.cfg"
    manifest.write_text(BATCH_MANIFEST)
    code = main(["batch", "--manifest", str(manifest), "--out", str(tmp_path / "o"),
                 "--replications", "1"])
    assert code == 2
    assert "replications" in capsys.readouterr().err


def test_batch_manifest_errors_exit_2(tmp_path, capsys):
    manifest = tmp_path / "bad.cfg"
    manifest.write_text("network.kind = hexagon\n")
    assert main(["batch", "--manifest", str(manifest), "--out", str(tmp_path / "o")]) == 2


def test_batch_failure_removes_partial_outputs(tmp_path, capsys, monkeypatch):
    import pdnet.cli as cli

    def boom(*args, **kwargs):
        raise RuntimeError("replication blew up")

    monkeypatch.setattr(cli.experiment, "run_plan", boom)
    manifest = tmp_path / "batch.cfg"
    manifest.write_text(BATCH_MANIFEST)
    out_dir = tmp_path / "res"
    code = main(["batch", "--manifest", str(manifest), "--out", str(out_dir), "--jobs", "1"])
    assert code == 1
    assert "replication blew up" in capsys.readouterr().err
    assert not (out_dir / "summary.csv").exists()
    assert not (out_dir / "raw.csv").exists()


def test_report_renders_table(tmp_path, capsys):
    manifest = tmp_path / "batch.cfg"
    manifest.write_text(BATCH_MANIFEST.replace("400", "100"))
    out_dir = tmp_path / "res"
    main(["batch", "--manifest", str(manifest), "--out", str(out_dir), "--jobs", "1"])
    capsys.readouterr()
    assert main(["report", str(out_dir / "summary.csv")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("---")
    assert "coop_mean" in lines[1]
    assert len(lines) == 2 + 2  # rule, header, two rows


def test_report_single_row_is_three_lines(tmp_path, capsys):
    csv = tmp_path / "one.csv"
    csv.write_text(
        SUMMARY_CSV_HEADER + "\n"
        "1.0,0.0,269.1,0.0,,201.2,0.0,,335.2,0.0,,194.4,0.0,,243.7\n"
    )
    assert main(["report", str(csv)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3
    assert "269.1" in lines[2] and "243.7" in lines[2]


def test_report_flags_attached(tmp_path, capsys):
    csv = tmp_path / "f.csv"
    csv.write_text(
        SUMMARY_CSV_HEADER + "\n"
        "1.0,0.001,1.4,-408.7,*,2.3,-287.5,*,994.7,383.1,*,1.6,-405.0,*,8.5\n"
    )
    main(["report", str(csv)])
    out = capsys.readouterr().out
    assert "-408.7*" in out and "383.1*" in out


def test_report_empty_body(tmp_path, capsys):
    csv = tmp_path / "empty.csv"
    csv.write_text(SUMMARY_CSV_HEADER + "\n")
    assert main(["report", str(csv)]) == 0
    assert "no conditions" in capsys.readouterr().out


def test_report_schema_mismatch(tmp_path, capsys):
    csv = tmp_path / "junk.csv"
    csv.write_text("a,b,c\n1,2,3\n")
    assert main(["report", str(csv)]) == 2
    assert main(["report", str(tmp_path / "missing.csv")]) == 2


def test_unknown_command_exits_2():
    assert main(["frobnicate"]) == 2


def test_console_script_installed(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "pdnet.cli", "gen", "--grid", "5x5", "--vonneumann",
         "--out", str(tmp_path / "g.edges")],
        capture_output=True, text=True,
    )
    assert result.returncode == 0
    assert "25 nodes, 50 edges" in result.stdout
