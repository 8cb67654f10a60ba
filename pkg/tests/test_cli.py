import json

import pytest

from trajopt.cli import main
from trajopt.config import format_config, parse_config
from trajopt.core import HardwareSpec
from trajopt.optimizer import OptimConfig

SMALL = """\
# tiny run
matrix_size = 16
dwell_dt = 5e-6
n_shots = 2
n_samples = 17
dwell_ratio = 2
decimation_levels = 4, 2, 1
steps_per_level = 1
batch_size = 2
lr = 0.01
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(SMALL)
    return path


def run(capsys, *argv):
    assert main(list(argv)) == 0
    return capsys.readouterr().out.strip().splitlines()[-1]


def test_parse_config_round_trip():
    cfg, spec = parse_config(SMALL)
    assert cfg.decimation_levels == (4, 2, 1)
    assert spec.matrix_size == 16 and spec.dwell_dt == 5e-6
    assert parse_config(format_config(cfg, spec)) == (cfg, spec)
    assert parse_config("", seed=4, lr=None)[0] == OptimConfig(seed=4)
    assert parse_config("")[1] == HardwareSpec()


@pytest.mark.parametrize("text", ["bogus = 1", "lr 0.1", "adam_betas = 0.9, 2"])
def test_parse_config_rejects_bad_lines(text):
    with pytest.raises(ValueError):
        parse_config(text)


def test_uf(capsys):
    assert run(capsys, "uf", "320", "16", "512", "5") == "2.5"


def test_subcommands_write_into_hashed_run_directory(tmp_path, capsys, config_file):
    common = ["--config", str(config_file), "--runs-root", str(tmp_path / "runs"), "--seed", "5"]
    data = ["--n-train", "2", "--n-test", "2"]
    init_csv = run(capsys, "init", *common)
    run_dir = tmp_path / "runs" / parse_config(SMALL, seed=5)[0].digest()
    assert init_csv == str(run_dir / "init.csv")
    assert (run_dir / "config.txt").exists()

    assert run(capsys, "optimize", *common, *data) == str(run_dir)
    report = json.loads((run_dir / "report_final.json").read_text())
    assert report["metadata"]["seed"] == 5
    assert len(report["psnr"]) == 2
    history = (run_dir / "history.csv").read_text().splitlines()
    assert len(history) == 1 + 3

    out = run(capsys, "evaluate", str(run_dir / "final.bin"), "--recon", "cg", *common, *data)
    assert json.loads(open(out).read())["recon"] == "cg"
    out = run(capsys, "profiles", str(run_dir / "final.csv"), *common)
    assert open(out).readline().startswith("shot,t_ms")


def test_reports_are_byte_identical_across_runs(tmp_path, capsys, config_file):
    outs = []
    for root in ("a", "b"):
        common = ["--config", str(config_file), "--runs-root", str(tmp_path / root)]
        run_dir = run(capsys, "compare", *common, "--n-train", "2", "--n-test", "1", "--mu", "10", "10")
        outs.append({p.name: p.read_bytes() for p in sorted(tmp_path.joinpath(root).glob("*/*"))})
        assert "compare.json" in outs[-1]
        assert run_dir.startswith(str(tmp_path / root))
    assert outs[0] == outs[1]
