import hashlib

import pytest

from pinchsim import cli
from pinchsim.beamforming import RankDeficiencyError
from pinchsim.presets import heatmap_scenario, noma_scenario, tdma_scenario
from pinchsim.scenario_io import save_scenario


@pytest.fixture
def scenario_file(tmp_path):
    return str(save_scenario(heatmap_scenario(los_kind="always_los"),
                             tmp_path / "scenario.yaml"))


def test_heatmap_subcommand_writes_csv(tmp_path, scenario_file, capsys):
    out = tmp_path / "out"
    code = cli.main(["heatmap", "--scenario", scenario_file, "--out", str(out),
                     "--seed", "3", "--grid-res", "1.0"])
    assert code == 0
    assert (out / "heatmap.csv").exists()
    assert "wrote" in capsys.readouterr().out


def test_missing_scenario_file_is_config_error(tmp_path, capsys):
    code = cli.main(["heatmap", "--scenario", str(tmp_path / "ghost.yaml"),
                     "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_invalid_flag_value_is_config_error(tmp_path, scenario_file, capsys):
    code = cli.main(["compare-mimo", "--scenario", scenario_file,
                     "--out", str(tmp_path / "out"), "--snr-db", "ten,twenty"])
    assert code == cli.EXIT_CONFIG


def test_numerical_failures_map_to_exit_3(monkeypatch, tmp_path, scenario_file, capsys):
    def boom(cfg):
        raise RankDeficiencyError("all candidates singular")

    monkeypatch.setattr(cli, "run_experiment", boom)
    code = cli.main(["heatmap", "--scenario", scenario_file,
                     "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["teleport"])
    assert exc.value.code == 2


def test_noma_and_tdma_subcommands(tmp_path):
    noma_path = str(save_scenario(noma_scenario(), tmp_path / "noma.yaml"))
    tdma_path = str(save_scenario(tdma_scenario(), tmp_path / "tdma.yaml"))
    assert cli.main(["noma-region", "--scenario", noma_path,
                     "--out", str(tmp_path / "n"), "--alpha-step", "0.05"]) == 0
    assert cli.main(["tdma-demo", "--scenario", tdma_path,
                     "--out", str(tmp_path / "t")]) == 0
    assert (tmp_path / "n" / "noma_region.csv").exists()
    assert (tmp_path / "t" / "tdma_demo.csv").exists()


def test_compare_mimo_subcommand(tmp_path):
    from pinchsim.presets import compare_scenario

    path = str(save_scenario(compare_scenario(), tmp_path / "compare.yaml"))
    out = tmp_path / "c"
    code = cli.main(["compare-mimo", "--scenario", path, "--out", str(out),
                     "--seed", "2", "--snr-db", "10", "--drops", "3",
                     "--budget", "4"])
    assert code == 0
    lines = (out / "compare_mimo.csv").read_text().splitlines()
    assert lines[1] == "rho_db,scheme,mean_sum_rate_bps_hz"
    assert len(lines) == 2 + 4  # one row per scheme


def test_cli_runs_are_reproducible(tmp_path, scenario_file):
    hashes = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert cli.main(["heatmap", "--scenario", scenario_file, "--out", str(out),
                         "--seed", "9", "--grid-res", "1.0"]) == 0
        hashes.append(hashlib.sha256((out / "heatmap.csv").read_bytes()).hexdigest())
    assert hashes[0] == hashes[1]
