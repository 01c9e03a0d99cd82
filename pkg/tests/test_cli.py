import json
import subprocess
import sys

import numpy as np
import pytest

from slitwave import output
from slitwave.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main, run_scenario
from slitwave.params import ConfigError, talbot_length
from slitwave.scenarios import PRESETS, load_scenario, parse_config

SMALL = ["--grid-nx", "48", "--grid-nz", "16", "--per-slit", "2"]
FILES = ["density.csv", "density.pgm", "trajectories.json", "fringes.csv", "summary.json"]


def run(tmp_path, *args):
    return main(["run", *args, "--out", str(tmp_path)])


@pytest.mark.parametrize(
    "preset, extra, z_t",
    [
        ("neutron7", [], 100.0),
        ("talbot512", ["--traj-slits", "1"], 2500.0),
        ("grating64", ["--traj-slits", "1", "--zmax-talbots", "4"], 1e6),
        ("fullerene9", [], 2.5e7),
    ],
)
def test_presets_report_their_talbot_length(tmp_path, capsys, preset, extra, z_t):
    assert run(tmp_path, preset, *SMALL, *extra) == EXIT_OK
    line = capsys.readouterr().out.strip()
    assert line.startswith(f"{preset}: z_T = {z_t:.6g} nm")
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["talbot_length"] == z_t == talbot_length(PRESETS[preset].params)
    assert sorted(p.name for p in tmp_path.iterdir()) == sorted(FILES)


def test_outputs_are_well_formed(tmp_path):
    assert run(tmp_path, "neutron7", *SMALL) == EXIT_OK
    grid = output.grid_from_csv((tmp_path / "density.csv").read_text())
    assert grid.samples.shape == (16, 48)
    assert grid.samples.max() == 1.0 and grid.samples.min() >= 0.0
    assert grid.z_max == 400.0 and grid.x_min == -17.5
    pixels = output.read_pgm((tmp_path / "density.pgm").read_bytes())
    assert pixels.shape == (16, 48)
    trajs = json.loads((tmp_path / "trajectories.json").read_text())
    assert len(trajs) == 14 and all(t["status"] == "completed" for t in trajs)
    for t in trajs:
        zs = [z for _, z in t["points"]]
        assert zs[0] == 0.0 and zs[-1] == 400.0 and all(np.diff(zs) > 0)
    header, *rows = (tmp_path / "fringes.csv").read_text().splitlines()
    assert header == "z,x,density"
    assert {float(r.split(",")[0]) for r in rows} == {50.0, 100.0, 200.0}
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["trajectories"] == {"launched": 14, "completed": 14, "aborted_node": 0, "aborted_bounds": 0}


def test_far_field_preset_adds_closed_form_column(tmp_path):
    assert run(tmp_path, "farfield7", "--grid-nx", "32", "--grid-nz", "8", "--per-slit", "1") == EXIT_OK
    header, *rows = (tmp_path / "fringes.csv").read_text().splitlines()
    assert header == "z,x,density,closed_form"
    data = np.array([[float(v) for v in r.split(",")] for r in rows])
    assert data.shape == (4001, 4)
    assert np.max(np.abs(data[:, 2] - data[:, 3])) < 1e-2


def test_flags_override_preset_values(tmp_path):
    assert run(tmp_path, "neutron7", *SMALL, "--pitch-nm", "10", "--lambda-nm", "1.0") == EXIT_OK
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["talbot_length"] == 200.0
    assert summary["params"]["slit_pitch"] == 10.0


def test_config_file_with_preset_and_flags(tmp_path):
    cfg = tmp_path / "my.conf"
    cfg.write_text("# smaller neutron run\npreset = neutron7\nslit_count = 3\ngrid_nx = 40  # columns\ngrid_nz = 10\n")
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--per-slit", "1", "--out", str(out)]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["params"]["slit_count"] == 3
    assert summary["grid"]["nx"] == 40
    assert summary["trajectories"]["launched"] == 3


def test_standalone_config_file(tmp_path):
    cfg = tmp_path / "twoslit.conf"
    cfg.write_text(
        "wavelength = 0.5\nslit_count = 2\nslit_pitch = 5\nslit_width = 1\n"
        "grid_nx = 30\ngrid_nz = 6\nper_slit = 1\nfringe_planes_talbots = 0.5, 1\n"
    )
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["scenario"] == "twoslit"
    assert summary["talbot_length"] == 100.0


@pytest.mark.parametrize(
    "args",
    [
        ["run", "nosuchpreset"],
        ["run", "neutron7", "--slits", "0"],
        ["run", "neutron7", "--width-nm", "50"],
        ["run", "neutron7", "--zmax-talbots", "0.25"],  # fringe planes fall outside the grid
        ["run", "neutron7", "--grid-nx", "abc"],
        ["frobnicate"],
    ],
)
def test_config_errors_exit_2(tmp_path, capsys, args):
    assert main(args + ["--out", str(tmp_path / "o")] if args[0] == "run" else args) == EXIT_CONFIG
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize(
    "text", ["wavelength 0.5\n", "colour = blue\n", "preset = neutron7\ngrid_nx = many\n", "preset = nope\n", "slit_count = 3\n"]
)
def test_bad_config_files_exit_2(tmp_path, text):
    cfg = tmp_path / "bad.conf"
    cfg.write_text(text)
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_parse_config_errors_name_the_line():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("preset = neutron7\nbogus = 1\n")


def test_output_path_that_is_a_file_exits_3(tmp_path):
    blocker = tmp_path / "taken"
    blocker.write_text("x")
    assert main(["run", "neutron7", *SMALL, "--out", str(blocker)]) == EXIT_IO
    assert blocker.read_text() == "x"


def test_failed_write_removes_partial_outputs(tmp_path):
    out = tmp_path / "out"
    out.mkdir()
    (out / "density.pgm").mkdir()  # writing the image will fail after the CSV exists
    scenario = load_scenario("neutron7", {"grid_nx": 16, "grid_nz": 4, "per_slit": 1})
    with pytest.raises(OSError):
        run_scenario(scenario, out)
    assert sorted(p.name for p in out.iterdir()) == ["density.pgm"]
    assert main(["run", "neutron7", "--grid-nx", "16", "--grid-nz", "4", "--per-slit", "1", "--out", str(out)]) == EXIT_IO


def test_outputs_identical_across_worker_counts(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "neutron7", *SMALL, "--out", str(a)]) == EXIT_OK
    assert main(["run", "neutron7", *SMALL, "--workers", "3", "--out", str(b)]) == EXIT_OK
    for name in FILES:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_log_mapping_flag(tmp_path):
    assert run(tmp_path, "neutron7", *SMALL, "--mapping", "log", "--gamma", "3") == EXIT_OK
    pixels = output.read_pgm((tmp_path / "density.pgm").read_bytes())
    assert pixels.min() == 0


def test_hidden_oracle_command(capsys):
    assert main(["oracle", "neutron7", "--points", "5"]) == EXIT_OK
    header, *rows = capsys.readouterr().out.strip().splitlines()
    assert header.startswith("x_nm,")
    assert len(rows) == 5
    assert max(float(r.split(",")[-1]) for r in rows) < 1e-6


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "slitwave", "run", "neutron7", *SMALL, "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "z_T = 100 nm" in proc.stdout
