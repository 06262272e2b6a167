import os
import subprocess
import sys

import pytest

from romheading.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, main

SHORT = "simulate.preset = E05\nsimulate.duration_s = 30\nseed = 4\n"


def cfg_file(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.fixture(scope="module")
def simulated(tmp_path_factory):
    d = tmp_path_factory.mktemp("sim")
    assert main(["--config", cfg_file(d, "mode = simulate\n" + SHORT), "--out", str(d)]) == EXIT_OK
    return d


def test_simulate_writes_inputs(simulated):
    names = {p.name for p in simulated.iterdir()}
    assert {"imu1.csv", "imu2.csv", "orientation1.csv", "orientation2.csv", "truth.csv"} <= names


def test_pipeline_matches_separate_modes(simulated, tmp_path, capsys):
    pipe = tmp_path / "pipe"
    assert main(["--config", cfg_file(tmp_path, "mode = pipeline\n" + SHORT), "--out", str(pipe)]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "eps_delta_rms_deg" in printed

    est = tmp_path / "est"
    text = (f"mode = estimate\ninput.orientation1 = {simulated / 'orientation1.csv'}\n"
            f"input.orientation2 = {simulated / 'orientation2.csv'}\n")
    assert main(["--config", cfg_file(tmp_path, text, "est.cfg"), "--out", str(est)]) == EXIT_OK
    assert (est / "timeline.csv").read_bytes() == (pipe / "timeline.csv").read_bytes()

    ev = tmp_path / "ev"
    text += f"mode = evaluate\ninput.truth = {simulated / 'truth.csv'}\ninput.timeline = {est / 'timeline.csv'}\n"
    text = text.replace("mode = estimate\n", "", 1)
    assert main(["--config", cfg_file(tmp_path, text, "ev.cfg"), "--out", str(ev)]) == EXIT_OK
    # the timeline passes through 9 significant digits on the way
    a, b = (dict(line.split(" = ") for line in (d / "summary.txt").read_text().splitlines()[1:]) for d in (ev, pipe))
    assert a.keys() == b.keys()
    assert all(float(a[k]) == pytest.approx(float(b[k]), rel=1e-6) for k in a)


def test_fuse_mode(simulated, tmp_path):
    text = f"mode = fuse\ninput.imu1 = {simulated / 'imu1.csv'}\ninput.imu2 = {simulated / 'imu2.csv'}\n"
    assert main(["--config", cfg_file(tmp_path, text), "--out", str(tmp_path / "f")]) == EXIT_OK
    assert (tmp_path / "f" / "orientation1.csv").is_file()


def test_mode_override(tmp_path):
    out = tmp_path / "o"
    assert main(["--config", cfg_file(tmp_path, "mode = pipeline\n" + SHORT), "--mode", "simulate",
                 "--out", str(out)]) == EXIT_OK
    assert not (out / "timeline.csv").exists()


@pytest.mark.parametrize("text", [
    "mode = pipeline\nwindow.lenght_s = 8\n",
    "mode = estimate\ninput.orientation1 = missing.csv\ninput.orientation2 = missing.csv\n",
    "window.length_s = 8\nwindow.interval_s = 20\n",
    "mode = pipeline\nsimulate.drift_deg_s = 0.8\n",
])
def test_config_errors_exit_2(tmp_path, capsys, text):
    assert main(["--config", cfg_file(tmp_path, text), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "line" in capsys.readouterr().err


def test_bad_data_exits_3(simulated, tmp_path, capsys):
    lines = (simulated / "orientation2.csv").read_text().splitlines(keepends=True)
    lines[3], lines[4] = lines[4], lines[3]
    bad = tmp_path / "bad.csv"
    bad.write_text("".join(lines))
    text = f"mode = estimate\ninput.orientation1 = {simulated / 'orientation1.csv'}\ninput.orientation2 = {bad}\n"
    assert main(["--config", cfg_file(tmp_path, text), "--out", str(tmp_path / "o")]) == EXIT_DATA
    err = capsys.readouterr().err
    assert "bad.csv, line 5" in err


def test_short_data_exits_3(simulated, tmp_path, capsys):
    lines = (simulated / "orientation2.csv").read_text().splitlines(keepends=True)[:500]
    short = tmp_path / "short.csv"
    short.write_text("".join(lines))
    text = f"mode = estimate\ninput.orientation1 = {simulated / 'orientation1.csv'}\ninput.orientation2 = {short}\n"
    assert main(["--config", cfg_file(tmp_path, text), "--out", str(tmp_path / "o")]) == EXIT_DATA
    assert "insufficient data" in capsys.readouterr().err


def test_module_entry_point_and_log_level(tmp_path):
    env = dict(os.environ, ROMHEADING_LOG="INFO")
    cfg = cfg_file(tmp_path, "mode = simulate\n" + SHORT)
    r = subprocess.run([sys.executable, "-m", "romheading", "--config", cfg, "--out", str(tmp_path / "o")],
                       capture_output=True, text=True, env=env, timeout=120)
    assert r.returncode == 0
    assert "INFO romheading: simulating preset E05" in r.stderr
    quiet = dict(os.environ, ROMHEADING_LOG="WARNING")
    r = subprocess.run([sys.executable, "-m", "romheading", "--config", cfg, "--out", str(tmp_path / "o")],
                       capture_output=True, text=True, env=quiet, timeout=120)
    assert r.returncode == 0 and r.stderr == ""


def test_help():
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
