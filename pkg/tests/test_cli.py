import numpy as np
import pytest

from raman_egn.cli import EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK, main
from raman_egn.config import load_config
from raman_egn.egn.model import nli_report
from raman_egn.report import compare_rows, read_csv
from raman_egn.ssfm import run_link

ONE_CHANNEL = """
[channels]
count = 1
spacing = "10.001 GHz"
bandwidth = "10 GHz"
power = "0 dBm"
format = "GAUSSIAN"

[run]
seed = 3

[[spans]]
length = "{length}"
attenuation = "0.2 dB/km"
dispersion = "17 ps/nm/km"
gamma = "{gamma} 1/W/km"
raman_product = "0.0889 1/km"
"""


@pytest.fixture
def config(tmp_path):
    def write(length="20 km", gamma=1.2, name="c.toml"):
        path = tmp_path / name
        path.write_text(ONE_CHANNEL.format(length=length, gamma=gamma))
        return str(path)

    return write


def test_profile_command(config, tmp_path):
    out = tmp_path / "p.csv"
    args = ["profile", "--config", config(), "--step", "5000", "--profile", "ode", "--out", str(out), "-q"]
    assert main(args) == EXIT_OK
    rows = read_csv(out)
    assert [r["z_m"] for r in rows] == [0.0, 5000.0, 10000.0, 15000.0, 20000.0]
    assert rows[0]["power_w"] == pytest.approx(1e-3)
    # in the coupled-power ODE a single channel has no Raman partner: pure exponential decay
    alpha = 0.2 / (10 * np.log10(np.e)) / 1e3
    assert rows[-1]["power_w"] == pytest.approx(1e-3 * np.exp(-alpha * 2e4), rel=1e-9)


def test_nli_command_writes_csv_and_json(config, tmp_path, capsys):
    cfg = config()
    assert main(["nli", "--config", cfg, "-q"]) == EXIT_OK
    header = capsys.readouterr().out.splitlines()[0]
    assert header.startswith("channel,freq_hz,eta_db")
    out = tmp_path / "r.json"
    assert main(["nli", "--config", cfg, "--out", str(out), "-q"]) == EXIT_OK
    assert '"channels"' in out.read_text()


def test_unconverged_run_exits_with_code_two(config, tmp_path):
    out = tmp_path / "r.csv"
    code = main(["nli", "--config", config(), "--tol-db", "1e-6", "--max-samples", "1024", "--out", str(out), "-q"])
    assert code == EXIT_NOT_CONVERGED
    assert read_csv(out)[0]["converged"] is False


def test_bad_config_exits_with_code_one(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[channels]\ncount = 0\n")
    assert main(["nli", "--config", str(bad), "-q"]) == EXIT_ERROR
    assert "error" in capsys.readouterr().err
    assert main(["nli", "--config", str(tmp_path / "missing.toml"), "-q"]) == EXIT_ERROR


def test_channel_out_of_range(config):
    assert main(["nli", "--config", config(), "--channel", "2", "-q"]) == EXIT_ERROR


def test_doubled_gamma_shows_up_as_six_db(config):
    """Model with gamma doubled against the split-step run at nominal gamma."""
    base = load_config(config())
    doubled = load_config(config(gamma=2.4, name="g.toml"))
    sim = run_link(base.plan, base.link, 2**13, seed=3)
    nominal = compare_rows(nli_report(base.plan, base.link), sim)[0]["delta_db"]
    delta = compare_rows(nli_report(doubled.plan, doubled.link), sim)[0]["delta_db"]
    assert abs(nominal) < 0.5
    assert delta - nominal == pytest.approx(20 * np.log10(2), abs=0.05)


def test_compare_command(config, tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["compare", "--config", config(), "--out", str(out), "-q"]) == EXIT_OK
    row = read_csv(out)[0]
    assert abs(row["delta_db"]) < 0.5
    assert "mean |delta eta|" in capsys.readouterr().err
