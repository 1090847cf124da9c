import json
import math

import numpy as np
import pytest

from raman_egn.egn.model import ChannelNli, NliOptions, NliReport, nli_report
from raman_egn.egn.montecarlo import McSettings
from raman_egn.report import (COMPARE_COLUMNS, NLI_COLUMNS, compare_rows, db, emit_report, gap_summary, load_report,
                              nli_rows, read_csv, rows_to_csv)
from raman_egn.ssfm import SsfmResult

from conftest import desk_link, desk_plan

FAST = NliOptions(mc=McSettings(seed=2, batch=2**12))


def fake_channel(k, eta, sigma2=1e-6):
    by_class = {"SCI": sigma2 / 2, "X1": sigma2 / 4, "M0": sigma2 / 4}
    return ChannelNli(k, 10e9 * (k - 2), sigma2, eta, by_class, 4096, True, 0.01, True, 1.0)


def test_db_helper():
    assert db(1000.0) == 30.0
    assert db(2.0) == 3.01
    assert math.isnan(db(0.0)) and math.isnan(db(-1.0)) and math.isnan(db(math.inf))


def test_empty_report_is_header_only():
    text = emit_report(NliReport([], 0, FAST))
    assert text == ",".join(NLI_COLUMNS) + "\n"


def test_nli_rows_split_eta_by_group():
    report = NliReport([fake_channel(1, 1000.0)], 0, FAST)
    row = nli_rows(report)[0]
    assert row["eta_db"] == 30.0
    assert row["sci_db"] == db(500.0)
    assert row["xci_db"] == db(250.0)
    assert row["mci_db"] == db(250.0)


def test_csv_loads_with_numpy(tmp_path):
    report = NliReport([fake_channel(k, 10.0**k) for k in (1, 2, 3)], 5, FAST)
    path = tmp_path / "r.csv"
    emit_report(report, path)
    data = np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")
    assert list(data.dtype.names) == NLI_COLUMNS
    assert np.allclose(data["eta_db"], [10.0, 20.0, 30.0])
    assert np.allclose(data["freq_hz"], [-10e9, 0.0, 10e9])
    rows = read_csv(path)
    assert rows[0]["converged"] is True and rows[2]["channel"] == 3


def test_json_round_trip(tmp_path):
    plan = desk_plan(3)
    report = nli_report(plan, desk_link(plan, raman=False), [2], FAST)
    path = tmp_path / "r.json"
    emit_report(report, path, fmt="json")
    back = load_report(path)
    assert back.channels == report.channels
    assert back.options == report.options and back.seed == report.seed
    assert json.loads(path.read_text())["channels"][0]["channel"] == 2
    with pytest.raises(ValueError):
        emit_report(report, fmt="xml")


def test_compare_rows_and_gap():
    report = NliReport([fake_channel(1, 1000.0), fake_channel(2, 2000.0)], 0, FAST)
    sim = SsfmResult([1, 2], np.array([-10e9, 0.0]), np.array([1e3, 1e3]), np.array([500.0, 2000.0]))
    rows = compare_rows(report, sim)
    assert [r["delta_db"] for r in rows] == [round(30.0 - db(500.0), 3), 0.0]
    assert gap_summary(rows) == {"max_gap_db": 3.01, "mean_gap_db": 1.505}
    assert rows_to_csv(rows, COMPARE_COLUMNS).splitlines()[0] == ",".join(COMPARE_COLUMNS)
    assert math.isnan(gap_summary([])["max_gap_db"])


def test_gn_and_egn_agree_for_gaussian_channels():
    plan = desk_plan(1, fmt="GAUSSIAN")
    link = desk_link(plan)
    egn = nli_report(plan, link, "all", FAST)
    gn = nli_report(plan, link, "all", NliOptions(mode="gn", mc=FAST.mc))
    sim = SsfmResult([1], plan.freqs, np.array([1.0]), np.array([gn.channels[0].eta]))
    assert compare_rows(egn, sim)[0]["delta_db"] == 0.0
