import csv
import io
import json
import math

import numpy as np
import pytest

from reslab.config import ConfigError, ExperimentConfig, load_config, parse_config_text, quick_config
from reslab.fitting import fit_power_law
from reslab.report import (
    HARD, REPORT, SOFT, ExperimentReport, emit_report, exit_code, load_json_report,
    render_csv, render_degree_table,
)


def test_fit_exact_power_law():
    x = [2, 4, 8, 16]
    fit = fit_power_law([(v, 7 * v**-2.0) for v in x])
    assert fit.slope == pytest.approx(-2.0, abs=1e-13)
    assert math.exp(fit.intercept) == pytest.approx(7.0, rel=1e-12)
    assert fit.residual <= 1e-14 and fit.n_points == 4
    assert fit.predict(32) == pytest.approx(7 / 1024, rel=1e-12)


def test_fit_constant_and_noisy():
    assert fit_power_law([(2, 3.0), (4, 3.0), (8, 3.0)]).slope == pytest.approx(0.0, abs=1e-14)
    rng = np.random.default_rng(0)
    x = 2.0 ** np.arange(1, 9)
    y = x**-1.0 * np.exp(0.01 * rng.standard_normal(x.size))
    fit = fit_power_law(zip(x, y))
    assert abs(fit.slope + 1) <= 0.02
    assert 0 < fit.slope_stderr < 0.02


@pytest.mark.parametrize("pts", [[(1, 1), (2, 2)], [(1, 1), (2, 0), (4, 1)], [(2, 1), (2, 2), (2, 3)],
                                 [(1, 1), (2, float("nan")), (4, 1)], [(-1, 1), (2, 1), (4, 1)]])
def test_fit_rejects_bad_input(pts):
    with pytest.raises(ValueError):
        fit_power_law(pts)


def _report():
    rep = ExperimentReport("demo", {"grid": 16}, 3)
    rep.add_row(4, "q", 0.5, 0.01)
    rep.add_row(8, "q", 0.25)
    rep.add_fit("q", fit_power_law([(4, 0.5), (8, 0.25), (16, 0.125)]))
    rep.add_flag("slope", 2, HARD, True, -1.0, "<= 0.1")
    return rep


def test_json_round_trip(tmp_path):
    rep = _report()
    rep.wall_time = 1.5
    p = emit_report(rep, tmp_path / "sub" / "r.json", "json", include_timing=True)
    back = load_json_report(p)[0]
    assert back.rows == rep.rows and back.fits == rep.fits
    assert back.flags[0].line() == rep.flags[0].line()
    assert back.wall_time == 1.5
    assert "wall_time" not in json.loads(emit_report(rep, tmp_path / "n.json", "json").read_text())["reports"][0]


def test_json_replaces_non_finite(tmp_path):
    rep = _report()
    rep.add_row(16, "bad", float("inf"))
    data = json.loads(emit_report(rep, tmp_path / "r.json", "json").read_text())
    assert data["reports"][0]["rows"][-1][2] is None


def test_csv_layout():
    rows = list(csv.reader(io.StringIO(render_csv([_report()]))))
    assert rows[0] == ["experiment", "scale", "quantity", "value", "stderr"]
    assert rows[1] == ["demo", "4", "q", "0.5", "0.01"]
    assert rows[2][4] == ""
    assert rows[3][:3] == ["demo", "fit", "q.slope"]
    assert render_csv([ExperimentReport("e", {}, 0)]) == "experiment,scale,quantity,value,stderr\n"


def test_emit_errors(tmp_path):
    with pytest.raises(ValueError):
        emit_report(_report(), tmp_path / "r.xml", "xml")
    (tmp_path / "file").write_text("")
    with pytest.raises(OSError):
        emit_report(_report(), tmp_path / "file" / "r.csv", "csv")


def test_flag_kinds_and_exit_codes():
    ok = _report()
    assert exit_code([ok]) == 0
    soft = _report()
    soft.add_flag("s", 7, SOFT, False, 0.6, "<= -0.35")
    assert exit_code([ok, soft]) == 2
    rep = _report()
    rep.add_flag("r", 10, REPORT, False, 0.0, "report")
    assert exit_code([rep]) == 2
    hard = _report()
    hard.add_flag("h", 3, HARD, False, 0.3, "<= 1e-10")
    assert exit_code([soft, hard]) == 1
    with pytest.raises(ValueError):
        ok.add_flag("x", 1, "advisory", True, 0, "")
    assert ok.flags[0].line() == "[PASS] criterion 2 (hard) slope: -1 vs <= 0.1"


def test_degree_table_text():
    txt = render_degree_table({"wide region combined": -2.5})
    assert "wide region combined" in txt and "-2.500" in txt
    assert txt.count("n/a") == 4


def test_config_defaults_and_quick():
    cfg = ExperimentConfig()
    assert cfg.grid == 64 and cfg.n_list == (4, 8, 16) and cfg.seeds == 10
    q = quick_config()
    assert q.quick and q.grid == 32
    assert "out" not in cfg.as_dict()
    assert cfg.as_dict()["n_list"] == [4, 8, 16]


def test_config_file_parsing(tmp_path):
    text = "grid = 128  # bigger\nn_list = 4, 8\ndelta = 2/3\nseeds = 3\nquick = no\n"
    cfg = parse_config_text(text)
    assert cfg.grid == 128 and cfg.n_list == (4, 8) and cfg.seeds == 3
    assert cfg.delta == pytest.approx(2 / 3)
    p = tmp_path / "c.ini"
    p.write_text("quick = yes\nseed = 9\n")
    c2 = load_config(p)
    assert c2.quick and c2.grid == 32 and c2.seed == 9


@pytest.mark.parametrize("text", ["grid = 48", "grid = 16\nn_list = 4, 8, 16", "nosuch = 1",
                                  "delta = 0.8", "format = xml", "quick = maybe", "seeds = 0",
                                  "trials = 2", "output_projector = other", "no equals sign"])
def test_config_validation(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")
