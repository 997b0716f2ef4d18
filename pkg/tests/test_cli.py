import io
import math
import json
import os

import pytest

from corrsop import analytic, cli
from corrsop.errors import ConfigError

U1 = [0.85, 0.9, -0.95]
U3 = [0.6, -0.7, 0.8]


def cfg_text(**kw):
    d = {"gamma_b_db": [10, 20], "gamma_e_db": 5, "M": 2}
    d.update(kw)
    return json.dumps(d)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_minimal_defaults():
    s = cli.parse_config(cfg_text())
    assert s.mc.workers == 1 and s.precision == analytic.DEFAULT
    assert s.correlation.eta == (0.0, 0.0) and s.methods == ("asymptotic",)
    assert s.system(10).gamma_bar_b == pytest.approx(10.0)


@pytest.mark.parametrize("kw,frag", [
    (dict(correlation={"eta": [1.0, 0.2]}), "eta"),
    (dict(correlation={"eta": [0.1, 0.2, 0.3]}), "correlation.eta"),
    (dict(gamma_b_db=[]), "gamma_b_db"),
    (dict(gamma_b_db=[10, 10]), "strictly increasing"),
    (dict(combiners=[]), "combiners"),
    (dict(methods=[]), "methods"),
    (dict(methods=["guess"]), "guess"),
    (dict(bogus=1), "bogus"),
    (dict(correlation={"eta": [0, 0], "rho": 1}), "correlation"),
    (dict(mc={"trials": 10}), "mc"),
    (dict(M=0), "M"),
    (dict(tas_mode="SIMO", N_t=2), "SIMO"),
    (dict(methods=["exact"], combiners=["EGC"]), "EGC"),
    (dict(methods=["exact"], N_E=2), "N_t = N_E = 1"),
    (dict(methods=["exact"], combiners=["MRC"], correlation={"eta": [0.2, 0.5]}), "equal"),
])
def test_config_errors(kw, frag):
    with pytest.raises(ConfigError, match=frag):
        cli.parse_config(cfg_text(**kw))


def test_json_error_has_position():
    with pytest.raises(ConfigError, match="line 2"):
        cli.parse_config('{"M": 2,\n  "gamma_b_db": [1,, 2]}')


def test_recipe_series_path_in_message():
    doc = {"series": [json.loads(cfg_text()), json.loads(cfg_text(M="x"))]}
    with pytest.raises(ConfigError, match=r"series\[1\]\.M"):
        cli.parse_recipe(json.dumps(doc))


@pytest.mark.parametrize("name", ["fig2", "fig3", "fig4", "fig5", "fig6"])
def test_bundled_recipes_parse(name):
    specs = cli.parse_recipe(cli.recipe_text(name))
    assert specs


def test_recipes_use_printed_matrices():
    fig2 = cli.parse_recipe(cli.recipe_text("fig2"))
    assert fig2[0].correlation.eta == tuple(U1)
    fig4 = cli.parse_recipe(cli.recipe_text("fig4"))
    assert fig4[0].correlation.eta == tuple(U3)


def test_row_count_and_order():
    s = cli.parse_config(cfg_text(combiners=["MRC", "SC"], methods=["asymptotic", "montecarlo"],
                                  mc={"trials": 5000}))
    pts = cli.run_sweep(s)
    assert len(pts) == 2 * 2 * 2
    assert [(p.gamma_b_db, p.combiner, p.method) for p in pts[:4]] == [
        (10, "MRC", "asymptotic"), (10, "MRC", "montecarlo"), (10, "SC", "asymptotic"), (10, "SC", "montecarlo")]
    for p in pts:
        assert p.sop >= 0
        assert (p.ci_low is None) == (p.method != "montecarlo")


def test_regime_flag():
    s = cli.parse_config(cfg_text(gamma_b_db=[0, 40], M=3, correlation={"eta": U1}))
    for p in cli.run_sweep(s):
        assert (p.regime_flag == cli.OUTSIDE_REGIME) == (p.sop > 0.5)
    assert any(p.regime_flag for p in cli.run_sweep(s))


def test_csv_format(tmp_path):
    out = tmp_path / "o.csv"
    s = cli.parse_config(cfg_text(methods=["asymptotic", "montecarlo"], mc={"trials": 2000}))
    cli.run_sweep(s, str(out))
    raw = out.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    lines = raw.decode("utf-8").splitlines()
    assert lines[0].split(",")[:8] == ["gamma_b_db", "combiner", "tas_mode", "method", "sop", "ci_low",
                                       "ci_high", "regime_flag"]
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert row["ci_low"] == "" and len(row["sop"].replace(".", "").replace("e-0", "").lstrip("0")) <= 9
    assert not [f for f in os.listdir(tmp_path) if f.startswith(".tmp-")]


def test_exact_and_mc_agree_along_sweep():
    s = cli.parse_config(cfg_text(M=2, combiners=["MRC", "SC"], methods=["exact", "montecarlo"],
                                  correlation={"eta": [0.5, 0.5], "lambda_e": 0.3},
                                  gamma_b_db=[0, 10, 20], mc={"trials": 2_000_000, "seed": 4}))
    pts = cli.run_sweep(s)
    for ex, mc in zip(pts[0::2], pts[1::2]):
        assert ex.method == "exact" and mc.method == "montecarlo"
        sigma = (mc.sop * (1 - mc.sop) / 2_000_000) ** 0.5
        assert abs(mc.sop - ex.sop) < 3 * sigma


def test_fig4_crossing():
    specs = cli.parse_recipe(cli.recipe_text("fig4"))
    specs = [cli.SweepSpec(**{**s.__dict__, "methods": ("asymptotic",)}) for s in specs]
    pts = cli.run_sweep(specs)
    val = {(p.series, p.combiner, p.lambda_e): p.sop for p in pts}
    for k in ("MRC", "SC", "EGC"):
        assert val["U3", k, 0.0] > val["independent", k, 0.0]
        assert val["U3", k, 0.9] < val["independent", k, 0.9]


def test_fully_correlated_routes():
    both = cfg_text(N_t=2, tas_mode="TAS_NO_EVE_CSI", gamma_b_db=[0, 20], gamma_e_db=10,
                    correlation={"eta": [1, 1], "lambda_e": 1, "fully_correlated_main": True,
                                 "fully_correlated_eve": True})
    pts = cli.run_sweep(cli.parse_config(both))
    low = [p for p in pts if p.gamma_b_db == 0]
    assert all(p.regime_flag == cli.INFEASIBLE and p.sop == 1.0 for p in low)
    assert all(p.regime_flag == "" for p in pts if p.gamma_b_db == 20)
    with pytest.raises(ConfigError):
        cli.parse_config(cfg_text(correlation={"eta": [1, 1], "lambda_e": 0.3, "fully_correlated_main": True}))


def test_main_det(capsys):
    assert cli.main(["det", "--eta", "-0.6,0.7,-0.8"]) == 0
    out = capsys.readouterr().out
    assert "0.505392" in out
    assert cli.main(["det", "--matrix", "1,.765,-.8075;.765,1,-.855;-.8075,-.855,1"]) == 0
    assert "0.0880249" in capsys.readouterr().out
    assert cli.main(["det", "--eta", "1.2"]) == 2
    assert cli.main(["det", "--matrix", "1,2;3"]) == 2


def test_main_sweep_and_errors(tmp_path):
    good = write(tmp_path, "g.json", cfg_text())
    out = str(tmp_path / "o.csv")
    assert cli.main(["sweep", "--config", good, "--out", out]) == 0
    assert cli.main(["sweep", "--config", write(tmp_path, "b.json", cfg_text(gamma_b_db=[])), "--out", out]) == 2
    assert cli.main(["sweep", "--config", str(tmp_path / "missing.json"), "--out", out]) == 2
    assert cli.main(["sweep", "--config", good, "--out", out, "--trials", "5"]) == 2


def test_main_nonconvergence(tmp_path):
    text = cfg_text(methods=["exact"], combiners=["MRC"], correlation={"eta": [0.9, 0.9]},
                    precision={"quad_nodes": 8, "rel_tol": 1e-14, "abs_tol": 1e-16})
    assert cli.main(["sweep", "--config", write(tmp_path, "c.json", text), "--out",
                     str(tmp_path / "o.csv")]) == 3


def test_validate_default_passes():
    buf = io.StringIO()
    assert cli.main(["validate"], out=buf) == 0
    rows = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert {r["check"] for r in rows} == set(cli.CHECKS)
    assert all(r["passed"] for r in rows)
    det = next(r for r in rows if r["check"] == "det_u1")
    assert det["detail"]["det"] == pytest.approx(0.088, abs=1e-3)


def test_validate_catches_wrong_prefactor(monkeypatch, tmp_path):
    real = analytic.combiner_prefactor
    # SC off by 1%: M! no longer comes out of the SC/MRC quotient
    monkeypatch.setattr(analytic, "combiner_prefactor",
                        lambda kind, M: real(kind, M) * (1.01 if kind.value == "SC" else 1.0))
    conf = write(tmp_path, "v.json", json.dumps({"checks": ["ratio_sc_mrc", "det_u1"]}))
    buf = io.StringIO()
    assert cli.main(["validate", "--config", conf], out=buf) == 1
    rows = {json.loads(line)["check"]: json.loads(line)["passed"] for line in buf.getvalue().splitlines()}
    assert rows == {"ratio_sc_mrc": False, "det_u1": True}


def test_validate_config_errors(tmp_path):
    bad = write(tmp_path, "v.json", json.dumps({"checks": ["nope"]}))
    assert cli.main(["validate", "--config", bad]) == 2


def test_fig2_monte_carlo_approaches_asymptote():
    spec = cli.parse_recipe(cli.recipe_text("fig2"))[0]
    spec = cli.SweepSpec(**{**spec.__dict__, "gamma_b_grid": (20.0, 25.0, 30.0),
                            "mc": cli.mcsim.McPlan(trials=10 ** 7, seed=1)})
    pts = cli.run_sweep(spec)
    for kind in ("MRC", "SC", "EGC"):
        asy = [p.sop for p in pts if p.combiner == kind and p.method == "asymptotic"]
        mc = [p.sop for p in pts if p.combiner == kind and p.method == "montecarlo"]
        gaps = [abs(math.log(a / m)) for a, m in zip(asy, mc)]
        assert gaps[0] > gaps[1] > gaps[2]
