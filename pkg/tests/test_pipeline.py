import json

import numpy as np
import pytest

from panelkit import cli, report
from panelkit.config import PipelineConfig, load_config, parse_config
from panelkit.errors import ConfigError
from panelkit.estimators import INTERCEPT
from panelkit.indices import PC1_NAME
from panelkit.panel import append_variable
from panelkit.pipeline import STAGES, run_pipeline, run_stage, stage4_regressors
from panelkit.synthetic import (
    OPENNESS,
    PLANTED_COEFFICIENTS,
    PLANTED_INTERCEPT,
    REGRESSORS,
    bundled_path,
    make_synthetic_panel,
)

CONFIG = str(bundled_path("synthetic.ini"))


@pytest.fixture(scope="module")
def config():
    return load_config(CONFIG)


@pytest.fixture(scope="module")
def full_report(config):
    return run_pipeline(config)


# -- config --------------------------------------------------------------------

def test_parse_config_flat_file(tmp_path):
    cfg = parse_config("input = data.csv\nresponse = y\nregressors = a, b\nseed = 3\n"
                       "lambda_grid = 0.1, 10, 5\nyear_effects = yes\n", tmp_path)
    assert cfg.input == str(tmp_path / "data.csv")
    assert cfg.regressors == ["a", "b"]
    assert cfg.lambda_grid == (0.1, 10.0, 5)
    assert cfg.year_effects is True


def test_parse_config_errors_name_field(tmp_path):
    with pytest.raises(ConfigError) as exc:
        parse_config("seed = many\n", tmp_path)
    assert exc.value.field == "seed"
    with pytest.raises(ConfigError) as exc:
        parse_config("adpi = oda=a, gdp=b\n", tmp_path)
    assert exc.value.field == "adpi"


def test_cv_requires_seed(config):
    with pytest.raises(ConfigError) as exc:
        PipelineConfig(**{**config.__dict__, "seed": None}).validate()
    assert exc.value.field == "seed"
    # a fixed lambda needs no seed
    PipelineConfig(**{**config.__dict__, "seed": None, "lambda_": 1.0}).validate(needs_cv=False)


def test_output_dir_precedence(monkeypatch, tmp_path):
    monkeypatch.setenv("PANELKIT_OUTPUT_DIR", str(tmp_path / "env"))
    assert PipelineConfig().resolved_output_dir() == tmp_path / "env"
    assert PipelineConfig(output_dir=str(tmp_path / "flag")).resolved_output_dir() == tmp_path / "flag"
    monkeypatch.delenv("PANELKIT_OUTPUT_DIR")
    assert PipelineConfig().resolved_output_dir().name == "panelkit_output"


# -- pipeline ------------------------------------------------------------------

def test_all_stages_in_order(full_report):
    assert full_report.names == list(STAGES)
    assert all(s.status == "ok" for s in full_report.stages)
    assert full_report.exit_code == 0


def test_stage4_design(full_report, config):
    vars4 = full_report.stage("pooled_ols_pc1").variables
    assert PC1_NAME in vars4
    assert not set(OPENNESS) & set(vars4)
    assert vars4 == stage4_regressors(config)
    for later in ("fixed_effects", "ridge_cv", "ridge_final"):
        assert full_report.stage(later).variables == vars4


def test_json_deterministic(config, full_report):
    assert report.render_json(run_pipeline(config)) == report.render_json(full_report)


def test_json_round_trip(full_report):
    text = report.render_json(full_report)
    assert report.render_json(json.loads(text)) == text


def test_planted_coefficients_recovered(config):
    panel = make_synthetic_panel(noise_sd=1e-6)
    fit = run_stage(config, "ols", panel=panel).stage("pooled_ols_full").result
    assert fit.coefficients[INTERCEPT].estimate == pytest.approx(PLANTED_INTERCEPT, abs=1e-3)
    est = np.array([fit.coefficients[v].estimate for v in REGRESSORS])
    assert np.abs(est - np.array(list(PLANTED_COEFFICIENTS.values()))).max() < 1e-3


def test_openness_block_is_collinear(full_report):
    vif_table = full_report.stage("diagnostics").result[2]
    assert set(vif_table.flagged) >= {"Exports", "Imports"}


def test_estimation_failure_halts_later_stages(config):
    panel = make_synthetic_panel()
    bad = config.replace(regressors=list(config.regressors) + ["GDPperCap_copy"])
    panel = append_variable(panel, "GDPperCap_copy",
                            dict(zip(panel.keys, 2 * panel.column("GDPperCap"))))
    rep = run_pipeline(bad, panel=panel)
    assert rep.stage("pooled_ols_full").status == "error"
    assert rep.stage("pooled_ols_full").error["type"] == "RankDeficient"
    for name in ("pca", "pooled_ols_pc1", "fixed_effects", "ridge_cv", "ridge_final"):
        assert rep.stage(name).status == "skipped"
    assert rep.stage("diagnostics").status == "ok"
    assert rep.stage("adpi").status == "ok"
    assert rep.exit_code == 3
    text = report.render_text(rep)
    assert "[skipped]" in text and "[error]" in text


def test_fixed_lambda_skips_cv(config):
    rep = run_stage(config.replace(lambda_=1.609), "ridge")
    assert rep.stage("ridge_cv").status == "skipped"
    assert rep.stage("ridge_final").status == "ok"
    assert rep.stage("ridge_final").result.lam == 1.609


# -- report rendering ------------------------------------------------------------

def test_format_number():
    assert report.format_number(-1746.96) == "-1,746.96"
    assert report.format_number(float("nan")) == "NA"
    assert report.format_number(1234567.891) == "1,234,567.89"


def test_render_report_files(full_report, tmp_path):
    paths = report.render_report(full_report, tmp_path)
    names = {p.name for p in paths}
    assert {"report.json", "report.txt", "01_ols_full.csv", "07_ridge.csv"} <= names
    plots = {p.name for p in (tmp_path / "plotdata").iterdir()}
    assert {"correlation_heatmap.csv", "vif.csv", "scree.csv", "biplot.csv", "cv_curve.csv"} <= plots
    head = (tmp_path / "01_ols_full.csv").read_text().splitlines()[0]
    assert head == ",".join(report.COEF_COLUMNS)


def test_render_formats_subset(full_report, tmp_path):
    paths = report.render_report(full_report, tmp_path, formats=("json",))
    assert {p.name for p in paths} == {"report.json", "timings.json"}


# -- CLI -----------------------------------------------------------------------

def test_cli_pipeline(tmp_path, capsys):
    assert cli.main(["pipeline", "--config", CONFIG, "--output-dir", str(tmp_path)]) == 0
    first = (tmp_path / "report.json").read_bytes()
    assert cli.main(["pipeline", "--config", CONFIG, "--output-dir", str(tmp_path)]) == 0
    assert (tmp_path / "report.json").read_bytes() == first


def test_cli_unknown_response(tmp_path, capsys):
    code = cli.main(["ols", "--config", CONFIG, "--response", "Nope", "--output-dir", str(tmp_path)])
    assert code == 2
    assert "Nope" in capsys.readouterr().err


def test_cli_unknown_flag(capsys):
    assert cli.main(["ols", "--bogus"]) == 1
    assert cli.main([]) == 1


def test_cli_missing_seed(tmp_path, capsys):
    ini = tmp_path / "c.ini"
    text = open(CONFIG).read().replace("seed = 42\n", "")
    ini.write_text(text.replace("input = synthetic_panel.csv", f"input = {bundled_path()}"))
    assert cli.main(["ridge", "--config", str(ini), "--output-dir", str(tmp_path / "o")]) == 1
    assert "seed" in capsys.readouterr().err


def test_cli_env_output_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PANELKIT_OUTPUT_DIR", str(tmp_path / "env"))
    assert cli.main(["diagnose", "--config", CONFIG]) == 0
    assert (tmp_path / "env" / "02_diagnostics.csv").exists()


def test_cli_ingest_check(capsys):
    assert cli.main(["ingest-check", "--config", CONFIG]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["rows"] == 150
    assert len(summary["countries"]) == 10
