import json

from lineage_mdi_figures.cli import main

from conftest import BUNDLE


def test_renders_figure(tmp_path):
    out = tmp_path / "fig.png"
    assert main(["mdi-histogram", "--bundle", str(BUNDLE), "--out", str(out)]) == 0
    assert out.exists() and out.stat().st_size > 0


def test_unknown_kind_is_usage_error(tmp_path, capsys):
    code = main(["pie-chart", "--bundle", str(BUNDLE), "--out", str(tmp_path / "x.png")])
    assert code == 1
    assert "usage error" in capsys.readouterr().err


def test_missing_bundle_is_data_error(tmp_path):
    code = main([
        "mdi-histogram",
        "--bundle", str(tmp_path / "нет.json"),
        "--out", str(tmp_path / "x.png"),
    ])
    assert code == 2


def test_missing_table_names_it(tmp_path, capsys):
    bundle = json.loads(BUNDLE.read_text())
    del bundle["trend"]
    crippled = tmp_path / "crippled.json"
    crippled.write_text(json.dumps(bundle))
    code = main(["scatter-lowess", "--bundle", str(crippled), "--out", str(tmp_path / "x.png")])
    assert code == 2
    assert "trend" in capsys.readouterr().err


def test_custom_size(tmp_path):
    out = tmp_path / "small.png"
    assert main([
        "wcc-sizes", "--bundle", str(BUNDLE), "--out", str(out),
        "--width", "4", "--height", "3", "--dpi", "72",
    ]) == 0
    assert out.exists()
