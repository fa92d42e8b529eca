import subprocess
import sys
from pathlib import Path

import pytest

from figuregen import SchemaError, render_figures
from figuregen.render import EXPECTED_HEADER, main, read_rows

SWEEP_CSV = "\n".join([
    EXPECTED_HEADER,
    "snr-sweep@abc123,7,full,16,8,0,snr_db,0,1.1,1.05,0.01,",
    "snr-sweep@abc123,7,full,16,8,10,snr_db,10,1.3,1.25,0.01,",
    "snr-sweep@abc123,7,none,16,8,0,snr_db,0,0.4,0.39,0.01,",
    "snr-sweep@abc123,7,none,16,8,10,snr_db,10,0.6,0.58,0.01,",
    "snr-sweep@abc123,7,full,128,8,0,snr_db,0,1.8,1.78,0.01,",
    "snr-sweep@abc123,7,full,128,8,10,snr_db,10,2.0,1.97,0.01,",
]) + "\n"

MAXMIN_CSV = "\n".join([
    EXPECTED_HEADER,
    # maxmin rows: analytic empty, solver column set; must not crash
    "snr-levels@d00d,7,maxmin,16,4,-10,m,16,,0.35,0.01,1.2",
    "snr-levels@d00d,7,maxmin,32,4,-10,m,32,,0.55,0.01,1.9",
    "snr-levels@d00d,7,full,16,4,-10,m,16,,0.33,0.01,",
    "snr-levels@d00d,7,full,32,4,-10,m,32,,0.54,0.01,",
]) + "\n"


def test_render_basic_sweep(tmp_path):
    (tmp_path / "in").mkdir()
    (tmp_path / "in" / "snr-sweep.csv").write_text(SWEEP_CSV)
    paths = render_figures(tmp_path / "in", tmp_path / "out")
    assert [p.name for p in paths] == ["snr-sweep.svg"]
    svg = paths[0].read_text()
    # one legend entry per (mode, M) pair and per layer
    for label in ("full, M=16", "none, M=16", "full, M=128"):
        assert label in svg


def test_render_handles_empty_optional_columns(tmp_path):
    (tmp_path / "in").mkdir()
    (tmp_path / "in" / "snr-levels.csv").write_text(MAXMIN_CSV)
    paths = render_figures(tmp_path / "in", tmp_path / "out", unit="bits")
    assert paths[0].exists()
    svg = paths[0].read_text()
    assert "bits" in svg


def test_schema_mismatch_aborts(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("wrong,columns\n1,2\n")
    with pytest.raises(SchemaError):
        read_rows(bad)
    (tmp_path / "in").mkdir()
    (tmp_path / "in" / "strange.csv").write_text(
        EXPECTED_HEADER + "\nunknown-experiment,1,full,4,2,0,m,4,,0.1,0.01,\n")
    with pytest.raises(SchemaError):
        render_figures(tmp_path / "in", tmp_path / "out")


def test_cli_reports_schema_errors(tmp_path, capsys):
    (tmp_path / "in").mkdir()
    (tmp_path / "in" / "bad.csv").write_text("nope\n1\n")
    assert main(["--csv-dir", str(tmp_path / "in"),
                 "--out-dir", str(tmp_path / "out")]) == 1
    (tmp_path / "in" / "bad.csv").unlink()
    (tmp_path / "in" / "snr-sweep.csv").write_text(SWEEP_CSV)
    assert main(["--csv-dir", str(tmp_path / "in"),
                 "--out-dir", str(tmp_path / "out"),
                 "--format", "png"]) == 0
    out = capsys.readouterr().out
    assert "snr-sweep.png" in out


def test_rendering_is_deterministic(tmp_path):
    (tmp_path / "in").mkdir()
    (tmp_path / "in" / "snr-sweep.csv").write_text(SWEEP_CSV)
    a = render_figures(tmp_path / "in", tmp_path / "a")[0].read_bytes()
    b = render_figures(tmp_path / "in", tmp_path / "b")[0].read_bytes()
    assert a == b


def _run_primary_cli(cfg_text: str, tmp_path: Path, name: str) -> Path:
    cfg = tmp_path / f"{name}.cfg"
    cfg.write_text(cfg_text)
    out = tmp_path / f"csv-{name}"
    repo_src = Path(__file__).resolve().parents[2] / "src"
    proc = subprocess.run(
        [sys.executable, "-m", "hmimolab.cli", "run", str(cfg),
         "--output-dir", str(out)],
        capture_output=True, text=True, timeout=600,
        env={"PATH": "/usr/bin:/bin", "PYTHONPATH": str(repo_src)})
    assert proc.returncode == 0, proc.stderr
    return out


def test_acceptance_criterion_11_reference_figures(tmp_path):
    """Render the reference-curve and aperture CSVs produced by the
    simulation CLI; one series per (mode, M) pair must be present."""
    sweep_dir = _run_primary_cli(
        "[experiment]\nid = snr-sweep\nseed = 5\nn_trials = 400\n"
        "[sweep]\nvariable = snr_db\nvalues = 0 10 20\n",
        tmp_path, "sweep")
    aperture_dir = _run_primary_cli(
        "[experiment]\nid = aperture-coupling\nseed = 5\nn_trials = 300\n",
        tmp_path, "aperture")
    csv_dir = tmp_path / "csv"
    csv_dir.mkdir()
    for src in (sweep_dir / "snr-sweep.csv",
                aperture_dir / "aperture-coupling.csv"):
        (csv_dir / src.name).write_text(src.read_text())
    paths = render_figures(csv_dir, tmp_path / "figs")
    names = sorted(p.name for p in paths)
    assert names == ["aperture-coupling.svg", "snr-sweep.svg"]
    sweep_svg = (tmp_path / "figs" / "snr-sweep.svg").read_text()
    for label in ("full, M=16", "partial, M=16", "none, M=16",
                  "full, M=128", "partial, M=128", "none, M=128"):
        assert label in sweep_svg, f"missing series {label}"
    aperture_svg = (tmp_path / "figs" / "aperture-coupling.svg").read_text()
    for label in ("full", "partial", "none"):
        assert label in aperture_svg
    print("\n[PASS] criterion 11 (secondary): both figures rendered with one "
          "series per (mode, M) pair")
