from pathlib import Path

import numpy as np
import pytest

from mola_plots import SchemaError, plot_landscape, plot_loss, plot_maps
from mola_plots.cli import main


def write_loss_csv(path, rows):
    lines = ["delta,n_a,lambda"]
    lines += [f"{d},{n},{lam}" for d, n, lam in rows]
    path.write_text("\n".join(lines) + "\n")


def write_landscape_csv(path, rows):
    lines = ["n0,n1,n2,count,p,neglogp"]
    lines += [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")


def write_map_csv(path, grid):
    lines = ["i,j,use"]
    for i, row in enumerate(grid):
        for j, u in enumerate(row):
            lines.append(f"{i},{j},{u}")
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture
def loss_csv(tmp_path):
    # A punctuated curve that saturates at 1 (total-loss plateau).
    rows = []
    lam = 0.0
    for i in range(101):
        d = round(0.01 * i, 2)
        if i == 30:
            lam = 0.45
        if i == 55:
            lam = 1.0
        rows.append((d, int(400 * (1 - lam)), lam))
    p = tmp_path / "loss_curve_4.4.csv"
    write_loss_csv(p, rows)
    return p


class TestLoss:
    def test_creates_image(self, loss_csv, tmp_path):
        out = tmp_path / "loss.png"
        result = plot_loss([loss_csv], out)
        assert result == out
        assert out.stat().st_size > 0

    def test_one_panel_per_input(self, loss_csv, tmp_path):
        second = tmp_path / "loss_curve_5.9.csv"
        second.write_text(loss_csv.read_text())
        out = tmp_path / "both.png"
        plot_loss([loss_csv, second], out)
        assert out.stat().st_size > 0

    def test_plateau_reaches_one(self, loss_csv, tmp_path):
        # Smoke contract: the rendered curve's data includes the lambda = 1
        # plateau; verify on the parsed values the renderer drew from.
        import csv

        with loss_csv.open() as fh:
            lams = [float(r["lambda"]) for r in csv.DictReader(fh)]
        assert max(lams) == 1.0
        out = tmp_path / "plateau.png"
        plot_loss([loss_csv], out)
        assert out.stat().st_size > 0

    def test_empty_csv_errors_without_file(self, tmp_path):
        bad = tmp_path / "empty.csv"
        bad.write_text("")
        out = tmp_path / "nope.png"
        with pytest.raises(SchemaError):
            plot_loss([bad], out)
        assert not out.exists()

    def test_missing_column_named(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("delta,n_a\n0.0,5\n")
        with pytest.raises(SchemaError, match="lambda"):
            plot_loss([bad], tmp_path / "x.png")


class TestLandscape:
    def test_creates_image(self, tmp_path):
        p = tmp_path / "landscape_4.4_0.26.csv"
        write_landscape_csv(
            p,
            [
                (585, 200, 115, 50, 0.5, 0.6931471805599453),
                (342, 400, 158, 30, 0.3, 1.2039728043259361),
                (100, 600, 200, 20, 0.2, 1.6094379124341003),
            ],
        )
        out = tmp_path / "landscape.png"
        assert plot_landscape(p, out) == out
        assert out.stat().st_size > 0

    def test_empty_errors(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("n0,n1,n2,count,p,neglogp\n")
        with pytest.raises(SchemaError, match="no data rows"):
            plot_landscape(p, tmp_path / "x.png")

    def test_schema_mismatch_named(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(SchemaError, match="n0"):
            plot_landscape(p, tmp_path / "x.png")


class TestMaps:
    def test_categorical_raster(self, tmp_path, loss_csv):
        rng = np.random.default_rng(0)
        p = tmp_path / "best_map.csv"
        write_map_csv(p, rng.integers(0, 3, size=(6, 6)))
        out = tmp_path / "map.png"
        assert plot_maps([p], out) == out
        assert out.stat().st_size > 0

    def test_bad_use_code(self, tmp_path):
        p = tmp_path / "bad_map.csv"
        write_map_csv(p, [[0, 1], [2, 7]])
        with pytest.raises(SchemaError, match="use code 7"):
            plot_maps([p], tmp_path / "x.png")

    def test_incomplete_map(self, tmp_path):
        p = tmp_path / "gap.csv"
        p.write_text("i,j,use\n0,0,1\n1,1,2\n")
        with pytest.raises(SchemaError, match="incomplete"):
            plot_maps([p], tmp_path / "x.png")


FROZEN = Path(__file__).resolve().parents[2] / "tests" / "golden" / "frozen"


class TestFrozenInstanceSmoke:
    """All three commands against the committed frozen-instance outputs."""

    def test_loss_panels(self, tmp_path):
        curves = sorted(FROZEN.glob("loss_curve_*.csv"))
        if not curves:
            pytest.skip("frozen goldens not built")
        out = tmp_path / "frozen_loss.png"
        assert plot_loss(curves, out) == out
        assert out.stat().st_size > 0

    def test_landscape_heatmap(self, tmp_path):
        landscapes = sorted(FROZEN.glob("landscape_*.csv"))
        if not landscapes:
            pytest.skip("frozen goldens not built")
        out = tmp_path / "frozen_landscape.png"
        assert plot_landscape(landscapes[0], out) == out
        assert out.stat().st_size > 0

    def test_map_rasters(self, tmp_path):
        maps = sorted(FROZEN.glob("cells/*/best_map.csv"))
        if not maps:
            pytest.skip("frozen goldens not built")
        out = tmp_path / "frozen_maps.png"
        assert plot_maps(maps, out) == out
        assert out.stat().st_size > 0


class TestCli:
    def test_loss_command(self, loss_csv, tmp_path, capsys):
        out = tmp_path / "cli.png"
        assert main(["loss", str(loss_csv), "-o", str(out)]) == 0
        assert out.exists()
        assert "wrote" in capsys.readouterr().out

    def test_schema_failure_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("x\n1\n")
        assert main(["landscape", str(bad), "-o", str(tmp_path / "x.png")]) == 1
        assert "error" in capsys.readouterr().err

    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["loss"])  # missing -o and csv
        assert exc.value.code == 2
