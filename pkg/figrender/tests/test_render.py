"""End-to-end checks for the CSV panel renderer.

The fixture corpus is produced by the magnomech CLI in a subprocess, so the
renderer is exercised strictly across the file interface.
"""

import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from figrender.cli import main
from figrender.panels import PanelSpec, SchemaMismatch, read_table
from figrender.render import (
    MONTAGE_PANELS,
    PANEL_IDS,
    build_figure,
    build_montage,
    render,
    render_all,
)

RESOLUTION = "7"


@pytest.fixture(scope="session")
def panel_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("panels")
    driver = (
        "import sys\n"
        "from magnomech.cli import main\n"
        "out = sys.argv[1]\n"
        "rc = 0\n"
        "for pid in sys.argv[3:]:\n"
        "    rc = rc or main(['figure', pid, '--resolution', sys.argv[2], '--out', out])\n"
        "sys.exit(rc)\n"
    )
    proc = subprocess.run(
        [sys.executable, "-c", driver, str(out), RESOLUTION, *PANEL_IDS],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return out


def column_array(table, variant, quantity):
    return np.array(
        [np.nan if v is None else v for v in table.values(variant, quantity)],
        dtype=float,
    )


class TestRenderAll:
    def test_full_directory(self, panel_dir, tmp_path):
        report = render_all(panel_dir, tmp_path)
        assert report.missing == ()
        assert set(report.rendered) == set(PANEL_IDS) | {"fig3_montage"}
        assert report.warnings == ()
        for name in report.rendered:
            path = tmp_path / f"{name}.png"
            assert path.is_file() and path.stat().st_size > 0

    def test_partial_directory_lists_missing(self, panel_dir, tmp_path):
        csv_dir = tmp_path / "csv"
        csv_dir.mkdir()
        keep = ("fig4a", "fig5d", "fig3a")
        for name in keep:
            shutil.copy(panel_dir / f"{name}.csv", csv_dir / f"{name}.csv")
        report = render_all(csv_dir, tmp_path / "imgs")
        assert set(report.rendered) == set(keep)
        assert set(report.missing) == set(PANEL_IDS) - set(keep)
        assert not (tmp_path / "imgs" / "fig3_montage.png").exists()


class TestHysteresis:
    def test_fig2b_has_distinct_branches_per_rotation(self, panel_dir):
        table = read_table(panel_dir / "fig2b.csv")
        fig, warnings = build_figure(table)
        assert warnings == []
        lines = {line.get_label(): line for line in fig.axes[0].lines}
        assert set(lines) == {"cw up", "cw down", "ccw up", "ccw down"}
        for variant in ("cw", "ccw"):
            up = lines[f"{variant} up"].get_ydata()
            down = lines[f"{variant} down"].get_ydata()
            both = np.isfinite(up) & np.isfinite(down)
            assert both.any()
            assert np.nanmax(np.abs(up[both] - down[both])) > 0.0
        cw = lines["cw up"].get_ydata()
        ccw = lines["ccw up"].get_ydata()
        both = np.isfinite(cw) & np.isfinite(ccw)
        assert np.nanmax(np.abs(cw[both] - ccw[both])) > 0.0
        assert lines["cw up"].get_linestyle() == "-"
        assert lines["cw down"].get_linestyle() == "--"

    def test_branch_payload_matches_csv(self, panel_dir):
        table = read_table(panel_dir / "fig2a.csv")
        fig, _ = build_figure(table)
        lines = {line.get_label(): line for line in fig.axes[0].lines}
        for variant in ("cw", "ccw"):
            for direction, key in (("up", "M_up"), ("down", "M_down")):
                got = lines[f"{variant} {direction}"].get_ydata()
                want = column_array(table, variant, key)
                assert np.array_equal(np.isnan(got), np.isnan(want))
                assert np.array_equal(got[~np.isnan(want)], want[~np.isnan(want)])


class TestMontage:
    def test_quadrant_layout(self, panel_dir):
        tables = {p: read_table(panel_dir / f"{p}.csv") for p in MONTAGE_PANELS}
        fig, warnings = build_montage(tables)
        assert warnings == []
        positions = {}
        for ax in fig.axes:
            title = ax.get_title(loc="left")
            if title in MONTAGE_PANELS:
                spec = ax.get_subplotspec().get_topmost_subplotspec()
                assert spec.get_gridspec().get_geometry() == (2, 2)
                positions[title] = (spec.rowspan.start, spec.colspan.start)
        assert positions == {
            "fig3a": (0, 0),
            "fig3b": (0, 1),
            "fig3c": (1, 0),
            "fig3d": (1, 1),
        }

    def test_montage_written_when_all_quadrants_present(self, panel_dir, tmp_path):
        report = render_all(panel_dir, tmp_path, image_format="svg")
        assert "fig3_montage" in report.rendered
        assert (tmp_path / "fig3_montage.svg").is_file()


class TestDensityPayload:
    def test_image_matches_csv_exactly(self, panel_dir):
        table = read_table(panel_dir / "fig3a.csv")
        fig, _ = build_figure(table)
        image = fig.axes[0].images[0]
        got = np.ma.asarray(image.get_array()).T
        n0 = len(set(table.axes[0]))
        n1 = len(set(table.axes[1]))
        variant = table.variants[0]
        want = column_array(table, variant, table.quantity_of(variant)).reshape(n0, n1)
        assert got.shape == want.shape
        mask = np.isnan(want)
        assert np.array_equal(np.ma.getmaskarray(got), mask)
        assert np.array_equal(np.asarray(got)[~mask], want[~mask])
        assert mask.any(), "resolution-7 quadrant should include unstable cells"

    def test_colorbar_round_trips_within_quantization(self, panel_dir):
        table = read_table(panel_dir / "fig3a.csv")
        fig, _ = build_figure(table)
        fig.canvas.draw()
        image = fig.axes[0].images[0]
        cmap, norm = image.cmap, image.norm
        lut = np.asarray(cmap(np.linspace(0.0, 1.0, cmap.N)))
        spread = norm.vmax - norm.vmin
        assert spread > 0.0
        variant = table.variants[0]
        values = column_array(table, variant, table.quantity_of(variant))
        values = values[np.isfinite(values)]
        for value in values:
            rgba = np.asarray(cmap(norm(value)))
            index = int(np.argmin(np.abs(lut - rgba).sum(axis=1)))
            recovered = norm.inverse((index + 0.5) / cmap.N)
            assert abs(recovered - value) <= spread / (cmap.N - 1)


class TestLinePayload:
    def test_curves_match_csv_exactly(self, panel_dir):
        table = read_table(panel_dir / "fig5d.csv")
        fig, _ = build_figure(table)
        ax = fig.axes[0]
        lines = {line.get_label(): line for line in ax.lines}
        assert set(lines) == set(table.variants)
        x = np.asarray(table.axes[0], dtype=float)
        for variant in table.variants:
            line = lines[variant]
            assert np.array_equal(line.get_xdata(), x)
            want = column_array(table, variant, "delta_E_ab")
            got = line.get_ydata()
            assert np.array_equal(np.isnan(got), np.isnan(want))
            finite = ~np.isnan(want)
            assert np.array_equal(got[finite], want[finite])
        assert ax.get_xlabel() == table.axis_labels[0]


class TestEmptyVariant:
    def make_csv(self, tmp_path):
        csv_dir = tmp_path / "csv"
        csv_dir.mkdir()
        path = csv_dir / "fig5a.csv"
        path.write_text(
            "g_ratio,sagnac_pos:E_ab,sagnac_pos:stable\n0.0,,0\n1.0,,0\n2.0,,0\n"
        )
        return csv_dir, path

    def test_axes_with_legend_only_and_warning(self, tmp_path):
        _, path = self.make_csv(tmp_path)
        table = read_table(path)
        fig, warnings = build_figure(table)
        assert warnings == ["fig5a: variant sagnac_pos has no finite values"]
        ax = fig.axes[0]
        assert ax.get_legend() is not None
        assert not np.isfinite(ax.lines[0].get_ydata()).any()

    def test_cli_exits_nonzero_with_warning(self, tmp_path, capsys):
        csv_dir, _ = self.make_csv(tmp_path)
        code = main([str(csv_dir), "--out", str(tmp_path / "imgs")])
        captured = capsys.readouterr()
        assert code == 1
        assert "warning: fig5a: variant sagnac_pos has no finite values" in captured.err
        assert (tmp_path / "imgs" / "fig5a.png").is_file()


class TestSchemaMismatch:
    def test_variant_without_stable_column(self, tmp_path):
        path = tmp_path / "fig5a.csv"
        path.write_text("g_ratio,sagnac_pos:E_ab\n0.0,0.1\n")
        with pytest.raises(SchemaMismatch, match="sagnac_pos:stable"):
            read_table(path)

    def test_unknown_quantity(self, tmp_path):
        path = tmp_path / "fig5a.csv"
        path.write_text("g_ratio,sagnac_pos:bogus,sagnac_pos:stable\n0.0,0.1,1\n")
        with pytest.raises(SchemaMismatch, match="sagnac_pos:bogus"):
            read_table(path)

    def test_non_numeric_cell_names_column(self, tmp_path):
        path = tmp_path / "fig5a.csv"
        path.write_text("g_ratio,sagnac_pos:E_ab,sagnac_pos:stable\n0.0,oops,1\n")
        with pytest.raises(SchemaMismatch, match="sagnac_pos:E_ab"):
            read_table(path)

    def test_axis_column_after_variant_columns(self, tmp_path):
        path = tmp_path / "fig5a.csv"
        path.write_text("sagnac_pos:E_ab,sagnac_pos:stable,g_ratio\n0.1,1,0.0\n")
        with pytest.raises(SchemaMismatch, match="axis column"):
            read_table(path)

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "fig5a.csv"
        path.write_text("g_ratio,sagnac_pos:E_ab,sagnac_pos:stable\n0.0,0.1\n")
        with pytest.raises(SchemaMismatch, match="row width"):
            read_table(path)

    def test_cli_exit_code(self, tmp_path, capsys):
        csv_dir = tmp_path / "csv"
        csv_dir.mkdir()
        (csv_dir / "fig5a.csv").write_text("g_ratio,sagnac_pos:E_ab\n0.0,0.1\n")
        code = main([str(csv_dir), "--out", str(tmp_path / "imgs")])
        captured = capsys.readouterr()
        assert code == 2
        assert "sagnac_pos:stable" in captured.err


class TestDeterminism:
    @pytest.mark.parametrize("image_format", ["png", "svg"])
    def test_single_panel_rerender_is_byte_identical(
        self, panel_dir, tmp_path, image_format
    ):
        outputs = []
        for attempt in ("one", "two"):
            out = tmp_path / f"{attempt}.{image_format}"
            spec = PanelSpec.for_csv(panel_dir / "fig3a.csv", out)
            assert render(spec, image_format) == []
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_full_render_all_is_byte_identical(self, panel_dir, tmp_path):
        first = tmp_path / "one"
        second = tmp_path / "two"
        render_all(panel_dir, first)
        render_all(panel_dir, second)
        names = sorted(p.name for p in first.glob("*.png"))
        assert names == sorted(p.name for p in second.glob("*.png"))
        assert len(names) == len(PANEL_IDS) + 1
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes()


class TestCli:
    def test_end_to_end(self, panel_dir, tmp_path, capsys):
        code = main([str(panel_dir), "--out", str(tmp_path / "imgs"), "--format", "png"])
        captured = capsys.readouterr()
        assert code == 0
        assert captured.err == ""
        rendered = [l for l in captured.out.splitlines() if l.startswith("rendered ")]
        assert len(rendered) == len(PANEL_IDS) + 1
        assert "missing" not in captured.out

    def test_missing_panels_reported_but_not_fatal(self, panel_dir, tmp_path, capsys):
        csv_dir = tmp_path / "csv"
        csv_dir.mkdir()
        shutil.copy(panel_dir / "fig6a.csv", csv_dir / "fig6a.csv")
        code = main([str(csv_dir), "--out", str(tmp_path / "imgs")])
        captured = capsys.readouterr()
        assert code == 0
        assert "rendered fig6a" in captured.out
        assert "missing fig2a" in captured.out

    def test_console_script_available(self, panel_dir, tmp_path):
        script = shutil.which("render_figs")
        if script:
            cmd = [script]
        else:
            cmd = [sys.executable, "-m", "figrender.cli"]
        proc = subprocess.run(
            [*cmd, str(panel_dir), "--out", str(tmp_path / "imgs"), "--format", "svg"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "imgs" / "fig3_montage.svg").is_file()

    def test_usage_error_exits_2(self, capsys):
        assert main(["--format", "gif"]) == 2
        capsys.readouterr()
