"""Figure-tool tests: schema validation, CLI behavior and golden images.

The golden tests render every figure kind from the committed CSV fixtures and
compare output bytes against the checked-in set for the installed renderer
version (see make_golden.py).  No solver build is required: the fixtures are
static files.
"""

import pathlib

import pytest

from cubedswe_figures import SchemaError, read_table, renderer_key
from cubedswe_figures.cli import main
from make_golden import FIXTURES, GOLDEN_JOBS

GOLDEN_DIR = pathlib.Path(__file__).parent / "golden" / renderer_key()


class TestSchemas:
    def test_reads_all_columns(self):
        table = read_table(str(FIXTURES / "conservation.csv"), "timeseries")
        assert {"time", "mass", "energy", "enstrophy"} <= set(table)
        assert table["time"].size > 2

    def test_extra_columns_ignored(self, tmp_path):
        src = (FIXTURES / "conservation.csv").read_text().splitlines()
        extended = [src[0] + ",comment"] + [line + ",7" for line in src[1:]]
        path = tmp_path / "extended.csv"
        path.write_text("\n".join(extended) + "\n")
        table = read_table(str(path), "timeseries")
        assert "comment" in table  # present but harmless

    def test_missing_required_column_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("mass,energy\n0,0\n")
        with pytest.raises(SchemaError, match="missing required column"):
            read_table(str(path), "timeseries")

    def test_parse_error_points_at_line_and_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,mass\n0,0\n3600,oops\n")
        with pytest.raises(SchemaError, match=r"bad\.csv:3.*'mass'"):
            read_table(str(path), "timeseries")

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,mass\n0,0,0\n")
        with pytest.raises(SchemaError, match=r"bad\.csv:2"):
            read_table(str(path), "timeseries")

    def test_missing_file_rejected(self):
        with pytest.raises(SchemaError):
            read_table(str(FIXTURES / "no_such.csv"), "timeseries")


class TestCli:
    def test_schema_error_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("time\n0\n")
        rc = main(["--kind", "sphere-map", "--in", str(bad),
                   "--out", str(tmp_path / "x.png")])
        assert rc == 1
        assert "missing required column" in capsys.readouterr().err

    def test_unknown_kind_rejected(self):
        with pytest.raises(SystemExit):
            main(["--kind", "piechart", "--in", "x.csv", "--out", "x.png"])

    def test_difference_map_needs_matching_grids(self, tmp_path, capsys):
        a = FIXTURES / "fields_day0.csv"
        b = tmp_path / "shifted.csv"
        lines = a.read_text().splitlines()
        b.write_text("\n".join(lines[:1] + lines[2:]) + "\n")
        rc = main(["--kind", "difference-map", "--in", str(a), str(b),
                   "--out", str(tmp_path / "d.png")])
        assert rc == 1
        assert "same grid" in capsys.readouterr().err

    def test_renderer_key_flag(self, capsys):
        assert main(["--renderer-key"]) == 0
        assert renderer_key() in capsys.readouterr().out


needs_golden = pytest.mark.skipif(
    not GOLDEN_DIR.is_dir(),
    reason=f"no golden set for {renderer_key()}; run tests/make_golden.py")


class TestGoldenImages:
    @needs_golden
    @pytest.mark.parametrize("name", sorted(GOLDEN_JOBS))
    def test_bytes_match_golden(self, name, tmp_path):
        out = tmp_path / name
        rc = main(GOLDEN_JOBS[name] + ["--out", str(out)])
        assert rc == 0
        golden = GOLDEN_DIR / name
        assert out.read_bytes() == golden.read_bytes(), (
            f"{name} differs from the {renderer_key()} golden file; if the "
            "change is intended, regenerate with tests/make_golden.py")

    def test_rendering_is_deterministic(self, tmp_path):
        job = GOLDEN_JOBS["conservation.png"]
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        assert main(job + ["--out", str(a)]) == 0
        assert main(job + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_svg_output_supported(self, tmp_path):
        out = tmp_path / "conservation.svg"
        rc = main(GOLDEN_JOBS["conservation.png"][:-2]
                  + ["--in", str(FIXTURES / "conservation.csv"),
                     "--out", str(out)])
        assert rc == 0
        assert out.read_text().startswith("<?xml")
