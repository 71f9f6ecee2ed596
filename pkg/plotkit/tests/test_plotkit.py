import numpy as np
import pytest

import plotkit.cli as cli
from plotkit import FigureSpec, PlotkitError, load_spec, render


def write_volume_csv(path, nx=9, ny=5, nz=3):
    xs = np.linspace(2.0, 5.0, nx)
    ys = np.linspace(-0.5, 0.5, ny)
    zs = np.linspace(-0.5, 0.5, nz)
    lines = ["x,y,z,similarity"]
    for x in xs:
        for y in ys:
            for z in zs:
                s = 0.5 * np.exp(-(((x - 2.5) / 0.2) ** 2)) + 0.5 * np.exp(
                    -(((x - 4.5) / 0.2) ** 2)
                )
                s *= np.exp(-((y / 0.4) ** 2) - ((z / 0.4) ** 2))
                lines.append(f"{x},{y},{z},{s + 0.01}")
    path.write_text("\n".join(lines) + "\n")


def write_curves_csv(path):
    lines = ["kind,snr_db,algorithm,mean_nmse,mean_nmse_db,n_trials,master_seed"]
    for kind in ("awc", "swc"):
        for snr in (0.0, 10.0, 20.0):
            for algo in ("awc_estimator", "swc_omp_lm", "crlb_awc"):
                db = -snr if algo != "swc_omp_lm" else -min(snr, 10.0)
                lines.append(f"{kind},{snr},{algo},{10**(db/10)},{db},4,0")
    path.write_text("\n".join(lines) + "\n")


def write_table_csv(path):
    lines = ["sweep,value,ny,freq_hz,nmse,fit_inv_r,error,master_seed"]
    for sweep, values in (("curvature", (0, 2, 4)), ("array_scale", (32, 64))):
        for i, v in enumerate(values):
            lines.append(f"{sweep},{v},64,7.5e9,{0.1 * (i + 1)},0.2,,0")
    path.write_text("\n".join(lines) + "\n")


class TestSpec:
    def test_load_round_trip(self, tmp_path):
        (tmp_path / "spec.toml").write_text(
            '[[figure]]\nkind = "nmse_curves"\ninputs = ["a.csv"]\n'
            'output = "b.png"\ntitle = "t"\n[figure.options]\nx = 1\n'
        )
        specs = load_spec(tmp_path / "spec.toml")
        assert len(specs) == 1
        assert specs[0].kind == "nmse_curves"
        assert specs[0].options == {"x": 1}

    def test_missing_file(self, tmp_path):
        with pytest.raises(PlotkitError, match="not found"):
            load_spec(tmp_path / "nope.toml")

    def test_no_figures(self, tmp_path):
        (tmp_path / "s.toml").write_text("x = 1\n")
        with pytest.raises(PlotkitError, match="no .?.?figure"):
            load_spec(tmp_path / "s.toml")

    def test_unknown_kind(self):
        with pytest.raises(PlotkitError, match="unknown figure kind"):
            FigureSpec(kind="pie", inputs=("a.csv",), output="b.png")

    def test_unknown_key(self, tmp_path):
        (tmp_path / "s.toml").write_text(
            '[[figure]]\nkind = "table_bars"\ninputs = ["a"]\noutput = "b"\nextra = 1\n'
        )
        with pytest.raises(PlotkitError, match="unknown keys"):
            load_spec(tmp_path / "s.toml")


class TestRender:
    def test_volume_slices(self, tmp_path):
        csv_path = tmp_path / "fig2_awc.csv"
        write_volume_csv(csv_path)
        out = tmp_path / "fig" / "awc.png"
        render(FigureSpec(kind="volume_slices", inputs=(csv_path,), output=out))
        assert out.exists() and out.stat().st_size > 1000
        assert not list((tmp_path / "fig").glob("*.tmp*"))

    def test_nmse_curves(self, tmp_path):
        csv_path = tmp_path / "fig3_summary.csv"
        write_curves_csv(csv_path)
        out = tmp_path / "curves.png"
        render(FigureSpec(kind="nmse_curves", inputs=(csv_path,), output=out))
        assert out.exists() and out.stat().st_size > 1000

    def test_table_bars(self, tmp_path):
        csv_path = tmp_path / "table1.csv"
        write_table_csv(csv_path)
        out = tmp_path / "bars.png"
        render(FigureSpec(kind="table_bars", inputs=(csv_path,), output=out))
        assert out.exists() and out.stat().st_size > 1000

    def test_rerender_overwrites(self, tmp_path):
        csv_path = tmp_path / "t.csv"
        write_table_csv(csv_path)
        out = tmp_path / "bars.png"
        spec = FigureSpec(kind="table_bars", inputs=(csv_path,), output=out)
        render(spec)
        first = out.read_bytes()
        render(spec)
        assert out.read_bytes() == first

    def test_empty_csv_clean_error(self, tmp_path):
        csv_path = tmp_path / "empty.csv"
        csv_path.write_text("x,y,z,similarity\n")
        out = tmp_path / "o.png"
        with pytest.raises(PlotkitError, match="no data rows"):
            render(FigureSpec(kind="volume_slices", inputs=(csv_path,), output=out))
        assert not out.exists()

    def test_missing_columns_listed(self, tmp_path):
        csv_path = tmp_path / "bad.csv"
        csv_path.write_text("x,y,sim\n1,2,3\n")
        with pytest.raises(PlotkitError, match=r"\['z', 'similarity'\]"):
            render(
                FigureSpec(
                    kind="volume_slices", inputs=(csv_path,), output=tmp_path / "o.png"
                )
            )

    def test_missing_input_file(self, tmp_path):
        with pytest.raises(PlotkitError, match="not found"):
            render(
                FigureSpec(
                    kind="nmse_curves",
                    inputs=(tmp_path / "absent.csv",),
                    output=tmp_path / "o.png",
                )
            )


class TestCli:
    def test_render_success(self, tmp_path, capsys):
        csv_path = tmp_path / "fig3_summary.csv"
        write_curves_csv(csv_path)
        spec = tmp_path / "spec.toml"
        spec.write_text(
            "[[figure]]\n"
            'kind = "nmse_curves"\n'
            f'inputs = ["{csv_path}"]\n'
            f'output = "{tmp_path / "c.png"}"\n'
        )
        assert cli.main(["render", "--spec", str(spec)]) == 0
        assert "wrote" in capsys.readouterr().out
        assert (tmp_path / "c.png").exists()

    def test_spec_error_exit_1(self, tmp_path, capsys):
        assert cli.main(["render", "--spec", str(tmp_path / "nope.toml")]) == 1
        assert "plotkit error" in capsys.readouterr().err
