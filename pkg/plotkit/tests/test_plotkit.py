"""Chart rendering from the experiment CSV contract."""

import json

import pytest

from plotkit.charts import PlotSpec, render, render_figure, summarize
from plotkit.cli import load_spec, main
from plotkit.csvio import (
    EmptyInputError,
    MissingColumnError,
    SchemaMismatchError,
    read_table,
)

SUMMARY_CSV = """\
#schema=1
experiment,protocol,t,n,n1,n2,trials,mean_abs_error,stddev_estimate
fig,symmetric,0,10,1000,100,10,0.0,0.0
fig,symmetric,2,10,1000,100,10,0.013,0.0012
fig,symmetric,0,10,1000,1000,10,0.0,0.0
fig,symmetric,2,10,1000,1000,10,0.0013,0.0001
fig,asymmetric,0,10,1000,100,10,0.0,0.0
fig,asymmetric,2,10,1000,100,10,0.014,0.0045
fig,asymmetric,0,10,1000,1000,10,0.0,0.0
fig,asymmetric,2,10,1000,1000,10,0.0016,0.0017
"""

TRIALS_CSV = """\
#schema=1
experiment,protocol,t,n,n1,n2,trial,seed,estimate,abs_error,runtime_s
fig,symmetric,0,10,1000,100,0,11,1.0,0.0,0.010000
fig,symmetric,0,10,1000,100,1,12,1.0,0.0,0.010000
fig,symmetric,2,10,1000,100,0,13,0.9,0.1,0.010000
fig,symmetric,2,10,1000,100,1,14,1.1,0.1,0.010000
fig,symmetric,2,10,1000,100,2,15,0.95,0.05,0.010000
fig,symmetric,2,10,1000,100,3,16,1.05,0.05,0.010000
"""


@pytest.fixture
def summary_csv(tmp_path):
    path = tmp_path / "summary.csv"
    path.write_text(SUMMARY_CSV)
    return path


@pytest.fixture
def trials_csv(tmp_path):
    path = tmp_path / "trials.csv"
    path.write_text(TRIALS_CSV)
    return path


class TestReader:
    def test_reads_rows(self, summary_csv):
        table = read_table(summary_csv)
        assert len(table.rows) == 8
        assert table.rows[0]["protocol"] == "symmetric"

    def test_schema_mismatch(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("#schema=9\na,b\n1,2\n")
        with pytest.raises(SchemaMismatchError, match="schema"):
            read_table(path)

    def test_header_only_is_empty_input(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("#schema=1\nexperiment,protocol\n")
        with pytest.raises(EmptyInputError, match="header only"):
            read_table(path)

    def test_no_header_is_empty_input(self, tmp_path):
        path = tmp_path / "blank.csv"
        path.write_text("#schema=1\n")
        with pytest.raises(EmptyInputError):
            read_table(path)


class TestSummarize:
    def test_summary_passthrough(self, summary_csv):
        rows = summarize(read_table(summary_csv))
        assert len(rows) == 8
        assert {r["protocol"] for r in rows} == {"symmetric", "asymmetric"}

    def test_trials_aggregate(self, trials_csv):
        rows = summarize(read_table(trials_csv))
        doped = next(r for r in rows if r["t"] == 2)
        assert doped["mean_abs_error"] == pytest.approx(0.075)
        assert doped["stddev_estimate"] == pytest.approx(0.09128709, abs=1e-6)

    def test_missing_column_is_named(self, tmp_path):
        path = tmp_path / "odd.csv"
        path.write_text("#schema=1\nprotocol,t,n2,mean_abs_error\nsymmetric,0,100,0.0\n")
        with pytest.raises(MissingColumnError, match="stddev_estimate"):
            summarize(read_table(path))

    def test_unrecognized_table_is_named(self, tmp_path):
        path = tmp_path / "alien.csv"
        path.write_text("#schema=1\nfoo,bar\n1,2\n")
        with pytest.raises(MissingColumnError, match="protocol"):
            summarize(read_table(path))


class TestSpecValidation:
    def test_bad_kind(self, summary_csv):
        with pytest.raises(ValueError, match="kind"):
            PlotSpec(inputs=(summary_csv,), kind="pie", out="x.png")

    def test_no_inputs(self):
        with pytest.raises(ValueError, match="input"):
            PlotSpec(inputs=(), kind="error-vs-magic", out="x.png")

    def test_label_count_mismatch(self, summary_csv):
        with pytest.raises(ValueError, match="labels"):
            PlotSpec(inputs=(summary_csv,), kind="panels", out="x.png",
                     labels=("a", "b"))


class TestRender:
    @pytest.mark.parametrize("kind", ["error-vs-magic", "error-vs-shots",
                                      "stddev-compare"])
    def test_single_chart(self, summary_csv, tmp_path, kind):
        out = tmp_path / f"{kind}.png"
        render(PlotSpec(inputs=(summary_csv,), kind=kind, out=out))
        assert out.stat().st_size > 0

    def test_panels_layout(self, summary_csv, tmp_path):
        spec = PlotSpec(inputs=(summary_csv,), kind="panels",
                        out=tmp_path / "panels.png")
        fig = render_figure(spec)
        try:
            assert len(fig.axes) == 3
            titles = [ax.get_title() for ax in fig.axes]
            assert [t[:3] for t in titles] == ["(a)", "(b)", "(c)"]
        finally:
            import matplotlib.pyplot as plt

            plt.close(fig)
        render(spec)
        assert (tmp_path / "panels.png").stat().st_size > 0

    def test_legend_from_columns(self, summary_csv):
        fig = render_figure(PlotSpec(inputs=(summary_csv,), kind="error-vs-magic",
                                     out="unused.png"))
        try:
            labels = [t.get_text() for t in fig.axes[0].get_legend().get_texts()]
            assert "protocol=symmetric n2=100" in labels
            assert len(labels) == 4
        finally:
            import matplotlib.pyplot as plt

            plt.close(fig)

    def test_log_scale_flag(self, summary_csv):
        fig = render_figure(PlotSpec(inputs=(summary_csv,), kind="stddev-compare",
                                     out="unused.png", log_y=True))
        try:
            assert fig.axes[0].get_yscale() == "log"
        finally:
            import matplotlib.pyplot as plt

            plt.close(fig)

    def test_trials_and_summary_agree(self, trials_csv):
        fig = render_figure(PlotSpec(inputs=(trials_csv,), kind="error-vs-magic",
                                     out="unused.png"))
        try:
            ys = fig.axes[0].lines[0].get_ydata()
            assert list(ys) == pytest.approx([0.0, 0.075])
        finally:
            import matplotlib.pyplot as plt

            plt.close(fig)

    def test_two_inputs_grouped_legend(self, summary_csv, tmp_path):
        other = tmp_path / "other.csv"
        other.write_text(SUMMARY_CSV.replace("0.013", "0.027"))
        fig = render_figure(PlotSpec(inputs=(summary_csv, other), kind="error-vs-magic",
                                     out="unused.png", labels=("ten-seed", "rerun")))
        try:
            labels = [t.get_text() for t in fig.axes[0].get_legend().get_texts()]
            assert any(lab.startswith("ten-seed ") for lab in labels)
            assert any(lab.startswith("rerun ") for lab in labels)
            assert len(labels) == 8
        finally:
            import matplotlib.pyplot as plt

            plt.close(fig)

    def test_same_input_same_bytes(self, summary_csv, tmp_path):
        a = tmp_path / "a.png"
        b = tmp_path / "b.png"
        render(PlotSpec(inputs=(summary_csv,), kind="panels", out=a))
        render(PlotSpec(inputs=(summary_csv,), kind="panels", out=b))
        assert a.read_bytes() == b.read_bytes()

    def test_svg_output(self, summary_csv, tmp_path):
        a = tmp_path / "a.svg"
        b = tmp_path / "b.svg"
        render(PlotSpec(inputs=(summary_csv,), kind="error-vs-shots", out=a))
        render(PlotSpec(inputs=(summary_csv,), kind="error-vs-shots", out=b))
        assert a.read_text().lstrip().startswith("<?xml")
        assert a.read_bytes() == b.read_bytes()

    def test_empty_input_writes_nothing(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("#schema=1\nprotocol,t,n2,mean_abs_error,stddev_estimate\n")
        out = tmp_path / "never.png"
        with pytest.raises(EmptyInputError):
            render(PlotSpec(inputs=(path,), kind="error-vs-magic", out=out))
        assert not out.exists()


class TestCli:
    def test_positional_form(self, summary_csv, tmp_path):
        out = tmp_path / "cli.png"
        code = main(["render", str(summary_csv), "--kind", "stddev-compare",
                     "--out", str(out), "--log-y"])
        assert code == 0
        assert out.exists()

    def test_spec_file(self, summary_csv, tmp_path):
        out = tmp_path / "spec.png"
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps({
            "inputs": [str(summary_csv)], "kind": "panels", "out": str(out),
        }))
        assert main(["render", "--spec", str(spec_path)]) == 0
        assert out.exists()

    def test_schema_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("#schema=9\na\n1\n")
        code = main(["render", str(bad), "--kind", "error-vs-magic",
                     "--out", str(tmp_path / "x.png")])
        assert code == 1

    def test_unknown_spec_key(self, tmp_path):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text('{"inputs": ["a.csv"], "kind": "panels", "out": "x.png", "dpi": 300}')
        assert main(["render", "--spec", str(spec_path)]) == 2

    def test_bad_json_spec(self, tmp_path):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text("{not json")
        assert main(["render", "--spec", str(spec_path)]) == 2

    def test_missing_flags(self, summary_csv):
        with pytest.raises(SystemExit) as err:
            main(["render", str(summary_csv)])
        assert err.value.code == 2

    def test_load_spec_round_trip(self, summary_csv, tmp_path):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps({
            "inputs": [str(summary_csv)], "kind": "error-vs-magic",
            "out": "x.svg", "log_y": True, "labels": ["calm"], "title": "demo",
        }))
        spec = load_spec(spec_path)
        assert spec.kind == "error-vs-magic"
        assert spec.log_y is True
        assert spec.labels == ("calm",)
