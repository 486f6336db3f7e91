import io
import re

import pytest

from valleyscape.cli import build_parser, run


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def body(text):
    """Stdout without the echoed configuration lines."""
    return "".join(line + "\n" for line in text.splitlines() if not line.startswith("# "))


SUBCOMMANDS = ["list-functions", "eval-grid", "ratio", "valley-test", "beta", "alpha", "align",
               "pca", "compare-pca", "render"]


class TestExamples:
    def test_pca_rows(self, tmp_path):
        out = tmp_path / "pca.csv"
        code, text, _ = invoke("pca", "--function", "elliptic:1,0.01", "--domain", "-10:10,-10:10",
                               "--n", "100", "--m", "10", "--seed", "7", "--out", str(out))
        assert code == 0
        rows = out.read_text().splitlines()
        assert rows[0] == "role,x1,x2,f,y"
        roles = [r.split(",")[0] for r in rows[1:]]
        assert (roles.count("population"), roles.count("selected"), roles.count("projected")) \
            == (100, 10, 10)
        for key in ("mean", "v1", "eigenvalues", "lambda1/lambda2"):
            assert key in text

    def test_ratio_degenerate(self):
        code, text, _ = invoke("ratio", "--function", "fz", "--point", "0,3", "--delta", "1",
                               "--samples", "100000", "--seed", "1")
        assert code == 0
        assert re.search(r"\bratio=0\b", text) and "lower=0 " in text

    def test_eval_grid(self):
        code, text, _ = invoke("eval-grid", "--function", "sphere", "--domain", "-1:1,-1:1",
                               "--res", "3")
        assert code == 0
        rows = body(text).splitlines()
        assert rows[0] == "x1,x2,f" and len(rows) == 10
        assert rows[1] == "-1,-1,2"

    def test_compare_pca(self):
        code, text, _ = invoke("compare-pca", "--functions", "elliptic:1,0.01,sphere",
                               "--seeds", "20")
        assert code == 0
        table = dict(line.split() for line in body(text).splitlines()[1:])
        assert float(table["elliptic:1,0.01"]) > float(table["sphere"])

    def test_config_echo_first(self):
        _, text, _ = invoke("eval-grid", "--function", "sphere", "--domain", "-1:1,-1:1",
                            "--res", "2")
        lines = text.splitlines()
        keys = [ln[2:].split("=")[0].strip() for ln in lines if ln.startswith("# ")]
        assert keys == ["seed", "n", "m", "domain", "deltas", "samples", "function"]
        assert lines[0].startswith("# ")


class TestCommands:
    def test_list_functions(self):
        code, text, _ = invoke("list-functions")
        assert code == 0
        for label in ("sphere", "fz", "rosenbrock"):
            assert label in text

    def test_valley_test(self):
        code, text, _ = invoke("valley-test", "--function", "elliptic:1,0.01", "--along",
                               "2:1:3:3", "--delta", "1", "--samples", "20000")
        assert code == 0 and "passed 3/3" in text

    def test_benchmark_delta(self):
        base = ["valley-test", "--function", "elliptic:1,0.01", "--point", "0,5", "--delta", "1",
                "--samples", "20000"]
        _, same, _ = invoke(*base)
        _, wide, _ = invoke(*base, "--benchmark-delta", "1")
        _, other, _ = invoke(*base, "--benchmark-delta", "4")
        assert same == wide and same != other

    def test_beta(self):
        code, text, _ = invoke("beta", "--function", "fz", "--along", "2:-5:5:11",
                               "--samples", "10000")
        assert code == 0 and "beta=0 " in text

    def test_alpha(self, tmp_path):
        out = tmp_path / "scan.csv"
        code, text, _ = invoke("alpha", "--function", "elliptic:1,0.01", "--points", "0,1;0,5",
                               "--samples", "20000", "--out", str(out))
        assert code == 0 and "alpha=10" in text
        assert out.read_text().startswith("x1,x2,delta,")

    def test_align(self):
        code, text, _ = invoke("align", "--function", "elliptic:1,0.01", "--direction", "0,1",
                               "--point", "0,5")
        assert code == 0 and "angle_deg=0" in text

    def test_render(self, tmp_path):
        csv_path, svg = tmp_path / "p.csv", tmp_path / "p.svg"
        assert invoke("pca", "--function", "rosenbrock", "--domain", "-1:2,-1:2",
                      "--out", str(csv_path))[0] == 0
        code, _, _ = invoke("render", "--function", "rosenbrock", "--domain", "-1:2,-1:2",
                            "--res", "30", "--pca", str(csv_path), "--out", str(svg))
        assert code == 0 and svg.read_text().startswith("<?xml")

    def test_pca_svg(self, tmp_path):
        svg = tmp_path / "f.svg"
        code, _, _ = invoke("pca", "--function", "sphere", "--svg", str(svg), "--res", "20")
        assert code == 0 and "</svg>" in svg.read_text()

    def test_negative_domain_with_space(self):
        code, text, _ = invoke("eval-grid", "--function", "sphere", "--domain", "-2:2,-2:2",
                               "--res", "2")
        assert code == 0 and "-2,-2,8" in text


class TestConfig:
    def test_file_with_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("function = sphere\ndomain = -1:1,-1:1\n")
        code, text, _ = invoke("eval-grid", "--config", str(cfg), "--res", "2",
                               "--domain", "-3:3,-3:3")
        assert code == 0
        assert "# function=sphere\n" in text and "# domain=-3.0:3.0,-3.0:3.0\n" in text
        assert "-3,-3,18" in text

    def test_missing_file(self, tmp_path):
        code, _, err = invoke("eval-grid", "--config", str(tmp_path / "nope.cfg"))
        assert code == 2 and err


class TestErrors:
    def test_unknown_label_lists_available(self):
        code, _, err = invoke("pca", "--function", "banana")
        assert code == 2
        assert "sphere" in err and "rosenbrock" in err

    def test_conflicting_flags(self, capsys):
        code, _, _ = invoke("ratio", "--function", "fz", "--point", "0,1", "--along", "2:0:1:2")
        assert code == 2
        assert "not allowed" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert invoke("pca", "--bogus", "1")[0] == 2

    def test_no_command(self, capsys):
        assert invoke()[0] == 2

    def test_bad_values(self):
        assert invoke("pca", "--m", "500")[0] == 2
        assert invoke("pca", "--domain", "1:0,0:1")[0] == 2

    def test_dimension_mismatch(self):
        code, _, err = invoke("ratio", "--function", "elliptic:1,0.01", "--point", "1,2,3")
        assert code == 2 and "dimension" in err

    def test_runtime_error_exit_1(self, monkeypatch):
        from valleyscape import IndeterminateError, cli

        def boom(*args):
            raise IndeterminateError("both ratios undefined")

        monkeypatch.setitem(cli.COMMANDS, "ratio", boom)
        code, _, err = invoke("ratio", "--function", "fz", "--point", "0,0")
        assert code == 1 and "IndeterminateError" in err


@pytest.mark.parametrize("name", SUBCOMMANDS)
def test_help(name, capsys):
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args([name, "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for action in build_parser()._subparsers._group_actions[0].choices[name]._actions:
        for flag in action.option_strings:
            assert flag in text


class TestDeterminism:
    def test_pca_twice(self, tmp_path):
        docs = []
        for k in range(2):
            out, svg = tmp_path / f"{k}.csv", tmp_path / f"{k}.svg"
            invoke("pca", "--seed", "3", "--out", str(out), "--svg", str(svg), "--res", "20")
            docs.append((out.read_bytes(), svg.read_bytes()))
        assert docs[0] == docs[1]

    def test_ratio_twice(self):
        a = invoke("ratio", "--function", "sphere", "--point", "5,0", "--samples", "5000")
        assert a == invoke("ratio", "--function", "sphere", "--point", "5,0", "--samples", "5000")
