import io
import subprocess
import sys

import numpy as np
import pytest

from orliczlab import cli

SMALL = """
[run]
output = out
[measure]
spec = gaussian
[family]
kind = lp   ; inline comment
[tests]
functions = exp_a1, he2
[time]
stop = 0.5
steps = 5
[experiment:hb]
kind = hyperbound
[experiment:nc]
kind = non_continuity
a_grid = 1.0, 2.0
[experiment:anchor]
kind = fa_anchor
"""


def run_main(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestConfig:
    def test_defaults_and_types(self):
        cfg = cli.parse_config(SMALL)
        assert cfg.time == (0.0, 0.5, 5)
        assert np.allclose(cfg.t_grid, np.linspace(0, 0.5, 6))
        assert cfg.family == {"kind": "lp", "q0": 2.0, "rho": 2.0}
        assert [e.kind for e in cfg.experiments] == ["hyperbound", "non_continuity", "fa_anchor"]
        assert dict(cfg.experiments[1].params)["a_grid"] == (1.0, 2.0)

    @pytest.mark.parametrize("name", ["gross_lp", "ualpha_fbeta"])
    def test_canonical_roundtrip(self, name):
        cfg = cli.load_config(cli.bundled_config(name))
        text = cli.emit_config(cfg)
        again = cli.parse_config(text)
        assert again == cfg
        assert cli.emit_config(again) == text
        assert cli.config_hash(again) == cli.config_hash(cfg)

    def test_hash_changes(self):
        a = cli.parse_config(SMALL)
        b = cli.parse_config(SMALL.replace("stop = 0.5", "stop = 0.6"))
        assert cli.config_hash(a) != cli.config_hash(b) and len(cli.config_hash(a)) == 16

    @pytest.mark.parametrize("text,needle", [
        ("[time]\nstart = 0\nstop = abc\n", "line 3: [time] stop: expected float"),
        ("[time]\nsteps = 1.5\n", "line 2: [time] steps"),
        ("[bogus]\nk = 1\n", "bogus"),
        ("[time]\nspeed = 1\n", "line 2: [time] speed"),
        ("[experiment:x]\nbeta = 1\n", "kind"),
        ("[experiment:x]\nkind = nope\n", "nope"),
        ("[experiment:x]\nkind = hyperbound\ngamma = 2\n", "gamma"),
        ("[family]\nkind = standard\nq0 = 2\n", "q0"),
        ("[measure]\nspec = cauchy\n", "cauchy"),
        ("[tests]\nfunctions = x, nosuch\n", "nosuch"),
    ])
    def test_errors_name_location(self, text, needle):
        with pytest.raises(cli.ConfigError) as ei:
            cli.parse_config(text)
        assert needle in str(ei.value)

    def test_check_config_exit_codes(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[run]\noutput = x\n\n\n[time]\nstop = abc\n")
        code, out, err = run_main(["check-config", str(bad)], capsys)
        assert code == 2 and "line 6: [time] stop: expected float" in err
        code, out, _ = run_main(["check-config", str(cli.bundled_config("gross_lp"))], capsys)
        assert code == 0 and out == cli.emit_config(cli.load_config(cli.bundled_config("gross_lp")))


class TestRun:
    def test_run_writes_reports(self, tmp_path):
        cfg = cli.parse_config(SMALL)
        buf = io.StringIO()
        code = cli.run_config(cfg, tmp_path, stream=buf)
        # the witness over a = 1, 2 is decreasing, but it is informational
        assert code == 0
        files = sorted(p.name for p in tmp_path.iterdir())
        assert files == ["anchor.csv", "hb.csv", "nc.csv", "summary.txt"]
        summary = (tmp_path / "summary.txt").read_text()
        assert summary.startswith(f"config {cli.config_hash(cfg)}")
        assert "[FAIL] nc" in summary and "scope: informational" in summary
        assert summary.rstrip().endswith("exit 0")

    def test_deterministic(self, tmp_path):
        cfg = cli.parse_config(SMALL)
        for d in ("a", "b"):
            cli.run_config(cfg, tmp_path / d, stream=io.StringIO())
        for name in ("anchor.csv", "hb.csv", "nc.csv", "summary.txt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_failing_unconditional_exits_one(self, tmp_path, capsys):
        # rho = 0.5 gives q(t) = 1 + e^{8t}, faster than the Gaussian allows, so norms grow
        text = SMALL + "[experiment:g]\nkind = gross_orlicz\n"
        cfg = cli.parse_config(text.replace("kind = lp   ; inline comment", "kind = lp\nrho = 0.5"))
        code = cli.run_config(cfg, tmp_path, stream=io.StringIO())
        assert code == 1

    def test_run_subcommand_bad_path(self, capsys, tmp_path):
        code, _, err = run_main(["run", str(tmp_path / "missing.cfg")], capsys)
        assert code == 2 and "error" in err


class TestSubcommands:
    def test_norm(self, capsys):
        code, out, _ = run_main(["norm", "--phi", "lp:4", "--measure", "gaussian", "--f", "x"], capsys)
        assert code == 0 and out.strip() == "1.31607401295249"

    def test_family_build(self, capsys):
        code, out, _ = run_main(["family-build", "--F", "log", "--phi0", "lp:2", "--lambda", "linear:1",
                                 "--eval", "t=1,x=2"], capsys)
        assert code == 0 and float(out) == pytest.approx(2 ** (2 * np.e), rel=1e-11)

    def test_family_validate(self, capsys):
        code, out, _ = run_main(["family-build", "--F", "log", "--validate"], capsys)
        assert code == 0 and "convex=1" in out and "nice=1" in out

    def test_bound(self, capsys):
        code, out, _ = run_main(["bound", "--beta", "1", "--beta-prime", "0.5", "--c", "1", "--s", "1",
                                 "--t", "1"], capsys)
        lines = out.splitlines()
        assert code == 0 and lines[0] == "1.11693973871064" and lines[1].startswith("path m=")

    def test_evolve_mehler(self, capsys):
        code, out, _ = run_main(["evolve", "--f", "exp(x/2)", "--t", "1", "--x", "2"], capsys)
        x, v = out.strip().split(",")
        assert code == 0 and float(x) == 2.0
        assert float(v) == pytest.approx(np.exp(np.exp(-1) + (1 - np.exp(-2)) / 8), rel=1e-13)

    def test_evolve_grid_output(self, tmp_path, capsys):
        path = tmp_path / "g.txt"
        code, out, _ = run_main(["evolve", "--f", "cos(x)", "--t", "0.5", "--measure", "u_alpha:1.5",
                                 "--cells", "512", "--steps", "64", "--output", str(path)], capsys)
        assert code == 0 and len(out.splitlines()) == 9
        rows = [r for r in path.read_text().splitlines() if not r.startswith("#")]
        assert len(rows) == 513 and all(len(r.split(",")) == 2 for r in rows)

    def test_verify(self, capsys, tmp_path):
        csv = tmp_path / "v.csv"
        code, out, _ = run_main(["verify", "--tests", "exp_a1,lorentz", "--t-stop", "0.5", "--steps", "5",
                                 "--output", str(csv)], capsys)
        assert code == 0 and out.startswith("[PASS] gross_orlicz")
        assert csv.read_text().splitlines()[0].startswith("f,t,N,")

    def test_tail(self, capsys):
        code, out, _ = run_main(["tail", "--f", "exp_a1;1 + x**2", "--n-s", "20"], capsys)
        lines = out.splitlines()
        assert code == 0 and len(lines) == 3 and lines[2].startswith("f1,")

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "orliczlab", "bound", "--beta", "1", "--beta-prime", "0.5",
                              "--c", "1", "--s", "0", "--t", "1"], capture_output=True, text=True)
        # no shift: m = exp(t log 2 / c) = 2
        assert res.returncode == 0 and res.stdout.splitlines()[0] == "2"


class TestExpressions:
    def test_bundled_name(self):
        assert cli.parse_function("he2").name == "he2"

    def test_expression(self):
        f = cli.parse_function("exp(-x**2) + pi * sin(x)")
        assert f(np.array(0.5)) == pytest.approx(np.exp(-0.25) + np.pi * np.sin(0.5))

    @pytest.mark.parametrize("text", ["__import__('os')", "x.real", "open('f')", "y + 1", "[x]"])
    def test_rejected(self, text):
        with pytest.raises(ValueError):
            cli.parse_function(text)
