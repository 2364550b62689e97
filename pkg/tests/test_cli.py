import csv
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from coupled_hamiltonian.cli import main
from coupled_hamiltonian.config import ConfigError, load_config, parse_config
from coupled_hamiltonian.harness import order_study
from coupled_hamiltonian.registry import (ModelEntry, Param, build_model, get_model, register_model,
                                          unregister_model)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

HARMONIC = """\
model.name = harmonic
integrator.kind = stormer_verlet
run.T = {T}
run.n_steps = {n}
run.stride = {stride}
run.output = {out}
"""


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


class TestConfig:
    def test_shipped_configs_parse(self):
        for path in sorted(CONFIGS.glob("*.cfg")):
            config = load_config(path)
            assert abs(config.dt * config.n_steps - config.total_time) <= 1e-12 * config.total_time

    def test_beam_spring_config(self):
        config = load_config(CONFIGS / "beam_spring.cfg")
        assert config.model == "beam_spring"
        assert config.n_steps == 100000 and config.dt == 5e-4 and config.record_stride == 100
        assert config.params["n_x"] == 50 and config.params["q2_0"] == -1.0

    def test_order_insensitive(self):
        a = parse_config("model.name = harmonic\nrun.T = 1\nrun.dt = 0.1\n")
        b = parse_config("run.dt = 0.1 # comment\n\nrun.T = 1\nmodel.name = harmonic\n")
        assert a == b

    @pytest.mark.parametrize("text,line,fragment", [
        ("model.name = harmonic\nrun.T = 1\nrun.n_steps = 10\nrun.bogus = 3\n", 4, "unknown key"),
        ("model.name = harmonic\nrun.T = 1\nrun.T = 2\n", 3, "duplicate"),
        ("model.name = harmonic\nrun.T\n", 2, "section.key = value"),
        ("model.name = harmonic\nrun.T = abc\nrun.n_steps = 1\n", 2, "run.T"),
        ("model.name = nope\nrun.T = 1\nrun.n_steps = 1\n", 1, "unknown model"),
        ("model.name = harmonic\nmodel.mass = 3\nrun.T = 1\nrun.n_steps = 1\n", 2, "mass"),
        ("model.name = harmonic\nrun.T = 1\nrun.dt = 0.3\n", 3, "integer multiple"),
        ("model.name = harmonic\nrun.T = 1\nrun.n_steps = 2\ninteg.kind = rk4\n", 4, "unknown key"),
        ("model.name = harmonic\nrun.T = 1\nrun.n_steps = 2\nintegrator.kind = euler\n", 4,
         "integrator"),
    ])
    def test_errors_carry_line_numbers(self, text, line, fragment):
        with pytest.raises(ConfigError) as info:
            parse_config(text, "x.cfg")
        assert info.value.line == line
        assert str(info.value).startswith(f"x.cfg:{line}:")
        assert fragment in str(info.value)

    def test_missing_required(self):
        with pytest.raises(ConfigError, match="model.name"):
            parse_config("run.T = 1\nrun.n_steps = 1\n")
        with pytest.raises(ConfigError, match="run.T"):
            parse_config("model.name = harmonic\nrun.n_steps = 1\n")


class TestSimulate:
    def test_one_step_gives_two_rows(self, tmp_path):
        out = tmp_path / "h.csv"
        cfg = write_config(tmp_path, HARMONIC.format(T=0.1, n=1, stride=1, out=out))
        assert main(["simulate", cfg]) == 0
        header, rows = read_csv(out)
        assert header == ["t", "q1", "q2", "H_total", "dH_total"]
        assert len(rows) == 2
        assert [float(x) for x in rows[1][:3]] == [0.1, 0.995, 0.0]

    def test_stride_not_dividing_keeps_final_row(self, tmp_path):
        out = tmp_path / "h.csv"
        cfg = write_config(tmp_path, HARMONIC.format(T=1, n=10, stride=4, out=out))
        assert main(["simulate", cfg]) == 0
        _, rows = read_csv(out)
        assert [float(r[0]) for r in rows] == [0.0, 0.4, 0.8, 1.0]

    def test_deterministic_bytes(self, tmp_path):
        cfg = write_config(tmp_path, HARMONIC.format(T=2, n=20, stride=1, out=tmp_path / "a.csv"))
        main(["simulate", cfg])
        main(["simulate", cfg, "--out", str(tmp_path / "b.csv")])
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_values_round_trip(self, tmp_path):
        cfg = write_config(tmp_path, HARMONIC.format(T=2, n=20, stride=1, out=tmp_path / "a.csv"))
        main(["simulate", cfg])
        _, rows = read_csv(tmp_path / "a.csv")
        assert all(repr(float(x)) == x for row in rows for x in row)

    def test_beam_spring_equilibrium(self, tmp_path):
        out = tmp_path / "eq.csv"
        text = ("model.name = beam_spring\nmodel.q2_0 = 0\nrun.T = 0.05\nrun.n_steps = 100\n"
                f"run.stride = 10\nrun.output = {out}\n")
        assert main(["simulate", write_config(tmp_path, text)]) == 0
        header, rows = read_csv(out)
        assert header == ["t", "u_nb", "q1", "q2", "H_el", "H_sp", "H_total", "dH_total",
                          "constraint_1", "constraint_2"]
        cols = [header.index(c) for c in ("u_nb", "q1", "q2")]
        assert all(float(row[c]) == 0.0 for row in rows for c in cols)

    def test_gnuplot_script(self, tmp_path):
        out = tmp_path / "h.csv"
        cfg = write_config(tmp_path, HARMONIC.format(T=1, n=10, stride=1, out=out))
        assert main(["simulate", cfg, "--gnuplot"]) == 0
        script = (tmp_path / "h.gp").read_text()
        assert "using 1:2" in script and "H_total" in script

    def test_beam_spring_run(self, tmp_path):
        out = tmp_path / "beam.csv"
        assert main(["simulate", str(CONFIGS / "beam_spring.cfg"), "--out", str(out)]) == 0
        header, rows = read_csv(out)
        assert len(rows) == 1001
        assert float(rows[-1][0]) == 50.0
        data = np.array(rows, dtype=float)
        assert np.max(np.abs(data[:, header.index("dH_total")])) <= 1e-6

    def test_config_error_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "model.name = harmonic\nrun.T = 1\nrun.n_steps = x\n")
        assert main(["simulate", cfg]) == 2
        assert "run.cfg:3:" in capsys.readouterr().err

    def test_missing_config_exit_2(self, tmp_path):
        assert main(["simulate", str(tmp_path / "missing.cfg")]) == 2

    def test_capability_error_exit_2(self, tmp_path, capsys):
        text = HARMONIC.format(T=1, n=10, stride=1, out=tmp_path / "x.csv") + "model.gamma = 0.1\n"
        assert main(["simulate", write_config(tmp_path, text)]) == 2
        assert "implicit_midpoint" in capsys.readouterr().err

    def test_blow_up_exit_3_with_step(self, tmp_path, capsys):
        text = ("model.name = beam_spring\nrun.T = 50\nrun.dt = 0.01\n"
                f"run.output = {tmp_path / 'x.csv'}\n")
        assert main(["simulate", write_config(tmp_path, text)]) == 3
        assert "step " in capsys.readouterr().err

    def test_midpoint_divergence_exit_3(self, tmp_path):
        text = HARMONIC.format(T=10, n=2, stride=1, out=tmp_path / "x.csv").replace(
            "stormer_verlet", "implicit_midpoint")
        assert main(["simulate", write_config(tmp_path, text)]) == 3

    def test_unwritable_output_exit_4(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        cfg = write_config(tmp_path, HARMONIC.format(T=1, n=1, stride=1, out=blocker / "x.csv"))
        assert main(["simulate", cfg]) == 4


class TestCheck:
    @pytest.mark.parametrize("flags,code", [(["--constrained"], 0), ([], 1)])
    def test_beam_spring(self, flags, code, capsys):
        assert main(["check", str(CONFIGS / "beam_spring.cfg"), *flags]) == code
        out = capsys.readouterr().out
        assert "residual=" in out and "samples=50" in out and "seed=0" in out

    def test_gradient_coupled_oscillators(self):
        assert main(["check", str(CONFIGS / "coupled_oscillators.cfg")]) == 0

    def test_velocity_coupling_not_symplectic(self, tmp_path, capsys):
        text = HARMONIC.format(T=1, n=1, stride=1, out="x.csv") + "model.gamma = 0.1\n"
        assert main(["check", write_config(tmp_path, text), "--samples", "5"]) == 1
        assert "samples=5" in capsys.readouterr().out

    def test_constrained_without_constraints_exit_2(self):
        assert main(["check", str(CONFIGS / "harmonic.cfg"), "--constrained"]) == 2


class TestOrderStudy:
    def test_harmonic_halvings(self, tmp_path, capsys):
        out = tmp_path / "order.csv"
        code = main(["order-study", str(CONFIGS / "harmonic.cfg"), "--halvings", "4",
                     "--jobs", "3", "--out", str(out)])
        assert code == 0
        assert capsys.readouterr().out.startswith("PASS")
        header, rows = read_csv(out)
        assert header == ["dt", "max_abs_dH", "ratio_to_next"]
        assert len(rows) == 5 and rows[-1][2] == ""

    def test_identical_steps_invalid(self, tmp_path, capsys):
        code = main(["order-study", str(CONFIGS / "harmonic.cfg"), "--dts", "0.1,0.1",
                     "--out", str(tmp_path / "o.csv")])
        assert code == 1
        assert capsys.readouterr().out.startswith("INVALID: ratios [1.0000]")

    def test_single_step_is_usage_error(self, tmp_path):
        assert main(["order-study", str(CONFIGS / "harmonic.cfg"), "--dts", "0.1",
                     "--out", str(tmp_path / "o.csv")]) == 2

    def test_concurrent_matches_sequential(self):
        config = load_config(CONFIGS / "spring_mass.cfg")
        dts = [0.01, 0.005, 0.0025]
        assert order_study(config, dts, jobs=3) == order_study(config, dts, jobs=1)


class TestListModels:
    def test_sorted_and_stable(self, capsys):
        assert main(["list-models"]) == 0
        first = capsys.readouterr().out
        main(["list-models"])
        assert capsys.readouterr().out == first
        names = [line.split(":")[0] for line in first.splitlines() if not line.startswith(" ")]
        assert names == ["beam_spring", "harmonic", "spring_mass"]

    def test_custom_model_appears(self, capsys):
        base = get_model("harmonic")
        register_model(ModelEntry("aaa_custom", "test model", (Param("coupling", 0.0),),
                                  lambda v: build_model("harmonic", v)))
        try:
            main(["list-models"])
            out = capsys.readouterr().out
            assert out.startswith("aaa_custom: test model")
            assert base.name in out
        finally:
            unregister_model("aaa_custom")


def test_module_entry_point():
    result = subprocess.run([sys.executable, "-m", "coupled_hamiltonian", "list-models"],
                            capture_output=True, text=True, check=False)
    assert result.returncode == 0 and "beam_spring" in result.stdout
