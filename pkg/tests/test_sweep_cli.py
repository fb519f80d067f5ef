import io
import json
import math

import numpy as np
import pytest

from casimir_ps import SolverParams
from casimir_ps.cli import main
from casimir_ps.sweep import (
    CSV_COLUMNS,
    NU_SCALAR,
    FitError,
    SweepSpec,
    fit_nu,
    read_csv,
    run_sweep,
    write_csv,
)

QUICK = ["--lmax", "3", "--no-error-estimate"]


def run(argv):
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


class TestFit:
    def test_exact_recovery(self):
        x = np.linspace(0.16, 0.6, 7)
        fit = fit_nu(zip(x, 1 - 1.4 * x + 0.5 * x**2))
        assert fit.nu == pytest.approx(1.4, abs=1e-10)
        assert fit.nu2 == pytest.approx(0.5, abs=1e-10)
        assert fit.rms_residual < 1e-12
        assert fit.n_points == 7

    @pytest.mark.parametrize("nu,nu2", [(0.3, -0.2), (2.0, 1.1), (1.0, 0.0)])
    def test_any_quadratic(self, nu, nu2):
        x = np.array([0.1, 0.25, 0.4, 0.55])
        y = 1 - nu * x + nu2 * x**2
        if np.any((y <= 0) | (y >= 1)):
            pytest.skip("outside fit regime")
        fit = fit_nu(zip(x, y))
        assert fit.nu == pytest.approx(nu, abs=1e-10)
        assert fit.nu2 == pytest.approx(nu2, abs=1e-10)

    def test_constraint(self):
        fit = fit_nu([(0.2, 0.8), (0.3, 0.7), (0.5, 0.55)])
        assert fit(0.0) == 1.0

    def test_scalar_constant(self):
        assert NU_SCALAR == pytest.approx(0.17327, abs=1e-5)
        assert math.isclose(NU_SCALAR, 5 / math.pi**2 - 1 / 3)

    @pytest.mark.parametrize(
        "samples",
        [
            [(0.2, 0.8), (0.3, 0.7)],
            [(0.3, 0.7), (0.3, 0.7), (0.3, 0.7)],
            [(0.3, 0.7), (2.5, 0.1), (0.4, 0.6)],
            [(0.3, 1.2), (0.2, 0.8), (0.4, 0.6)],
        ],
    )
    def test_rejects(self, samples):
        with pytest.raises(FitError):
            fit_nu(samples)

    def test_weighted(self):
        x = np.linspace(0.2, 0.6, 5)
        fit = fit_nu(zip(x, 1 - x + 0.2 * x**2), weights=[1, 2, 3, 4, 5])
        assert fit.nu == pytest.approx(1.0, abs=1e-10)


class TestSweepSpec:
    def test_empty(self):
        with pytest.raises(ValueError):
            SweepSpec(())

    def test_unsorted(self):
        with pytest.raises(ValueError):
            SweepSpec((1.0, 0.5))

    def test_non_positive(self):
        with pytest.raises(ValueError):
            SweepSpec((0.0, 1.0))


class TestSweep:
    def test_csv_layout(self, tmp_path):
        path = tmp_path / "s.csv"
        res = run_sweep(SweepSpec((5.0, 10.0), SolverParams(lmax=2), str(path)))
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 3
        rows = read_csv(path)
        assert rows[1]["rho"] == res[1].rho
        assert rows[0]["lmax_used"] == 2

    def test_worker_count_byte_identical(self, tmp_path):
        eps = (0.5, 1.0, 3.0)
        outs = []
        for workers in (1, 2, 1):
            path = tmp_path / f"w{workers}_{len(outs)}.csv"
            run_sweep(SweepSpec(eps, SolverParams(), str(path)), workers=workers)
            outs.append(path.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_failure_aborts(self):
        with pytest.raises(RuntimeError, match="L/R=0.01"):
            run_sweep(SweepSpec((0.01, 1.0)))

    def test_write_to_stream(self):
        res = run_sweep(SweepSpec((10.0,), SolverParams(lmax=1, estimate_error=False)))
        buf = io.StringIO()
        write_csv(buf, [10.0], res)
        assert buf.getvalue().startswith("l_over_r,rho")


class TestCli:
    def test_point(self):
        code, out = run(["point", "--l-over-r", "10", "--json"])
        assert code == 0
        rec = json.loads(out.splitlines()[-1])
        assert rec["rho"] == pytest.approx(0.0284, rel=0.05)

    def test_point_far(self):
        code, out = run(["point", "--l-over-r", "1e6", "--json"])
        assert code == 0
        assert json.loads(out.splitlines()[-1])["rho"] == pytest.approx(4.16e-12, rel=0.01)

    @pytest.mark.parametrize(
        "argv",
        [
            ["point", "--l-over-r", "0"],
            ["point"],
            ["point", "--l-over-r", "0.05"],
            ["sweep"],
            ["sweep", "--l-over-r", "1,1"],
            ["bogus"],
        ],
    )
    def test_usage_errors(self, argv):
        assert run(argv)[0] == 2

    def test_computation_failure(self):
        code, _ = run(["point", "--l-over-r", "0.3", "--xi-nodes", "2"])
        assert code == 1

    def test_sweep_and_fit(self, tmp_path):
        path = tmp_path / "s.csv"
        code, _ = run(["sweep", "--grid", "0.3:0.6:4", "--out", str(path), "--lmax", "14", "--no-error-estimate"])
        assert code == 0
        code, out = run(["fit", str(path), "--fit-window", "0.2:0.7"])
        assert code == 0
        assert out.startswith("nu=")
        assert "n_points=4" in out

    def test_fit_too_few_points(self, tmp_path):
        path = tmp_path / "s.csv"
        assert run(["sweep", "--l-over-r", "5,10", "--out", str(path)] + QUICK)[0] == 0
        assert run(["fit", str(path)])[0] == 2

    def test_sweep_stdout(self):
        code, out = run(["sweep", "--l-over-r", "5,10"] + QUICK)
        assert code == 0
        assert len(out.splitlines()) == 3

    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# settings\nlmax = 2\nxi-nodes = 20\nno_error_estimate = true\n")
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        assert run(["--config", str(cfg), "point", "--l-over-r", "5", "--out", str(out_a)])[0] == 0
        assert run(["--config", str(cfg), "point", "--l-over-r", "5", "--lmax", "3", "--out", str(out_b)])[0] == 0
        a, b = read_csv(out_a)[0], read_csv(out_b)[0]
        assert (a["lmax_used"], a["xi_nodes"]) == (2, 20)
        assert (b["lmax_used"], b["xi_nodes"]) == (3, 20)

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("lmax 3\n")
        assert run(["--config", str(cfg), "point", "--l-over-r", "5"])[0] == 2
