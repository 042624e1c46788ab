import csv
import io
import math

import pytest

from sabrkit import SabrParams, c_rel, price_sa2_rel, sigma_d
from sabrkit.cli import EXIT_DOMAIN, EXIT_NO_CONVERGENCE, EXIT_OK, EXIT_USAGE, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    return list(csv.reader(io.StringIO(text)))


class TestPrice:
    def test_single_point(self, capsys):
        code, out, _ = run(
            ["price", "--model", "sa2", "--y", "0.1", "--t", "0.5",
             "--sigma", "0.2", "--nu", "0.5", "--rho", "-0.3", "--format", "csv"],
            capsys,
        )
        assert code == EXIT_OK
        rows = parse_csv(out)
        assert rows[0] == ["y", "t", "price_sa2", "vol_sa2"]
        params = SabrParams(sigma0=0.2, nu=0.5, rho=-0.3)
        assert float(rows[1][2]) == pytest.approx(price_sa2_rel(0.1, 0.5, params))
        # the vol column inverts the series price; it agrees with the
        # implied-vol series through second order in nu
        assert float(rows[1][3]) == pytest.approx(
            sigma_d(0.1, 0.5, params).value, rel=2e-3
        )

    def test_lattice_and_ranges(self, capsys):
        code, out, _ = run(
            ["price", "--model", "bs,sa2", "--y=-0.2:0.2:5", "--t", "0.5,1",
             "--format", "csv"],
            capsys,
        )
        assert code == EXIT_OK
        rows = parse_csv(out)
        assert len(rows) == 1 + 10
        assert rows[0][2:] == ["price_bs", "vol_bs", "price_sa2", "vol_sa2"]

    def test_bs_matches_direct(self, capsys):
        code, out, _ = run(
            ["price", "--model", "bs", "--y", "0", "--t", "1", "--sigma", "0.2",
             "--format", "csv"],
            capsys,
        )
        rows = parse_csv(out)
        assert float(rows[1][2]) == pytest.approx(c_rel(0.0, 0.2, 1.0))

    def test_unknown_model(self, capsys):
        code, _, err = run(["price", "--model", "heston"], capsys)
        assert code == EXIT_USAGE
        assert "unknown model" in err

    def test_domain_error_exit(self, capsys):
        code, _, err = run(["price", "--sigma=-0.2"], capsys)
        assert code == EXIT_DOMAIN
        assert "error" in err


class TestResidual:
    def test_preset_ordering(self, capsys):
        code, out, _ = run(
            ["residual", "--preset", "table4", "--format", "csv"], capsys
        )
        assert code == EXIT_OK
        rows = parse_csv(out)
        assert rows[0] == ["model", "1e+03R"]
        values = {r[0]: float(r[1]) for r in rows[1:]}
        assert set(values) == {"h", "d", "sa2", "bs"}
        assert values["sa2"] <= values["d"]
        assert values["bs"] > 10 * values["d"]

    def test_unknown_preset(self, capsys):
        code, _, err = run(["residual", "--preset", "table9"], capsys)
        assert code == EXIT_USAGE
        assert "unknown preset" in err

    def test_explicit_region(self, capsys):
        code, out, _ = run(
            ["residual", "--nu", "0.25", "--rho", "-0.4", "--t", "0.2,0.8",
             "--y=-0.3,0.3", "--sigma-range", "0.15,0.25", "--format", "csv"],
            capsys,
        )
        assert code == EXIT_OK
        assert len(parse_csv(out)) == 5

    def test_bad_range(self, capsys):
        code, _, err = run(["residual", "--t", "1,0.1"], capsys)
        assert code == EXIT_USAGE


class TestFd:
    def test_preset_row(self, capsys):
        code, out, _ = run(
            ["fd", "--preset", "fd1-row7", "--levels", "1", "--format", "csv"],
            capsys,
        )
        assert code == EXIT_OK
        rows = parse_csv(out)
        assert rows[0][0] == "level"
        assert len(rows) == 3
        # level-1 estimate exists, ratio needs three levels
        assert math.isnan(float(rows[1][-1]))
        assert not math.isnan(float(rows[2][-1]))

    def test_cutoff_row(self, capsys):
        code, out, _ = run(
            ["fd", "--expiry", "0.5", "--nu", "0.5", "--rho", "-0.2",
             "--levels", "0", "--cutoff", "--format", "csv"],
            capsys,
        )
        assert code == EXIT_OK
        rows = parse_csv(out)
        assert rows[-1][0] == "cutoff"


class TestMc:
    def test_preset(self, capsys):
        code, out, _ = run(
            ["mc", "--preset", "mc-paper", "--paths", "2000", "--dt", "0.01",
             "--strikes", "10", "--format", "csv"],
            capsys,
        )
        assert code == EXIT_OK
        rows = parse_csv(out)
        assert rows[0] == [
            "strike", "y", "c_mc", "std_error", "c_h", "c_d", "c_sa2", "e_h", "e_d"
        ]
        strike, _, c_mc, se, c_h, c_d, c_sa2, e_h, e_d = map(float, rows[1])
        assert strike == 10.0
        # all model prices agree with the simulation to a loose multiple
        # of the standard error at this small path count
        for c in (c_h, c_d, c_sa2):
            assert abs(c - c_mc) <= 10 * se
        assert e_h == pytest.approx(c_h - c_mc)
        assert e_d == pytest.approx(c_d - c_mc)

    def test_strike_sweep(self, capsys):
        code, out, _ = run(
            ["mc", "--preset", "mc-paper", "--paths", "500", "--dt", "0.05",
             "--strikes", "8:12:3", "--format", "csv"],
            capsys,
        )
        assert code == EXIT_OK
        rows = parse_csv(out)
        assert [float(r[0]) for r in rows[1:]] == [8.0, 10.0, 12.0]


class TestCalibrate:
    def test_synth_recovery(self, capsys, tmp_path):
        out_path = str(tmp_path / "results.csv")
        code, out, _ = run(
            ["calibrate", "--synth-days", "2", "--nu", "1.3", "--sigma", "0.19",
             "--rho", "-0.55", "--init", "1.0,0.25,-0.3", "--out", out_path,
             "--format", "csv"],
            capsys,
        )
        assert code in (EXIT_OK, EXIT_NO_CONVERGENCE)
        with open(out_path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        assert abs(float(rows[-1]["nu"]) - 1.3) <= 1e-2
        assert abs(float(rows[-1]["sigma"]) - 0.19) <= 1e-3
        assert abs(float(rows[-1]["rho"]) + 0.55) <= 1e-2
        summary = parse_csv(out)
        assert summary[0][0] == "ise"
        assert float(summary[1][0]) <= 1e-4

    def test_quotes_csv_path(self, capsys, tmp_path):
        from sabrkit import synth_panel, write_quotes_csv

        gen = SabrParams(sigma0=0.19, nu=1.3, rho=-0.55)
        days = synth_panel(gen, 1, quote_with="delta")
        quotes_path = str(tmp_path / "quotes.csv")
        write_quotes_csv(quotes_path, days)
        out_path = str(tmp_path / "results.csv")
        code, _, _ = run(
            ["calibrate", "--quotes", quotes_path, "--sigma-prev", "0.19",
             "--init", "1.0,0.25,-0.3", "--out", out_path, "--format", "csv"],
            capsys,
        )
        assert code in (EXIT_OK, EXIT_NO_CONVERGENCE)
        with open(out_path) as fh:
            rows = list(csv.DictReader(fh))
        assert abs(float(rows[0]["nu"]) - 1.3) <= 1e-2

    def test_bad_init(self, capsys):
        code, _, err = run(
            ["calibrate", "--synth-days", "1", "--init", "1.0,0.25"], capsys
        )
        assert code == EXIT_USAGE


class TestMisc:
    def test_print_config(self, capsys):
        code, out, _ = run(["price", "--print-config"], capsys)
        assert code == EXIT_OK
        assert "sigma=0.2" in out
        assert "model=sa2" in out

    def test_out_file(self, capsys, tmp_path):
        path = str(tmp_path / "table.csv")
        code, out, _ = run(
            ["price", "--y", "0", "--t", "1", "--format", "csv", "--out", path],
            capsys,
        )
        assert code == EXIT_OK
        assert out == ""
        with open(path) as fh:
            assert fh.readline().startswith("y,t,")

    def test_tsv_format(self, capsys):
        code, out, _ = run(
            ["price", "--y", "0", "--t", "1", "--format", "tsv"], capsys
        )
        assert code == EXIT_OK
        assert "\t" in out.splitlines()[0]
