import json
import math

import numpy as np
import pytest

from entrate import cli
from entrate.sweep import (SweepAxis, SweepConfig, format_float, run_sweep)


def run_cli(argv):
    return cli.main(argv)


class TestSweepConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SweepAxis("delta", 0.0, 1.0, 1)        # too few steps
        with pytest.raises(ValueError):
            SweepAxis("delta", 2.0, 1.0, 5)        # min >= max
        with pytest.raises(ValueError):
            SweepAxis("bogus", 0.0, 1.0, 5)        # unknown axis
        with pytest.raises(ValueError):
            SweepConfig(model="full", fixed={}, axes=[SweepAxis("delta", 0, 1, 3)],
                        quantities=["nonsense"])
        with pytest.raises(ValueError):
            SweepConfig(model="full", fixed={}, axes=[SweepAxis("delta", 0, 1, 3)],
                        quantities=["pair_rate"])   # effective-only quantity

    def test_from_dict_missing_field(self):
        with pytest.raises(ValueError, match="missing required field"):
            SweepConfig.from_dict({"model": "full", "axes": []})

    def test_config_json_error_has_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"model": "full",,}')
        with pytest.raises(ValueError, match="line 1"):
            SweepConfig.from_json(str(path))

    def test_log_axis(self):
        ax = SweepAxis("n_th", 1e2, 1e4, 3, log=True)
        np.testing.assert_allclose(ax.values(), [1e2, 1e3, 1e4], rtol=1e-12)


class TestRunSweep:
    def test_row_count_and_order(self):
        config = SweepConfig(model="effective", fixed={"g": 5.0},
                             axes=[SweepAxis("delta", 5.0, 10.0, 2),
                                   SweepAxis("Delta", -0.1, 0.1, 3)],
                             quantities=["stability_margin"])
        result = run_sweep(config)
        assert len(result.rows) == 6
        got = [r.axis_values for r in result.rows]
        assert got == [(5.0, -0.1), (5.0, 0.0), (5.0, 0.1),
                       (10.0, -0.1), (10.0, 0.0), (10.0, 0.1)]

    def test_unstable_points_flagged_not_fatal(self):
        config = SweepConfig(model="effective", fixed={"g": 5.0, "delta": 10.0},
                             axes=[SweepAxis("Delta", -0.6, 0.0, 4)],
                             quantities=["stability_margin", "pair_rate"])
        result = run_sweep(config)
        statuses = [r.status for r in result.rows]
        assert "unstable" in statuses and "ok" in statuses
        for row in result.rows:
            if row.status == "unstable":
                assert "stability_margin" in row.values
                assert "pair_rate" not in row.values

    def test_stability_map_matches_effective_boundary(self):
        # the full-model optical instability band (Delta < 0 side, |Delta| <<
        # delta) matches the effective-model boundary roots; the Delta > 0
        # side additionally hosts a mechanical (anti-damping) instability the
        # effective optical model cannot describe
        from entrate.models import stability_boundary_effective
        config = SweepConfig(model="full",
                             fixed={"g": 5.0, "Gamma": 1e-3, "n_th": 0.0},
                             axes=[SweepAxis("delta", 8.0, 15.0, 8),
                                   SweepAxis("Delta", -1.5, 0.5, 50)],
                             quantities=["stability_margin"])
        result = run_sweep(config)
        margins = result.value_grid("stability_margin")
        deltas = config.axes[0].values()
        bigs = config.axes[1].values()
        cell = bigs[1] - bigs[0]
        for i, de in enumerate(deltas):
            roots = stability_boundary_effective(5.0, 1.0, de)
            for j, dd in enumerate(bigs):
                if dd > 0:
                    continue
                near = roots and min(abs(dd - r) for r in roots) <= cell
                if near:
                    continue
                inside = bool(roots) and roots[0] < dd < roots[1]
                assert (margins[i, j] >= 1e-9) == inside, (de, dd)
        assert np.any(margins[:, bigs > 0.04] >= 1e-9)  # mechanical band

    def test_parallel_equals_serial(self):
        config = SweepConfig(model="effective", fixed={"g": 5.0, "delta": 10.0},
                             axes=[SweepAxis("Delta", -0.2, 0.2, 6)],
                             quantities=["pair_rate", "stability_margin"], jobs=1)
        serial = run_sweep(config)
        config.jobs = 2
        parallel = run_sweep(config)
        for a, b in zip(serial.rows, parallel.rows):
            assert a.axis_values == b.axis_values
            assert a.status == b.status
            assert a.values == b.values

    def test_log_spaced_temperature_sweep_slope(self):
        # 1-d n_th sweep at delta = Delta = 0: fitted slope -1 +- 0.1 in the
        # asymptotic regime n_th >> C (C = 10 here, see the rate checks)
        config = SweepConfig(model="full",
                             fixed={"g": 1.0, "Gamma": 0.1, "n_th": 0.0},
                             axes=[SweepAxis("n_th", 1e2, 1e4, 5, log=True)],
                             quantities=["gamma_E"])
        result = run_sweep(config)
        n_vals = config.axes[0].values()
        g_vals = result.value_grid("gamma_E")
        assert all(r.status == "ok" for r in result.rows)
        slope = np.polyfit(np.log(n_vals), np.log(g_vals), 1)[0]
        assert slope == pytest.approx(-1.0, abs=0.1)

    def test_csv_format(self, tmp_path):
        config = SweepConfig(model="effective", fixed={"g": 5.0, "delta": 10.0},
                             axes=[SweepAxis("Delta", -0.1, 0.1, 3)],
                             quantities=["pair_rate"])
        result = run_sweep(config)
        out = tmp_path / "sweep.csv"
        with open(out, "w") as fh:
            result.write_csv(fh)
        lines = out.read_text().splitlines()
        assert lines[0] == "# schema=1"
        assert lines[1] == "Delta [kappa],pair_rate [kappa],status"
        assert len(lines) == 5
        assert lines[2].endswith(",ok")


class TestCliCommands:
    def test_spectrum_csv(self, tmp_path, capsys):
        out = tmp_path / "spec.csv"
        code = run_cli(["spectrum", "--delta", "10", "--nth", "50",
                        "--omega-min", "-3", "--omega-max", "13",
                        "--omega-steps", "33", "--output", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "# schema=1"
        assert lines[1] == "omega [kappa],total,optical,mechanical,E"
        assert len(lines) == 35

    def test_spectrum_zero_coupling_dark(self, tmp_path):
        out = tmp_path / "dark.csv"
        assert run_cli(["spectrum", "--g", "0", "--omega-steps", "5",
                        "--output", str(out)]) == 0
        rows = [line.split(",") for line in out.read_text().splitlines()[2:]]
        assert all(float(r[1]) == 0.0 for r in rows)

    def test_unstable_exits_one_naming_margin(self, capsys):
        code = run_cli(["spectrum", "--model", "effective", "--g", "5",
                        "--delta", "10", "--Delta", "-0.5"])
        assert code == 1
        err = capsys.readouterr().err
        assert "max eigenvalue real part" in err

    def test_usage_error_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            run_cli(["spectrum", "--model", "bogus"])
        assert exc.value.code == 2

    def test_missing_axis_usage_error(self, capsys):
        assert run_cli(["sweep"]) == 2

    def test_rate_json(self, capsys):
        code = run_cli(["rate", "--g", "1", "--gamma", "1e-3", "--format", "json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc[0]["gamma_E [kappa]"] > 0
        assert doc[0]["fwhm [kappa]"] > 0

    def test_stability_reports_roots(self, capsys):
        code = run_cli(["stability", "--model", "effective", "--g", "5",
                        "--delta", "10", "--format", "json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)[0]
        assert doc["stable"] == 1.0
        assert doc["boundary_root_1 [kappa]"] == pytest.approx(-1.0)
        assert doc["boundary_root_2 [kappa]"] == pytest.approx(-0.25)

    def test_pair_rate_matches_closed_form(self, capsys):
        code = run_cli(["pair-rate", "--model", "effective", "--g", "5",
                        "--delta", "10", "--format", "json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)[0]
        assert doc["numeric [kappa]"] == pytest.approx(0.78125, rel=1e-6)
        assert doc["rel_deviation"] < 1e-6

    def test_wannier_check(self, capsys):
        code = run_cli(["wannier-check", "--M", "3", "--cutoff", "20000"])
        assert code == 0
        out = capsys.readouterr().out.splitlines()
        assert len(out) == 5  # schema + header + one row per l
        assert all(line.endswith(",ok") for line in out[2:])

    def test_determinism_across_runs_and_jobs(self, tmp_path):
        args = ["sweep", "--model", "effective", "--g", "5", "--delta", "10",
                "--axis", "Delta:-0.2:0.2:5", "--quantity", "pair_rate"]
        outs = []
        for tag, jobs in (("a", "1"), ("b", "1"), ("c", "2")):
            path = tmp_path / f"{tag}.csv"
            assert run_cli(args + ["--jobs", jobs, "--output", str(path)]) == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_sweep_from_config_file(self, tmp_path):
        config = {"model": "effective", "fixed": {"g": 5.0, "delta": 10.0},
                  "axes": [{"name": "Delta", "min": -0.1, "max": 0.1, "steps": 3}],
                  "quantities": ["pair_rate", "stability_margin"]}
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(config))
        out = tmp_path / "out.csv"
        assert run_cli(["sweep", "--config", str(cfg), "--output", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 5
        header = lines[1].split(",")
        assert header == ["Delta [kappa]", "pair_rate [kappa]",
                          "stability_margin [kappa]", "status"]

    def test_bad_config_exits_two(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"model": "full"}')
        assert run_cli(["sweep", "--config", str(cfg)]) == 2

    def test_entanglement_values_depend_only_on_C_and_nth(self, tmp_path):
        # fixed C = 2.5e4: E[0] identical across (Gamma, g) realizations
        import csv
        vals = {}
        for gamma in ("5e-2", "1e-3"):
            for nth in ("0", "50"):
                g = math.sqrt(2.5e4 * float(gamma))
                out = tmp_path / f"e_{gamma}_{nth}.csv"
                assert run_cli(["entanglement", "--g", str(g), "--gamma", gamma,
                                "--nth", nth, "--omega-min", "-0.0001",
                                "--omega-max", "0.0001", "--omega-steps", "3",
                                "--output", str(out)]) == 0
                with open(out) as fh:
                    rows = list(csv.reader(line for line in fh
                                           if not line.startswith("#")))
                vals[(gamma, nth)] = float(rows[2][1])   # E at omega = 0
        for nth, expected in (("0", 10.81979328442278), ("50", 6.206675680806784)):
            for gamma in ("5e-2", "1e-3"):
                assert vals[(gamma, nth)] == pytest.approx(expected, rel=5e-3)

    def test_verify_subset(self, capsys):
        code = run_cli(["verify", "--only", "wannier_norm"])
        assert code == 0
        assert "PASS" in capsys.readouterr().out

    def test_verify_json_report_fields(self, capsys):
        code = run_cli(["verify", "--only", "pair_rate", "--format", "json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc[0]["name"] == "pair_rate"
        assert doc[0]["passed"] is True
        assert doc[0]["seconds"] > 0

    def test_verify_unknown_filter(self, capsys):
        assert run_cli(["verify", "--only", "no_such_check"]) == 2


class TestMutationSanity:
    def test_injected_drift_error_fails_resonant_check(self, monkeypatch):
        """A corrupted mechanical coupling must make the resonant-closed-form
        cross-check fail loudly."""
        from entrate import models, verify

        original = models.drift_full

        def corrupted(p):
            d = original(p)
            m = np.array(d.m)
            m[4, 0] = 2.0 * m[4, 0]   # b row, a+ column
            m[5, 1] = 2.0 * m[5, 1]   # conjugate partner, keeps the pairing
            return models.DriftMatrix(m, d.decay, d.ordering)

        monkeypatch.setattr(models, "drift_full", corrupted)
        result = verify.run_checks(["resonant_closed_form"])[0]
        assert not result.passed

    def test_format_float_is_17_digits(self):
        assert format_float(math.pi) == "3.1415926535897931"
        assert format_float(1.0) == "1"
