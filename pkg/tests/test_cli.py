import os

import pytest

import adhoc1d.exact as exact_mod
from adhoc1d.cli import main
from adhoc1d.exact import ModelKind, Ratio, q_m
from adhoc1d.sweep import CSV_HEADER, read_csv, run_validation


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExactCommand:
    def test_anchored_single_node(self, capsys):
        code, out, _ = run_cli(
            ["exact", "--model", "anchored", "--n", "1", "--m", "1", "--rho", "2"], capsys
        )
        assert code == 0
        assert "= 0.5" in out

    def test_free_pair(self, capsys):
        code, out, _ = run_cli(
            ["exact", "--model", "free", "--n", "2", "--m", "1", "--rho", "2"], capsys
        )
        assert code == 0
        assert "= 0.75" in out

    def test_m_beyond_vertices(self, capsys):
        code, out, _ = run_cli(
            ["exact", "--model", "free", "--n", "5", "--m", "7", "--rho", "10"], capsys
        )
        assert code == 0
        assert "= 0.0" in out

    def test_lengths_instead_of_rho(self, capsys):
        code, out, _ = run_cli(
            ["exact", "--model", "free", "--n", "2", "--m", "1", "--L", "10", "--r", "5"],
            capsys,
        )
        assert code == 0
        assert "= 0.75" in out

    def test_missing_rho_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["exact", "--model", "free", "--n", "2", "--m", "1"])
        assert exc.value.code == 2

    def test_unknown_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["exact", "--model", "free", "--n", "2", "--m", "1", "--rho", "2", "--frob", "1"])
        assert exc.value.code == 2

    @pytest.mark.parametrize("sub", ["exact", "simulate", "figures", "validate"])
    def test_help_exits_cleanly(self, sub, capsys):
        with pytest.raises(SystemExit) as exc:
            main([sub, "--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        assert "--help" in out or "usage" in out


class TestSimulateCommand:
    def test_anchored_with_comparison(self, capsys):
        code, out, _ = run_cli(
            ["simulate", "--model", "anchored", "--n", "5", "--rho", "5",
             "--trials", "20000", "--seed", "42"],
            capsys,
        )
        assert code == 0
        assert "comparison with exact values" in out
        assert "chi_square" in out

    def test_interior_access_point_estimates_only(self, capsys):
        code, out, _ = run_cli(
            ["simulate", "--model", "anchored", "--x", "0.3", "--n", "5",
             "--rho", "5", "--L", "1", "--trials", "1000"],
            capsys,
        )
        assert code == 0
        assert "no closed form" in out
        assert "comparison" not in out

    def test_zero_trials_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--model", "free", "--n", "5", "--rho", "5", "--trials", "0"])
        assert exc.value.code == 2

    def test_env_seed_default(self, capsys, monkeypatch):
        monkeypatch.setenv("ADHOC1D_SEED", "777")
        code, out, _ = run_cli(
            ["simulate", "--model", "free", "--n", "2", "--rho", "3", "--trials", "1000"],
            capsys,
        )
        assert code == 0
        assert "seed: 777" in out

    def test_flag_overrides_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv("ADHOC1D_SEED", "777")
        code, out, _ = run_cli(
            ["simulate", "--model", "free", "--n", "2", "--rho", "3",
             "--trials", "1000", "--seed", "5"],
            capsys,
        )
        assert "seed: 5" in out

    def test_config_file_supplies_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("trials = 1500\nseed = 11\n# comment\nrho = 3\n")
        code, out, _ = run_cli(
            ["simulate", "--model", "free", "--n", "2", "--trials", "1000",
             "--config", str(cfg)],
            capsys,
        )
        assert code == 0
        # flag wins over the file for trials, file supplies rho and seed
        assert "trials: 1000" in out
        assert "seed: 11" in out


class TestFiguresCommand:
    def test_default_run_structure(self, capsys, tmp_path):
        out_dir = tmp_path / "figs"
        code, _, _ = run_cli(["figures", "--out", str(out_dir)], capsys)
        assert code == 0
        for m in range(1, 7):
            path = out_dir / f"fig{m}.csv"
            assert path.exists()
            lines = path.read_text().splitlines()
            assert lines[0] == CSV_HEADER
            assert len(lines) == 1 + 3 * 120

    def test_round_trip_is_bit_exact(self, capsys, tmp_path):
        out_dir = tmp_path / "figs"
        run_cli(
            ["figures", "--out", str(out_dir), "--rho-stop", "6"], capsys
        )
        rows = read_csv(str(out_dir / "fig2.csv"))
        assert rows
        for row in rows[::5]:
            ev = q_m(ModelKind.ANCHORED, row.n, row.m, Ratio.from_float(row.rho), "auto")
            assert ev.float_value == row.q_exact

    def test_normalization_across_joined_files(self, capsys, tmp_path):
        out_dir = tmp_path / "figs"
        run_cli(["figures", "--out", str(out_dir)], capsys)
        per_point: dict = {}
        for m in range(1, 7):
            for row in read_csv(str(out_dir / f"fig{m}.csv")):
                assert -1e-9 <= row.q_exact <= 1 + 1e-9
                per_point.setdefault((row.n, row.rho), 0.0)
                per_point[(row.n, row.rho)] += row.q_exact
        for (n, rho), total in per_point.items():
            if n == 5:  # the six files cover every m for n = 5 (max is n + 1)
                assert abs(total - 1.0) <= 1e-9
            else:
                assert total <= 1.0 + 1e-9

    def test_deterministic_across_workers(self, capsys, tmp_path):
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        common = ["--trials", "2000", "--seed", "9", "--rho-stop", "4"]
        run_cli(["figures", "--out", str(a_dir), *common, "--workers", "1"], capsys)
        run_cli(["figures", "--out", str(b_dir), *common, "--workers", "3"], capsys)
        for m in range(1, 7):
            assert (a_dir / f"fig{m}.csv").read_bytes() == (b_dir / f"fig{m}.csv").read_bytes()

    def test_simulation_columns_present_with_trials(self, capsys, tmp_path):
        out_dir = tmp_path / "figs"
        run_cli(
            ["figures", "--out", str(out_dir), "--trials", "2000", "--rho-stop", "2"],
            capsys,
        )
        rows = read_csv(str(out_dir / "fig1.csv"))
        assert all(r.trials == 2000 for r in rows)
        assert all(r.p_hat is not None for r in rows)

    def test_svg_rendering(self, capsys, tmp_path):
        out_dir = tmp_path / "figs"
        code, _, _ = run_cli(
            ["figures", "--out", str(out_dir), "--svg", "--rho-stop", "2"], capsys
        )
        assert code == 0
        for m in range(1, 7):
            svg = (out_dir / f"fig{m}.svg").read_text()
            assert svg.lstrip().startswith("<?xml")

    def test_unwritable_directory_fails(self, capsys, tmp_path):
        target = tmp_path / "blocked"
        target.mkdir()
        os.chmod(target, 0o500)
        try:
            code, _, err = run_cli(["figures", "--out", str(target)], capsys)
        finally:
            os.chmod(target, 0o700)
        if os.geteuid() != 0:  # root bypasses permission bits
            assert code == 1
            assert "not writable" in err


class TestValidateCommand:
    def test_quick_passes(self, capsys):
        code, out, _ = run_cli(["validate", "--level", "quick"], capsys)
        assert code == 0
        assert "pass" in out

    def test_injected_sign_flip_detected(self, capsys, monkeypatch):
        monkeypatch.setattr(exact_mod, "_SIGN_FLIP", True)
        code, out, _ = run_cli(["validate", "--level", "quick"], capsys)
        assert code == 1
        assert "FAIL" in out
        assert "normalization" in out

    def test_sign_flip_failure_names_first_cell(self, monkeypatch):
        monkeypatch.setattr(exact_mod, "_SIGN_FLIP", True)
        result = run_validation("quick", max_n=5)
        assert not result.passed
        assert any("n=" in f and "rho=" in f for f in result.failures)
