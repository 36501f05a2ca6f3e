import json

import pytest

from einstat.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParseCommand:
    def test_echoes_normalized_expression(self, capsys):
        code, out, _ = run(capsys, "parse", "--expr", "0*x + t^2")
        assert code == 0
        payload = json.loads(out)
        assert payload["results"][0]["normalized"] == "0*x + t^2"
        assert payload["pass"] is True

    def test_bad_expression_is_usage_error(self, capsys):
        code, _, err = run(capsys, "parse", "--expr", "foo(t)")
        assert code == 2
        assert "unknown function" in err


class TestCheckCommand:
    def test_catalog_normal(self, capsys):
        code, out, _ = run(capsys, "check", "--catalog", "normal-natural")
        assert code == 0
        payload = json.loads(out)
        assert payload["input"]["lambda"] == 0.5
        assert payload["pass"] is True

    def test_quadratic_with_wrong_lambda_fails(self, capsys):
        code, out, _ = run(
            capsys, "check", "--expr", "t^2+x^2", "--lambda", "1", "--box", "-1,1,-1,1"
        )
        assert code == 1
        payload = json.loads(out)
        assert payload["pass"] is False
        # residual of the quadratic against lambda=1 is exactly -4, and the
        # relative normalization divides by the dominant magnitude 4
        assert payload["results"][0]["max_relative_residual"] == pytest.approx(1.0)

    def test_quadratic_with_zero_lambda_passes(self, capsys):
        code, out, _ = run(
            capsys, "check", "--expr", "t^2+x^2", "--lambda", "0", "--box", "-1,1,-1,1"
        )
        assert code == 0

    def test_expr_requires_lambda(self, capsys):
        code, _, err = run(capsys, "check", "--expr", "t^2+x^2")
        assert code == 2
        assert "--lambda" in err

    def test_both_sources_rejected(self, capsys):
        code, _, err = run(
            capsys, "check", "--expr", "t^2", "--catalog", "normal-natural", "--lambda", "0"
        )
        assert code == 2

    def test_unknown_catalog_name(self, capsys):
        code, _, err = run(capsys, "check", "--catalog", "no-such-entry")
        assert code == 2


class TestCurvatureCommand:
    def test_sampled_points(self, capsys):
        code, out, _ = run(
            capsys, "curvature", "--catalog", "normal-natural", "--samples", "5"
        )
        assert code == 0
        payload = json.loads(out)
        assert len(payload["results"]) == 5
        for record in payload["results"]:
            assert record["kappa"] == pytest.approx(-0.5, abs=1e-9)

    def test_direct_metric_entry(self, capsys):
        code, out, _ = run(
            capsys, "curvature", "--catalog", "weibull-metric",
            "--box", "0.5,3,0.5,3", "--samples", "3",
        )
        assert code == 0
        payload = json.loads(out)
        import math

        for record in payload["results"]:
            assert record["kappa"] == pytest.approx(-6 / math.pi ** 2, abs=1e-9)

    def test_grid_csv(self, capsys):
        code, out, _ = run(
            capsys, "curvature", "--catalog", "normal-natural",
            "--grid", "2,2", "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "row,col,t,x,kappa,scalar,r1212"
        assert len(lines) == 5

    def test_evaluation_error_exit_code(self, capsys):
        code, _, err = run(
            capsys, "curvature", "--expr", "t^2.5 + x^2", "--box", "-2,-1,-1,1",
            "--samples", "2",
        )
        assert code == 3
        assert "error" in err


class TestConvexityCommand:
    def test_json_summary(self, capsys):
        code, out, _ = run(
            capsys, "convexity", "--catalog", "normal-natural",
            "--box", "-1,1,-2,-0.1", "--grid", "5,5",
        )
        assert code == 0
        payload = json.loads(out)
        summary = payload["results"][0]
        assert summary["counts"]["convex"] == 25

    def test_csv_rows(self, capsys):
        code, out, _ = run(
            capsys, "convexity", "--expr", "t^2+x^2", "--box", "0,1,0,1",
            "--grid", "2,3", "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "row,col,t,x,verdict"
        assert len(lines) == 7
        assert all(line.endswith("convex") for line in lines[1:])


class TestSymmetryCommand:
    def test_curvature_equation_generator_passes(self, capsys):
        code, out, _ = run(
            capsys, "symmetry", "verify", "--pde", "txpeq", "--lambda", "1", "--gen", "X7"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["results"][0]["pass"] is True

    def test_heat_shear_fails(self, capsys):
        code, out, _ = run(
            capsys, "symmetry", "verify", "--pde", "heat", "--gen", "xi_t = x",
            "--samples", "50",
        )
        assert code == 1
        payload = json.loads(out)
        assert payload["results"][0]["max_residual"] > 1e-3

    def test_unknown_generator(self, capsys):
        code, _, err = run(capsys, "symmetry", "verify", "--pde", "heat", "--gen", "X17")
        assert code == 2


class TestInvariantCommand:
    def test_similarity_invariant_passes(self, capsys):
        code, out, _ = run(
            capsys, "invariant", "check",
            "--gen", "xi_t = 2*t; xi_x = x; eta = u", "--expr", "x/sqrt(t)",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["results"][0]["skipped"] > 0

    def test_non_invariant_fails(self, capsys):
        code, out, _ = run(
            capsys, "invariant", "check", "--gen", "xi_t = 2*t; xi_x = x", "--expr", "x",
        )
        assert code == 1


class TestCatalogCommand:
    def test_list_contains_all(self, capsys):
        code, out, _ = run(capsys, "catalog", "list")
        assert code == 0
        payload = json.loads(out)
        names = [r["name"] for r in payload["results"]]
        assert "invariant-X9aX7" in names

    def test_verify_single(self, capsys):
        code, out, _ = run(capsys, "catalog", "verify", "flat-additive")
        assert code == 0
        payload = json.loads(out)
        assert payload["results"][0]["pass"] is True

    def test_export_single(self, capsys):
        code, out, _ = run(capsys, "catalog", "export", "product-power")
        assert code == 0
        payload = json.loads(out)
        assert payload["results"][0]["expression"].startswith("(theta1 - c5)")

    def test_export_writes_file(self, tmp_path, capsys):
        target = tmp_path / "catalog.json"
        code, out, _ = run(capsys, "catalog", "export", "--out", str(target))
        assert code == 0
        assert out == ""
        data = json.loads(target.read_text())
        assert data["results"]


class TestDeterminism:
    def test_identical_argv_and_seed_byte_identical(self, capsys):
        argv = ["check", "--catalog", "normal-natural", "--seed", "7"]
        _, first, _ = run(capsys, *argv)
        _, second, _ = run(capsys, *argv)
        assert first == second

    def test_csv_disallowed_for_non_grid(self, capsys):
        code, _, err = run(
            capsys, "check", "--catalog", "normal-natural", "--format", "csv"
        )
        assert code == 2
        assert "csv" in err

    def test_help_available_everywhere(self, capsys):
        for argv in (["--help"], ["check", "--help"], ["symmetry", "verify", "--help"]):
            code, out, _ = run(capsys, *argv)
            assert code == 0
            assert "--seed" in out or "usage" in out
