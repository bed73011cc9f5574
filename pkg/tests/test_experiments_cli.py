"""Experiment drivers, artifact files, the self-check suite, and the CLI."""

import csv
import os

import numpy as np
import pytest

from patchbound import ExperimentConfig, run, verify
from patchbound.cli import main
from patchbound.experiments import TableRow


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def column(rows, header, name):
    j = header.index(name)
    return np.array([float(r[j]) for r in rows])


@pytest.fixture(scope="module")
def ex1_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("ex1")
    config = ExperimentConfig(
        experiment="ex1-galerkin", mesh_sizes=(4,), ref="ap2", out_dir=str(out)
    )
    return out, run(config)


class TestConfig:
    def test_unknown_experiment(self):
        with pytest.raises(ValueError, match="unknown experiment"):
            ExperimentConfig(experiment="ex9").validated()

    def test_nonpositive_mesh_size(self):
        with pytest.raises(ValueError, match="positive"):
            ExperimentConfig(experiment="ex1-galerkin", mesh_sizes=(0,)).validated()

    def test_dg_penalty_must_exceed_one(self):
        with pytest.raises(ValueError, match="penalty"):
            ExperimentConfig(experiment="ex1-dg", c_sigma=1.0).validated()

    def test_unknown_reference(self):
        with pytest.raises(ValueError, match="reference"):
            ExperimentConfig(experiment="ex1-galerkin", ref="ap3").validated()

    def test_empty_sizes_select_defaults(self):
        assert ExperimentConfig(experiment="ex1-galerkin").validated() == (10, 20, 30, 40)
        assert ExperimentConfig(experiment="ex3-nonsym").validated() == (10, 30, 50, 70)

    def test_default_out_dir_names_the_experiment(self):
        assert "ex2-figure" in ExperimentConfig(experiment="ex2-figure").resolved_out_dir()


class TestRowArtifacts:
    def test_preconditioned_row_fields(self, ex1_run):
        _, rows = ex1_run
        (row,) = rows
        assert row.N == 4
        assert row.kappa_A is None and row.lam_im_max is None and row.beta_max is None
        assert row.kappa_PA is not None and row.bound_ratio is not None
        assert row.iters >= 1
        assert row.bound_ratio >= row.kappa_PA - 1e-9

    def test_table_schema(self, ex1_run):
        out, rows = ex1_run
        header, data = read_csv(out / "table.csv")
        assert tuple(header) == TableRow._FIELDS
        assert len(data) == 1
        assert data[0][0] == "4"
        assert data[0][1] == ""  # kappa_A not computed on preconditioned rows
        assert float(data[0][3]) == pytest.approx(rows[0].bound_ratio, rel=1e-5)

    def test_bounds_schema_and_ordering(self, ex1_run):
        out, _ = ex1_run
        header, data = read_csv(out / "n4" / "bounds.csv")
        assert header == ["gamma_min", "gamma_max"]
        assert len(data) == 9  # (4-1)^2 interior vertices
        lo = column(data, header, "gamma_min")
        hi = column(data, header, "gamma_max")
        assert np.all(np.diff(lo) >= 0) and np.all(np.diff(hi) >= 0)
        assert np.all(lo <= hi)

    def test_spectrum_inside_written_bounds(self, ex1_run):
        out, _ = ex1_run
        bh, bdata = read_csv(out / "n4" / "bounds.csv")
        sh, sdata = read_csv(out / "n4" / "spectrum.csv")
        assert sh == ["re", "im"]
        assert np.all(column(sdata, sh, "im") == 0.0)
        lam = np.sort(column(sdata, sh, "re"))
        lo = column(bdata, bh, "gamma_min")
        hi = column(bdata, bh, "gamma_max")
        # 6-significant-digit artifact rounding sets the slack
        assert np.all(lam >= lo - 1e-4) and np.all(lam <= hi + 1e-4)

    def test_residual_history_schema(self, ex1_run):
        out, rows = ex1_run
        header, data = read_csv(out / "n4" / "residuals.csv")
        assert header == ["iteration", "residual"]
        assert len(data) == rows[0].iters + 1
        assert [int(r[0]) for r in data] == list(range(len(data)))

    def test_spectrum_svg_is_plain_svg(self, ex1_run):
        out, _ = ex1_run
        text = (out / "n4" / "spectrum.svg").read_text()
        assert text.startswith("<svg")
        assert "polyline" in text and "circle" in text
        assert "href" not in text  # self-contained, no external references

    def test_rerun_is_bit_identical(self, ex1_run, tmp_path):
        out, _ = ex1_run
        config = ExperimentConfig(
            experiment="ex1-galerkin", mesh_sizes=(4,), ref="ap2", out_dir=str(tmp_path)
        )
        run(config)
        for rel in ("table.csv", "n4/bounds.csv", "n4/spectrum.csv",
                    "n4/residuals.csv", "n4/spectrum.svg"):
            assert (tmp_path / rel).read_bytes() == (out / rel).read_bytes(), rel


class TestRowFailure:
    def test_degenerate_row_is_skipped_with_diagnostic(self, tmp_path, capsys):
        config = ExperimentConfig(
            experiment="ex1-galerkin", mesh_sizes=(1, 4), ref="ap2",
            out_dir=str(tmp_path),
        )
        rows = run(config)
        assert [r.N for r in rows] == [4]
        err = capsys.readouterr().err
        assert "N=1" in err and "failed" in err
        _, data = read_csv(tmp_path / "table.csv")
        assert len(data) == 1 and data[0][0] == "4"


class TestFigureSweep:
    def test_all_six_rows(self, tmp_path):
        config = ExperimentConfig(
            experiment="ex2-figure", mesh_sizes=(4,), out_dir=str(tmp_path)
        )
        rows = run(config)
        assert len(rows) == 6
        assert all(r.bound_ratio is not None for r in rows)
        for test in ("test1", "test2", "test3"):
            for disc in ("galerkin", "dg"):
                row_dir = tmp_path / f"{test}-{disc}-n4"
                assert (row_dir / "bounds.csv").exists()
                assert (row_dir / "spectrum.csv").exists()


class TestConvectionRows:
    def test_preconditioned_rectangle_artifacts(self, tmp_path):
        config = ExperimentConfig(
            experiment="ex3-nonsym", mesh_sizes=(4,), ref="ap2", out_dir=str(tmp_path)
        )
        (row,) = run(config)
        header, data = read_csv(tmp_path / "n4" / "bounds.csv")
        assert header == ["alpha_min", "alpha_max", "beta_max"]
        assert len(data) == 1
        alpha_min, alpha_max, beta_max = (float(v) for v in data[0])
        assert 0 < alpha_min <= alpha_max
        assert row.beta_max == pytest.approx(beta_max, rel=1e-5)
        assert row.lam_im_max <= beta_max + 1e-9
        sh, sdata = read_csv(tmp_path / "n4" / "spectrum.csv")
        re = column(sdata, sh, "re")
        im = column(sdata, sh, "im")
        assert np.all(re >= alpha_min - 1e-4) and np.all(re <= alpha_max + 1e-4)
        assert np.all(np.abs(im) <= beta_max + 1e-4)

    def test_unpreconditioned_row(self, tmp_path):
        config = ExperimentConfig(
            experiment="ex3-nonsym", mesh_sizes=(4,), out_dir=str(tmp_path)
        )
        (row,) = run(config)
        assert row.kappa_A is not None and row.lam_im_max is not None
        assert row.kappa_PA is None and row.bound_ratio is None and row.beta_max is None
        assert not (tmp_path / "n4" / "bounds.csv").exists()
        assert (tmp_path / "n4" / "spectrum.csv").exists()


class TestCounterexample:
    def test_run_prints_verdicts_and_writes_artifacts(self, tmp_path, capsys):
        config = ExperimentConfig(experiment="counterexample", out_dir=str(tmp_path))
        assert run(config) == []
        out = capsys.readouterr().out
        assert out.count("eigenvalue ") == 4
        assert "outside all per-patch rectangles: true" in out
        assert "global rectangle contains all: true" in out
        header, data = read_csv(tmp_path / "bounds.csv")
        assert header == ["alpha_min", "alpha_max", "beta_max"]
        assert len(data) == 4
        _, sdata = read_csv(tmp_path / "spectrum.csv")
        assert len(sdata) == 4
        assert (tmp_path / "spectrum.svg").exists()


class TestVerify:
    def test_self_checks_pass(self):
        summary = verify()
        assert summary.ok
        assert len(summary.lines) >= 20
        assert all(line.startswith("ok  ") for line in summary.lines)
        assert str(summary).endswith("verify: pass")

    def test_swapped_bounds_negative_control(self):
        summary = verify(_swap_gamma=True)
        assert not summary.ok
        assert any(line.startswith("FAIL") for line in summary.lines)
        assert str(summary).endswith("verify: FAIL")


class TestCli:
    def test_run_with_dumps(self, tmp_path):
        code = main([
            "run", "ex1-galerkin", "--n", "4", "--ref", "ap2",
            "--diag", "lr-ul", "--dump-matrices", "--dump-mesh",
            "--out", str(tmp_path),
        ])
        assert code == 0
        row_dir = tmp_path / "n4"
        for name in ("a.mtx", "p.mtx", "vertices.csv", "triangles.csv", "edges.csv"):
            assert (row_dir / name).exists(), name

    def test_invalid_penalty_exits_2(self, tmp_path, capsys):
        code = main([
            "run", "ex1-dg", "--n", "4", "--ref", "ap1",
            "--c-sigma", "0.5", "--out", str(tmp_path),
        ])
        assert code == 2
        assert "patchbound: error:" in capsys.readouterr().err

    def test_unknown_experiment_rejected_by_parser(self):
        with pytest.raises(SystemExit) as exc:
            main(["run", "ex9"])
        assert exc.value.code == 2

    @pytest.mark.parametrize("bad", ["a,b", "0", "4,-1"])
    def test_bad_mesh_list_rejected(self, bad):
        with pytest.raises(SystemExit) as exc:
            main(["run", "ex1-galerkin", "--n", bad])
        assert exc.value.code == 2

    def test_verify_command(self, capsys):
        assert main(["verify"]) == 0
        assert capsys.readouterr().out.strip().endswith("verify: pass")
