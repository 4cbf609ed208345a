"""End-to-end tests of the command line interface.

Every test drives oped.cli.main with an argv list and checks exit
codes, emitted files, manifests, and stdout/stderr text.
"""

import hashlib
import json

import numpy as np
import pytest

from oped.cli import main
from oped.phantom import ImageGrid, get_preset, save_phantom
from oped.radon import Sinogram, read_sinogram, write_sinogram


def run(argv):
    return main([str(a) for a in argv])


def load_manifest(path):
    with open(str(path) + ".manifest.json", "r", encoding="utf-8") as fh:
        return json.load(fh)


def simulate(tmp_path, name, preset, scan, order, extra=()):
    out = tmp_path / name
    argv = ["simulate", "--preset", preset, "--type", scan, "--order", order, "--output", out]
    assert run(argv + list(extra)) == 0
    return out


class TestSimulate:
    def test_disk_type_ii_geometry(self, tmp_path):
        out = simulate(tmp_path, "disk.sino", "disk", "II", 4)
        sino = read_sinogram(out)
        assert sino.d == 2
        assert sino.geometry == "type-II"
        assert sino.values.shape == (9, 8)

    def test_type_i_geometry(self, tmp_path):
        out = simulate(tmp_path, "disk.sino", "disk", "I", 4)
        sino = read_sinogram(out)
        assert sino.geometry == "type-I"
        assert sino.values.shape == (9, 9)

    def test_ball_3d_geometry(self, tmp_path):
        out = simulate(tmp_path, "ball.sino", "ball", "3d", 2)
        sino = read_sinogram(out)
        assert sino.d == 3
        assert sino.values.shape == (9, 3)

    def test_noiseless_runs_are_byte_identical(self, tmp_path):
        a = simulate(tmp_path, "a.sino", "disk", "II", 4)
        b = simulate(tmp_path, "b.sino", "disk", "II", 4)
        assert a.read_bytes() == b.read_bytes()

    def test_noise_requires_seed(self, tmp_path, capsys):
        argv = ["simulate", "--preset", "disk", "--order", "2", "--noise", "0.1", "--output", tmp_path / "x.sino"]
        assert run(argv) == 2
        assert "seed" in capsys.readouterr().err

    def test_noise_is_seeded(self, tmp_path):
        a = simulate(tmp_path, "a.sino", "disk", "II", 3, extra=["--noise", "0.05", "--seed", "7"])
        b = simulate(tmp_path, "b.sino", "disk", "II", 3, extra=["--noise", "0.05", "--seed", "7"])
        c = simulate(tmp_path, "c.sino", "disk", "II", 3, extra=["--noise", "0.05", "--seed", "8"])
        assert a.read_bytes() == b.read_bytes()
        assert not np.array_equal(read_sinogram(a).values, read_sinogram(c).values)
        clean = simulate(tmp_path, "d.sino", "disk", "II", 3)
        delta = read_sinogram(a).values - read_sinogram(clean).values
        assert 0.0 < np.max(np.abs(delta)) < 0.3

    def test_phantom_file_source(self, tmp_path):
        path = tmp_path / "phantom.json"
        save_phantom(get_preset("disk_half"), path)
        out = tmp_path / "file.sino"
        assert run(["simulate", "--phantom", path, "--type", "II", "--order", "3", "--output", out]) == 0
        manifest = load_manifest(out)
        assert manifest["inputs"]["phantom.json"] == hashlib.sha256(path.read_bytes()).hexdigest()

    def test_unknown_preset_exits_2(self, tmp_path, capsys):
        assert run(["simulate", "--preset", "nope", "--order", "2", "--output", tmp_path / "x.sino"]) == 2
        assert "preset" in capsys.readouterr().err

    def test_type_and_d_must_agree(self, tmp_path, capsys):
        argv = ["simulate", "--preset", "disk", "--type", "3d", "--d", "2", "--order", "2", "--output", tmp_path / "x"]
        assert run(argv) == 2
        assert "disagree" in capsys.readouterr().err

    def test_scan_dimension_must_match_phantom(self, tmp_path, capsys):
        argv = ["simulate", "--preset", "disk", "--type", "3d", "--order", "2", "--output", tmp_path / "x"]
        assert run(argv) == 2
        assert "d=3" in capsys.readouterr().err

    def test_numeric_oracle_converges_to_closed_form(self, tmp_path):
        exact = read_sinogram(simulate(tmp_path, "a.sino", "disk_half", "II", 3)).values
        deltas = []
        for refinement in (8, 64):
            out = simulate(tmp_path, f"r{refinement}.sino", "disk_half", "II", 3,
                           extra=["--numeric", "--refinement", refinement])
            deltas.append(np.max(np.abs(read_sinogram(out).values - exact)))
        assert deltas[1] < deltas[0]
        assert deltas[1] < 1e-3


class TestReconstructCommand:
    def test_polynomial_round_trip(self, tmp_path):
        sino = simulate(tmp_path, "poly.sino", "poly_2", "II", 4)
        out = tmp_path / "poly.grid"
        argv = ["reconstruct", "--input", sino, "--output", out, "--resolution", "48", "--reference", "poly_2"]
        assert run(argv) == 0
        metrics = load_manifest(out)["metrics"]
        assert metrics["max_masked"] < 1e-8
        assert metrics["l2_masked"] < 1e-8
        assert metrics["component_mean_error"] == []

    def test_eta_filter_passes_low_degrees(self, tmp_path):
        sino = simulate(tmp_path, "poly.sino", "poly_2", "II", 4)
        out = tmp_path / "eta.grid"
        argv = ["reconstruct", "--input", sino, "--output", out, "--resolution", "32",
                "--filter", "eta", "--reference", "poly_2"]
        assert run(argv) == 0
        assert load_manifest(out)["metrics"]["max_masked"] < 1e-8

    def test_truncated_kernel_grid(self, tmp_path):
        sino = simulate(tmp_path, "poly.sino", "poly_2", "II", 6)
        out = tmp_path / "cut.grid"
        argv = ["reconstruct", "--input", sino, "--output", out, "--resolution", "32",
                "--truncation", "2", "--reference", "poly_2"]
        assert run(argv) == 0
        manifest = load_manifest(out)
        assert manifest["geometry"]["degree"] == 2
        assert manifest["metrics"]["max_masked"] < 1e-8

    def test_svd_matches_kernel_reconstruction(self, tmp_path):
        sino = simulate(tmp_path, "sl.sino", "shepp_logan_2d", "II", 16)
        kernel_out = tmp_path / "kernel.grid"
        svd_out = tmp_path / "svd.grid"
        base = ["--input", sino, "--resolution", "64", "--truncation", "16"]
        assert run(["reconstruct", "--output", kernel_out, "--algorithm", "oped"] + base) == 0
        assert run(["svd-reconstruct", "--output", svd_out] + base) == 0
        a = ImageGrid.load(kernel_out)
        b = ImageGrid.load(svd_out)
        mask = a.mask()
        delta = np.abs(a.values.reshape(-1)[mask] - b.values.reshape(-1)[mask])
        assert np.max(delta) <= 1e-6

    def test_svd_default_truncation_is_certified(self, tmp_path):
        sino = simulate(tmp_path, "sl.sino", "shepp_logan_2d", "II", 8)
        out = tmp_path / "svd.grid"
        argv = ["reconstruct", "--input", sino, "--output", out, "--resolution", "32", "--algorithm", "svd"]
        assert run(argv) == 0
        from oped.svd import certified_truncation

        assert load_manifest(out)["geometry"]["degree"] == certified_truncation(read_sinogram(sino)) == 15

    def test_error_decreases_with_order(self, tmp_path):
        errors = []
        for order in (16, 64):
            sino = simulate(tmp_path, f"sl{order}.sino", "shepp_logan_2d", "II", order)
            out = tmp_path / f"sl{order}.grid"
            argv = ["reconstruct", "--input", sino, "--output", out, "--resolution", "64",
                    "--reference", "shepp_logan_2d"]
            assert run(argv) == 0
            errors.append(load_manifest(out)["metrics"]["l2_masked"])
        assert errors[1] < errors[0]

    def test_pgm_export(self, tmp_path):
        sino = simulate(tmp_path, "disk.sino", "disk", "II", 4)
        out = tmp_path / "disk.grid"
        pgm = tmp_path / "disk.pgm"
        argv = ["reconstruct", "--input", sino, "--output", out, "--resolution", "32", "--pgm", pgm]
        assert run(argv) == 0
        assert pgm.read_bytes().startswith(b"P5\n32 32\n255\n")

    def test_diagnostics_json_on_stdout(self, tmp_path, capsys):
        sino = simulate(tmp_path, "disk.sino", "disk", "II", 4)
        argv = ["reconstruct", "--input", sino, "--output", tmp_path / "g", "--resolution", "24", "--diagnostics"]
        capsys.readouterr()
        assert run(argv) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["max_lebesgue"] > 1.0
        assert report["runtime_seconds"] > 0.0

    def test_missing_input_exits_1(self, tmp_path, capsys):
        assert run(["reconstruct", "--input", tmp_path / "nope.sino", "--output", tmp_path / "g"]) == 1
        assert "nope.sino" in capsys.readouterr().err

    def test_corrupt_container_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.sino"
        bad.write_bytes(b"this is not a sinogram")
        assert run(["reconstruct", "--input", bad, "--output", tmp_path / "g"]) == 2
        assert "magic" in capsys.readouterr().err

    def test_order_mismatch_exits_2(self, tmp_path, capsys):
        sino = simulate(tmp_path, "disk.sino", "disk", "II", 4)
        assert run(["reconstruct", "--input", sino, "--output", tmp_path / "g", "--order", "5"]) == 2
        assert "order" in capsys.readouterr().err

    def test_type_mismatch_exits_2(self, tmp_path, capsys):
        sino = simulate(tmp_path, "disk.sino", "disk", "II", 4)
        assert run(["reconstruct", "--input", sino, "--output", tmp_path / "g", "--type", "I"]) == 2
        assert "geometry" in capsys.readouterr().err

    def test_truncation_with_eta_exits_2(self, tmp_path, capsys):
        sino = simulate(tmp_path, "disk.sino", "disk", "II", 4)
        argv = ["reconstruct", "--input", sino, "--output", tmp_path / "g", "--truncation", "2", "--filter", "eta"]
        assert run(argv) == 2
        assert "eta" in capsys.readouterr().err

    def test_overflowing_data_exits_3(self, tmp_path, capsys):
        base = read_sinogram(simulate(tmp_path, "disk.sino", "disk", "II", 4))
        huge = Sinogram(base.d, base.geometry, base.order, base.directions, base.direction_weights,
                        base.nodes, base.node_weights, np.full_like(base.values, 1e308))
        path = tmp_path / "huge.sino"
        write_sinogram(huge, path)
        with np.errstate(over="ignore"):
            code = run(["reconstruct", "--input", path, "--output", tmp_path / "g", "--resolution", "16"])
        assert code == 3
        assert "non-finite" in capsys.readouterr().err


class TestSvdVerifyCommand:
    def test_report_on_stdout(self, capsys):
        assert run(["svd-verify", "--d", "2", "--n-max", "3", "--refinement", "2"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["d"] == 2
        assert report["n_max"] == 3
        assert report["max_pair_residual"] < 1e-6
        assert all(value < 1e-8 for value in report["gram_residuals"].values())
        assert len(report["gamma_table"]) == 4

    def test_report_to_file(self, tmp_path):
        out = tmp_path / "report.json"
        assert run(["svd-verify", "--d", "2", "--n-max", "2", "--refinement", "2", "--output", out]) == 0
        report = json.loads(out.read_text())
        assert report["gamma_table"][0][1] == pytest.approx(2.0)
        assert load_manifest(out)["geometry"] == {"d": 2, "n_max": 2}


class TestReportCommand:
    def test_reconstruction_scores_near_zero(self, tmp_path, capsys):
        sino = simulate(tmp_path, "disk.sino", "disk", "II", 4)
        out = tmp_path / "disk.grid"
        assert run(["reconstruct", "--input", sino, "--output", out, "--resolution", "32"]) == 0
        capsys.readouterr()
        assert run(["report", "--grid", out, "--reference", "disk"]) == 0
        metrics = json.loads(capsys.readouterr().out)
        assert metrics["max_masked"] < 1e-10
        assert metrics["component_mean_error"] == [pytest.approx(0.0, abs=1e-10)]

    def test_zero_grid_against_disk(self, tmp_path, capsys):
        grid = ImageGrid(2, 16, np.zeros(16 * 16))
        grid.save(tmp_path / "zero.grid")
        assert run(["report", "--grid", tmp_path / "zero.grid", "--reference", "disk"]) == 0
        metrics = json.loads(capsys.readouterr().out)
        assert metrics["max_masked"] == pytest.approx(1.0)
        assert metrics["l2_relative"] == pytest.approx(1.0)

    def test_dimension_mismatch_exits_2(self, tmp_path, capsys):
        grid = ImageGrid(2, 8, np.zeros(64))
        grid.save(tmp_path / "flat.grid")
        assert run(["report", "--grid", tmp_path / "flat.grid", "--reference", "ball"]) == 2
        assert "dimension" in capsys.readouterr().err


class TestDiagnoseCommand:
    def test_geometry_summary(self, tmp_path, capsys):
        sino = simulate(tmp_path, "disk.sino", "disk", "II", 4)
        capsys.readouterr()
        assert run(["diagnose", "--input", sino]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["geometry"] == "type-II"
        assert report["order"] == 4
        assert report["kernel_degree"] == 8
        assert report["directions"] == 9
        assert report["backend"] in ("numba", "numpy")
        assert report["threads"] >= 1
        assert report["max_lebesgue"] > 1.0

    def test_degree_override_lowers_lebesgue(self, tmp_path, capsys):
        sino = simulate(tmp_path, "disk.sino", "disk", "II", 8)
        capsys.readouterr()
        assert run(["diagnose", "--input", sino, "--resolution", "24"]) == 0
        full = json.loads(capsys.readouterr().out)
        assert run(["diagnose", "--input", sino, "--resolution", "24", "--degree", "4"]) == 0
        low = json.loads(capsys.readouterr().out)
        assert low["degree"] == 4
        assert low["max_lebesgue"] < full["max_lebesgue"]


class TestManifest:
    def test_records_command_hashes_and_version(self, tmp_path):
        sino = simulate(tmp_path, "disk.sino", "disk", "II", 4)
        out = tmp_path / "disk.grid"
        argv = ["reconstruct", "--input", sino, "--output", out, "--resolution", "24"]
        assert run(argv) == 0
        manifest = load_manifest(out)
        assert manifest["command"][1:] == [str(a) for a in argv]
        assert manifest["inputs"]["disk.sino"] == hashlib.sha256(sino.read_bytes()).hexdigest()
        assert manifest["timing"]["seconds"] > 0.0
        assert manifest["metrics"] is None
        from oped import __version__

        assert manifest["version"] == __version__
