import argparse
import json

import numpy as np
import pytest

from src import cli
from src.models.spectral import SpectralCube
from src.services import storage


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def letters_pipeline(tmp_path):
    """Phantom, mask and noiseless measurement for a small two-letter scene."""
    scene, mask, meas = tmp_path / "scene.hsc", tmp_path / "mask.msk", tmp_path / "meas.hsc"
    assert run("phantom", "--kind", "letters", "--nx", 32, "--ny", 32, "--grid", "800:1000:4",
               "--glyph", "U@850", "--glyph", "P@950", "--out", scene) == 0
    assert run("mask", "--nx", 32, "--ny", 32, "--nlam", 4, "--seed", 7, "--out", mask) == 0
    assert run("simulate", "--scene", scene, "--mask", mask, "--out", meas) == 0
    return tmp_path


class TestArgumentParsing:
    def test_glyph(self):
        assert cli.parse_glyph("U@850").center_nm == 850.0
        assert cli.parse_glyph("b@1550:laser").source == "laser"
        assert cli.parse_glyph("P@950:12.5").fwhm_nm == 12.5
        with pytest.raises(argparse.ArgumentTypeError):
            cli.parse_glyph("UP")

    def test_points(self):
        assert cli.parse_points("32,64;96,64") == [(32, 64), (96, 64)]
        assert cli.format_points([(1, 2), (3, 4)]) == "1,2;3,4"
        with pytest.raises(argparse.ArgumentTypeError):
            cli.parse_points("1;2")

    def test_usage_errors_exit_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run("mask", "--nx", 4, "--ny", 4, "--nlam", 2, "--density", 1.5, "--out", tmp_path / "m.msk")
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            run("phantom", "--kind", "letters", "--grid", "700:1600", "--out", tmp_path / "p.hsc")
        assert exc.value.code == 2

    def test_select_band_grids_are_subsets(self):
        grid = cli.bands.parse_grid_spec("700:1600:52")
        low = cli.select_band(grid, "low", 1050.0)
        high = cli.select_band(grid, "high", 1050.0)
        assert low.wavelengths + high.wavelengths == grid.wavelengths
        assert cli.select_band(grid, "full", 1050.0) is grid


class TestCommands:
    def test_mask_width(self, tmp_path):
        assert run("mask", "--nx", 64, "--ny", 64, "--nlam", 8, "--seed", 1, "--out", tmp_path / "m.msk") == 0
        mask = storage.read_mask(tmp_path / "m.msk")
        assert (mask.width, mask.height, mask.origin_offset) == (71, 64, -7)

    def test_simulate_with_noise_report(self, letters_pipeline):
        d = letters_pipeline
        assert run("simulate", "--scene", d / "scene.hsc", "--mask", d / "mask.msk", "--noise-sigma", 0.01,
                   "--seed", 3, "--out", d / "noisy.hsc", "--report", d / "sim.json") == 0
        report = json.loads((d / "sim.json").read_text())
        assert report["seeds"] == {"noise": 3}
        assert report["noise_sigma"] > 0
        clean = storage.read_measurement(d / "meas.hsc").data
        assert not np.array_equal(storage.read_measurement(d / "noisy.hsc").data, clean)

    @pytest.mark.parametrize("algo", ["twist", "gaptv"])
    def test_reconstruct_writes_cube_and_report(self, letters_pipeline, algo):
        d = letters_pipeline
        assert run("reconstruct", "--meas", d / "meas.hsc", "--mask", d / "mask.msk", "--grid", "800:1000:4",
                   "--algo", algo, "--iters", 10, "--out", d / "recon.hsc", "--report", d / "recon.json") == 0
        recon = storage.read_cube(d / "recon.hsc")
        assert recon.shape == (4, 32, 32)
        assert recon.data.min() >= 0.0
        report = json.loads((d / "recon.json").read_text())
        assert report["algorithm"] == algo
        assert report["iterations_run"] == len(report["objective_trace"]) <= 10
        assert report["config"]["grid"] == list(cli.bands.parse_grid_spec("800:1000:4").wavelengths)

    def test_compare_with_truth(self, letters_pipeline):
        d = letters_pipeline
        assert run("compare", "--meas", d / "meas.hsc", "--mask", d / "mask.msk", "--grid", "800:1000:4",
                   "--iters", 5, "--truth", d / "scene.hsc", "--out-twist", d / "t.hsc",
                   "--out-gaptv", d / "g.hsc", "--report", d / "cmp.json") == 0
        report = json.loads((d / "cmp.json").read_text())
        assert [r["algorithm"] for r in report["runs"]] == ["twist", "gaptv"]
        assert all(isinstance(r["metrics"]["psnr_db"], float) for r in report["runs"])

    def test_evaluate_against_itself(self, letters_pipeline):
        d = letters_pipeline
        # (0, 0) is background: zero-variance spectrum
        assert run("evaluate", "--recon", d / "scene.hsc", "--truth", d / "scene.hsc",
                   "--points", "0,0;5,12", "--out", d / "eval.json", "--csv", d / "spectra.csv") == 0
        report = json.loads((d / "eval.json").read_text())
        assert report["metrics"]["psnr_db"] == "Infinity"
        first, second = report["metrics"]["correlations"]
        assert first["r"] is None and first["error"]
        assert len(report["warnings"]) == 1
        wavelengths, spectra = storage.read_spectrum_csv(d / "spectra.csv")
        assert spectra.shape == (2, 4)

    def test_evaluate_flat_spectrum_gets_error_entry(self, tmp_path):
        grid = cli.bands.parse_grid_spec("700:1600:52")
        flat = SpectralCube(grid=grid, data=np.full((52, 2, 2), 0.1))
        ramp = SpectralCube(grid=grid, data=np.broadcast_to(np.arange(52.0)[:, None, None], (52, 2, 2)))
        storage.write_cube(flat, tmp_path / "flat.hsc")
        storage.write_cube(ramp, tmp_path / "ramp.hsc")
        assert run("evaluate", "--recon", tmp_path / "flat.hsc", "--truth", tmp_path / "ramp.hsc",
                   "--points", "1,1", "--out", tmp_path / "eval.json") == 0
        report = json.loads((tmp_path / "eval.json").read_text())
        (entry,) = report["metrics"]["correlations"]
        assert entry["r"] is None and "zero-variance" in entry["error"]
        assert report["warnings"]

    def test_export_band_reports_constant_band(self, tmp_path):
        grid = cli.bands.parse_grid_spec("800:1000:4")
        storage.write_cube(SpectralCube(grid=grid, data=np.full((4, 3, 3), 2.0)), tmp_path / "c.hsc")
        assert run("export-band", "--cube", tmp_path / "c.hsc", "--channel", 2, "--out", tmp_path / "c.pgm",
                   "--report", tmp_path / "c.json") == 0
        report = json.loads((tmp_path / "c.json").read_text())
        assert report["command"] == "export-band"
        assert report["config"]["constant"] is True
        assert len(report["warnings"]) == 1

    def test_simulate_negative_scene(self, tmp_path):
        grid = cli.bands.parse_grid_spec("800:1000:4")
        storage.write_cube(SpectralCube(grid=grid, data=-np.ones((4, 5, 6))), tmp_path / "neg.hsc")
        assert run("mask", "--nx", 6, "--ny", 5, "--nlam", 4, "--density", 1.0, "--out", tmp_path / "m.msk") == 0
        assert run("simulate", "--scene", tmp_path / "neg.hsc", "--mask", tmp_path / "m.msk",
                   "--noise-sigma", 0.05, "--out", tmp_path / "meas.hsc") == 0

    def test_export_band_by_wavelength(self, letters_pipeline):
        d = letters_pipeline
        assert run("export-band", "--cube", d / "scene.hsc", "--wavelength", 860, "--out", d / "b.pgm") == 0
        assert (d / "b.pgm").read_bytes().startswith(b"P5\n32 32\n255\n")

    def test_mask_grid_mismatch_exits_1(self, letters_pipeline):
        d = letters_pipeline
        assert run("reconstruct", "--meas", d / "meas.hsc", "--mask", d / "mask.msk", "--grid", "800:1000:5",
                   "--out", d / "recon.hsc") == 1

    def test_simulate_dimension_mismatch_exits_1(self, letters_pipeline):
        d = letters_pipeline
        assert run("mask", "--nx", 32, "--ny", 32, "--nlam", 5, "--out", d / "wide.msk") == 0
        assert run("simulate", "--scene", d / "scene.hsc", "--mask", d / "wide.msk", "--out", d / "x.hsc") == 1

    def test_missing_file_exits_1(self, tmp_path):
        assert run("stitch", "--low", tmp_path / "a.hsc", "--high", tmp_path / "b.hsc", "--out", tmp_path / "c.hsc") == 1

    def test_unknown_glyph_exits_1(self, tmp_path):
        assert run("phantom", "--kind", "letters", "--grid", "800:1000:4", "--glyph", "Q@900",
                   "--out", tmp_path / "p.hsc") == 1


class TestSubBandWorkflow:
    def run_band(self, d, band, n):
        scene, mask, meas, recon = (d / f"{band}.{ext}" for ext in ("scene.hsc", "msk", "meas.hsc", "recon.hsc"))
        assert run("phantom", "--kind", "materials", "--nx", 24, "--ny", 16, "--grid", "700:1600:10",
                   "--band", band, "--out", scene) == 0
        assert run("mask", "--nx", 24, "--ny", 16, "--nlam", n, "--seed", 5, "--out", mask) == 0
        assert run("simulate", "--scene", scene, "--mask", mask, "--noise-sigma", 0.01, "--seed", 2,
                   "--out", meas) == 0
        assert run("reconstruct", "--meas", meas, "--mask", mask, "--grid", "700:1600:10", "--band", band,
                   "--iters", 5, "--out", recon, "--report", d / f"{band}.json") == 0
        return recon

    def test_stitched_grid_is_full_grid(self, tmp_path):
        low = self.run_band(tmp_path, "low", 4)
        high = self.run_band(tmp_path, "high", 6)
        assert run("stitch", "--low", low, "--high", high, "--out", tmp_path / "full.hsc") == 0
        full = storage.read_cube(tmp_path / "full.hsc")
        assert full.grid == cli.bands.parse_grid_spec("700:1600:10")
        assert full.shape == (10, 16, 24)

    def test_reruns_are_identical(self, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        first.mkdir()
        second.mkdir()
        low_a = self.run_band(first, "low", 4)
        low_b = self.run_band(second, "low", 4)
        assert low_a.read_bytes() == low_b.read_bytes()
        report_a = json.loads((first / "low.json").read_text())
        report_b = json.loads((second / "low.json").read_text())
        report_a.pop("wall_time_s")
        report_b.pop("wall_time_s")
        assert report_a == report_b

    def test_stitch_rejects_swapped_bands(self, tmp_path):
        low = self.run_band(tmp_path, "low", 4)
        high = self.run_band(tmp_path, "high", 6)
        assert run("stitch", "--low", high, "--high", low, "--out", tmp_path / "bad.hsc") == 1
