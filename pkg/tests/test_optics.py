import numpy as np
import pytest

from src.models.aperture import CodedAperture, DispersionModel
from src.models.errors import DimensionError, OracleSizeError, ParameterError
from src.models.spectral import Measurement, SpectralCube
from src.services.bands import make_wavelength_grid
from src.services.optics import SystemOperator, add_noise, adjoint, build_explicit_matrix, diag_HHt, forward


def random_cube(op, seed, nonnegative=False):
    rng = np.random.default_rng(seed)
    data = rng.random(op.cube_shape) if nonnegative else rng.standard_normal(op.cube_shape)
    return SpectralCube(grid=op.grid, data=data)


def random_meas(op, seed):
    return Measurement(data=np.random.default_rng(seed).standard_normal(op.meas_shape))


def constant_operator(nx, ny, n, value):
    dispersion = DispersionModel(shift_per_channel=1)
    mask = CodedAperture(
        values=np.full((ny, nx + n - 1), value), origin_offset=dispersion.origin_offset(n)
    )
    return SystemOperator(nx, ny, make_wavelength_grid(700, 700 + 10 * (n - 1), n), mask, dispersion)


class TestForwardAdjoint:
    def test_hand_example(self, tiny_operator):
        cube = SpectralCube(grid=tiny_operator.grid, data=[[[2.0, 3.0]], [[5.0, 7.0]]])
        np.testing.assert_array_equal(forward(tiny_operator, cube).data, [[5.0, 3.0]])

    def test_hand_example_adjoint(self, tiny_operator):
        back = adjoint(tiny_operator, Measurement(data=[[1.0, 1.0]]))
        np.testing.assert_array_equal(back.data[0], [[0.0, 1.0]])
        np.testing.assert_array_equal(back.data[1], [[1.0, 0.0]])

    def test_single_band_open_mask_is_identity(self):
        op = constant_operator(5, 4, 1, 1)
        cube = random_cube(op, seed=1)
        np.testing.assert_array_equal(op.forward(cube).data, cube.data[0])

    def test_closed_mask_gives_zero(self):
        op = constant_operator(5, 4, 3, 0)
        assert not np.any(op.forward(random_cube(op, seed=2)).data)

    def test_zero_measurement_gives_zero_cube(self, make_operator):
        op = make_operator(6, 5, 4)
        assert not np.any(op.adjoint(Measurement(data=np.zeros(op.meas_shape))).data)

    def test_forward_records_no_noise(self, make_operator):
        op = make_operator(4, 3, 2)
        assert op.forward(random_cube(op, seed=0)).noise_sigma == 0.0

    def test_adjoint_identity_random_trials(self, make_operator):
        rng = np.random.default_rng(1234)
        for trial in range(100):
            nx, ny, n = (int(v) for v in rng.integers(1, [17, 17, 9]))
            density = float(rng.choice([0.3, 0.5, 0.8]))
            op = make_operator(nx, ny, n, density=density, seed=trial)
            f = rng.standard_normal(op.cube_shape)
            g = rng.standard_normal(op.meas_shape)
            hf = op.apply(f)
            lhs = float(np.sum(hf * g))
            rhs = float(np.sum(f * op.apply_adjoint(g)))
            assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(hf) * np.linalg.norm(g) + 1e-300

    def test_linearity(self, make_operator):
        op = make_operator(7, 6, 5, seed=3)
        f, g = random_cube(op, 1).data, random_cube(op, 2).data
        a, b = 1.7, -0.4
        combined = op.apply(a * f + b * g)
        separate = a * op.apply(f) + b * op.apply(g)
        assert np.linalg.norm(combined - separate) <= 1e-12 * np.linalg.norm(separate)

    def test_binary_mask_never_exceeds_band_sum(self, make_operator):
        op = make_operator(9, 7, 6, seed=5)
        cube = random_cube(op, seed=6, nonnegative=True)
        assert np.all(op.forward(cube).data <= cube.data.sum(axis=0) + 1e-12)

    def test_dimension_mismatch(self, make_operator):
        op = make_operator(4, 3, 2)
        wrong = SpectralCube(grid=op.grid, data=np.zeros((2, 3, 5)))
        with pytest.raises(DimensionError):
            op.forward(wrong)
        with pytest.raises(DimensionError):
            op.adjoint(Measurement(data=np.zeros((4, 3))))

    def test_mask_sizing_is_checked(self):
        grid = make_wavelength_grid(700, 800, 3)
        mask = CodedAperture(values=np.ones((4, 6)), origin_offset=-2)
        with pytest.raises(DimensionError):
            SystemOperator(5, 4, grid, mask)

    def test_from_mask_infers_scene_width(self):
        grid = make_wavelength_grid(700, 840, 8)
        mask = CodedAperture(values=np.ones((64, 71)), origin_offset=-7)
        op = SystemOperator.from_mask(mask, grid)
        assert (op.nx, op.ny) == (64, 64)


class TestDenseOracle:
    def test_hand_example_matrix(self, tiny_operator):
        np.testing.assert_array_equal(
            build_explicit_matrix(tiny_operator), [[0, 0, 1, 0], [0, 1, 0, 0]]
        )

    def test_identity_matrix(self):
        op = constant_operator(4, 3, 1, 1)
        np.testing.assert_array_equal(op.build_explicit_matrix(), np.eye(12))

    def test_random_operator_matches_forward(self, make_operator):
        op = make_operator(4, 3, 3, seed=9)
        matrix = op.build_explicit_matrix()
        rng = np.random.default_rng(0)
        for _ in range(20):
            f = rng.standard_normal(op.cube_shape)
            np.testing.assert_allclose(matrix @ f.ravel(), op.apply(f).ravel(), rtol=0, atol=1e-12)

    @pytest.mark.parametrize(
        "dispersion",
        [
            DispersionModel(shift_per_channel=1),
            DispersionModel(shift_per_channel=2, reference_channel=1),
            DispersionModel(shift_per_channel=-1),
        ],
        ids=["unit", "double-shift-ref1", "negative"],
    )
    def test_equivalence_on_all_small_dims(self, make_operator, dispersion):
        rng = np.random.default_rng(42)
        for nx in range(1, 7):
            for ny in range(1, 6):
                for n in range(1, 5):
                    if dispersion.reference_channel >= n:
                        continue
                    op = make_operator(nx, ny, n, seed=nx * 100 + ny * 10 + n, dispersion=dispersion)
                    matrix = op.build_explicit_matrix()
                    f = rng.standard_normal(op.cube_shape)
                    g = rng.standard_normal(op.meas_shape)
                    np.testing.assert_allclose(matrix @ f.ravel(), op.apply(f).ravel(), rtol=0, atol=1e-12)
                    np.testing.assert_allclose(
                        matrix.T @ g.ravel(), op.apply_adjoint(g).ravel(), rtol=0, atol=1e-12
                    )

    def test_size_cap(self, make_operator):
        op = make_operator(16, 16, 8)
        with pytest.raises(OracleSizeError):
            op.build_explicit_matrix()
        assert op.build_explicit_matrix(max_entries=10**7).shape == (256, 2048)


class TestDiagHHt:
    def test_open_mask(self):
        op = constant_operator(5, 4, 3, 1)
        np.testing.assert_array_equal(diag_HHt(op), np.full((4, 5), 3.0))

    def test_closed_mask(self):
        op = constant_operator(5, 4, 3, 0)
        assert not np.any(diag_HHt(op))

    def test_matches_dense_oracle(self, make_operator):
        op = make_operator(5, 4, 3, seed=8)
        matrix = op.build_explicit_matrix()
        np.testing.assert_array_equal(diag_HHt(op).ravel(), np.diag(matrix @ matrix.T))
        assert op.norm_sq() == pytest.approx(np.linalg.norm(matrix, 2) ** 2)


class TestAddNoise:
    def test_zero_sigma_is_bitwise_identity(self, make_operator):
        op = make_operator(6, 5, 3)
        meas = op.forward(random_cube(op, seed=1, nonnegative=True))
        np.testing.assert_array_equal(add_noise(meas, 0.0, seed=1).data, meas.data)

    def test_deterministic_for_seed(self, make_operator):
        op = make_operator(6, 5, 3)
        meas = op.forward(random_cube(op, seed=1, nonnegative=True))
        np.testing.assert_array_equal(add_noise(meas, 0.05, 9).data, add_noise(meas, 0.05, 9).data)

    def test_noise_level(self):
        meas = Measurement(data=np.random.default_rng(0).random((100, 100)) * 3.0)
        noisy = add_noise(meas, 0.01, seed=17)
        expected = 0.01 * meas.data.max()
        assert noisy.noise_sigma == pytest.approx(expected)
        assert np.std(noisy.data - meas.data) == pytest.approx(expected, rel=0.05)

    def test_negative_sigma(self):
        with pytest.raises(ParameterError):
            add_noise(Measurement(data=np.ones((2, 2))), -0.1, seed=0)

    def test_negative_measurement_uses_peak_magnitude(self):
        meas = Measurement(data=-np.linspace(1.0, 4.0, 400).reshape(20, 20))
        noisy = add_noise(meas, 0.1, seed=3)
        assert noisy.noise_sigma == pytest.approx(0.4)
        assert np.all(np.isfinite(noisy.data))
