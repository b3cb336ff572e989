"""Projection operators: fixed points, idempotence, pass-through, reflections."""

import numpy as np
import pytest

from cgraar import (
    ComplexField,
    IntensityData,
    SupportMask,
    dft_forward,
    project_magnitude,
    project_support,
    reflect,
    relaxed_reflect,
)
from cgraar.errors import InvalidFieldError, ShapeMismatchError


def random_field(rng, shape):
    return ComplexField(rng.normal(size=shape) + 1j * rng.normal(size=shape))


def centered_square_support(shape, side):
    mask = np.zeros(shape, dtype=bool)
    y0 = (shape[0] - side) // 2
    x0 = (shape[1] - side) // 2
    mask[y0 : y0 + side, x0 : x0 + side] = True
    return SupportMask(mask)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


class TestIntensityData:
    def test_measured_forced_false_on_zero_counts(self):
        counts = np.array([[0.0, 4.0], [1.0, 0.0]])
        data = IntensityData.from_counts(counts)
        assert data.measured.tolist() == [[False, True], [True, False]]

    def test_sqrt_counts_cached(self, rng):
        counts = rng.random((6, 6)) * 10
        data = IntensityData.from_counts(counts)
        assert np.max(np.abs(data.sqrt_counts**2 - counts)) < 1e-12

    def test_negative_counts_rejected(self):
        with pytest.raises(InvalidFieldError):
            IntensityData.from_counts(np.array([[1.0, -0.5], [0.0, 2.0]]))

    def test_extra_mask_merges(self):
        counts = np.ones((2, 2))
        data = IntensityData.from_counts(counts, mask=[[True, False], [True, True]])
        assert data.measured.tolist() == [[True, False], [True, True]]


class TestSupportMask:
    def test_needs_interior_and_exterior(self):
        with pytest.raises(InvalidFieldError):
            SupportMask(np.zeros((4, 4), dtype=bool))
        with pytest.raises(InvalidFieldError):
            SupportMask(np.ones((4, 4), dtype=bool))


class TestProjectMagnitude:
    def test_fixed_point(self, rng):
        f = random_field(rng, (8, 8))
        counts = np.abs(dft_forward(f).values) ** 2
        data = IntensityData.from_counts(counts)
        out = project_magnitude(f, data)
        assert np.max(np.abs(out.values - f.values)) < 1e-12 * np.max(np.abs(f.values))

    def test_zero_field_phase_convention(self):
        f = ComplexField(np.zeros((4, 4), dtype=complex))
        data = IntensityData.from_counts(np.ones((4, 4)))
        out = project_magnitude(f, data)
        spec = dft_forward(out).values
        # modulus 1, phase 0 everywhere: the projected spectrum is exactly 1
        assert np.max(np.abs(spec - 1.0)) < 1e-12

    def test_measured_moduli_exact_and_unmeasured_bit_preserved(self, rng):
        f = random_field(rng, (8, 8))
        counts = rng.random((8, 8)) * 5
        counts[rng.random((8, 8)) < 0.3] = 0.0
        mask = rng.random((8, 8)) > 0.2
        data = IntensityData.from_counts(counts, mask)
        out_spec = np.fft.fft2(project_magnitude(f, data).values)
        in_spec = np.fft.fft2(f.values)
        measured = data.measured
        # per-pixel oracle: measured pixels carry sqrt(I) exactly
        assert np.max(np.abs(np.abs(out_spec[measured]) - np.sqrt(counts[measured]))) < 1e-10
        # phase retained where the input modulus is nonzero
        nz = measured & (np.abs(in_spec) > 0)
        phase_diff = np.angle(out_spec[nz] * np.conj(in_spec[nz]))
        assert np.max(np.abs(phase_diff)) < 1e-10
        # unmeasured pixels pass through bit-exactly before the inverse
        direct = np.where(measured, np.sqrt(counts) * in_spec / np.where(np.abs(in_spec) == 0, 1, np.abs(in_spec)), in_spec)
        assert np.array_equal(direct[~measured], in_spec[~measured])

    def test_energy_on_measured_pixels(self, rng):
        f = random_field(rng, (8, 8))
        counts = rng.random((8, 8)) * 3
        data = IntensityData.from_counts(counts)
        out_spec = np.fft.fft2(project_magnitude(f, data).values)
        energy = np.sum(np.abs(out_spec[data.measured]) ** 2)
        expected = counts[data.measured].sum()
        assert abs(energy - expected) / expected < 1e-10

    def test_idempotent_on_measured_moduli(self, rng):
        f = random_field(rng, (8, 8))
        counts = rng.random((8, 8)) * 2
        data = IntensityData.from_counts(counts)
        once = project_magnitude(f, data)
        twice = project_magnitude(once, data)
        assert np.max(np.abs(twice.values - once.values)) < 1e-10

    def test_shape_mismatch(self, rng):
        f = random_field(rng, (8, 8))
        data = IntensityData.from_counts(np.ones((4, 4)))
        with pytest.raises(ShapeMismatchError):
            project_magnitude(f, data)


class TestProjectSupport:
    def test_fixed_point_inside(self, rng):
        support = centered_square_support((8, 8), 4)
        f = ComplexField(np.where(support.mask, rng.normal(size=(8, 8)) + 0j, 0))
        out = project_support(f, support)
        assert np.array_equal(out.values, f.values)

    def test_idempotent_exactly(self, rng):
        support = centered_square_support((8, 8), 3)
        f = random_field(rng, (8, 8))
        once = project_support(f, support)
        twice = project_support(once, support)
        assert np.array_equal(once.values, twice.values)

    def test_energy_outside_is_zero(self, rng):
        mask = rng.random((8, 8)) > 0.5
        mask[0, 0], mask[1, 1] = True, False
        support = SupportMask(mask)
        out = project_support(random_field(rng, (8, 8)), support)
        assert np.sum(np.abs(out.values[~mask]) ** 2) == 0.0


class TestReflections:
    def test_reflect_fixed_point(self, rng):
        support = centered_square_support((8, 8), 4)
        f = project_support(random_field(rng, (8, 8)), support)
        out = reflect(project_support(f, support), f)
        assert np.max(np.abs(out.values - f.values)) < 1e-14

    def test_reflect_is_involution_for_support(self, rng):
        support = centered_square_support((8, 8), 4)
        f = random_field(rng, (8, 8))
        r1 = reflect(project_support(f, support), f)
        r2 = reflect(project_support(r1, support), r1)
        assert np.max(np.abs(r2.values - f.values)) < 1e-13

    def test_reflect_formula(self, rng):
        f = random_field(rng, (8, 8))
        support = centered_square_support((8, 8), 4)
        p = project_support(f, support)
        out = reflect(p, f)
        assert np.max(np.abs(out.values - (2 * p.values - f.values))) < 1e-14

    def test_relaxed_gamma_one_is_reflect(self, rng):
        f = random_field(rng, (6, 6))
        support = centered_square_support((6, 6), 3)
        p = project_support(f, support)
        assert np.array_equal(relaxed_reflect(p, f, 1.0).values, reflect(p, f).values)

    def test_relaxed_gamma_zero_is_projection(self, rng):
        f = random_field(rng, (6, 6))
        support = centered_square_support((6, 6), 3)
        p = project_support(f, support)
        assert np.array_equal(relaxed_reflect(p, f, 0.0).values, p.values)

    def test_relaxed_formula(self, rng):
        f = random_field(rng, (6, 6))
        support = centered_square_support((6, 6), 3)
        p = project_support(f, support)
        gamma = 2.5
        out = relaxed_reflect(p, f, gamma)
        assert np.max(np.abs(out.values - ((1 + gamma) * p.values - gamma * f.values))) < 1e-14

    def test_relaxed_rejects_non_finite_gamma(self, rng):
        f = random_field(rng, (6, 6))
        support = centered_square_support((6, 6), 3)
        with pytest.raises(InvalidFieldError):
            relaxed_reflect(project_support(f, support), f, np.inf)
