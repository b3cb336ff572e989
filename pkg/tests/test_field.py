"""Transform contract: conventions, Parseval, linearity, round trips."""

import numpy as np
import pytest

from cgraar import ComplexField, Spectrum, dft_forward, dft_inverse
from cgraar.errors import InvalidFieldError


def brute_force_dft(values):
    """Direct O(N^4) unnormalized DFT, independent of any FFT library."""
    h, w = values.shape
    out = np.zeros((h, w), dtype=complex)
    for ky in range(h):
        for kx in range(w):
            acc = 0.0 + 0.0j
            for y in range(h):
                for x in range(w):
                    acc += values[y, x] * np.exp(-2j * np.pi * (ky * y / h + kx * x / w))
            out[ky, kx] = acc
    return out


def random_field(rng, shape, dx=1.0, dy=1.0):
    values = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return ComplexField(values, dx=dx, dy=dy)


class TestConstruction:
    def test_rejects_non_finite(self):
        bad = np.ones((4, 4), dtype=complex)
        bad[1, 2] = np.nan
        with pytest.raises(InvalidFieldError):
            ComplexField(bad)

    def test_rejects_tiny_and_1d(self):
        with pytest.raises(InvalidFieldError):
            ComplexField(np.ones((1, 5), dtype=complex))
        with pytest.raises(InvalidFieldError):
            ComplexField(np.ones(16, dtype=complex))

    def test_rejects_bad_spacing(self):
        with pytest.raises(InvalidFieldError):
            ComplexField(np.ones((4, 4)), dx=0.0)
        with pytest.raises(InvalidFieldError):
            ComplexField(np.ones((4, 4)), dy=-1.0)

    def test_values_frozen(self):
        f = ComplexField(np.ones((4, 4)))
        with pytest.raises(ValueError):
            f.values[0, 0] = 2.0

    def test_width_height_row_major(self):
        f = ComplexField(np.ones((3, 5)))
        assert f.height == 3 and f.width == 5 and f.shape == (3, 5)


class TestForward:
    def test_constant_field_is_dc_only(self):
        c = 1.7 - 0.3j
        f = ComplexField(np.full((6, 4), c))
        spec = dft_forward(f)
        assert spec.values[0, 0] == pytest.approx(c * 24, rel=1e-13)
        off_dc = spec.values.copy()
        off_dc[0, 0] = 0
        assert np.abs(off_dc).max() < 1e-12 * abs(c) * 24

    def test_delta_gives_flat_spectrum(self):
        values = np.zeros((5, 7), dtype=complex)
        values[0, 0] = 1.0
        spec = dft_forward(ComplexField(values))
        assert np.allclose(spec.values, 1.0, atol=1e-14)

    def test_against_brute_force_dft(self):
        rng = np.random.default_rng(11)
        f = random_field(rng, (8, 8))
        expected = brute_force_dft(f.values)
        got = dft_forward(f).values
        assert np.max(np.abs(got - expected)) / np.max(np.abs(expected)) < 1e-12

    def test_parseval_8x8(self):
        rng = np.random.default_rng(3)
        f = random_field(rng, (8, 8))
        spec = dft_forward(f)
        lhs = np.sum(np.abs(f.values) ** 2)
        rhs = np.sum(np.abs(spec.values) ** 2) / 64
        assert abs(lhs - rhs) / lhs < 1e-12

    @pytest.mark.parametrize("seed", range(10))
    def test_parseval_random_shapes(self, seed):
        rng = np.random.default_rng(100 + seed)
        shape = (int(rng.integers(2, 33)), int(rng.integers(2, 33)))
        f = random_field(rng, shape)
        spec = dft_forward(f)
        lhs = np.sum(np.abs(f.values) ** 2)
        rhs = np.sum(np.abs(spec.values) ** 2) / (shape[0] * shape[1])
        assert abs(lhs - rhs) / lhs < 1e-12

    def test_linearity(self):
        rng = np.random.default_rng(7)
        f1 = random_field(rng, (9, 5))
        f2 = random_field(rng, (9, 5))
        a, b = 1.3 - 0.2j, -0.7 + 2.1j
        combo = ComplexField(a * f1.values + b * f2.values)
        lhs = dft_forward(combo).values
        rhs = a * dft_forward(f1).values + b * dft_forward(f2).values
        assert np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)) < 1e-12


class TestInverse:
    def test_round_trip_16x16(self):
        rng = np.random.default_rng(5)
        f = random_field(rng, (16, 16))
        back = dft_inverse(dft_forward(f))
        assert np.max(np.abs(back.values - f.values)) / np.max(np.abs(f.values)) < 1e-12

    def test_flat_spectrum_gives_delta(self):
        spec = Spectrum(np.ones((6, 6), dtype=complex))
        f = dft_inverse(spec)
        assert f.values[0, 0] == pytest.approx(1.0, rel=1e-13)
        rest = f.values.copy()
        rest[0, 0] = 0
        assert np.abs(rest).max() < 1e-13

    def test_single_coefficient_gives_exponential(self):
        # analytic single-mode inverse: coef/(W*H) * exp(2i*pi*(m*x/W + n*y/H))
        h, w, m, n = 8, 6, 2, 3
        coef = 2.0 - 1.5j
        values = np.zeros((h, w), dtype=complex)
        values[n, m] = coef
        f = dft_inverse(Spectrum(values))
        y, x = np.mgrid[0:h, 0:w]
        expected = coef / (w * h) * np.exp(2j * np.pi * (m * x / w + n * y / h))
        assert np.max(np.abs(f.values - expected)) < 1e-14
        assert np.allclose(np.abs(f.values), abs(coef) / (w * h), atol=1e-14)

    def test_rejects_non_finite(self):
        bad = np.ones((4, 4), dtype=complex)
        bad[0, 0] = np.inf
        with pytest.raises(InvalidFieldError):
            Spectrum(bad)

    def test_spacings_carried_through(self):
        f = ComplexField(np.ones((4, 4)), dx=0.5, dy=2.0)
        spec = dft_forward(f)
        assert spec.dx == 0.5 and spec.dy == 2.0
        back = dft_inverse(spec)
        assert back.dx == 0.5 and back.dy == 2.0
