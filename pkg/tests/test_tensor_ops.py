"""Tensor algebra tests.

The block-circulant matrix form is the independent oracle here: the t-product
must agree with plain matrix multiplication of the bcirc forms, and the
closed-form spectrum of (R, G, G, B) tubes pins the mode-3 DFT convention.
"""

import numpy as np
import pytest

from greenprior import (
    bcirc,
    fft_mode3,
    fold,
    ifft_mode3,
    t_identity,
    tprod,
    tsvd,
    ttranspose,
    unfold,
)


def rand(shape, seed):
    return np.random.default_rng(seed).standard_normal(shape)


class TestBcirc:
    def test_single_slice_degenerates_to_the_slice(self):
        t = rand((3, 2, 1), 0)
        assert np.array_equal(bcirc(t), t[:, :, 0])

    def test_first_block_column_stacks_slices_in_order(self):
        t = rand((2, 2, 3), 1)
        m = bcirc(t)
        for i in range(3):
            assert np.array_equal(m[2 * i : 2 * i + 2, 0:2], t[:, :, i])

    def test_block_layout_is_cyclic(self):
        t = rand((2, 3, 4), 2)
        m = bcirc(t)
        for i in range(4):
            for j in range(4):
                block = m[2 * i : 2 * (i + 1), 3 * j : 3 * (j + 1)]
                assert np.array_equal(block, t[:, :, (i - j) % 4])

    def test_unfold_fold_round_trip(self):
        t = rand((3, 4, 5), 3)
        assert np.array_equal(fold(unfold(t), 5), t)


class TestTprod:
    def test_matches_bcirc_matrix_product(self):
        a = rand((2, 3, 4), 4)
        b = rand((3, 2, 4), 5)
        c = tprod(a, b)
        ref = bcirc(a) @ bcirc(b)
        assert np.abs(bcirc(c) - ref).max() < 1e-10 * max(1.0, np.abs(ref).max())
        # and the unfold identity: bcirc(a) @ unfold(b) == unfold(a * b)
        assert np.abs(bcirc(a) @ unfold(b) - unfold(c)).max() < 1e-10

    def test_identity_element(self):
        a = rand((3, 3, 4), 6)
        assert np.abs(tprod(a, t_identity(3, 4)) - a).max() < 1e-12

    def test_single_slice_is_matrix_product(self):
        a = rand((4, 3, 1), 7)
        b = rand((3, 2, 1), 8)
        assert np.abs(tprod(a, b)[:, :, 0] - a[:, :, 0] @ b[:, :, 0]).max() < 1e-12

    def test_shape_mismatch_raises(self):
        with pytest.raises(ValueError):
            tprod(rand((2, 3, 4), 0), rand((2, 2, 4), 1))
        with pytest.raises(ValueError):
            tprod(rand((2, 3, 4), 0), rand((3, 2, 3), 1))

    def test_homomorphism_over_many_random_pairs(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            n1, n2, n3, n4 = rng.integers(1, 6, size=4)
            a = rng.standard_normal((n1, n2, n3))
            b = rng.standard_normal((n2, n4, n3))
            lhs = bcirc(tprod(a, b))
            rhs = bcirc(a) @ bcirc(b)
            assert np.abs(lhs - rhs).max() < 1e-10 * max(1.0, np.abs(rhs).max())


class TestFFTMode3:
    def test_constant_tube_concentrates_in_slice_zero(self):
        t = np.full((1, 1, 4), 7.5)
        spec = fft_mode3(t, unitary=False).ravel()
        assert np.allclose(spec, [30.0, 0.0, 0.0, 0.0], atol=1e-12)

    def test_unit_red_tube_is_flat(self):
        t = np.zeros((1, 1, 4))
        t[0, 0, 0] = 1.0  # (R, G, G, B) = (1, 0, 0, 0)
        spec = fft_mode3(t, unitary=False).ravel()
        assert np.allclose(spec, [1.0, 1.0, 1.0, 1.0], atol=1e-12)

    def test_rggb_tube_closed_form(self):
        rng = np.random.default_rng(10)
        for _ in range(200):
            r, g, b = rng.standard_normal(3)
            tube = np.array([r, g, g, b]).reshape(1, 1, 4)
            spec = fft_mode3(tube, unitary=False).ravel()
            expected = np.array(
                [
                    r + 2 * g + b,
                    (r - g) + (b - g) * 1j,
                    r - b,
                    (r - g) + (g - b) * 1j,
                ]
            )
            assert np.abs(spec - expected).max() < 1e-12
            # unitary result is the same divided by sqrt(4)
            assert np.abs(fft_mode3(tube).ravel() - expected / 2.0).max() < 1e-12

    def test_real_input_conjugate_symmetry(self):
        t = rand((3, 3, 4), 11)
        spec = fft_mode3(t)
        assert np.abs(spec[:, :, 1] - np.conj(spec[:, :, 3])).max() < 1e-14

    def test_round_trip_and_parseval(self):
        t = rand((4, 5, 6), 12)
        spec = fft_mode3(t)
        assert np.abs(ifft_mode3(spec) - t).max() < 1e-12
        assert abs(np.linalg.norm(spec) - np.linalg.norm(t)) < 1e-12


class TestTsvd:
    def test_identity_tensor(self):
        eye = t_identity(3, 4)
        u, s, v = tsvd(eye)
        assert np.abs(u - eye).max() < 1e-12
        assert np.abs(s - eye).max() < 1e-12
        assert np.abs(v - eye).max() < 1e-12

    def test_zero_tensor_has_zero_coefficients(self):
        u, s, v = tsvd(np.zeros((3, 4, 2)))
        assert np.abs(s).max() == 0.0

    def test_reconstruction_and_orthogonality(self):
        a = rand((8, 8, 4), 13)
        u, s, v = tsvd(a)
        rec = tprod(tprod(u, s), ttranspose(v))
        assert np.abs(rec - a).max() < 1e-10 * np.abs(a).max()
        eye = t_identity(8, 4)
        assert np.abs(tprod(ttranspose(u), u) - eye).max() < 1e-10
        assert np.abs(tprod(ttranspose(v), v) - eye).max() < 1e-10

    def test_rectangular_shapes(self):
        for shape, seed in (((5, 3, 4), 14), ((3, 6, 3), 15)):
            a = rand(shape, seed)
            u, s, v = tsvd(a)
            rec = tprod(tprod(u, s), ttranspose(v))
            assert np.abs(rec - a).max() < 1e-10

    def test_deterministic_over_repeat_runs(self):
        a = rand((6, 6, 4), 16)
        u1, s1, v1 = tsvd(a)
        u2, s2, v2 = tsvd(a)
        assert np.array_equal(u1, u2)
        assert np.array_equal(s1, s2)
        assert np.array_equal(v1, v2)

    def test_factors_are_real_for_real_input(self):
        u, s, v = tsvd(rand((4, 4, 5), 17))
        for t in (u, s, v):
            assert not np.iscomplexobj(t)
