import numpy as np
import pytest
from numpy.testing import assert_allclose

from signocut.dcc import ConvexityClass, Sense, classify, dcc_form, normalize, reduce_and_split
from signocut.model import ExponentVector, eval_term

from conftest import nonconvexity_witnesses, random_exponent_vector, random_form


class TestReduceAndSplit:
    def test_hypograph_with_mixed_signs(self):
        # t <= x1^{-2} x2^2  rewrites to  t x1^2 <= x2^2
        beta_raw, u_idx, gamma_raw, v_idx = reduce_and_split(
            ExponentVector.from_dense([-2.0, 2.0]), Sense.HYPO, t_index=2
        )
        assert_allclose(beta_raw, [1.0, 2.0])
        assert u_idx == (2, 0)
        assert_allclose(gamma_raw, [2.0])
        assert v_idx == (1,)

    def test_epigraph_swaps_sides(self):
        # t >= x1^3 x2  rewrites to  x1^3 x2 <= t
        beta_raw, u_idx, gamma_raw, v_idx = reduce_and_split(
            ExponentVector.from_dense([3.0, 1.0]), Sense.EPI, t_index=2
        )
        assert_allclose(beta_raw, [3.0, 1.0])
        assert u_idx == (0, 1)
        assert_allclose(gamma_raw, [1.0])
        assert v_idx == (2,)

    def test_linear_epigraph(self):
        beta_raw, u_idx, gamma_raw, v_idx = reduce_and_split(
            ExponentVector.from_dense([1.0]), Sense.EPI, t_index=1
        )
        assert_allclose(beta_raw, [1.0])
        assert u_idx == (0,)
        assert_allclose(gamma_raw, [1.0])
        assert v_idx == (1,)

    def test_all_negative_epigraph_has_empty_beta(self):
        beta_raw, u_idx, gamma_raw, v_idx = reduce_and_split(
            ExponentVector.from_dense([-1.5]), Sense.EPI, t_index=1
        )
        assert beta_raw.size == 0 and u_idx == ()
        assert_allclose(gamma_raw, [1.0, 1.5])
        assert v_idx == (1, 0)


class TestNormalize:
    def test_example_hypograph_scaling(self):
        form = dcc_form(ExponentVector.from_dense([-2.0, 2.0]), Sense.HYPO, 2)
        assert form.eta == pytest.approx(1.0 / 3.0)
        assert_allclose(form.beta, [1.0 / 3.0, 2.0 / 3.0])
        assert_allclose(form.gamma, [2.0 / 3.0])

    def test_example_epigraph_scaling(self):
        form = dcc_form(ExponentVector.from_dense([3.0, 1.0]), Sense.EPI, 2)
        assert form.eta == pytest.approx(0.25)
        assert_allclose(form.beta, [0.75, 0.25])
        assert_allclose(form.gamma, [0.25])

    def test_already_normalized(self):
        form = dcc_form(ExponentVector.from_dense([1.0]), Sense.EPI, 1)
        assert form.eta == 1.0
        assert_allclose(form.beta, [1.0])
        assert_allclose(form.gamma, [1.0])

    def test_idempotence(self, rng):
        for _ in range(50):
            form = random_form(rng)
            again = normalize(form.beta, form.u_index, form.gamma, form.v_index,
                              form.sense, form.t_index)
            assert_allclose(again.beta, form.beta, rtol=0, atol=1e-15)
            assert_allclose(again.gamma, form.gamma, rtol=0, atol=1e-15)

    def test_normalization_invariant(self, rng):
        for _ in range(100):
            form = random_form(rng)
            assert form.is_normalized()


class TestMembershipEquivalence:
    def test_roundtrip_on_graph_points(self, rng):
        # points with t = x**alpha land exactly on the reformulated boundary
        for _ in range(100):
            n_neg = int(rng.integers(0, 3))
            n_pos = int(rng.integers(1, 3))
            alpha = random_exponent_vector(rng, n_neg, n_pos)
            sense = Sense.HYPO if rng.random() < 0.5 else Sense.EPI
            n = n_neg + n_pos
            form = dcc_form(alpha, sense, n)
            x = rng.uniform(0.2, 3.0, n)
            z = np.concatenate([x, [float(eval_term(alpha, x))]])
            assert abs(float(form.residual(z))) <= 1e-9 * max(1.0, float(form.psi_u(z)))

    def test_side_equivalence_random_points(self, rng):
        for _ in range(20):
            n_neg = int(rng.integers(0, 3))
            n_pos = int(rng.integers(1, 3))
            alpha = random_exponent_vector(rng, n_neg, n_pos)
            sense = Sense.HYPO if rng.random() < 0.5 else Sense.EPI
            n = n_neg + n_pos
            form = dcc_form(alpha, sense, n)
            pts = rng.uniform(0.1, 4.0, size=(50, n + 1))
            g = np.array([float(eval_term(alpha, p[:n])) for p in pts])
            t = pts[:, n]
            in_set = t <= g if sense is Sense.HYPO else t >= g
            resid = form.residual(pts)
            margin = 1e-9 * np.maximum(1.0, np.abs(g))
            clear = np.abs(t - g) > margin
            assert np.array_equal(in_set[clear], (resid <= 0.0)[clear])


class TestClassify:
    def test_nonconvex_pattern(self):
        form = dcc_form(ExponentVector.from_dense([3.0, 1.0]), Sense.EPI, 2)
        assert classify(form) is ConvexityClass.NONCONVEX

    def test_convex_pattern(self):
        form = normalize(np.array([1.0]), (0,), np.array([0.5, 0.5]), (1, 2), Sense.HYPO, 0)
        assert classify(form) is ConvexityClass.CONVEX

    def test_reverse_convex_pattern(self):
        form = normalize(np.array([0.5, 0.5]), (0, 1), np.array([1.0]), (2,), Sense.HYPO, 2)
        assert classify(form) is ConvexityClass.REVERSE_CONVEX

    def test_empty_gamma_is_reverse_convex(self):
        form = dcc_form(ExponentVector.from_dense([-1.0, -1.0]), Sense.HYPO, 2)
        assert form.ell == 0
        assert classify(form) is ConvexityClass.REVERSE_CONVEX

    def test_empty_beta_is_convex(self):
        form = dcc_form(ExponentVector.from_dense([-1.0, -1.0]), Sense.EPI, 2)
        assert form.h == 0
        assert classify(form) is ConvexityClass.CONVEX

    def test_nonconvex_shows_indefinite_curvature(self, rng):
        # the NONCONVEX label must match witnessed boundary curvature in
        # both directions
        form = dcc_form(ExponentVector.from_dense([3.0, 1.0]), Sense.EPI, 2)
        set_pair, rev_pair = nonconvexity_witnesses(form, rng)
        assert float(form.residual(0.5 * (set_pair[0] + set_pair[1]))) > 1e-9
        assert float(form.residual(0.5 * (rev_pair[0] + rev_pair[1]))) < -1e-9
