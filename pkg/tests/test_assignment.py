import numpy as np
import pytest

from setmatch.assignment import (
    Assignment,
    brute_force_oracle,
    pad_to_square,
    solve_exact,
    solve_relaxed,
)
from setmatch.errors import InputError

from util import assert_assignment_valid, golden_weights, random_weights


class TestSolveExact:
    def test_golden_instance(self):
        a = solve_exact(golden_weights())
        assert a.objective == pytest.approx(16.05, abs=0.01)
        assert set(a.pairs) == {(0, 2), (1, 1), (2, 4), (3, 0)}

    def test_single_positive_entry(self):
        a = solve_exact([[2.5]])
        assert a.objective == 2.5
        assert a.pairs == ((0, 0),)

    def test_all_zero_matrix(self):
        a = solve_exact(np.zeros((3, 4)))
        assert a.objective == 0.0
        assert a.pairs == ()

    def test_two_by_two(self):
        # brute force over both permutations: 3+4 beats 1+2
        a = solve_exact([[3.0, 1.0], [2.0, 4.0]])
        assert a.objective == pytest.approx(7.0)
        assert set(a.pairs) == {(0, 0), (1, 1)}

    def test_rejects_negative_entries(self):
        with pytest.raises(InputError):
            solve_exact([[1.0, -0.1]])

    def test_rejects_non_finite(self):
        with pytest.raises(InputError):
            solve_exact([[np.nan, 1.0]])
        with pytest.raises(InputError):
            solve_exact([[np.inf]])

    def test_rejects_bad_shapes(self):
        with pytest.raises(InputError):
            solve_exact([1.0, 2.0])
        with pytest.raises(InputError):
            solve_exact(np.zeros((0, 3)))


class TestSolveRelaxed:
    def test_golden_instance(self):
        a = solve_relaxed(golden_weights())
        assert a.objective == pytest.approx(16.90, abs=0.01)
        assert set(a.pairs) == {(0, 1), (1, 1), (2, 1), (3, 0)}

    def test_all_zero_matrix(self):
        a = solve_relaxed(np.zeros((2, 5)))
        assert a.objective == 0.0
        assert a.pairs == ()

    def test_tall_matrix_column_argmax_with_ties(self):
        # rows >= cols: per-column argmax, lowest row index wins ties
        a = solve_relaxed([[1.0, 0.0], [0.0, 2.0], [1.0, 2.0]])
        assert set(a.pairs) == {(0, 0), (1, 1)}
        assert a.objective == pytest.approx(3.0)

    def test_rows_may_repeat_when_tall(self):
        a = solve_relaxed([[5.0, 4.0], [1.0, 1.0], [1.0, 1.0]])
        assert set(a.pairs) == {(0, 0), (0, 1)}
        assert a.objective == pytest.approx(9.0)

    def test_rejects_negative_entries(self):
        with pytest.raises(InputError):
            solve_relaxed([[-1.0]])


class TestBruteForceOracle:
    def test_two_by_two(self):
        assert brute_force_oracle([[3.0, 1.0], [2.0, 4.0]]).objective == pytest.approx(7.0)

    def test_zero_scalar(self):
        a = brute_force_oracle([[0.0]])
        assert a.objective == 0.0
        assert a.pairs == ()

    def test_golden_instance(self):
        assert brute_force_oracle(golden_weights()).objective == pytest.approx(16.05, abs=0.01)

    def test_refuses_large_matrices(self):
        with pytest.raises(InputError):
            brute_force_oracle(np.ones((9, 2)))
        with pytest.raises(InputError):
            brute_force_oracle(np.ones((2, 9)))


class TestPadToSquare:
    def test_pads_rows(self):
        w = np.arange(6, dtype=float).reshape(2, 3)
        padded = pad_to_square(w)
        assert padded.shape == (3, 3)
        np.testing.assert_array_equal(padded[:2], w)
        np.testing.assert_array_equal(padded[2], np.zeros(3))

    def test_square_is_identity(self):
        w = np.ones((3, 3))
        np.testing.assert_array_equal(pad_to_square(w), w)

    def test_padding_preserves_exact_objective(self):
        w = golden_weights()
        padded = pad_to_square(w)
        assert padded.shape == (5, 5)
        assert solve_exact(padded).objective == pytest.approx(
            solve_exact(w).objective, abs=1e-12
        )


class TestProperties:
    def test_relaxed_upper_bounds_exact(self):
        rng = np.random.default_rng(7)
        strict = 0
        for _ in range(300):
            w = random_weights(rng, max_rows=7, max_cols=7)
            exact = solve_exact(w)
            relaxed = solve_relaxed(w)
            assert relaxed.objective >= exact.objective - 1e-9
            strict += relaxed.objective > exact.objective + 1e-9
        assert strict > 0

    def test_exact_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            w = random_weights(rng, max_rows=6, max_cols=6)
            assert solve_exact(w).objective == pytest.approx(
                brute_force_oracle(w).objective, abs=1e-9
            )

    def test_multiplicity_and_objective_recompute(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            w = random_weights(rng, max_rows=8, max_cols=8)
            assert_assignment_valid(solve_exact(w), w, "exact")
            assert_assignment_valid(solve_relaxed(w), w, "relaxed")

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            w = random_weights(rng, max_rows=7, max_cols=7, zero_fraction=0.0)
            base = solve_exact(w).objective
            perm = rng.permutation(w.shape[0])
            assert solve_exact(w[perm]).objective == pytest.approx(base, abs=1e-9)

    def test_assignment_is_immutable(self):
        a = solve_exact([[1.0]])
        assert isinstance(a, Assignment)
        with pytest.raises(AttributeError):
            a.objective = 0.0


@pytest.mark.parametrize("shape", [(1, 1), (5, 3), (3, 5), (6, 6)])
def test_scipy_cross_check(shape):
    scipy_opt = pytest.importorskip("scipy.optimize")
    rng = np.random.default_rng(sum(shape))
    for _ in range(50):
        w = np.maximum(rng.normal(size=shape), 0.0)
        ri, ci = scipy_opt.linear_sum_assignment(w, maximize=True)
        assert solve_exact(w).objective == pytest.approx(float(w[ri, ci].sum()), abs=1e-9)
