import math

import numpy as np
import pytest

from relugp.errors import AllCellsFailed
from relugp.experiments import DESIGN_PAIR, run_simulation
from relugp.kernel import HyperPair
from relugp.search import HyperGrid, LikelihoodSurface, evaluate_surface, recommend


def grid2x2():
    return HyperGrid((1.0, 2.0), (0.0, 0.5))


def toy_data(seed=0, n=20):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.1, 1.0, (n, 3))
    return X, np.sin(X.sum(axis=1))


@pytest.mark.parametrize("w, b", [((), (0.0,)), ((1.0, 1.0), (0.0,)), ((2.0, 1.0), (0.0,)),
                                  ((1.0,), (-0.1,)), ((math.inf,), (0.0,))])
def test_grid_validation(w, b):
    with pytest.raises(ValueError):
        HyperGrid(w, b)


def test_grid_cells_row_major():
    cells = [(i, j, hp.as_tuple()) for i, j, hp in grid2x2().cells()]
    assert cells == [(0, 0, (1.0, 0.0)), (0, 1, (1.0, 0.5)), (1, 0, (2.0, 0.0)), (1, 1, (2.0, 0.5))]


def test_default_grids():
    assert HyperGrid.mnist().shape == (5, 3)
    assert HyperGrid.simulation().sigma_b_sq_values == (0.0001, 0.01, 0.02)


def test_one_by_one_grid():
    X, y = toy_data()
    s = evaluate_surface(X, y, HyperGrid((1.5,), (0.2,)), 1e-2)
    assert s.argmax == s.argmin == HyperPair(1.5, 0.2)


def test_recommend_picks_largest_cell():
    s = LikelihoodSurface(grid2x2(), [[1.0, 2.0], [3.0, 0.0]])
    assert s.argmax_index == (1, 0)
    assert recommend(s) == HyperPair(2.0, 0.0)
    assert s.argmin == HyperPair(2.0, 0.5)


def test_ties_break_to_lowest_row_major_index():
    s = LikelihoodSurface(grid2x2(), [[1.0, 5.0], [5.0, 5.0]])
    assert s.argmax_index == (0, 1)
    s = LikelihoodSurface(grid2x2(), [[0.0, 5.0], [0.0, 5.0]])
    assert s.argmin_index == (0, 0)


def test_argmax_invariant_to_constant_shift():
    rng = np.random.default_rng(1)
    vals = rng.standard_normal((5, 3))
    g = HyperGrid.mnist()
    for c in (-1e3, 0.5, 1e4):
        assert LikelihoodSurface(g, vals + c).argmax_index == LikelihoodSurface(g, vals).argmax_index


def test_failed_cells_are_skipped_and_recorded():
    X, y = toy_data()
    X[4] = 0.0  # zero input makes every sigma_b^2 = 0 cell degenerate
    s = evaluate_surface(X, y, grid2x2(), 1e-2)
    assert set(s.failures) == {(0, 0), (1, 0)}
    assert np.isnan(s.values[0, 0]) and np.isfinite(s.values[0, 1])
    assert s.argmax.sigma_b_sq == 0.5
    d = s.to_dict()
    assert d["log_ml"][0][0] is None
    assert LikelihoodSurface.from_dict(d).argmax == s.argmax


def test_all_cells_failed():
    X, y = toy_data()
    X[0] = 0.0
    with pytest.raises(AllCellsFailed):
        evaluate_surface(X, y, HyperGrid((1.0, 2.0), (0.0,)), 1e-2)


def test_deterministic_and_thread_parallel_identical():
    X, y = toy_data(2, 40)
    g = HyperGrid.mnist()
    a = evaluate_surface(X, y, g, 1e-2)
    b = evaluate_surface(X, y, g, 1e-2)
    c = evaluate_surface(X, y, g, 1e-2, workers=4)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.values, c.values)


def test_permuted_dataset_same_argmax():
    X, y = toy_data(3, 40)
    perm = np.random.default_rng(0).permutation(40)
    g = HyperGrid.mnist()
    a = evaluate_surface(X, y, g, 1e-2)
    b = evaluate_surface(X[perm], y[perm], g, 1e-2)
    assert a.argmax == b.argmax
    np.testing.assert_allclose(a.values, b.values, rtol=1e-10)


def test_simulation_surface_recovers_design_pair():
    res = run_simulation(seed=0)
    assert recommend(res.surface) == DESIGN_PAIR


def test_target_length_mismatch():
    X, y = toy_data()
    with pytest.raises(ValueError):
        evaluate_surface(X, y[:-1], grid2x2(), 1e-2)
