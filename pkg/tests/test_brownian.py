import numpy as np
import pytest
from scipy import stats

from stochch.brownian import BrownianPath, keyed_normals


def test_keyed_normals_are_a_pure_function():
    a = keyed_normals(42, 3, 0, 100)
    b = keyed_normals(42, 3, 0, 100)
    assert np.array_equal(a, b)
    # a longer draw extends the shorter one
    assert np.array_equal(keyed_normals(42, 3, 0, 250)[:100], a)


def test_streams_differ():
    base = keyed_normals(42, 3, 0, 64)
    for other in (keyed_normals(43, 3, 0, 64), keyed_normals(42, 4, 0, 64), keyed_normals(42, 3, 1, 64)):
        assert not np.any(base == other)


def test_keyed_normals_distribution():
    z = keyed_normals(7, 0, 0, 200_000)
    assert abs(z.mean()) < 5 / np.sqrt(z.size)
    assert abs(z.var() - 1) < 0.01
    assert stats.kstest(z, "norm").pvalue > 1e-3
    assert np.all(np.isfinite(z))


def test_zero_count():
    assert keyed_normals(1, 1, 0, 0).size == 0


def test_bridge_refinement_preserves_coarse_path():
    bp = BrownianPath(5, 2, 1.0, 16)
    w0 = bp.values(0)
    for level in (1, 2, 5):
        w = bp.values(level)
        assert w.size == 16 * 2**level + 1
        assert np.max(np.abs(w[:: 2**level] - w0)) < 1e-14


def test_refinement_independent_of_evaluation_order():
    a = BrownianPath(11, 0, 2.0, 8)
    fine_first = np.array(a.increments(4))
    b = BrownianPath(11, 0, 2.0, 8)
    b.increments(1)
    b.increments(2)
    assert np.array_equal(fine_first, b.increments(4))


def test_increments_are_read_only():
    inc = BrownianPath(0, 0, 1.0, 4).increments(2)
    with pytest.raises(ValueError):
        inc[0] = 1.0


def test_increment_variance_at_each_level():
    # pool many paths: Var(dW) = dt at every level, increments uncorrelated
    t_end, base = 1.0, 4
    for level in (0, 3):
        dt = t_end / (base * 2**level)
        inc = np.array([BrownianPath(3, p, t_end, base).increments(level) for p in range(2000)])
        assert inc.var() / dt == pytest.approx(1.0, abs=0.05 if level else 0.08)
        c = np.corrcoef(inc[:, 0], inc[:, 1])[0, 1]
        assert abs(c) < 0.1


def test_terminal_value_law():
    w1 = np.array([BrownianPath(9, p, 2.0, 1).values(6)[-1] for p in range(3000)])
    assert stats.kstest(w1 / np.sqrt(2.0), "norm").pvalue > 1e-3


def test_invalid_arguments():
    with pytest.raises(ValueError):
        BrownianPath(0, 0, 1.0, 0)
    with pytest.raises(ValueError):
        BrownianPath(0, 0, 1.0, 4).increments(-1)
