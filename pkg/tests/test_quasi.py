import numpy as np
import pytest

from foldpoint.errors import SingularSystem
from foldpoint.qp import gram, steepest_ascent
from foldpoint.quasi import Kind, QuasiDirection, classify, quasi_direction, solve_bordered


@pytest.mark.parametrize("N", [1, 2, 5])
def test_identity_gram(N):
    qd = solve_bordered(np.eye(N))
    np.testing.assert_allclose(qd.alpha, np.full(N, 1 / N))
    assert qd.delta == pytest.approx(1 / N)


def test_opposite_gradients():
    qd = solve_bordered([[2.0, -2.0], [-2.0, 2.0]])
    np.testing.assert_allclose(qd.alpha, [0.5, 0.5])
    assert qd.delta == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_matches_independent_dense_solve(seed):
    rng = np.random.default_rng(seed)
    Gamma = gram(rng.normal(size=(3, 3)))
    M = np.block([[Gamma, -np.ones((3, 1))], [np.ones((1, 3)), np.zeros((1, 1))]])
    ref = np.linalg.solve(M, np.array([0.0, 0.0, 0.0, 1.0]))
    qd = solve_bordered(Gamma)
    np.testing.assert_allclose(qd.alpha, ref[:3], atol=1e-10)
    assert qd.delta == pytest.approx(ref[3], abs=1e-10)
    assert qd.residual < 1e-10


def test_singular_bordered_system():
    # duplicated gradient rows make the bordered matrix rank deficient
    g = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(SingularSystem):
        solve_bordered(gram(g))


def test_single_row_direction():
    g = np.array([[3.0, 4.0]])
    qd = quasi_direction(g, solve_bordered(gram(g)))
    np.testing.assert_allclose(qd.Y, [3.0, 4.0])
    np.testing.assert_allclose(qd.y, [0.6, 0.8])
    assert qd.delta == pytest.approx(25.0)


def test_opposite_rows_have_no_direction():
    g = np.array([[-1.0, 1.0], [1.0, -1.0]])
    qd = quasi_direction(g, solve_bordered(gram(g)))
    np.testing.assert_allclose(qd.Y, 0.0, atol=1e-15)
    assert qd.y is None


@pytest.mark.parametrize("seed", range(5))
def test_energy_identity_and_equal_projections(seed):
    rng = np.random.default_rng(100 + seed)
    N, n = rng.integers(1, 6), 7
    g = rng.normal(size=(N, n))
    qd = quasi_direction(g, solve_bordered(gram(g)))
    assert qd.delta == pytest.approx(qd.Y @ qd.Y, rel=1e-9)
    # every active gradient has the same projection delta on Y
    np.testing.assert_allclose(g @ qd.Y, qd.delta, rtol=1e-8)


@pytest.mark.parametrize("alpha, delta, kind, neg", [
    ([0.5, 0.5], 0.5, Kind.ALL_POSITIVE, ()),
    ([1.5, -0.5], 0.3, Kind.MIXED, (1,)),
    ([0.5, 0.5], 1e-16, Kind.DELTA_ZERO, ()),
])
def test_classify(alpha, delta, kind, neg):
    c = classify(QuasiDirection(alpha=np.array(alpha), delta=delta), tol=1e-12)
    assert c.kind is kind
    assert c.neg_indices == neg


def test_all_positive_agrees_with_steepest_ascent():
    # two gradients whose hull minimum lies strictly inside the segment
    g = np.array([[1.0, 1.0], [1.0, -1.0]])
    qd = quasi_direction(g, solve_bordered(gram(g)))
    assert classify(qd).kind is Kind.ALL_POSITIVE
    sa = steepest_ascent(g)
    np.testing.assert_allclose(qd.Y, sa.grad_lambda, atol=1e-14)
    assert qd.delta == pytest.approx(sa.sigma_sq)
