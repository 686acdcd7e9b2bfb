import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from conftest import connected_block
from graphonwalk import formats
from graphonwalk.core import degree_function, lp_norm
from graphonwalk.discretization import (
    GridField,
    Partition,
    StepFunction,
    WeightedGraph,
    average_initial_condition,
    cell_average,
    quotient_graph,
    refine_to_grid,
    sampled_graph,
    step_graphon,
    step_kernel_grid,
)
from graphonwalk.errors import ConfigError, IncompatibleResolution, RangeError
from graphonwalk.graphons import Block, Constant, Separable, Stripe, Threshold


def test_partition_cells():
    P = Partition(4)
    assert np.allclose(P.edges, [0, 0.25, 0.5, 0.75, 1])
    assert list(P.cell([0.0, 0.2499, 0.25, 0.99, 1.0])) == [0, 0, 1, 3, 3]
    with pytest.raises(ValueError):
        Partition(0)


def test_weighted_graph_validation():
    with pytest.raises(RangeError):
        WeightedGraph([[0, 2], [2, 0]])
    with pytest.raises(ValueError):
        WeightedGraph([[0, 1], [0, 0]])
    with pytest.raises(ValueError):
        WeightedGraph([[0, 1, 0]])
    G = WeightedGraph([[0, 0.5], [0.5, 1]])
    assert np.allclose(G.strengths, [0.5, 1.5])
    with pytest.raises(ValueError):
        G.A[0, 0] = 1.0


# quotient graph


def test_quotient_constant():
    assert np.all(quotient_graph(Constant(0.3), 5).A == 0.3)


@pytest.mark.parametrize("n", [2, 3, 7])
def test_quotient_separable_exact(n):
    # xy is bilinear, so midpoint sub-quadrature is exact
    c = (2 * np.arange(1, n + 1) - 1) / (2 * n)
    assert np.allclose(quotient_graph(Separable(), n).A, np.outer(c, c), atol=1e-15)


def test_quotient_stripe_triangle():
    # oracle: adaptive quadrature of the band indicator over cell pairs
    band = lambda y, x: float(abs(x - y) <= 0.25)  # noqa: E731
    area12, _ = integrate.dblquad(band, 0, 0.25, 0.25, 0.5, epsabs=1e-10)
    area13, _ = integrate.dblquad(band, 0, 0.25, 0.5, 0.75, epsabs=1e-10)
    assert area12 == pytest.approx(1 / 32, abs=1e-6)
    assert area13 == 0.0
    A = quotient_graph(Stripe(0.25), 4, m=256).A
    # adjacent cells meet the band in a triangle of area 1/32; P_1 x P_3 only at a corner
    assert A[0, 1] == pytest.approx(16 * area12, abs=1e-2)
    assert A[0, 2] == 0.0


def test_quotient_is_exact_on_aligned_step_graphons():
    W = Block([[0.9, 0.1, 0.4], [0.1, 0.5, 0.0], [0.4, 0.0, 0.7]])
    A = quotient_graph(W, 6, m=1).A
    assert np.array_equal(A, np.repeat(np.repeat(W.blocks, 2, 0), 2, 1))


@pytest.mark.parametrize("W", [Constant(0.6), Separable(), connected_block()], ids=["constant", "separable", "block"])
def test_quotient_consistency(W):
    N = 512
    ref = W.grid(N)
    dists = [lp_norm(step_kernel_grid(quotient_graph(W, n).A, N) - ref, 2, N) for n in (8, 16, 32, 64)]
    assert all(b <= a + 1e-15 for a, b in zip(dists, dists[1:]))
    # Lipschitz constant of xy is sqrt(2); constant and aligned block are exact
    assert all(d <= np.sqrt(2) / n for d, n in zip(dists, (8, 16, 32, 64)))


def test_quotient_positivity_of_strengths():
    W = Stripe(0.25)
    for n in (8, 16, 32):
        kq = quotient_graph(W, n).strengths / n
        assert kq.min() >= 0.25 - 1e-12


# sampled graph


def test_sampled_examples():
    assert np.allclose(sampled_graph(Separable(), 2).A, [[0.25, 0.5], [0.5, 1.0]])
    assert np.all(sampled_graph(Constant(0.2), 3).A == 0.2)
    A = sampled_graph(Stripe(0.25), 4).A
    i, j = np.indices((4, 4))
    assert np.array_equal(A, (np.abs(i - j) <= 1).astype(float))


def test_sampled_block_lands_inside_cells():
    W = Block([[1.0, 0.2], [0.2, 0.5]])
    A = sampled_graph(W, 4).A
    # i/n = 1/2 belongs to the first cell
    assert A[1, 1] == 1.0 and A[1, 2] == 0.2


def test_sampled_consistency():
    N = 512
    for W in (Stripe(0.25), Separable(), Threshold(2.0)):
        d = [lp_norm(step_kernel_grid(sampled_graph(W, n).A, N) - W.grid(N), 2, N) for n in (8, 16, 32, 64)]
        assert all(b < a for a, b in zip(d, d[1:]))


# step graphon


def test_step_graphon_of_quotient_constant():
    W = step_graphon(quotient_graph(Constant(0.35), 6))
    assert np.allclose(W.grid(30), 0.35)


def test_step_graphon_checkerboard():
    W = step_graphon(WeightedGraph([[0, 1], [1, 0]]))
    assert W(0.1, 0.9) == 1.0 and W(0.1, 0.2) == 0.0
    assert np.allclose(degree_function(W, 64).samples, 0.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_strength_degree_identity(n, r, seed):
    M = np.random.default_rng(seed).random((n, n))
    G = WeightedGraph(0.5 * (M + M.T))
    k = degree_function(step_graphon(G), n * r)
    assert np.allclose(np.repeat(G.strengths, r), n * k.samples, rtol=0, atol=1e-12)


def test_step_graphon_range_error():
    class Raw:
        A = np.array([[0.0, -1.0], [-1.0, 0.0]])

    with pytest.raises(RangeError):
        step_graphon(Raw())


# initial conditions


def test_average_initial_condition_examples():
    assert np.allclose(average_initial_condition(lambda x: np.ones_like(x), 5).values, 1.0)
    assert np.allclose(average_initial_condition(lambda x: x, 2).values, [0.25, 0.75])
    v = average_initial_condition(lambda x: np.cos(2 * np.pi * x), 1, m=64).values
    assert abs(v[0]) < 1e-14


def test_refine_to_grid():
    u = StepFunction([1.0, 3.0])
    f = refine_to_grid(u, 4)
    assert list(f.values) == [1, 1, 3, 3]
    assert f.l2_norm == u.l2_norm
    assert np.all(refine_to_grid(StepFunction([0.0]), 8).values == 0)
    with pytest.raises(IncompatibleResolution):
        refine_to_grid(u, 5)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=16), st.integers(1, 8))
def test_refine_preserves_norm_and_cell_average_inverts(vals, r):
    u = StepFunction(vals)
    f = refine_to_grid(u, u.n * r)
    assert f.l2_norm == pytest.approx(u.l2_norm, rel=1e-12, abs=1e-300)
    assert np.allclose(cell_average(f, u.n).values, u.values)


def test_step_function_evaluation():
    u = StepFunction([1.0, 2.0, 3.0])
    assert list(u(np.array([0.0, 0.34, 0.99, 1.0]))) == [1.0, 2.0, 3.0, 3.0]


def test_grid_field_rejects_nonfinite():
    with pytest.raises(FloatingPointError):
        GridField([1.0, np.nan])


def test_step_kernel_grid_incompatible():
    with pytest.raises(IncompatibleResolution):
        step_kernel_grid(np.eye(3), 8)


# serialization


def test_graph_csv_round_trip_is_bit_exact(tmp_path, rng):
    M = rng.random((7, 7))
    G = WeightedGraph(0.5 * (M + M.T))
    path = tmp_path / "g.csv"
    formats.write_graph(G, path)
    assert path.read_text().splitlines()[0] == "7"
    assert np.array_equal(formats.read_graph(path).A, G.A)


def test_step_function_csv_round_trip(tmp_path, rng):
    u = StepFunction(rng.standard_normal(11) * 1e-7)
    path = tmp_path / "u.csv"
    formats.write_step_function(u, path)
    assert path.read_text().splitlines()[0] == "value"
    assert np.array_equal(formats.read_step_function(path).values, u.values)


def test_graph_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("3\n0,1\n1,0\n")
    with pytest.raises(ConfigError):
        formats.read_graph(p)
    p.write_text("")
    with pytest.raises(ConfigError):
        formats.read_graph(p)
    p.write_text("x\n1\n")
    with pytest.raises(ConfigError):
        formats.read_step_function(p)
