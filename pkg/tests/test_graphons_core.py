import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from conftest import builtin_graphons, connected_block, disconnected_block
from graphonwalk.continuum import build_kernel_matrix
from graphonwalk.core import (
    check_degree_bound,
    cut_norm_interval_estimate,
    degree_function,
    is_connected,
    kernel,
    lp_norm,
    operator_product,
)
from graphonwalk.errors import ConfigError, DegreeTooSmall, RangeError
from graphonwalk.graphons import (
    Affine,
    Block,
    Constant,
    Separable,
    Stripe,
    Threshold,
    from_config,
    midpoints,
    parse_graphon,
)


def test_midpoints():
    assert np.allclose(midpoints(4), [0.125, 0.375, 0.625, 0.875])


# degree function


def test_degree_constant_is_exact():
    k = degree_function(Constant(0.5), 100)
    assert np.all(k.samples == 0.5)
    assert k.min_value == 0.5


def test_degree_separable_is_half_x():
    k = degree_function(Separable(), 1000)
    assert np.allclose(k.samples, k.nodes / 2, atol=1e-12)


def test_degree_threshold_matches_closed_form():
    N = 4000
    k = degree_function(Threshold(2.0), N)
    exact = np.sqrt(1 - k.nodes**2)
    # indicator quadrature error is at most one cell per row
    assert np.max(np.abs(k.samples - exact)) <= 1.0 / N


@pytest.mark.parametrize("W", [Stripe(0.25), Constant(0.3), connected_block()], ids=["stripe", "constant", "block"])
def test_degree_samples_agree_with_closed_form(W):
    N = 512
    k = degree_function(W, N)
    assert np.max(np.abs(k.samples - W.closed_degree(k.nodes))) <= 2.0 / N


def test_degree_samples_in_unit_interval():
    for W in builtin_graphons().values():
        k = degree_function(W, 64)
        assert k.samples.min() >= 0.0 and k.samples.max() <= 1.0


@pytest.mark.parametrize("W", [Constant(0.7), Separable(), connected_block()], ids=["constant", "separable", "block"])
def test_degree_quadrature_consistency(W):
    for N in (16, 64, 256):
        a = degree_function(W, N)
        b = degree_function(W, 2 * N)
        fine_on_coarse = b.samples.reshape(N, 2).mean(axis=1)
        assert np.max(np.abs(a.samples - fine_on_coarse)) <= 2.0 / N


def test_degree_rejects_tiny_grid():
    with pytest.raises(ValueError):
        degree_function(Constant(0.5), 1)


def test_degree_evaluation_uses_nearest_node_without_closed_form():
    class Plain(Stripe):
        def closed_degree(self, x):
            return None

    k = degree_function(Plain(0.25), 8)
    assert k.closed_form is None
    assert k(0.01) == k.samples[0]
    assert k(1.0) == k.samples[-1]


# degree bound


def test_degree_bound_stripe_passes():
    check = check_degree_bound(degree_function(Stripe(0.25), 256), 0.2)
    assert check.passed and bool(check)
    assert check.min_value == pytest.approx(0.25, abs=1 / 256)


def test_degree_bound_separable_fails_with_minimum():
    check = check_degree_bound(degree_function(Separable(), 100), 0.01)
    assert not check
    assert check.min_value == pytest.approx(0.0025, rel=1e-12)


def test_degree_bound_constant_one():
    assert check_degree_bound(degree_function(Constant(1.0), 50), 0.999)


# kernel


def test_kernel_separable_closed_form():
    K = kernel(Separable(), degree_function(Separable(), 50), c_min=0.01)
    x = np.linspace(0, 1, 7)
    assert np.allclose(K(x[:, None], x[None, :]), np.broadcast_to(2 * x[:, None], (7, 7)))


def test_kernel_constant_is_one():
    W = Constant(0.3)
    K = kernel(W, degree_function(W, 32))
    assert np.allclose(K(np.random.rand(10), np.random.rand(10)), 1.0)


def test_kernel_stripe_centre():
    W = Stripe(0.25)
    K = kernel(W, degree_function(W, 64))
    assert K(0.5, 0.5) == pytest.approx(2.0)


def test_kernel_raises_without_degree_bound():
    W = Block([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(DegreeTooSmall) as info:
        kernel(W, degree_function(W, 16))
    assert info.value.min_value == 0.0


def _connected_with_bound():
    for name, W in builtin_graphons().items():
        if name in ("disconnected", "separable", "threshold1"):
            continue
        if check_degree_bound(degree_function(W, 256)):
            yield name, W


def test_kernel_mass_is_one_for_connected_families():
    # quadrature-consistent kernel (degree from the same midpoint rule)
    N = 256
    for name, W in _connected_with_bound():
        Kgrid = build_kernel_matrix(W, N).Kmat * N
        assert abs(lp_norm(Kgrid, 1, N) - 1.0) <= 1e-4, name


def test_kernel_mass_with_closed_form_degree_is_first_order():
    # indicator families put O(1/N) quadrature error on the closed-form ratio
    N = 256
    for name, W in _connected_with_bound():
        K = kernel(W, degree_function(W, N))
        assert abs(lp_norm(K, 1, N) - 1.0) <= 4.0 / N, name


def test_threshold_kernel_norm_alpha2_matches_quadrature_oracle():
    # oracle: int_0^1 (1 - y^2)^(-1/2) dy by adaptive quadrature
    oracle, _ = integrate.quad(lambda y: (1 - y**2) ** -0.5, 0, 1)
    assert oracle == pytest.approx(np.pi / 2, rel=1e-9)
    W = Threshold(2.0)
    K = kernel(W, degree_function(W, 1024))
    assert lp_norm(K, 2, 1024) ** 2 == pytest.approx(oracle, rel=0.01)


# norms


def test_lp_norm_constant():
    W = Constant(0.5)
    assert lp_norm(W, 2, 64) == pytest.approx(0.5)
    assert lp_norm(W, 1, 64) == pytest.approx(0.5)
    assert lp_norm(W, np.inf, 64) == 0.5


def test_lp_norm_stripe_area():
    # band area 1 - (1 - h)^2 = 7/16
    assert lp_norm(Stripe(0.25), 1, 512) == pytest.approx(7 / 16, abs=2 / 512)


def test_lp_norm_accepts_arrays_and_checks_shape():
    M = np.full((8, 8), 0.25)
    assert lp_norm(M, 2, 8) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        lp_norm(M, 2, 16)
    with pytest.raises(ValueError):
        lp_norm(M, 0.5, 8)


@pytest.mark.parametrize("N", [32, 64, 128])
def test_norm_chain(N):
    for name, W in builtin_graphons().items():
        cut = cut_norm_interval_estimate(W, N)
        l1 = lp_norm(W, 1, N)
        l2 = lp_norm(W, 2, N)
        linf = lp_norm(W, np.inf, N)
        assert cut <= l1 + 1e-12 <= l2 + 2e-12 <= linf + 3e-12 <= 1 + 4e-12, name


# cut norm


def test_cut_norm_constant_and_zero():
    assert cut_norm_interval_estimate(Constant(0.4), 32) == pytest.approx(0.4)
    assert cut_norm_interval_estimate(Constant(0.0), 32) == 0.0


def test_cut_norm_stripe_bounded_by_band_area():
    assert cut_norm_interval_estimate(Stripe(0.25), 64) <= lp_norm(Stripe(0.25), 1, 64) + 1e-12


def test_cut_norm_brute_force_oracle(rng):
    # signed matrix so the best rectangle is not the full square
    M = rng.standard_normal((9, 9))
    M = M + M.T
    best = 0.0
    for a in range(9):
        for b in range(a, 9):
            for c in range(9):
                for d in range(c, 9):
                    best = max(best, abs(M[a : b + 1, c : d + 1].sum()))
    assert cut_norm_interval_estimate(M, 9) == pytest.approx(best / 81, rel=1e-12)


# operator product


def test_operator_product_constants():
    P = operator_product(Constant(0.5), Constant(0.4), 16)
    assert np.allclose(P, 0.2)


def test_operator_product_separable_square():
    N = 200
    x = midpoints(N)
    P = operator_product(Separable(), Separable(), N)
    # midpoint rule for int z^2 dz is 1/3 - 1/(12 N^2)
    assert np.allclose(P, np.outer(x, x) * (1 / 3 - 1 / (12 * N**2)), atol=1e-14)
    assert np.allclose(P, np.outer(x, x) / 3, atol=1e-5)


def test_operator_product_asymmetric():
    P = operator_product(Separable(), Stripe(0.25), 64)
    assert not np.allclose(P, P.T)


# connectivity


def test_connectivity_examples():
    assert is_connected(Constant(0.5), 16)
    assert not is_connected(disconnected_block(), 16)
    assert is_connected(Stripe(0.25), 32)


# symmetry and range


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(builtin_graphons())), st.integers(0, 2**31 - 1))
def test_symmetry_and_range(name, seed):
    W = builtin_graphons()[name]
    r = np.random.default_rng(seed)
    x, y = r.random(10_000), r.random(10_000)
    a, b = W(x, y), W(y, x)
    assert np.array_equal(a, b)
    assert a.min() >= 0.0 and a.max() <= 1.0


# configuration records


def test_config_round_trip():
    for W in builtin_graphons().values():
        V = from_config(json.loads(json.dumps(W.to_config())))
        assert np.array_equal(W.grid(32), V.grid(32))


def test_parse_graphon_short_forms():
    assert parse_graphon("constant:p=0.5").p == 0.5
    assert parse_graphon("stripe:h=0.25").h == 0.25
    B = parse_graphon("block:blocks=[[1,0],[0,1]],boundaries=[0,0.3,1]")
    assert np.allclose(B.edges, [0, 0.3, 1])
    A = parse_graphon('{"family": "affine", "params": {"offset": 0.1}, '
                      '"terms": [{"weight": 0.5, "graphon": {"family": "constant", "params": {"p": 1}}}]}')
    assert A(0.2, 0.7) == pytest.approx(0.6)


def test_parse_graphon_from_file(tmp_path):
    p = tmp_path / "w.yaml"
    p.write_text("family: threshold\nparams: {alpha: 2}\n")
    assert parse_graphon(f"@{p}").alpha == 2.0


@pytest.mark.parametrize("text", ["nope", "stripe:h", "stripe:h=0", "constant:q=1", "block:blocks=[[1,0],[1,1]]", "{bad"])
def test_parse_graphon_errors(text):
    with pytest.raises(ConfigError):
        parse_graphon(text)


def test_range_errors():
    with pytest.raises(RangeError):
        Constant(1.5)
    with pytest.raises(RangeError):
        Affine([(1.0, Constant(1.0))], offset=0.5)
