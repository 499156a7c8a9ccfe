import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from graph_nls import (
    DisconnectedGraph,
    DuplicateEdge,
    NonPositiveWeight,
    SelfLoop,
    ConfigError,
    build_graph,
    build_path_lattice,
    build_torus,
    divergence,
    grad,
    inner_product,
    load_graph_json,
    save_graph_json,
    weighted_laplacian,
)
from conftest import two_node, random_connected_graph, random_interior


def test_build_rejects_self_loop():
    with pytest.raises(SelfLoop):
        build_graph(3, [(0, 0, 1.0), (0, 1, 1.0), (1, 2, 1.0)])


def test_build_rejects_nonpositive_weight():
    with pytest.raises(NonPositiveWeight):
        build_graph(2, [(0, 1, 0.0)])
    with pytest.raises(NonPositiveWeight):
        build_graph(2, [(0, 1, -2.0)])


def test_build_rejects_duplicate_edge():
    with pytest.raises(DuplicateEdge):
        build_graph(2, [(0, 1, 1.0), (1, 0, 2.0)])


def test_build_rejects_disconnected():
    with pytest.raises(DisconnectedGraph):
        build_graph(4, [(0, 1, 1.0), (2, 3, 1.0)])


def test_canonical_orientation():
    G = build_graph(3, [(2, 0, 1.0), (1, 0, 1.0)])
    assert np.all(G.ej < G.el)
    assert G.m == 2


def test_path_lattice_continuum_weights():
    G = build_path_lattice(20, -5.0, 5.0)
    dx = 10.0 / 19
    assert G.n == 20 and G.m == 19
    assert np.allclose(G.weights, 1.0 / dx**2)
    assert np.allclose(G.coords[:, 0], np.linspace(-5, 5, 20))


def test_path_lattice_constant_weights():
    G = build_path_lattice(5, 0.0, 1.0, weight_mode="constant", weight=3.0)
    assert np.allclose(G.weights, 3.0)


def test_torus_1d_is_cycle():
    G = build_torus([8], 1.0)
    assert G.n == 8 and G.m == 8
    deg = np.zeros(8)
    np.add.at(deg, G.ej, 1)
    np.add.at(deg, G.el, 1)
    assert np.all(deg == 2)


def test_torus_2d_degree_four():
    G = build_torus([4, 4], 1.0)
    assert G.n == 16 and G.m == 32
    deg = np.zeros(16)
    np.add.at(deg, G.ej, 1)
    np.add.at(deg, G.el, 1)
    assert np.all(deg == 4)


def test_torus_dim_two_rejected():
    with pytest.raises(ConfigError):
        build_torus([2], 1.0)


def test_grad_two_node():
    G = two_node()
    v = grad(G, np.array([1.0, 0.0]))
    assert v[0] == 1.0


def test_grad_scales_with_sqrt_weight():
    G = two_node(w=4.0)
    v = grad(G, np.array([1.0, 0.0]))
    assert v[0] == 2.0


def test_grad_of_constant_is_zero(rng):
    for _ in range(5):
        G = random_connected_graph(rng)
        assert np.all(grad(G, np.full(G.n, 3.7)) == 0.0)


def test_divergence_two_node():
    G = two_node()
    rho = np.array([0.5, 0.5])
    v = grad(G, np.array([1.0, 0.0]))
    assert np.allclose(divergence(G, rho, v), [0.5, -0.5])


def test_divergence_of_zero_field(rng):
    G = random_connected_graph(rng)
    rho = random_interior(rng, G.n)
    assert np.all(divergence(G, rho, np.zeros(G.m)) == 0.0)


def test_divergence_sums_to_zero(rng):
    for _ in range(10):
        G = random_connected_graph(rng)
        rho = random_interior(rng, G.n)
        v = grad(G, rng.normal(0.0, 1.0, G.n))
        assert abs(divergence(G, rho, v).sum()) < 1e-14


def test_inner_product_two_node():
    G = two_node()
    rho = np.array([0.5, 0.5])
    v = grad(G, np.array([1.0, 0.0]))
    assert inner_product(G, rho, v, v) == 0.5


def test_inner_product_with_zero(rng):
    G = random_connected_graph(rng)
    rho = random_interior(rng, G.n)
    v = rng.normal(0.0, 1.0, G.m)
    assert inner_product(G, rho, v, np.zeros(G.m)) == 0.0


@given(st.integers(0, 2**32 - 1))
def test_inner_product_symmetry(seed):
    rng = np.random.default_rng(seed)
    G = random_connected_graph(rng)
    rho = random_interior(rng, G.n)
    v = rng.normal(0.0, 1.0, G.m)
    u = rng.normal(0.0, 1.0, G.m)
    assert inner_product(G, rho, v, u) == pytest.approx(
        inner_product(G, rho, u, v), abs=1e-14
    )


def test_dirichlet_form_matches_laplacian(rng):
    # (grad S, grad S)_rho = S^T L(rho) S
    for _ in range(10):
        G = random_connected_graph(rng)
        rho = random_interior(rng, G.n)
        S = rng.normal(0.0, 1.0, G.n)
        v = grad(G, S)
        lhs = inner_product(G, rho, v, v)
        rhs = float(S @ weighted_laplacian(G, rho).matrix @ S)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-13)


def test_graph_json_round_trip(tmp_path, rng):
    G = random_connected_graph(rng)
    p = tmp_path / "g.json"
    save_graph_json(G, p)
    data = json.loads(p.read_text())
    assert min(min(j, l) for j, l, _ in data["edges"]) == 1  # 1-based on disk
    G2 = load_graph_json(p)
    assert G2.n == G.n
    assert np.array_equal(G2.ej, G.ej)
    assert np.array_equal(G2.el, G.el)
    assert np.array_equal(G2.weights, G.weights)
