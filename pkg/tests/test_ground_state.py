import numpy as np
import pytest

from graph_nls import (
    PotentialSpec,
    build_path_lattice,
    eigen_residual,
    ground_energy,
    ground_gradient,
    hamiltonian,
    solve_ground_state,
)
from graph_nls.energy import interaction_energy, potentials_from_dict
from graph_nls.ground_state import NonConvexWarning
from conftest import cycle_graph, two_node, random_connected_graph, random_interior


def fd_gradient(f, x, step=1e-6):
    g = np.zeros_like(x)
    for j in range(len(x)):
        e = np.zeros_like(x)
        e[j] = step
        g[j] = (f(x + e) - f(x - e)) / (2.0 * step)
    return g


def test_ground_energy_is_zero_phase_hamiltonian(rng):
    G = random_connected_graph(rng)
    spec = PotentialSpec(
        rng.normal(0.0, 1.0, G.n), np.zeros((G.n, G.n)), float(rng.uniform(0.3, 1.5))
    )
    rho = random_interior(rng, G.n)
    assert ground_energy(G, spec, rho) == pytest.approx(
        hamiltonian(G, spec, rho, np.zeros(G.n)), rel=1e-13
    )


def test_ground_gradient_matches_fd(rng):
    G = random_connected_graph(rng)
    A = rng.normal(0.0, 0.5, (G.n, G.n))
    spec = PotentialSpec(rng.normal(0.0, 1.0, G.n), A @ A.T / G.n, 0.8)
    rho = random_interior(rng, G.n)
    g = ground_gradient(G, spec, rho)
    fd = fd_gradient(lambda r: ground_energy(G, spec, r), rho)
    assert np.abs(g - fd).max() / max(1.0, np.abs(g).max()) < 1e-6


def test_two_node_constant_potential():
    G = two_node()
    c = 3.2
    spec = PotentialSpec(np.full(2, c), np.zeros((2, 2)), 1.0)
    res = solve_ground_state(G, spec)
    assert np.abs(res.rho_g - 0.5).max() <= 1e-10
    assert res.nu == pytest.approx(c, abs=1e-10)
    assert res.kkt_residual <= 1e-10
    assert res.unique


def test_gpe_uniform_ground_state():
    n, alpha = 6, 2.0
    G = cycle_graph(n)
    spec = PotentialSpec.gpe(n, alpha, 1.0)
    res = solve_ground_state(G, spec)
    assert np.abs(res.rho_g - 1.0 / n).max() <= 1e-10
    assert res.nu == pytest.approx(alpha / n, abs=1e-9)


def test_multiplier_consistency(rng):
    # nu = E(sqrt(rho_g)) + E_int(sqrt(rho_g))
    G = random_connected_graph(rng)
    spec = PotentialSpec(
        np.abs(rng.normal(0.0, 1.0, G.n)), 0.5 * np.eye(G.n), 1.0
    )
    res = solve_ground_state(G, spec, tol=1e-11)
    expected = res.energy + interaction_energy(spec, res.rho_g)
    assert abs(res.nu - expected) <= 1e-10


def test_harmonic_sweep_concentration():
    G = build_path_lattice(20, -5.0, 5.0)
    center_masses = []
    for h in [1.0, 0.1, 0.01]:
        spec = potentials_from_dict(
            {"V": {"kind": "harmonic", "coefficient": 0.5}, "W": {"kind": "zero"},
             "h": h},
            n=G.n, coords=G.coords,
        )
        res = solve_ground_state(G, spec)
        rho = res.rho_g
        assert res.kkt_residual <= 1e-10
        assert np.abs(rho - rho[::-1]).max() < 1e-8  # symmetric
        assert np.all(np.diff(rho[:10]) > 0)  # unimodal
        assert np.all(np.diff(rho[10:]) < 0)
        center_masses.append(rho[8:12].sum())
    assert center_masses[0] < center_masses[1] < center_masses[2]


def test_monotone_descent_and_interior(rng):
    G = random_connected_graph(rng)
    spec = PotentialSpec(rng.normal(0.0, 2.0, G.n), np.zeros((G.n, G.n)), 0.5)
    init = random_interior(rng, G.n)
    res = solve_ground_state(G, spec, init=init)
    assert res.rho_g.min() > 0.0
    assert res.energy <= ground_energy(G, spec, init) + 1e-12


def test_nonconvex_interaction_flagged():
    G = two_node()
    spec = PotentialSpec(np.zeros(2), -1.5 * np.eye(2), 1.0)
    with pytest.warns(NonConvexWarning):
        res = solve_ground_state(G, spec)
    assert not res.unique


def test_eigen_residual_converged_cases():
    G = two_node()
    spec = PotentialSpec(np.full(2, 1.1), np.zeros((2, 2)), 1.0)
    res = solve_ground_state(G, spec, tol=1e-11)
    assert eigen_residual(G, spec, res) <= 1e-10

    n, alpha = 5, 1.0
    Gc = cycle_graph(n)
    gpe = PotentialSpec.gpe(n, alpha, 1.0)
    res2 = solve_ground_state(Gc, gpe, tol=1e-11)
    assert eigen_residual(Gc, gpe, res2) <= 1e-10


def test_eigen_residual_grows_off_minimum():
    G = two_node()
    spec = PotentialSpec(np.full(2, 1.1), np.zeros((2, 2)), 1.0)
    res = solve_ground_state(G, spec, tol=1e-11)
    base = eigen_residual(G, spec, res)
    perturbed = 0.99 * res.rho_g + 0.01 * np.array([1.0, 0.0])
    fake = type(res)(
        rho_g=perturbed / perturbed.sum(),
        nu=res.nu,
        energy=res.energy,
        kkt_residual=res.kkt_residual,
        iterations=res.iterations,
    )
    assert eigen_residual(G, spec, fake) > base
