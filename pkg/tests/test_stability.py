import numpy as np
import pytest

from graph_nls import (
    PotentialSpec,
    build_graph,
    gpe_spectrum_closed_form,
    hamiltonian,
    hamiltonian_matrix,
    spectrum,
    weighted_laplacian,
)
from graph_nls.energy import fisher_hessian
from graph_nls.stability import plain_laplacian, spectrum_mismatch
from conftest import (
    cycle_graph,
    complete_graph,
    path_graph,
    two_node,
    random_connected_graph,
    random_interior,
)


def test_block_structure_gpe():
    n, alpha, h = 5, 0.8, 1.0
    G = cycle_graph(n)
    spec = PotentialSpec.gpe(n, alpha, h)
    H = hamiltonian_matrix(G, spec, np.full(n, 1.0 / n))
    L = plain_laplacian(G)
    assert np.abs(H.top_right - L / n).max() < 1e-14
    assert np.abs(H.bottom_left - (-alpha * np.eye(n) - n * h**2 / 4.0 * L)).max() < 1e-12
    full = H.full()
    assert np.all(full[:n, :n] == 0.0)
    assert np.all(full[n:, n:] == 0.0)


def test_bottom_left_without_interaction(rng):
    G = random_connected_graph(rng)
    h = 0.9
    spec = PotentialSpec(rng.normal(0.0, 1.0, G.n), np.zeros((G.n, G.n)), h)
    rho = random_interior(rng, G.n)
    H = hamiltonian_matrix(G, spec, rho)
    assert np.abs(H.bottom_left + h**2 / 8.0 * fisher_hessian(G, rho)).max() < 1e-12
    assert np.abs(H.top_right - weighted_laplacian(G, rho).matrix).max() < 1e-14


def test_matches_fd_hessian_of_hamiltonian(rng):
    G = random_connected_graph(rng)
    n = G.n
    A = rng.normal(0.0, 0.5, (n, n))
    spec = PotentialSpec(rng.normal(0.0, 1.0, n), (A + A.T) / 2, 0.8)
    rho = random_interior(rng, n)
    S = np.full(n, 0.3)
    H = hamiltonian_matrix(G, spec, rho).full()
    z0 = np.concatenate([rho, S])
    step = 1e-5
    hess = np.zeros((2 * n, 2 * n))
    for j in range(2 * n):
        e = np.zeros(2 * n)
        e[j] = step

        def g(z):
            out = np.zeros(2 * n)
            eps = 1e-5
            for i in range(2 * n):
                d = np.zeros(2 * n)
                d[i] = eps
                out[i] = (
                    hamiltonian(G, spec, (z + d)[:n], (z + d)[n:])
                    - hamiltonian(G, spec, (z - d)[:n], (z - d)[n:])
                ) / (2 * eps)
            return out

        hess[:, j] = (g(z0 + e) - g(z0 - e)) / (2 * step)
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    assert np.abs(H - J @ hess).max() < 1e-5 * max(1.0, np.abs(H).max())


def test_spectrum_two_node_alpha_zero():
    G = two_node()
    spec = PotentialSpec.gpe(2, 0.0, 1.0)
    rep = spectrum(hamiltonian_matrix(G, spec, np.array([0.5, 0.5])))
    assert spectrum_mismatch(rep.eigenvalues, [0.0, 0.0, 1j, -1j]) < 1e-10
    assert rep.classification == "spectrally_stable"


def test_spectrum_negation_symmetry(rng):
    for _ in range(5):
        G = random_connected_graph(rng)
        A = rng.normal(0.0, 0.5, (G.n, G.n))
        spec = PotentialSpec(np.zeros(G.n), A @ A.T / G.n, 1.0)
        rho = random_interior(rng, G.n)
        rep = spectrum(hamiltonian_matrix(G, spec, rho))
        assert spectrum_mismatch(rep.eigenvalues, -rep.eigenvalues) < 1e-8


def test_spectrum_permutation_invariance(rng):
    G = path_graph(5)
    spec = PotentialSpec.gpe(5, 0.7, 1.0)
    rho = random_interior(rng, 5)
    rep = spectrum(hamiltonian_matrix(G, spec, rho))
    perm = rng.permutation(5)
    inv = np.argsort(perm)
    edges = [(int(min(perm[j], perm[l])), int(max(perm[j], perm[l])), float(w))
             for j, l, w in zip(G.ej, G.el, G.weights)]
    G2 = build_graph(5, edges)
    rep2 = spectrum(hamiltonian_matrix(G2, spec, rho[inv]))
    assert spectrum_mismatch(rep.eigenvalues, rep2.eigenvalues) < 1e-8


def test_closed_form_two_node():
    G = two_node()
    rep = gpe_spectrum_closed_form(G, 0.0, 1.0)
    assert spectrum_mismatch(rep.eigenvalues, [0.0, 0.0, 1j, -1j]) < 1e-12
    # threshold alpha = -(n/4) lambda h^2 = -1 for the second mode
    rep2 = gpe_spectrum_closed_form(G, -1.0, 1.0)
    assert rep2.bifurcation_modes == [2]
    assert spectrum_mismatch(rep2.eigenvalues, [0.0, 0.0, 0.0, 0.0]) < 1e-12


def test_closed_form_battery_matches_numeric():
    worst = 0.0
    for build, ns in [(cycle_graph, range(3, 11)), (path_graph, range(2, 11)),
                      (complete_graph, range(2, 11))]:
        for n in ns:
            G = build(n)
            for alpha in [0.0, 1.0, -0.5]:
                spec = PotentialSpec.gpe(n, alpha, 1.0)
                num = spectrum(hamiltonian_matrix(G, spec, np.full(n, 1.0 / n)))
                cf = gpe_spectrum_closed_form(G, alpha, 1.0)
                worst = max(worst, spectrum_mismatch(num.eigenvalues, cf.eigenvalues))
    assert worst <= 1e-8


def test_stability_classification_gpe():
    n = 5
    G = cycle_graph(n)
    lam = np.linalg.eigvalsh(plain_laplacian(G))
    # alpha above every threshold: purely imaginary, stable
    rep = gpe_spectrum_closed_form(G, 1.0, 1.0)
    assert rep.classification == "spectrally_stable"
    # alpha well below the first threshold: a real positive eigenvalue
    alpha_unstable = -(n / 4.0) * lam[1] * 1.0 - 1.0
    rep2 = gpe_spectrum_closed_form(G, alpha_unstable, 1.0)
    assert rep2.classification == "unstable"
    num = spectrum(hamiltonian_matrix(G, PotentialSpec.gpe(n, alpha_unstable, 1.0),
                                      np.full(n, 1.0 / n)))
    assert num.classification == "unstable"


def test_bifurcation_threshold_tolerance():
    n = 6
    G = cycle_graph(n)
    lam = np.linalg.eigvalsh(plain_laplacian(G))
    h = 1.0
    k = 2  # second mode, 1-based
    alpha_star = -(n / 4.0) * lam[k - 1] * h**2
    hit = gpe_spectrum_closed_form(G, alpha_star, h)
    assert k in hit.bifurcation_modes
    near = gpe_spectrum_closed_form(G, alpha_star + 5e-10, h)
    assert k in near.bifurcation_modes
    off = gpe_spectrum_closed_form(G, alpha_star + 5e-9, h)
    assert k not in off.bifurcation_modes
