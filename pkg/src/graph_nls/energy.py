"""Scalar energies and their derivatives.

Fisher information, the linear and interaction potentials, the total
Hamiltonian H(rho, S), and the kinetic/potential/interaction split of the
wave-form energy.  The closed-form gradient and Hessian of the Fisher
information are the hand-differentiated formulas; the test suite
cross-checks them against finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NonInteriorDensity, ZeroModulus
from .graph import Graph, edge_means, grad, inner_product

__all__ = [
    "PotentialSpec",
    "check_interior",
    "edge_density",
    "fisher_information",
    "fisher_gradient",
    "fisher_hessian",
    "potential_energy",
    "interaction_energy",
    "hamiltonian",
    "wave_energy_components",
    "load_potentials_json",
]

# Densities below this are treated as boundary points: log() would still be
# finite but the dynamics is meaningless there.
INTERIOR_FLOOR = 1e-300

MASS_TOL = 1e-12


@dataclass(frozen=True)
class PotentialSpec:
    """Linear potential V (per node), interaction matrix W, and constant h."""

    V: np.ndarray
    W: np.ndarray
    h: float = 1.0

    def __post_init__(self):
        V = np.asarray(self.V, dtype=float)
        W = np.asarray(self.W, dtype=float)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "W", W)
        if W.shape != (len(V), len(V)):
            raise ConfigError("W must be n x n with n = len(V)")
        if not np.allclose(W, W.T, atol=1e-12):
            raise ConfigError("interaction matrix must be symmetric")
        if not self.h > 0:
            raise ConfigError("h must be positive")

    @property
    def n(self) -> int:
        return len(self.V)

    @classmethod
    def free(cls, n: int, h: float = 1.0) -> "PotentialSpec":
        return cls(np.zeros(n), np.zeros((n, n)), h)

    @classmethod
    def gpe(cls, n: int, alpha: float, h: float = 1.0) -> "PotentialSpec":
        """V = 0, W = alpha * I (discrete Gross-Pitaevskii)."""
        return cls(np.zeros(n), alpha * np.eye(n), h)


def check_interior(rho, n=None):
    rho = np.asarray(rho, dtype=float)
    if n is not None and rho.shape != (n,):
        raise ConfigError(f"density has shape {rho.shape}, expected ({n},)")
    if rho.min() < INTERIOR_FLOOR:
        raise NonInteriorDensity(
            f"density entry {rho.min():.3g} is at the simplex boundary"
        )
    return rho


def edge_density(rho, edge) -> float:
    """Mean of the endpoint densities on one edge."""
    j, l = edge
    return 0.5 * (rho[j] + rho[l])


def _log_diffs(G: Graph, rho):
    logr = np.log(rho)
    return logr[G.ej] - logr[G.el]


def fisher_information(G: Graph, rho) -> float:
    """I(rho) = sum over edges of w (log rho_j - log rho_l)^2 g_jl.

    Accepts any strictly positive vector; I is 1-homogeneous in rho.
    """
    rho = check_interior(rho, G.n)
    d = _log_diffs(G, rho)
    return float(np.sum(G.weights * d * d * edge_means(G, rho)))


def fisher_gradient(G: Graph, rho) -> np.ndarray:
    """Closed-form gradient of the Fisher information.

    dI/drho_j = sum_{l ~ j} w [ (dlog)^2 / 2 + 2 dlog * g_jl / rho_j ],
    with dlog = log rho_j - log rho_l.  Satisfies the Euler identity
    grad(I) . rho = I(rho).
    """
    rho = check_interior(rho, G.n)
    d = _log_diffs(G, rho)
    g = edge_means(G, rho)
    out = np.zeros(G.n)
    # orientation j -> l contributes at node j, l -> j (sign-flipped) at l
    np.add.at(out, G.ej, G.weights * (0.5 * d * d + 2.0 * d * g / rho[G.ej]))
    np.add.at(out, G.el, G.weights * (0.5 * d * d - 2.0 * d * g / rho[G.el]))
    return out


def fisher_hessian(G: Graph, rho) -> np.ndarray:
    """Hessian of I with entries built from t_lj = (drho)(dlog) + (rho_l+rho_j)."""
    rho = check_interior(rho, G.n)
    d = _log_diffs(G, rho)
    t = (rho[G.ej] - rho[G.el]) * d + (rho[G.ej] + rho[G.el])
    wt = G.weights * t
    H = np.zeros((G.n, G.n))
    np.add.at(H, (G.ej, G.el), -wt / (rho[G.ej] * rho[G.el]))
    np.add.at(H, (G.el, G.ej), -wt / (rho[G.ej] * rho[G.el]))
    np.add.at(H, (G.ej, G.ej), wt / rho[G.ej] ** 2)
    np.add.at(H, (G.el, G.el), wt / rho[G.el] ** 2)
    return H


def potential_energy(spec: PotentialSpec, rho) -> float:
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (spec.n,):
        raise ConfigError("density/potential shape mismatch")
    return float(spec.V @ rho)


def interaction_energy(spec: PotentialSpec, rho) -> float:
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (spec.n,):
        raise ConfigError("density/potential shape mismatch")
    return float(0.5 * rho @ spec.W @ rho)


def hamiltonian(G: Graph, spec: PotentialSpec, rho, S) -> float:
    """Total energy H = kinetic + (h^2/8) I + V + W."""
    rho = check_interior(rho, G.n)
    v = grad(G, S)
    kin = 0.5 * inner_product(G, rho, v, v)
    return (
        kin
        + spec.h**2 / 8.0 * fisher_information(G, rho)
        + potential_energy(spec, rho)
        + interaction_energy(spec, rho)
    )


def wave_energy_components(G: Graph, spec: PotentialSpec, psi):
    """Kinetic / potential / interaction energies of a wave state.

    Returns (E_kin, E_pot, E_int, E_total) with
    E_total = h^2 E_kin + E_pot + E_int, which equals H(rho, S) exactly.
    Computed in the (rho, S) representation: the real part of the log
    difference is half the log-density difference, the imaginary part is
    the per-edge phase difference divided by h (taken as the principal
    angle of Psi_j conj(Psi_l), so winding phases are handled).
    """
    psi = np.asarray(psi, dtype=complex)
    rho = np.abs(psi) ** 2
    if rho.min() <= 0:
        raise ZeroModulus("wave function vanishes at a node")
    re = 0.5 * _log_diffs(G, rho)
    # the principal angle of Psi_j conj(Psi_l) is already (S_j - S_l)/h
    im = np.angle(psi[G.ej] * np.conj(psi[G.el]))
    g = edge_means(G, rho)
    e_kin = float(0.5 * np.sum(G.weights * (re * re + im * im) * g))
    e_pot = potential_energy(spec, rho)
    e_int = interaction_energy(spec, rho)
    return e_kin, e_pot, e_int, spec.h**2 * e_kin + e_pot + e_int


def load_potentials_json(path, n=None) -> PotentialSpec:
    """Read the potentials file format.

    {"V": [...], "W": {"kind": "zero"|"diagonal"|"dense", ...}, "h": real}
    V may also be {"kind": "zero"|"constant"|"harmonic", ...}; harmonic
    needs node coordinates and is resolved by the CLI layer.
    """
    with open(path) as f:
        data = json.load(f)
    return potentials_from_dict(data, n=n)


def potentials_from_dict(data, n=None, coords=None) -> PotentialSpec:
    try:
        V_spec = data["V"]
        W_spec = data["W"]
        h = float(data.get("h", 1.0))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed potentials: {exc}") from exc
    if isinstance(V_spec, dict):
        kind = V_spec.get("kind")
        if kind == "zero":
            if n is None:
                raise ConfigError("zero potential needs a known node count")
            V = np.zeros(n)
        elif kind == "constant":
            if n is None:
                raise ConfigError("constant potential needs a known node count")
            V = np.full(n, float(V_spec["value"]))
        elif kind == "harmonic":
            if coords is None:
                raise ConfigError("harmonic potential needs node coordinates")
            c = float(V_spec.get("coefficient", 0.5))
            V = c * np.sum(np.atleast_2d(coords) ** 2, axis=1)
        else:
            raise ConfigError(f"unknown V kind {kind!r}")
    else:
        V = np.asarray(V_spec, dtype=float)
    n = len(V)
    if isinstance(W_spec, dict):
        kind = W_spec.get("kind")
        if kind == "zero":
            W = np.zeros((n, n))
        elif kind == "diagonal":
            W = float(W_spec["alpha"]) * np.eye(n)
        elif kind == "dense":
            W = np.asarray(W_spec["matrix"], dtype=float)
        else:
            raise ConfigError(f"unknown W kind {kind!r}")
    else:
        W = np.asarray(W_spec, dtype=float)
    return PotentialSpec(V, W, h)
