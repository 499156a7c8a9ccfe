"""Hamiltonian dynamics of the (rho, S) system and its wave form.

The flow is

    d rho / dt = +dH/dS = L(rho) S
    d S   / dt = -dH/drho

which is the sign combination under which the energy is an exact
invariant and the wave function Psi = sqrt(rho) exp(i S / h) satisfies
the Schrodinger-type equation with the nonlinear graph Laplacian.
Default integrator is the implicit midpoint rule (symplectic; Newton
iteration with the analytic Jacobian), with classical RK4 available for
cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ConfigError,
    IncommensurateWaveNumber,
    NewtonDivergence,
    NonInteriorDensity,
    StepLeftSimplex,
    ZeroModulus,
)
from .energy import (
    MASS_TOL,
    PotentialSpec,
    check_interior,
    fisher_gradient,
    fisher_hessian,
    fisher_information,
    interaction_energy,
    potential_energy,
)
from .graph import Graph, edge_means, grad, inner_product

__all__ = [
    "SystemState",
    "IntegratorConfig",
    "Trajectory",
    "rhs",
    "rhs_jacobian",
    "step",
    "simulate",
    "to_wave",
    "from_wave",
    "graph_laplacian_wave",
    "plane_wave_residual",
]


@dataclass(frozen=True)
class SystemState:
    rho: np.ndarray
    S: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "rho", np.asarray(self.rho, dtype=float))
        object.__setattr__(self, "S", np.asarray(self.S, dtype=float))


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "implicit_midpoint"
    dt: float = 1e-3
    T: float = 1.0
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    output_every: int = 1

    def __post_init__(self):
        if self.method not in ("implicit_midpoint", "rk4"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.dt <= 0 or self.T <= 0:
            raise ConfigError("dt and T must be positive")
        if self.newton_tol <= 0 or self.newton_max_iter < 1:
            raise ConfigError("Newton settings must be positive")
        if self.output_every < 1:
            raise ConfigError("output_every must be >= 1")


@dataclass
class Trajectory:
    """Snapshots plus per-snapshot diagnostics.

    ``norm_resid`` is the residual of the phase-normalization identity:
    sum_j S_j rho_j minus its initial value minus the accumulated
    integral of 1/2 (grad S, grad S)_rho - (h^2/8) I - V - 2 W.
    """

    times: list = field(default_factory=list)
    rhos: list = field(default_factory=list)
    Ss: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    min_rho: list = field(default_factory=list)
    norm_resid: list = field(default_factory=list)
    error: str | None = None
    halvings: int = 0

    def state(self, k) -> SystemState:
        return SystemState(self.rhos[k], self.Ss[k], self.times[k])

    def __len__(self):
        return len(self.times)


def rhs(G: Graph, spec: PotentialSpec, state: SystemState):
    """Time derivatives (drho/dt, dS/dt) of the Hamiltonian flow."""
    rho = check_interior(state.rho, G.n)
    S = state.S
    g = edge_means(G, rho)
    dS_edge = S[G.ej] - S[G.el]
    flux = G.weights * dS_edge * g
    drho = np.zeros(G.n)
    np.add.at(drho, G.ej, flux)
    np.add.at(drho, G.el, -flux)
    # dH/drho: half the squared phase differences (dg/drho = 1/2 on both
    # endpoints) plus the Fisher and potential gradients
    q = np.zeros(G.n)
    sq = 0.25 * G.weights * dS_edge**2
    np.add.at(q, G.ej, sq)
    np.add.at(q, G.el, sq)
    dS = -(q + spec.h**2 / 8.0 * fisher_gradient(G, rho) + spec.V + spec.W @ rho)
    return drho, dS


def rhs_jacobian(G: Graph, spec: PotentialSpec, state: SystemState) -> np.ndarray:
    """Analytic 2n x 2n Jacobian of the right-hand side."""
    rho = check_interior(state.rho, G.n)
    S = state.S
    n = G.n
    dS_edge = S[G.ej] - S[G.el]
    half_w_dS = 0.5 * G.weights * dS_edge
    # A = d(drho)/drho
    A = np.zeros((n, n))
    np.add.at(A, (G.ej, G.ej), half_w_dS)
    np.add.at(A, (G.ej, G.el), half_w_dS)
    np.add.at(A, (G.el, G.el), -half_w_dS)
    np.add.at(A, (G.el, G.ej), -half_w_dS)
    # d(drho)/dS = L(rho)
    wg = G.weights * edge_means(G, rho)
    L = np.zeros((n, n))
    np.add.at(L, (G.ej, G.el), -wg)
    np.add.at(L, (G.el, G.ej), -wg)
    np.add.at(L, (G.ej, G.ej), wg)
    np.add.at(L, (G.el, G.el), wg)
    B = -(spec.h**2 / 8.0 * fisher_hessian(G, rho) + spec.W)
    J = np.zeros((2 * n, 2 * n))
    J[:n, :n] = A
    J[:n, n:] = L
    J[n:, :n] = B
    J[n:, n:] = -A.T
    return J


def _midpoint_step(G, spec, state, cfg):
    n = G.n
    z0 = np.concatenate([state.rho, state.S])
    f0 = np.concatenate(rhs(G, spec, state))
    z1 = z0 + cfg.dt * f0  # explicit Euler predictor
    eye = np.eye(2 * n)
    for _ in range(cfg.newton_max_iter):
        zm = 0.5 * (z0 + z1)
        if zm[:n].min() <= 0 or z1[:n].min() <= 0:
            raise StepLeftSimplex("midpoint density left the simplex interior")
        mid = SystemState(zm[:n], zm[n:], state.t + 0.5 * cfg.dt)
        fm = np.concatenate(rhs(G, spec, mid))
        F = z1 - z0 - cfg.dt * fm
        res = np.abs(F).max()
        if res <= cfg.newton_tol:
            return SystemState(z1[:n], z1[n:], state.t + cfg.dt)
        J = eye - 0.5 * cfg.dt * rhs_jacobian(G, spec, mid)
        z1 = z1 - np.linalg.solve(J, F)
    raise NewtonDivergence(
        f"residual {res:.3g} > {cfg.newton_tol:.3g} after {cfg.newton_max_iter} iterations"
    )


def _rk4_step(G, spec, state, cfg):
    dt = cfg.dt

    def f(z, t):
        if z[: G.n].min() <= 0:
            raise StepLeftSimplex("RK4 stage density left the simplex interior")
        return np.concatenate(rhs(G, spec, SystemState(z[: G.n], z[G.n :], t)))

    z0 = np.concatenate([state.rho, state.S])
    k1 = f(z0, state.t)
    k2 = f(z0 + 0.5 * dt * k1, state.t + 0.5 * dt)
    k3 = f(z0 + 0.5 * dt * k2, state.t + 0.5 * dt)
    k4 = f(z0 + dt * k3, state.t + dt)
    z1 = z0 + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    if z1[: G.n].min() <= 0:
        raise StepLeftSimplex("RK4 step density left the simplex interior")
    return SystemState(z1[: G.n], z1[G.n :], state.t + dt)


def step(G: Graph, spec: PotentialSpec, state: SystemState, cfg: IntegratorConfig):
    """Advance one time step with the configured method."""
    if cfg.method == "implicit_midpoint":
        return _midpoint_step(G, spec, state, cfg)
    return _rk4_step(G, spec, state, cfg)


def _norm_integrand(G, spec, rho, S):
    v = grad(G, S)
    return (
        0.5 * inner_product(G, rho, v, v)
        - spec.h**2 / 8.0 * fisher_information(G, rho)
        - potential_energy(spec, rho)
        - 2.0 * interaction_energy(spec, rho)
    )


def simulate(G: Graph, spec: PotentialSpec, initial, cfg: IntegratorConfig) -> Trajectory:
    """Integrate up to T, returning snapshots every ``output_every`` steps.

    ``initial`` is a SystemState or a complex wave vector.  On integrator
    failure the step size is halved (at most 5 times); if that is
    exhausted the partial trajectory is returned with ``error`` set.
    """
    if np.iscomplexobj(initial):
        state = from_wave(initial, spec.h)
    else:
        state = initial
    rho = check_interior(state.rho, G.n)
    if abs(rho.sum() - 1.0) > 1e3 * MASS_TOL:
        raise NonInteriorDensity(f"initial mass {rho.sum():.12g} != 1")
    state = SystemState(rho, state.S, state.t)

    traj = Trajectory()
    sp0 = float(state.S @ state.rho)
    acc = 0.0  # running trapezoid of the normalization integrand
    prev_integrand = _norm_integrand(G, spec, state.rho, state.S)

    def emit(st):
        from .energy import hamiltonian

        traj.times.append(st.t)
        traj.rhos.append(st.rho.copy())
        traj.Ss.append(st.S.copy())
        traj.mass.append(float(st.rho.sum()))
        traj.energy.append(hamiltonian(G, spec, st.rho, st.S))
        traj.min_rho.append(float(st.rho.min()))
        traj.norm_resid.append(float(st.S @ st.rho - sp0 - acc))

    emit(state)
    t_end = state.t + cfg.T
    dt = cfg.dt
    halvings = 0
    k = 0
    while state.t < t_end - 1e-12 * cfg.T:
        dt_k = min(dt, t_end - state.t)
        cfg_k = replace(cfg, dt=dt_k)
        try:
            new = step(G, spec, state, cfg_k)
        except (StepLeftSimplex, NewtonDivergence) as exc:
            if halvings >= 5:
                traj.error = f"{type(exc).__name__}: {exc}"
                traj.halvings = halvings
                return traj
            halvings += 1
            dt *= 0.5
            continue
        integrand = _norm_integrand(G, spec, new.rho, new.S)
        acc += 0.5 * dt_k * (prev_integrand + integrand)
        prev_integrand = integrand
        state = new
        k += 1
        if k % cfg.output_every == 0 or state.t >= t_end - 1e-12 * cfg.T:
            emit(state)
    traj.halvings = halvings
    return traj


def to_wave(state: SystemState, h: float) -> np.ndarray:
    """Psi_j = sqrt(rho_j) exp(i S_j / h)."""
    rho = check_interior(state.rho)
    return np.sqrt(rho) * np.exp(1j * state.S / h)


def from_wave(psi, h: float) -> SystemState:
    """Inverse map; S is recovered on the principal branch (-pi h, pi h]."""
    psi = np.asarray(psi, dtype=complex)
    rho = np.abs(psi) ** 2
    if rho.min() <= 0:
        raise ZeroModulus("wave function vanishes at a node")
    return SystemState(rho, h * np.angle(psi), 0.0)


def _edge_log_diffs(G: Graph, psi):
    """Complex skew edge field: 1/2 dlog rho + i * principal phase difference.

    The phase difference is the angle of Psi_j conj(Psi_l), stored in the
    canonical orientation, so it stays consistent for winding phases that
    no single-valued S can represent.
    """
    rho = np.abs(psi) ** 2
    if rho.min() <= 0:
        raise ZeroModulus("wave function vanishes at a node")
    logr = np.log(rho)
    re = 0.5 * (logr[G.ej] - logr[G.el])
    im = np.angle(psi[G.ej] * np.conj(psi[G.el]))
    return rho, re + 1j * im


def _laplacian_from_edge_dlog(G, psi, rho, dlog):
    """Assemble Lap_G Psi from a skew complex edge field of log differences."""
    g = edge_means(G, rho)
    first = np.zeros(G.n, dtype=complex)
    np.add.at(first, G.ej, G.weights * dlog * g)
    np.add.at(first, G.el, -G.weights * dlog * g)
    second = np.zeros(G.n)
    sq = 0.5 * G.weights * np.abs(dlog) ** 2
    np.add.at(second, G.ej, sq)
    np.add.at(second, G.el, sq)
    return -psi * (first / rho + second)


def graph_laplacian_wave(G: Graph, psi, h: float = 1.0) -> np.ndarray:
    """Nonlinear graph Laplacian acting on a wave state.

    The per-edge principal angle of Psi_j conj(Psi_l) is already the phase
    difference (S_j - S_l)/h of the Psi = sqrt(rho) exp(i S / h) convention,
    so h does not enter the assembly.
    """
    psi = np.asarray(psi, dtype=complex)
    rho, dlog = _edge_log_diffs(G, psi)
    return _laplacian_from_edge_dlog(G, psi, rho, dlog)


def plane_wave_residual(G: Graph, k, A=None, h: float = 1.0) -> float:
    """Sup-norm residual of i dPsi/dt = -1/2 Lap_G Psi for a plane wave.

    ``k`` is the wave vector (one entry per torus dimension) and must be
    commensurate with the torus; mu = |k|^2 / 2.  The per-edge phase
    differences are taken along the minimal torus displacement between
    neighbors (the smooth branch of the plane-wave phase), so the
    dispersion relation is exact for every commensurate k.
    """
    if G.torus_dims is None or G.coords is None or G.delta_x is None:
        raise ConfigError("plane waves need a torus graph with coordinates")
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if len(k) != len(G.torus_dims):
        raise ConfigError("wave vector dimension mismatch")
    sides = np.array(G.torus_dims) * G.delta_x
    for ki, di, side in zip(k, G.torus_dims, sides):
        cycles = ki * side / (2 * np.pi)
        if abs(cycles - round(cycles)) > 1e-9:
            raise IncommensurateWaveNumber(
                f"k={ki:g} spans {cycles:g} periods around a side of {di} nodes"
            )
    if A is None:
        A = 1.0 / np.sqrt(G.n)
    psi = A * np.exp(1j * (G.coords @ k))
    rho = np.abs(psi) ** 2
    # minimal displacement across each edge (wrap edges move by -dx, not
    # +(side - dx)), giving the unambiguous phase difference k . disp
    disp = G.coords[G.ej] - G.coords[G.el]
    disp -= sides * np.round(disp / sides)
    dlog = 1j * (disp @ k)
    mu = 0.5 * float(k @ k)
    resid = mu * psi + 0.5 * _laplacian_from_edge_dlog(G, psi, rho, dlog)
    return float(np.abs(resid).max())
