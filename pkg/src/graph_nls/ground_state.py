"""Ground states: minimize E(sqrt(rho)) over the probability simplex.

The objective is (h^2/8) I(rho) + V(rho) + W(rho).  The solver is mirror
descent with multiplicative updates, which keeps iterates strictly
interior (matching the Fisher term's blow-up at the boundary), plus
Armijo backtracking on the step size.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import MaxIterations
from .energy import (
    PotentialSpec,
    check_interior,
    fisher_gradient,
    fisher_information,
    interaction_energy,
    potential_energy,
)
from .dynamics import graph_laplacian_wave
from .graph import Graph

__all__ = [
    "GroundStateResult",
    "ground_energy",
    "ground_gradient",
    "solve_ground_state",
    "eigen_residual",
]

ARMIJO_SLOPE = 1e-4


class NonConvexWarning(UserWarning):
    """Interaction matrix has negative eigenvalues: result may be a
    non-minimizing critical point."""


@dataclass
class GroundStateResult:
    rho_g: np.ndarray
    nu: float
    energy: float
    kkt_residual: float
    iterations: int
    unique: bool = True  # False when W is not positive semidefinite


def ground_energy(G: Graph, spec: PotentialSpec, rho) -> float:
    rho = check_interior(rho, G.n)
    return (
        spec.h**2 / 8.0 * fisher_information(G, rho)
        + potential_energy(spec, rho)
        + interaction_energy(spec, rho)
    )


def ground_gradient(G: Graph, spec: PotentialSpec, rho) -> np.ndarray:
    rho = check_interior(rho, G.n)
    return spec.h**2 / 8.0 * fisher_gradient(G, rho) + spec.V + spec.W @ rho


def _kkt(grad, rho):
    nu = float(grad @ rho)
    return nu, float(np.abs(grad - nu).max())


# per-coordinate cap on the log-density movement of one multiplicative step
LOG_STEP_CAP = 30.0
# absolute floor keeping transient iterates representable; the minimizer
# itself never reaches it (the Fisher term diverges at the boundary)
RHO_FLOOR = 1e-290


def _mirror_phase(G, spec, rho, tol, max_iter):
    """Mirror descent rho <- rho exp(-eta grad) / Z until KKT tol or stall.

    Armijo backtracking on eta keeps the energy strictly decreasing; near
    the minimizer the energy differences fall below roundoff long before
    the KKT residual does, at which point the loop stalls and hands over
    to the Newton polish.
    """
    energy = ground_energy(G, spec, rho)
    grad = ground_gradient(G, spec, rho)
    nu, res = _kkt(grad, rho)
    eta = 1.0 / (1.0 + np.abs(grad).max())
    it = 0
    while res > tol and it < max_iter:
        it += 1
        step_dir = grad - nu
        accepted = False
        while eta >= 1e-18:
            z = np.clip(-eta * step_dir, -LOG_STEP_CAP, LOG_STEP_CAP)
            new = rho * np.exp(z - z.max())
            new = np.maximum(new, RHO_FLOOR)
            new /= new.sum()
            new_energy = ground_energy(G, spec, new)
            pred = ARMIJO_SLOPE * min(float(grad @ (new - rho)), 0.0)
            if new_energy <= energy + pred and new_energy < energy:
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            break  # energy flat to machine precision
        rho, energy = new, new_energy
        grad = ground_gradient(G, spec, rho)
        nu, res = _kkt(grad, rho)
        eta *= 1.5
    return rho, energy, nu, res, it


def _newton_phase(G, spec, rho, nu, tol, max_iter=200):
    """Damped Newton on the interior stationarity system in log coordinates.

    Solves grad E(rho) = nu, sum rho = 1 for (log rho, nu).  The residual
    stays computable to machine precision even when energy differences do
    not, so this drives the KKT residual below tolerances the line search
    cannot reach.
    """
    from .energy import fisher_hessian

    n = G.n
    u = np.log(rho)
    it = 0
    res = np.inf
    for it in range(1, max_iter + 1):
        rho = np.exp(u)
        grad = ground_gradient(G, spec, np.maximum(rho, RHO_FLOOR))
        nu_hat, res = _kkt(grad, rho / rho.sum())
        if res <= tol:
            break
        F = np.concatenate([grad - nu, [rho.sum() - 1.0]])
        H = spec.h**2 / 8.0 * fisher_hessian(G, rho) + spec.W
        J = np.zeros((n + 1, n + 1))
        J[:n, :n] = H * rho[None, :]  # d grad / d u = H diag(rho)
        J[:n, n] = -1.0
        J[n, :n] = rho
        try:
            d = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            d = np.linalg.lstsq(J, -F, rcond=None)[0]
        du = np.clip(d[:n], -20.0, 20.0)
        dnu = d[n]
        f0 = np.abs(F).max()
        t = 1.0
        while t > 1e-12:
            rt = np.exp(u + t * du)
            if rt.min() <= 0 or not np.isfinite(rt).all():
                t *= 0.5
                continue
            gt = ground_gradient(G, spec, np.maximum(rt, RHO_FLOOR))
            Ft = np.concatenate([gt - (nu + t * dnu), [rt.sum() - 1.0]])
            if np.abs(Ft).max() < f0:
                break
            t *= 0.5
        u += t * du
        nu += t * dnu
    rho = np.exp(u)
    rho /= rho.sum()
    return rho, res, it


def solve_ground_state(
    G: Graph,
    spec: PotentialSpec,
    tol: float = 1e-10,
    max_iter: int = 10**6,
    init=None,
) -> GroundStateResult:
    """Minimize over the simplex down to KKT residual max|grad - nu| <= tol.

    Globalization is mirror descent with multiplicative updates (iterates
    remain interior by construction); if the line search stalls at machine
    precision of the energy before the tolerance is met, a Newton polish
    on the stationarity conditions finishes the job.  With positive
    semidefinite W the objective is strictly convex and the result is the
    unique ground state; otherwise only a critical point (flagged via
    ``unique=False`` and NonConvexWarning).
    """
    if init is None:
        rho = np.full(G.n, 1.0 / G.n)
    else:
        rho = check_interior(init, G.n)
        rho = rho / rho.sum()
    unique = True
    w_min = float(np.linalg.eigvalsh(spec.W).min()) if spec.W.any() else 0.0
    if w_min < -1e-12:
        unique = False
        warnings.warn(
            "interaction matrix is not positive semidefinite; "
            "returning a critical point, not necessarily the ground state",
            NonConvexWarning,
        )

    rho, energy, nu, res, it = _mirror_phase(G, spec, rho, tol, max_iter)
    if res > tol:
        rho, res, polish_it = _newton_phase(G, spec, rho, nu, tol)
        it += polish_it
        energy = ground_energy(G, spec, rho)
        grad = ground_gradient(G, spec, rho)
        nu, res = _kkt(grad, rho)
    if res > tol:
        raise MaxIterations(
            f"KKT residual {res:.3g} > {tol:.3g} after {it} iterations",
            result=GroundStateResult(rho, nu, energy, res, it, unique),
        )
    return GroundStateResult(
        rho_g=rho,
        nu=nu,
        energy=energy,
        kkt_residual=res,
        iterations=it,
        unique=unique,
    )


def eigen_residual(G: Graph, spec: PotentialSpec, result: GroundStateResult) -> float:
    """Sup-norm residual of the nonlinear eigenvalue problem at sqrt(rho_g)."""
    psi = np.sqrt(np.asarray(result.rho_g, dtype=float)).astype(complex)
    rho = np.abs(psi) ** 2
    lhs = result.nu * psi
    rhs = (
        -spec.h**2 / 2.0 * graph_laplacian_wave(G, psi, h=spec.h)
        + spec.V * psi
        + psi * (spec.W @ rho)
    )
    return float(np.abs(lhs - rhs).max())
