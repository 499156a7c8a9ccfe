"""Command-line entry point.

Subcommands: simulate, ground-state, stability, dispersion, verify.  Each
takes a JSON config (strictly validated: "schema": 1 required, unknown
keys rejected) and writes its artifacts into --out.

Exit codes: 0 success, 1 config or I/O problem, 2 solver failure (partial
output is kept), 3 a verify property suite failed.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys

import numpy as np

from . import verify as verify_mod
from .energy import PotentialSpec, potentials_from_dict, load_potentials_json
from .errors import ConfigError, GraphNLSError, MaxIterations
from .dynamics import (
    IntegratorConfig,
    SystemState,
    plane_wave_residual,
    simulate,
)
from .graph import Graph, build_graph, build_path_lattice, build_torus, load_graph_json
from .ground_state import eigen_residual, solve_ground_state
from .io import load_initial_state, trajectory_summary, write_json, write_trajectory_csv
from .stability import (
    gpe_spectrum_closed_form,
    hamiltonian_matrix,
    spectrum,
    spectrum_mismatch,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3


def _require_keys(data, allowed, required, where):
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = set(required) - set(data)
    if missing:
        raise ConfigError(f"missing keys in {where}: {sorted(missing)}")


def load_config(path, command) -> dict:
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if data.get("schema") != 1:
        raise ConfigError('config must declare "schema": 1')
    if "command" in data and data["command"] != command:
        raise ConfigError(
            f"config is for command {data['command']!r}, invoked as {command!r}"
        )
    return data


def _build_graph_from_config(gspec) -> Graph:
    if not isinstance(gspec, dict):
        raise ConfigError('"graph" must be an object')
    if "file" in gspec:
        _require_keys(gspec, {"file"}, {"file"}, "graph")
        return load_graph_json(gspec["file"])
    builder = gspec.get("builder")
    if builder == "explicit":
        _require_keys(gspec, {"builder", "n", "edges", "coords"}, {"n", "edges"}, "graph")
        edges = [(int(j) - 1, int(l) - 1, float(w)) for j, l, w in gspec["edges"]]
        coords = np.asarray(gspec["coords"], float) if "coords" in gspec else None
        return build_graph(int(gspec["n"]), edges, coords=coords)
    if builder == "path":
        _require_keys(
            gspec,
            {"builder", "n", "x_min", "x_max", "weight_mode", "weight"},
            {"n", "x_min", "x_max"},
            "graph",
        )
        return build_path_lattice(
            int(gspec["n"]),
            float(gspec["x_min"]),
            float(gspec["x_max"]),
            weight_mode=gspec.get("weight_mode", "continuum"),
            weight=float(gspec.get("weight", 1.0)),
        )
    if builder == "torus":
        _require_keys(
            gspec,
            {"builder", "dims", "delta_x", "weight_mode", "weight"},
            {"dims"},
            "graph",
        )
        return build_torus(
            gspec["dims"],
            delta_x=float(gspec.get("delta_x", 1.0)),
            weight_mode=gspec.get("weight_mode", "continuum"),
            weight=float(gspec.get("weight", 1.0)),
        )
    raise ConfigError(f"unknown graph builder {builder!r}")


def _build_potentials(pspec, G: Graph) -> PotentialSpec:
    if not isinstance(pspec, dict):
        raise ConfigError('"potentials" must be an object')
    if "file" in pspec:
        _require_keys(pspec, {"file"}, {"file"}, "potentials")
        return load_potentials_json(pspec["file"], n=G.n)
    _require_keys(pspec, {"V", "W", "h"}, {"V", "W", "h"}, "potentials")
    return potentials_from_dict(pspec, n=G.n, coords=G.coords)


def _integrator_config(ispec) -> IntegratorConfig:
    allowed = {"method", "dt", "T", "newton_tol", "newton_max_iter", "output_every"}
    _require_keys(ispec, allowed, {"dt", "T"}, "integrator")
    cfg = IntegratorConfig(
        method=ispec.get("method", "implicit_midpoint"),
        dt=float(ispec["dt"]),
        T=float(ispec["T"]),
        newton_tol=float(ispec.get("newton_tol", 1e-12)),
        newton_max_iter=int(ispec.get("newton_max_iter", 50)),
        output_every=int(ispec.get("output_every", 1)),
    )
    if cfg.method not in ("implicit_midpoint", "rk4"):
        raise ConfigError(f"unknown integrator method {cfg.method!r}")
    if cfg.dt <= 0 or cfg.T <= 0 or cfg.output_every < 1:
        raise ConfigError("dt, T must be positive and output_every >= 1")
    return cfg


def _initial_state(data, G: Graph, h: float) -> SystemState:
    if not isinstance(data, dict):
        raise ConfigError('"initial" must be an object')
    if "file" in data:
        _require_keys(data, {"file"}, {"file"}, "initial")
        try:
            with open(data["file"]) as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read initial state: {exc}") from exc
    state = load_initial_state(data, h)
    if state.rho.shape != (G.n,):
        raise ConfigError(
            f"initial state has {state.rho.shape[0]} nodes, graph has {G.n}"
        )
    return state


def cmd_simulate(cfg_path, out_dir, seed) -> int:
    data = load_config(cfg_path, "simulate")
    _require_keys(
        data,
        {"schema", "command", "graph", "potentials", "initial", "integrator", "seed"},
        {"graph", "potentials", "initial", "integrator"},
        "config",
    )
    G = _build_graph_from_config(data["graph"])
    spec = _build_potentials(data["potentials"], G)
    state = _initial_state(data["initial"], G, spec.h)
    icfg = _integrator_config(data["integrator"])
    traj = simulate(G, spec, state, icfg)
    write_trajectory_csv(os.path.join(out_dir, "trajectory.csv"), traj)
    write_json(os.path.join(out_dir, "summary.json"), trajectory_summary(traj))
    if traj.error is not None:
        print(f"simulate: integrator failed: {traj.error}", file=sys.stderr)
        return EXIT_SOLVER
    print(
        f"simulate: {len(traj)} snapshots to t={traj.times[-1]:g}, "
        f"energy drift {trajectory_summary(traj)['max_energy_drift']:.3g}"
    )
    return EXIT_OK


def _worker_count() -> int:
    raw = os.environ.get("GRAPH_NLS_THREADS", "")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"GRAPH_NLS_THREADS={raw!r} is not an integer")
        if value < 1:
            raise ConfigError("GRAPH_NLS_THREADS must be >= 1")
        return value
    return min(4, os.cpu_count() or 1)


def _solve_one_ground_state(G, pdict, h, tol, max_iter, init):
    spec = potentials_from_dict({**pdict, "h": h}, n=G.n, coords=G.coords)
    try:
        res = solve_ground_state(G, spec, tol=tol, max_iter=max_iter, init=init)
        failed = None
    except MaxIterations as exc:
        res, failed = exc.result, str(exc)
    entry = {
        "h": h,
        "rho_g": res.rho_g,
        "nu": res.nu,
        "energy": res.energy,
        "kkt_residual": res.kkt_residual,
        "eigen_residual": eigen_residual(G, spec, res),
        "iterations": res.iterations,
        "unique": res.unique,
    }
    if failed is not None:
        entry["error"] = failed
    return entry


def cmd_ground_state(cfg_path, out_dir, seed) -> int:
    data = load_config(cfg_path, "ground-state")
    _require_keys(
        data,
        {"schema", "command", "graph", "potentials", "h_values", "tol",
         "max_iter", "init", "seed"},
        {"graph", "potentials"},
        "config",
    )
    G = _build_graph_from_config(data["graph"])
    pspec = data["potentials"]
    if not isinstance(pspec, dict):
        raise ConfigError('"potentials" must be an object')
    if "file" in pspec:
        _require_keys(pspec, {"file"}, {"file"}, "potentials")
        try:
            with open(pspec["file"]) as f:
                pspec = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read potentials: {exc}") from exc
    _require_keys(pspec, {"V", "W", "h"}, {"V", "W"}, "potentials")
    h_values = data.get("h_values")
    if h_values is None:
        if "h" not in pspec:
            raise ConfigError('give "h" in potentials or "h_values" in the config')
        h_values = [pspec["h"]]
    h_values = [float(h) for h in h_values]
    if any(h <= 0 for h in h_values):
        raise ConfigError("h values must be positive")
    tol = float(data.get("tol", 1e-10))
    max_iter = int(data.get("max_iter", 10**6))
    init = np.asarray(data["init"], float) if "init" in data else None
    pdict = {"V": pspec["V"], "W": pspec["W"]}

    results = []
    failed = False
    workers = min(_worker_count(), len(h_values))
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_solve_one_ground_state, G, pdict, h, tol, max_iter, init)
                for h in h_values
            ]
            results = [f.result() for f in futures]
    else:
        results = [
            _solve_one_ground_state(G, pdict, h, tol, max_iter, init) for h in h_values
        ]
    for entry in results:
        write_json(os.path.join(out_dir, f"ground_state_h{entry['h']:g}.json"), entry)
        if "error" in entry:
            failed = True
            print(f"ground-state: h={entry['h']:g}: {entry['error']}", file=sys.stderr)
        else:
            print(
                f"ground-state: h={entry['h']:g} energy={entry['energy']:.12g} "
                f"nu={entry['nu']:.12g} kkt={entry['kkt_residual']:.3g} "
                f"iters={entry['iterations']}"
            )
    write_json(os.path.join(out_dir, "ground_state.json"), {"results": results})
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_stability(cfg_path, out_dir, seed) -> int:
    data = load_config(cfg_path, "stability")
    _require_keys(
        data,
        {"schema", "command", "graph", "potentials", "rho_g", "tol", "seed"},
        {"graph", "potentials"},
        "config",
    )
    G = _build_graph_from_config(data["graph"])
    spec = _build_potentials(data["potentials"], G)
    rho_spec = data.get("rho_g", "solve")
    if rho_spec == "uniform":
        rho_g = np.full(G.n, 1.0 / G.n)
    elif rho_spec == "solve":
        try:
            rho_g = solve_ground_state(
                G, spec, tol=float(data.get("tol", 1e-10))
            ).rho_g
        except MaxIterations as exc:
            print(f"stability: ground-state solve failed: {exc}", file=sys.stderr)
            return EXIT_SOLVER
    elif isinstance(rho_spec, list):
        rho_g = np.asarray(rho_spec, float)
    else:
        raise ConfigError('"rho_g" must be "uniform", "solve" or a density list')

    try:
        report = spectrum(hamiltonian_matrix(G, spec, rho_g))
    except GraphNLSError as exc:
        print(f"stability: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    out = {
        "rho_g": rho_g,
        "eigenvalues": [[v.real, v.imag] for v in report.eigenvalues],
        "classification": report.classification,
        "bifurcation_modes": [],
    }
    # closed-form cross-check only in the exactly solvable case
    W_diag = np.diag(np.diag(spec.W))
    is_gpe = (
        not spec.V.any()
        and np.array_equal(spec.W, W_diag)
        and np.ptp(np.diag(spec.W)) == 0.0
        and np.allclose(rho_g, 1.0 / G.n)
    )
    if is_gpe:
        alpha = float(spec.W[0, 0])
        closed = gpe_spectrum_closed_form(G, alpha, spec.h)
        gap = spectrum_mismatch(report.eigenvalues, closed.eigenvalues)
        out["bifurcation_modes"] = closed.bifurcation_modes
        out["closed_form"] = {
            "alpha": alpha,
            "eigenvalues": [[v.real, v.imag] for v in closed.eigenvalues],
            "max_mismatch": gap,
            "bifurcation_modes": closed.bifurcation_modes,
            "laplacian_eigenvalues": closed.laplacian_eigenvalues,
        }
    write_json(os.path.join(out_dir, "spectrum.json"), out)
    print(f"stability: {report.classification}, |Re| max "
          f"{np.abs(report.eigenvalues.real).max():.3g}")
    return EXIT_OK


def cmd_dispersion(cfg_path, out_dir, seed) -> int:
    data = load_config(cfg_path, "dispersion")
    _require_keys(
        data,
        {"schema", "command", "graph", "h", "modes", "seed"},
        {"graph"},
        "config",
    )
    G = _build_graph_from_config(data["graph"])
    if G.torus_dims is None:
        raise ConfigError("dispersion needs a torus graph")
    h = float(data.get("h", 1.0))
    dims = G.torus_dims
    modes = data.get("modes", "all")
    if modes == "all":
        grids = np.meshgrid(*[np.arange(d) for d in dims], indexing="ij")
        mode_list = np.stack([g.ravel() for g in grids], axis=1)
    else:
        mode_list = np.asarray(modes, int)
        if mode_list.ndim != 2 or mode_list.shape[1] != len(dims):
            raise ConfigError(f'"modes" must be a list of {len(dims)}-vectors')
    rows = []
    worst = 0.0
    for m in mode_list:
        k = 2.0 * np.pi * m / (np.asarray(dims) * G.delta_x)
        resid = plane_wave_residual(G, k, h=h)
        worst = max(worst, resid)
        rows.append([*m, *k, 0.5 * float(k @ k), resid])
    header = (
        [f"m_{i+1}" for i in range(len(dims))]
        + [f"k_{i+1}" for i in range(len(dims))]
        + ["mu", "residual"]
    )
    from .io import atomic_write_text, format_float

    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(x) for x in row))
    atomic_write_text(os.path.join(out_dir, "dispersion.csv"), "\n".join(lines) + "\n")
    print(f"dispersion: {len(rows)} modes, worst residual {worst:.3g}")
    return EXIT_OK


def cmd_verify(cfg_path, out_dir, seed) -> int:
    tolerances = None
    if cfg_path is not None:
        data = load_config(cfg_path, "verify")
        _require_keys(
            data, {"schema", "command", "suites", "seed", "tolerances"}, set(), "config"
        )
        suites = data.get("suites")
        if suites is not None:
            unknown = set(suites) - set(verify_mod.SUITES)
            if unknown:
                raise ConfigError(f"unknown verify suites: {sorted(unknown)}")
        tolerances = data.get("tolerances")
        if tolerances is not None:
            unknown = set(tolerances) - set(verify_mod.SUITES)
            if unknown:
                raise ConfigError(f"unknown suites in tolerances: {sorted(unknown)}")
        if seed is None:
            seed = data.get("seed")
    else:
        suites = None
    report = verify_mod.run_suites(
        suites, seed=0 if seed is None else int(seed), tolerances=tolerances
    )
    for check in report["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        print(
            f"{status} {check['name']}: worst {check['worst']:.3g} "
            f"(tol {check['tolerance']:g})"
        )
    write_json(os.path.join(out_dir, "verify.json"), report)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="graph-nls",
        description="Hamiltonian Schrodinger dynamics on weighted graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "simulate": cmd_simulate,
        "ground-state": cmd_ground_state,
        "stability": cmd_stability,
        "dispersion": cmd_dispersion,
        "verify": cmd_verify,
    }
    for name in commands:
        p = sub.add_parser(name)
        p.add_argument(
            "--config",
            required=(name != "verify"),
            default=None,
            help="JSON config file",
        )
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="RNG seed")
    args = parser.parse_args(argv)
    try:
        os.makedirs(args.out, exist_ok=True)
        return commands[args.command](args.config, args.out, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GraphNLSError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
