"""Weighted graphs and the discrete calculus operators built on them.

A graph stores one record per undirected edge in canonical orientation
(j < l, 0-based).  An *edge field* is an array with one value per stored
edge; the value for the reverse orientation is minus the stored one, so
every edge field is skew-symmetric by construction.  A *node field* is a
real array of length ``n``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    DisconnectedGraph,
    DuplicateEdge,
    NonInteriorDensity,
    NonPositiveWeight,
    SelfLoop,
)

__all__ = [
    "Graph",
    "build_graph",
    "build_path_lattice",
    "build_torus",
    "grad",
    "divergence",
    "inner_product",
    "edge_means",
    "load_graph_json",
    "save_graph_json",
]


@dataclass(frozen=True)
class Graph:
    """Undirected, connected, positively weighted graph.

    Attributes
    ----------
    n : node count.
    ej, el : canonical endpoints of each edge, ``ej[e] < el[e]``.
    weights : positive edge weights.
    coords : optional node coordinates, shape (n, d).
    torus_dims, delta_x : set by :func:`build_torus`; used by the
        dispersion checks to test wave-number commensurability.
    """

    n: int
    ej: np.ndarray
    el: np.ndarray
    weights: np.ndarray
    coords: np.ndarray | None = None
    torus_dims: tuple[int, ...] | None = None
    delta_x: float | None = None
    sqrt_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "sqrt_weights", np.sqrt(self.weights))

    @property
    def m(self) -> int:
        return len(self.weights)

    def neighbors(self, j: int) -> np.ndarray:
        mask_j = self.ej == j
        mask_l = self.el == j
        return np.concatenate([self.el[mask_j], self.ej[mask_l]])

    def edge_index(self, j: int, l: int) -> int:
        """Index of edge (j, l); raises KeyError if absent."""
        a, b = (j, l) if j < l else (l, j)
        hits = np.nonzero((self.ej == a) & (self.el == b))[0]
        if len(hits) == 0:
            raise KeyError(f"no edge ({j}, {l})")
        return int(hits[0])


def _check_connected(n, ej, el):
    adj = [[] for _ in range(n)]
    for a, b in zip(ej, el):
        adj[a].append(b)
        adj[b].append(a)
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return bool(seen.all())


def build_graph(n, weighted_edges, coords=None, **meta) -> Graph:
    """Validate and build a graph from ``(j, l, weight)`` triples (0-based)."""
    if n < 1:
        raise ConfigError("node count must be positive")
    ej, el, w = [], [], []
    seen = set()
    for j, l, weight in weighted_edges:
        j, l = int(j), int(l)
        if j == l:
            raise SelfLoop(f"self loop at node {j}")
        if not (0 <= j < n and 0 <= l < n):
            raise ConfigError(f"edge ({j}, {l}) out of range for n={n}")
        if weight <= 0:
            raise NonPositiveWeight(f"edge ({j}, {l}) has weight {weight}")
        a, b = (j, l) if j < l else (l, j)
        if (a, b) in seen:
            raise DuplicateEdge(f"edge ({a}, {b}) appears twice")
        seen.add((a, b))
        ej.append(a)
        el.append(b)
        w.append(float(weight))
    ej = np.asarray(ej, dtype=np.intp)
    el = np.asarray(el, dtype=np.intp)
    w = np.asarray(w, dtype=float)
    if not _check_connected(n, ej, el):
        raise DisconnectedGraph(f"graph on {n} nodes is not connected")
    if coords is not None:
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        if coords.shape[0] != n:
            coords = coords.T
        if coords.shape[0] != n:
            raise ConfigError("coords must provide one point per node")
    return Graph(n=n, ej=ej, el=el, weights=w, coords=coords, **meta)


def build_path_lattice(n, x_min, x_max, weight_mode="continuum", weight=1.0) -> Graph:
    """Path graph with equally spaced coordinates on [x_min, x_max].

    ``continuum`` mode sets every edge weight to 1/dx^2, which is the
    normalization under which the lattice operators converge to their
    continuum counterparts.  ``constant`` uses the given ``weight``.
    """
    if n < 2:
        raise ConfigError("path lattice needs at least 2 nodes")
    if not x_min < x_max:
        raise ConfigError("need x_min < x_max")
    xs = np.linspace(x_min, x_max, n)
    dx = xs[1] - xs[0]
    if weight_mode == "continuum":
        w = 1.0 / dx**2
    elif weight_mode == "constant":
        w = float(weight)
    else:
        raise ConfigError(f"unknown weight_mode {weight_mode!r}")
    edges = [(j, j + 1, w) for j in range(n - 1)]
    return build_graph(n, edges, coords=xs.reshape(-1, 1), delta_x=float(dx))


def build_torus(dims, delta_x=1.0, weight_mode="continuum", weight=1.0) -> Graph:
    """Periodic lattice with identical degree and edge weight at every node."""
    dims = tuple(int(d) for d in dims)
    if any(d < 3 for d in dims):
        raise ConfigError("each torus dimension must be >= 3 (else multi-edges)")
    if delta_x <= 0:
        raise ConfigError("delta_x must be positive")
    if weight_mode == "continuum":
        w = 1.0 / delta_x**2
    elif weight_mode == "constant":
        w = float(weight)
    else:
        raise ConfigError(f"unknown weight_mode {weight_mode!r}")
    n = int(np.prod(dims))
    idx = np.arange(n).reshape(dims)
    edges = []
    for axis in range(len(dims)):
        rolled = np.roll(idx, -1, axis=axis)
        for a, b in zip(idx.ravel(), rolled.ravel()):
            edges.append((int(a), int(b), w))
    grids = np.meshgrid(*[np.arange(d) * delta_x for d in dims], indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=1)
    return build_graph(
        n, edges, coords=coords, torus_dims=dims, delta_x=float(delta_x)
    )


def edge_means(G: Graph, rho: np.ndarray) -> np.ndarray:
    """Per-edge density (rho_j + rho_l) / 2."""
    return 0.5 * (rho[G.ej] + rho[G.el])


def grad(G: Graph, S: np.ndarray) -> np.ndarray:
    """Potential edge field sqrt(w_jl) (S_j - S_l) in canonical orientation."""
    S = np.asarray(S, dtype=float)
    if S.shape != (G.n,):
        raise ConfigError(f"node field has shape {S.shape}, expected ({G.n},)")
    return G.sqrt_weights * (S[G.ej] - S[G.el])


def divergence(G: Graph, rho: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Divergence of the flux rho*v, per node.

    Sign convention: div(rho grad S) = L(rho) S with L positive
    semidefinite, so the operator is the negative of the continuum
    divergence.  The result always sums to zero over the nodes.
    """
    if np.min(rho) <= 0:
        raise NonInteriorDensity("density must be strictly positive")
    if len(v) != G.m:
        raise ConfigError("edge field length mismatch")
    flux = G.sqrt_weights * v * edge_means(G, rho)
    out = np.zeros(G.n)
    np.add.at(out, G.ej, flux)
    np.add.at(out, G.el, -flux)
    return out


def inner_product(G: Graph, rho: np.ndarray, v: np.ndarray, u: np.ndarray) -> float:
    """Weighted inner product (v, u)_rho = sum_e v_e u_e g_e over edges."""
    if np.min(rho) <= 0:
        raise NonInteriorDensity("density must be strictly positive")
    if len(v) != G.m or len(u) != G.m:
        raise ConfigError("edge field length mismatch")
    return float(np.sum(v * u * edge_means(G, rho)))


def load_graph_json(path) -> Graph:
    """Read the on-disk graph format (1-based node indices)."""
    with open(path) as f:
        data = json.load(f)
    try:
        n = int(data["n"])
        edges = [(int(j) - 1, int(l) - 1, float(w)) for j, l, w in data["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed graph file {path}: {exc}") from exc
    coords = data.get("coords")
    return build_graph(n, edges, coords=coords)


def save_graph_json(G: Graph, path) -> None:
    data = {
        "n": G.n,
        "edges": [
            [int(j) + 1, int(l) + 1, float(w)]
            for j, l, w in zip(G.ej, G.el, G.weights)
        ],
    }
    if G.coords is not None:
        data["coords"] = G.coords.tolist()
    with open(path, "w") as f:
        json.dump(data, f)
