"""Polarization reconstruction: edge weights, pruning, phase
synchronization, and least-squares signal recovery.

The pipeline turns intensity measurements into a weighted graph whose edge
weights estimate the products conj(<x, phi_i>) <x, phi_j>, prunes
unreliable or poorly connected parts, synchronizes the vertex phases
through a connection Laplacian, and recovers the signal by solving the
resulting linear system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import PolarizationGraph, build_graph
from .masks import OMEGA, MaskEnsemble
from .measure import MeasurementSet

__all__ = [
    "RecoveryError",
    "RecoveryParams",
    "RecoveryResult",
    "WeightedPolarizationGraph",
    "polarize",
    "edge_weights",
    "prune_reliability",
    "prune_connectivity",
    "angular_sync",
    "assemble_and_solve",
    "relative_error",
    "recover",
]

# Synchronization eigenvector coordinates below this magnitude get phase 1
# and a flag; their least-squares rows carry near-zero magnitude anyway.
SYNC_ZERO_TOL = 1e-12

# Rank threshold for the least-squares solve, relative to the largest
# singular value.
LSTSQ_RCOND = 1e-10

# While-condition of connectivity pruning. "laplacian" thresholds the
# algebraic connectivity lambda_2(D - A); "second" thresholds
# 1 - lambda_2(normalized adjacency); "abs" uses
# 1 - max_{i != 1}|lambda_i(normalized adjacency)|, which also penalizes
# near-bipartite structure that no sweep cut can repair.
CONNECTIVITY_GAP_MODE = "laplacian"


class RecoveryError(RuntimeError):
    """A pipeline stage could not produce usable output."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


@dataclass(frozen=True)
class RecoveryParams:
    alpha: float = 0.99
    tau: float = 0.1
    clamp_negative: bool = True

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    estimate: np.ndarray
    surviving_vertices: int
    final_gap: float
    pruning_iterations: int
    success: bool
    failed_stage: str | None = None


@dataclass(eq=False)
class WeightedPolarizationGraph:
    """Surviving subgraph with complex edge-weight estimates.

    Vertices are integers k*M + m. Each unordered edge is stored once under
    the key (u, v) with u < v; the value approximates
    conj(<x, phi_u>) <x, phi_v>, and the reverse orientation is its
    conjugate.
    """

    K: int
    M: int
    vertices: tuple[int, ...]
    weights: dict[tuple[int, int], complex]
    magnitudes: dict[int, float]

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)


def polarize(intensity0, intensity1, intensity2):
    """Cube-root-of-unity weighted combination of an edge's three
    intensities; recovers conj(<x, phi_i>) <x, phi_j> exactly on clean
    data."""
    return (np.asarray(intensity0, dtype=complex)
            + OMEGA * np.asarray(intensity1)
            + OMEGA ** 2 * np.asarray(intensity2)) / 3.0


def edge_weights(meas: MeasurementSet, graph: PolarizationGraph,
                 clamp_negative: bool = True) -> WeightedPolarizationGraph:
    """Accumulate edge-weight estimates and vertex magnitudes.

    The tuple (k, kp, a, r, m) contributes to the edge from (k, m) to
    (kp, m + a). When both orientations of an unordered edge receive
    estimates (the k = kp case, through a and -a), the stored weight is
    their Hermitian average.
    """
    if meas.dim != graph.M or meas.K != graph.K:
        raise RecoveryError("edge_weights", "measurement and graph dimensions differ")
    if tuple(meas.a_values) != graph.A.elements:
        raise RecoveryError("edge_weights", "measurements do not cover the graph's modulation set")
    M = meas.dim
    acc: dict[tuple[int, int], complex] = {}
    cnt: dict[tuple[int, int], int] = {}
    ms = np.arange(M)
    for pi, (k, kp) in enumerate(meas.pairs):
        for ai, a in enumerate(meas.a_values):
            west = polarize(meas.edge[pi, ai, 0], meas.edge[pi, ai, 1], meas.edge[pi, ai, 2])
            us = (k * M + ms).tolist()
            vs = (kp * M + (ms + a) % M).tolist()
            for u, v, w in zip(us, vs, west.tolist()):
                if u > v:
                    u, v, w = v, u, w.conjugate()
                key = (u, v)
                if key in acc:
                    acc[key] += w
                    cnt[key] += 1
                else:
                    acc[key] = w
                    cnt[key] = 1
    weights = {key: acc[key] / cnt[key] for key in acc}
    expected = graph.n * graph.degree // 2
    if len(weights) != expected:
        raise RecoveryError("edge_weights",
                            f"expected {expected} edges, assembled {len(weights)}")
    if clamp_negative:
        mags = np.sqrt(np.maximum(meas.vertex, 0.0))
    else:
        with np.errstate(invalid="ignore"):
            mags = np.sqrt(meas.vertex)
    magnitudes = {k * M + m: float(mags[k, m]) for k in range(meas.K) for m in range(M)}
    return WeightedPolarizationGraph(graph.K, M, tuple(range(graph.n)), weights, magnitudes)


def prune_reliability(g: WeightedPolarizationGraph, alpha: float) -> WeightedPolarizationGraph:
    """Delete both endpoints of the minimum-|w| edge, floor((1-alpha)|V|)
    times, stopping early if the edge set empties. Ties resolve to the
    lexicographically smallest vertex pair."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    rounds = math.floor((1.0 - alpha) * len(g.vertices))
    verts = set(g.vertices)
    weights = dict(g.weights)
    for _ in range(rounds):
        if not weights:
            break
        (u, v), _ = min(weights.items(), key=lambda item: (abs(item[1]), item[0]))
        verts.discard(u)
        verts.discard(v)
        weights = {e: w for e, w in weights.items() if u not in e and v not in e}
    magnitudes = {v: g.magnitudes[v] for v in verts}
    return WeightedPolarizationGraph(g.K, g.M, tuple(sorted(verts)), weights, magnitudes)


def _neighbor_lists(vertices, weights):
    nbrs = {v: [] for v in vertices}
    for u, v in weights:
        nbrs[u].append(v)
        nbrs[v].append(u)
    return nbrs


def _components(vertices, nbrs):
    seen = set()
    comps = []
    for root in vertices:
        if root in seen:
            continue
        comp = {root}
        seen.add(root)
        stack = [root]
        while stack:
            cur = stack.pop()
            for nxt in nbrs[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    comp.add(nxt)
                    stack.append(nxt)
        comps.append(comp)
    return comps


def _restrict(g: WeightedPolarizationGraph, keep) -> WeightedPolarizationGraph:
    keep_set = set(keep)
    weights = {e: w for e, w in g.weights.items() if e[0] in keep_set and e[1] in keep_set}
    magnitudes = {v: g.magnitudes[v] for v in keep_set}
    return WeightedPolarizationGraph(g.K, g.M, tuple(sorted(keep_set)), weights, magnitudes)


def _largest_component(g: WeightedPolarizationGraph) -> WeightedPolarizationGraph:
    comps = _components(g.vertices, _neighbor_lists(g.vertices, g.weights))
    if len(comps) <= 1:
        return g
    comps.sort(key=lambda c: (-len(c), min(c)))
    return _restrict(g, comps[0])


def prune_connectivity(g: WeightedPolarizationGraph, tau: float,
                       gap_mode: str | None = None):
    """Remove minimum-conductance sweep cuts until the surviving subgraph's
    normalized spectral gap reaches tau.

    The working graph is restricted to its largest connected component at
    entry and after every removal, so the returned subgraph is connected.
    Returns (subgraph, rounds, final_gap); raises RecoveryError when the
    graph shrinks below two vertices before the threshold is met.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    mode = gap_mode if gap_mode is not None else CONNECTIVITY_GAP_MODE
    if mode not in ("laplacian", "second", "abs"):
        raise ValueError(f"unknown gap mode {mode!r}")
    work = _largest_component(g)
    rounds = 0
    while True:
        n = len(work.vertices)
        if n < 2 or not work.weights:
            raise RecoveryError("prune_connectivity", "connectivity unreachable: subgraph exhausted")
        index = {v: i for i, v in enumerate(work.vertices)}
        adj = np.zeros((n, n))
        for u, v in work.weights:
            adj[index[u], index[v]] = 1.0
            adj[index[v], index[u]] = 1.0
        deg = adj.sum(axis=1)
        dinv = 1.0 / np.sqrt(deg)  # connected, so every degree is positive
        normalized = adj * dinv[:, None] * dinv[None, :]
        if mode == "laplacian":
            gap = float(np.linalg.eigvalsh(np.diag(deg) - adj)[1])
        else:
            vals = np.linalg.eigvalsh(normalized)
            if mode == "second":
                gap = 1.0 - float(vals[-2])
            else:
                gap = 1.0 - float(max(abs(vals[0]), vals[-2]))
        if gap >= tau:
            return work, rounds, gap
        _, vecs = np.linalg.eigh(np.eye(n) - normalized)
        sweep_key = vecs[:, 1] * dinv
        order = np.argsort(sweep_key, kind="stable")
        vol_total = float(deg.sum())
        in_cut = np.zeros(n, dtype=bool)
        cut = 0.0
        vol = 0.0
        best_h = math.inf
        best_size = 1
        for step, vi in enumerate(order[:-1]):
            cut += deg[vi] - 2.0 * float(adj[vi, in_cut].sum())
            vol += deg[vi]
            in_cut[vi] = True
            h = cut / min(vol, vol_total - vol)
            if h < best_h:
                best_h = h
                best_size = step + 1
        drop = {work.vertices[j] for j in order[:best_size].tolist()}
        keep = [v for v in work.vertices if v not in drop]
        work = _largest_component(_restrict(work, keep))
        rounds += 1


def angular_sync(g: WeightedPolarizationGraph):
    """Per-vertex phases from the lowest eigenvector of the connection
    Laplacian on normalized nonzero edge weights.

    Returns (phases, flagged); flagged vertices had a numerically zero
    eigenvector coordinate and default to phase 1.
    """
    verts = g.vertices
    n = len(verts)
    if n == 0:
        raise RecoveryError("angular_sync", "no surviving vertices")
    index = {v: i for i, v in enumerate(verts)}
    H = np.zeros((n, n), dtype=complex)
    deg = np.zeros(n)
    for (u, v), w in g.weights.items():
        if w == 0:
            continue
        phase = w / abs(w)
        iu, iv = index[u], index[v]
        # w estimates conj(b_u) b_v, so the rank-one model b b* places
        # conj(phase) at (u, v)
        H[iu, iv] = np.conj(phase)
        H[iv, iu] = phase
        deg[iu] += 1.0
        deg[iv] += 1.0
    if not deg.any():
        raise RecoveryError("angular_sync", "all edge weights are zero")
    safe = np.where(deg > 0, deg, 1.0)
    dinv = np.where(deg > 0, 1.0 / np.sqrt(safe), 0.0)
    laplacian = np.eye(n) - H * dinv[:, None] * dinv[None, :]
    _, vecs = np.linalg.eigh(laplacian)
    u0 = vecs[:, 0]
    mags = np.abs(u0)
    flagged = frozenset(verts[i] for i in range(n) if mags[i] < SYNC_ZERO_TOL)
    phases = {
        v: (1 + 0j) if mags[i] < SYNC_ZERO_TOL else complex(u0[i] / mags[i])
        for i, v in enumerate(verts)
    }
    return phases, flagged


def assemble_and_solve(phases, magnitudes, vertices, ensemble: MaskEnsemble, *,
                       final_gap: float = 0.0, pruning_iterations: int = 0) -> RecoveryResult:
    """Least-squares estimate from magnitude * phase inner-product data on
    the surviving vertices; success requires full column rank."""
    M = ensemble.dim
    verts = sorted(vertices)
    missing = [v for v in verts if v not in phases]
    if missing:
        raise RecoveryError("assemble_and_solve", f"no phase for vertex {missing[0]}")
    ks = np.array([v // M for v in verts])
    msv = np.array([v % M for v in verts])
    y = np.array([magnitudes[v] * phases[v] for v in verts], dtype=complex)
    diags = np.stack([np.conj(mask.diag) for mask in ensemble.vertex.masks])
    rows = np.exp(-2j * np.pi * np.outer(msv, np.arange(M)) / M) / M
    system = diags[ks] * rows
    estimate, _, rank, _ = np.linalg.lstsq(system, y, rcond=LSTSQ_RCOND)
    success = int(rank) == M
    if not success:
        estimate = np.zeros(M, dtype=complex)
    return RecoveryResult(estimate, len(verts), float(final_gap),
                          int(pruning_iterations), bool(success),
                          None if success else "assemble_and_solve")


def relative_error(xhat, x) -> float:
    """Reconstruction error minimized over the unobservable global phase."""
    xhat = np.asarray(xhat, dtype=complex)
    x = np.asarray(x, dtype=complex)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("reference signal is zero")
    inner = np.vdot(x, xhat)  # <xhat, x> in the linear-in-first-slot convention
    c = 1.0 if inner == 0 else np.conj(inner) / abs(inner)
    return float(np.linalg.norm(c * xhat - x) / nx)


def recover(meas: MeasurementSet, ensemble: MaskEnsemble,
            params: RecoveryParams | None = None) -> RecoveryResult:
    """Full pipeline: edge weights -> reliability pruning -> connectivity
    pruning -> angular synchronization -> least squares.

    Stage failures are reported through success=False and failed_stage
    rather than exceptions; pruning_iterations counts reliability deletions
    plus connectivity rounds.
    """
    params = params or RecoveryParams()
    M = ensemble.dim
    zeros = np.zeros(M, dtype=complex)
    surviving = 0
    iterations = 0
    stage = "build_graph"
    try:
        if len(ensemble.modulation_set) == 0:
            raise RecoveryError(stage, "empty modulation set produces an edgeless graph")
        graph = build_graph(ensemble.vertex.count, M, ensemble.modulation_set)
        stage = "edge_weights"
        weighted = edge_weights(meas, graph, clamp_negative=params.clamp_negative)
        surviving = weighted.vertex_count
        stage = "prune_reliability"
        reliable = prune_reliability(weighted, params.alpha)
        iterations = (weighted.vertex_count - reliable.vertex_count) // 2
        surviving = reliable.vertex_count
        stage = "prune_connectivity"
        connected, rounds, gap = prune_connectivity(reliable, params.tau)
        iterations += rounds
        surviving = connected.vertex_count
        stage = "angular_sync"
        phases, _ = angular_sync(connected)
        stage = "assemble_and_solve"
        return assemble_and_solve(phases, connected.magnitudes, connected.vertices,
                                  ensemble, final_gap=gap, pruning_iterations=iterations)
    except RecoveryError as err:
        return RecoveryResult(zeros, surviving, 0.0, iterations, False,
                              failed_stage=err.stage)
