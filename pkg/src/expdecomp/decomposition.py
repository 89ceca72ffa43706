"""Trimming and the recursive decomposition driver.

``decomp`` keeps an explicit work-list of vertex sets of the original graph.
Each item is turned into ``G{A}`` (which keeps original degrees through
self-loops), split into connected components, and handed to the
cut-matching game; the game's outcome decides whether the set becomes a
cluster, is split in two, or is trimmed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .cutmatching import CERTIFIED, UNBALANCED, cut_matching
from .errors import InputError, InvariantViolation, TrimContractError
from .graph import MultiGraph, cut_size, induced_with_loops, vertex_mask
from .oracles import brute_force_min_conductance
from .params import make_params
from .unitflow import FlowState, unit_flow

BRUTE_LIMIT = 16
DENSE_EIG_LIMIT = 1500


# ----------------------------------------------------------- certification

def spectral_lower_bound(G: MultiGraph) -> float:
    """Half the second-smallest normalized-Laplacian eigenvalue, scaled.

    The adjacency keeps one diagonal unit per self-loop so row sums equal the
    degrees.  Cheeger's inequality bounds every cut's conductance from below
    by ``lambda_2 / 2``; the factor ``1 - loops/m`` converts that into a bound
    on the ``vol(S) <= m`` form of the expansion.
    """
    n = G.n
    if n < 2:
        return 1.0
    e = G.edges
    loop = G.loop_mask
    rows = np.concatenate([e[~loop, 0], e[~loop, 1], e[loop, 0]])
    cols = np.concatenate([e[~loop, 1], e[~loop, 0], e[loop, 0]])
    A = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    deg = np.asarray(G.degrees, dtype=float)
    if np.any(deg == 0):
        return 0.0
    s = 1.0 / np.sqrt(deg)
    Nrm = sp.diags(s) @ A @ sp.diags(s)
    if n <= DENSE_EIG_LIMIT:
        mu = np.linalg.eigvalsh(Nrm.toarray())
        mu2 = mu[-2]
    else:
        mu = eigsh(Nrm, k=2, which="LA", tol=1e-10, return_eigenvectors=False)
        mu2 = float(np.sort(mu)[0])
    lam2 = max(0.0, 1.0 - mu2)
    return lam2 / 2 * (1 - G.num_loops / G.m) if G.m else 1.0


def certify(G: MultiGraph):
    """``(method, value)``: exact expansion for small graphs, else a bound."""
    if G.n <= 1:
        return "trivial", 1.0
    if G.n <= BRUTE_LIMIT:
        val, _ = brute_force_min_conductance(G)
        return "brute", 1.0 if val is None else float(val)
    return "eigenvalue", float(spectral_lower_bound(G))


# ----------------------------------------------------------------- trimming

@dataclass
class TrimReport:
    kept: np.ndarray
    vol_before: int
    vol_after: int
    boundary_before: int
    boundary_after: int
    cert_method: str
    cert_value: float
    rounds: int


def trim(G: MultiGraph, A, phi: float, h: int | None = None, report: bool = False):
    """Shave ``A`` down to a set whose ``G{A'}`` expands at rate ``phi/6``.

    Every boundary edge injects ``ceil(2/phi)`` units at its endpoint inside
    ``A``, each vertex absorbs up to its degree and edges carry up to
    ``ceil(2/phi)``.  Unit-Flow runs on ``G[A]``; while it leaves mass
    stranded the level cut is removed and every new boundary edge injects
    fresh mass.

    The volume loss and boundary growth clauses are always checked; the
    expansion clause is checked exactly on at most 16 vertices and through
    the spectral bound otherwise.

    Raises
    ------
    InputError
        If ``|E(A, V-A)| > phi vol(A) / 10``.
    TrimContractError
        If a post-condition fails (typically because ``A`` was not a near
        expander to begin with).
    """
    if not 0 < phi < 1:
        raise InputError("phi must lie in (0, 1)")
    mask = vertex_mask(G.n, A)
    deg = G.degrees
    vol_a = int(deg[mask].sum())
    bnd = cut_size(G, mask)
    if 10 * bnd > phi * vol_a:
        raise InputError(f"boundary {bnd} exceeds phi*vol(A)/10 = {phi * vol_a / 10:.3f}")
    C = math.ceil(2 / phi)
    if h is None:
        h = max(2, math.ceil(40 * math.log2(2 * max(G.m, 1)) / phi))
    e = G.edges
    inside0, inside1 = mask[e[:, 0]], mask[e[:, 1]]
    delta = np.zeros(G.n, dtype=np.int64)
    np.add.at(delta, e[inside0 & ~inside1, 0], C)
    np.add.at(delta, e[inside1 & ~inside0, 1], C)
    state = FlowState(G, delta, deg, C, alive=mask)
    indptr, nbr, _, _ = G.csr_lists
    rounds = 0
    while True:
        rounds += 1
        if rounds > G.n + 1:
            raise InvariantViolation("trimming did not converge")
        state, S = unit_flow(G, h, state)
        if not S:
            break
        alive = state.alive
        for v in S:
            alive[v] = False
        for v in S:
            for p in range(indptr[v], indptr[v + 1]):
                u = nbr[p]
                if alive[u]:
                    state.delta[u] += C
        state.recompute_mass()
    kept = np.asarray(state.alive, dtype=bool)
    vol_k = int(deg[kept].sum())
    bnd_k = cut_size(G, kept) if kept.any() else 0
    if vol_k * phi < vol_a * phi - 4 * bnd - 1e-9:
        raise TrimContractError(f"trimming lost volume {vol_a - vol_k} > 4/phi * {bnd}")
    if bnd_k > 2 * bnd:
        raise TrimContractError(f"trimmed boundary {bnd_k} exceeds twice {bnd}")
    if kept.any():
        method, value = certify(induced_with_loops(G, kept))
        if value < phi / 6:
            raise TrimContractError(f"trimmed set certifies only {value:.4g} < phi/6 ({method})")
    else:
        method, value = "trivial", 1.0
    ids = np.flatnonzero(kept)
    if report:
        return TrimReport(ids, vol_a, vol_k, bnd, bnd_k, method, value, rounds)
    return ids


# -------------------------------------------------------------- decomposition

@dataclass
class Partition:
    clusters: list
    inter_cluster_edges: int
    per_cluster: list
    rounds_total: int
    seed: int
    params: dict
    events: list = field(default_factory=list)

    def labels(self, n: int) -> np.ndarray:
        lab = np.full(n, -1, dtype=np.int64)
        for i, c in enumerate(self.clusters):
            lab[c] = i
        return lab

    def to_json(self) -> dict:
        return {"clusters": [sorted(int(v) for v in c) for c in self.clusters],
                "inter_cluster_edges": int(self.inter_cluster_edges),
                "per_cluster": self.per_cluster,
                "rounds_total": int(self.rounds_total),
                "seed": int(self.seed), "params": self.params}


def count_inter_cluster_edges(G: MultiGraph, labels) -> int:
    lab = np.asarray(labels)
    e = G.edges
    return int(np.count_nonzero(lab[e[:, 0]] != lab[e[:, 1]]))


def _seed_for(seed: int, key: tuple) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def decomp(G: MultiGraph, phi: float, mode: str = "desk", seed: int = 0,
           overrides: dict | None = None, certify_clusters: bool = True,
           max_depth: int | None = None, trace_sink=None, check: bool = False) -> Partition:
    """Partition ``V`` into clusters with few edges between them.

    For every work item: take ``G{A}``; if it is disconnected queue its
    components; if the game certifies it, emit a cluster; on a balanced cut
    queue both sides; on an unbalanced outcome trim the large side, emit the
    trimmed set and queue the rest.  Components too small for the game
    (fewer split nodes than the source/target minimum) are settled by exact
    enumeration: split at the minimum-expansion cut when it is below
    ``phi``, otherwise emit.

    Parameters
    ----------
    overrides : dict, optional
        Fixed parameter values (``T``, ``Z``, ``c``, ``d``, ``h``) applied to
        every game; the rest is derived from each component's edge count.
    max_depth : int, optional
        Guard on the nesting depth; defaults to ``max(32, 4 log2(m)^2)``.

    Raises
    ------
    InvariantViolation
        When the depth guard trips.
    """
    overrides = dict(overrides or {})
    make_params(phi, max(G.m, 2), mode, seed, **overrides)   # validate early
    if max_depth is None:
        L = math.log2(max(G.m, 2))
        max_depth = max(32, math.ceil(4 * L * L))
    clusters, per_cluster, events = [], [], []
    rounds_total = 0
    work = [(np.arange(G.n), (), 0)]
    while work:
        verts, key, depth = work.pop()
        if depth > max_depth:
            raise InvariantViolation(f"decomposition depth guard {max_depth} exceeded at {key}")
        H = induced_with_loops(G, verts)
        comps = H.components()
        if len(comps) > 1:
            for i, c in reversed(list(enumerate(comps))):
                work.append((verts[c], key + (i,), depth))
            continue
        if len(verts) == 1:
            clusters.append(verts)
            continue
        params = make_params(phi, H.m, mode, seed, **overrides)
        rng = _seed_for(seed, key)
        out = cut_matching(H, params, rng, check=check, trace_sink=(
            None if trace_sink is None else
            (lambda rec, key=key: trace_sink({"item": list(key), **rec}))))
        rounds_total += out.rounds
        ev = {"item": list(key), "n": H.n, "m": H.m, "case": out.case,
              "rounds": out.rounds, "too_small": out.too_small}
        events.append(ev)
        a_side, r_side = verts[out.a_side], verts[out.r_side]
        if out.too_small and out.case == CERTIFIED and H.n <= 20:
            val, wit = brute_force_min_conductance(H)
            if val is not None and val < phi:
                ev["case"] = "enumerated_split"
                work.append((verts[~wit], key + (1,), depth + 1))
                work.append((verts[wit], key + (0,), depth + 1))
            else:
                clusters.append(verts)
            continue
        if out.case == CERTIFIED or len(a_side) == 0 or len(r_side) == 0:
            clusters.append(verts)
            continue
        if out.case == UNBALANCED:
            local_a = out.a_side
            try:
                kept = trim(H, local_a, phi)
            except (InputError, TrimContractError) as exc:
                ev["trim_fallback"] = str(exc)
                kept = None
            if kept is not None and len(kept):
                clusters.append(verts[kept])
                rest = np.ones(H.n, dtype=bool)
                rest[kept] = False
                if rest.any():
                    work.append((verts[rest], key + (1,), depth + 1))
                continue
        # balanced cut, or an unbalanced one whose trimming failed
        work.append((r_side, key + (1,), depth + 1))
        work.append((a_side, key + (0,), depth + 1))

    lab = np.full(G.n, -1, dtype=np.int64)
    for i, c in enumerate(clusters):
        if np.any(lab[c] >= 0):
            raise InvariantViolation("clusters overlap")
        lab[c] = i
    if np.any(lab < 0):
        raise InvariantViolation("clusters do not cover V")
    inter = count_inter_cluster_edges(G, lab)
    for c in clusters:
        H = induced_with_loops(G, c)
        rec = {"size": int(len(c)), "vol": int(G.degrees[c].sum())}
        if certify_clusters:
            method, value = certify(H)
            rec.update(cert_method=method, cert_value=float(value))
        per_cluster.append(rec)
    p = make_params(phi, max(G.m, 2), mode, seed, **overrides)
    return Partition([np.sort(c) for c in clusters], inter, per_cluster, rounds_total,
                     seed, p.as_dict(), events)
