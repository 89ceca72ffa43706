"""Bounded-height push-relabel (Unit-Flow) and the multi-round router.

All flow quantities are integers.  A :class:`FlowState` stores one flow value
per edge, oriented from the edge's first endpoint to its second; self-loops
never carry flow.  Vertices can be switched off through ``alive`` so that one
graph object serves all the shrinking subgraphs of a routing run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, InvariantViolation
from .graph import MultiGraph, vertex_mask


class FlowState:
    """Source mass, preflow, labels and sink capacities on one graph.

    ``mass[v]`` is ``f(v) = delta[v] + net inflow`` over live edges; it is
    maintained incrementally by the routines in this module.
    """

    def __init__(self, G: MultiGraph, delta, sinks, cap: int, labels=None,
                 flow=None, alive=None):
        n, m = G.n, G.m
        self.G = G
        self.cap = int(cap)
        self.delta = [int(x) for x in delta]
        self.sinks = [int(x) for x in sinks]
        if len(self.delta) != n or len(self.sinks) != n:
            raise InputError("delta and sinks must have one entry per vertex")
        self.labels = [0] * n if labels is None else [int(x) for x in labels]
        self.flow = [0] * m if flow is None else [int(x) for x in flow]
        self.alive = [True] * n if alive is None else [bool(x) for x in alive]
        self.last_cut = None
        self.recompute_mass()

    @classmethod
    def for_sources(cls, G: MultiGraph, sources, sinks, cap: int):
        """One unit of source mass per source, sink capacity 1 per sink."""
        src = vertex_mask(G.n, sources)
        snk = vertex_mask(G.n, sinks)
        if np.any(src & snk):
            raise InputError("sources and sinks must be disjoint")
        return cls(G, src.astype(int), snk.astype(int), cap)

    def copy(self) -> "FlowState":
        st = FlowState.__new__(FlowState)
        st.G, st.cap = self.G, self.cap
        st.delta, st.sinks = list(self.delta), list(self.sinks)
        st.labels, st.flow = list(self.labels), list(self.flow)
        st.alive, st.mass = list(self.alive), list(self.mass)
        st.last_cut = self.last_cut
        return st

    def recompute_mass(self):
        e = self.G.edges
        mass = np.array(self.delta, dtype=np.int64)
        if len(e):
            f = np.array(self.flow, dtype=np.int64)
            alive = np.array(self.alive, dtype=bool)
            live = alive[e[:, 0]] & alive[e[:, 1]] & (e[:, 0] != e[:, 1])
            np.add.at(mass, e[live, 1], f[live])
            np.subtract.at(mass, e[live, 0], f[live])
        self.mass = mass.tolist()

    def excess(self, v: int) -> int:
        return max(self.mass[v] - self.sinks[v], 0)

    def flow_between(self, u: int, v: int) -> int:
        """Net flow from ``u`` to ``v`` summed over parallel live edges."""
        indptr, nbr, eid, sgn = self.G.csr_lists
        total = 0
        for p in range(indptr[u], indptr[u + 1]):
            if nbr[p] == v:
                total += sgn[p] * self.flow[eid[p]]
        return total

    def live_edge_mask(self) -> np.ndarray:
        e = self.G.edges
        alive = np.array(self.alive, dtype=bool)
        return alive[e[:, 0]] & alive[e[:, 1]]


@dataclass
class LevelCut:
    """Bookkeeping of one level-cut sweep."""

    i_star: int
    z1: int
    vol: int
    m: int
    h: int
    s_tilde: list
    cut: list
    labels: list = field(default=None, repr=False)
    alive: list = field(default=None, repr=False)

    @property
    def bound(self) -> float:
        return 5.0 * math.log2(2 * self.m) / self.h * self.vol if self.m > 0 else 0.0


def _live_m(state: FlowState) -> int:
    return int(np.count_nonzero(state.live_edge_mask()))


def _live_degree(state: FlowState, v: int, loops) -> int:
    indptr, nbr, _, _ = state.G.csr_lists
    alive = state.alive
    return loops[v] + sum(1 for p in range(indptr[v], indptr[v + 1]) if alive[nbr[p]])


def check_valid(state: FlowState, h: int, solution: bool = False) -> list:
    """Return the violated state clauses (empty list when the state is valid).

    Checks capacity, nonnegative ``f(v)``, the label-gap rule, saturation of
    labelled vertices and, with ``solution``, that unlabelled-by-``h``
    vertices hold no excess.
    """
    G, c = state.G, state.cap
    problems = []
    e = G.edges
    lab = state.labels
    for i in np.flatnonzero(state.live_edge_mask()).tolist():
        u, v = int(e[i, 0]), int(e[i, 1])
        f = state.flow[i]
        if u == v:
            if f != 0:
                problems.append(f"self-loop {i} carries flow")
            continue
        if abs(f) > c:
            problems.append(f"edge {i} over capacity")
        if lab[u] > lab[v] + 1 and f != c:
            problems.append(f"edge {i}: label gap {lab[u]}>{lab[v]}+1 but not saturated")
        if lab[v] > lab[u] + 1 and -f != c:
            problems.append(f"edge {i}: label gap {lab[v]}>{lab[u]}+1 but not saturated")
    for v in range(G.n):
        if not state.alive[v]:
            continue
        fv = state.mass[v]
        if fv < 0:
            problems.append(f"vertex {v} has negative mass")
        if lab[v] >= 1 and fv < state.sinks[v]:
            problems.append(f"vertex {v} labelled but unsaturated")
        if solution and lab[v] < h and fv > state.sinks[v]:
            problems.append(f"vertex {v} below height {h} keeps excess")
        if not 0 <= lab[v] <= h:
            problems.append(f"vertex {v} label out of range")
    return problems


def unit_flow(G: MultiGraph, h: int, state: FlowState, check: bool = False):
    """Run bounded-height push-relabel on the live part of ``G``.

    The active vertex with the smallest label is processed next; it pushes
    one unit along an admissible arc (residual capacity, label exactly one
    lower) or raises its label by one.  A vertex stops being active once its
    label reaches ``h``.

    Returns ``(state, S)`` where ``S`` is empty when all mass was routed and
    otherwise the level cut of :func:`level_cut`.  ``state`` is mutated.

    Raises
    ------
    InputError
        When ``check`` is set and the initial state is not valid.
    """
    if state.G is not G:
        raise InputError("state belongs to a different graph")
    if h < 1:
        raise InputError("height must be at least 1")
    if check:
        bad = check_valid(state, h)
        if bad:
            raise InputError("invalid initial state: " + "; ".join(bad[:3]))
    indptr, nbr, eid, sgn = G.csr_lists
    fe, lab, mass, T, alive = state.flow, state.labels, state.mass, state.sinks, state.alive
    c = state.cap
    cur = list(indptr[:-1])

    # buckets[L] holds the active vertices with label L; ``lo`` never exceeds
    # the smallest nonempty bucket because pushes only activate label L-1
    buckets = [[] for _ in range(h)]
    topped = False
    lo = h
    for v in range(G.n):
        if alive[v]:
            if lab[v] >= h:
                topped = True
            elif mass[v] > T[v]:
                buckets[lab[v]].append(v)
                if lab[v] < lo:
                    lo = lab[v]

    pushes = relabels = 0
    while lo < h:
        b = buckets[lo]
        if not b:
            lo += 1
            continue
        L = lo
        v = b[-1]
        target = L - 1
        p, end = cur[v], indptr[v + 1]
        while p < end:
            u = nbr[p]
            if lab[u] == target and alive[u] and sgn[p] * fe[eid[p]] < c:
                break
            p += 1
        if p < end:
            cur[v] = p
            if check and mass[u] > T[u]:
                raise InvariantViolation(f"push into active vertex {u}")
            fe[eid[p]] += sgn[p]
            mass[v] -= 1
            mass[u] += 1
            pushes += 1
            if mass[u] > T[u]:
                buckets[target].append(u)
                lo = target
            if mass[v] <= T[v]:
                b.pop()
        else:
            b.pop()
            cur[v] = indptr[v]
            lab[v] = L + 1
            relabels += 1
            if L + 1 < h:
                buckets[L + 1].append(v)
            else:
                topped = True
        if check:
            bad = check_valid(state, h)
            if bad:
                raise InvariantViolation("state invalid after a step: " + bad[0])

    state.stats = {"pushes": pushes, "relabels": relabels}
    if not topped:
        state.last_cut = None
        return state, []
    S = level_cut(G, state, h)
    return state, S


def level_cut(G: MultiGraph, state: FlowState, h: int) -> list:
    """Sweep the level sets ``S_i = {l >= i}`` from ``i = h-1`` down to 1.

    Returns the first ``S_i`` whose count of edges from label ``i`` to label
    ``i-1`` is at most ``5 log2(2m)/h * vol(S_i)``, minus every non-isolated
    vertex with source mass at most 1 whose neighbors all lie outside it.
    Volumes and ``m`` refer to the live subgraph.  Records the sweep in
    ``state.last_cut``.
    """
    indptr, nbr, _, _ = G.csr_lists
    lab, alive = state.labels, state.alive
    loops = G.loops_at.tolist()
    labels = np.asarray(lab)
    live = np.asarray(alive, dtype=bool)
    top = np.flatnonzero(live & (labels >= h)).tolist()
    if not top:
        raise InputError("level cut needs a vertex at the top label")
    m_live = _live_m(state)
    slack = 5.0 * math.log2(2 * max(m_live, 1)) / h
    by_label = {}
    cand = np.flatnonzero(live & (labels >= 1) & (labels < h))
    for v in cand[np.argsort(-labels[cand], kind="stable")].tolist():
        by_label.setdefault(lab[v], []).append(v)

    S = list(top)
    vol = sum(_live_degree(state, v, loops) for v in top)
    i_star = None
    z1 = 0
    for i in range(h - 1, 0, -1):
        layer = by_label.get(i)
        if not layer:
            i_star, z1 = i, 0
            break
        S.extend(layer)
        z = 0
        for v in layer:
            vol += _live_degree(state, v, loops)
            for p in range(indptr[v], indptr[v + 1]):
                w = nbr[p]
                if alive[w] and lab[w] == i - 1:
                    z += 1
        if z <= slack * vol:
            i_star, z1 = i, z
            break
    if i_star is None:
        raise InvariantViolation("level cut: no level satisfies the sweep bound")

    cut = []
    for v in S:
        if state.delta[v] <= 1:
            has_nbr = False
            inside = False
            for p in range(indptr[v], indptr[v + 1]):
                w = nbr[p]
                if alive[w]:
                    has_nbr = True
                    if lab[w] >= i_star:
                        inside = True
                        break
            if has_nbr and not inside:
                continue
        cut.append(v)
    cut.sort()
    state.last_cut = LevelCut(i_star, z1, vol, m_live, h, sorted(S), cut,
                              labels=list(lab), alive=list(alive))
    return cut


@dataclass
class RouteFlowResult:
    """Outcome of :func:`route_flow`.

    ``kind`` is ``"feasible"`` or ``"cut"``.  ``state`` holds the final flow
    on ``G - cut`` (vertices of ``cut`` are switched off).
    """

    kind: str
    cut: np.ndarray
    state: FlowState
    f_total: int
    rounds: list = field(default_factory=list)
    level_cuts: list = field(default_factory=list)
    removed: np.ndarray = None

    @property
    def feasible(self):
        return self.kind == "feasible"


def route_flow(G: MultiGraph, a_left, a_right, params, check: bool = False) -> RouteFlowResult:
    """Route one unit from every source to distinct sinks, or find a cut.

    Repeats :func:`unit_flow` on the shrinking live graph.  After each cut
    ``S_t`` the flow on removed edges is dropped and any positive net inflow
    a survivor lost is added to its source mass, which keeps the state valid.
    When no cut appears the flow is feasible for the remaining sources.  The
    final cut also absorbs every vertex whose neighbors were all removed.

    Raises
    ------
    InputError
        Overlapping sets, or size preconditions violated in paper mode.
    InvariantViolation
        Round cap exceeded, or a paper-mode accounting bound fails.
    """
    n, m = G.n, G.m
    c, h = int(params.c), int(params.h)
    src = vertex_mask(n, a_left)
    snk = vertex_mask(n, a_right)
    if np.any(src & snk):
        raise InputError("sources and sinks must be disjoint")
    n_left, n_right = int(src.sum()), int(snk.sum())
    paper = getattr(params, "mode", "desk") == "paper"
    if paper and (24 * n_right < 5 * m or 8 * n_left > m):
        raise InputError("paper mode needs |A^r| >= 5m/24 and |A^l| <= m/8")
    state = FlowState.for_sources(G, src, snk, c)
    indptr, nbr, eid, sgn = G.csr_lists
    deg = G.degrees.tolist()
    alive = state.alive
    f_total = n_left
    removed = []
    rounds, cuts = [], []
    prev_vol = None
    cap_rounds = max(n, m) + 1
    for t in range(1, cap_rounds + 1):
        state, S = unit_flow(G, h, state, check=check)
        if S:
            cuts.append(state.last_cut)
        if not S:
            rounds.append({"round": t, "cut_size": 0, "cut_vol": 0, "f_total": f_total})
            break
        for v in S:
            alive[v] = False
        gain = {}
        for v in S:
            for p in range(indptr[v], indptr[v + 1]):
                u, e = nbr[p], eid[p]
                if alive[u]:
                    gain[u] = gain.get(u, 0) + sgn[p] * state.flow[e]
                state.flow[e] = 0
        delta_f = 0
        for u, x in gain.items():
            if x > 0:
                state.delta[u] += x
            else:
                delta_f -= x
            state.mass[u] += max(0, x) - x
        f_total += delta_f
        vol_s = sum(deg[v] for v in S)
        removed.extend(S)
        rounds.append({"round": t, "cut_size": len(S), "cut_vol": vol_s,
                       "delta_f": delta_f, "f_total": f_total})
        if paper:
            if prev_vol is not None and m >= 32 and 1000 * delta_f > 6 * prev_vol:
                raise InvariantViolation("router: injected mass exceeds 6/1000 of the last cut volume")
            if 6 * f_total > m:
                raise InvariantViolation("router: total mass exceeds m/6")
        prev_vol = vol_s
    else:
        raise InvariantViolation(f"router did not finish within {cap_rounds} rounds")

    removed_mask = np.zeros(n, dtype=bool)
    removed_mask[removed] = True
    if removed:
        # survivors whose neighbors all left become part of the cut
        adj_alive = np.zeros(n, dtype=np.int64)
        ind, nb, _, _ = G.csr
        owner = np.repeat(np.arange(n), np.diff(ind))
        np.add.at(adj_alive, owner, ~removed_mask[nb])
        has_nbr = np.diff(ind) > 0
        closure = ~removed_mask & has_nbr & (adj_alive == 0)
        for v in np.flatnonzero(closure).tolist():
            alive[v] = False
        cut_mask = removed_mask | closure
    else:
        cut_mask = removed_mask
    cut = np.flatnonzero(cut_mask)
    if paper and removed:
        if len(set(removed) & set(np.flatnonzero(snk).tolist())) > f_total:
            raise InvariantViolation("router: more sinks removed than total mass")
        if 24 * int(G.degrees[~removed_mask].sum()) < m:
            raise InvariantViolation("router: remaining volume below m/24")
    kind = "cut" if len(cut) else "feasible"
    return RouteFlowResult(kind, cut, state, f_total, rounds, cuts,
                           removed=np.array(sorted(removed), dtype=np.int64))


def flow_to_matching(G: MultiGraph, state: FlowState, sources, sinks=None) -> list:
    """Pair each live source with the sink its unit reaches.

    Peels one path per source (ascending id) along arcs with positive flow,
    stopping at the first vertex that absorbed mass.  Cycles met on the way
    are cancelled.  Returns a list of ``(source, sink)`` pairs.

    Raises
    ------
    InputError
        If a source cannot ship a unit (the flow is not feasible for it).
    """
    indptr, nbr, eid, sgn = G.csr_lists
    flow = list(state.flow)
    alive = state.alive
    absorb = [max(0, min(x, t)) for x, t in zip(state.mass, state.sinks)]
    if sinks is not None:
        ok = vertex_mask(G.n, sinks)
        absorb = [a if ok[v] else 0 for v, a in enumerate(absorb)]
    ptr = list(indptr[:-1])

    def next_arc(x):
        p, end = ptr[x], indptr[x + 1]
        while p < end:
            if alive[nbr[p]] and sgn[p] * flow[eid[p]] > 0:
                ptr[x] = p
                return p
            p += 1
        ptr[x] = end
        return -1

    pairs = []
    src = np.flatnonzero(vertex_mask(G.n, sources)).tolist()
    for s in src:
        if not alive[s]:
            continue
        path = [s]          # vertices
        arcs = []           # slot used to leave path[i]
        pos = {s: 0}
        x = s
        while not (x != s and absorb[x] > 0):
            p = next_arc(x)
            if p < 0:
                raise InputError(f"source {s} cannot ship a unit along positive flow")
            y = nbr[p]
            if y in pos:
                j = pos[y]
                for q in arcs[j:] + [p]:
                    flow[eid[q]] -= sgn[q]
                for z in path[j + 1:]:
                    del pos[z]
                del path[j + 1:]
                del arcs[j:]
                x = y
                continue
            arcs.append(p)
            path.append(y)
            pos[y] = len(path) - 1
            x = y
        for q in arcs:
            flow[eid[q]] -= sgn[q]
        absorb[x] -= 1
        pairs.append((s, x))
    return pairs
