"""The cut-matching game on the subdivision graph.

Each round projects a random vector through the implicit flow matrix, picks
sources and targets among the active split nodes, routes them with
:func:`route_flow` and records the routed pairs as the next matching.  Cuts
returned by the router move from the active set ``A`` into ``R``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, InstanceTooSmall, InvariantViolation
from .graph import MultiGraph, induced_subgraph, respects_subdivision, subdivide
from .params import Params
from .spectral import (MatchingRound, find_source_target_sets, project_power,
                       sample_unit_vector)
from .unitflow import flow_to_matching, route_flow

CERTIFIED = "certified"
BALANCED = "balanced"
UNBALANCED = "unbalanced"


@dataclass
class GameState:
    """Mutable state of one game; ``alive`` marks ``A_t`` inside ``V u X_E``."""

    ge: object
    params: Params
    alive: np.ndarray
    matchings: list = field(default_factory=list)
    t: int = 0
    ledger: np.ndarray = None
    trace: list = field(default_factory=list)
    too_small: bool = False
    dense_F: np.ndarray = None
    psi: list = field(default_factory=list)

    @classmethod
    def start(cls, G: MultiGraph, params: Params, oracle: bool = False):
        ge = subdivide(G)
        st = cls(ge=ge, params=params, alive=np.ones(G.n + G.m, dtype=bool),
                 ledger=np.zeros(2 * G.m, dtype=np.int64))
        if oracle:
            from .oracles import DEFAULT_CAP
            if G.m > DEFAULT_CAP:
                raise InputError(f"oracle tracing needs m <= {DEFAULT_CAP}")
            st.dense_F = np.eye(G.m)
            st.psi.append(st.potential())
        return st

    @property
    def removed(self) -> np.ndarray:
        return ~self.alive

    @property
    def active_split(self) -> np.ndarray:
        return self.alive[self.ge.n:]

    def vol_removed(self) -> int:
        return int(self.ge.g_e.degrees[~self.alive].sum())

    def guard(self) -> float:
        return self.ge.m / (self.params.guard * self.params.Z)

    def potential(self) -> float:
        from .oracles import dense_W_and_potential
        act = np.flatnonzero(self.active_split)
        if len(act) == 0:
            return 0.0
        return dense_W_and_potential(self.dense_F, act, self.params.d)[1]

    def max_cumulative_flow(self) -> int:
        return int(self.ledger.max()) if len(self.ledger) else 0


@dataclass
class CutMatchingOutcome:
    """Result of a game: ``case`` plus the cut sides in base-graph ids."""

    case: str
    a_side: np.ndarray
    r_side: np.ndarray
    rounds: int
    vol_removed: int
    state: GameState = field(repr=False)
    too_small: bool = False

    @property
    def trace(self):
        return self.state.trace

    def summary(self) -> dict:
        return {"case": self.case, "rounds": self.rounds,
                "a_size": int(len(self.a_side)), "r_size": int(len(self.r_side)),
                "vol_removed": self.vol_removed, "too_small": self.too_small}


def step(state: GameState, rng: np.random.Generator, check: bool = False) -> GameState:
    """Play one round and return the (mutated) state.

    Raises
    ------
    InstanceTooSmall
        If fewer than ``params.rst_min`` split nodes are active.
    """
    p = state.params
    ge = state.ge
    n, m = ge.n, ge.m
    act_mask = state.active_split
    k = int(act_mask.sum())
    if k < p.rst_min:
        raise InstanceTooSmall(f"{k} active split nodes, need {p.rst_min}")
    r = sample_unit_vector(m, rng)
    proj = project_power(state.matchings, act_mask, r, p.d)
    sets = find_source_target_sets(proj.values, proj.nodes, min_k=p.rst_min, m=m)
    if check:
        from .oracles import rst_violations
        bad = rst_violations(proj.values, proj.nodes, sets)
        if bad:
            raise InvariantViolation("source/target sets: " + "; ".join(bad))

    sub, ids, eids = induced_subgraph(ge.g_e, state.alive)
    local = np.full(n + m, -1, dtype=np.int64)
    local[ids] = np.arange(len(ids))
    left = local[n + sets.a_left]
    right = local[n + sets.a_right]
    res = route_flow(sub, left, right, p, check=check)

    cut_local = res.cut
    in_cut = np.zeros(sub.n, dtype=bool)
    in_cut[cut_local] = True
    survivors = left[~in_cut[left]]
    pairs = flow_to_matching(sub, res.state, survivors, right)
    if pairs:
        arr = ids[np.asarray(pairs, dtype=np.int64)] - n
        M = MatchingRound(arr[:, 0], arr[:, 1], t=state.t + 1)
    else:
        M = MatchingRound.from_pairs([], t=state.t + 1)

    flows = np.abs(np.asarray(res.state.flow, dtype=np.int64))
    if len(flows) and flows.max() > p.c:
        raise InvariantViolation("routed flow exceeds the edge capacity")
    state.ledger[eids] += flows
    state.matchings.append(M)
    state.alive[ids[cut_local]] = False
    state.t += 1
    if check and not respects_subdivision(ge, state.alive):
        raise InvariantViolation("(A, R) does not respect the subdivision")
    if state.dense_F is not None:
        from .oracles import dense_lazy_matrix
        N = dense_lazy_matrix(M, m, p.d)
        state.dense_F = N @ state.dense_F @ N
        state.psi.append(state.potential())
    rec = {"t": state.t, "k_t": k, "a_left": int(len(sets.a_left)),
           "a_right": int(len(sets.a_right)), "eta": float(sets.eta),
           "sum_u2": float(np.dot(proj.values, proj.values)),
           "cut_size": int(len(cut_local)), "vol_R": state.vol_removed(),
           "max_edge_flow": int(flows.max()) if len(flows) else 0,
           "matched": len(M), "router_rounds": len(res.rounds),
           "max_cumulative_flow": state.max_cumulative_flow(),
           "congestion_bound": p.c * state.t}
    if state.psi:
        rec["psi"] = state.psi[-1]
    state.trace.append(rec)
    return state


def cut_matching(G: MultiGraph, params: Params, rng=None, oracle: bool = False,
                 check: bool = False, trace_sink=None) -> CutMatchingOutcome:
    """Run the cut-matching game on a connected multigraph.

    Rounds continue while ``vol(R) <= m / (guard * Z)`` and ``t < T``.
    The outcome is ``certified`` when no cut was ever found, ``balanced``
    when the removed volume passed the guard and ``unbalanced`` otherwise.
    If the active set falls below the source/target minimum the game stops
    early and the same mapping is applied to the current ``(A, R)``.

    Parameters
    ----------
    rng : numpy Generator, int seed or None (uses ``params.seed``)
    oracle : bool
        Track the dense flow matrix and the potential per round (small m).
    trace_sink : callable taking one dict, optional
        Receives every round record as it is produced.

    Raises
    ------
    InputError
        If ``G`` is disconnected or the parameters are invalid.
    """
    if not G.is_connected():
        raise InputError("cut-matching needs a connected graph")
    params.validate(G.m)
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(params.seed if rng is None else int(rng))
    state = GameState.start(G, params, oracle=oracle)
    guard = state.guard()
    vol_r = 0
    while vol_r <= guard and state.t < params.T:
        try:
            step(state, rng, check=check)
        except InstanceTooSmall:
            state.too_small = True
            break
        vol_r = state.vol_removed()
        if trace_sink is not None:
            trace_sink(state.trace[-1])
    n = G.n
    a_side = np.flatnonzero(state.alive[:n])
    r_side = np.flatnonzero(~state.alive[:n])
    if vol_r > guard:
        case = BALANCED
    elif len(r_side) == 0 and vol_r == 0:
        case = CERTIFIED
    else:
        case = UNBALANCED
    return CutMatchingOutcome(case, a_side, r_side, state.t, vol_r, state,
                              too_small=state.too_small)


def trace_lines(records) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
