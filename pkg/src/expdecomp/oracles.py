"""Dense and exhaustive reference implementations.

Everything here is written independently of the pipeline code paths: flow
matrices are built as explicit matrices, cut quantities by enumeration, and
flow audits by rescanning edges.  Sizes are capped so that enumeration stays
cheap; the caps are keyword arguments.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import InputError
from .graph import MultiGraph, subdivide, vertex_mask

DEFAULT_CAP = 64
ENUM_CAP = 20
ESTIMATE_CAP = 14


def _cap(value, cap, what):
    if value > cap:
        raise InputError(f"{what} = {value} exceeds the oracle cap {cap}")


# ---------------------------------------------------------------- matrices

def dense_matching_matrix(M, m: int) -> np.ndarray:
    P = np.eye(m)
    for a, b in M.pairs():
        P[a, a] = P[b, b] = 0.0
        P[a, b] = P[b, a] = 1.0
    return P


def dense_lazy_matrix(M, m: int, d: int) -> np.ndarray:
    return (d - 1) / d * np.eye(m) + dense_matching_matrix(M, m) / d


def dense_centering(active, m: int) -> np.ndarray:
    idx = np.flatnonzero(vertex_mask(m, active))
    D = np.zeros((m, m))
    if len(idx):
        D[np.ix_(idx, idx)] = np.eye(len(idx)) - 1.0 / len(idx)
    return D


def dense_flow_matrix(matchings, m: int, d: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """``F_t`` from ``F_0 = I`` and ``F_{i} = N_i F_{i-1} N_i``."""
    _cap(m, cap, "m")
    F = np.eye(m)
    for M in matchings:
        N = dense_lazy_matrix(M, m, d)
        F = N @ F @ N
    return F


def dense_W_and_potential(F: np.ndarray, active, d: int, cap: int = DEFAULT_CAP):
    """Return ``(W, psi)`` with ``W = (D F D)^d`` and ``psi = tr(W^2)``."""
    m = F.shape[0]
    _cap(m, cap, "m")
    D = dense_centering(active, m)
    W = np.linalg.matrix_power(D @ F @ D, d)
    return W, float(np.trace(W @ W))


def potential_by_eigenvalues(F: np.ndarray, active, d: int) -> float:
    """``tr(W^2)`` through the spectrum of ``D F D``: ``sum lambda^(2d)``."""
    D = dense_centering(active, F.shape[0])
    lam = np.linalg.eigvalsh(D @ F @ D)
    return float(np.sum(lam ** (2 * d)))


def lazy_walk_lambda(d: int) -> float:
    """The constant with ``N^(4d) = I - lambda (I - M)`` for a matching ``M``."""
    return 0.5 - 0.5 * (1 - 2 / d) ** (4 * d)


def top_singular_value(F: np.ndarray, active) -> float:
    D = dense_centering(active, F.shape[0])
    return float(np.max(np.abs(np.linalg.eigvalsh(D @ F @ D)), initial=0.0))


# ------------------------------------------------------- source/target sets

def rst_violations(values, nodes, sets) -> list:
    """Literal evaluation of the four source/target-set clauses.

    ``values`` may be floats or Fractions; with Fractions every comparison is
    exact.  Returns the list of failed clauses.
    """
    u = dict(zip([int(x) for x in nodes], list(values)))
    k = len(u)
    left = [int(x) for x in sets.a_left]
    right = [int(x) for x in sets.a_right]
    eta = sets.eta
    bad = []
    if set(left) & set(right):
        bad.append("sets overlap")
    if not set(left) <= set(u) or not set(right) <= set(u):
        bad.append("set outside the active nodes")
        return bad
    if left and right:
        lo = max(u[x] for x in left) <= eta <= min(u[x] for x in right)
        hi = min(u[x] for x in left) >= eta >= max(u[x] for x in right)
        if not (lo or hi):
            bad.append("(1) eta does not separate")
    if 2 * len(right) < k:
        bad.append("(2) too few targets")
    if 8 * len(left) > k:
        bad.append("(2) too many sources")
    for x in left:
        if 9 * (u[x] - eta) ** 2 < u[x] ** 2:
            bad.append(f"(3) source {x} too close to eta")
            break
    total = sum(v * v for v in u.values())
    if 80 * sum(u[x] ** 2 for x in left) < total:
        bad.append("(4) sources carry too little energy")
    return bad


def check_rst_conditions(values, nodes, sets) -> bool:
    return not rst_violations(values, nodes, sets)


# -------------------------------------------------------------- enumeration

def _subsets(k: int) -> np.ndarray:
    """All ``2^k`` subsets of ``range(k)`` as a boolean matrix."""
    codes = np.arange(1 << k, dtype=np.int64)
    return ((codes[:, None] >> np.arange(k)) & 1).astype(bool)


def _adjacency(G: MultiGraph) -> np.ndarray:
    A = np.zeros((G.n, G.n), dtype=np.int64)
    for u, v in G.edges.tolist():
        if u != v:
            A[u, v] += 1
            A[v, u] += 1
    return A


def _crossing_counts(W: np.ndarray, members: np.ndarray, subsets: np.ndarray):
    """``w(S, V - S)`` for every ``S`` given as rows of ``subsets`` over ``members``."""
    X = subsets.astype(W.dtype)
    out_all = W[members].sum(axis=1)                 # total weight at each member
    inside = np.einsum("si,ij,sj->s", X, W[np.ix_(members, members)], X)
    return X @ out_all - inside


def brute_force_min_conductance(G: MultiGraph, cap: int = ENUM_CAP):
    """Exact ``min |E(S, V-S)| / vol(S)`` over ``0 < vol(S) <= m``.

    Returns ``(Fraction, witness mask)`` or ``(None, None)`` when no set
    qualifies (for instance a single vertex).
    """
    _cap(G.n, cap, "n")
    if G.n < 2:
        return None, None
    X = _subsets(G.n)[1:-1]
    W = _adjacency(G)
    cross = _crossing_counts(W, np.arange(G.n), X)
    vol = X.astype(np.int64) @ G.degrees.astype(np.int64)
    ok = (vol > 0) & (vol <= G.m)
    if not ok.any():
        return None, None
    ratio = np.where(ok, cross / np.where(ok, vol, 1), np.inf)
    best = ratio.min()
    cands = np.flatnonzero(ratio <= best * (1 + 1e-9) + 1e-15)
    exact = [(Fraction(int(cross[i]), int(vol[i])), i) for i in cands]
    value, i = min(exact)
    return value, X[i].copy()


def _as_fraction(x):
    return x if isinstance(x, Fraction) else Fraction(x)


def near_expansion_min(G: MultiGraph, A, cap: int = ENUM_CAP):
    """Exact ``min E(S, V-S)/vol(S)`` over ``S in A`` with ``0 < vol S <= vol(A)/2``."""
    members = np.flatnonzero(vertex_mask(G.n, A))
    _cap(len(members), cap, "|A|")
    if len(members) == 0:
        return None
    X = _subsets(len(members))[1:]
    W = _adjacency(G)
    deg = G.degrees.astype(np.int64)[members]
    cross = _crossing_counts(W, members, X)
    vol = X.astype(np.int64) @ deg
    ok = (vol > 0) & (2 * vol <= deg.sum())
    if not ok.any():
        return None
    return min(Fraction(int(c), int(v)) for c, v in zip(cross[ok], vol[ok]))


def check_near_expander(G: MultiGraph, A, phi, cap: int = ENUM_CAP) -> bool:
    """Every ``S`` inside ``A`` with ``vol S <= vol(A)/2`` has ratio ``>= phi``."""
    best = near_expansion_min(G, A, cap)
    return best is None or best >= _as_fraction(phi)


def _weights(H):
    if isinstance(H, MultiGraph):
        return _adjacency(H)
    W = np.asarray(H, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise InputError("weight matrix must be square")
    return W


def edge_expansion_min(H, A, theta=Fraction(1, 2), split=None, cap: int = ENUM_CAP):
    """``min w(S, V-S)/|S|`` over ``S`` in ``A`` with ``0 < |S| <= theta |A|``.

    With ``split`` (a node mask) only sets whose split nodes have no edge
    leaving ``S`` are considered.  Returns None when no set qualifies.
    """
    W = _weights(H)
    members = np.flatnonzero(vertex_mask(W.shape[0], A))
    _cap(len(members), cap, "|A|")
    if len(members) == 0:
        return None
    X = _subsets(len(members))[1:]
    size = X.sum(axis=1)
    theta = _as_fraction(theta)
    ok = size * theta.denominator <= theta.numerator * len(members)
    cross = _crossing_counts(W, members, X)
    if split is not None:
        # weight from the split nodes of S to the outside of S must vanish
        sp = vertex_mask(W.shape[0], split)[members]
        Xf = X.astype(W.dtype)
        Xsf = (X & sp).astype(W.dtype)
        out_all = W[members].sum(axis=1)
        leak = Xsf @ out_all - np.einsum("si,ij,sj->s", Xsf, W[np.ix_(members, members)], Xf)
        ok &= np.isclose(leak, 0) if W.dtype.kind == "f" else (leak == 0)
    if not ok.any():
        return None
    if W.dtype.kind == "f":
        return float(np.min(cross[ok] / size[ok]))
    return min(Fraction(int(c), int(s)) for c, s in zip(cross[ok], size[ok]))


def check_weak_strong_edge_expander(H, A, theta, phi, weak: bool = False,
                                    split=None, cap: int = ENUM_CAP) -> bool:
    """Literal check of the (weak or strong) near edge-expander definitions.

    ``weak=True`` expects ``H`` to be a :class:`SubdivisionGraph` (or passes
    ``split``) and restricts to sets with no split node on the boundary and
    ``|S| <= |A|/2``; otherwise sets up to ``theta |A|`` are checked.
    """
    if weak:
        if hasattr(H, "g_e"):
            split = H.role
            H = H.g_e
        if split is None:
            raise InputError("weak check needs the split-node roles")
        best = edge_expansion_min(H, A, Fraction(1, 2), split=split, cap=cap)
    else:
        best = edge_expansion_min(H, A, theta, cap=cap)
    if best is None:
        return True
    return best >= (_as_fraction(phi) if isinstance(best, Fraction) else float(phi))


def check_near_edge_expander(G, A, phi, cap: int = ENUM_CAP) -> bool:
    """Near edge-expansion: sets up to half of ``A`` expand at rate ``phi``."""
    return check_weak_strong_edge_expander(G, A, Fraction(1, 2), phi, cap=cap)


def check_expansion_estimate(F: np.ndarray, active, cap: int = ESTIMATE_CAP,
                             threshold: float = 0.01) -> bool:
    """If the centered block of ``F`` has top singular value at most 1/100,
    verify that every ``S`` in ``active`` with ``|S| <= 6/7 |active|`` sends
    weight at least ``|S|/100`` out of ``S``.  Vacuously true otherwise.
    """
    idx = np.flatnonzero(vertex_mask(F.shape[0], active))
    _cap(len(idx), cap, "|active|")
    if top_singular_value(F, idx) > threshold:
        return True
    best = edge_expansion_min(F, idx, Fraction(6, 7), cap=cap)
    return best is None or best >= threshold - 1e-12


# --------------------------------------------------------------- congestion

def congestion_audit(ledger, t: int, c: int) -> dict:
    """Cumulative per-edge flow after ``t`` rounds must stay within ``c t``."""
    led = np.asarray(ledger, dtype=np.int64)
    bound = c * t
    mx = int(led.max()) if led.size else 0
    mean = float(led.mean()) if led.size else 0.0
    return {"ok": bool(mx <= bound), "max": mx, "bound": bound,
            "max_utilization": mx / bound if bound else 0.0,
            "mean_utilization": mean / bound if bound else 0.0}


def embed_flow_matrix(matchings, m: int, d: int, cap: int = 16):
    """Explicit multicommodity routing of ``F_t`` over the matching edges.

    Edge ``j`` of the returned list is one matched pair of one round.  The
    routing is built round by round: for ``N F`` a matched node ``x`` sends
    ``1/d`` of its own commodity to its partner, which forwards it along the
    partner's existing routing; for ``(N F) N`` each commodity moves ``1/d``
    of what it holds at a matched node across the new edge.  Flows of one
    commodity in opposite directions on one edge are netted.

    Returns ``(edges, P, F, loads_after_left)`` where ``P[j, x]`` is the net
    flow of commodity ``x`` on edge ``j`` in the edge's stored orientation,
    ``F`` the matrix routed, and ``loads_after_left`` the per-round maximum
    edge load right after the ``N F`` half-step.
    """
    _cap(m, cap, "m")
    a, b = (d - 1) / d, 1 / d
    edges = []
    P = np.zeros((0, m))
    F = np.eye(m)
    half_loads = []
    for M in matchings:
        partner = M.partner(m)
        new = M.pairs()
        # N F: commodity x keeps a of its routing and takes b of its partner's
        P = a * P + b * P[:, partner]
        Pn = np.zeros((len(new), m))
        for j, (x, y) in enumerate(new):
            Pn[j, x] += b
            Pn[j, y] -= b
        P = np.vstack([P, Pn])
        edges.extend(new)
        F = a * F + b * F[partner]
        half_loads.append(float(np.abs(P).sum(axis=1).max()) if len(P) else 0.0)
        # (N F) N: mass of commodity z sitting at x moves b across the edge
        for j, (x, y) in enumerate(new):
            P[len(P) - len(new) + j] += b * (F[:, x] - F[:, y])
        F = a * F + b * F[:, partner]
    return edges, P, F, half_loads


def embedding_divergence_error(edges, P, F) -> float:
    """Max deviation between the routed and demanded net flow per commodity."""
    m = F.shape[0]
    net = np.zeros((m, m))          # net[z, v] = inflow - outflow of commodity z at v
    for j, (x, y) in enumerate(edges):
        net[:, y] += P[j]
        net[:, x] -= P[j]
    want = F - np.eye(m)
    return float(np.abs(net - want).max()) if m else 0.0


# ------------------------------------------------------------- flow audits

def audit_flow_state(G: MultiGraph, state, require_feasible: bool = True) -> list:
    """Rescan edges: capacities, antisymmetry by construction, conservation."""
    bad = []
    alive = np.asarray(state.alive, dtype=bool)
    mass = np.asarray(state.delta, dtype=np.int64).copy()
    for i, (u, v) in enumerate(G.edges.tolist()):
        f = state.flow[i]
        if not (alive[u] and alive[v]) or u == v:
            if f != 0:
                bad.append(f"edge {i} outside the live graph carries flow")
            continue
        if abs(f) > state.cap:
            bad.append(f"edge {i} exceeds capacity")
        mass[v] += f
        mass[u] -= f
    for v in np.flatnonzero(alive).tolist():
        if mass[v] < 0:
            bad.append(f"vertex {v} negative mass")
        if require_feasible and mass[v] > state.sinks[v]:
            bad.append(f"vertex {v} keeps excess {mass[v] - state.sinks[v]}")
        if mass[v] != state.mass[v]:
            bad.append(f"vertex {v} mass bookkeeping mismatch")
    return bad


def audit_level_cut(G: MultiGraph, cut_info, delta=None) -> list:
    """Recount the sweep certificate from the recorded label snapshot."""
    bad = []
    lab = np.asarray(cut_info.labels)
    alive = np.asarray(cut_info.alive, dtype=bool)
    h, i = cut_info.h, cut_info.i_star
    e = G.edges
    live = alive[e[:, 0]] & alive[e[:, 1]]
    m_live = int(live.sum())
    s_tilde = alive & (lab >= i)
    deg = np.bincount(e[live, 0], minlength=G.n) + np.bincount(
        e[live & (e[:, 0] != e[:, 1]), 1], minlength=G.n)
    vol = int(deg[s_tilde].sum())
    lu, lv = lab[e[:, 0]], lab[e[:, 1]]
    z1 = int(np.count_nonzero(live & (((lu == i) & (lv == i - 1)) | ((lv == i) & (lu == i - 1)))))
    if z1 * h > 5 * math.log2(2 * max(m_live, 1)) * vol + 1e-9:
        bad.append(f"level cut bound violated: z1={z1}, vol={vol}, h={h}")
    cut = np.zeros(G.n, dtype=bool)
    cut[cut_info.cut] = True
    if np.any(alive & (lab >= h) & ~cut):
        bad.append("top-label vertex outside the cut")
    if np.any(cut & (lab == 0)):
        bad.append("label-0 vertex inside the cut")
    if np.any(cut & ~s_tilde):
        bad.append("cut leaves the level set")
    return bad


def audit_route_flow(G: MultiGraph, a_left, a_right, params, res, pairs=None) -> list:
    """Check a router outcome against its contract.

    Feasible or not, the final flow must be feasible on ``G - cut`` and every
    surviving source must have shipped its unit.  For cuts additionally:
    conductance at most ``50/c``, remaining volume at least ``m/26``, the
    closure property and the level-cut certificate of every round.
    """
    bad = list(audit_flow_state(G, res.state, require_feasible=True))
    n, m = G.n, G.m
    cut = np.zeros(n, dtype=bool)
    cut[res.cut] = True
    src = vertex_mask(n, a_left)
    for s in np.flatnonzero(src & ~cut).tolist():
        if res.state.mass[s] != 0 or res.state.delta[s] < 1:
            bad.append(f"source {s} did not ship its unit")
    if pairs is not None:
        sinks = vertex_mask(n, a_right)
        ends = [y for _, y in pairs]
        if len(set(ends)) != len(ends):
            bad.append("two sources matched to one sink")
        if any(not sinks[y] for y in ends):
            bad.append("matched to a non-sink")
        if sorted(x for x, _ in pairs) != np.flatnonzero(src & ~cut).tolist():
            bad.append("matching does not cover the surviving sources")
    if cut.any():
        deg = G.degrees
        vs, vt = int(deg[cut].sum()), int(deg[~cut].sum())
        cross = int(np.count_nonzero(cut[G.edges[:, 0]] != cut[G.edges[:, 1]]))
        if min(vs, vt) > 0 and cross * params.c > 50 * min(vs, vt):
            bad.append(f"cut conductance {cross}/{min(vs, vt)} above 50/c")
        if 26 * vt < m:
            bad.append(f"remaining volume {vt} below m/26 (m={m})")
        W = _adjacency(G)
        for v in range(n):
            nb = W[v] > 0
            if not nb.any():
                continue
            if np.all(cut[nb]) and not cut[v]:
                bad.append(f"vertex {v} has all neighbors in the cut but is outside")
            if not np.any(cut[nb]) and cut[v]:
                bad.append(f"vertex {v} has no neighbor in the cut but is inside")
        for info in res.level_cuts:
            bad.extend(audit_level_cut(G, info))
    return bad


# ------------------------------------------------------- subdivision facts

def subdivision_cuts(ge):
    """All node sets of ``G_E`` that respect the subdivision, as masks."""
    n = ge.n
    e = ge.base.edges
    out = []
    for code in range(1 << n):
        reg = np.array([(code >> i) & 1 for i in range(n)], dtype=bool)
        a, b = reg[e[:, 0]], reg[e[:, 1]]
        free = np.flatnonzero(a != b)
        for fcode in range(1 << len(free)):
            x = a & b
            for j, idx in enumerate(free):
                if (fcode >> j) & 1:
                    x = x.copy()
                    x[idx] = True
            out.append(np.concatenate([reg, x]))
    return out


def subdivision_report(G: MultiGraph) -> dict:
    """Exhaustively test the three subdivision facts on one small graph.

    Clause 1: ``vol_G(S n V) <= vol_GE(S) <= 3 vol_G(S n V)``.
    Clause 2: ``Phi_G(S n V) <= 3 Phi_GE(S)`` when both are defined.
    Clause 3: for every respecting ``A``, with ``phi`` the exact weak near
    edge-expansion of ``A`` in ``G_E`` (capped at 1), ``A n V`` is a near
    ``phi/4``-expander in ``G``.
    """
    ge = subdivide(G)
    n = G.n
    H = ge.g_e
    WH = _adjacency(H)
    WG = _adjacency(G)
    dG, dH = G.degrees.astype(np.int64), H.degrees.astype(np.int64)
    rep = {"cuts": 0, "clause1": 0, "clause2": 0, "clause3": 0, "clause3_tested": 0,
           "failures": []}
    for S in subdivision_cuts(ge):
        rep["cuts"] += 1
        reg = S[:n]
        vg, vh = int(dG[reg].sum()), int(dH[S].sum())
        if not vg <= vh <= 3 * vg:
            rep["clause1"] += 1
            rep["failures"].append(("clause1", S.nonzero()[0].tolist()))
        if 0 < reg.sum() < n and 0 < S.sum() < len(S):
            cg = int(WG[np.ix_(reg, ~reg)].sum())
            ch = int(WH[np.ix_(S, ~S)].sum())
            mg = min(vg, int(dG[~reg].sum()))
            mh = min(vh, int(dH[~S].sum()))
            if mg > 0 and mh > 0 and Fraction(cg, mg) > 3 * Fraction(ch, mh):
                rep["clause2"] += 1
                rep["failures"].append(("clause2", S.nonzero()[0].tolist()))
        if S.any() and S.sum() <= ENUM_CAP:
            phi = edge_expansion_min(H, S, Fraction(1, 2), split=ge.role)
            phi = Fraction(1) if phi is None else min(phi, Fraction(1))
            rep["clause3_tested"] += 1
            if not check_near_expander(G, reg, phi / 4):
                rep["clause3"] += 1
                rep["failures"].append(("clause3", S.nonzero()[0].tolist()))
    return rep
