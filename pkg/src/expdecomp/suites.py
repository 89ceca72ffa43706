"""Randomized oracle suites behind ``expdecomp verify``.

Each suite generates small instances from a seed, runs a pipeline component
and its oracle, and returns a list of :class:`Failure` records that carry
enough to reproduce the instance (suite name, seed, instance description).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from types import SimpleNamespace

import numpy as np

from . import oracles
from .errors import InputError, InstanceTooSmall
from .graph import MultiGraph
from .params import log2m
from .cutmatching import GameState, step
from .spectral import MatchingRound, find_source_target_sets, project_power
from .unitflow import flow_to_matching, route_flow


@dataclass
class Failure:
    suite: str
    seed: int
    instance: str
    message: str

    def __str__(self):
        return f"[{self.suite}] seed={self.seed} {self.instance}: {self.message}"


def random_matching(m: int, rng, full: bool = False) -> MatchingRound:
    """Uniform random matching; ``full`` makes it maximum (one node left if m is odd)."""
    perm = rng.permutation(m)
    pairs = m // 2 if full else int(rng.integers(0, m // 2 + 1))
    return MatchingRound(perm[0:2 * pairs:2], perm[1:2 * pairs:2])


def matching_within(nodes, rng) -> MatchingRound:
    """Maximum random matching whose pairs stay inside ``nodes``."""
    perm = rng.permutation(np.asarray(nodes))
    pairs = len(perm) // 2
    return MatchingRound(perm[0:2 * pairs:2], perm[1:2 * pairs:2])


def random_history(m: int, t: int, rng) -> list:
    return [random_matching(m, rng, full=bool(rng.random() < 0.5)) for _ in range(t)]


def random_multigraph(n: int, m: int, rng, loops: bool = True) -> MultiGraph:
    """Random connected multigraph: a random spanning tree plus extra edges."""
    order = rng.permutation(n)
    edges = [(int(order[i]), int(order[rng.integers(0, i)])) for i in range(1, n)]
    while len(edges) < m:
        u, v = rng.integers(0, n, size=2)
        if u == v and not loops:
            continue
        edges.append((int(u), int(v)))
    return MultiGraph(n, edges)


def bottleneck_instance(rng, max_n: int = 60):
    """Two random blobs joined by one or two edges; sources in the first, sinks the second.

    Returns ``(G, sources, sinks)``.  With at most ``m/8`` sources the
    router usually has to cut, which exercises the cut clauses.
    """
    n = int(rng.integers(8, max_n + 1))
    a = n // 2
    A = random_multigraph(a, int(rng.integers(a, 3 * a)), rng)
    B = random_multigraph(n - a, int(rng.integers(n - a, 3 * (n - a))), rng)
    edges = A.edges.tolist() + (B.edges + a).tolist()
    for _ in range(int(rng.integers(1, 3))):
        edges.append((int(rng.integers(a)), int(a + rng.integers(n - a))))
    G = MultiGraph(n, edges)
    ns = max(1, min(a, G.m // 8))
    return G, np.sort(rng.choice(a, size=ns, replace=False)), np.arange(a, n)


# ------------------------------------------------------------------ suites

def suite_projection(seed: int, cases: int = 5, fault: bool = False) -> list:
    out = []
    for i in range(cases):
        rng = np.random.default_rng([seed, i])
        m = int(rng.integers(2, 49))
        t = int(rng.integers(0, 6))
        d = int(rng.choice([2, 4, 8]))
        hist = random_history(m, t, rng)
        active = rng.random(m) < 0.8
        if not active.any():
            active[0] = True
        r = rng.standard_normal(m)
        got = project_power(hist, active, r, d)
        F = oracles.dense_flow_matrix(hist, m, d)
        W, _ = oracles.dense_W_and_potential(F, active, d)
        want = (W @ r)[got.nodes]
        if fault:
            want = want + 1e-3
        err = float(np.max(np.abs(got.values - want), initial=0.0))
        if err > 1e-8:
            out.append(Failure("projection", seed, f"case={i} m={m} t={t} d={d}",
                               f"max error {err:.3g}"))
    return out


def suite_matrix_identities(seed: int, cases: int = 5, fault: bool = False) -> list:
    out = []
    for i in range(cases):
        rng = np.random.default_rng([seed, 100 + i])
        m = int(rng.integers(2, 33))
        d = int(rng.choice([2, 4, 8, 16]))
        a1 = rng.random(m) < 0.8
        a2 = a1 & (rng.random(m) < 0.8)
        # the newest matching pairs nodes of the shrunken active set only
        hist = random_history(m, int(rng.integers(0, 4)), rng)
        hist.append(matching_within(np.flatnonzero(a2), rng))
        D1, D2 = oracles.dense_centering(a1, m), oracles.dense_centering(a2, m)
        N = oracles.dense_lazy_matrix(hist[-1], m, d)
        M = oracles.dense_matching_matrix(hist[-1], m)
        F = oracles.dense_flow_matrix(hist, m, d)
        if fault:
            F = F + 1e-6 * np.eye(m)
        lam = oracles.lazy_walk_lambda(d)
        checks = {
            "D^2=D": np.abs(D1 @ D1 - D1).max(),
            "ND=DN": np.abs(N @ D1 - D1 @ N).max(),
            "D2D1=D2": np.abs(D2 @ D1 - D2).max(),
            "D1D2=D2": np.abs(D1 @ D2 - D2).max(),
            "lazy power": np.abs(np.linalg.matrix_power(N, 4 * d)
                                 - (np.eye(m) - lam * (np.eye(m) - M))).max(),
            "F rows": np.abs(F.sum(axis=1) - 1).max(),
            "F symmetric": np.abs(F - F.T).max(),
        }
        tol = {"lazy power": 1e-10, "F rows": 1e-10, "F symmetric": 1e-12}
        for name, val in checks.items():
            if val > tol.get(name, 1e-12):
                out.append(Failure("identities", seed, f"case={i} m={m} d={d}",
                                   f"{name} off by {val:.3g}"))
        if lam < (1 - np.exp(-8)) / 2 - 1e-15:
            out.append(Failure("identities", seed, f"d={d}", "lazy-walk constant too small"))
        W, _ = oracles.dense_W_and_potential(F, a1, d)
        for name, X in {"M": M, "N": N, "F": F, "D": D1, "W": W}.items():
            ev = np.linalg.eigvalsh((X + X.T) / 2)
            if ev.min() < -1 - 1e-9 or ev.max() > 1 + 1e-9:
                out.append(Failure("identities", seed, f"case={i} m={m}",
                                   f"spectrum of {name} leaves [-1, 1]"))
    return out


def suite_source_target(seed: int, cases: int = 20, fault: bool = False) -> list:
    out = []
    for i in range(cases):
        rng = np.random.default_rng([seed, 200 + i])
        k = int(rng.integers(16, 129))
        ints = rng.integers(-50, 51, size=k)
        ints[-1] -= ints.sum()
        values = np.array([Fraction(int(x), 7) for x in ints], dtype=object)
        nodes = np.sort(rng.choice(4 * k, size=k, replace=False))
        sets = find_source_target_sets(values, nodes)
        if fault:
            sets.a_left = np.concatenate([sets.a_left, sets.a_right[:1]])
        bad = oracles.rst_violations(values, nodes, sets)
        if bad:
            out.append(Failure("source-target", seed, f"case={i} k={k}", "; ".join(bad)))
    return out


def suite_unit_flow(seed: int, cases: int = 10, fault: bool = False, max_n: int = 40,
                    outcomes: dict | None = None) -> list:
    """Random router instances audited against the router contract.

    ``outcomes``, when given, counts ``feasible`` and ``cut`` results.
    """
    out = []
    for i in range(cases):
        rng = np.random.default_rng([seed, 300 + i])
        if i % 2:
            G, left, right = bottleneck_instance(rng, max_n)
        else:
            n = int(rng.integers(4, max_n + 1))
            G = random_multigraph(n, int(rng.integers(n, 3 * n)), rng)
            perm = rng.permutation(n)
            ns = max(1, n // 8)
            left, right = np.sort(perm[:ns]), np.sort(perm[ns:ns + n // 2])
        n = G.n
        c = int(rng.integers(1, 6))
        params = SimpleNamespace(c=c, h=max(2, int(np.ceil(10 * c * log2m(G.m)))), mode="desk")
        res = route_flow(G, left, right, params)
        cut = np.zeros(n, dtype=bool)
        cut[res.cut] = True
        pairs = flow_to_matching(G, res.state, left[~cut[left]], right)
        if outcomes is not None:
            key = "cut" if cut.any() else "feasible"
            outcomes[key] = outcomes.get(key, 0) + 1
        if fault and pairs:
            pairs = pairs + [pairs[0]]
        bad = oracles.audit_route_flow(G, left, right, params, res, pairs)
        if bad:
            out.append(Failure("unit-flow", seed, f"case={i} n={n} m={G.m} c={c}",
                               "; ".join(bad[:3])))
    return out


def suite_subdivision(seed: int, cases: int = 3, fault: bool = False) -> list:
    out = []
    for i in range(cases):
        rng = np.random.default_rng([seed, 400 + i])
        n = int(rng.integers(2, 6))
        m = int(rng.integers(n - 1, min(18 - n, 2 * n) + 1))
        G = random_multigraph(n, m, rng, loops=False)
        rep = oracles.subdivision_report(G)
        if fault:
            rep["clause1"] += 1
        for clause in ("clause1", "clause2", "clause3"):
            if rep[clause]:
                out.append(Failure("subdivision", seed, f"case={i} edges={G.edges.tolist()}",
                                   f"{clause} failed on {rep[clause]} cuts"))
    return out


def suite_expansion_estimate(seed: int, cases: int = 3, fault: bool = False) -> list:
    out = []
    for i in range(cases):
        rng = np.random.default_rng([seed, 500 + i])
        k = int(rng.integers(4, 15))
        F = mixed_flow_matrix(k, rng)
        if fault:
            F = np.eye(k)
            ok = oracles.top_singular_value(F, np.arange(k)) <= 0.01
        else:
            ok = oracles.check_expansion_estimate(F, np.arange(k))
        if not ok:
            out.append(Failure("expansion-estimate", seed, f"case={i} k={k}",
                               "enumeration found a weakly expanding set"))
    return out


def mixed_flow_matrix(k: int, rng, target: float = 0.01) -> np.ndarray:
    """A flow matrix from a long matching history whose centered part is small."""
    F = np.eye(k)
    while oracles.top_singular_value(F, np.arange(k)) > target:
        N = oracles.dense_lazy_matrix(random_matching(k, rng, full=True), k, 2)
        F = N @ F @ N
    return F


SUITES = {
    "projection": suite_projection,
    "identities": suite_matrix_identities,
    "source-target": suite_source_target,
    "unit-flow": suite_unit_flow,
    "subdivision": suite_subdivision,
    "expansion-estimate": suite_expansion_estimate,
}


def run_suites(seed: int = 0, names=None, fault: str | None = None) -> list:
    """Run the named suites (all by default); ``fault`` names one to sabotage."""
    names = list(SUITES) if not names else list(names)
    for nm in names + ([fault] if fault else []):
        if nm not in SUITES:
            raise InputError(f"unknown suite {nm!r}; choose from {', '.join(SUITES)}")
    failures = []
    for nm in names:
        failures += SUITES[nm](seed, fault=(nm == fault))
    return failures


def oracle_compare(G: MultiGraph, params, seed: int = 0) -> list:
    """Play one game with dense tracking and compare every projection.

    Returns one record per round with the projection error and the potential.
    """
    oracles._cap(G.m, oracles.DEFAULT_CAP, "m")
    if not G.is_connected():
        raise InputError("oracle comparison needs a connected graph")
    state = GameState.start(G, params, oracle=True)
    rng = np.random.default_rng(seed)
    probe = np.random.default_rng([seed, 1])
    rows = [{"t": 0, "psi": state.psi[0], "projection_error": 0.0}]
    while state.t < params.T:
        act = state.active_split.copy()
        r = probe.standard_normal(G.m)
        got = project_power(state.matchings, act, r, params.d)
        W, _ = oracles.dense_W_and_potential(state.dense_F, act, params.d)
        err = float(np.max(np.abs(got.values - (W @ r)[got.nodes]), initial=0.0))
        rows[-1]["projection_error"] = err
        try:
            step(state, rng)
        except InstanceTooSmall:
            break
        rows.append({"t": state.t, "psi": state.psi[-1], "projection_error": 0.0})
    return rows

