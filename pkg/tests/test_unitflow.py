import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from expdecomp import oracles
from expdecomp.errors import InputError, InvariantViolation
from expdecomp.graph import MultiGraph
from expdecomp.suites import random_multigraph
from expdecomp.unitflow import (FlowState, check_valid, flow_to_matching, level_cut,
                                route_flow, unit_flow)

from conftest import k_n


def two_cliques(k=8, bridges=1):
    edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
    edges += [(k + i, k + j) for i in range(k) for j in range(i + 1, k)]
    edges += [(i, k + i) for i in range(bridges)]
    return MultiGraph(2 * k, edges)


def params(c, h=None, m=16, mode="desk"):
    if h is None:
        h = max(2, math.ceil(10 * c * math.log2(max(m, 2))))
    return SimpleNamespace(c=c, h=h, mode=mode)


class TestUnitFlow:
    def test_single_push(self):
        G = MultiGraph(2, [(0, 1)])
        st_ = FlowState.for_sources(G, [0], [1], cap=1)
        st_, S = unit_flow(G, 5, st_, check=True)
        assert S == [] and st_.flow == [1] and st_.stats["pushes"] == 1

    def test_nothing_to_route(self):
        G = k_n(4)
        st_ = FlowState(G, [0] * 4, [1] * 4, 2)
        st_, S = unit_flow(G, 5, st_)
        assert S == [] and st_.flow == [0] * G.m and st_.labels == [0] * 4

    def test_invalid_initial_state(self):
        G = MultiGraph(2, [(0, 1)])
        bad = FlowState(G, [1, 0], [0, 0], 1, labels=[3, 0])
        with pytest.raises(InputError):
            unit_flow(G, 5, bad, check=True)

    def test_stuck_mass_yields_level_cut(self):
        G = two_cliques(6)
        delta = [3] * 6 + [0] * 6
        sinks = [0] * 6 + [1] * 6
        st_ = FlowState(G, delta, sinks, cap=1)
        h = 20
        st_, S = unit_flow(G, h, st_, check=True)
        assert S
        info = st_.last_cut
        assert oracles.audit_level_cut(G, info) == []
        assert not check_valid(st_, h, solution=True)

    @given(st.integers(0, 10**6))
    def test_random_instances(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 41))
        G = random_multigraph(n, int(rng.integers(n, 3 * n)), rng)
        c = int(rng.integers(1, 4))
        delta = rng.integers(0, 3, size=n)
        sinks = rng.integers(0, 2, size=n)
        h = int(rng.integers(2, 30))
        st_ = FlowState(G, delta, sinks, c)
        total = int(delta.sum())
        st_, S = unit_flow(G, h, st_, check=True)
        assert sum(st_.mass) == total
        assert check_valid(st_, h, solution=True) == []
        assert oracles.audit_flow_state(G, st_, require_feasible=not S) == []
        if S:
            assert oracles.audit_level_cut(G, st_.last_cut) == []


class TestLevelCut:
    def test_flat_labels(self):
        G = MultiGraph(4, [(0, 1), (2, 3)])
        h = 5
        st_ = FlowState(G, [2, 0, 2, 0], [1, 1, 0, 0], 1, labels=[h, h, 0, 0])
        S = level_cut(G, st_, h)
        assert S == [0, 1]
        assert st_.last_cut.i_star == h - 1 and st_.last_cut.z1 == 0

    def test_staircase_matches_exhaustive_search(self):
        n = h = 12
        G = MultiGraph(n, [(i, i + 1) for i in range(n - 1)])
        st_ = FlowState(G, [2] * n, [1] * n, 1, labels=list(range(n)))
        st_.labels[-1] = h
        S = level_cut(G, st_, h)
        lab = np.array(st_.labels)
        deg = G.degrees
        want = None
        for i in range(h - 1, 0, -1):
            members = lab >= i
            z1 = sum(1 for u, v in G.edges.tolist()
                     if {lab[u], lab[v]} == {i, i - 1})
            if z1 <= 5 * math.log2(2 * G.m) / h * deg[members].sum():
                want = i
                break
        assert st_.last_cut.i_star == want
        assert S == sorted(np.flatnonzero(lab >= want).tolist())

    def test_requires_top_vertex(self):
        G = MultiGraph(2, [(0, 1)])
        with pytest.raises(InputError):
            level_cut(G, FlowState(G, [0, 0], [0, 0], 1), 4)


class TestRouteFlow:
    def test_no_sources(self):
        G = k_n(6)
        res = route_flow(G, [], [1, 2], params(2))
        assert res.feasible and all(f == 0 for f in res.state.flow)

    def test_overlap_rejected(self):
        with pytest.raises(InputError):
            route_flow(k_n(4), [0, 1], [1, 2], params(2))

    def test_complete_graph_routes(self):
        G = k_n(10)
        left, right = [0, 1, 2], [3, 4, 5, 6, 7, 8, 9]
        res = route_flow(G, left, right, params(2, m=G.m))
        assert res.feasible
        pairs = flow_to_matching(G, res.state, left, right)
        assert oracles.audit_route_flow(G, left, right, params(2, m=G.m), res, pairs) == []
        assert sorted(x for x, _ in pairs) == left

    def test_two_cliques_cut(self):
        G = two_cliques(8)
        left, right = list(range(8)), list(range(8, 16))
        p = params(2, h=30)
        res = route_flow(G, left, right, p)
        assert res.kind == "cut"
        assert oracles.audit_route_flow(G, left, right, p, res) == []
        cut = set(res.cut.tolist())
        assert cut == set(range(8)) or cut <= set(range(8))

    def test_paper_mode_size_precondition(self):
        G = k_n(6)
        with pytest.raises(InputError):
            route_flow(G, [0, 1, 2], [3, 4, 5], params(2, mode="paper"))

    @given(st.integers(0, 10**6))
    def test_random_post_conditions(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 41))
        G = random_multigraph(n, int(rng.integers(n, 3 * n)), rng)
        c = int(rng.integers(2, 6))
        p = params(c, m=G.m)
        perm = rng.permutation(n)
        ns = max(1, n // 8)
        left, right = np.sort(perm[:ns]), np.sort(perm[ns:ns + n // 2])
        res = route_flow(G, left, right, p, check=True)
        cut = np.zeros(n, bool)
        cut[res.cut] = True
        pairs = flow_to_matching(G, res.state, left[~cut[left]], right)
        assert oracles.audit_route_flow(G, left, right, p, res, pairs) == []


class TestFlowToMatching:
    def test_single_path(self):
        G = MultiGraph(3, [(0, 1), (1, 2)])
        st_ = FlowState.for_sources(G, [0], [2], 1)
        st_, _ = unit_flow(G, 10, st_)
        assert flow_to_matching(G, st_, [0]) == [(0, 2)]

    def test_two_disjoint_paths(self):
        G = MultiGraph(6, [(0, 1), (1, 2), (3, 4), (4, 5)])
        st_ = FlowState.for_sources(G, [0, 3], [2, 5], 1)
        st_, _ = unit_flow(G, 10, st_)
        assert flow_to_matching(G, st_, [0, 3]) == [(0, 2), (3, 5)]

    def test_cycle_is_cancelled(self):
        # flow 0->1->2->0 circulates on top of the path 0->1->3
        G = MultiGraph(4, [(0, 1), (1, 2), (2, 0), (1, 3)])
        st_ = FlowState(G, [1, 0, 0, 0], [0, 0, 0, 1], 2, flow=[2, 1, 1, 1])
        assert flow_to_matching(G, st_, [0]) == [(0, 3)]

    def test_missing_route(self):
        G = MultiGraph(3, [(0, 1), (1, 2)])
        st_ = FlowState.for_sources(G, [0], [2], 1)
        with pytest.raises(InputError):
            flow_to_matching(G, st_, [0])

    @given(st.integers(0, 10**6))
    def test_divergence(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 30))
        G = random_multigraph(n, 2 * n, rng)
        perm = rng.permutation(n)
        left, right = np.sort(perm[:2]), np.sort(perm[2:2 + n // 2])
        res = route_flow(G, left, right, params(3, m=G.m))
        cut = np.zeros(n, bool)
        cut[res.cut] = True
        live = left[~cut[left]]
        pairs = flow_to_matching(G, res.state, live, right)
        ends = [y for _, y in pairs]
        assert len(set(ends)) == len(ends)
        assert sorted(x for x, _ in pairs) == live.tolist()
        for x, y in pairs:
            assert res.state.mass[x] == 0
            assert res.state.mass[y] >= 1


def test_router_round_cap_is_internal_error(monkeypatch):
    import expdecomp.unitflow as uf
    G = two_cliques(6)

    def never_done(G, h, state, check=False):
        # keeps reporting the same cut, so the router never settles
        state.last_cut = None
        return state, [0]
    monkeypatch.setattr(uf, "unit_flow", never_done)
    with pytest.raises(InvariantViolation):
        route_flow(G, list(range(6)), list(range(6, 12)), params(2, h=5))
