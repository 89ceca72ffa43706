"""Benchmark graph families used by the CLI and the test-suite."""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .graph import MultiGraph


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_regular(n: int, degree: int, seed=0, simple: bool = False,
                   connected: bool = False, max_tries: int = 1000) -> MultiGraph:
    """Configuration-model ``degree``-regular multigraph on ``n`` vertices.

    Stubs are shuffled and paired; self-loops and parallel edges are kept
    unless ``simple`` is set, in which case pairings with either are
    rejected and resampled.  ``connected`` likewise resamples until the
    graph is connected.
    """
    if n < 1 or degree < 0:
        raise InputError("need n >= 1 and degree >= 0")
    if (n * degree) % 2:
        raise InputError("n * degree must be even")
    if simple and degree >= n:
        raise InputError("a simple regular graph needs degree < n")
    rng = _rng(seed)
    stubs = np.repeat(np.arange(n), degree)
    for _ in range(max_tries):
        perm = rng.permutation(stubs).reshape(-1, 2)
        if simple:
            if np.any(perm[:, 0] == perm[:, 1]):
                continue
            key = np.sort(perm, axis=1)
            if len(np.unique(key, axis=0)) != len(key):
                continue
        G = MultiGraph(n, perm)
        if connected and not G.is_connected():
            continue
        return G
    raise InputError("could not sample a graph with the requested properties")


def complete_graph(n: int) -> MultiGraph:
    return MultiGraph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def _chain_bridges(parts, bridges, rng):
    """``bridges`` edges between each consecutive pair of parts."""
    out = []
    for a, b in zip(parts[:-1], parts[1:]):
        for j in range(bridges):
            if rng is None:
                u, v = a[j % len(a)], b[j % len(b)]
            else:
                u, v = rng.choice(a), rng.choice(b)
            out.append((int(u), int(v)))
    return out


def dumbbell(k: int = 2, n: int = 16, bridges: int = 1) -> MultiGraph:
    """``k`` copies of ``K_n`` in a chain, ``bridges`` edges between neighbors."""
    if k < 1 or n < 1:
        raise InputError("need k >= 1 and n >= 1")
    edges, parts = [], []
    for i in range(k):
        off = i * n
        parts.append(np.arange(off, off + n))
        edges += [(off + a, off + b) for a in range(n) for b in range(a + 1, n)]
    edges += _chain_bridges(parts, bridges, None)
    return MultiGraph(k * n, edges)


def planted(k: int = 2, n: int = 50, degree: int = 3, bridges: int = 3, seed=0,
            simple: bool = True):
    """``k`` random ``degree``-regular expanders joined in a chain.

    Returns ``(G, labels)`` with ``labels[v]`` the planted part of ``v``.
    """
    rng = _rng(seed)
    edges, parts = [], []
    for i in range(k):
        H = random_regular(n, degree, rng, simple=simple, connected=True)
        off = i * n
        parts.append(np.arange(off, off + n))
        edges += (H.edges + off).tolist()
    edges += _chain_bridges(parts, bridges, rng)
    labels = np.repeat(np.arange(k), n)
    return MultiGraph(k * n, edges), labels
