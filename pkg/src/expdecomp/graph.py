"""Undirected multigraphs, volumes, cut measures and subdivision graphs.

Degree convention: a self-loop contributes exactly 1 to the degree of its
vertex.  This is what keeps degrees unchanged when ``induced_with_loops``
replaces each boundary edge by one self-loop.  Under it ``vol(V)`` equals
``2m - (#self-loops)``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InputError


class MultiGraph:
    """Immutable undirected multigraph on vertices ``0..n-1``.

    Parameters
    ----------
    n : int
        Number of vertices.
    edges : array-like of shape (m, 2)
        Unordered vertex pairs.  Parallel edges and self-loops (``u == v``)
        are allowed; edge ``i`` keeps its position in every derived structure.
    """

    def __init__(self, n, edges=()):
        n = int(n)
        if n < 0:
            raise InputError("vertex count must be nonnegative")
        arr = np.asarray(edges, dtype=np.int64)
        if arr.size == 0:
            arr = np.zeros((0, 2), dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise InputError(f"edge endpoint out of range for n={n}")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        self.n = n
        self.edges = arr

    def __repr__(self):
        return f"MultiGraph(n={self.n}, m={self.m})"

    def __eq__(self, other):
        return (isinstance(other, MultiGraph) and self.n == other.n
                and np.array_equal(self.edges, other.edges))

    __hash__ = None

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def loop_mask(self) -> np.ndarray:
        return self.edges[:, 0] == self.edges[:, 1]

    @cached_property
    def num_loops(self) -> int:
        return int(self.loop_mask.sum())

    @cached_property
    def loops_at(self) -> np.ndarray:
        """Number of self-loops at each vertex."""
        return np.bincount(self.edges[self.loop_mask, 0], minlength=self.n)

    @cached_property
    def degrees(self) -> np.ndarray:
        e = self.edges
        deg = np.bincount(e[:, 0], minlength=self.n)
        deg += np.bincount(e[~self.loop_mask, 1], minlength=self.n)
        deg.flags.writeable = False
        return deg

    @cached_property
    def csr(self):
        """Adjacency without self-loops as ``(indptr, nbr, eid, sign)``.

        Slot ``p`` in ``indptr[v]:indptr[v+1]`` says that edge ``eid[p]``
        joins ``v`` to ``nbr[p]``; ``sign[p]`` is +1 when ``v`` is the first
        endpoint of that edge and -1 otherwise.
        """
        e = self.edges[~self.loop_mask]
        ids = np.flatnonzero(~self.loop_mask)
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        eid = np.concatenate([ids, ids])
        sign = np.concatenate([np.ones(len(ids), np.int64), -np.ones(len(ids), np.int64)])
        order = np.lexsort((eid, src))
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
        return indptr, dst[order], eid[order], sign[order]

    @cached_property
    def csr_lists(self):
        """``csr`` converted to Python lists for tight scalar loops."""
        return tuple(a.tolist() for a in self.csr)

    def neighbors(self, v: int) -> np.ndarray:
        """Neighbors of ``v`` with multiplicity, self-loops excluded."""
        indptr, nbr, _, _ = self.csr
        return nbr[indptr[v]:indptr[v + 1]]

    def components(self):
        """Connected components (self-loops ignored) as sorted id arrays."""
        if self.n == 0:
            return []
        e = self.edges
        adj = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(self.n, self.n))
        k, lab = connected_components(adj, directed=False)
        order = np.argsort(lab, kind="stable")
        splits = np.cumsum(np.bincount(lab, minlength=k))[:-1]
        comps = np.split(order, splits)
        comps.sort(key=lambda c: int(c[0]))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1


def vertex_mask(n: int, S) -> np.ndarray:
    """Boolean membership mask for a vertex set given as ids or as a mask."""
    arr = np.asarray(S)
    if arr.dtype == bool:
        if arr.shape != (n,):
            raise InputError(f"mask must have length {n}")
        return arr.copy()
    arr = arr.astype(np.int64).ravel()
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise InputError(f"vertex id out of range for n={n}")
    mask = np.zeros(n, dtype=bool)
    mask[arr] = True
    return mask


def volume(G: MultiGraph, S) -> int:
    """Sum of degrees over ``S``."""
    return int(G.degrees[vertex_mask(G.n, S)].sum())


def cut_size(G: MultiGraph, S) -> int:
    """Number of edges with exactly one endpoint in ``S``."""
    mask = vertex_mask(G.n, S)
    e = G.edges
    return int(np.count_nonzero(mask[e[:, 0]] != mask[e[:, 1]]))


def _proper_cut(G, S):
    mask = vertex_mask(G.n, S)
    k = int(mask.sum())
    if k == 0 or k == G.n:
        raise InputError("cut side must be nonempty and proper")
    return mask


def conductance(G: MultiGraph, S, exact: bool = False):
    """``|E(S, V-S)| / min(vol S, vol(V-S))``.

    Returns a :class:`fractions.Fraction` when ``exact`` is true.
    """
    mask = _proper_cut(G, S)
    deg = G.degrees
    vs, vt = int(deg[mask].sum()), int(deg[~mask].sum())
    denom = min(vs, vt)
    if denom == 0:
        raise InputError("conductance undefined: a side has zero volume")
    cross = cut_size(G, mask)
    return Fraction(cross, denom) if exact else cross / denom


def edge_expansion(G: MultiGraph, S, exact: bool = False):
    """``|E(S, V-S)| / min(|S|, |V-S|)``."""
    mask = _proper_cut(G, S)
    k = int(mask.sum())
    denom = min(k, G.n - k)
    cross = cut_size(G, mask)
    return Fraction(cross, denom) if exact else cross / denom


def induced_subgraph(G: MultiGraph, A):
    """Plain induced subgraph ``G[A]``.

    Returns ``(H, ids, eids)``: vertex ``i`` of ``H`` is ``ids[i]`` in ``G``
    (ids ascending) and edge ``j`` of ``H`` is edge ``eids[j]`` of ``G``.
    """
    mask = vertex_mask(G.n, A)
    ids = np.flatnonzero(mask)
    local = np.full(G.n, -1, dtype=np.int64)
    local[ids] = np.arange(len(ids))
    e = G.edges
    keep = mask[e[:, 0]] & mask[e[:, 1]]
    eids = np.flatnonzero(keep)
    return MultiGraph(len(ids), local[e[eids]]), ids, eids


def induced_with_loops(G: MultiGraph, A) -> MultiGraph:
    """``G{A}``: edges inside ``A`` plus one self-loop per boundary edge.

    Vertex ``i`` of the result is the ``i``-th smallest element of ``A``.
    Edges keep the relative order of the edges of ``G`` that touch ``A``, so
    every vertex of ``A`` keeps its degree.
    """
    mask = vertex_mask(G.n, A)
    ids = np.flatnonzero(mask)
    local = np.full(G.n, -1, dtype=np.int64)
    local[ids] = np.arange(len(ids))
    e = G.edges
    in0, in1 = mask[e[:, 0]], mask[e[:, 1]]
    touch = in0 | in1
    sub = e[touch]
    u = np.where(in0[touch], sub[:, 0], sub[:, 1])
    v = np.where(in1[touch], sub[:, 1], sub[:, 0])
    return MultiGraph(len(ids), np.stack([local[u], local[v]], axis=1))


class SubdivisionGraph:
    """The subdivision graph ``G_E`` of a base multigraph.

    Regular nodes keep ids ``0..n-1``; the split node of edge ``i`` is
    ``n + i``.  Edge ``2i`` of ``G_E`` joins the first endpoint of edge ``i``
    to its split node and edge ``2i + 1`` joins the second endpoint, so a
    self-loop becomes a parallel pair.
    """

    def __init__(self, base: MultiGraph):
        self.base = base
        n, m = base.n, base.m
        split = n + np.arange(m, dtype=np.int64)
        pairs = np.empty((2 * m, 2), dtype=np.int64)
        pairs[0::2, 0] = base.edges[:, 0]
        pairs[1::2, 0] = base.edges[:, 1]
        pairs[0::2, 1] = split
        pairs[1::2, 1] = split
        self.g_e = MultiGraph(n + m, pairs)

    @property
    def n(self):
        return self.base.n

    @property
    def m(self):
        return self.base.m

    @cached_property
    def role(self) -> np.ndarray:
        """True for split nodes, False for regular nodes."""
        r = np.zeros(self.n + self.m, dtype=bool)
        r[self.n:] = True
        return r

    def is_split(self, x: int) -> bool:
        return x >= self.n

    def edge_of(self, x: int) -> int:
        if not self.n <= x < self.n + self.m:
            raise InputError(f"{x} is not a split node")
        return x - self.n

    def split_of(self, e: int) -> int:
        if not 0 <= e < self.m:
            raise InputError(f"edge {e} out of range")
        return self.n + e


def subdivide(G: MultiGraph) -> SubdivisionGraph:
    return SubdivisionGraph(G)


def respects_subdivision(ge: SubdivisionGraph, S) -> bool:
    """True iff no split node is separated from both of its endpoints."""
    mask = vertex_mask(ge.n + ge.m, S)
    e = ge.base.edges
    a, b, x = mask[e[:, 0]], mask[e[:, 1]], mask[ge.n:]
    return not bool(np.any((a & b & ~x) | (~a & ~b & x)))


def parse_edge_list(text: str) -> MultiGraph:
    """Parse the ``n m`` header plus ``u v`` lines format.

    Blank lines and ``#`` comments are ignored.  Errors carry the line number.
    """
    header = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"expected two integers, got {raw.strip()!r}", line=lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise InputError(f"non-integer token in {raw.strip()!r}", line=lineno) from None
        if header is None:
            if a < 0 or b < 0:
                raise InputError("negative header value", line=lineno)
            header = (a, b)
            continue
        if not (0 <= a < header[0] and 0 <= b < header[0]):
            raise InputError(f"vertex id out of range [0, {header[0]})", line=lineno)
        if len(edges) == header[1]:
            raise InputError(f"more than the declared {header[1]} edges", line=lineno)
        edges.append((a, b))
    if header is None:
        raise InputError("missing 'n m' header", line=1)
    if len(edges) != header[1]:
        raise InputError(f"declared {header[1]} edges but found {len(edges)}",
                         line=len(text.splitlines()) or 1)
    return MultiGraph(header[0], edges)


def read_edge_list(path) -> MultiGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def format_edge_list(G: MultiGraph) -> str:
    lines = [f"{G.n} {G.m}"]
    lines.extend(f"{u} {v}" for u, v in G.edges.tolist())
    return "\n".join(lines) + "\n"


def write_edge_list(G: MultiGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_edge_list(G))


def from_edges(edges: Iterable[Sequence[int]], n: int | None = None) -> MultiGraph:
    """Convenience constructor inferring ``n`` from the largest id."""
    edges = [tuple(e) for e in edges]
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    return MultiGraph(n, edges)
