"""The spectral cut player.

Matchings live on split nodes, indexed ``0..m-1`` by their edge.  The flow
matrix ``F_t`` and its centered power ``W_t = (D_t F_t D_t)^d`` are never
formed; ``project_power`` applies the factored product to one vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, InstanceTooSmall


@dataclass(frozen=True)
class MatchingRound:
    """Disjoint split-node pairs ``(left[i], right[i])`` added in round ``t``."""

    left: np.ndarray
    right: np.ndarray
    t: int = 0

    def __post_init__(self):
        left = np.asarray(self.left, dtype=np.int64).ravel()
        right = np.asarray(self.right, dtype=np.int64).ravel()
        if left.shape != right.shape:
            raise InputError("matching sides differ in length")
        both = np.concatenate([left, right])
        if len(np.unique(both)) != len(both):
            raise InputError("matching pairs must be disjoint")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @classmethod
    def from_pairs(cls, pairs, t=0):
        pairs = list(pairs)
        if not pairs:
            return cls(np.zeros(0, np.int64), np.zeros(0, np.int64), t)
        a = np.asarray(pairs, dtype=np.int64)
        return cls(a[:, 0], a[:, 1], t)

    def __len__(self):
        return len(self.left)

    def pairs(self):
        return list(zip(self.left.tolist(), self.right.tolist()))

    def partner(self, m: int) -> np.ndarray:
        """Permutation array: matched nodes swap, the rest are fixed."""
        p = np.arange(m)
        p[self.left] = self.right
        p[self.right] = self.left
        return p


@dataclass
class ProjectionResult:
    nodes: np.ndarray      # active split nodes, ascending
    values: np.ndarray     # u_e for each active node
    r: np.ndarray = field(repr=False)


@dataclass
class SourceTargetSets:
    a_left: np.ndarray
    a_right: np.ndarray
    eta: object


def sample_unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform unit vector via normalized standard normals."""
    if dim < 1:
        raise InputError("dimension must be at least 1")
    while True:
        x = rng.standard_normal(dim)
        norm = np.linalg.norm(x)
        if norm > 0:
            return x / norm


def _lazy_inplace(M: MatchingRound, x: np.ndarray, a: float, b: float) -> None:
    """``x_i <- a x_i + b x_j`` on both ends of every pair (``a + b = 1``)."""
    if len(M) == 0:
        return
    xi, xj = x[M.left], x[M.right]
    move = xj - xi
    move *= b
    x[M.left] = xi + move
    x[M.right] = xj - move


def apply_lazy_matching(M: MatchingRound, x, d: int) -> np.ndarray:
    """``((d-1)/d) x + (1/d) M x``; unmatched coordinates are unchanged."""
    y = np.array(x, dtype=float, copy=True)
    _lazy_inplace(M, y, (d - 1) / d, 1.0 / d)
    return y


def _active_index(active, m):
    act = np.asarray(active)
    if act.dtype == bool:
        if act.shape != (m,):
            raise InputError(f"active mask must have length {m}")
        idx = np.flatnonzero(act)
    else:
        idx = np.unique(act.astype(np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= m):
            raise InputError("active node out of range")
    if idx.size == 0:
        raise InputError("active set is empty")
    return idx


def _center_inplace(x, idx, outside):
    sub = x[idx]
    sub -= sub.mean()
    x[outside] = 0.0
    x[idx] = sub


def apply_centering(active, x) -> np.ndarray:
    """Zero coordinates outside ``active`` and remove the mean on it."""
    y = np.array(x, dtype=float, copy=True)
    idx = _active_index(active, len(y))
    outside = np.ones(len(y), dtype=bool)
    outside[idx] = False
    _center_inplace(y, idx, outside)
    return y


def project_power(matchings, active, r, d: int) -> ProjectionResult:
    """Compute ``u = W_t r`` restricted to the active split nodes.

    Uses ``W_t = [D N_t ... N_1 N_1 ... N_t D]^d`` with ``D`` the centering on
    ``active``; each factor is applied in place, so one call costs
    ``O(d * sum_i |M_i|)`` on top of ``O(d m)`` for the centerings.

    Parameters
    ----------
    matchings : sequence of MatchingRound
        ``M_1 .. M_t`` in round order.
    active : bool mask of length m, or split-node ids
    r : array of length m
    d : int
        Power of two.

    Raises
    ------
    InputError
        On dimension mismatches or an empty active set.
    """
    r = np.asarray(r, dtype=float)
    m = len(r)
    if d < 1 or d & (d - 1):
        raise InputError("d must be a power of two")
    for M in matchings:
        if len(M) and max(M.left.max(), M.right.max()) >= m:
            raise InputError("matching refers to a node outside the vector")
    idx = _active_index(active, m)
    outside = np.ones(m, dtype=bool)
    outside[idx] = False
    a, b = (d - 1) / d, 1.0 / d
    rounds = list(matchings)
    x = r.copy()
    _center_inplace(x, idx, outside)
    # N_1 N_1 in the middle collapses to one step: M^2 = I on matched pairs
    inner = 1.0 - (a * a + b * b)
    for _ in range(d):
        for M in reversed(rounds[1:]):
            _lazy_inplace(M, x, a, b)
        if rounds:
            _lazy_inplace(rounds[0], x, 1.0 - inner, inner)
        for M in rounds[1:]:
            _lazy_inplace(M, x, a, b)
        _center_inplace(x, idx, outside)
    return ProjectionResult(nodes=idx, values=x[idx], r=r)


def find_source_target_sets(values, nodes=None, min_k: int = 16,
                            m: int | None = None) -> SourceTargetSets:
    """Pick sources, targets and a separation value from zero-sum ``values``.

    Guarantees, for ``k = len(values) >= min_k``:

    1. ``eta`` separates the sets (sources on one side, targets on the other);
    2. ``|targets| >= k/2`` and ``|sources| <= k/8``;
    3. ``(u - eta)^2 >= u^2 / 9`` for every source;
    4. sources carry at least 1/80 of ``sum u^2``.

    Works on floats or on exact rationals (``fractions.Fraction``); with
    rationals the guarantees hold exactly.

    Construction.  Flip signs so that at most ``k/2`` entries are negative and
    let ``P`` be the energy of the negative entries, ``E`` the total.  If
    ``8P >= E`` take ``eta = 0``, the ``floor(k/8)`` most negative entries as
    sources and all nonnegative entries as targets.  Otherwise put
    ``s = sum of positive entries``, ``eta = 8s/k``, sources the entries at
    least ``1.5 eta`` and targets the entries at most ``eta``.  In that case
    Markov bounds the sizes and Cauchy-Schwarz (``s^2 <= (k/2) P``) shows the
    sub-threshold positives hold at most ``6P``, leaving sources with at least
    ``E/8``.

    Ties are broken by node id.
    """
    u = np.asarray(values)
    exact = u.dtype == object
    k = len(u)
    nodes = np.arange(k) if nodes is None else np.asarray(nodes, dtype=np.int64)
    if len(nodes) != k:
        raise InputError("nodes and values differ in length")
    if k < min_k:
        raise InstanceTooSmall(f"active set of size {k} is below the minimum {min_k}")
    order = np.argsort(nodes, kind="stable")
    u, nodes = u[order], nodes[order]
    total = sum(u.tolist()) if exact else float(u.sum())
    tol = 0 if exact else 1e-9 * (m if m is not None else k)
    if abs(total) > tol:
        raise InputError(f"values must sum to zero (sum = {total})")

    sign = 1
    if np.count_nonzero(u < 0) * 2 > k:
        u = -u
        sign = -1
    neg = u < 0
    sq = u * u
    energy = sum(sq.tolist()) if exact else float(sq.sum())
    zero = u[0] * 0
    if energy == 0:
        return SourceTargetSets(np.zeros(0, np.int64), nodes.copy(), zero)
    p_neg = sum(sq[neg].tolist()) if exact else float(sq[neg].sum())
    if 8 * p_neg >= energy:
        eta = zero
        cand = np.flatnonzero(neg)
        rank = np.argsort(u[cand], kind="stable")   # most negative first
        left = cand[rank[:k // 8]]
        right = np.flatnonzero(~neg)
    else:
        pos = u > 0
        s = sum(u[pos].tolist()) if exact else float(u[pos].sum())
        eta = 8 * s / k
        thr = 3 * eta / 2
        left = np.flatnonzero(u >= thr)
        right = np.flatnonzero(u <= eta)
    a_left = np.sort(nodes[left])
    a_right = np.sort(nodes[right])
    return SourceTargetSets(a_left, a_right, sign * eta)
