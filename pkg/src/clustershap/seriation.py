"""Agglomerative linkage, dendrogram cutting, and optimal leaf ordering."""

from __future__ import annotations

import numpy as np

from .errors import MalformedDendrogram

LINKAGES = ("average", "complete", "ward")
_CHUNK_CELLS = 8_000_000  # cap on rows*cols*dims per distance chunk


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """Dense Euclidean distance matrix (direct differences: keeps full
    precision for near-coincident points, unlike the norm-expansion trick)."""
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    out = np.empty((n, n))
    step = max(1, _CHUNK_CELLS // max(n * pts.shape[1], 1))
    for lo in range(0, n, step):
        hi = min(lo + step, n)
        diff = pts[lo:hi, None, :] - pts[None, :, :]
        out[lo:hi] = np.sqrt(np.sum(diff * diff, axis=2))
    return out


def linkage_matrix(points: np.ndarray, linkage: str = "average") -> np.ndarray:
    """Agglomerative merge table in the usual (n-1) x 4 layout.

    Row t merges cluster ids Z[t,0] < Z[t,1] at height Z[t,2] into a new
    cluster with id n+t and size Z[t,3]. Initial ids are the point indices.
    Distances update by Lance-Williams; ties in merge distance break toward
    the lexicographically smallest (min id, max id) pair.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    if n < 1:
        raise ValueError("need at least one point")
    dist = pairwise_distances(pts)
    np.fill_diagonal(dist, np.inf)
    active = np.ones(n, dtype=bool)
    ids = np.arange(n)  # slot -> current cluster id
    sizes = np.ones(n)
    Z = np.zeros((max(n - 1, 0), 4))

    for step in range(n - 1):
        slots = np.flatnonzero(active)
        sub = dist[np.ix_(slots, slots)]
        dmin = sub.min()
        cand = np.argwhere(sub == dmin)
        cand = cand[cand[:, 0] < cand[:, 1]]
        ci = ids[slots[cand[:, 0]]]
        cj = ids[slots[cand[:, 1]]]
        lo = np.minimum(ci, cj)
        hi = np.maximum(ci, cj)
        pick = int(np.lexsort((hi, lo))[0])
        si, sj = int(slots[cand[pick, 0]]), int(slots[cand[pick, 1]])
        if ids[si] > ids[sj]:
            si, sj = sj, si
        d = float(dist[si, sj])
        ni, nj = sizes[si], sizes[sj]
        Z[step] = (ids[si], ids[sj], d, ni + nj)

        # Lance-Williams update of distances from every other active cluster
        others = active.copy()
        others[si] = others[sj] = False
        ks = np.flatnonzero(others)
        if ks.size:
            dki = dist[ks, si]
            dkj = dist[ks, sj]
            if linkage == "average":
                new = (ni * dki + nj * dkj) / (ni + nj)
            elif linkage == "complete":
                new = np.maximum(dki, dkj)
            else:  # ward
                nk = sizes[ks]
                new = np.sqrt(
                    np.maximum(
                        ((ni + nk) * dki**2 + (nj + nk) * dkj**2 - nk * d**2) / (ni + nj + nk),
                        0.0,
                    )
                )
            dist[ks, si] = new
            dist[si, ks] = new
        active[sj] = False
        dist[sj, :] = np.inf
        dist[:, sj] = np.inf
        ids[si] = n + step
        sizes[si] = ni + nj
    return Z


def _check_dendrogram(Z: np.ndarray, n: int) -> None:
    Z = np.asarray(Z)
    if Z.ndim != 2 or Z.shape[0] != n - 1 or (n > 1 and Z.shape[1] < 3):
        raise MalformedDendrogram(f"expected ({n - 1}) x 4 merge table, got shape {Z.shape}")
    seen = set(range(n))
    for t in range(Z.shape[0]):
        a, b = int(Z[t, 0]), int(Z[t, 1])
        if a not in seen or b not in seen or a == b:
            raise MalformedDendrogram(f"merge {t} references invalid cluster ids ({a}, {b})")
        seen.discard(a)
        seen.discard(b)
        seen.add(n + t)


def cut_tree(Z: np.ndarray, n: int, k: int) -> np.ndarray:
    """Labels after stopping the merges at k clusters; cluster ids are
    assigned 0..k-1 in order of each cluster's smallest member index."""
    _check_dendrogram(Z, n)
    if not (1 <= k <= n):
        raise ValueError(f"k must be in [1, {n}], got {k}")
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    for t in range(n - k):
        a, b = int(Z[t, 0]), int(Z[t, 1])
        members[n + t] = members.pop(a) + members.pop(b)
    groups = sorted(members.values(), key=min)
    labels = np.empty(n, dtype=np.int64)
    for gid, grp in enumerate(groups):
        labels[grp] = gid
    return labels


def leaves_of(Z: np.ndarray, n: int) -> list[list[int]]:
    """Leaf list (natural left-to-right order) for every node id 0..2n-2."""
    out: list[list[int]] = [[i] for i in range(n)]
    for t in range(np.asarray(Z).shape[0]):
        out.append(out[int(Z[t, 0])] + out[int(Z[t, 1])])
    return out


def natural_leaf_order(Z: np.ndarray, n: int) -> list[int]:
    """Dendrogram leaf order with no reordering applied."""
    _check_dendrogram(Z, n)
    return leaves_of(Z, n)[2 * n - 2]


def optimal_leaf_order(Z: np.ndarray, dist: np.ndarray) -> list[int]:
    """Flip dendrogram subtrees to minimize the sum of adjacent-leaf distances.

    Dynamic program over boundary leaves: F[node][p, q] is the cheapest
    arrangement of node's leaves that starts at leaf p and ends at leaf q
    (positions in the node's natural leaf order; p and q always straddle the
    two children, every subtree stays contiguous). For node v with children
    a, b:

        M[u, w] = min over k in a, h in b of  F[a][u, k] + dist[k, h] + F[b][h, w]

    computed as two min-plus products per node, O(L^3) overall. Ties resolve
    to the first candidate in natural leaf order, so an all-tie instance
    keeps the natural order.
    """
    dist = np.asarray(dist, dtype=np.float64)
    n = dist.shape[0]
    if dist.ndim != 2 or dist.shape != (n, n):
        raise MalformedDendrogram(f"distance matrix must be square, got {dist.shape}")
    if n == 1:
        return [0]
    _check_dendrogram(Z, n)
    leaves = leaves_of(Z, n)

    F: dict[int, np.ndarray] = {i: np.zeros((1, 1)) for i in range(n)}
    kbest: dict[int, np.ndarray] = {}
    hbest: dict[int, np.ndarray] = {}
    children: dict[int, tuple[int, int]] = {}
    Mblock: dict[int, np.ndarray] = {}

    for t in range(n - 1):
        a, b = int(Z[t, 0]), int(Z[t, 1])
        node = n + t
        children[node] = (a, b)
        la, lb = leaves[a], leaves[b]
        D_ab = dist[np.ix_(la, lb)]
        # Tmp[u, h] = min_k F[a][u, k] + dist[k, h]
        stack = F[a][:, :, None] + D_ab[None, :, :]
        kbest[node] = np.argmin(stack, axis=1)
        Tmp = np.min(stack, axis=1)
        # M[u, w] = min_h Tmp[u, h] + F[b][h, w]
        stack2 = Tmp[:, :, None] + F[b][None, :, :]
        hbest[node] = np.argmin(stack2, axis=1)
        M = np.min(stack2, axis=1)
        Mblock[node] = M
        na, nb = len(la), len(lb)
        Fv = np.full((na + nb, na + nb), np.inf)
        Fv[:na, na:] = M
        Fv[na:, :na] = M.T
        F[node] = Fv

    root = 2 * n - 2

    def order_between(node: int, u: int, w: int) -> list[int]:
        # u in left child's local positions, w in right child's local positions
        if node < n:
            return [node]
        a, b = children[node]
        h = int(hbest[node][u, w])
        k = int(kbest[node][u, h])
        return order_oriented(a, k_start=u, k_end=k) + order_oriented(b, k_start=h, k_end=w)

    def order_oriented(node: int, k_start: int, k_end: int) -> list[int]:
        # positions are in node's own natural leaf order; a start position in
        # the right child means the segment runs reversed
        if node < n:
            return [node]
        na = len(leaves[children[node][0]])
        if k_start < na:
            return order_between(node, k_start, k_end - na)
        return list(reversed(order_between(node, k_end, k_start - na)))

    u, w = np.unravel_index(int(np.argmin(Mblock[root])), Mblock[root].shape)
    return order_between(root, int(u), int(w))


def adjacent_distance_sum(order: list[int], dist: np.ndarray) -> float:
    order = list(order)
    return float(sum(dist[order[i], order[i + 1]] for i in range(len(order) - 1)))
