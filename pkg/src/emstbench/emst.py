"""Euclidean MST via dual-tree Boruvka over either spatial index, plus oracles.

The Boruvka driver is shared by every variant: each round asks a candidate
finder for the minimum-weight outgoing edge of every component under the
package-wide total order (weight, min id, max id), then unions the edges that
still cross components.  With that order all pair weights are distinct, the
MST is unique, and `dual_tree_boruvka` (either backend), `naive_boruvka`, and
`kruskal_mst` must return the same edge set exactly.

The dual-tree candidate finder traverses (tree x tree) node pairs.  A pair is
pruned when both sides sit inside one component, or when the region-to-region
lower bound exceeds the current candidate bound of every component present on
either side.  Small-enough subtrees become base cases: their cross-distance
block is computed with a norms + matrix-product kernel, which is fast but not
bitwise-canonical, so winners are re-derived with the canonical kernel among
everything within a rigorous floating-point error window of the block optimum.
Candidate weights stored and compared are therefore always canonical.
"""

from __future__ import annotations

import math

import numpy as np

from .balltree import BallTree
from .core import Dataset, Edge, EdgeList, cross_sq_dists, fmt17, sqdist
from .kdtree import KdTree

__all__ = [
    "DisjointSet",
    "BACKENDS",
    "dual_tree_boruvka",
    "find_component_neighbors",
    "naive_boruvka",
    "kruskal_mst",
    "validate_spanning_tree",
    "format_edges",
    "write_edges",
]

BACKENDS = {"kd": KdTree, "ball": BallTree}

_PRUNE_FACTOR = 1.0 - 1e-12  # never prune an exact boundary tie


class DisjointSet:
    """Union-find with path halving and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.component_count = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.component_count -= 1
        return True

    def roots_array(self) -> np.ndarray:
        """Component root of every element, resolved in bulk."""
        parent = np.array(self.parent, dtype=np.intp)
        roots = parent.copy()
        while True:
            nxt = parent[roots]
            if np.array_equal(nxt, roots):
                return roots
            roots = nxt


# ---------------------------------------------------------------------------
# dual-tree traversal engine


def _base_capacity(d: int) -> int:
    # Region bounds barely prune in high dimensions, so trade traversal
    # granularity for large BLAS blocks as d grows.
    if d <= 6:
        return 128
    if d <= 20:
        return 256
    return 1024


class _NodeState:
    """Per-node traversal state: static geometry caches plus per-round marks."""

    __slots__ = (
        "node",
        "base",
        "left",
        "right",
        "n_live",
        "ids",
        "coords",
        "sqn",
        "coords32",
        "sqn32",
        "max_sqn",
        "mins",
        "maxs",
        "center",
        "radius",
        "roots",
        "comps",
        "comp",
    )

    def __init__(self, node, base: bool):
        self.node = node
        self.base = base
        self.left = None
        self.right = None
        self.n_live = node.n_live
        self.ids = None
        self.coords = None
        self.sqn = None
        self.coords32 = None
        self.sqn32 = None
        self.max_sqn = 0.0
        # region geometry, snapshotted as plain Python data for cheap bounds
        if hasattr(node, "mins"):
            self.mins = node.mins.tolist()
            self.maxs = node.maxs.tolist()
            self.center = None
            self.radius = 0.0
        else:
            self.mins = None
            self.maxs = None
            self.center = node.center.tolist()
            self.radius = node.radius
        self.roots = None
        self.comps = None
        self.comp = -1


def _box_min_sq(sa: _NodeState, sb: _NodeState) -> float:
    total = 0.0
    for amin, amax, bmin, bmax in zip(sa.mins, sa.maxs, sb.mins, sb.maxs):
        gap = amin - bmax
        other = bmin - amax
        if other > gap:
            gap = other
        if gap > 0.0:
            total += gap * gap
    return total


def _ball_min_sq(sa: _NodeState, sb: _NodeState) -> float:
    total = 0.0
    for ac, bc in zip(sa.center, sb.center):
        diff = ac - bc
        total += diff * diff
    gap = math.sqrt(total) - sa.radius - sb.radius
    return gap * gap if gap > 0.0 else 0.0


class _DualTreeEngine:
    """Runs one candidate-finding round over (tree x tree) node pairs."""

    def __init__(self, tree):
        self.tree = tree
        self.token = tree._mutations
        self.coords = tree.coords
        self.min_sq = _box_min_sq if hasattr(tree.root, "mins") else _ball_min_sq
        base_cap = max(_base_capacity(tree.d), tree.leaf_capacity)
        # Fast-kernel absolute error bounds per unit of (max|q|^2 + max|r|^2),
        # for the float32 and float64 block kernels respectively.
        self.err32 = 8.0 * tree.d * 2.0 ** -24
        self.err64 = 8.0 * tree.d * 2.0 ** -53
        self.max_id = -1
        self.root = self._snapshot(tree.root, base_cap)

    def _snapshot(self, root, base_cap: int) -> _NodeState:
        def make(node) -> _NodeState:
            if node.is_leaf or node.n_live <= base_cap:
                state = _NodeState(node, base=True)
                ids = np.array(node.collect_live_ids(), dtype=np.intp)
                state.ids = ids
                state.coords = self.coords[ids] if len(ids) else np.empty((0, self.tree.d))
                state.sqn = np.einsum("ij,ij->i", state.coords, state.coords)
                state.coords32 = state.coords.astype(np.float32)
                state.sqn32 = state.sqn.astype(np.float32)
                state.max_sqn = float(state.sqn.max()) if len(ids) else 0.0
                if len(ids):
                    self.max_id = max(self.max_id, int(ids.max()))
                return state
            return _NodeState(node, base=False)

        root_state = make(root)
        stack = [root_state]
        while stack:
            state = stack.pop()
            if state.base:
                continue
            state.left = make(state.node.left)
            state.right = make(state.node.right)
            stack.append(state.left)
            stack.append(state.right)
        return root_state

    def run_round(self, roots_all: np.ndarray, cand_sq, cand_u, cand_v) -> None:
        self.cand_sq = cand_sq
        self.cand_u = cand_u
        self.cand_v = cand_v
        self._mark(self.root, roots_all)
        self._visit(self.root, self.root, 0.0)

    def _mark(self, root: _NodeState, roots_all: np.ndarray) -> None:
        """Refresh component containment marks for the current partition."""
        stack = [(root, False)]
        while stack:
            state, processed = stack.pop()
            if state.base:
                if len(state.ids):
                    state.roots = roots_all[state.ids]
                    state.comps = np.unique(state.roots)
                    state.comp = int(state.comps[0]) if len(state.comps) == 1 else -1
                else:
                    state.comps = np.empty(0, dtype=np.intp)
                    state.comp = -1
            elif not processed:
                stack.append((state, True))
                stack.append((state.left, False))
                stack.append((state.right, False))
            else:
                ls, rs = state.left, state.right
                if ls.comp >= 0 and ls.comp == rs.comp:
                    state.comps = ls.comps
                    state.comp = ls.comp
                else:
                    state.comps = np.union1d(ls.comps, rs.comps)
                    state.comp = -1

    def _visit(self, a: _NodeState, b: _NodeState, dmin: float) -> None:
        # depth-first over node pairs, nearest child pair descended first;
        # an explicit stack (farthest pushed first) reproduces that order
        # without recursion-depth limits on lopsided trees
        min_sq = self.min_sq
        stack = [(dmin, a, b)]
        while stack:
            dmin, a, b = stack.pop()
            if a.n_live == 0 or b.n_live == 0:
                continue
            acomp = a.comp
            if acomp >= 0 and acomp == b.comp:
                continue
            if dmin > 0.0:
                cand_sq = self.cand_sq
                if dmin * _PRUNE_FACTOR > float(cand_sq[a.comps].max()) and (
                    dmin * _PRUNE_FACTOR > float(cand_sq[b.comps].max())
                ):
                    continue
            if a.base:
                if b.base:
                    self._base_case(a, b)
                    continue
                pairs = ((a, b.left), (a, b.right))
            elif b.base:
                pairs = ((a.left, b), (a.right, b))
            elif a is b:
                left, right = a.left, a.right
                stack.append((min_sq(left, right), left, right))
                stack.append((0.0, right, right))
                stack.append((0.0, left, left))
                continue
            else:
                pairs = (
                    (a.left, b.left),
                    (a.left, b.right),
                    (a.right, b.left),
                    (a.right, b.right),
                )
            scored = sorted(
                ((min_sq(x, y), i) for i, (x, y) in enumerate(pairs)), reverse=True
            )
            for d, i in scored:
                stack.append((d, *pairs[i]))

    def _base_case(self, qs: _NodeState, rs: _NodeState) -> None:
        scale = qs.max_sqn + rs.max_sqn
        if scale < 1e30:  # comfortably inside float32 range
            w = qs.sqn32[:, None] + rs.sqn32[None, :]
            w -= 2.0 * (qs.coords32 @ rs.coords32.T)
            err = self.err32 * scale
        else:
            w = qs.sqn[:, None] + rs.sqn[None, :]
            w -= 2.0 * (qs.coords @ rs.coords.T)
            err = self.err64 * scale
        if qs.comp < 0 or rs.comp < 0:  # else the pair spans two components entirely
            w[qs.roots[:, None] == rs.roots[None, :]] = np.inf
        self._update_side(w, qs, rs, err)
        if qs is not rs:
            self._update_side(w.T, rs, qs, err)

    def _update_side(self, w, qs: _NodeState, rs: _NodeState, err: float) -> None:
        best_j = np.argmin(w, axis=1)
        best_w = np.take_along_axis(w, best_j[:, None], axis=1)[:, 0]
        thresh = self.cand_sq[qs.roots] + err
        rows = np.nonzero((best_w <= thresh) & (best_w < np.inf))[0]
        if not len(rows):
            return
        cand_sq, cand_u, cand_v = self.cand_sq, self.cand_u, self.cand_v
        for qi in rows.tolist():
            comp = int(qs.roots[qi])
            qid = int(qs.ids[qi])
            qrow = qs.coords[qi]
            # every pair whose canonical weight could win sits within 2*err
            # of the block optimum; re-derive those with the exact kernel
            shortlist = np.nonzero(w[qi] <= float(best_w[qi]) + 2.0 * err)[0]
            for j in shortlist.tolist():
                rid = int(rs.ids[j])
                wij = sqdist(qrow, rs.coords[j])
                u, v = (qid, rid) if qid < rid else (rid, qid)
                if (wij, u, v) < (cand_sq[comp], cand_u[comp], cand_v[comp]):
                    cand_sq[comp] = wij
                    cand_u[comp] = u
                    cand_v[comp] = v


def _engine_for(index) -> _DualTreeEngine:
    engine = getattr(index, "_emst_engine", None)
    if engine is None or engine.token != index._mutations:
        engine = _DualTreeEngine(index)
        index._emst_engine = engine
    return engine


def find_component_neighbors(index, dsu: DisjointSet) -> dict[int, Edge]:
    """One dual-tree pass: each component's nearest edge into any other component.

    Returns a map from component root id to that component's best outgoing
    edge under the total order.  The index must cover ids 0..n-1 of the same
    dataset the DisjointSet was built for and must not be mutated mid-round.
    """
    if dsu.component_count < 2:
        raise ValueError("need at least 2 components to have outgoing edges")
    n = len(dsu.parent)
    engine = _engine_for(index)
    if engine.max_id >= n:
        raise ValueError(
            f"index holds id {engine.max_id} but the disjoint set covers only 0..{n - 1}"
        )
    roots_all = dsu.roots_array()
    cand_sq = np.full(n, np.inf)
    cand_u = np.full(n, -1, dtype=np.int64)
    cand_v = np.full(n, -1, dtype=np.int64)
    engine.run_round(roots_all, cand_sq, cand_u, cand_v)
    out: dict[int, Edge] = {}
    for root in np.nonzero(cand_u >= 0)[0].tolist():
        out[root] = Edge(int(cand_u[root]), int(cand_v[root]), math.sqrt(float(cand_sq[root])))
    return out


# ---------------------------------------------------------------------------
# Boruvka drivers and oracles


def _accept_candidates(dsu: DisjointSet, candidates: dict[int, Edge], edges: list[Edge]) -> int:
    accepted = 0
    for root in sorted(candidates):
        edge = candidates[root]
        if dsu.find(edge.u) != dsu.find(edge.v):
            dsu.union(edge.u, edge.v)
            edges.append(edge)
            accepted += 1
    return accepted


def _run_boruvka(n: int, candidate_fn) -> tuple[EdgeList, int]:
    dsu = DisjointSet(n)
    edges: list[Edge] = []
    rounds = 0
    while dsu.component_count > 1:
        candidates = candidate_fn(dsu)
        rounds += 1
        if _accept_candidates(dsu, candidates, edges) == 0:
            raise RuntimeError("Boruvka round made no progress")  # unreachable
    return EdgeList.from_edges(edges), rounds


def dual_tree_boruvka(
    ds: Dataset,
    backend: str = "kd",
    leaf_capacity: int = 20,
    return_rounds: bool = False,
):
    """Exact EMST by Boruvka rounds with dual-tree candidate search.

    Builds the chosen index once, then repeats rounds of
    `find_component_neighbors` + union until one component remains.  With
    `return_rounds=True` also returns the number of rounds executed.
    """
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}, expected one of {sorted(BACKENDS)}")
    index = BACKENDS[backend](ds, leaf_capacity)
    result, rounds = _run_boruvka(ds.n, lambda dsu: find_component_neighbors(index, dsu))
    return (result, rounds) if return_rounds else result


def _pairwise_sq_matrix(ds: Dataset) -> np.ndarray:
    return cross_sq_dists(ds.coords, ds.coords)


def naive_boruvka(ds: Dataset, return_rounds: bool = False):
    """Boruvka with per-round exhaustive all-pairs candidate scans.

    Quadratic per round; the mid-level oracle for the dual-tree path.
    """
    n = ds.n
    if n == 1:
        result = EdgeList.from_edges([])
        return (result, 0) if return_rounds else result
    sq = _pairwise_sq_matrix(ds)

    def scan(dsu: DisjointSet) -> dict[int, Edge]:
        roots = dsu.roots_array()
        masked = np.where(roots[:, None] == roots[None, :], np.inf, sq)
        best_j = np.argmin(masked, axis=1)
        best_w = masked[np.arange(n), best_j]
        best: dict[int, tuple[float, int, int]] = {}
        for i in range(n):
            w = float(best_w[i])
            if w == np.inf:
                continue
            j = int(best_j[i])
            u, v = (i, j) if i < j else (j, i)
            comp = int(roots[i])
            cur = best.get(comp)
            if cur is None or (w, u, v) < cur:
                best[comp] = (w, u, v)
        return {c: Edge(u, v, math.sqrt(w)) for c, (w, u, v) in best.items()}

    result, rounds = _run_boruvka(n, scan)
    return (result, rounds) if return_rounds else result


def kruskal_mst(ds: Dataset) -> EdgeList:
    """Ground-truth MST: sort all pairs by the total order, union greedily.

    Materializes the full pair set, so intended for modest n (a few thousand).
    """
    n = ds.n
    if n == 1:
        return EdgeList.from_edges([])
    sq = _pairwise_sq_matrix(ds)
    iu, ju = np.triu_indices(n, 1)
    weights = sq[iu, ju]
    order = np.lexsort((ju, iu, weights))
    dsu = DisjointSet(n)
    edges: list[Edge] = []
    for idx in order.tolist():
        u, v = int(iu[idx]), int(ju[idx])
        if dsu.union(u, v):
            edges.append(Edge(u, v, math.sqrt(float(weights[idx]))))
            if len(edges) == n - 1:
                break
    return EdgeList.from_edges(edges)


# ---------------------------------------------------------------------------
# validation and the edge file format


def validate_spanning_tree(edgelist: EdgeList, n: int) -> None:
    """Raise ValueError unless the edges form a spanning tree over ids 0..n-1."""
    edges = edgelist.edges
    if len(edges) != n - 1:
        raise ValueError(f"spanning tree over {n} points needs {n - 1} edges, got {len(edges)}")
    dsu = DisjointSet(n)
    for e in edges:
        if not (0 <= e.u < n and 0 <= e.v < n):
            raise ValueError(f"edge ({e.u}, {e.v}) references ids outside 0..{n - 1}")
        if not dsu.union(e.u, e.v):
            raise ValueError(f"edge ({e.u}, {e.v}) closes a cycle")
    if dsu.component_count != 1:
        raise ValueError("edges do not connect all points")


def format_edges(edgelist: EdgeList) -> str:
    """Edge file: 'u,v,weight' lines ascending by the total order, then the total."""
    lines = [f"{e.u},{e.v},{fmt17(e.weight)}" for e in edgelist.sorted_edges()]
    lines.append(f"# total_weight={fmt17(edgelist.total_weight)}")
    return "\n".join(lines) + "\n"


def write_edges(edgelist: EdgeList, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_edges(edgelist))
