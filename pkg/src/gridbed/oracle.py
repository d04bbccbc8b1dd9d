"""Exhaustive reference solvers."""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator

import numpy as np

from .embedding import GridEmbedding, validate
from .graph import (
    Graph,
    all_pairs_distances,
    component_catalog,
    connected_components,
    find_isomorphism,
    grid_necessary_filter,
    is_connected,
)

DEFAULT_BUDGET = 5_000_000


class Answer(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"
    NOT_APPLICABLE = "not-applicable"


@dataclass
class SolveResult:
    answer: Answer
    witness: GridEmbedding | None = None
    stats: dict = field(default_factory=dict)
    a: int | None = None

    def __post_init__(self) -> None:
        if self.answer is Answer.YES and self.witness is None:
            raise ValueError("a yes answer needs a witness")

    @property
    def yes(self) -> bool:
        return self.answer is Answer.YES

    @property
    def no(self) -> bool:
        return self.answer is Answer.NO


class BudgetExceeded(Exception):
    """Raised internally when a search exhausts its node budget."""


class NodeCounter:
    def __init__(self, budget: int | None) -> None:
        self.budget = budget
        self.nodes = 0

    def tick(self, amount: int = 1) -> None:
        self.nodes += amount
        if self.budget is not None and self.nodes > self.budget:
            raise BudgetExceeded


def bfs_order(g: Graph, comp: frozenset[int] | set[int]) -> tuple[list[int], dict[int, int]]:
    """BFS order of a component from its max-degree vertex (lowest id on ties)."""
    root = min(comp, key=lambda v: (-g.degree(v), v))
    order = [root]
    parent: dict[int, int] = {}
    seen = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in g.adj[u]:
            if w not in seen:
                seen.add(w)
                parent[w] = u
                order.append(w)
                queue.append(w)
    return order, parent


class _Embedder:
    """Backtracking over vertex -> cell with unit-edge propagation."""

    def __init__(self, g: Graph, k: int, r: int, symmetry: bool, counter: NodeCounter,
                 break_ties: bool = True) -> None:
        self.g, self.k, self.r = g, k, r
        self.counter = counter
        self.cell_rc = [(i // r, i % r) for i in range(k * r)]
        self.cell_nbrs: list[tuple[int, ...]] = []
        for i in range(k * r):
            a, b = divmod(i, r)
            nb = []
            for da, db in ((-1, 0), (0, -1), (0, 1), (1, 0)):
                x, y = a + da, b + db
                if 0 <= x < k and 0 <= y < r:
                    nb.append(x * r + y)
            self.cell_nbrs.append(tuple(nb))
        self._plan(symmetry, break_ties)

    def _plan(self, symmetry: bool, break_ties: bool) -> None:
        g = self.g
        cat = component_catalog(g)
        comps = [frozenset(c) for c in cat.components]
        mult = cat.multiplicities()
        keyed = sorted(range(len(comps)),
                       key=lambda i: (mult[cat.component_class[i]] > 1, -len(comps[i]), min(comps[i])))
        order: list[int] = []
        parent: dict[int, int] = {}
        roots: list[int] = []
        tie_prev: dict[int, int] = {}
        first_order: dict[int, list[int]] = {}
        last_root: dict[int, int] = {}
        for i in keyed:
            cls = cat.component_class[i]
            comp = comps[i]
            if cls in first_order and break_ties:
                # isomorphic copy: mirror the reference order so roots correspond
                ref = first_order[cls]
                sub_ref, old_ref = g.induced(ref)
                sub_new, old_new = g.induced(comp)
                phi = find_isomorphism(sub_ref, sub_new)
                assert phi is not None
                idx_ref = {v: j for j, v in enumerate(old_ref)}
                c_order = [old_new[phi[idx_ref[v]]] for v in ref]
                c_parent = {}
                placed = {c_order[0]}
                for v in c_order[1:]:
                    c_parent[v] = next(w for w in g.adj[v] if w in placed)
                    placed.add(v)
                tie_prev[c_order[0]] = last_root[cls]
            else:
                c_order, c_parent = bfs_order(g, comp)
                first_order.setdefault(cls, c_order)
            last_root[cls] = c_order[0]
            roots.append(c_order[0])
            order.extend(c_order)
            parent.update(c_parent)
        self.order = order
        self.parent = parent
        self.tie_prev = tie_prev
        self.is_root = set(roots)
        self.pin_first = symmetry and bool(keyed) and mult[cat.component_class[keyed[0]]] == 1
        pos_in_order = {v: i for i, v in enumerate(order)}
        self.earlier = [tuple(w for w in g.adj[v] if pos_in_order[w] < pos_in_order[v]) for v in order]
        self.later_count = [sum(1 for w in g.adj[v] if pos_in_order[w] > pos_in_order[v]) for v in order]

    def _root_cells(self, v: int, cell_of: list[int], occ: list[int]) -> Iterator[int]:
        k, r = self.k, self.r
        lower = -1
        if v in self.tie_prev:
            lower = cell_of[self.tie_prev[v]]
        first = self.order and v == self.order[0]
        for c in range(lower + 1, k * r):
            if occ[c] >= 0:
                continue
            if first and self.pin_first:
                a, b = self.cell_rc[c]
                if a >= (k + 1) // 2 or b >= (r + 1) // 2:
                    continue
                if k == r and a > b:
                    continue
            yield c

    def run(self, callback: Callable[[list[int]], bool]) -> bool:
        """Enumerate embeddings; ``callback`` gets cell indices per vertex and returns True to stop."""
        g = self.g
        n = g.n
        cell_of = [-1] * n
        occ = [-1] * (self.k * self.r)
        rem = [0] * n
        order = self.order
        cell_rc = self.cell_rc
        cell_nbrs = self.cell_nbrs
        counter = self.counter

        def free_deg(c: int) -> int:
            return sum(1 for x in cell_nbrs[c] if occ[x] < 0)

        def rec(i: int) -> bool:
            if i == n:
                return callback(cell_of)
            v = order[i]
            earlier = self.earlier[i]
            if v in self.is_root:
                cands: Iterator[int] = self._root_cells(v, cell_of, occ)
            else:
                pc = cell_of[self.parent[v]]
                cands = (c for c in cell_nbrs[pc] if occ[c] < 0)
            for c in cands:
                a, b = cell_rc[c]
                ok = True
                for w in earlier:
                    x, y = cell_rc[cell_of[w]]
                    if abs(x - a) + abs(y - b) != 1:
                        ok = False
                        break
                if not ok:
                    continue
                counter.tick()
                cell_of[v] = c
                occ[c] = v
                rem[v] = self.later_count[i]
                for w in earlier:
                    rem[w] -= 1
                good = free_deg(c) >= rem[v]
                if good:
                    for x in cell_nbrs[c]:
                        y = occ[x]
                        if y >= 0 and rem[y] > 0 and free_deg(x) < rem[y]:
                            good = False
                            break
                if good and rec(i + 1):
                    return True
                for w in earlier:
                    rem[w] += 1
                occ[c] = -1
                cell_of[v] = -1
            return False

        return rec(0)

    def to_embedding(self, cell_of: list[int]) -> GridEmbedding:
        return GridEmbedding(self.k, self.r, {v: (c // self.r + 1, c % self.r + 1) for v, c in enumerate(cell_of)})


def _quick_no(g: Graph, k: int, r: int) -> str | None:
    if g.n > k * r:
        return "too many vertices"
    f = grid_necessary_filter(g)
    if not f:
        return f.reason
    cap = min(k - 1, 2) + min(r - 1, 2)
    if g.max_degree > cap:
        return "degree exceeds lattice capacity"
    return None


def brute_force_embed(g: Graph, k: int, r: int, budget: int | None = DEFAULT_BUDGET) -> SolveResult:
    """Complete backtracking search for a k×r embedding."""
    if k < 1 or r < 1:
        raise ValueError("k and r must be positive")
    t0 = time.perf_counter()
    if g.n == 0:
        return SolveResult(Answer.YES, GridEmbedding(k, r, {}), {"nodes": 0, "elapsed": 0.0})
    reason = _quick_no(g, k, r)
    if reason:
        return SolveResult(Answer.NO, None, {"nodes": 0, "elapsed": time.perf_counter() - t0, "reason": reason})
    counter = NodeCounter(budget)
    emb = _Embedder(g, k, r, symmetry=True, counter=counter)
    found: list[GridEmbedding] = []

    def cb(cells: list[int]) -> bool:
        found.append(emb.to_embedding(cells))
        return True

    try:
        emb.run(cb)
    except BudgetExceeded:
        return SolveResult(Answer.UNKNOWN, None, {"nodes": counter.nodes, "elapsed": time.perf_counter() - t0})
    stats = {"nodes": counter.nodes, "elapsed": time.perf_counter() - t0}
    if found:
        assert validate(g, found[0])
        return SolveResult(Answer.YES, found[0], stats)
    return SolveResult(Answer.NO, None, stats)


def iter_embeddings(g: Graph, k: int, r: int, symmetry: bool = False,
                    budget: int | None = None) -> Iterator[GridEmbedding]:
    """Every k×r embedding (one per lattice-symmetry orbit when ``symmetry``)."""
    if g.n == 0:
        yield GridEmbedding(k, r, {})
        return
    if g.n > k * r or not grid_necessary_filter(g):
        return
    out: list[GridEmbedding] = []
    counter = NodeCounter(budget)
    emb = _Embedder(g, k, r, symmetry=symmetry, counter=counter, break_ties=symmetry)

    def cb(cells: list[int]) -> bool:
        out.append(emb.to_embedding(cells))
        return False

    emb.run(cb)
    yield from out


def min_distance_approximation(g: Graph, k: int, r: int, budget: int | None = DEFAULT_BUDGET) -> int | None:
    """Minimum a_f over all k×r embeddings, ``|V|`` when none exists, ``None`` on budget."""
    if not is_connected(g):
        raise ValueError("min_distance_approximation needs a connected graph")
    n = g.n
    if n <= 2:
        return 0 if n <= k * r and (n < 2 or k * r >= 2) else n
    if _quick_no(g, k, r):
        return n
    d = all_pairs_distances(g)
    iu = np.triu_indices(n, 1)
    dvals = d[iu]
    best = [n]
    counter = NodeCounter(budget)
    emb = _Embedder(g, k, r, symmetry=True, counter=counter)
    rr = np.array([c // r for c in range(k * r)])
    cc = np.array([c % r for c in range(k * r)])

    def cb(cells: list[int]) -> bool:
        idx = np.array(cells)
        rows, cols = rr[idx], cc[idx]
        df = np.abs(rows[:, None] - rows[None, :]) + np.abs(cols[:, None] - cols[None, :])
        a = int((dvals - df[iu]).max())
        if a < best[0]:
            best[0] = a
        return best[0] == 0

    try:
        emb.run(cb)
    except BudgetExceeded:
        return None
    return best[0]


def embed_components_diagonally(g: Graph, budget: int | None = DEFAULT_BUDGET) -> SolveResult:
    """Unrestricted embedding: each component in its own s×s box along the diagonal."""
    t0 = time.perf_counter()
    n = g.n
    pos: dict[int, tuple[int, int]] = {}
    offset = 0
    nodes = 0
    for comp in connected_components(g):
        sub, old = g.induced(comp)
        s = sub.n
        res = brute_force_embed(sub, s, s, budget)
        nodes += res.stats.get("nodes", 0)
        if res.answer is not Answer.YES:
            return SolveResult(res.answer, None, {"nodes": nodes, "elapsed": time.perf_counter() - t0})
        assert res.witness is not None
        for v, (a, b) in res.witness.pos.items():
            pos[old[v]] = (a + offset, b + offset)
        offset += s
    f = GridEmbedding(max(n, 1), max(n, 1), pos)
    return SolveResult(Answer.YES, f, {"nodes": nodes, "elapsed": time.perf_counter() - t0})


def caterpillar_spine(g: Graph, comp: frozenset[int]) -> list[int] | None:
    """Spine (non-leaf vertices in path order) of a caterpillar component, else ``None``."""
    vs = sorted(comp)
    m = sum(1 for u, v in g.edges if u in comp)
    if m != len(vs) - 1:
        return None
    if len(vs) <= 2:
        return [vs[0]] if len(vs) == 1 else list(vs)
    inner = [v for v in vs if g.degree(v) > 1]
    inner_set = set(inner)
    deg_in = {v: sum(1 for w in g.adj[v] if w in inner_set) for v in inner}
    if any(d > 2 for d in deg_in.values()):
        return None
    ends = [v for v in inner if deg_in[v] <= 1]
    start = min(ends)
    path = [start]
    prev = None
    while True:
        nxt = [w for w in g.adj[path[-1]] if w in inner_set and w != prev]
        if not nxt:
            break
        prev = path[-1]
        path.append(nxt[0])
    return path if len(path) == len(inner) else None


def _caterpillar_layout(g: Graph, comps: list[frozenset[int]], spines: list[list[int]],
                        ends_outward: bool) -> tuple[dict[int, tuple[int, int]], int, int] | None:
    layouts = []
    height = 1
    for comp, spine in zip(comps, spines):
        spine_set = set(spine)
        if len(comp) == 2:
            layouts.append({spine[0]: (0, 0), spine[1]: (0, 1)})
            continue
        placed: dict[int, tuple[int, int]] = {}
        left = right = None
        last = len(spine) - 1
        for idx, s in enumerate(spine):
            leaves = sorted(w for w in g.adj[s] if w not in spine_set)
            if ends_outward:
                if idx == 0 and leaves:
                    left = leaves.pop(0)
                if idx == last and leaves:
                    right = leaves.pop(0)
            vertical, extra = leaves[:2], leaves[2:]
            if extra and idx == 0 and left is None:
                left = extra.pop(0)
            if extra and idx == last and right is None:
                right = extra.pop(0)
            if extra:
                return None
            placed[s] = (0, idx)
            if vertical:
                placed[vertical[0]] = (-1, idx)
                height = max(height, 2)
            if len(vertical) > 1:
                placed[vertical[1]] = (1, idx)
                height = 3
        shift = 1 if left is not None else 0
        cells = {v: (a, b + shift) for v, (a, b) in placed.items()}
        if left is not None:
            cells[left] = (0, 0)
        if right is not None:
            cells[right] = (0, len(spine) + shift)
        layouts.append(cells)
    spine_row = 1 if height == 1 else 2
    pos: dict[int, tuple[int, int]] = {}
    offset = 0
    for cells in layouts:
        for v, (a, b) in cells.items():
            pos[v] = (spine_row + a, b + offset + 1)
        offset += max(b for _, b in cells.values()) + 2
    return pos, max(offset - 1, 0), height


def embed_caterpillar_forest(g: Graph, k: int, r: int) -> SolveResult:
    """Straight-spine layout for forests of caterpillars.

    A caterpillar's spine sits on one row; each spine vertex puts its first leaf
    above and its second below, while leaves of the spine ends may instead
    continue the row outward (both variants are tried). Components are packed
    left to right with one empty column between them. The layout is one
    specific shape, so a layout that does not fit yields ``unknown``; ``no`` is
    reserved for forests that embed nowhere.
    """
    t0 = time.perf_counter()
    comps = connected_components(g)
    spines = [caterpillar_spine(g, c) for c in comps]
    if any(s is None for s in spines):
        return SolveResult(Answer.NOT_APPLICABLE, None, {"elapsed": time.perf_counter() - t0})
    if g.max_degree > 4:
        return SolveResult(Answer.NO, None, {"elapsed": time.perf_counter() - t0, "reason": "degree"})
    stats: dict = {}
    for outward in (False, True):
        lay = _caterpillar_layout(g, comps, spines, outward)  # type: ignore[arg-type]
        if lay is None:
            continue
        pos, width, height = lay
        stats = {"elapsed": time.perf_counter() - t0, "width": width, "height": height}
        if width <= r and height <= k:
            f = GridEmbedding(k, r, pos)
            assert validate(g, f), validate(g, f).reason
            return SolveResult(Answer.YES, f, stats)
    return SolveResult(Answer.UNKNOWN, None, stats)
