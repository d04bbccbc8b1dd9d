"""Recognition of k×r grid graphs by a column sweep parameterized by a_G + k.

A candidate vertex ``v`` is pinned to the leftmost column. Vertices are sorted
into buckets of width ``W = k + a`` by their graph distance from ``v``; a vertex
of bucket ``i`` can only sit in column block ``i - 1`` or ``i``. The sweep walks
the blocks left to right and keeps, per block, the set of boundary states
``(used, right_col, prev_col)``. Columns are 0-based inside this module.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .embedding import GridEmbedding, distance_approximation, validate
from .graph import Graph, all_pairs_distances, is_connected
from .oracle import Answer, BudgetExceeded, DEFAULT_BUDGET, NodeCounter, SolveResult, _quick_no

EMPTY = -1
Placement = tuple[tuple[int, int, int], ...]  # (vertex, row, col), 0-based


class SweepState(NamedTuple):
    used: frozenset[int]
    right_col: tuple[int, ...]
    prev_col: tuple[int, ...]


def empty_state(k: int) -> SweepState:
    return SweepState(frozenset(), (EMPTY,) * k, (EMPTY,) * k)


@dataclass(frozen=True)
class BucketPartition:
    source: int
    width: int
    buckets: tuple[frozenset[int], ...]

    def bucket_of(self, u: int) -> int:
        for i, b in enumerate(self.buckets):
            if u in b:
                return i
        raise KeyError(u)


@dataclass(frozen=True)
class Reject:
    reason: str

    def __bool__(self) -> bool:
        return False


def bucketize(g: Graph, v: int, k: int, a: int, r: int,
              dist: np.ndarray | None = None) -> BucketPartition | Reject:
    """Buckets ``D_i = {u : floor(d(v,u) / (k+a)) = i}`` or the reason they are unusable."""
    if not is_connected(g):
        raise ValueError("bucketize needs a connected graph")
    d = all_pairs_distances(g)[v] if dist is None else dist[v]
    w = k + a
    # col(u) >= d(v,u) - a - k must still fit in the r columns
    if int(d.max()) - a > r + k - 1:
        return Reject("distance")
    count = int(d.max()) // w + 1
    buckets = [set() for _ in range(count)]
    for u in range(g.n):
        buckets[int(d[u]) // w].add(u)
    if any(len(b) > 2 * k * w for b in buckets):
        return Reject("bucket size")
    return BucketPartition(v, w, tuple(frozenset(b) for b in buckets))


class _Sweep:
    """Shared context for the sweep from one source vertex."""

    def __init__(self, g: Graph, k: int, r: int, a: int, part: BucketPartition,
                 dist: np.ndarray, counter: NodeCounter) -> None:
        self.g, self.k, self.r, self.a = g, k, r, a
        self.w = part.width
        self.part = part
        self.dist = dist
        self.dv = dist[part.source]
        self.counter = counter
        self.blocks = math.ceil(r / self.w)
        self.before: list[frozenset[int]] = []
        acc: set[int] = set()
        for t in range(self.blocks + 2):
            self.before.append(frozenset(acc))
            acc |= self.bucket(t)

    def bucket(self, i: int) -> frozenset[int]:
        return self.part.buckets[i] if 0 <= i < len(self.part.buckets) else frozenset()

    def window(self, u: int, t: int) -> range:
        du = int(self.dv[u])
        c0 = t * self.w
        c1 = min(c0 + self.w - 1, self.r - 1)
        lo, hi = max(du - self.w, c0), min(du, c1)
        if u == self.part.source:
            lo, hi = 0, 0 if t == 0 else -1
        return range(lo, hi + 1)

    def iteration(self, prev: SweepState, t: int) -> dict[SweepState, list[Placement]]:
        """All successor states of ``prev`` through block ``t`` with their placements."""
        g, k, w = self.g, self.k, self.w
        c0 = t * w
        last_nominal = c0 + w - 1
        final = t == self.blocks - 1
        mandatory = sorted(self.bucket(t) - prev.used)
        optional = [u for u in sorted(self.bucket(t + 1)) if len(self.window(u, t))]
        if final:
            if len(optional) != len(self.bucket(t + 1)):
                return {}
            mandatory += optional
            optional = []
        opt_set = set(optional)
        left = {u: (i, c0 - 1) for i, u in enumerate(prev.right_col) if u != EMPTY}
        prev_pos = {u: (i, c0 - 2) for i, u in enumerate(prev.prev_col) if u != EMPTY}
        earlier = self.before[t] | prev.used
        # order: vertices touching what is already fixed first
        order: list[int] = []
        pool = mandatory + optional
        fixed = set(left)
        remaining = list(pool)
        while remaining:
            best = max(remaining, key=lambda u: (sum(1 for x in g.adj[u] if x in fixed), u not in opt_set, -u))
            order.append(best)
            fixed.add(best)
            remaining.remove(best)

        pos: dict[int, tuple[int, int]] = dict(left)
        occupied = {c: u for u, c in left.items()}
        out: dict[SweepState, list[Placement]] = {}
        dist, a = self.dist, self.a

        def fits(u: int, cell: tuple[int, int]) -> bool:
            for x in g.adj[u]:
                if x in pos:
                    px = pos[x]
                    if abs(px[0] - cell[0]) + abs(px[1] - cell[1]) != 1:
                        return False
                elif x in earlier:
                    return False
            for x, px in pos.items():
                if dist[u, x] - abs(px[0] - cell[0]) - abs(px[1] - cell[1]) > a:
                    return False
            for x, px in prev_pos.items():
                if dist[u, x] - abs(px[0] - cell[0]) - abs(px[1] - cell[1]) > a:
                    return False
            return True

        def finish() -> None:
            placed_now = set(pos) - set(left)
            done = earlier | placed_now
            for u, (_, c) in pos.items():
                if c != last_nominal and any(x not in done for x in g.adj[u]):
                    return
            used = frozenset(placed_now & self.bucket(t + 1))
            right = [EMPTY] * k
            before_right = [EMPTY] * k
            for u, (i, c) in list(pos.items()) + list(prev_pos.items()):
                if c == last_nominal:
                    right[i] = u
                elif c == last_nominal - 1:
                    before_right[i] = u
            state = SweepState(used, tuple(right), tuple(before_right))
            placement = tuple(sorted((u, pos[u][0], pos[u][1]) for u in placed_now))
            out.setdefault(state, []).append(placement)

        def rec(i: int) -> None:
            self.counter.tick()
            if i == len(order):
                finish()
                return
            u = order[i]
            cols = self.window(u, t)
            for c in cols:
                for row in range(k):
                    cell = (row, c)
                    if cell in occupied or not fits(u, cell):
                        continue
                    pos[u] = cell
                    occupied[cell] = u
                    rec(i + 1)
                    del occupied[cell]
                    del pos[u]
            if u in opt_set:
                # left for the next block: no neighbour of u may be stuck off the last column
                rec(i + 1)

        rec(0)
        return out


def sweep_iteration(prev: Iterable[SweepState], current_bucket: Iterable[int], next_bucket: Iterable[int],
                    a: int, k: int, g: Graph, *, source: int, block: int, r: int,
                    budget: int | None = DEFAULT_BUDGET) -> set[SweepState]:
    """States reachable through block ``block`` from any state in ``prev``.

    ``current_bucket`` and ``next_bucket`` must be the buckets ``D_block`` and
    ``D_block+1`` of ``bucketize(g, source, k, a, r)``.
    """
    dist = all_pairs_distances(g)
    part = bucketize(g, source, k, a, r, dist)
    if not part:
        raise ValueError(f"source rejected: {part.reason}")
    sw = _Sweep(g, k, r, a, part, dist, NodeCounter(budget))
    if set(current_bucket) != sw.bucket(block) or set(next_bucket) != sw.bucket(block + 1):
        raise ValueError("buckets do not match the partition of the source")
    out: set[SweepState] = set()
    for s in prev:
        out |= set(sw.iteration(s, block))
    return out


@dataclass
class SweepRun:
    """Stage state sets of one sweep; ``stages[t]`` maps a state to its (parent, placement) links."""

    source: int
    partition: BucketPartition
    stages: list[dict[SweepState, list[tuple[SweepState, Placement]]]] = field(default_factory=list)

    def state_sets(self) -> list[set[SweepState]]:
        return [set(s) for s in self.stages]


def run_sweep(g: Graph, k: int, r: int, a: int, v: int, dist: np.ndarray | None = None,
              counter: NodeCounter | None = None) -> SweepRun | Reject:
    dist = all_pairs_distances(g) if dist is None else dist
    part = bucketize(g, v, k, a, r, dist)
    if not part:
        return part
    sw = _Sweep(g, k, r, a, part, dist, counter or NodeCounter(None))
    run = SweepRun(v, part)
    frontier: dict[SweepState, list] = {empty_state(k): []}
    for t in range(sw.blocks):
        nxt: dict[SweepState, list[tuple[SweepState, Placement]]] = {}
        for s in frontier:
            for s2, pls in sw.iteration(s, t).items():
                links = nxt.setdefault(s2, [])
                links.extend((s, p) for p in pls)
        run.stages.append(nxt)
        frontier = nxt
        if not frontier:
            break
    return run


def _witness(g: Graph, run: SweepRun, k: int, r: int, a: int, dist: np.ndarray,
             counter: NodeCounter) -> GridEmbedding | None:
    """Walk parent links backwards, keeping the first full placement with a_f <= a."""
    if not run.stages or not run.stages[-1]:
        return None
    last = len(run.stages) - 1
    pos: dict[int, tuple[int, int]] = {}

    def add(placement: Placement) -> bool:
        for u, i, c in placement:
            for x, (i2, c2) in pos.items():
                if dist[u, x] - abs(i - i2) - abs(c - c2) > a:
                    return False
        return True

    def rec(t: int, state: SweepState) -> bool:
        counter.tick()
        if t < 0:
            return True
        for parent, placement in run.stages[t][state]:
            if not add(placement):
                continue
            for u, i, c in placement:
                pos[u] = (i, c)
            if rec(t - 1, parent):
                return True
            for u, _, _ in placement:
                del pos[u]
        return False

    for end in run.stages[last]:
        if rec(last, end) and len(pos) == g.n:
            return GridEmbedding(k, r, {u: (i + 1, c + 1) for u, (i, c) in pos.items()})
    return None


def solve_with_a(g: Graph, k: int, r: int, a: int, budget: int | None = DEFAULT_BUDGET,
                 counter: NodeCounter | None = None) -> SolveResult:
    """Decide whether some k×r embedding has ``a_f <= a``."""
    if not is_connected(g):
        raise ValueError("solve_with_a needs a connected graph")
    t0 = time.perf_counter()
    counter = counter or NodeCounter(budget)
    if g.n == 0:
        return SolveResult(Answer.YES, GridEmbedding(k, r, {}), {"nodes": 0}, a)
    if _quick_no(g, k, r):
        return SolveResult(Answer.NO, None, {"nodes": counter.nodes}, None)
    dist = all_pairs_distances(g)
    try:
        for v in range(g.n):
            run = run_sweep(g, k, r, a, v, dist, counter)
            if not run:
                continue
            f = _witness(g, run, k, r, a, dist, counter)
            if f is not None:
                assert validate(g, f)
                return SolveResult(Answer.YES, f, {"nodes": counter.nodes, "source": v,
                                                   "elapsed": time.perf_counter() - t0}, a)
    except BudgetExceeded:
        return SolveResult(Answer.UNKNOWN, None, {"nodes": counter.nodes, "elapsed": time.perf_counter() - t0})
    return SolveResult(Answer.NO, None, {"nodes": counter.nodes, "elapsed": time.perf_counter() - t0})


def solve_distance_fpt(g: Graph, k: int, r: int, budget: int | None = DEFAULT_BUDGET) -> SolveResult:
    """Try ``a = 0, 1, ...``; the first success reports the minimal ``a_f``."""
    t0 = time.perf_counter()
    n = g.n
    counter = NodeCounter(budget)
    if _quick_no(g, k, r):
        return SolveResult(Answer.NO, None, {"nodes": 0, "reason": _quick_no(g, k, r)}, n)
    # a_f <= |V| - 2 for every embedding of a connected graph with two or more vertices
    for a in range(max(n - 1, 1)):
        res = solve_with_a(g, k, r, a, counter=counter)
        if res.answer is Answer.UNKNOWN:
            return res
        if res.yes:
            assert res.witness is not None and distance_approximation(g, res.witness).a_f == a
            res.stats["elapsed"] = time.perf_counter() - t0
            return res
    return SolveResult(Answer.NO, None, {"nodes": counter.nodes, "elapsed": time.perf_counter() - t0}, n)


def extract_states(g: Graph, f: GridEmbedding, v: int, a: int) -> list[SweepState]:
    """The state each block of the sweep from ``v`` should contain for the embedding ``f``.

    ``f`` must put ``v`` in its first column.
    """
    k, r = f.k, f.r
    part = bucketize(g, v, k, a, r)
    if not part:
        raise ValueError(f"source rejected: {part.reason}")
    w = part.width
    col = {u: c - 1 for u, (_, c) in f.pos.items()}
    if col[v] != 0:
        raise ValueError("source must sit in the first column")
    out = []
    for t in range(math.ceil(r / w)):
        last = t * w + w - 1
        nxt = part.buckets[t + 1] if t + 1 < len(part.buckets) else frozenset()
        used = frozenset(u for u in nxt if col[u] <= last)
        right = [EMPTY] * k
        before = [EMPTY] * k
        for u, (i, c) in f.pos.items():
            if c - 1 == last:
                right[i - 1] = u
            elif c - 1 == last - 1:
                before[i - 1] = u
        out.append(SweepState(used, tuple(right), tuple(before)))
    return out
