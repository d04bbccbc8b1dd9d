"""Recognition parameterized by mcc + k through block snapshots and an ILP over a block digraph.

The k×r lattice is cut into ``p`` blocks of width ``mcc`` that share one column
with their neighbours (the last block may be narrower). A snapshot is a
positioned subgraph of one block. A solution is a walk start -> ... -> end of
``p`` snapshots whose consecutive pairs agree on the shared column; the walk is
found as an Eulerian path in a multidigraph whose arc multiplicities come from
an integer program. Cells are 0-based ``(row, col)`` inside a block.
"""

from __future__ import annotations

import math
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterator, Sequence

from .embedding import GridEmbedding, validate
from .graph import (
    ComponentCatalog,
    Graph,
    MultiDigraph,
    canonical_form,
    component_catalog,
    find_isomorphism,
)
from .oracle import (
    DEFAULT_BUDGET,
    Answer,
    BudgetExceeded,
    NodeCounter,
    SolveResult,
    _quick_no,
    brute_force_embed,
    iter_embeddings,
)

Cell = tuple[int, int]
CellEdge = tuple[Cell, Cell]

START, MID, END = "start", "mid", "end"
COUNTING_MODES = ("corrected", "literal")


# ---------------------------------------------------------------------------
# blocks


def block_plan(r: int, mcc: int) -> tuple[int, tuple[int, ...]]:
    """Block count and widths; consecutive blocks share one column."""
    if mcc < 2 or r < 2:
        raise ValueError("block_plan needs mcc >= 2 and r >= 2")
    p = math.ceil((r - 1) / (mcc - 1))
    last = r - (p - 1) * (mcc - 1)
    return p, (mcc,) * (p - 1) + (last,)


def block_offsets(widths: Sequence[int]) -> list[int]:
    """0-based first column of each block."""
    out, c = [], 0
    for w in widths:
        out.append(c)
        c += w - 1
    return out


# ---------------------------------------------------------------------------
# snapshots


def _edge(a: Cell, b: Cell) -> CellEdge:
    return (a, b) if a <= b else (b, a)


def _components(cells: frozenset[Cell], edges: frozenset[CellEdge]) -> list[tuple[frozenset[Cell], frozenset[CellEdge]]]:
    adj: dict[Cell, list[Cell]] = {c: [] for c in cells}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen: set[Cell] = set()
    out = []
    for c in sorted(cells):
        if c in seen:
            continue
        comp = {c}
        stack = [c]
        seen.add(c)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    comp.add(y)
                    stack.append(y)
        fc = frozenset(comp)
        out.append((fc, frozenset(e for e in edges if e[0] in fc)))
    return out


def shape_graph(cells: frozenset[Cell], edges: frozenset[CellEdge]) -> tuple[Graph, list[Cell]]:
    order = sorted(cells)
    idx = {c: i for i, c in enumerate(order)}
    return Graph(len(order), frozenset(tuple(sorted((idx[a], idx[b]))) for a, b in edges)), order


@dataclass(frozen=True)
class Snapshot:
    """A positioned subgraph of a k×w block."""

    k: int
    w: int
    cells: frozenset[Cell]
    edges: frozenset[CellEdge]

    def __post_init__(self) -> None:
        for a, b in self.edges:
            if a not in self.cells or b not in self.cells or abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                raise ValueError(f"edge {a}-{b} does not join unit-adjacent occupied cells")
        for r, c in self.cells:
            if not (0 <= r < self.k and 0 <= c < self.w):
                raise ValueError(f"cell {(r, c)} outside the {self.k}x{self.w} block")

    @cached_property
    def key(self) -> tuple:
        return (self.k, self.w, tuple(sorted(self.cells)), tuple(sorted(self.edges)))

    def __lt__(self, other: "Snapshot") -> bool:
        return self.key < other.key

    @cached_property
    def components(self) -> list[tuple[frozenset[Cell], frozenset[CellEdge]]]:
        return _components(self.cells, self.edges)

    def column(self, c: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Occupied rows of column ``c`` and the rows whose upward edge lies in it."""
        rows = tuple(sorted(r for r, cc in self.cells if cc == c))
        vert = tuple(sorted(min(a[0], b[0]) for a, b in self.edges if a[1] == b[1] == c))
        return rows, vert

    def left_column(self) -> tuple:
        return self.column(0)

    def right_column(self) -> tuple:
        return self.column(self.w - 1)

    def sides(self) -> list[tuple[frozenset[Cell], frozenset[CellEdge], bool, bool]]:
        """Components with flags (touches left boundary, touches right boundary)."""
        out = []
        for cells, edges in self.components:
            cols = {c for _, c in cells}
            out.append((cells, edges, 0 in cols, self.w - 1 in cols))
        return out


class _Shapes:
    """Class lookup for positioned components, cached by translated shape."""

    def __init__(self, catalog: ComponentCatalog) -> None:
        self.catalog = catalog
        self.sizes = {rep.n for rep, _ in catalog.classes}
        self.cache: dict[tuple, int | None] = {}

    def class_of(self, cells: frozenset[Cell], edges: frozenset[CellEdge]) -> int | None:
        if len(cells) not in self.sizes:
            return None
        r0 = min(r for r, _ in cells)
        c0 = min(c for _, c in cells)
        key = (tuple(sorted((r - r0, c - c0) for r, c in cells)),
               tuple(sorted(((a[0] - r0, a[1] - c0), (b[0] - r0, b[1] - c0)) for a, b in edges)))
        if key not in self.cache:
            g, _ = shape_graph(cells, edges)
            self.cache[key] = self.catalog.class_of_form(canonical_form(g))
        return self.cache[key]


@dataclass
class SnapshotInfo:
    """FC/LC/RC classification of one snapshot."""

    snapshot: Snapshot
    source: bool
    sink: bool
    freq_cen: Counter
    freq_left: Counter
    freq_right: Counter


def _classify_literal(s: Snapshot, shapes: _Shapes) -> SnapshotInfo | None:
    cen, left, right = Counter(), Counter(), Counter()
    source = sink = True
    for cells, edges, tl, tr in s.sides():
        cls = shapes.class_of(cells, edges)
        if tl == tr:
            if cls is None:
                return None
            cen[cls] += 1
        elif tl:
            if cls is None:
                source = False
            else:
                left[cls] += 1
        else:
            if cls is None:
                sink = False
            else:
                right[cls] += 1
    return SnapshotInfo(s, source, sink, cen, left, right)


def enumerate_snapshots(k: int, w: int, catalog: ComponentCatalog,
                        budget: int | None = DEFAULT_BUDGET) -> list[SnapshotInfo]:
    """Every subgraph of the k×w block whose fully contained components are catalogued."""
    counter = NodeCounter(budget)
    shapes = _Shapes(catalog)
    all_cells = [(r, c) for r in range(k) for c in range(w)]
    out = []
    for mask in range(1 << len(all_cells)):
        cells = frozenset(c for i, c in enumerate(all_cells) if mask >> i & 1)
        pairs = sorted(_edge(a, (a[0] + dr, a[1] + dc)) for a in cells for dr, dc in ((1, 0), (0, 1))
                       if (a[0] + dr, a[1] + dc) in cells)
        for emask in range(1 << len(pairs)):
            counter.tick()
            edges = frozenset(p for i, p in enumerate(pairs) if emask >> i & 1)
            info = _classify_literal(Snapshot(k, w, cells, edges), shapes)
            if info is not None:
                out.append(info)
    return out


@dataclass(frozen=True)
class AdjacencyEntry:
    left: int
    right: int
    boundary_freq: Counter


def _union(s1: Snapshot, s2: Snapshot) -> tuple[frozenset[Cell], frozenset[CellEdge]]:
    off = s1.w - 1
    cells = set(s1.cells) | {(r, c + off) for r, c in s2.cells}
    edges = set(s1.edges) | {_edge((a[0], a[1] + off), (b[0], b[1] + off)) for a, b in s2.edges}
    return frozenset(cells), frozenset(edges)


def _pair_components(s1: Snapshot, s2: Snapshot) -> list[tuple[frozenset[Cell], frozenset[CellEdge], bool, bool]]:
    """Components of the union that meet the shared column, with outer-column flags."""
    cells, edges = _union(s1, s2)
    mid, right = s1.w - 1, s1.w + s2.w - 2
    out = []
    for cc, ee in _components(cells, edges):
        cols = {c for _, c in cc}
        if mid in cols:
            out.append((cc, ee, 0 in cols, right in cols))
    return out


def compute_adjacency(snapshots: Sequence[Snapshot], k: int, mcc: int, catalog: ComponentCatalog,
                      right_snapshots: Sequence[Snapshot] | None = None) -> list[AdjacencyEntry]:
    """Pairs agreeing on the shared column whose crossing components are catalogued.

    ``right_snapshots`` defaults to ``snapshots``; entries index into the two lists.
    """
    shapes = _Shapes(catalog)
    rights = snapshots if right_snapshots is None else right_snapshots
    by_left: dict[tuple, list[int]] = defaultdict(list)
    for j, s in enumerate(rights):
        by_left[s.left_column()].append(j)
    out = []
    for i, s1 in enumerate(snapshots):
        if s1.w != mcc:
            continue
        for j in by_left.get(s1.right_column(), []):
            freq: Counter = Counter()
            ok = True
            for cc, ee, tl, tr in _pair_components(s1, rights[j]):
                cls = shapes.class_of(cc, ee)
                if cls is None:
                    ok = False
                    break
                if not tl and not tr:
                    freq[cls] += 1
            if ok:
                out.append(AdjacencyEntry(i, j, freq))
    return out


# ---------------------------------------------------------------------------
# block digraph, spanning trees, ILP


def build_digraph(start: Hashable, end: Hashable, chosen: Sequence[Hashable],
                  adj: set[tuple[Hashable, Hashable]]) -> MultiDigraph:
    """D(start, end, chosen): no arcs into start, none out of end, loops allowed."""
    d = MultiDigraph()
    d.add_vertex(start)
    for s in chosen:
        d.add_vertex(s)
    d.add_vertex(end)
    for s in chosen:
        if (start, s) in adj:
            d.add_arc(start, s)
    if (start, end) in adj:
        d.add_arc(start, end)
    for s in chosen:
        for t in chosen:
            if (s, t) in adj:
                d.add_arc(s, t)
        if (s, end) in adj:
            d.add_arc(s, end)
    return d


def enumerate_spanning_trees(vertices: Sequence[Hashable],
                             edges: Sequence[tuple[Hashable, Hashable]]) -> Iterator[tuple[int, ...]]:
    """Spanning trees as sorted tuples of edge indices, by contraction and deletion.

    Parallel edges are distinct; loops never appear in a tree.
    """
    vs = list(vertices)
    if not vs:
        return
    index = {v: i for i, v in enumerate(vs)}
    base = [(index[a], index[b]) for a, b in edges]

    def find(parent: list[int], x: int) -> int:
        while parent[x] != x:
            x = parent[x]
        return x

    def connected(parent: list[int], allowed: list[int]) -> bool:
        p = list(parent)
        for e in allowed:
            a, b = find(p, base[e][0]), find(p, base[e][1])
            if a != b:
                p[a] = b
        roots = {find(p, x) for x in range(len(vs))}
        return len(roots) == 1

    def rec(parent: list[int], remaining: list[int], chosen: list[int], comps: int) -> Iterator[tuple[int, ...]]:
        if comps == 1:
            yield tuple(sorted(chosen))
            return
        live = [e for e in remaining if find(parent, base[e][0]) != find(parent, base[e][1])]
        if not live or not connected(parent, live):
            return
        e, rest = live[0], live[1:]
        p2 = list(parent)
        a, b = find(p2, base[e][0]), find(p2, base[e][1])
        p2[a] = b
        yield from rec(p2, rest, chosen + [e], comps - 1)
        yield from rec(parent, rest, chosen, comps)

    yield from rec(list(range(len(vs))), list(range(len(base))), [], len(vs))


@dataclass
class IlpSystem:
    """Integer feasibility system ``sum coef * x = rhs`` with box bounds."""

    names: list[Hashable]
    lower: list[int]
    upper: list[int]
    equations: list[tuple[dict[int, int], int, str]] = field(default_factory=list)

    def add(self, coeffs: dict[int, int], rhs: int, family: str) -> None:
        self.equations.append(({j: c for j, c in coeffs.items() if c}, rhs, family))

    def satisfied_by(self, x: Sequence[int]) -> bool:
        if any(not (lo <= v <= hi) for v, lo, hi in zip(x, self.lower, self.upper)):
            return False
        return all(sum(c * x[j] for j, c in eq.items()) == rhs for eq, rhs, _ in self.equations)


def _propagate(sys: IlpSystem, lo: list[int], hi: list[int]) -> bool:
    changed = True
    while changed:
        changed = False
        for eq, rhs, _ in sys.equations:
            smin = sum(c * (lo[j] if c > 0 else hi[j]) for j, c in eq.items())
            smax = sum(c * (hi[j] if c > 0 else lo[j]) for j, c in eq.items())
            if smin > rhs or smax < rhs:
                return False
            for j, c in eq.items():
                own_min = c * (lo[j] if c > 0 else hi[j])
                own_max = c * (hi[j] if c > 0 else lo[j])
                # c * x_j must lie in [a, b]
                a, b = rhs - (smax - own_max), rhs - (smin - own_min)
                if c > 0:
                    nlo, nhi = -(-a // c), b // c
                else:
                    nlo, nhi = -(-b // c), a // c
                if nlo > lo[j]:
                    lo[j] = nlo
                    changed = True
                if nhi < hi[j]:
                    hi[j] = nhi
                    changed = True
                if lo[j] > hi[j]:
                    return False
    return True


def ilp_feasible(sys: IlpSystem, counter: NodeCounter | None = None) -> list[int] | None:
    """Depth-first search with interval propagation over the bounded box."""
    counter = counter or NodeCounter(None)
    n = len(sys.names)

    def rec(lo: list[int], hi: list[int]) -> list[int] | None:
        counter.tick()
        if not _propagate(sys, lo, hi):
            return None
        free = [j for j in range(n) if lo[j] < hi[j]]
        if not free:
            return list(lo) if sys.satisfied_by(lo) else None
        j = min(free, key=lambda x: (hi[x] - lo[x], x))
        for val in range(lo[j], hi[j] + 1):
            lo2, hi2 = list(lo), list(hi)
            lo2[j] = hi2[j] = val
            got = rec(lo2, hi2)
            if got is not None:
                return got
        return None

    return rec(list(sys.lower), list(sys.upper))


def eulerian_path(d: MultiDigraph, x: dict[tuple[Hashable, Hashable], int], start: Hashable) -> list[Hashable]:
    """Hierholzer walk through every arc copy of the multigraph ``x``."""
    out: dict[Hashable, list[Hashable]] = defaultdict(list)
    for (a, b), c in sorted(x.items(), key=lambda t: repr(t[0])):
        out[a].extend([b] * c)
    for a in out:
        out[a].reverse()
    stack, path = [start], []
    while stack:
        v = stack[-1]
        if out[v]:
            stack.append(out[v].pop())
        else:
            path.append(stack.pop())
    path.reverse()
    if len(path) != sum(x.values()) + 1:
        raise ValueError("arc multiplicities do not form a connected Eulerian path")
    return path


# ---------------------------------------------------------------------------
# solver context


@dataclass
class FlowRecord:
    """Everything needed to re-check a solution flow equation by equation."""

    p: int
    num: tuple[int, ...]
    arcs: list[tuple[Hashable, Hashable]]
    tree: tuple[int, ...]
    x: list[int]
    start: Hashable
    end: Hashable
    counting: str
    arc_counts: list[Counter]
    const_counts: Counter


class _Context:
    def __init__(self, g: Graph, k: int, r: int, catalog: ComponentCatalog, counting: str,
                 counter: NodeCounter) -> None:
        if counting not in COUNTING_MODES:
            raise ValueError(f"counting must be one of {COUNTING_MODES}")
        self.g, self.k, self.r = g, k, r
        self.catalog = catalog
        self.counting = counting
        self.counter = counter
        self.mcc = catalog.mcc
        self.num = catalog.multiplicities()
        self.p, self.widths = block_plan(r, self.mcc)
        self.shapes = _Shapes(catalog)
        self._block_cache: dict[tuple[Snapshot, str], Counter | None] = {}
        self._pair_cache: dict[tuple[Snapshot, Snapshot], list | None] = {}

    # pieces and snapshots

    def _class_shapes(self) -> list[list[tuple[frozenset[Cell], frozenset[CellEdge]]]]:
        out = []
        for rep, _ in self.catalog.classes:
            seen = set()
            shapes = []
            for f in iter_embeddings(rep, self.k, min(self.mcc, rep.n)):
                cols = [c for _, c in f.pos.values()]
                if min(cols) != 1:
                    continue
                self.counter.tick()
                cells = {v: (a - 1, b - 1) for v, (a, b) in f.pos.items()}
                key = frozenset(cells.values())
                edges = frozenset(_edge(cells[u], cells[v]) for u, v in rep.edges)
                if (key, edges) not in seen:
                    seen.add((key, edges))
                    shapes.append((key, edges))
            out.append(shapes)
        return out

    def snapshots(self, w: int) -> list[Snapshot]:
        """Snapshots of a k×w block that are unions of restricted component placements."""
        pieces: list[tuple[int, frozenset[Cell], frozenset[CellEdge]]] = []
        seen = set()
        for cls, shapes in enumerate(self._class_shapes_cached):
            for cells, edges in shapes:
                width = max(c for _, c in cells) + 1
                for off in range(-(width - 1), w):
                    sc = frozenset((r, c + off) for r, c in cells if 0 <= c + off < w)
                    if not sc:
                        continue
                    se = frozenset(_edge((a[0], a[1] + off), (b[0], b[1] + off)) for a, b in edges
                                   if (a[0], a[1] + off) in sc and (b[0], b[1] + off) in sc)
                    if (cls, sc, se) not in seen:
                        seen.add((cls, sc, se))
                        pieces.append((cls, sc, se))
        pieces.sort(key=lambda t: (t[0], sorted(t[1]), sorted(t[2])))
        out: set[Snapshot] = set()
        used = [0] * len(self.num)

        def rec(i: int, cells: frozenset[Cell], edges: frozenset[CellEdge]) -> None:
            self.counter.tick()
            out.add(Snapshot(self.k, w, cells, edges))
            for j in range(i, len(pieces)):
                cls, sc, se = pieces[j]
                if used[cls] >= self.num[cls] or not sc.isdisjoint(cells):
                    continue
                used[cls] += 1
                rec(j + 1, cells | sc, edges | se)
                used[cls] -= 1

        rec(0, frozenset(), frozenset())
        return sorted(out)

    @cached_property
    def _class_shapes_cached(self):
        return self._class_shapes()

    # counting

    def block_counts(self, s: Snapshot, role: str) -> Counter | None:
        """Components this block accounts for in the given role, or None if the block is invalid."""
        key = (s, role)
        if key in self._block_cache:
            return self._block_cache[key]
        cont_left = role != START
        cont_right = role != END
        counts: Counter | None = Counter()
        if self.counting == "literal":
            info = _classify_literal(s, self.shapes)
            if info is None or (role == START and not info.source) or (role == END and not info.sink):
                counts = None
            else:
                counts = {START: info.freq_cen + info.freq_left, MID: info.freq_cen, END: info.freq_right}[role]
        else:
            for cells, edges, tl, tr in s.sides():
                partial = (tl and cont_left) or (tr and cont_right)
                spans = s.w == self.mcc and tl and tr and cont_left and cont_right
                if partial and not spans:
                    continue
                cls = self.shapes.class_of(cells, edges)
                if cls is None:
                    counts = None
                    break
                counts[cls] += 1
            if counts is not None and any(counts[c] > self.num[c] for c in counts):
                counts = None
        self._block_cache[key] = counts
        return counts

    def pair_components(self, s1: Snapshot, s2: Snapshot) -> list[tuple[int, bool, bool]] | None:
        """(class, touches left outer, touches right outer) of components meeting the shared column."""
        key = (s1, s2)
        if key not in self._pair_cache:
            res: list | None = []
            if s1.right_column() != s2.left_column():
                res = None
            else:
                for cc, ee, tl, tr in _pair_components(s1, s2):
                    cls = self.shapes.class_of(cc, ee)
                    if cls is None:
                        res = None
                        break
                    res.append((cls, tl, tr))
            self._pair_cache[key] = res
        return self._pair_cache[key]

    def pair_counts(self, s1: Snapshot, s2: Snapshot, lc_left: bool, rc_right: bool) -> Counter:
        comps = self.pair_components(s1, s2)
        assert comps is not None
        out: Counter = Counter()
        for cls, tl, tr in comps:
            if self.counting == "literal":
                if not tl and not tr:
                    out[cls] += 1
            elif not ((tl and lc_left) or (tr and rc_right)):
                out[cls] += 1
        return out


def _role(node: Hashable) -> str:
    return node[0]  # type: ignore[index]


@dataclass
class SnapshotRun:
    """Diagnostics of one solve: catalog sizes and every flow that produced a yes."""

    p: int = 0
    widths: tuple[int, ...] = ()
    counts: dict = field(default_factory=dict)
    flows: list[FlowRecord] = field(default_factory=list)
    ilp_calls: int = 0
    rejected_witnesses: int = 0


def _arc_counts(ctx: _Context, arcs: list[tuple[Hashable, Hashable]]) -> list[Counter]:
    """Per-arc coefficient of the component equation: the pair's share plus the tail block's share."""
    out = []
    for a, b in arcs:
        c = ctx.pair_counts(a[1], b[1], _role(a) != START, _role(b) != END)
        if ctx.counting == "literal":
            info = _classify_literal(a[1], ctx.shapes)
            assert info is not None
            c = c + info.freq_cen
        elif _role(a) == MID:
            c = c + ctx.block_counts(a[1], MID)
        out.append(c)
    return out


def build_ilp(ctx: _Context, d: MultiDigraph, tree: tuple[int, ...]) -> tuple[IlpSystem, list, list[Counter], Counter]:
    arcs = sorted(d.arcs, key=repr)
    n = len(arcs)
    start = next(v for v in d.vertices if _role(v) == START)
    end = next(v for v in d.vertices if _role(v) == END)
    tree_arcs = {arcs[i] for i in tree} if tree else set()
    lower = [1 if a in tree_arcs else 0 for a in arcs]
    sys = IlpSystem(list(arcs), lower, [ctx.p - 1] * n)
    for v in d.vertices:
        if v in (start, end):
            continue
        coeffs: dict[int, int] = defaultdict(int)
        for j, (a, b) in enumerate(arcs):
            if a == v:
                coeffs[j] += 1
            if b == v:
                coeffs[j] -= 1
        sys.add(dict(coeffs), 0, "conservation")
    sys.add({j: 1 for j, (a, _) in enumerate(arcs) if a == start}, 1, "start")
    sys.add({j: 1 for j, (_, b) in enumerate(arcs) if b == end}, 1, "end")
    sys.add({j: 1 for j in range(n)}, ctx.p - 1, "length")
    per_arc = _arc_counts(ctx, arcs)
    if ctx.counting == "literal":
        si = _classify_literal(start[1], ctx.shapes)
        ei = _classify_literal(end[1], ctx.shapes)
        assert si is not None and ei is not None
        const = si.freq_left + ei.freq_right
    else:
        const = ctx.block_counts(start[1], START) + ctx.block_counts(end[1], END)
    for i, num in enumerate(ctx.num):
        sys.add({j: per_arc[j][i] for j in range(n)}, num - const[i], "components")
    return sys, arcs, per_arc, const


def audit_flow(rec: FlowRecord) -> dict[str, bool]:
    """Re-evaluate each equation family on a recorded flow."""
    x = dict(zip(rec.arcs, rec.x))
    nodes = {v for a in rec.arcs for v in a}
    res = {}
    res["conservation"] = all(sum(c for (a, _), c in x.items() if a == v) == sum(c for (_, b), c in x.items() if b == v)
                    for v in nodes if v not in (rec.start, rec.end))
    res["start"] = sum(c for (a, _), c in x.items() if a == rec.start) == 1
    res["end"] = sum(c for (_, b), c in x.items() if b == rec.end) == 1
    res["length"] = sum(x.values()) == rec.p - 1
    total: Counter = Counter(rec.const_counts)
    for arc, cnt in zip(rec.arcs, rec.arc_counts):
        for cls, m in cnt.items():
            total[cls] += m * x[arc]
    res["components"] = all(total[i] == n for i, n in enumerate(rec.num))
    res["tree"] = all(rec.x[j] >= 1 for j in rec.tree)
    res["nonnegative"] = all(v >= 0 for v in rec.x)
    return res


# ---------------------------------------------------------------------------
# witness


def reconstruct_witness(ctx: _Context, walk: list[Hashable]) -> GridEmbedding | None:
    """Stamp the walk's snapshots into consecutive blocks and map components onto G."""
    offsets = block_offsets(ctx.widths)
    cells: set[Cell] = set()
    edges: set[CellEdge] = set()
    for node, off in zip(walk, offsets):
        s: Snapshot = node[1]
        cells |= {(r, c + off) for r, c in s.cells}
        edges |= {_edge((a[0], a[1] + off), (b[0], b[1] + off)) for a, b in s.edges}
    comps = _components(frozenset(cells), frozenset(edges))
    pool: dict[int, list[int]] = defaultdict(list)
    for ci, cls in enumerate(ctx.catalog.component_class):
        pool[cls].append(ci)
    pos: dict[int, Cell] = {}
    for cc, ee in comps:
        cls = ctx.shapes.class_of(cc, ee)
        if cls is None or not pool[cls]:
            return None
        comp = ctx.catalog.components[pool[cls].pop(0)]
        target, old = ctx.g.induced(comp)
        shape, order = shape_graph(cc, ee)
        phi = find_isomorphism(target, shape)
        if phi is None:
            return None
        for v in range(target.n):
            r, c = order[phi[v]]
            pos[old[v]] = (r + 1, c + 1)
    if any(pool.values()):
        return None
    f = GridEmbedding(ctx.k, ctx.r, pos)
    return f if validate(ctx.g, f) else None


# ---------------------------------------------------------------------------
# solver


def _fill_rows(g: Graph, k: int, r: int) -> GridEmbedding:
    return GridEmbedding(k, r, {v: (v // r + 1, v % r + 1) for v in range(g.n)})


def solve_mcc_k(g: Graph, k: int, r: int, budget: int | None = DEFAULT_BUDGET,
                counting: str = "corrected", run: SnapshotRun | None = None) -> SolveResult:
    """Decide k×r embeddability by the snapshot/ILP method.

    ``counting="corrected"`` accounts every component exactly once by the
    roles of the blocks and pairs it meets; ``"literal"`` counts each middle
    block in full and ignores fully contained components of the end block. Literal flows that do not reconstruct to a valid embedding
    are skipped and counted in ``run.rejected_witnesses``.
    """
    t0 = time.perf_counter()
    run = run if run is not None else SnapshotRun()
    counter = NodeCounter(budget)

    def done(answer: Answer, f: GridEmbedding | None = None, **extra) -> SolveResult:
        stats = {"nodes": counter.nodes, "elapsed": time.perf_counter() - t0, **extra}
        return SolveResult(answer, f, stats)

    if k < 1 or r < 1:
        raise ValueError("k and r must be positive")
    if g.n == 0:
        return done(Answer.YES, GridEmbedding(k, r, {}))
    reason = _quick_no(g, k, r)
    if reason:
        return done(Answer.NO, reason=reason)
    catalog = component_catalog(g)
    if catalog.mcc == 1:
        return done(Answer.YES, _fill_rows(g, k, r), path="isolated vertices")
    if r == 1 or math.ceil((r - 1) / (catalog.mcc - 1)) <= 1:
        res = brute_force_embed(g, k, r, budget)
        res.stats["path"] = "single block"
        return res
    ctx = _Context(g, k, r, catalog, counting, counter)
    run.p, run.widths = ctx.p, ctx.widths
    try:
        f = _search(ctx, run)
    except BudgetExceeded:
        return done(Answer.UNKNOWN, path="snapshots")
    if f is None:
        return done(Answer.NO, path="snapshots")
    return done(Answer.YES, f, path="snapshots")


def _search(ctx: _Context, run: SnapshotRun) -> GridEmbedding | None:
    p = ctx.p
    wide = ctx.snapshots(ctx.mcc)
    last = wide if ctx.widths[-1] == ctx.mcc else ctx.snapshots(ctx.widths[-1])
    starts = [s for s in wide if ctx.block_counts(s, START) is not None]
    mids = [s for s in wide if ctx.block_counts(s, MID) is not None] if p > 2 else []
    ends = [s for s in last if ctx.block_counts(s, END) is not None]
    run.counts = {"snapshots": len(wide), "starts": len(starts), "mids": len(mids), "ends": len(ends)}

    def succ(s: Snapshot, pool: list[Snapshot]) -> list[Snapshot]:
        return [t for t in pool if ctx.pair_components(s, t) is not None]

    by_left: dict[tuple, list[Snapshot]] = defaultdict(list)
    for s in mids:
        by_left[s.left_column()].append(s)
    ends_by_left: dict[tuple, list[Snapshot]] = defaultdict(list)
    for s in ends:
        ends_by_left[s.left_column()].append(s)
    mid_succ = {s: succ(s, by_left[s.right_column()]) for s in mids}
    mid_to_end = {s: succ(s, ends_by_left[s.right_column()]) for s in mids}
    # mids that can reach some end in exactly m more steps
    back: list[set[Snapshot]] = [set()] * (p - 1)
    back[p - 2] = {s for s in mids if mid_to_end[s]}
    for j in range(p - 3, 0, -1):
        back[j] = {s for s in mids if any(t in back[j + 1] for t in mid_succ[s])}

    for start in starts:
        ctx.counter.tick()
        if p > 2:
            first = succ(start, by_left[start.right_column()])
            layers: list[set[Snapshot]] = [set()] * (p - 1)
            layers[1] = {s for s in first if s in back[1]}
            for j in range(2, p - 1):
                layers[j] = {t for s in layers[j - 1] for t in mid_succ[s] if t in back[j]}
            subsets = _walk_subsets(ctx, start, layers, mid_succ, mid_to_end)
        else:
            subsets = {e: {frozenset()} for e in succ(start, ends_by_left[start.right_column()])}
        for end in sorted(subsets):
            order = sorted(set().union(*subsets[end]))
            rank = {s: i for i, s in enumerate(order)}
            ranked = sorted(subsets[end], key=lambda c: (len(c), sorted(rank[s] for s in c)))
            f = _try_pair(ctx, run, start, end, [sorted(c) for c in ranked])
            if f is not None:
                return f
    return None


def _walk_subsets(ctx: _Context, start: Snapshot, layers: list[set[Snapshot]],
                  mid_succ: dict, mid_to_end: dict) -> dict[Snapshot, set[frozenset[Snapshot]]]:
    """Per end block, the mid sets S that are exactly the mid blocks of some start..end walk of p blocks.

    Only such S can carry an Eulerian path of D(start, end, S) through every vertex, so the
    subset loop may skip the rest. Sets whose distinct blocks already account for more components
    than the graph has are dropped too (every chosen block is left at least once).
    """
    p = ctx.p
    if ctx.counting == "literal":
        fixed = _classify_literal(start, ctx.shapes).freq_left
    else:
        fixed = ctx.block_counts(start, START)
    budget = Counter(dict(enumerate(ctx.num))) - fixed
    out: dict[Snapshot, set[frozenset[Snapshot]]] = defaultdict(set)
    seen: set = set()
    stack = [(s, 1, frozenset([s])) for s in layers[1]]
    while stack:
        s, j, vis = stack.pop()
        if (s, j, vis) in seen:
            continue
        seen.add((s, j, vis))
        ctx.counter.tick()
        used = Counter()
        for t in vis:
            used += ctx.block_counts(t, MID)
        if any(used[c] > budget[c] for c in used):
            continue
        if j == p - 2:
            for e in mid_to_end[s]:
                out[e].add(vis)
            continue
        for t in mid_succ[s]:
            if t in layers[j + 1]:
                stack.append((t, j + 1, vis | {t}))
    return out


def _try_pair(ctx: _Context, run: SnapshotRun, start: Snapshot, end: Snapshot,
              subsets: list[list[Snapshot]]) -> GridEmbedding | None:
    s_node, e_node = (START, start), (END, end)
    for chosen in subsets:
        ctx.counter.tick()
        nodes = [(MID, s) for s in chosen]
        adj = set()
        for a in [s_node] + nodes:
            for b in nodes + [e_node]:
                if ctx.pair_components(a[1], b[1]) is not None:
                    adj.add((a, b))
        d = build_digraph(s_node, e_node, nodes, adj)
        arcs = sorted(d.arcs, key=repr)
        if not arcs:
            continue
        loopless = [a for a in arcs if a[0] != a[1]]
        shortcut = _relaxed_flow(ctx, run, d, arcs, loopless)
        if shortcut is None:
            continue
        tree_idx, x = shortcut
        if tree_idx is not None:
            f = _accept_flow(ctx, run, d, arcs, tree_idx, x, s_node, e_node)
            if f is not None:
                return f
        for tree in enumerate_spanning_trees(d.vertices, loopless):
            ctx.counter.tick()
            tree_idx = tuple(arcs.index(loopless[i]) for i in tree)
            sys, sys_arcs, per_arc, const = build_ilp(ctx, d, tree_idx)
            run.ilp_calls += 1
            x = ilp_feasible(sys, ctx.counter)
            if x is None:
                continue
            f = _accept_flow(ctx, run, d, sys_arcs, tree_idx, x, s_node, e_node, per_arc, const)
            if f is not None:
                return f
    return None


def _accept_flow(ctx: _Context, run: SnapshotRun, d: MultiDigraph, arcs: list, tree_idx: tuple[int, ...],
                 x: list[int], s_node: Hashable, e_node: Hashable,
                 per_arc: list[Counter] | None = None, const: Counter | None = None) -> GridEmbedding | None:
    if per_arc is None:
        _, _, per_arc, const = build_ilp(ctx, d, tree_idx)
    walk = eulerian_path(d, {a: v for a, v in zip(arcs, x) if v}, s_node)
    f = reconstruct_witness(ctx, walk)
    if f is None:
        run.rejected_witnesses += 1
        return None
    run.flows.append(FlowRecord(ctx.p, ctx.num, arcs, tree_idx, x, s_node, e_node,
                                ctx.counting, per_arc, const))
    return f


def _relaxed_flow(ctx: _Context, run: SnapshotRun, d: MultiDigraph, arcs: list,
                  loopless: list) -> tuple[tuple[int, ...] | None, list[int]] | None:
    """Solve the flow system with tree bounds replaced by "every vertex is left at least once".

    Any tree-bounded solution satisfies the relaxation, so None here rules out all trees of D.
    When the support of the relaxed flow is connected it contains a spanning tree, and the flow
    already solves that tree's system; the tree is returned with it.
    """
    sys, _, _, _ = build_ilp(ctx, d, ())
    n = len(arcs)
    for v in d.vertices:
        if _role(v) == END:
            continue
        j = len(sys.names)
        sys.names.append(("slack", v))
        sys.lower.append(0)
        sys.upper.append(ctx.p - 1)
        coeffs = {i: 1 for i, (a, _) in enumerate(arcs) if a == v}
        coeffs[j] = -1
        sys.add(coeffs, 1, "relax")
    run.ilp_calls += 1
    x = ilp_feasible(sys, ctx.counter)
    if x is None:
        return None
    x = x[:n]
    support = [i for i, a in enumerate(loopless) if x[arcs.index(a)]]
    verts = list(d.vertices)
    parent = {v: v for v in verts}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    tree = []
    for i in support:
        a, b = (find(u) for u in loopless[i])
        if a != b:
            parent[a] = b
            tree.append(i)
    if len(tree) != len(verts) - 1:
        return None, x
    return tuple(sorted(arcs.index(loopless[i]) for i in tree)), x
