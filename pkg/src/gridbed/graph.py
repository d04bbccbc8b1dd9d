"""Graph representation, traversal, small-graph isomorphism and cheap filters."""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Sequence

import numpy as np

Edge = tuple[int, int]


def _norm(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``."""

    n: int
    edges: frozenset[Edge] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        normalized = set()
        for e in self.edges:
            u, v = e
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge {e} has an endpoint outside [0, {self.n})")
            normalized.add(_norm(u, v))
        object.__setattr__(self, "edges", frozenset(normalized))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        seen: set[Edge] = set()
        for u, v in edges:
            e = _norm(int(u), int(v))
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
        return cls(n, frozenset(seen))

    @cached_property
    def adj(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(x)) for x in nbrs)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return _norm(u, v) in self.edges

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph relabelled in sorted order; returns it with the old ids."""
        old = sorted(set(vertices))
        new = {v: i for i, v in enumerate(old)}
        es = [(new[u], new[v]) for u, v in self.edges if u in new and v in new]
        return Graph(len(old), frozenset(_norm(a, b) for a, b in es)), old

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with vertex ``v`` renamed ``perm[v]``."""
        return Graph(self.n, frozenset(_norm(perm[u], perm[v]) for u, v in self.edges))

    def disjoint_union(self, other: "Graph") -> "Graph":
        shift = self.n
        es = set(self.edges) | {(u + shift, v + shift) for u, v in other.edges}
        return Graph(self.n + other.n, frozenset(es))


def path_graph(n: int) -> Graph:
    return Graph(n, frozenset((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return Graph(n, frozenset(_norm(i, (i + 1) % n) for i in range(n)))


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, frozenset((0, i) for i in range(1, leaves + 1)))


def grid_graph(k: int, r: int) -> Graph:
    """Solid k×r rectangular grid graph, vertex ``i*r+j`` at row i, column j."""
    es = set()
    for i in range(k):
        for j in range(r):
            v = i * r + j
            if j + 1 < r:
                es.add((v, v + 1))
            if i + 1 < k:
                es.add((v, v + r))
    return Graph(k * r, frozenset(es))


def connected_components(g: Graph) -> list[frozenset[int]]:
    """Components ordered by their smallest vertex."""
    seen = [False] * g.n
    out: list[frozenset[int]] = []
    for s in range(g.n):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in g.adj[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    queue.append(w)
        out.append(frozenset(comp))
    return out


def is_connected(g: Graph) -> bool:
    return g.n <= 1 or len(connected_components(g)) == 1


def distances_from(g: Graph, v: int) -> list[int | None]:
    """BFS distances from ``v``; ``None`` marks unreachable vertices."""
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} not in graph")
    dist: list[int | None] = [None] * g.n
    dist[v] = 0
    queue = deque([v])
    while queue:
        u = queue.popleft()
        du = dist[u]
        for w in g.adj[u]:
            if dist[w] is None:
                dist[w] = du + 1  # type: ignore[operator]
                queue.append(w)
    return dist


def all_pairs_distances(g: Graph) -> np.ndarray:
    """Dense matrix of BFS distances, ``-1`` for unreachable pairs."""
    n = g.n
    if n > 300:
        from scipy.sparse import csr_matrix
        from scipy.sparse.csgraph import shortest_path

        rows = [u for u, v in g.edges] + [v for u, v in g.edges]
        cols = [v for u, v in g.edges] + [u for u, v in g.edges]
        mat = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        d = shortest_path(mat, method="D", unweighted=True)
        out = np.where(np.isinf(d), -1, d).astype(np.int64)
        return out
    out = np.full((n, n), -1, dtype=np.int64)
    for v in range(n):
        for u, d in enumerate(distances_from(g, v)):
            if d is not None:
                out[v, u] = d
    return out


def is_tree(g: Graph) -> bool:
    return g.n >= 1 and g.m == g.n - 1 and is_connected(g)


def bipartition(g: Graph) -> list[int] | None:
    """Two-colouring of every component, or ``None`` if some cycle is odd."""
    color = [-1] * g.n
    for s in range(g.n):
        if color[s] >= 0:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in g.adj[u]:
                if color[w] < 0:
                    color[w] = 1 - color[u]
                    queue.append(w)
                elif color[w] == color[u]:
                    return None
    return color


# ---------------------------------------------------------------------------
# canonical labelling


def _refine(g: Graph, colors: list[int]) -> list[int]:
    """Colour refinement with canonical relabelling of colour classes."""
    current = colors
    count = len(set(current))
    while True:
        sigs = [(current[v], tuple(sorted(current[w] for w in g.adj[v]))) for v in range(g.n)]
        order = {s: i for i, s in enumerate(sorted(set(sigs)))}
        nxt = [order[s] for s in sigs]
        new_count = len(order)
        if new_count == count:
            return nxt
        current, count = nxt, new_count


def _certificate(g: Graph, labels: list[int]) -> tuple[Edge, ...]:
    return tuple(sorted(_norm(labels[u], labels[v]) for u, v in g.edges))


def canonical_labeling(g: Graph) -> tuple[tuple[Edge, ...], list[int]]:
    """Return ``(certificate, labels)`` where ``labels[v]`` is v's canonical position.

    Exhaustive individualisation over colour-refined partitions; two graphs are
    isomorphic iff their certificates (and sizes) coincide.
    """
    if g.n == 0:
        return (), []
    start = _refine(g, [len(g.adj[v]) for v in range(g.n)])
    best: list = [None, None]

    def search(colors: list[int]) -> None:
        cells = Counter(colors)
        if len(cells) == g.n:
            cert = _certificate(g, colors)
            if best[0] is None or cert < best[0]:
                best[0], best[1] = cert, list(colors)
            return
        target = min(c for c, s in cells.items() if s > 1 and s == min(x for x in cells.values() if x > 1))
        for v in range(g.n):
            if colors[v] != target:
                continue
            keyed = [(colors[u], 0 if u == v else 1) for u in range(g.n)]
            order = {s: i for i, s in enumerate(sorted(set(keyed)))}
            search(_refine(g, [order[s] for s in keyed]))

    search(start)
    return best[0], best[1]


def canonical_form(g: Graph) -> tuple[int, tuple[Edge, ...]]:
    return (g.n, canonical_labeling(g)[0])


def are_isomorphic(g1: Graph, g2: Graph) -> bool:
    if g1.n != g2.n or g1.m != g2.m:
        return False
    if sorted(len(a) for a in g1.adj) != sorted(len(a) for a in g2.adj):
        return False
    return canonical_form(g1) == canonical_form(g2)


def find_isomorphism(g1: Graph, g2: Graph) -> list[int] | None:
    """A bijection ``phi`` with ``{phi[u], phi[v]}`` an edge of g2 for every edge of g1."""
    if g1.n != g2.n or g1.m != g2.m:
        return None
    c1, l1 = canonical_labeling(g1)
    c2, l2 = canonical_labeling(g2)
    if c1 != c2:
        return None
    inv2 = [0] * g2.n
    for v, lab in enumerate(l2):
        inv2[lab] = v
    return [inv2[l1[v]] for v in range(g1.n)]


# ---------------------------------------------------------------------------
# component catalog


@dataclass(frozen=True)
class ComponentCatalog:
    """Isomorphism classes of the connected components of a graph."""

    classes: tuple[tuple[Graph, int], ...]
    vertex_to_class: tuple[int, ...]
    components: tuple[tuple[int, ...], ...]
    component_class: tuple[int, ...]
    forms: tuple[tuple[int, tuple[Edge, ...]], ...]

    @property
    def mcc(self) -> int:
        return max((rep.n for rep, _ in self.classes), default=0)

    def multiplicities(self) -> tuple[int, ...]:
        return tuple(m for _, m in self.classes)

    def class_of_form(self, form: tuple[int, tuple[Edge, ...]]) -> int | None:
        try:
            return self.forms.index(form)
        except ValueError:
            return None


def component_catalog(g: Graph) -> ComponentCatalog:
    comps = connected_components(g)
    forms: list[tuple[int, tuple[Edge, ...]]] = []
    reps: list[Graph] = []
    mult: list[int] = []
    comp_class: list[int] = []
    v2c = [0] * g.n
    for comp in comps:
        sub, _ = g.induced(comp)
        form = canonical_form(sub)
        if form in forms:
            idx = forms.index(form)
            mult[idx] += 1
        else:
            idx = len(forms)
            forms.append(form)
            reps.append(sub)
            mult.append(1)
        comp_class.append(idx)
        for v in comp:
            v2c[v] = idx
    return ComponentCatalog(
        classes=tuple(zip(reps, mult)),
        vertex_to_class=tuple(v2c),
        components=tuple(tuple(sorted(c)) for c in comps),
        component_class=tuple(comp_class),
        forms=tuple(forms),
    )


# ---------------------------------------------------------------------------
# necessary filter


@dataclass(frozen=True)
class FilterResult:
    passed: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.passed


def grid_necessary_filter(g: Graph) -> FilterResult:
    """Fails only on graphs that cannot be grid graphs."""
    if g.max_degree > 4:
        return FilterResult(False, "degree")
    if bipartition(g) is None:
        return FilterResult(False, "odd cycle")
    if g.m > 2 * g.n:
        return FilterResult(False, "edge count")
    return FilterResult(True)


# ---------------------------------------------------------------------------
# multidigraph


@dataclass
class MultiDigraph:
    """Directed multigraph with loops; arcs stored as a multiplicity map."""

    vertices: list[Hashable] = field(default_factory=list)
    arcs: Counter = field(default_factory=Counter)

    def add_vertex(self, v: Hashable) -> None:
        if v not in self.vertices:
            self.vertices.append(v)

    def add_arc(self, u: Hashable, v: Hashable, count: int = 1) -> None:
        self.add_vertex(u)
        self.add_vertex(v)
        self.arcs[(u, v)] += count

    def arc_list(self) -> list[tuple[Hashable, Hashable]]:
        return [a for a, c in self.arcs.items() for _ in range(c)]

    def out_degree(self, v: Hashable) -> int:
        return sum(c for (a, _), c in self.arcs.items() if a == v)

    def in_degree(self, v: Hashable) -> int:
        return sum(c for (_, b), c in self.arcs.items() if b == v)

    def total_arcs(self) -> int:
        return sum(self.arcs.values())

    def copy(self) -> "MultiDigraph":
        return MultiDigraph(list(self.vertices), Counter(self.arcs))


def join_vertices(d: MultiDigraph, u: Hashable, v: Hashable, w: Hashable | None = None) -> MultiDigraph:
    """Merge ``u`` and ``v`` into ``w``; arcs between them become loops on ``w``."""
    if u == v:
        raise ValueError("cannot join a vertex with itself")
    if u not in d.vertices or v not in d.vertices:
        raise ValueError("both vertices must be present")
    w = ("join", u, v) if w is None else w
    out = MultiDigraph([x for x in d.vertices if x not in (u, v)] + [w])

    def sub(x: Hashable) -> Hashable:
        return w if x in (u, v) else x

    for (a, b), c in d.arcs.items():
        out.arcs[(sub(a), sub(b))] += c
    return out
