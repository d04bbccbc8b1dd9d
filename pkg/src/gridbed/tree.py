"""Tree solver: split vertices, (P,t)-paths, direction-constrained sweeps and gluing."""

from __future__ import annotations

import itertools
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence

from .embedding import Cell, Direction, GridEmbedding, agrees, distance_approximation, glue, validate
from .graph import Graph, distances_from, is_tree
from .oracle import DEFAULT_BUDGET, Answer, BudgetExceeded, NodeCounter, SolveResult, _quick_no


# ---------------------------------------------------------------- split vertices

class SplitKind(str, Enum):
    NONE = "no-split"
    ONE = "one-split"
    TWO_ONE = "two-one-splits"
    DOUBLE = "double-split"
    EXCESS = "excess"


@dataclass(frozen=True)
class SplitClassification:
    t: int
    kind: SplitKind
    vertices: tuple[int, ...]
    large: tuple[int, ...]
    components: tuple[int, ...]
    split_vertices: tuple[int, ...] = ()

    @property
    def too_many(self) -> bool:
        return self.kind is SplitKind.EXCESS


def component_sizes(tree: Graph) -> list[list[int]]:
    """Sizes of the components of ``T - v`` for every ``v``, from rooted subtree sizes."""
    n = tree.n
    if n == 0:
        return []
    order, parent = [0], [-1] * n
    seen = [False] * n
    seen[0] = True
    for u in order:
        for w in tree.adj[u]:
            if not seen[w]:
                seen[w] = True
                parent[w] = u
                order.append(w)
    size = [1] * n
    for u in reversed(order[1:]):
        size[parent[u]] += size[u]
    out = []
    for v in range(n):
        comps = [size[w] for w in tree.adj[v] if parent[w] == v]
        if parent[v] >= 0:
            comps.append(n - size[v])
        out.append(sorted(comps, reverse=True))
    return out


def classify_splits(tree: Graph, t: int) -> SplitClassification:
    if not is_tree(tree):
        raise ValueError("classify_splits needs a tree")
    sizes = component_sizes(tree)
    large = tuple(sum(1 for s in c if s >= t) for c in sizes)
    comps = tuple(len(c) for c in sizes)
    ones = [v for v in range(tree.n) if comps[v] >= 3 and large[v] == 3]
    doubles = [v for v in range(tree.n) if comps[v] == 4 and large[v] == 4]
    splits = tuple(v for v in range(tree.n) if large[v] >= 3)

    def make(kind: SplitKind, vs: Sequence[int]) -> SplitClassification:
        return SplitClassification(t, kind, tuple(vs), large, comps, splits)

    if len(ones) + len(doubles) != len(splits):
        return make(SplitKind.EXCESS, splits)
    if not splits:
        return make(SplitKind.NONE, ())
    if len(splits) == 1:
        return make(SplitKind.DOUBLE if doubles else SplitKind.ONE, splits)
    if len(splits) == 2 and not doubles:
        return make(SplitKind.TWO_ONE, splits)
    return make(SplitKind.EXCESS, splits)


# ---------------------------------------------------------------- (P,t)-paths

@dataclass(frozen=True)
class PtPath:
    path: tuple[int, ...]
    t: int
    pc: dict[int, int]

    def coverage(self, tree: Graph) -> int:
        """Largest distance from a vertex to the path."""
        return max(_multi_source(tree, self.path).values())

    def groups(self) -> list[list[int]]:
        index = {v: i for i, v in enumerate(self.path)}
        out: list[list[int]] = [[] for _ in self.path]
        for v in sorted(self.pc):
            out[index[self.pc[v]]].append(v)
        return out


def _multi_source(tree: Graph, sources: Sequence[int], allowed: set[int] | None = None) -> dict[int, int]:
    dist = {s: 0 for s in sources}
    queue = deque(sources)
    while queue:
        u = queue.popleft()
        for w in tree.adj[u]:
            if w not in dist and (allowed is None or w in allowed):
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def closest_on_path(tree: Graph, path: Sequence[int], allowed: set[int] | None = None) -> dict[int, int]:
    """Closest path vertex for every reachable vertex, ties to the earlier index."""
    pc = {v: v for v in path}
    queue = deque(path)  # BFS layers keep path order, so earlier indices win ties
    while queue:
        u = queue.popleft()
        for w in tree.adj[u]:
            if w not in pc and (allowed is None or w in allowed):
                pc[w] = pc[u]
                queue.append(w)
    return pc


def make_pt_path(tree: Graph, path: Sequence[int], t: int, allowed: set[int] | None = None) -> PtPath:
    return PtPath(tuple(path), t, closest_on_path(tree, path, allowed))


def _order_path(tree: Graph, marked: set[int]) -> list[int] | None:
    ends = [v for v in marked if sum(1 for w in tree.adj[v] if w in marked) <= 1]
    if len(marked) == 1:
        return list(marked)
    if len(ends) != 2 or any(sum(1 for w in tree.adj[v] if w in marked) > 2 for v in marked):
        return None
    path, prev = [min(ends)], -1
    while len(path) < len(marked):
        nxt = [w for w in tree.adj[path[-1]] if w in marked and w != prev]
        if len(nxt) != 1:
            return None
        prev = path[-1]
        path.append(nxt[0])
    return path


def _depth_from(tree: Graph, root: int, blocked: set[int]) -> int:
    return max(_multi_source(tree, [root], set(range(tree.n)) - blocked).values())


def find_pt_path(tree: Graph, t: int) -> PtPath | None:
    """Mark vertices with two components larger than ``t``; extend the marked path until it covers."""
    if not is_tree(tree):
        raise ValueError("find_pt_path needs a tree")
    if tree.n == 0:
        return None
    sizes = component_sizes(tree)
    marked = {v for v in range(tree.n) if sum(1 for s in sizes[v] if s > t) >= 2}
    if not marked:
        path: list[int] | None = [min(range(tree.n), key=lambda x: (max(sizes[x], default=0), x))]
    else:
        path = _order_path(tree, marked)
        if path is None:
            return None
    while True:
        p = make_pt_path(tree, path, t)
        if p.coverage(tree) <= t:
            return p
        grown = False
        for end in ((0, -1) if len(path) > 1 else (0,)):
            on = set(path)
            options = [w for w in tree.adj[path[end]] if w not in on]
            if not options:
                continue
            w = max(options, key=lambda x: (_depth_from(tree, x, on), -x))
            if _depth_from(tree, w, on) + 1 > t:
                path = [w] + path if end == 0 else path + [w]
                grown = True
        if not grown:
            return None


def diameter_path(tree: Graph, start: int | None = None) -> list[int]:
    """Path from ``start`` (or a diameter end) to the vertex farthest from it."""
    if start is None:
        d0 = distances_from(tree, 0)
        start = max(range(tree.n), key=lambda v: (d0[v], -v))
    return _tree_path(tree, start, _farthest(tree, start))


def _farthest(tree: Graph, v: int) -> int:
    d = distances_from(tree, v)
    return max((u for u in range(tree.n) if d[u] is not None), key=lambda u: (d[u], -u))


def _tree_path(tree: Graph, a: int, b: int) -> list[int]:
    parent = {a: -1}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        for w in tree.adj[u]:
            if w not in parent:
                parent[w] = u
                queue.append(w)
    out = [b]
    while out[-1] != a:
        out.append(parent[out[-1]])
    return out[::-1]


# ---------------------------------------------------------------- directional sweep

@dataclass(frozen=True)
class SweepSpec:
    """Direction set, wrong-direction budget, fixed environment and target bounds.

    Coordinates are in the environment's frame; its ``k' x r'`` box is reserved
    for the environment. Without an environment the first path vertex sits at
    the origin. The extent trackers live in the sweep states.
    """

    directions: frozenset[Direction]
    budget: int
    k: int
    r: int
    env: GridEmbedding | None = None
    retain: int = 1

    def __post_init__(self) -> None:
        if self.budget < 0:
            raise ValueError("budget must be nonnegative")
        if sum(d.vertical for d in self.directions) > 1 or sum(not d.vertical for d in self.directions) > 1:
            raise ValueError("at most one vertical and one horizontal direction")
        if self.retain < 1:
            raise ValueError("retain must be positive")


Extents = tuple[int, int, int, int]
Group = tuple[tuple[int, Cell], ...]


@dataclass
class SweepResult:
    answer: Answer
    witness: GridEmbedding | None
    summaries: set[Extents] = field(default_factory=set)
    stats: dict = field(default_factory=dict)
    run: "_Sweep | None" = None


def _grow(ext: Extents | None, cell: Cell) -> Extents:
    if ext is None:
        return (cell[0], cell[0], cell[1], cell[1])
    return (min(ext[0], cell[0]), max(ext[1], cell[0]), min(ext[2], cell[1]), max(ext[3], cell[1]))


class _Sweep:
    def __init__(self, tree: Graph, P: PtPath, spec: SweepSpec, counter: NodeCounter) -> None:
        self.tree, self.P, self.spec, self.counter = tree, P, spec, counter
        env = spec.env.pos if spec.env is not None else {}
        self.env = dict(env)
        self.window = (spec.env.k, spec.env.r) if spec.env is not None else (0, 0)
        self.index = {v: i for i, v in enumerate(P.path)}
        missing = [v for v in range(tree.n) if v not in self.env and v not in P.pc]
        if missing:
            raise ValueError(f"path does not cover vertices {missing[:5]}")
        self.parent: dict[int, int] = {}
        self.order: list[list[int]] = []
        for i, v in enumerate(P.path):
            members = [v] + [u for u in self._hanging(v) if u != v]
            self.order.append([u for u in members if u not in self.env])
        for i in range(1, len(P.path)):
            self.parent[P.path[i]] = P.path[i - 1]
        inside = [v in self.env for v in P.path]
        if inside != sorted(inside, reverse=True):
            raise ValueError("environment vertices must form a prefix of the path")
        anchor = [w for w in tree.adj[P.path[0]] if w in self.env]
        if P.path[0] not in self.env and anchor:
            self.parent[P.path[0]] = anchor[0]

    def _hanging(self, v: int) -> list[int]:
        out, queue = [v], deque([v])
        while queue:
            u = queue.popleft()
            for w in self.tree.adj[u]:
                if w not in self.index and self.P.pc.get(w) == v and w not in self.parent and w != v:
                    self.parent[w] = u
                    out.append(w)
                    queue.append(w)
        return out

    def _wrong(self, a: Cell, b: Cell) -> int:
        step = (b[0] - a[0], b[1] - a[1])
        return 0 if any(d.step == step for d in self.spec.directions) else 1

    def initial(self) -> tuple:
        ext: Extents | None = None
        for cell in self.env.values():
            ext = _grow(ext, cell)
        wrong = 0
        path = self.P.path
        for i in range(1, len(path)):
            if path[i] in self.env and path[i - 1] in self.env:
                wrong += self._wrong(self.env[path[i - 1]], self.env[path[i]])
        return (wrong, ext, ())

    def _free(self, cell: Cell, used: set[Cell]) -> bool:
        if cell in used:
            return False
        wk, wr = self.window
        return not (1 <= cell[0] <= wk and 1 <= cell[1] <= wr)

    def expand(self, i: int, state: tuple) -> Iterator[tuple[tuple, Group]]:
        wrong, ext, retained = state
        members = self.order[i]
        known: dict[int, Cell] = dict(self.env)
        for grp in retained:
            known.update(grp)
        used = set(known.values())
        spec = self.spec
        v_path = self.P.path[i]
        placed: list[tuple[int, Cell]] = []

        def rec(j: int, ext: Extents | None, wrong: int) -> Iterator[tuple[tuple, Group]]:
            self.counter.tick()
            if j == len(members):
                grp = tuple(placed)
                yield (wrong, ext, (retained + (grp,))[-spec.retain:]), grp
                return
            v = members[j]
            p = self.parent.get(v)
            if p is None:
                cands: list[Cell] = [(0, 0)]
            else:
                pr, pc = known[p]
                cands = [(pr + 1, pc), (pr - 1, pc), (pr, pc + 1), (pr, pc - 1)]
            for cell in cands:
                if not self._free(cell, used):
                    continue
                if any(w in known and w != p and abs(known[w][0] - cell[0]) + abs(known[w][1] - cell[1]) != 1
                       for w in self.tree.adj[v]):
                    continue
                e2 = _grow(ext, cell)
                if e2[1] - e2[0] + 1 > spec.k or e2[3] - e2[2] + 1 > spec.r:
                    continue
                w2 = wrong
                if v == v_path and p is not None:
                    w2 += self._wrong(known[p], cell)
                    if w2 > spec.budget:
                        continue
                known[v] = cell
                used.add(cell)
                placed.append((v, cell))
                yield from rec(j + 1, e2, w2)
                placed.pop()
                used.discard(cell)
                del known[v]

        yield from rec(0, ext, wrong)

    def run(self) -> list[dict[tuple, list[tuple[tuple, Group]]]]:
        """Layered state graph; layer ``i+1`` maps each state to its predecessor links."""
        start = self.initial()
        layers: list[dict[tuple, list[tuple[tuple, Group]]]] = [{start: []}]
        for i in range(len(self.P.path)):
            nxt: dict[tuple, list[tuple[tuple, Group]]] = {}
            for state in layers[-1]:
                for new, grp in self.expand(i, state):
                    nxt.setdefault(new, []).append((state, grp))
            layers.append(nxt)
            if not nxt:
                break
        self.layers = layers
        return layers

    def witness(self, finals: Sequence[tuple]) -> dict[int, Cell] | None:
        """Backtrack the state graph for a chain whose groups never collide."""
        layers = self.layers
        pos: dict[int, Cell] = {}
        used: set[Cell] = set()

        def rec(i: int, state: tuple) -> bool:
            self.counter.tick()
            if i == 0:
                return True
            for prev, grp in layers[i][state]:
                cells = [c for _, c in grp]
                if any(c in used for c in cells):
                    continue
                for v, c in grp:
                    pos[v] = c
                    used.add(c)
                if rec(i - 1, prev):
                    return True
                for v, c in grp:
                    del pos[v]
                    used.discard(c)
            return False

        used.update(self.env.values())
        n_layers = len(layers) - 1
        for state in finals:
            if rec(n_layers, state):
                out = dict(self.env)
                out.update(pos)
                return out
        return None


def _as_embedding(pos: dict[int, Cell], k: int | None = None, r: int | None = None) -> GridEmbedding:
    r0 = min(c[0] for c in pos.values())
    c0 = min(c[1] for c in pos.values())
    shifted = {v: (a - r0 + 1, b - c0 + 1) for v, (a, b) in pos.items()}
    kk = max(c[0] for c in shifted.values())
    rr = max(c[1] for c in shifted.values())
    return GridEmbedding(k if k is not None else kk, r if r is not None else rr, shifted)


def directional_sweep_embed(tree_part: Graph, P: PtPath, spec: SweepSpec,
                            budget: int | None = DEFAULT_BUDGET,
                            counter: NodeCounter | None = None) -> SweepResult:
    """Place ``P(v_1), P(v_2), ...`` in order; keep the last ``spec.retain`` groups in each state.

    Every chain of the state graph respects edges, the direction budget, the
    extents and the reserved window; the witness walk adds global injectivity,
    so the answer is exact for the given path and spec. The witness lives in the
    environment's frame (translated to positive coordinates when no environment).
    """
    counter = counter or NodeCounter(budget)
    t0 = time.perf_counter()
    sweep = _Sweep(tree_part, P, spec, counter)
    try:
        layers = sweep.run()
        finals = sorted(layers[-1]) if len(layers) == len(P.path) + 1 else []
        summaries = {s[1] for s in finals}
        pos = sweep.witness(finals) if finals else None
    except BudgetExceeded:
        return SweepResult(Answer.UNKNOWN, None, stats={"nodes": counter.nodes}, run=sweep)
    stats = {"nodes": counter.nodes, "states": sum(len(x) for x in layers), "elapsed": time.perf_counter() - t0}
    if pos is None:
        return SweepResult(Answer.NO, None, summaries, stats, sweep)
    return SweepResult(Answer.YES, _as_embedding(pos, spec.k, spec.r), summaries, stats, sweep)


def sweep_witnesses(result: SweepResult) -> Iterator[tuple[Extents, dict[int, Cell]]]:
    """One witness per final extents summary, in the environment's frame."""
    sweep = result.run
    if sweep is None or not hasattr(sweep, "layers") or len(sweep.layers) != len(sweep.P.path) + 1:
        return
    by_ext: dict[Extents, list[tuple]] = {}
    for s in sorted(sweep.layers[-1]):
        by_ext.setdefault(s[1], []).append(s)
    for ext in sorted(by_ext):
        pos = sweep.witness(by_ext[ext])
        if pos is not None:
            yield ext, pos


# ---------------------------------------------------------------- composition

@dataclass(frozen=True)
class TreeConstants:
    c_split: int = 81
    c_win: int = 366
    c_env: int = 367
    c_ret: int = 6
    c_bud: int = 4

    def threshold(self, a: int) -> int:
        return self.c_split * max(a, 1) ** 2

    def window(self, a: int) -> int:
        return self.c_win * a * a + 1

    def radius(self, a: int) -> int:
        return self.c_env * a * a + 1

    def retain(self, a: int) -> int:
        return max(1, self.c_ret * a)

    def budget(self, a: int) -> int:
        return self.c_bud * a


FULL_CONSTANTS = TreeConstants()
REDUCED_CONSTANTS = TreeConstants(c_split=1, c_win=2, c_env=2, c_ret=2, c_bud=4)

ALL_DIRECTIONS = (Direction.UP, Direction.RIGHT, Direction.DOWN, Direction.LEFT)
DIRECTION_PAIRS = tuple(frozenset(p) for p in itertools.product((Direction.UP, Direction.DOWN),
                                                                (Direction.RIGHT, Direction.LEFT)))


def enumerate_environments(tree: Graph, u: int, side: int, radius: int,
                           counter: NodeCounter) -> Iterator[GridEmbedding]:
    """Connected vertex sets around ``u`` embedded in a ``side x side`` window with ``u`` central.

    A vertex on an interior window cell must have all its neighbours inside,
    since everything else lies outside the window.
    """
    c = (side + 1) // 2
    dist = distances_from(tree, u)
    ball = sorted((v for v in range(tree.n) if dist[v] is not None and dist[v] <= radius),
                  key=lambda v: (dist[v], v))
    parent = {u: -1}
    for v in ball:
        for w in tree.adj[v]:
            if dist[w] == dist[v] + 1:
                parent[w] = v
    pos: dict[int, Cell] = {u: (c, c)}
    used = {(c, c)}

    def interior(cell: Cell) -> bool:
        return 1 < cell[0] < side and 1 < cell[1] < side

    def ok_final() -> bool:
        for v, cell in pos.items():
            if interior(cell) and any(w not in pos for w in tree.adj[v]):
                return False
            free_out = sum(1 for d in ALL_DIRECTIONS
                           if not (1 <= cell[0] + d.step[0] <= side and 1 <= cell[1] + d.step[1] <= side))
            if sum(1 for w in tree.adj[v] if w not in pos) > free_out:
                return False
        return True

    def rec(j: int) -> Iterator[GridEmbedding]:
        counter.tick()
        if j == len(ball):
            if ok_final():
                yield GridEmbedding(side, side, dict(pos))
            return
        v = ball[j]
        if v == u:
            yield from rec(j + 1)
            return
        p = parent[v]
        if p in pos:
            pr, pcol = pos[p]
            for d in ALL_DIRECTIONS:
                cell = (pr + d.step[0], pcol + d.step[1])
                if 1 <= cell[0] <= side and 1 <= cell[1] <= side and cell not in used:
                    pos[v] = cell
                    used.add(cell)
                    yield from rec(j + 1)
                    used.discard(cell)
                    del pos[v]
            if interior(pos[p]):
                return
        yield from rec(j + 1)

    yield from rec(0)


@dataclass
class _Branch:
    vertices: frozenset[int]
    attach: int


def _branches(tree: Graph, u: int) -> list[_Branch]:
    out = []
    for w in tree.adj[u]:
        comp = _multi_source(tree, [w], set(range(tree.n)) - {u})
        out.append(_Branch(frozenset(comp), w))
    return out


def _branch_sweep(tree: Graph, branch: _Branch, env: GridEmbedding, path: list[int],
                  directions: frozenset[Direction], k: int, r: int, a: int,
                  constants: TreeConstants, counter: NodeCounter) -> SweepResult:
    """Sweep ``T[branch + env]`` with the environment fixed, relabelled to ``0..n'-1``."""
    keep = sorted(branch.vertices | set(env.pos))
    sub, old = tree.induced(keep)
    new = {v: i for i, v in enumerate(old)}
    p_new = [new[v] for v in path]
    allowed = {new[v] for v in branch.vertices}
    P = make_pt_path(sub, p_new, constants.threshold(a), allowed)
    env_new = GridEmbedding(env.k, env.r, {new[v]: c for v, c in env.pos.items()})
    spec = SweepSpec(directions, constants.budget(a), k, r, env_new, constants.retain(a))
    res = directional_sweep_embed(sub, P, spec, counter=counter)
    res.stats["relabel"] = old
    return res


def _branch_path(tree: Graph, branch: _Branch, t: int, through: int | None = None) -> list[int]:
    """Path from the attachment vertex to the far end of the branch's (P,t)-path."""
    sub, old = tree.induced(sorted(branch.vertices))
    new = {v: i for i, v in enumerate(old)}
    w = new[branch.attach]
    if through is not None:
        head = _tree_path(sub, w, new[through])
        on = set(head)
        rest = set(range(sub.n)) - on
        tails = [x for x in sub.adj[head[-1]] if x not in on]
        if tails:
            best = max(tails, key=lambda x: (_depth_from(sub, x, on), -x))
            reach = _multi_source(sub, [best], rest)
            far = max(reach, key=lambda x: (reach[x], -x))
            head = head + _tree_path(sub, best, far)
        return [old[x] for x in head]
    p = find_pt_path(sub, t) if is_tree(sub) else None
    if p is None:
        return [old[x] for x in diameter_path(sub, w)]
    ends = (p.path[0], p.path[-1])
    dw = distances_from(sub, w)
    far = max(ends, key=lambda x: (dw[x], -x))
    return [old[x] for x in _tree_path(sub, w, far)]


def _glue_pieces(tree: Graph, env: GridEmbedding, pieces: list[dict[int, Cell]], k: int, r: int) -> GridEmbedding | None:
    merged: dict[int, Cell] = {}
    used: dict[Cell, int] = {}
    for pos in pieces:
        for v, c in pos.items():
            if used.get(c, v) != v:
                return None
            used[c] = v
            merged[v] = c
    f = _as_embedding(merged)
    if f.k > k or f.r > r:
        return None
    embs = [_as_embedding(p) for p in pieces]
    for i in range(len(embs)):
        for j in range(i + 1, len(embs)):
            assert agrees(embs[i], embs[j]), "glue inputs must agree"
    glued = glue(embs, env.pos.keys())
    return GridEmbedding(k, r, glued.pos)


def _split_case(tree: Graph, cls: SplitClassification, k: int, r: int, a: int,
                constants: TreeConstants, counter: NodeCounter) -> GridEmbedding | None:
    u = cls.vertices[0]
    other = cls.vertices[1] if cls.kind is SplitKind.TWO_ONE else None
    t = constants.threshold(a)
    branches = _branches(tree, u)
    mid = next((i for i, b in enumerate(branches) if other is not None and other in b.vertices), None)
    paths = [_branch_path(tree, b, t, other if i == mid else None) for i, b in enumerate(branches)]
    side, radius = constants.window(a), constants.radius(a)
    for env in enumerate_environments(tree, u, side, radius, counter):
        cache: dict[tuple[int, frozenset[Direction]], list[tuple[Extents, dict[int, Cell]]]] = {}

        def options(i: int, dirs: frozenset[Direction]) -> list[tuple[Extents, dict[int, Cell]]]:
            key = (i, dirs)
            if key not in cache:
                b = branches[i]
                if b.vertices <= set(env.pos):
                    cache[key] = [(None, dict(env.pos))]  # type: ignore[list-item]
                else:
                    res = _branch_sweep(tree, b, env, paths[i], dirs, k, r, a, constants, counter)
                    if res.answer is Answer.UNKNOWN:
                        raise BudgetExceeded
                    old = res.stats["relabel"]
                    cache[key] = [(ext, {old[v]: c for v, c in pos.items()})
                                  for ext, pos in sweep_witnesses(res)] if res.answer is Answer.YES else []
            return cache[key]

        for dirs in itertools.permutations(ALL_DIRECTIONS, len(branches)):
            choices: list[list[frozenset[Direction]]] = []
            for i, d in enumerate(dirs):
                if i == mid:
                    choices.append([frozenset({d, p}) for p in ALL_DIRECTIONS if p.vertical != d.vertical])
                else:
                    choices.append([frozenset({d})])
            for combo in itertools.product(*choices):
                opts = [options(i, dset) for i, dset in enumerate(combo)]
                if any(not o for o in opts):
                    continue
                for pick in itertools.product(*opts):
                    counter.tick()
                    f = _glue_pieces(tree, env, [p for _, p in pick], k, r)
                    if f is not None and validate(tree, f):
                        return f
    return None


def _no_split_case(tree: Graph, t: int, k: int, r: int, a: int, constants: TreeConstants,
                   counter: NodeCounter) -> tuple[GridEmbedding | None, bool]:
    """Sweep along the (P,t)-path for each direction pair; second value is exhaustiveness."""
    P = find_pt_path(tree, t)
    path = list(P.path) if P is not None else diameter_path(tree)
    if P is None:
        P = make_pt_path(tree, path, t)
    budget = constants.budget(a)
    for dirs in DIRECTION_PAIRS:
        spec = SweepSpec(dirs, budget, k, r, None, constants.retain(a))
        res = directional_sweep_embed(tree, P, spec, counter=counter)
        if res.answer is Answer.UNKNOWN:
            raise BudgetExceeded
        if res.answer is Answer.YES:
            return res.witness, True
        if budget >= len(path) - 1:
            break  # the direction set no longer constrains anything
    return None, budget >= len(path) - 1


def solve_tree(tree: Graph, k: int, r: int, budget: int | None = DEFAULT_BUDGET,
               constants: TreeConstants = FULL_CONSTANTS) -> SolveResult:
    """Try ``a = 0, 1, ...``; classify split vertices and sweep or glue per case.

    A yes carries a validated witness. A no is reported only when a sweep ran
    with a direction budget covering the whole path, which makes it exhaustive;
    otherwise the outcome is unknown.
    """
    if not is_tree(tree):
        raise ValueError("solve_tree needs a tree")
    t0 = time.perf_counter()
    counter = NodeCounter(budget)
    n = tree.n
    if n == 0:
        return SolveResult(Answer.YES, GridEmbedding(k, r, {}), {"nodes": 0}, 0)
    reason = _quick_no(tree, k, r)
    if reason:
        return SolveResult(Answer.NO, None, {"nodes": 0, "reason": reason}, n)
    cases: list[str] = []
    exhaustive = False
    try:
        for a in range(n + 1):
            t = constants.threshold(a)
            cls = classify_splits(tree, t)
            cases.append(cls.kind.value)
            if cls.kind is SplitKind.EXCESS:
                continue
            if cls.kind is SplitKind.NONE:
                f, exhaustive = _no_split_case(tree, t, k, r, a, constants, counter)
            else:
                f = _split_case(tree, cls, k, r, a, constants, counter)
            if f is not None:
                assert validate(tree, f)
                stats = {"nodes": counter.nodes, "cases": cases, "a_f": distance_approximation(tree, f).a_f,
                         "elapsed": time.perf_counter() - t0}
                return SolveResult(Answer.YES, f, stats, a)
            if exhaustive:
                break
    except BudgetExceeded:
        return SolveResult(Answer.UNKNOWN, None, {"nodes": counter.nodes, "cases": cases,
                                                  "elapsed": time.perf_counter() - t0})
    stats = {"nodes": counter.nodes, "cases": cases, "elapsed": time.perf_counter() - t0}
    if exhaustive:
        return SolveResult(Answer.NO, None, stats, n)
    return SolveResult(Answer.UNKNOWN, None, stats)
