"""Hardness reductions as certified instance generators, plus strip packing."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .embedding import GridEmbedding, validate
from .graph import Graph
from .oracle import DEFAULT_BUDGET, Answer, SolveResult, brute_force_embed

Cell = tuple[int, int]


# ---------------------------------------------------------------------------
# formulas and batteries


@dataclass(frozen=True)
class CnfFormula:
    """CNF over variables ``1..n``; literals are signed variable indices."""

    n: int
    clauses: tuple[tuple[int, ...], ...]
    nae: bool = False

    def __post_init__(self) -> None:
        clauses = tuple(tuple(int(x) for x in c) for c in self.clauses)
        if self.n < 0:
            raise ValueError("variable count must be non-negative")
        for idx, c in enumerate(clauses, 1):
            if not c:
                raise ValueError(f"clause {idx} is empty")
            for lit in c:
                if lit == 0 or abs(lit) > self.n:
                    raise ValueError(f"clause {idx}: literal {lit} outside 1..{self.n}")
        object.__setattr__(self, "clauses", clauses)

    @property
    def m(self) -> int:
        return len(self.clauses)

    def clause_value(self, clause: Sequence[int], assignment: Sequence[bool]) -> bool:
        vals = [assignment[abs(x) - 1] == (x > 0) for x in clause]
        if self.nae:
            return any(vals) and not all(vals)
        return any(vals)

    def satisfied_by(self, assignment: Sequence[bool]) -> bool:
        if len(assignment) != self.n:
            raise ValueError(f"assignment has {len(assignment)} values, expected {self.n}")
        return all(self.clause_value(c, assignment) for c in self.clauses)

    def solutions(self) -> Iterator[tuple[bool, ...]]:
        """All satisfying assignments, false-first lexicographic order."""
        for bits in itertools.product((False, True), repeat=self.n):
            if self.satisfied_by(bits):
                yield bits

    def is_satisfiable(self) -> bool:
        return next(self.solutions(), None) is not None


@dataclass(frozen=True)
class BatteriesInstance:
    """``rows x cols`` matrix of batteries; ``cells[i][j] = (x1, x2)`` (0-based storage)."""

    rows: int
    cols: int
    cells: tuple[tuple[tuple[int, int], ...], ...]

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("batteries dimensions must be positive")
        cells = tuple(tuple((int(bool(a)), int(bool(b))) for a, b in row) for row in self.cells)
        if len(cells) != self.rows or any(len(row) != self.cols for row in cells):
            raise ValueError(f"expected {self.rows}x{self.cols} batteries")
        object.__setattr__(self, "cells", cells)

    def battery(self, i: int, j: int) -> tuple[int, int]:
        """Battery at 1-based house ``(i, j)``."""
        return self.cells[i - 1][j - 1]


Placement = tuple[tuple[str, ...], ...]


def column_placement(signs: Sequence[str], rows: int) -> Placement:
    """Placement whose every column is uniform with the given signs."""
    for s in signs:
        if s not in "+-" or len(s) != 1:
            raise ValueError(f"bad sign {s!r}")
    return tuple(tuple(signs) for _ in range(rows))


def voltage(b: BatteriesInstance, p: Placement, i: int, j: int) -> int:
    """V_p at 1-based ``(i, j)``: x1 on '+', x2 on '-'."""
    x1, x2 = b.battery(i, j)
    return x1 if p[i - 1][j - 1] == "+" else x2


class PlacementCheck(tuple):
    __slots__ = ()

    def __new__(cls, correct: bool, safe: bool) -> "PlacementCheck":
        return super().__new__(cls, (correct, safe))

    @property
    def correct(self) -> bool:
        return self[0]

    @property
    def safe(self) -> bool:
        return self[1]


def placement_check(b: BatteriesInstance, p: Placement) -> PlacementCheck:
    if len(p) != b.rows or any(len(row) != b.cols for row in p):
        raise ValueError("placement dimensions do not match the instance")
    if any(s not in ("+", "-") for row in p for s in row):
        raise ValueError("placement signs must be '+' or '-'")
    correct = all(p[i][j] == p[i + 1][j] for i in range(b.rows - 1) for j in range(b.cols))
    safe = all(sum(voltage(b, p, i, j) for j in range(1, b.cols + 1)) <= b.cols - 1
               for i in range(1, b.rows + 1))
    return PlacementCheck(correct, safe)


@dataclass(frozen=True)
class BatteriesResult:
    answer: Answer
    placement: Placement | None = None


def batteries_brute_force(b: BatteriesInstance, max_cols: int = 20) -> BatteriesResult:
    """Try every column-sign vector; only uniform columns can be correct."""
    if b.cols > max_cols:
        return BatteriesResult(Answer.UNKNOWN)
    for signs in itertools.product("+-", repeat=b.cols):
        p = column_placement(signs, b.rows)
        if placement_check(b, p).safe:
            return BatteriesResult(Answer.YES, p)
    return BatteriesResult(Answer.NO)


def reduce_sat_to_batteries(pi: CnfFormula) -> BatteriesInstance:
    if pi.nae:
        raise ValueError("reduce_sat_to_batteries takes a plain SAT formula")
    if pi.m == 0 or pi.n == 0:
        raise ValueError("need at least one clause and one variable")
    rows = []
    for clause in pi.clauses:
        lits = set(clause)
        rows.append(tuple((0 if j in lits else 1, 0 if -j in lits else 1) for j in range(1, pi.n + 1)))
    return BatteriesInstance(pi.m, pi.n, tuple(rows))


def placement_to_assignment(p: Placement) -> tuple[bool, ...]:
    """Column '+' reads as true."""
    return tuple(s == "+" for s in p[0])


def assignment_to_placement(alpha: Sequence[bool], rows: int) -> Placement:
    return column_placement(["+" if a else "-" for a in alpha], rows)


# ---------------------------------------------------------------------------
# grid frame and battery gadgets (coordinates 0-based; witnesses shift by one)


def frame_cells(m: int, n: int) -> list[Cell]:
    if m < 1 or n < 1:
        raise ValueError("frame needs m, n >= 1")
    rows, cols = 12 * m + 5, 8 * n + 5
    out = set()
    for r in range(rows):
        for c in range(cols):
            if r <= 2 or r >= rows - 3 or c <= 2 or c >= cols - 3:
                out.add((r, c))
    return sorted(out)


def unit_adjacency(cells: Sequence[Cell]) -> list[tuple[int, int]]:
    index = {c: i for i, c in enumerate(cells)}
    edges = []
    for (r, c), i in index.items():
        for nb in ((r + 1, c), (r, c + 1)):
            j = index.get(nb)
            if j is not None:
                edges.append((i, j))
    return edges


@dataclass(frozen=True)
class FrameGraph:
    graph: Graph
    coords: tuple[Cell, ...]

    def embedding(self) -> GridEmbedding:
        m_rows = max(r for r, _ in self.coords) + 1
        m_cols = max(c for _, c in self.coords) + 1
        return GridEmbedding(m_rows, m_cols, {v: (r + 1, c + 1) for v, (r, c) in enumerate(self.coords)})


def grid_frame(m: int, n: int) -> FrameGraph:
    cells = frame_cells(m, n)
    return FrameGraph(Graph.from_edges(len(cells), unit_adjacency(cells)), tuple(cells))


GADGET_ROWS, GADGET_COLS = 13, 9
MIDLINE = 6
ANCHOR: Cell = (6, 4)
WIRE_ROW = 5
WIRE_SPOTS: tuple[Cell, Cell] = ((5, 1), (5, 7))
SYNC_COLS = (3, 4, 5)
CLAW_COLS = (2, 6)

# Sides as (cell in the top placement, parent index); vertex 1 hangs from the anchor.
# A degree-4 vertex cannot touch a rigid cell or a claw root, which forces each side
# straight up the anchor column: P then covers (1,3) and (1,5) but not (1,4), N covers (1,4).
P_SIDE: tuple[tuple[Cell, int], ...] = (
    ((5, 4), -1), ((4, 4), 0), ((4, 3), 1), ((4, 5), 1), ((3, 4), 1), ((2, 4), 4), ((2, 3), 5),
    ((2, 5), 5), ((1, 3), 6), ((2, 2), 6), ((3, 3), 6), ((1, 5), 7), ((2, 6), 7), ((3, 5), 7),
)
N_SIDE: tuple[tuple[Cell, int], ...] = (
    ((5, 4), -1), ((4, 4), 0), ((4, 3), 1), ((4, 5), 1), ((3, 4), 1), ((2, 4), 4),
    ((2, 3), 5), ((2, 5), 5), ((1, 4), 5),
)
SIDES = {"P": P_SIDE, "N": N_SIDE}

# Claw pairs hang from the midline at CLAW_COLS; one root of each pair goes up, one down.
CLAWS: tuple[tuple[str, str, str], ...] = (("a", "b", "c"), ("d", "d1", "d2"), ("e", "f", "g"), ("h", "h1", "h2"))


def _mirror_rows(cell: Cell) -> Cell:
    return GADGET_ROWS - 1 - cell[0], cell[1]


@dataclass(frozen=True)
class GadgetLayout:
    """Local coordinate tables of the battery gadget (rows 0..12, cols 0..8).

    ``side_cells[(kind, top)]`` lists side vertex cells in label order.  The voltage pendant
    hangs from side vertex 1 and takes ``voltage_cells[(top, lane)]``, lane 0 blocking the
    left wire lane and lane 1 the right one.
    """

    rows: int = GADGET_ROWS
    cols: int = GADGET_COLS
    midline: int = MIDLINE
    anchor: Cell = ANCHOR
    wire_spots: tuple[Cell, Cell] = WIRE_SPOTS
    sync_cols: tuple[int, ...] = SYNC_COLS
    claw_cols: tuple[int, ...] = CLAW_COLS
    side_cells: Mapping[tuple[str, bool], tuple[Cell, ...]] = field(default_factory=dict)
    voltage_cells: Mapping[tuple[bool, int], Cell] = field(default_factory=dict)

    @classmethod
    def canonical(cls) -> "GadgetLayout":
        sides = {}
        for kind, table in SIDES.items():
            top = tuple(c for c, _ in table)
            sides[(kind, True)] = top
            sides[(kind, False)] = tuple(_mirror_rows(c) for c in top)
        volts = {(True, 0): (5, 3), (True, 1): (5, 5), (False, 0): (7, 3), (False, 1): (7, 5)}
        return cls(side_cells=sides, voltage_cells=volts)

    def rectangle(self) -> list[Cell]:
        return sorted({(r, c) for r in range(self.rows) for c in range(self.cols)
                       if r in (0, self.rows - 1) or c in (0, self.cols - 1)})

    def fixed_lines(self) -> list[Cell]:
        return sorted(set(self.rectangle()) | {(self.midline, c) for c in range(self.cols)})

    def claw_cells(self, col: int, up: bool, inner: bool) -> tuple[Cell, Cell, Cell]:
        """Root and two children of the claw at ``col``; ``inner`` uses the lane cell by the anchor."""
        r = self.midline - 1 if up else self.midline + 1
        away = r - 1 if up else r + 1
        side = 1 if col < self.anchor[1] else -1
        other = (r, col + side) if inner else (r, col - side)
        return (r, col), (away, col), other


LAYOUT = GadgetLayout.canonical()


@dataclass(frozen=True)
class GridReduction:
    """Output of reduce₂: the graph, its vertex labels and the frame dimensions."""

    graph: Graph
    labels: tuple[str, ...]
    index: Mapping[str, int]
    m: int
    n: int
    rigid: Mapping[int, Cell]

    @property
    def k(self) -> int:
        return 12 * self.m + 5

    @property
    def r(self) -> int:
        return 8 * self.n + 5


def _global(i: int, j: int, cell: Cell) -> Cell:
    return 12 * (i - 1) + 2 + cell[0], 8 * (j - 1) + 2 + cell[1]


def _rigid_cells(m: int, n: int) -> list[Cell]:
    cells = set(frame_cells(m, n))
    for i in range(1, 2 * m + 1):
        cells.update((6 * (i - 1) + 2, c) for c in range(2, 8 * n + 3))
    for j in range(1, n + 2):
        cells.update((r, 8 * (j - 1) + 2) for r in range(2, 12 * m + 3))
    return sorted(cells)


def reduce_batteries_to_grid(b: BatteriesInstance) -> GridReduction:
    m, n = b.rows, b.cols
    labels: list[str] = []
    edges: list[tuple[int, int]] = []
    rigid: dict[int, Cell] = {}

    def add(label: str) -> int:
        labels.append(label)
        return len(labels) - 1

    frame = set(frame_cells(m, n))
    cells = _rigid_cells(m, n)
    cell_id: dict[Cell, int] = {}
    for cell in cells:
        v = add(f"{'frame' if cell in frame else 'line'}:({cell[0]},{cell[1]})")
        cell_id[cell] = v
        rigid[v] = cell
    edges.extend(unit_adjacency(cells))

    for i in range(1, m + 1):
        for j in range(1, n + 1):
            anchor = cell_id[_global(i, j, ANCHOR)]
            volts = dict(zip("PN", b.battery(i, j)))
            for kind, table in SIDES.items():
                ids = [add(f"gadget:({i},{j}):{kind}:{t + 1}") for t in range(len(table))]
                for t, (_, parent) in enumerate(table):
                    edges.append((anchor if parent < 0 else ids[parent], ids[t]))
                if volts[kind]:
                    edges.append((ids[0], add(f"gadget:({i},{j}):V{kind}")))
            for pair, col in ((CLAWS[:2], CLAW_COLS[0]), (CLAWS[2:], CLAW_COLS[1])):
                mid = cell_id[_global(i, j, (MIDLINE, col))]
                for root, *kids in pair:
                    rid = add(f"gadget:({i},{j}):{root}")
                    edges.append((mid, rid))
                    edges.extend((rid, add(f"gadget:({i},{j}):{kid}")) for kid in kids)
    for i in range(1, m + 1):
        for j in range(0, n + 1):
            line = cell_id[(12 * (i - 1) + 2 + WIRE_ROW, 8 * j + 2)]
            edges.append((line, add(f"wire:({i},{j})")))
    for i in range(1, m):
        for j in range(1, n + 1):
            for c in SYNC_COLS:
                side = cell_id[_global(i, j, (GADGET_ROWS - 1, c))]
                edges.append((side, add(f"sync:({i},{j}):{c}")))
    g = Graph.from_edges(len(labels), edges)
    return GridReduction(g, tuple(labels), {s: v for v, s in enumerate(labels)}, m, n, rigid)


def construct_batteries_witness(b: BatteriesInstance, p: Placement) -> GridEmbedding:
    chk = placement_check(b, p)
    if not (chk.correct and chk.safe):
        raise ValueError(f"placement must be correct and safe, got {chk.correct=} {chk.safe=}")
    red = reduce_batteries_to_grid(b)
    m, n = b.rows, b.cols
    pos: dict[int, Cell] = dict(red.rigid)
    idx = red.index
    for i in range(1, m + 1):
        k_i = next(j for j in range(1, n + 1) if voltage(b, p, i, j) == 0)
        for j in range(1, n + 1):
            def put(name: str, cell: Cell) -> None:
                pos[idx[f"gadget:({i},{j}):{name}"]] = _global(i, j, cell)

            # left lane holds W(i, j-1) when j <= k_i, right lane holds W(i, j) when j >= k_i
            left_in, right_in = j <= k_i, j >= k_i
            volts = dict(zip("PN", b.battery(i, j)))
            top_kind = "P" if p[i - 1][j - 1] == "+" else "N"
            for kind in "PN":
                top = kind == top_kind
                for t, cell in enumerate(LAYOUT.side_cells[(kind, top)]):
                    put(f"{kind}:{t + 1}", cell)
                if volts[kind]:
                    put(f"V{kind}", LAYOUT.voltage_cells[(top, 1 if top and left_in else 0)])
            for (up_root, down_root), col, inner in (((CLAWS[0], CLAWS[1]), CLAW_COLS[0], left_in),
                                                     ((CLAWS[2], CLAWS[3]), CLAW_COLS[1], right_in)):
                for names, up in ((up_root, True), (down_root, False)):
                    for name, cell in zip(names, LAYOUT.claw_cells(col, up, inner and up)):
                        put(name, cell)
        for j in range(0, n + 1):
            if j < k_i:
                cell = _global(i, j + 1, WIRE_SPOTS[0])
            else:
                cell = _global(i, j, WIRE_SPOTS[1])
            pos[idx[f"wire:({i},{j})"]] = cell
    for i in range(1, m):
        for j in range(1, n + 1):
            down = {3: False, 4: True, 5: False} if p[i - 1][j - 1] == "+" else {3: True, 4: False, 5: True}
            for c in SYNC_COLS:
                if down[c]:
                    cell = _global(i + 1, j, (1, c))
                else:
                    cell = _global(i, j, (GADGET_ROWS - 2, c))
                pos[idx[f"sync:({i},{j}):{c}"]] = cell
    f = GridEmbedding(red.k, red.r, {v: (r + 1, c + 1) for v, (r, c) in pos.items()})
    chk2 = validate(red.graph, f)
    if not chk2:
        raise AssertionError(f"constructed batteries witness is invalid: {chk2.reason}")
    return f


# ---------------------------------------------------------------------------
# 3-Partition to 3 x r


@dataclass(frozen=True)
class ThreePartitionReduction:
    graph: Graph
    labels: tuple[str, ...]
    weights: tuple[int, ...]
    target: int
    m: int
    k: int
    r: int


def _three_partition_weights(w: Sequence[int], normalize: bool) -> tuple[tuple[int, ...], int, int]:
    if not w or len(w) % 3:
        raise ValueError("the multiset size must be a positive multiple of 3")
    if any(x <= 0 for x in w):
        raise ValueError("elements must be positive")
    m = len(w) // 3
    total = sum(w)
    if total % m:
        raise ValueError(f"sum {total} is not divisible by m={m}")
    target = total // m
    if normalize:
        return tuple(x + total for x in w), target + 3 * total, m
    if any(x <= 2 for x in w):
        raise ValueError("un-normalized elements must exceed 2")
    return tuple(w), target, m


def reduce_3partition(w: Sequence[int], normalize: bool = True) -> ThreePartitionReduction:
    weights, target, m = _three_partition_weights(w, normalize)
    width = target + 4
    labels: list[str] = []
    edges: list[tuple[int, int]] = []
    for j in range(1, m + 1):
        base = len(labels)
        labels.extend(f"c:{j}:{i}" for i in range(1, width + 1))
        labels.extend(f"s:{j}:{i}" for i in range(1, width + 1))

        def c(i: int) -> int:
            return base + i - 1

        def s(i: int) -> int:
            return base + width + i - 1

        edges.extend((c(i), c(i + 1)) for i in range(1, width))
        edges.extend((c(i), s(i)) for i in range(2, width))
        edges.extend((s(i), s(i + 1)) for i in range(2, width - 1))
        edges.append((c(2), s(1)))
        edges.append((c(width - 1), s(width)))
    for t, wt in enumerate(weights, 1):
        base = len(labels)
        labels.extend(f"p:{t}:{i}" for i in range(1, wt + 1))
        edges.extend((base + i, base + i + 1) for i in range(wt - 1))
    g = Graph.from_edges(len(labels), edges)
    return ThreePartitionReduction(g, tuple(labels), weights, target, m, 3, m * width)


def three_partition_brute_force(w: Sequence[int]) -> list[tuple[int, int, int]] | None:
    """A partition into index triples with equal sums, or None."""
    if len(w) % 3 or not w:
        return None
    m = len(w) // 3
    if sum(w) % m:
        return None
    target = sum(w) // m

    def rec(left: tuple[int, ...]) -> list[tuple[int, int, int]] | None:
        if not left:
            return []
        a = left[0]
        rest = left[1:]
        for x, y in itertools.combinations(range(len(rest)), 2):
            if w[a] + w[rest[x]] + w[rest[y]] == target:
                sub = rec(tuple(v for t, v in enumerate(rest) if t not in (x, y)))
                if sub is not None:
                    return [(a, rest[x], rest[y])] + sub
        return None

    return rec(tuple(range(len(w))))


def construct_3partition_witness(w: Sequence[int], partition: Sequence[Sequence[int]],
                                 normalize: bool = True) -> GridEmbedding:
    red = reduce_3partition(w, normalize)
    m = red.m
    flat = sorted(x for t in partition for x in t)
    if len(partition) != m or any(len(t) != 3 for t in partition) or flat != list(range(len(w))):
        raise ValueError("partition must split the element indices into m triples")
    for t in partition:
        if sum(red.weights[x] for x in t) != red.target:
            raise ValueError(f"triple {tuple(t)} does not sum to the target")
    idx = {s: v for v, s in enumerate(red.labels)}
    width = red.target + 4
    pos: dict[int, Cell] = {}
    for j in range(1, m + 1):
        off = (j - 1) * width
        for i in range(1, width + 1):
            pos[idx[f"c:{j}:{i}"]] = (2, off + i)
        for i in range(2, width):
            pos[idx[f"s:{j}:{i}"]] = (3, off + i)
        pos[idx[f"s:{j}:1"]] = (1, off + 2)
        pos[idx[f"s:{j}:{width}"]] = (1, off + width - 1)
        col = off + 3
        for t in partition[j - 1]:
            for i in range(1, red.weights[t] + 1):
                pos[idx[f"p:{t + 1}:{i}"]] = (1, col)
                col += 1
    f = GridEmbedding(red.k, red.r, pos)
    chk = validate(red.graph, f)
    if not chk:
        raise AssertionError(f"constructed 3-partition witness is invalid: {chk.reason}")
    return f


# ---------------------------------------------------------------------------
# NAE-SAT to a pathwidth-2 tree


@dataclass(frozen=True)
class NaeReduction:
    graph: Graph
    labels: tuple[str, ...]
    n: int
    m: int

    @property
    def k(self) -> int:
        return 4 * self.m + 3

    @property
    def r(self) -> int:
        return 2 * self.n + 9


def _caterpillar_leaves(pi: CnfFormula, i: int, positive: bool) -> dict[int, tuple[str, ...]]:
    """Leaf sides per main-path level j: 'x' one leaf, 'lr' two leaves."""
    n, m = pi.n, pi.m
    out: dict[int, tuple[str, ...]] = {}
    for j in range(1, 2 * m + 1):
        if i in (0, n + 1):
            out[j] = ("l", "r")
        elif j % 2:
            lit = i if positive else -i
            if lit not in pi.clauses[(j + 1) // 2 - 1]:
                out[j] = ("x",)
        elif i <= n - 1:
            out[j] = ("x",)
    return out


def reduce_naesat(pi: CnfFormula) -> NaeReduction:
    if pi.n < 1 or pi.m < 1:
        raise ValueError("need at least one variable and one clause")
    n, m = pi.n, pi.m
    labels: list[str] = []
    edges: list[tuple[int, int]] = []
    idx: dict[str, int] = {}

    def add(label: str) -> int:
        idx[label] = len(labels)
        labels.append(label)
        return idx[label]

    for i in range(n + 2):
        add(f"b:{i}")
        if i <= n:
            add(f"b':{i}")
    for i in range(n + 1):
        edges.append((idx[f"b:{i}"], idx[f"b':{i}"]))
        edges.append((idx[f"b':{i}"], idx[f"b:{i + 1}"]))
    for i in range(n + 2):
        for bar in ("", "bar"):
            name = f"v{bar}"
            ids = [add(f"{name}:{i}:{j}") for j in range(1, 2 * m + 2)]
            edges.append((idx[f"b:{i}"], ids[0]))
            edges.extend((ids[t], ids[t + 1]) for t in range(2 * m))
            for j, sides in _caterpillar_leaves(pi, i, positive=not bar).items():
                for s in sides:
                    edges.append((ids[j - 1], add(f"u{bar}:{i}:{j}:{s}")))
    for star, attach in (("s", "b:0"), ("t", f"b:{n + 1}")):
        centre = add(f"{star}*")
        for t in range(1, 5):
            edges.append((centre, add(f"{star}:{t}")))
        edges.append((idx[f"{star}:1"], idx[attach]))
    g = Graph.from_edges(len(labels), edges)
    return NaeReduction(g, tuple(labels), n, m)


def construct_naesat_witness(pi: CnfFormula, alpha: Sequence[bool]) -> GridEmbedding:
    nae = CnfFormula(pi.n, pi.clauses, nae=True)
    if not nae.satisfied_by(alpha):
        raise ValueError("assignment does not satisfy every clause in the not-all-equal sense")
    red = reduce_naesat(pi)
    idx = {s: v for v, s in enumerate(red.labels)}
    n, m = pi.n, pi.m
    pos: dict[int, Cell] = {}
    for i in range(n + 2):
        pos[idx[f"b:{i}"]] = (0, 2 * i)
        if i <= n:
            pos[idx[f"b':{i}"]] = (0, 2 * i + 1)
    for star, col, step in (("s", -1, -1), ("t", 2 * n + 3, 1)):
        pos[idx[f"{star}:1"]] = (0, col)
        pos[idx[f"{star}*"]] = (0, col + step)
        pos[idx[f"{star}:3"]] = (0, col + 2 * step)
        pos[idx[f"{star}:2"]] = (-1, col + step)
        pos[idx[f"{star}:4"]] = (1, col + step)
    # sign -1 places a main path above the base path, +1 below
    placed: dict[tuple[int, str], int] = {}
    for i in range(n + 2):
        up_positive = True if i in (0, n + 1) else bool(alpha[i - 1])
        placed[(i, "")] = -1 if up_positive else 1
        placed[(i, "bar")] = 1 if up_positive else -1
    for i in range(n + 2):
        for bar in ("", "bar"):
            sgn = placed[(i, bar)]
            for j in range(1, 2 * m + 2):
                pos[idx[f"v{bar}:{i}:{j}"]] = (sgn * j, 2 * i)
    for sgn in (-1, 1):
        owner = {i: next(bar for bar in ("", "bar") if placed[(i, bar)] == sgn) for i in range(n + 2)}
        leaves = {i: _caterpillar_leaves(pi, i, positive=not owner[i]) for i in range(n + 2)}
        for j in range(1, 2 * m + 1):
            free = next((i for i in range(1, n + 1) if j not in leaves[i]), n + 1)
            for i in range(n + 2):
                for tag in leaves[i].get(j, ()):
                    side = tag if tag != "x" else ("r" if i < free else "l")
                    pos[idx[f"u{owner[i]}:{i}:{j}:{tag}"]] = (sgn * j, 2 * i + (1 if side == "r" else -1))
    shift_r, shift_c = 2 * m + 2, 4
    f = GridEmbedding(red.k, red.r, {v: (a + shift_r, c + shift_c) for v, (a, c) in pos.items()})
    chk = validate(red.graph, f)
    if not chk:
        raise AssertionError(f"constructed NAE-SAT witness is invalid: {chk.reason}")
    return f


# ---------------------------------------------------------------------------
# strip packing


def rectangle_graph(h: int, w: int) -> Graph:
    cells = [(a, b) for a in range(h) for b in range(w)]
    return Graph.from_edges(len(cells), unit_adjacency(cells))


STRIP_METHODS = ("components", "generic")


def strip_pack(rects: Sequence[tuple[int, int]], k: int, width: int,
               budget: int | None = DEFAULT_BUDGET, method: str = "components") -> SolveResult:
    """Pack rectangles (rotations allowed) into a ``k x width`` strip via grid embedding.

    The instance is the disjoint union of rectangle graphs in a ``k x width`` grid, both
    doubled when some side is 1 so every component is rigid.  ``method="components"``
    searches over whole-component placements, which is exact because a rigid rectangle
    only embeds axis-parallel; ``"generic"`` runs the snapshot solver, then brute force.
    A yes answer carries ``stats["placements"]``: per rectangle ``(row, col, height, width)``,
    1-based, in strip units.
    """
    from .snapshot import solve_mcc_k

    if method not in STRIP_METHODS:
        raise ValueError(f"unknown method {method!r}")
    if k < 1 or width < 1 or any(h < 1 or w < 1 for h, w in rects):
        raise ValueError("dimensions must be positive")
    scale = 2 if any(1 in (h, w) for h, w in rects) else 1
    g = Graph(0)
    owner: list[int] = []
    for t, (h, w) in enumerate(rects):
        g = g.disjoint_union(rectangle_graph(h * scale, w * scale))
        owner.extend([t] * (h * w * scale * scale))
    kk, rr = k * scale, width * scale
    stats: dict = {"scale": scale, "k": kk, "r": rr}
    if not rects:
        return SolveResult(Answer.YES, GridEmbedding(kk, rr, {}), {**stats, "placements": []})
    if sum(h * w for h, w in rects) > k * width:
        return SolveResult(Answer.NO, None, {**stats, "reason": "area"})
    if method == "components":
        dims = [(h * scale, w * scale) for h, w in rects]
        res = _component_search(dims, kk, rr, budget)
        stats["solver"] = "components"
    else:
        res = solve_mcc_k(g, kk, rr, budget=budget)
        stats["solver"] = "snapshot"
        if res.answer is Answer.UNKNOWN:
            res = brute_force_embed(g, kk, rr, budget=budget)
            stats["solver"] = "brute"
    stats.update({f"solver_{key}": val for key, val in res.stats.items() if isinstance(val, (int, str))})
    if not res.yes:
        return SolveResult(res.answer, None, stats)
    f = res.witness
    chk = validate(g, f)
    if not chk:
        raise AssertionError(f"strip witness is invalid: {chk.reason}")
    boxes = []
    for t in range(len(rects)):
        cells = [f.pos[v] for v in range(len(owner)) if owner[v] == t]
        r0, c0 = min(a for a, _ in cells), min(b for _, b in cells)
        boxes.append([r0 - 1, c0 - 1, max(a for a, _ in cells) - r0 + 1, max(b for _, b in cells) - c0 + 1])
    if scale > 1:
        _compact(boxes)
    stats["placements"] = [(r0 // scale + 1, c0 // scale + 1, h // scale, w // scale) for r0, c0, h, w in boxes]
    return SolveResult(Answer.YES, f, stats)


def _component_search(dims: Sequence[tuple[int, int]], k: int, r: int, budget: int | None) -> SolveResult:
    """Embed a disjoint union of rigid ``h x w`` grids by filling the first free cell.

    The first free cell in row-major order is either left empty (while slack remains) or
    covered by the top-left corner of some unplaced rectangle, in either orientation.
    Equal rectangles are interchangeable, so only the first unplaced copy is tried.
    """
    from .oracle import BudgetExceeded, NodeCounter

    counter = NodeCounter(budget)
    grid = [[False] * r for _ in range(k)]
    placed: list[tuple[int, int, bool] | None] = [None] * len(dims)
    slack = k * r - sum(h * w for h, w in dims)

    def fits(a: int, b: int, h: int, w: int) -> bool:
        if a + h > k or b + w > r:
            return False
        return not any(grid[x][y] for x in range(a, a + h) for y in range(b, b + w))

    def mark(a: int, b: int, h: int, w: int, val: bool) -> None:
        for x in range(a, a + h):
            for y in range(b, b + w):
                grid[x][y] = val

    def rec(start: int, left: int, slack: int) -> bool:
        counter.tick()
        if left == 0:
            return True
        cell = start
        while grid[cell // r][cell % r]:
            cell += 1
        a, b = divmod(cell, r)
        tried: set[tuple[int, int]] = set()
        for t, (h, w) in enumerate(dims):
            if placed[t] is not None or (h, w) in tried:
                continue
            tried.add((h, w))
            for hh, ww, rot in ((h, w, False), (w, h, True)):
                if rot and h == w:
                    continue
                if fits(a, b, hh, ww):
                    mark(a, b, hh, ww, True)
                    placed[t] = (a, b, rot)
                    if rec(cell, left - 1, slack):
                        return True
                    placed[t] = None
                    mark(a, b, hh, ww, False)
        if slack > 0:
            grid[a][b] = True
            ok = rec(cell, left, slack - 1)
            grid[a][b] = False
            return ok
        return False

    try:
        found = rec(0, len(dims), slack)
    except BudgetExceeded:
        return SolveResult(Answer.UNKNOWN, None, {"nodes": counter.nodes})
    if not found:
        return SolveResult(Answer.NO, None, {"nodes": counter.nodes})
    pos: dict[int, Cell] = {}
    base = 0
    for (h, w), (a, b, rot) in zip(dims, placed):
        for x in range(h):
            for y in range(w):
                pos[base + x * w + y] = (a + 1 + y, b + 1 + x) if rot else (a + 1 + x, b + 1 + y)
        base += h * w
    return SolveResult(Answer.YES, GridEmbedding(k, r, pos), {"nodes": counter.nodes})


def _compact(boxes: list[list[int]]) -> None:
    """Slide boxes up and left until stuck; every offset becomes a sum of box sides."""

    def blocked(t: int, dr: int, dc: int) -> bool:
        r0, c0, h, w = boxes[t]
        r0, c0 = r0 + dr, c0 + dc
        if r0 < 0 or c0 < 0:
            return True
        return any(u != t and r0 < b[0] + b[2] and b[0] < r0 + h and c0 < b[1] + b[3] and b[1] < c0 + w
                   for u, b in enumerate(boxes))

    moved = True
    while moved:
        moved = False
        for t in range(len(boxes)):
            for dr, dc in ((-1, 0), (0, -1)):
                while not blocked(t, dr, dc):
                    boxes[t][0] += dr
                    boxes[t][1] += dc
                    moved = True
