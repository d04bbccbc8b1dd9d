"""Grid embeddings: validation, distances, directions and the subgrid/agree/glue algebra."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .graph import Graph, all_pairs_distances, is_connected

Cell = tuple[int, int]


@dataclass(frozen=True, eq=True)
class GridEmbedding:
    """Map vertex -> (row, col) on the 1-based ``[k] x [r]`` lattice."""

    k: int
    r: int
    pos: Mapping[int, Cell] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pos", {int(v): (int(a), int(b)) for v, (a, b) in self.pos.items()})

    __hash__ = None  # type: ignore[assignment]

    def __getitem__(self, v: int) -> Cell:
        return self.pos[v]

    def __contains__(self, v: object) -> bool:
        return v in self.pos

    def vertices(self) -> list[int]:
        return sorted(self.pos)

    def cells(self) -> set[Cell]:
        return set(self.pos.values())

    def inverse(self) -> dict[Cell, int]:
        return {c: v for v, c in self.pos.items()}

    def bounding_box(self) -> tuple[int, int, int, int]:
        """``(min_row, max_row, min_col, max_col)``."""
        rows = [c[0] for c in self.pos.values()]
        cols = [c[1] for c in self.pos.values()]
        return min(rows), max(rows), min(cols), max(cols)

    def length(self) -> int:
        if not self.pos:
            return 0
        lo, hi, _, _ = self.bounding_box()
        return hi - lo + 1

    def width(self) -> int:
        if not self.pos:
            return 0
        _, _, lo, hi = self.bounding_box()
        return hi - lo + 1

    def translate(self, dr: int, dc: int) -> "GridEmbedding":
        return GridEmbedding(self.k, self.r, {v: (a + dr, b + dc) for v, (a, b) in self.pos.items()})

    def normalized(self, k: int | None = None, r: int | None = None) -> "GridEmbedding":
        """Shift so the minimum row and column are 1; bounds default to the bounding box."""
        if not self.pos:
            return GridEmbedding(k or 0, r or 0, {})
        lo_r, hi_r, lo_c, hi_c = self.bounding_box()
        moved = {v: (a - lo_r + 1, b - lo_c + 1) for v, (a, b) in self.pos.items()}
        return GridEmbedding(k if k is not None else hi_r - lo_r + 1, r if r is not None else hi_c - lo_c + 1, moved)

    def restrict(self, vertices: Iterable[int]) -> "GridEmbedding":
        keep = set(vertices)
        return GridEmbedding(self.k, self.r, {v: c for v, c in self.pos.items() if v in keep})

    def relabel(self, mapping: Mapping[int, int] | Sequence[int]) -> "GridEmbedding":
        return GridEmbedding(self.k, self.r, {mapping[v]: c for v, c in self.pos.items()})

    def transformed(self, flip_rows: bool, flip_cols: bool, transpose: bool) -> "GridEmbedding":
        """Apply a lattice symmetry of the ``k x r`` box."""
        k, r = self.k, self.r
        out = {}
        for v, (a, b) in self.pos.items():
            if flip_rows:
                a = k + 1 - a
            if flip_cols:
                b = r + 1 - b
            if transpose:
                a, b = b, a
            out[v] = (a, b)
        return GridEmbedding(r if transpose else k, k if transpose else r, out)


@dataclass(frozen=True)
class Validity:
    valid: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.valid


def validate(g: Graph, f: GridEmbedding) -> Validity:
    """Check totality, bounds, injectivity and unit edge lengths."""
    if set(f.pos) != set(range(g.n)):
        missing = sorted(set(range(g.n)) - set(f.pos))
        extra = sorted(set(f.pos) - set(range(g.n)))
        return Validity(False, f"vertex set mismatch (missing {missing[:5]}, extra {extra[:5]})")
    for v, (a, b) in f.pos.items():
        if not (1 <= a <= f.k and 1 <= b <= f.r):
            return Validity(False, f"vertex {v} at {(a, b)} outside {f.k}x{f.r}")
    counts = Counter(f.pos.values())
    for cell, c in counts.items():
        if c > 1:
            return Validity(False, f"cell {cell} used {c} times")
    for u, v in sorted(g.edges):
        if grid_distance(f, u, v) != 1:
            return Validity(False, f"edge {(u, v)} has length {grid_distance(f, u, v)}")
    return Validity(True)


def grid_distance(f: GridEmbedding, u: int, v: int) -> int:
    if u not in f.pos or v not in f.pos:
        raise KeyError(f"vertex {u if u not in f.pos else v} is not mapped")
    (a, b), (c, d) = f.pos[u], f.pos[v]
    return abs(a - c) + abs(b - d)


class DistanceReport(NamedTuple):
    a_f: int
    witness_pair: tuple[int, int]


def distance_approximation(g: Graph, f: GridEmbedding, dist: np.ndarray | None = None) -> DistanceReport:
    """Maximum over pairs of graph distance minus grid distance."""
    if not is_connected(g):
        raise ValueError("distance approximation needs a connected graph")
    n = g.n
    if n <= 1:
        return DistanceReport(0, (0, 0))
    d = all_pairs_distances(g) if dist is None else dist
    coords = np.array([f.pos[v] for v in range(n)], dtype=np.int64)
    df = np.abs(coords[:, None, 0] - coords[None, :, 0]) + np.abs(coords[:, None, 1] - coords[None, :, 1])
    diff = d - df
    iu = np.triu_indices(n, 1)
    vals = diff[iu]
    best = int(vals.max())
    idx = int(np.argmax(vals == best))
    return DistanceReport(best, (int(iu[0][idx]), int(iu[1][idx])))


class Direction(str, Enum):
    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"

    @property
    def opposite(self) -> "Direction":
        return {Direction.UP: Direction.DOWN, Direction.DOWN: Direction.UP,
                Direction.LEFT: Direction.RIGHT, Direction.RIGHT: Direction.LEFT}[self]

    @property
    def vertical(self) -> bool:
        return self in (Direction.UP, Direction.DOWN)

    @property
    def step(self) -> Cell:
        return {Direction.UP: (1, 0), Direction.DOWN: (-1, 0),
                Direction.LEFT: (0, -1), Direction.RIGHT: (0, 1)}[self]


def direction_of_step(dr: int, dc: int) -> Direction:
    for d in Direction:
        if d.step == (dr, dc):
            return d
    raise ValueError(f"step {(dr, dc)} is not a unit step")


def edge_direction(f: GridEmbedding, u: int, v: int) -> Direction:
    """Direction of the move from ``u`` to ``v``; up increases the row."""
    if grid_distance(f, u, v) != 1:
        raise ValueError(f"vertices {u} and {v} are not adjacent in the embedding")
    (a, b), (c, d) = f.pos[u], f.pos[v]
    return direction_of_step(c - a, d - b)


class DirectionProfile(NamedTuple):
    up: int
    down: int
    left: int
    right: int


def path_direction_profile(f: GridEmbedding, path: Sequence[int]) -> DirectionProfile:
    counts = Counter(edge_direction(f, path[i], path[i + 1]) for i in range(len(path) - 1))
    return DirectionProfile(counts[Direction.UP], counts[Direction.DOWN], counts[Direction.LEFT], counts[Direction.RIGHT])


def is_subgrid(f_small: GridEmbedding, f_big: GridEmbedding) -> bool:
    """Whether ``f_small`` appears in ``f_big`` up to translation with a clean window.

    The window is ``f_small``'s own ``k' x r'`` box; every cell of it, shifted into
    ``f_big``, must hold exactly the vertex ``f_small`` puts there.
    """
    if not set(f_small.pos) <= set(f_big.pos):
        return False
    if not f_small.pos:
        return True
    v0 = next(iter(f_small.pos))
    shift = (f_big.pos[v0][0] - f_small.pos[v0][0], f_big.pos[v0][1] - f_small.pos[v0][1])
    for v, (a, b) in f_small.pos.items():
        if f_big.pos[v] != (a + shift[0], b + shift[1]):
            return False
    small_inv = f_small.inverse()
    for v, (a, b) in f_big.pos.items():
        i, j = a - shift[0], b - shift[1]
        if 1 <= i <= f_small.k and 1 <= j <= f_small.r and small_inv.get((i, j)) != v:
            return False
    return True


class AgreeResult(NamedTuple):
    ok: bool
    shift: Cell | None

    def __bool__(self) -> bool:
        return self.ok


def _collision_free(f1: GridEmbedding, f2: GridEmbedding, shift: Cell) -> bool:
    a, b = shift
    inv1 = f1.inverse()
    for v, (x, y) in f2.pos.items():
        w = inv1.get((x + a, y + b))
        if w is not None and w != v:
            return False
        if v in f1.pos and f1.pos[v] != (x + a, y + b):
            return False
    return True


def agrees(f1: GridEmbedding, f2: GridEmbedding, shift: Cell | None = None) -> AgreeResult:
    """Whether ``f2`` shifted by ``(a, b)`` sticks onto ``f1`` without overlaps.

    With a nonempty overlap the shift is forced; with an empty overlap the
    lexicographically smallest collision-free shift of the bounding-box scan is
    reported. Passing ``shift`` checks that one shift only.
    """
    if shift is not None:
        return AgreeResult(_collision_free(f1, f2, shift), shift if _collision_free(f1, f2, shift) else None)
    shared = sorted(set(f1.pos) & set(f2.pos))
    if shared:
        u = shared[0]
        s = (f1.pos[u][0] - f2.pos[u][0], f1.pos[u][1] - f2.pos[u][1])
        return AgreeResult(True, s) if _collision_free(f1, f2, s) else AgreeResult(False, None)
    if not f1.pos or not f2.pos:
        return AgreeResult(True, (0, 0))
    lo1r, hi1r, lo1c, hi1c = f1.bounding_box()
    lo2r, hi2r, lo2c, hi2c = f2.bounding_box()
    for a in range(lo1r - hi2r - 1, hi1r - lo2r + 2):
        for b in range(lo1c - hi2c - 1, hi1c - lo2c + 2):
            if _collision_free(f1, f2, (a, b)):
                return AgreeResult(True, (a, b))
    return AgreeResult(False, None)  # unreachable: the first scanned shift separates the boxes


def glue(pieces: Sequence[GridEmbedding], shared: Iterable[int], normalize: bool = True,
         graph: Graph | None = None) -> GridEmbedding:
    """Stick embeddings together along a common vertex set ``shared``.

    Every piece must contain ``shared`` (nonempty) and the pieces must agree
    pairwise. The result lives in the first piece's frame unless ``normalize``.
    """
    U = set(shared)
    if not U:
        raise ValueError("glue needs a nonempty shared vertex set")
    if not pieces:
        raise ValueError("glue needs at least one piece")
    for i, p in enumerate(pieces):
        if not U <= set(p.pos):
            raise ValueError(f"piece {i + 1} does not contain the shared set")
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            extra = (set(pieces[i].pos) & set(pieces[j].pos)) - U
            if extra:
                raise ValueError(f"pieces {i + 1} and {j + 1} overlap outside the shared set")
            if not agrees(pieces[i], pieces[j]).ok:
                raise ValueError(f"pieces {i + 1} and {j + 1} do not agree")
    base = pieces[0]
    pos: dict[int, Cell] = dict(base.pos)
    for p in pieces[1:]:
        s = agrees(base, p).shift
        assert s is not None
        for v, (a, b) in p.pos.items():
            pos[v] = (a + s[0], b + s[1])
    inv: dict[Cell, int] = {}
    for v, c in pos.items():
        if c in inv and inv[c] != v:
            raise ValueError(f"glued pieces collide at {c}")
        inv[c] = v
    rows = [c[0] for c in pos.values()]
    cols = [c[1] for c in pos.values()]
    out = GridEmbedding(max(rows), max(cols), pos)
    if normalize:
        out = out.normalized()
    if graph is not None:
        check = validate(graph.induced(pos)[0], out.relabel({v: i for i, v in enumerate(sorted(pos))}))
        if not check:
            raise ValueError(f"glued embedding is invalid: {check.reason}")
    return out


def column_bound_violations(g: Graph, f: GridEmbedding, a_f: int | None = None,
                            dist: np.ndarray | None = None) -> list[str]:
    """Column bounds relative to every leftmost vertex (0-based columns)."""
    d = all_pairs_distances(g) if dist is None else dist
    if a_f is None:
        a_f = distance_approximation(g, f, d).a_f
    min_col = min(c for _, c in f.pos.values())
    out = []
    for v, (_, cv) in f.pos.items():
        if cv != min_col:
            continue
        for u, (_, cu) in f.pos.items():
            col = cu - min_col
            duv = int(d[u, v])
            if not (duv - a_f - f.k <= col <= duv + 1):
                out.append(f"vertex {u} column {col} vs d={duv} from leftmost {v}")
    return out


def distance_invariant_violations(g: Graph, f: GridEmbedding) -> list[str]:
    """Grid distance never exceeds graph distance; a_f ≤ |V|−2; column bounds."""
    d = all_pairs_distances(g)
    out = []
    n = g.n
    coords = np.array([f.pos[v] for v in range(n)], dtype=np.int64).reshape(n, 2)
    df = np.abs(coords[:, None, 0] - coords[None, :, 0]) + np.abs(coords[:, None, 1] - coords[None, :, 1])
    bad = (d >= 0) & (df > d)
    if bad.any():
        u, v = map(int, np.argwhere(bad)[0])
        out.append(f"grid distance exceeds graph distance for {(u, v)}")
    if n >= 2 and is_connected(g):
        a = distance_approximation(g, f, d).a_f
        if a > n - 2:
            out.append(f"a_f={a} exceeds |V|-2={n - 2}")
        out.extend(column_bound_violations(g, f, a, d))
    return out
