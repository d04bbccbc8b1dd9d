"""Text formats: graphs, embeddings, batteries, 3-partition, placements and DIMACS CNF."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .embedding import GridEmbedding
from .graph import Graph
from .reductions import BatteriesInstance, CnfFormula, Placement

GRAPH_HEADER = "gridbed-graph v1"
EMBEDDING_HEADER = "gridbed-embedding v1"
BATTERIES_HEADER = "gridbed-batteries v1"
PARTITION_HEADER = "gridbed-3partition v1"
PLACEMENT_HEADER = "gridbed-placement v1"


class FormatError(ValueError):
    """Malformed input; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _lines(text: str, comment: str = "#") -> Iterator[tuple[int, list[str]]]:
    """Non-blank lines split into tokens, comments removed."""
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split(comment, 1)[0].strip()
        if body:
            yield no, body.split()


def _expect_header(rows: list[tuple[int, list[str]]], header: str) -> None:
    if not rows or " ".join(rows[0][1]) != header:
        raise FormatError(f"expected header {header!r}", rows[0][0] if rows else 1)


def _int(tok: str, no: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"{what} must be an integer, got {tok!r}", no) from None


def _keyword(row: tuple[int, list[str]], key: str) -> int:
    no, toks = row
    if len(toks) != 2 or toks[0] != key:
        raise FormatError(f"expected '{key} <count>'", no)
    val = _int(toks[1], no, key)
    if val < 0:
        raise FormatError(f"{key} must be non-negative", no)
    return val


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class LabelledGraph:
    graph: Graph
    labels: tuple[str, ...]

    def index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.labels)}


def parse_graph(text: str) -> LabelledGraph:
    """Vertices named ``0..n-1`` keep their ids; other names get dense ids by first appearance."""
    rows = list(_lines(text))
    _expect_header(rows, GRAPH_HEADER)
    if len(rows) < 2:
        raise FormatError("missing 'n <count>' line", rows[0][0] + 1)
    n = _keyword(rows[1], "n")
    pairs: list[tuple[int, str, str]] = []
    for no, toks in rows[2:]:
        if len(toks) != 2:
            raise FormatError("edge line needs exactly two vertices", no)
        pairs.append((no, toks[0], toks[1]))
    names = [t for _, a, b in pairs for t in (a, b)]
    numeric = all(t.isdigit() and int(t) < n for t in names)
    if numeric:
        labels = [str(i) for i in range(n)]
    else:
        labels = list(dict.fromkeys(names))
        if len(labels) > n:
            raise FormatError(f"{len(labels)} distinct vertex names exceed n={n}")
        used = set(labels)
        labels += [s for s in (str(i) for i in range(n)) if s not in used][: n - len(labels)]
        while len(labels) < n:
            labels.append(f"_{len(labels)}")
    index = {s: i for i, s in enumerate(labels)}
    seen: set[tuple[int, int]] = set()
    edges = []
    for no, a, b in pairs:
        u, v = index[a], index[b]
        if u == v:
            raise FormatError(f"self-loop on {a}", no)
        e = (min(u, v), max(u, v))
        if e in seen:
            raise FormatError(f"duplicate edge {a} {b}", no)
        seen.add(e)
        edges.append(e)
    return LabelledGraph(Graph.from_edges(n, edges), tuple(labels))


def serialize_graph(g: Graph, labels: Sequence[str] | None = None, comments: Sequence[str] = ()) -> str:
    labels = list(labels) if labels is not None else [str(i) for i in range(g.n)]
    out = [GRAPH_HEADER, *(f"# {c}" for c in comments), f"n {g.n}"]
    out += [f"{labels[u]} {labels[v]}" for u, v in g.sorted_edges()]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# embeddings


def parse_embedding(text: str, k: int | None = None, r: int | None = None,
                    labels: Sequence[str] | None = None) -> GridEmbedding:
    """Read ``<vertex> <row> <col>`` lines (1-based).

    A ``grid <k> <r>`` line fixes the lattice; explicit ``k``/``r`` arguments
    override it. Without either, the lattice is the smallest one containing
    every cell.
    """
    rows = list(_lines(text))
    _expect_header(rows, EMBEDDING_HEADER)
    index = {s: i for i, s in enumerate(labels)} if labels is not None else None
    fk = fr = None
    pos: dict[int, tuple[int, int]] = {}
    where: dict[tuple[int, int], str] = {}
    for no, toks in rows[1:]:
        if toks[0] == "grid":
            if len(toks) != 3:
                raise FormatError("expected 'grid <k> <r>'", no)
            fk, fr = _int(toks[1], no, "k"), _int(toks[2], no, "r")
            continue
        if len(toks) != 3:
            raise FormatError("expected '<vertex> <row> <col>'", no)
        name = toks[0]
        if index is not None:
            if name not in index:
                raise FormatError(f"unknown vertex {name!r}", no)
            v = index[name]
        else:
            v = _int(name, no, "vertex")
        cell = (_int(toks[1], no, "row"), _int(toks[2], no, "col"))
        if v in pos:
            raise FormatError(f"vertex {name} placed twice", no)
        if cell in where:
            raise FormatError(f"cell {cell} already holds vertex {where[cell]}", no)
        if cell[0] < 1 or cell[1] < 1:
            raise FormatError(f"cell {cell} is outside the 1-based lattice", no)
        pos[v] = cell
        where[cell] = name
    k = k if k is not None else fk
    r = r if r is not None else fr
    if k is None:
        k = max((a for a, _ in pos.values()), default=0)
    if r is None:
        r = max((b for _, b in pos.values()), default=0)
    for v, (a, b) in pos.items():
        if a > k or b > r:
            raise FormatError(f"cell {(a, b)} of vertex {v} is outside the {k}x{r} lattice")
    return GridEmbedding(k, r, pos)


def serialize_embedding(f: GridEmbedding, labels: Sequence[str] | None = None) -> str:
    out = [EMBEDDING_HEADER, f"grid {f.k} {f.r}"]
    for v in f.vertices():
        name = labels[v] if labels is not None else str(v)
        out.append(f"{name} {f.pos[v][0]} {f.pos[v][1]}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# batteries, placements, 3-partition


def parse_batteries(text: str) -> BatteriesInstance:
    rows = list(_lines(text))
    _expect_header(rows, BATTERIES_HEADER)
    if len(rows) < 2:
        raise FormatError("missing 'r <rows> c <cols>' line", rows[0][0] + 1)
    no, toks = rows[1]
    if len(toks) != 4 or toks[0] != "r" or toks[2] != "c":
        raise FormatError("expected 'r <rows> c <cols>'", no)
    m, n = _int(toks[1], no, "rows"), _int(toks[3], no, "cols")
    if m < 1 or n < 1:
        raise FormatError("dimensions must be positive", no)
    bits: list[int] = []
    for no, toks in rows[2:]:
        for t in toks:
            if t not in ("0", "1"):
                raise FormatError(f"battery entries are 0 or 1, got {t!r}", no)
            bits.append(int(t))
    if len(bits) != 2 * m * n:
        raise FormatError(f"expected {2 * m * n} battery entries, got {len(bits)}")
    pairs = [(bits[2 * t], bits[2 * t + 1]) for t in range(m * n)]
    return BatteriesInstance(m, n, tuple(tuple(pairs[i * n:(i + 1) * n]) for i in range(m)))


def serialize_batteries(b: BatteriesInstance) -> str:
    out = [BATTERIES_HEADER, f"r {b.rows} c {b.cols}"]
    out += [" ".join(f"{x} {y}" for x, y in row) for row in b.cells]
    return "\n".join(out) + "\n"


def parse_placement(text: str) -> Placement:
    rows = list(_lines(text))
    _expect_header(rows, PLACEMENT_HEADER)
    out = []
    for no, toks in rows[1:]:
        if any(t not in "+-" or len(t) != 1 for t in toks):
            raise FormatError("placement entries are '+' or '-'", no)
        out.append(tuple(toks))
    if not out or len({len(r) for r in out}) != 1:
        raise FormatError("placement rows must be non-empty and of equal length")
    return tuple(out)


def serialize_placement(p: Placement) -> str:
    return "\n".join([PLACEMENT_HEADER, *(" ".join(row) for row in p)]) + "\n"


def parse_3partition(text: str) -> list[int]:
    rows = list(_lines(text))
    _expect_header(rows, PARTITION_HEADER)
    if len(rows) < 2:
        raise FormatError("missing 'm <m>' line", rows[0][0] + 1)
    m = _keyword(rows[1], "m")
    vals = [_int(t, no, "element") for no, toks in rows[2:] for t in toks]
    if len(vals) != 3 * m:
        raise FormatError(f"expected {3 * m} integers, got {len(vals)}")
    return vals


def serialize_3partition(w: Sequence[int]) -> str:
    return f"{PARTITION_HEADER}\nm {len(w) // 3}\n{' '.join(map(str, w))}\n"


# ---------------------------------------------------------------------------
# DIMACS CNF


def parse_dimacs(text: str, nae: bool = False) -> CnfFormula:
    n = m = None
    lits: list[int] = []
    for no, toks in _lines(text, comment="%"):
        if toks[0] == "c":
            continue
        if toks[0] == "p":
            if len(toks) != 4 or toks[1] != "cnf" or n is not None:
                raise FormatError("expected a single 'p cnf <vars> <clauses>' line", no)
            n, m = _int(toks[2], no, "vars"), _int(toks[3], no, "clauses")
            continue
        if n is None:
            raise FormatError("clause before the 'p cnf' line", no)
        lits.extend(_int(t, no, "literal") for t in toks)
    if n is None:
        raise FormatError("missing 'p cnf' line")
    clauses: list[tuple[int, ...]] = []
    cur: list[int] = []
    for x in lits:
        if x == 0:
            clauses.append(tuple(cur))
            cur = []
        else:
            cur.append(x)
    if cur:
        clauses.append(tuple(cur))
    if len(clauses) != m:
        raise FormatError(f"header announces {m} clauses, found {len(clauses)}")
    try:
        return CnfFormula(n, tuple(clauses), nae=nae)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def serialize_dimacs(pi: CnfFormula) -> str:
    out = [f"p cnf {pi.n} {pi.m}"] + [" ".join(map(str, (*c, 0))) for c in pi.clauses]
    return "\n".join(out) + "\n"
