import itertools
import random
from collections import Counter

import numpy as np
import pytest

from gridbed.embedding import validate
from gridbed.graph import Graph, MultiDigraph, component_catalog, connected_components, cycle_graph, path_graph
from gridbed.oracle import Answer, brute_force_embed
from gridbed.snapshot import (
    IlpSystem,
    Snapshot,
    SnapshotRun,
    audit_flow,
    block_offsets,
    block_plan,
    build_digraph,
    compute_adjacency,
    enumerate_snapshots,
    enumerate_spanning_trees,
    eulerian_path,
    ilp_feasible,
    solve_mcc_k,
)
from reference import connected_corpus, iso_bruteforce, union_find_components


def union(*gs: Graph) -> Graph:
    out = Graph(0)
    for g in gs:
        out = out.disjoint_union(g)
    return out


def lattice_subgraphs(k: int, w: int):
    """Every (cells, edges) subgraph of the k×w lattice, by plain bitmask enumeration."""
    cells_all = [(a, b) for a in range(k) for b in range(w)]
    for mask in range(1 << len(cells_all)):
        cells = [c for i, c in enumerate(cells_all) if mask >> i & 1]
        cand = [(x, y) for x, y in itertools.combinations(sorted(cells), 2)
                if abs(x[0] - y[0]) + abs(x[1] - y[1]) == 1]
        for emask in range(1 << len(cand)):
            yield frozenset(cells), frozenset(e for i, e in enumerate(cand) if emask >> i & 1)


def cell_components(cells, edges):
    order = sorted(cells)
    idx = {c: i for i, c in enumerate(order)}
    out = []
    for comp in union_find_components(len(order), [(idx[a], idx[b]) for a, b in edges]):
        cc = sorted(order[i] for i in comp)
        loc = {c: i for i, c in enumerate(cc)}
        g = Graph(len(cc), frozenset(tuple(sorted((loc[a], loc[b]))) for a, b in edges if a in loc))
        out.append((set(cc), g))
    return out


def in_catalog(g: Graph, reps) -> bool:
    return any(iso_bruteforce(g, rep) for rep in reps)


MIXED = union(path_graph(2), path_graph(3), cycle_graph(4))


# block_plan


def test_block_plan_examples():
    assert block_plan(8, 3) == (4, (3, 3, 3, 2))
    assert block_plan(7, 3) == (3, (3, 3, 3))
    assert block_offsets((3, 3, 3, 2)) == [0, 2, 4, 6]
    with pytest.raises(ValueError):
        block_plan(5, 1)


def test_block_plan_arithmetic():
    rng = random.Random(1)
    for _ in range(300):
        r, mcc = rng.randint(2, 60), rng.randint(2, 9)
        p, widths = block_plan(r, mcc)
        assert len(widths) == p
        assert sum(widths) == r + (p - 1)
        assert all(w == mcc for w in widths[:-1]) and 2 <= widths[-1] <= mcc


# enumerate_snapshots


def test_snapshots_single_row_pair():
    infos = enumerate_snapshots(1, 2, component_catalog(path_graph(2)))
    # both cells sit on a boundary column, so the edgeless pair has no fully contained part
    assert len(infos) == 5
    by_key = {(tuple(sorted(i.snapshot.cells)), len(i.snapshot.edges)): i for i in infos}
    lone = by_key[(((0, 0),), 0)]
    assert not lone.source and lone.sink
    full = by_key[(((0, 0), (0, 1)), 1)]
    assert full.source and full.sink and sum(full.freq_cen.values()) == 1


def test_snapshots_empty_catalog():
    cat = component_catalog(Graph(0))
    got = {i.snapshot.key for i in enumerate_snapshots(2, 3, cat)}
    want = set()
    for cells, edges in lattice_subgraphs(2, 3):
        sides = [({c for _, c in cc} & {0, 2}) for cc, _ in cell_components(cells, edges)]
        if all(len(s) == 1 for s in sides):
            want.add(Snapshot(2, 3, cells, edges).key)
    assert got == want


@pytest.mark.parametrize("w", [2, 3])
def test_snapshots_match_unfiltered_enumeration(w):
    cat = component_catalog(MIXED)
    reps = [rep for rep, _ in cat.classes]
    got = {i.snapshot.key for i in enumerate_snapshots(2, w, cat)}
    want = set()
    for cells, edges in lattice_subgraphs(2, w):
        ok = True
        for cc, g in cell_components(cells, edges):
            cols = {c for _, c in cc}
            if (0 in cols) == (w - 1 in cols) and not in_catalog(g, reps):
                ok = False
        if ok:
            want.add(Snapshot(2, w, cells, edges).key)
    assert got == want


def test_snapshot_rejects_bad_edges():
    with pytest.raises(ValueError):
        Snapshot(1, 3, frozenset({(0, 0), (0, 2)}), frozenset({((0, 0), (0, 2))}))
    with pytest.raises(ValueError):
        Snapshot(1, 2, frozenset({(1, 0)}), frozenset())


# compute_adjacency


def test_adjacency_mismatch_and_empty():
    cat = component_catalog(path_graph(2))
    empty = Snapshot(1, 2, frozenset(), frozenset())
    right = Snapshot(1, 2, frozenset({(0, 1)}), frozenset())
    left = Snapshot(1, 2, frozenset({(0, 0)}), frozenset())
    adj = compute_adjacency([empty, right], 1, 2, cat, right_snapshots=[empty, right])
    assert (0, 0) in {(e.left, e.right) for e in adj}
    # right's last column is occupied while empty's first column is not
    adj = compute_adjacency([right], 1, 2, cat, right_snapshots=[empty])
    assert adj == []
    adj = compute_adjacency([right], 1, 2, cat, right_snapshots=[left])
    assert adj == []  # the shared lone vertex would be a K1, which is not catalogued


def test_adjacency_matches_direct_wide_enumeration():
    cat = component_catalog(MIXED)
    reps = [rep for rep, _ in cat.classes]
    snaps = [i.snapshot for i in enumerate_snapshots(2, 2, cat)]
    index = {s.key: i for i, s in enumerate(snaps)}
    got = {(e.left, e.right): e.boundary_freq for e in compute_adjacency(snaps, 2, 2, cat)}
    want = {}
    for cells, edges in lattice_subgraphs(2, 3):
        lc = frozenset(c for c in cells if c[1] <= 1)
        le = frozenset(e for e in edges if e[0] in lc and e[1] in lc)
        rc = frozenset((a, b - 1) for a, b in cells if b >= 1)
        re_ = frozenset(((x[0], x[1] - 1), (y[0], y[1] - 1)) for x, y in edges if x[1] >= 1 and y[1] >= 1)
        i, j = index.get(Snapshot(2, 2, lc, le).key), index.get(Snapshot(2, 2, rc, re_).key)
        if i is None or j is None:
            continue
        freq = Counter()
        ok = True
        for cc, g in cell_components(cells, edges):
            cols = {c for _, c in cc}
            if 1 not in cols:
                continue
            match = [t for t, rep in enumerate(reps) if iso_bruteforce(g, rep)]
            if not match:
                ok = False
                break
            if 0 not in cols and 2 not in cols:
                freq[match[0]] += 1
        if ok:
            want[(i, j)] = freq
    assert got.keys() == want.keys()
    for key, freq in want.items():
        assert +got[key] == +freq


# build_digraph


def test_digraph_examples():
    d = build_digraph("s", "e", [], {("s", "e")})
    assert d.arcs == Counter({("s", "e"): 1})
    assert build_digraph("s", "e", [], set()).arcs == Counter()
    d = build_digraph("s", "e", ["m"], {("s", "m"), ("m", "m"), ("m", "e")})
    assert d.arcs[("m", "m")] == 1


def test_digraph_filters_adjacency():
    rng = random.Random(5)
    labels = ["s", "e", "a", "b", "c", "x"]
    for _ in range(100):
        adj = {(u, v) for u in labels for v in labels if rng.random() < 0.4}
        chosen = rng.sample(["a", "b", "c"], rng.randint(0, 3))
        d = build_digraph("s", "e", chosen, adj)
        keep = {"s", "e", *chosen}
        want = {(u, v) for u, v in adj if u in keep and v in keep and v != "s" and u != "e"}
        assert set(d.arcs) == want and all(c == 1 for c in d.arcs.values())
        assert set(d.vertices) == keep


# spanning trees


def kirchhoff(n: int, edges) -> int:
    lap = np.zeros((n, n))
    for a, b in edges:
        if a != b:
            lap[a, a] += 1
            lap[b, b] += 1
            lap[a, b] -= 1
            lap[b, a] -= 1
    return round(np.linalg.det(lap[1:, 1:])) if n > 1 else 1


def test_spanning_tree_examples():
    assert len(list(enumerate_spanning_trees([0, 1, 2], [(0, 1), (1, 2), (0, 2)]))) == 3
    assert list(enumerate_spanning_trees([0, 1, 2, 3], [(0, 1), (1, 2), (1, 3)])) == [(0, 1, 2)]
    k4 = list(itertools.combinations(range(4), 2))
    assert len(list(enumerate_spanning_trees(range(4), k4))) == 16 == kirchhoff(4, k4)
    assert list(enumerate_spanning_trees([0, 1, 2], [(0, 1)])) == []


def test_spanning_trees_match_matrix_tree_count():
    rng = random.Random(3)
    for _ in range(60):
        n = rng.randint(1, 6)
        edges = [(rng.randrange(n), rng.randrange(n)) for _ in range(rng.randint(0, 10))]
        trees = list(enumerate_spanning_trees(range(n), edges))
        assert len(trees) == len(set(trees)) == kirchhoff(n, edges)
        for t in trees:
            assert len(t) == n - 1
            assert len(union_find_components(n, [edges[i] for i in t])) == 1


# ILP


def test_ilp_examples():
    sys = IlpSystem(["a"], [0], [3])
    sys.add({0: 1}, 3, "length")
    assert ilp_feasible(sys) == [3]
    sys = IlpSystem(["a"], [0], [0])
    sys.add({0: 1}, 1, "start")
    sys.add({0: 1}, 0, "length")
    assert ilp_feasible(sys) is None


def test_ilp_planted_solutions():
    rng = random.Random(9)
    for _ in range(200):
        n = rng.randint(1, 6)
        x = [rng.randint(0, 3) for _ in range(n)]
        sys = IlpSystem(list(range(n)), [0] * n, [3] * n)
        for _ in range(rng.randint(1, 4)):
            coeffs = {j: rng.randint(-2, 2) for j in range(n)}
            sys.add(coeffs, sum(c * x[j] for j, c in coeffs.items()), "eq")
        got = ilp_feasible(sys)
        assert got is not None and sys.satisfied_by(got)


def test_ilp_infeasibility_is_exhaustive():
    rng = random.Random(10)
    for _ in range(200):
        n = rng.randint(1, 4)
        sys = IlpSystem(list(range(n)), [rng.randint(0, 1) for _ in range(n)], [2] * n)
        for _ in range(rng.randint(1, 3)):
            sys.add({j: rng.randint(-3, 3) for j in range(n)}, rng.randint(-4, 6), "eq")
        box = itertools.product(*(range(lo, hi + 1) for lo, hi in zip(sys.lower, sys.upper)))
        brute = any(sys.satisfied_by(list(p)) for p in box)
        got = ilp_feasible(sys)
        assert (got is not None) == brute
        assert got is None or sys.satisfied_by(got)


# Eulerian path


def test_eulerian_path_loop_used_twice():
    d = MultiDigraph()
    for a in [("s", "m"), ("m", "m"), ("m", "e")]:
        d.add_arc(*a)
    path = eulerian_path(d, {("s", "m"): 1, ("m", "m"): 2, ("m", "e"): 1}, "s")
    assert path == ["s", "m", "m", "m", "e"] and len(path) - 1 == 4


def test_eulerian_path_rejects_disconnected_flow():
    d = MultiDigraph()
    for a in [("s", "e"), ("a", "b"), ("b", "a")]:
        d.add_arc(*a)
    with pytest.raises(ValueError):
        eulerian_path(d, {("s", "e"): 1, ("a", "b"): 1, ("b", "a"): 1}, "s")


# solve_mcc_k


def check_yes(g: Graph, res) -> None:
    assert res.answer is Answer.YES and validate(g, res.witness)
    cat = component_catalog(g)
    placed = Counter()
    for comp in connected_components(g):
        sub, _ = g.induced(comp)
        placed[next(i for i, (rep, _) in enumerate(cat.classes) if iso_bruteforce(sub, rep))] += 1
    assert [placed[i] for i in range(len(cat.classes))] == list(cat.multiplicities())


def test_solve_examples():
    three = union(path_graph(2), path_graph(2), path_graph(2))
    check_yes(three, solve_mcc_k(three, 2, 3))
    c4s = union(cycle_graph(4), cycle_graph(4))
    check_yes(c4s, solve_mcc_k(c4s, 2, 4))
    assert solve_mcc_k(c4s, 2, 3).answer is Answer.NO
    assert brute_force_embed(c4s, 2, 4).answer is Answer.YES
    assert brute_force_embed(c4s, 2, 3).answer is Answer.NO


def test_two_block_stamping():
    g = union(path_graph(2), path_graph(2))
    run = SnapshotRun()
    res = solve_mcc_k(g, 2, 3, run=run)
    check_yes(g, res)
    assert run.p == 2 and len(run.flows) == 1 and sum(run.flows[0].x) == 1


def test_degenerate_paths():
    assert solve_mcc_k(Graph(0), 1, 1).answer is Answer.YES
    iso = Graph(5)
    assert solve_mcc_k(iso, 2, 3).answer is Answer.YES
    assert solve_mcc_k(iso, 2, 2).answer is Answer.NO
    assert solve_mcc_k(path_graph(3), 1, 3).stats["path"] == "single block"


def test_budget_gives_unknown():
    g = union(path_graph(2), path_graph(2), path_graph(2))
    assert solve_mcc_k(g, 3, 6, budget=5).answer is Answer.UNKNOWN


def corpus_instances():
    for g in connected_corpus(5):
        for k in (1, 2, 3):
            for r in range(1, 6):
                yield g, k, r


def test_connected_corpus_matches_oracle():
    flows = 0
    for g, k, r in corpus_instances():
        run = SnapshotRun()
        res = solve_mcc_k(g, k, r, run=run)
        assert res.answer is brute_force_embed(g, k, r).answer, (sorted(g.edges), k, r)
        if res.answer is Answer.YES:
            check_yes(g, res)
        for rec in run.flows:
            flows += 1
            assert all(audit_flow(rec).values())
    assert flows > 0


def test_disconnected_sample_matches_oracle():
    parts = list(connected_corpus(4))
    graphs = [union(a, b) for a, b in itertools.combinations_with_replacement(parts, 2) if a.n + b.n <= 5]
    graphs.append(union(path_graph(2), path_graph(2), Graph(1)))
    for g in graphs:
        for k in (1, 2, 3):
            for r in range(2, 7):
                run = SnapshotRun()
                res = solve_mcc_k(g, k, r, run=run)
                assert res.answer is brute_force_embed(g, k, r).answer, (sorted(g.edges), g.n, k, r)
                if res.answer is Answer.YES:
                    check_yes(g, res)
                assert all(all(audit_flow(rec).values()) for rec in run.flows)


def test_literal_counting_agrees_on_connected_graphs():
    for g, k, r in corpus_instances():
        if g.n >= 3:
            assert solve_mcc_k(g, k, r, counting="literal").answer is solve_mcc_k(g, k, r).answer


def test_literal_counting_misses_end_block_components():
    # two P2s in a 1×4 strip: the end block holds a whole P2 that the literal equation never counts
    g = union(path_graph(2), path_graph(2))
    assert solve_mcc_k(g, 1, 4).answer is Answer.YES
    assert solve_mcc_k(g, 1, 4, counting="literal").answer is Answer.NO
    with pytest.raises(ValueError):
        solve_mcc_k(g, 1, 4, counting="other")
