import itertools
import random

import pytest

from gridbed.embedding import (
    Direction,
    GridEmbedding,
    distance_approximation,
    is_subgrid,
    path_direction_profile,
    validate,
)
from gridbed.graph import Graph, cycle_graph, distances_from, path_graph
from gridbed.oracle import Answer, NodeCounter, brute_force_embed, iter_embeddings
from gridbed.tree import (
    DIRECTION_PAIRS,
    FULL_CONSTANTS,
    REDUCED_CONSTANTS,
    SplitKind,
    SweepSpec,
    classify_splits,
    directional_sweep_embed,
    enumerate_environments,
    find_pt_path,
    make_pt_path,
    solve_tree,
    sweep_witnesses,
)
from reference import random_tree, union_find_components

UP, DOWN, LEFT, RIGHT = Direction.UP, Direction.DOWN, Direction.LEFT, Direction.RIGHT


def spider(legs, length):
    edges, n = [], 1
    for _ in range(legs):
        prev = 0
        for _ in range(length):
            edges.append((prev, n))
            prev, n = n, n + 1
    return Graph.from_edges(n, edges)


def caterpillar(spine, leaves_at):
    edges = [(i, i + 1) for i in range(spine - 1)]
    n = spine
    for v in leaves_at:
        edges.append((v, n))
        n += 1
    return Graph.from_edges(n, edges)


def removal_counts(t, v, threshold):
    comps = union_find_components(t.n, [(a, b) for a, b in t.edges if v not in (a, b)])
    return sum(1 for c in comps if v not in c and len(c) >= threshold)


# ---------------------------------------------------------------- classify_splits

def test_spider_three_legs_one_split():
    c = classify_splits(spider(3, 5), 3)
    assert c.kind is SplitKind.ONE and c.vertices == (0,)


def test_plus_double_split():
    c = classify_splits(spider(4, 5), 3)
    assert c.kind is SplitKind.DOUBLE and c.vertices == (0,)


def test_two_one_splits():
    # two spider centres joined by a path, two legs each
    edges = [(0, 1), (1, 2), (2, 3)] + [(0, 4), (4, 5), (0, 6), (6, 7), (3, 8), (8, 9), (3, 10), (10, 11)]
    c = classify_splits(Graph.from_edges(12, edges), 2)
    assert c.kind is SplitKind.TWO_ONE and set(c.vertices) == {0, 3}


def test_excess_reported():
    # three spiders in a row
    edges = [(0, 1), (1, 2)]
    n = 3
    for centre in (0, 1, 2):
        for _ in range(2):
            edges.append((centre, n))
            n += 1
    c = classify_splits(Graph.from_edges(n, edges), 1)
    assert c.kind is SplitKind.EXCESS and len(c.split_vertices) == 3


def test_no_split_on_path():
    assert classify_splits(path_graph(9), 2).kind is SplitKind.NONE


def test_classify_rejects_non_tree():
    with pytest.raises(ValueError):
        classify_splits(cycle_graph(4), 1)


def test_counts_match_removal_oracle():
    rng = random.Random(11)
    for _ in range(60):
        t = random_tree(rng, rng.randint(2, 16))
        th = rng.randint(1, 4)
        c = classify_splits(t, th)
        for v in range(t.n):
            assert c.large[v] == removal_counts(t, v, th)
            assert c.components[v] == t.degree(v)


# ---------------------------------------------------------------- find_pt_path

def test_pt_path_on_long_path_is_central():
    p = find_pt_path(path_graph(20), 1)
    assert p.path == tuple(range(1, 19))
    assert p.coverage(path_graph(20)) <= 1


def test_pt_path_on_caterpillar_is_spine():
    t = caterpillar(8, [0, 2, 3, 5, 7, 7])
    p = find_pt_path(t, 1)
    assert set(p.path) == set(range(8))


def test_pt_path_small_tree_single_vertex():
    p = find_pt_path(spider(3, 1), 5)
    assert p.path == (0,)


def test_pt_path_coverage_and_ties_on_random_trees():
    rng = random.Random(12)
    found = 0
    for _ in range(150):
        t = random_tree(rng, rng.randint(1, 18))
        th = rng.randint(1, 4)
        p = find_pt_path(t, th)
        if classify_splits(t, th).kind is SplitKind.NONE:
            assert p is not None
        if p is None:
            continue
        found += 1
        dist = [distances_from(t, s) for s in range(t.n)]
        index = {v: i for i, v in enumerate(p.path)}
        for u in range(t.n):
            best = min(dist[u][v] for v in p.path)
            assert best <= th
            assert dist[u][p.pc[u]] == best
            assert index[p.pc[u]] == min(index[v] for v in p.path if dist[u][v] == best)
        for a, b in zip(p.path, p.path[1:]):
            assert t.has_edge(a, b)
    assert found > 50


# ---------------------------------------------------------------- directional sweep

def test_sweep_vertical_path():
    P = make_pt_path(path_graph(10), range(10), 0)
    res = directional_sweep_embed(path_graph(10), P, SweepSpec(frozenset({UP}), 0, 10, 1))
    assert res.answer is Answer.YES
    assert [res.witness[v] for v in range(10)] == [(i + 1, 1) for i in range(10)]
    res = directional_sweep_embed(path_graph(10), P, SweepSpec(frozenset({UP}), 0, 5, 1))
    assert res.answer is Answer.NO


def test_sweep_budget_exhaustion_is_unknown():
    t = caterpillar(6, [0, 1, 2, 3, 4, 5])
    P = make_pt_path(t, range(6), 1)
    res = directional_sweep_embed(t, P, SweepSpec(DIRECTION_PAIRS[0], 3, 4, 4), budget=5)
    assert res.answer is Answer.UNKNOWN


def test_sweep_spec_checks():
    with pytest.raises(ValueError):
        SweepSpec(frozenset({UP, DOWN}), 0, 3, 3)
    with pytest.raises(ValueError):
        SweepSpec(frozenset({UP}), -1, 3, 3)


def _wrong(f, path, dirs):
    prof = path_direction_profile(f, path)._asdict()
    return sum(c for name, c in prof.items() if Direction(name) not in dirs)


@pytest.mark.parametrize("seed", range(4))
def test_sweep_matches_filtered_oracle(seed):
    rng = random.Random(100 + seed)
    for _ in range(12):
        spine = rng.randint(2, 5)
        t = caterpillar(spine, [rng.randrange(spine) for _ in range(rng.randint(0, 3))])
        if t.max_degree > 4:
            continue
        P = make_pt_path(t, range(spine), 1)
        k, r = rng.randint(1, 4), rng.randint(1, 4)
        dirs = rng.choice(DIRECTION_PAIRS + (frozenset({UP}), frozenset({RIGHT})))
        budget = rng.randint(0, 2)
        expected = any(_wrong(f, P.path, dirs) <= budget for f in iter_embeddings(t, k, r))
        res = directional_sweep_embed(t, P, SweepSpec(dirs, budget, k, r, retain=rng.randint(1, 3)))
        assert (res.answer is Answer.YES) == expected, (t.edges, k, r, dirs, budget)
        if res.answer is Answer.YES:
            assert validate(t, res.witness)
            assert _wrong(res.witness, P.path, dirs) <= budget


def test_sweep_respects_environment_window():
    # u=0 fixed in the middle of a 3x3 window together with its four neighbours
    t = spider(4, 3)
    env = GridEmbedding(3, 3, {0: (2, 2), 1: (3, 2), 4: (2, 3), 7: (1, 2), 10: (2, 1)})
    branch = [1, 2, 3]
    keep = sorted(set(branch) | set(env.pos))
    sub, old = t.induced(keep)
    new = {v: i for i, v in enumerate(old)}
    P = make_pt_path(sub, [new[v] for v in branch], 1, {new[v] for v in branch})
    sub_env = GridEmbedding(3, 3, {new[v]: c for v, c in env.pos.items()})
    res = directional_sweep_embed(sub, P, SweepSpec(frozenset({UP}), 0, 5, 3, sub_env))
    assert res.answer is Answer.YES
    assert is_subgrid(sub_env, res.witness)
    outs = list(sweep_witnesses(res))
    assert outs and all(pos[new[0]] == (2, 2) for _, pos in outs)
    # going down runs straight into the reserved window
    res = directional_sweep_embed(sub, P, SweepSpec(frozenset({DOWN}), 0, 9, 9, sub_env))
    assert res.answer is Answer.NO


def test_environment_enumeration_covers_real_windows():
    t = spider(4, 2)
    envs = list(enumerate_environments(t, 0, 3, 2, NodeCounter(None)))
    keys = {tuple(sorted(e.pos.items())) for e in envs}
    assert len(keys) == len(envs)
    for e in envs:
        sub, old = t.induced(sorted(e.pos))
        assert validate(sub, e.relabel({v: i for i, v in enumerate(old)}))
        assert e.pos[0] == (2, 2)
    real = set()
    for f in iter_embeddings(t, 5, 5):
        cr, cc = f[0]
        if (cr, cc) != (3, 3):
            continue
        window = {v: (a - cr + 2, b - cc + 2) for v, (a, b) in f.pos.items() if abs(a - cr) <= 1 and abs(b - cc) <= 1}
        real.add(tuple(sorted(window.items())))
    assert real and real <= keys
    assert len(list(enumerate_environments(t, 0, 1, 1, NodeCounter(None)))) == 1


# ---------------------------------------------------------------- solve_tree

def test_path_in_three_by_four():
    res = solve_tree(path_graph(12), 3, 4, constants=REDUCED_CONSTANTS)
    assert res.answer is Answer.YES and validate(path_graph(12), res.witness)
    assert brute_force_embed(path_graph(12), 3, 4).yes


def test_plus_shape_double_split():
    t = spider(4, 3)
    res = solve_tree(t, 7, 7, constants=REDUCED_CONSTANTS)
    assert res.answer is Answer.YES and validate(t, res.witness)
    assert "double-split" in res.stats["cases"]
    assert brute_force_embed(t, 7, 7).yes


def test_two_one_splits_solved():
    edges = [(0, 1), (1, 2), (2, 3)] + [(0, 4), (4, 5), (0, 6), (6, 7), (3, 8), (8, 9), (3, 10), (10, 11)]
    t = Graph.from_edges(12, edges)
    res = solve_tree(t, 5, 6, constants=REDUCED_CONSTANTS)
    assert res.answer is Answer.YES and validate(t, res.witness)
    assert "two-one-splits" in res.stats["cases"]


def test_five_leg_spider_is_no():
    t = spider(5, 5)
    for k, r in [(5, 5), (11, 11), (3, 30)]:
        res = solve_tree(t, k, r, constants=REDUCED_CONSTANTS)
        assert res.answer is Answer.NO
        assert brute_force_embed(t, k, r).no


def test_full_constants_small_instances():
    res = solve_tree(path_graph(6), 2, 3)
    assert res.answer is Answer.YES
    assert solve_tree(path_graph(7), 2, 3).answer is Answer.NO


def test_solve_tree_rejects_non_tree():
    with pytest.raises(ValueError):
        solve_tree(cycle_graph(4), 2, 2)


def test_solve_tree_budget_unknown():
    t = spider(4, 3)
    assert solve_tree(t, 7, 7, budget=3, constants=REDUCED_CONSTANTS).answer is Answer.UNKNOWN


def test_solve_tree_sound_and_exhaustive_on_random_trees():
    rng = random.Random(21)
    seen = {"yes": 0, "no": 0}
    for _ in range(80):
        t = random_tree(rng, rng.randint(1, 12))
        k, r = rng.randint(1, 5), rng.randint(1, 5)
        res = solve_tree(t, k, r, budget=500_000, constants=REDUCED_CONSTANTS)
        truth = brute_force_embed(t, k, r)
        if res.answer is Answer.YES:
            assert validate(t, res.witness) and truth.yes
        if res.answer is Answer.NO:
            assert truth.no
        if res.answer.value in seen:
            seen[res.answer.value] += 1
    assert seen["yes"] > 10 and seen["no"] > 10


# ---------------------------------------------------------------- structural invariants

def _small_tree_embeddings(seed, count):
    rng = random.Random(seed)
    for _ in range(count):
        t = random_tree(rng, rng.randint(3, 9))
        k, r = rng.randint(2, 4), rng.randint(2, 4)
        for i, f in enumerate(iter_embeddings(t, k, r, symmetry=True, budget=100_000)):
            if i >= 3:
                break
            yield t, f


def test_split_vertex_bound_on_oracle_embeddings():
    n = 0
    for t, f in _small_tree_embeddings(31, 120):
        a = distance_approximation(t, f).a_f
        c = classify_splits(t, 81 * a * a)
        assert c.kind is not SplitKind.EXCESS
        n += 1
    assert n > 50


def test_direction_budget_on_oracle_embeddings():
    from gridbed.tree import _tree_path
    n = 0
    for t, f in _small_tree_embeddings(32, 80):
        a = distance_approximation(t, f).a_f
        for s, e in itertools.permutations(range(t.n), 2):
            prof = path_direction_profile(f, _tree_path(t, s, e))
            assert min(prof.up, prof.down) <= a + 1
            assert min(prof.left, prof.right) <= a + 1
        n += 1
    assert n > 30


def test_constants_are_configurable():
    assert FULL_CONSTANTS.threshold(1) == 81 and FULL_CONSTANTS.window(1) == 367
    assert FULL_CONSTANTS.radius(1) == 368 and FULL_CONSTANTS.retain(1) == 6
    assert FULL_CONSTANTS.budget(2) == 8
    assert REDUCED_CONSTANTS.threshold(2) == 4
