import itertools
import random

import pytest

from gridbed.embedding import GridEmbedding, distance_approximation, validate
from gridbed.graph import connected_components, grid_necessary_filter, is_connected, is_tree
from gridbed.oracle import Answer, brute_force_embed
from gridbed.reductions import (
    GADGET_COLS,
    GADGET_ROWS,
    LAYOUT,
    SIDES,
    BatteriesInstance,
    CnfFormula,
    assignment_to_placement,
    batteries_brute_force,
    column_placement,
    construct_3partition_witness,
    construct_batteries_witness,
    construct_naesat_witness,
    grid_frame,
    placement_check,
    placement_to_assignment,
    reduce_3partition,
    reduce_batteries_to_grid,
    reduce_naesat,
    reduce_sat_to_batteries,
    rectangle_graph,
    strip_pack,
    three_partition_brute_force,
)
from reference import bnb_pack, check_placements, pinned_milp, pinned_search

FIG_FORMULA = CnfFormula(2, ((-1, 2), (1, 2)))
NAE_FIG = CnfFormula(3, ((-1, -2, -3), (-1, 2, -3)))


def all_formulas(n, max_m, max_width=3):
    lits = [lit for v in range(1, n + 1) for lit in (v, -v)]
    clauses = [c for w in range(1, max_width + 1) for c in itertools.combinations(lits, w)]
    for m in range(1, max_m + 1):
        for cs in itertools.combinations_with_replacement(clauses, m):
            yield CnfFormula(n, cs)


def random_batteries(rng, m, n):
    return BatteriesInstance(m, n, tuple(tuple((rng.randint(0, 1), rng.randint(0, 1)) for _ in range(n))
                                         for _ in range(m)))


# ---------------------------------------------------------------- formulas and batteries

def test_formula_validation():
    with pytest.raises(ValueError):
        CnfFormula(2, ((),))
    with pytest.raises(ValueError):
        CnfFormula(2, ((3,),))
    f = CnfFormula(2, ((1, 2),), nae=True)
    assert list(f.solutions()) == [(False, True), (True, False)]


def test_reduce1_figure_instance():
    b = reduce_sat_to_batteries(FIG_FORMULA)
    assert b.battery(1, 1) == (1, 0) and b.battery(1, 2) == (0, 1)
    assert b.battery(2, 1) == (0, 1) and b.battery(2, 2) == (0, 1)


def test_reduce1_single_clause():
    assert reduce_sat_to_batteries(CnfFormula(1, ((1,),))).cells == (((0, 1),),)


def test_reduce1_cellwise_recheck():
    rng = random.Random(1)
    for _ in range(50):
        cs = tuple(tuple(rng.choice((1, -1)) * v for v in rng.sample((1, 2, 3), rng.randint(1, 3)))
                   for _ in range(rng.randint(1, 4)))
        pi = CnfFormula(3, cs)
        b = reduce_sat_to_batteries(pi)
        for i, c in enumerate(cs, 1):
            for j in range(1, 4):
                assert b.battery(i, j) == (int(j not in c), int(-j not in c))


def test_placement_check_figure():
    b = reduce_sat_to_batteries(FIG_FORMULA)
    chk = placement_check(b, column_placement("-+", 2))
    assert chk.correct and chk.safe
    assert placement_to_assignment(column_placement("-+", 2)) == (False, True)


def test_nonuniform_column_not_correct():
    b = BatteriesInstance(2, 1, (((0, 0),), ((0, 0),)))
    assert not placement_check(b, (("+",), ("-",))).correct


def test_all_ones_never_safe():
    b = BatteriesInstance(2, 3, tuple(tuple((1, 1) for _ in range(3)) for _ in range(2)))
    for signs in itertools.product("+-", repeat=3):
        assert not placement_check(b, column_placement(signs, 2)).safe
    assert batteries_brute_force(b).answer is Answer.NO


def test_brute_force_column_limit():
    b = BatteriesInstance(1, 3, (((0, 0),) * 3,))
    assert batteries_brute_force(b, max_cols=2).answer is Answer.UNKNOWN
    assert batteries_brute_force(b).answer is Answer.YES


def test_reduce1_equivalence_small():
    for n in (1, 2):
        for pi in all_formulas(n, 3):
            assert pi.is_satisfiable() == (batteries_brute_force(reduce_sat_to_batteries(pi)).answer is Answer.YES)


def test_placement_assignment_roundtrip():
    for pi in itertools.islice(all_formulas(2, 2), 40):
        for alpha in pi.solutions():
            p = assignment_to_placement(alpha, pi.m)
            b = reduce_sat_to_batteries(pi)
            assert placement_check(b, p) == (True, True)
            assert placement_to_assignment(p) == alpha


# ---------------------------------------------------------------- grid frame

def frame_by_definition(m, n):
    rows, cols = 12 * m + 5, 8 * n + 5
    top = {(r, c) for r in range(3) for c in range(cols)}
    bottom = {(r, c) for r in range(rows - 3, rows) for c in range(cols)}
    left = {(r, c) for r in range(rows) for c in range(3)}
    right = {(r, c) for r in range(rows) for c in range(cols - 3, cols)}
    return top | bottom | left | right


@pytest.mark.parametrize("m,n", [(1, 1), (1, 2), (2, 1), (2, 3)])
def test_frame_matches_definition(m, n):
    fr = grid_frame(m, n)
    cells = frame_by_definition(m, n)
    assert set(fr.coords) == cells
    expected_edges = sum(1 for (r, c) in cells for nb in ((r + 1, c), (r, c + 1)) if nb in cells)
    assert fr.graph.m == expected_edges
    assert fr.graph.max_degree <= 4 and is_connected(fr.graph)
    assert max(c for _, c in fr.coords) == 8 * n + 4
    assert validate(fr.graph, fr.embedding())


def test_frame_is_rigid():
    # pinning three corners of a 1x1 frame leaves exactly one embedding
    fr = grid_frame(1, 1)
    idx = {c: i for i, c in enumerate(fr.coords)}
    k, r = 17, 13
    pins = {idx[(0, 0)]: (1, 1), idx[(0, r - 1)]: (1, r), idx[(k - 1, 0)]: (k, 1)}
    found = pinned_search(fr.graph, k, r, pins, limit=2)
    assert len(found) == 1
    assert all(found[0][v] == (a + 1, b + 1) for v, (a, b) in enumerate(fr.coords))


# ---------------------------------------------------------------- reduce2 and gadgets

def test_layout_tables():
    assert len(LAYOUT.rectangle()) == 2 * (GADGET_ROWS + GADGET_COLS) - 4
    for kind, size in (("P", 14), ("N", 9)):
        for top in (True, False):
            cells = LAYOUT.side_cells[(kind, top)]
            assert len(cells) == size and len(set(cells)) == size
            inside = all(0 < r < GADGET_ROWS - 1 and 0 < c < GADGET_COLS - 1 for r, c in cells)
            assert inside
            half = all(r < LAYOUT.midline for r, _ in cells) if top else all(r > LAYOUT.midline for r, _ in cells)
            assert half
    assert len(set(LAYOUT.voltage_cells.values())) == 4


def test_reduce2_vertex_count_1x1():
    for cell, extra in (((0, 0), 0), ((1, 0), 1), ((1, 1), 2)):
        b = BatteriesInstance(1, 1, ((cell,),))
        red = reduce_batteries_to_grid(b)
        rigid = len(red.rigid)
        # P side, N side, four claws of three vertices, two wires, no sync rows
        assert red.graph.n == rigid + 14 + 9 + 12 + 2 + extra
        assert (red.k, red.r) == (17, 13)


def test_reduce2_figure_instance_structure():
    b = reduce_sat_to_batteries(FIG_FORMULA)
    red = reduce_batteries_to_grid(b)
    labels = set(red.labels)
    # voltage pendants follow the batteries
    assert "gadget:(1,1):VP" in labels and "gadget:(1,1):VN" not in labels
    assert "gadget:(1,2):VN" in labels and "gadget:(2,2):VN" in labels
    assert sum(1 for s in labels if s.startswith("sync:")) == 3 * 2
    assert sum(1 for s in labels if s.startswith("wire:")) == 2 * 3
    assert red.graph.max_degree <= 4 and is_connected(red.graph)
    assert grid_necessary_filter(red.graph)


def test_reduce2_output_passes_filter():
    rng = random.Random(2)
    for _ in range(20):
        b = random_batteries(rng, rng.randint(1, 3), rng.randint(1, 3))
        g = reduce_batteries_to_grid(b).graph
        assert grid_necessary_filter(g) and g.max_degree <= 4


def test_batteries_witness_figure():
    b = reduce_sat_to_batteries(FIG_FORMULA)
    f = construct_batteries_witness(b, column_placement("-+", 2))
    red = reduce_batteries_to_grid(b)
    assert validate(red.graph, f)
    assert distance_approximation(red.graph, f).a_f <= 234


def test_batteries_witness_trivial():
    b = BatteriesInstance(1, 1, (((0, 0),),))
    f = construct_batteries_witness(b, (("+",),))
    assert validate(reduce_batteries_to_grid(b).graph, f)


def test_batteries_witness_rejects_bad_placement():
    b = BatteriesInstance(1, 1, (((1, 1),),))
    with pytest.raises(ValueError):
        construct_batteries_witness(b, (("+",),))


def test_batteries_witness_random():
    rng = random.Random(3)
    made = 0
    for _ in range(60):
        b = random_batteries(rng, rng.randint(1, 3), rng.randint(1, 3))
        res = batteries_brute_force(b)
        if res.answer is not Answer.YES:
            continue
        red = reduce_batteries_to_grid(b)
        f = construct_batteries_witness(b, res.placement)
        assert validate(red.graph, f)
        if b.rows * b.cols <= 4:
            assert distance_approximation(red.graph, f).a_f <= 234
        made += 1
    assert made > 15


def _gadget_embeds(b):
    red = reduce_batteries_to_grid(b)
    pins = {v: (a + 1, c + 1) for v, (a, c) in red.rigid.items()}
    pos = pinned_milp(red.graph, red.k, red.r, pins)
    if pos is not None:
        assert validate(red.graph, GridEmbedding(red.k, red.r, pos))
    return pos is not None


BATTERY_VALUES = ((0, 0), (0, 1), (1, 0), (1, 1))


@pytest.mark.parametrize("cell", BATTERY_VALUES)
def test_gadget_reverse_direction_1x1(cell):
    b = BatteriesInstance(1, 1, ((cell,),))
    assert _gadget_embeds(b) == (cell != (1, 1))


@pytest.mark.parametrize("cells", list(itertools.product(BATTERY_VALUES, repeat=2)))
def test_gadget_reverse_direction_1x2(cells):
    # with the rigid lattice pinned, G_B embeds exactly when B is a yes-instance
    b = BatteriesInstance(1, 2, (tuple(cells),))
    assert _gadget_embeds(b) == (batteries_brute_force(b).answer is Answer.YES)


@pytest.mark.parametrize("column", list(itertools.product(BATTERY_VALUES, repeat=2)))
def test_gadget_reverse_direction_2x1(column):
    # vertically adjacent gadgets must agree on the sign
    b = BatteriesInstance(2, 1, tuple((c,) for c in column))
    assert _gadget_embeds(b) == (batteries_brute_force(b).answer is Answer.YES)


def test_side_cell_sets_are_forced():
    # with the side root in a half, every canonical cell holds a vertex of that side
    b = BatteriesInstance(1, 1, (((0, 0),),))
    red = reduce_batteries_to_grid(b)
    rigid = {v: (a + 1, c + 1) for v, (a, c) in red.rigid.items()}
    for kind in "PN":
        side = [red.index[f"gadget:(1,1):{kind}:{t + 1}"] for t in range(len(SIDES[kind]))]
        for top in (True, False):
            table = LAYOUT.side_cells[(kind, top)]
            pins = {**rigid, side[0]: (table[0][0] + 3, table[0][1] + 3)}
            assert pinned_milp(red.graph, red.k, red.r, pins) is not None
            for a, c in table[1:]:
                forbid = {v: {(a + 3, c + 3)} for v in side[1:]}
                assert pinned_milp(red.graph, red.k, red.r, pins, forbid=forbid) is None, (kind, top, (a, c))


# ---------------------------------------------------------------- 3-partition

def test_three_partition_normalization():
    red = reduce_3partition([5, 5, 5])
    assert red.weights == (20, 20, 20) and red.target == 15 + 45
    assert red.r == red.target + 4 and red.k == 3


def test_three_partition_container_size():
    red = reduce_3partition([5, 5, 5])
    containers = sum(1 for s in red.labels if s[0] in "cs")
    assert containers == 2 * (red.target + 4)
    assert red.graph.n == containers + sum(red.weights)
    assert len(connected_components(red.graph)) == 1 + 3


def test_three_partition_errors():
    with pytest.raises(ValueError):
        reduce_3partition([1, 2])
    with pytest.raises(ValueError):
        reduce_3partition([1, 1, 1, 1, 1, 2])
    with pytest.raises(ValueError):
        reduce_3partition([1, 2, 3], normalize=False)
    with pytest.raises(ValueError):
        construct_3partition_witness([5, 5, 5, 4, 5, 6], [(0, 1, 3), (2, 4, 5)])


def test_three_partition_witnesses():
    construct_3partition_witness([5, 5, 5], [(0, 1, 2)])
    rng = random.Random(4)
    made = 0
    for _ in range(60):
        m = rng.randint(1, 3)
        w = [rng.randint(1, 9) for _ in range(3 * m)]
        part = three_partition_brute_force(w)
        if part is None:
            continue
        red = reduce_3partition(w)
        assert validate(red.graph, construct_3partition_witness(w, part))
        made += 1
    assert made > 10


def test_three_partition_brute_force_small():
    assert three_partition_brute_force([1, 2, 3, 2, 2, 2]) is not None
    assert three_partition_brute_force([1, 1, 5, 2, 2, 1]) is None


@pytest.mark.parametrize("w", [(3, 3, 3), (3, 3, 4, 3, 3, 4), (3, 3, 3, 3, 3, 3)])
def test_three_partition_yes_found_by_grid_solver(w):
    # the smallest no-instance has 76 vertices and is out of reach for exhaustive search
    assert three_partition_brute_force(w) is not None
    red = reduce_3partition(w, normalize=False)
    res = brute_force_embed(red.graph, red.k, red.r, budget=2_000_000)
    assert res.yes and validate(red.graph, res.witness)


# ---------------------------------------------------------------- NAE-SAT

def test_nae_figure_instance():
    red = reduce_naesat(NAE_FIG)
    assert is_tree(red.graph) and red.graph.max_degree <= 4 and grid_necessary_filter(red.graph)
    labels = red.labels
    for i in range(5):
        assert sum(1 for s in labels if s.startswith(f"v:{i}:")) == 5
    # boundary caterpillars carry two leaves on every inner level
    assert sum(1 for s in labels if s.startswith("u:0:")) == 8
    # x1 appears negated in both clauses: its positive path gets leaves on both odd levels
    assert sum(1 for s in labels if s.startswith("u:1:") and int(s.split(":")[2]) % 2) == 2
    assert sum(1 for s in labels if s.startswith("ubar:1:") and int(s.split(":")[2]) % 2) == 0
    f = construct_naesat_witness(NAE_FIG, (True, False, False))
    assert validate(red.graph, f) and (f.k, f.r) == (red.k, red.r)


def test_nae_single_variable_counts():
    pi = CnfFormula(1, ((1,),))
    red = reduce_naesat(pi)
    n, m = 1, 1
    base = 2 * (n + 2) - 1
    paths = 2 * (n + 2) * (2 * m + 1)
    boundary_leaves = 2 * 2 * (2 * m) * 2
    odd = 1  # the negated path of x1 misses the clause
    even = 0  # even leaves only on caterpillars 1..n-1
    stars = 2 * 5
    assert red.graph.n == base + paths + boundary_leaves + odd + even + stars


def test_nae_rejects_non_nae_assignment():
    with pytest.raises(ValueError):
        construct_naesat_witness(NAE_FIG, (True, True, True))


def test_nae_positive_clause_mixed_assignment():
    pi = CnfFormula(3, ((1, 2, 3),))
    f = construct_naesat_witness(pi, (True, False, True))
    assert validate(reduce_naesat(pi).graph, f)


def test_nae_exhaustive_two_variables():
    count = 0
    for n in (1, 2):
        for pi in all_formulas(n, 2):
            red = reduce_naesat(pi)
            assert is_tree(red.graph) and red.graph.max_degree <= 4
            for alpha in CnfFormula(n, pi.clauses, nae=True).solutions():
                assert validate(red.graph, construct_naesat_witness(pi, alpha))
                count += 1
    assert count > 100


# ---------------------------------------------------------------- strip packing

def test_rectangle_graph():
    g = rectangle_graph(2, 3)
    assert g.n == 6 and g.m == 7


def test_strip_two_squares():
    res = strip_pack([(2, 2), (2, 2)], 2, 4)
    assert res.yes
    check_placements([(2, 2), (2, 2)], 2, 4, res.stats["placements"])


def test_strip_area_no():
    assert strip_pack([(2, 2), (2, 3)], 2, 4).answer is Answer.NO


def test_strip_unit_dimension_scaling():
    rects = [(1, 3), (1, 3), (2, 1)]
    res = strip_pack(rects, 2, 4)
    assert res.yes and res.stats["scale"] == 2
    check_placements(rects, 2, 4, res.stats["placements"])


def test_strip_full_area_no_instance():
    # area equals the strip, but the two 2x3 blocks leave no room for the 1x3 bar
    res = strip_pack([(3, 1), (3, 2), (3, 2), (1, 1)], 2, 8, budget=None)
    assert res.answer is Answer.NO


@pytest.mark.parametrize("method", ["components", "generic"])
def test_strip_random_against_bnb(method):
    rng = random.Random(5)
    agree = 0
    for _ in range(25):
        k, width = rng.randint(1, 3), rng.randint(2, 4)
        rects = [(rng.randint(1, 2), rng.randint(1, 3)) for _ in range(rng.randint(1, 3))]
        res = strip_pack(rects, k, width, budget=2_000_000, method=method)
        if res.answer is Answer.UNKNOWN:
            continue
        assert res.yes == bnb_pack(rects, k, width), (rects, k, width)
        if res.yes:
            check_placements(rects, k, width, res.stats["placements"])
        agree += 1
    assert agree >= 20
