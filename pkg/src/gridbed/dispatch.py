"""Solver selection: route an instance to the cheapest applicable exact method."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .distance import solve_distance_fpt
from .embedding import distance_approximation, validate
from .graph import Graph, is_connected, is_tree
from .oracle import DEFAULT_BUDGET, Answer, SolveResult, _quick_no, brute_force_embed
from .snapshot import solve_mcc_k
from .tree import FULL_CONSTANTS, TreeConstants, solve_tree

ALGORITHMS = ("auto", "brute", "snapshot", "dp", "tree")
BUDGET_ENV = "GRIDBED_BUDGET"


def default_budget() -> int:
    """``GRIDBED_BUDGET`` when set, else the library default."""
    raw = os.environ.get(BUDGET_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_BUDGET
    try:
        val = int(raw)
    except ValueError:
        raise ValueError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None
    if val < 1:
        raise ValueError(f"{BUDGET_ENV} must be positive")
    return val


@dataclass
class Dispatch:
    result: SolveResult
    algorithm: str
    attempts: list[tuple[str, str]] = field(default_factory=list)
    a_f: int | None = None

    @property
    def answer(self) -> Answer:
        return self.result.answer


def plan(g: Graph, algo: str) -> list[str]:
    """Solvers to try in order; explicit choices must be applicable."""
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
    connected = is_connected(g)
    if algo == "tree" and not is_tree(g):
        raise ValueError("the tree solver needs a tree")
    if algo == "dp" and not connected:
        raise ValueError("the distance solver needs a connected graph")
    if algo != "auto":
        return [algo]
    if is_tree(g):
        return ["tree", "dp", "brute"]
    if not connected:
        return ["snapshot", "brute"]
    return ["dp", "brute"]


def _run(name: str, g: Graph, k: int, r: int, budget: int | None, constants: TreeConstants) -> SolveResult:
    if name == "brute":
        return brute_force_embed(g, k, r, budget=budget)
    if name == "snapshot":
        return solve_mcc_k(g, k, r, budget=budget)
    if name == "dp":
        return solve_distance_fpt(g, k, r, budget=budget)
    return solve_tree(g, k, r, budget=budget, constants=constants)


def solve_dispatch(g: Graph, k: int, r: int, algo: str = "auto", budget: int | None = None,
                   constants: TreeConstants = FULL_CONSTANTS) -> Dispatch:
    """Run the planned solvers until one decides; each gets the full node budget."""
    if k < 1 or r < 1:
        raise ValueError("k and r must be positive")
    budget = default_budget() if budget is None else budget
    order = plan(g, algo)
    if g.n:
        reason = _quick_no(g, k, r)
        if reason:
            return Dispatch(SolveResult(Answer.NO, None, {"reason": reason, "nodes": 0}), "filter",
                            [("filter", "no")])
    attempts: list[tuple[str, str]] = []
    res = SolveResult(Answer.UNKNOWN)
    used = order[-1]
    for name in order:
        res = _run(name, g, k, r, budget, constants)
        attempts.append((name, res.answer.value))
        used = name
        if res.answer in (Answer.YES, Answer.NO):
            break
    a_f = None
    if res.yes:
        chk = validate(g, res.witness)
        if not chk:
            raise AssertionError(f"{used} produced an invalid witness: {chk.reason}")
        if is_connected(g):
            a_f = distance_approximation(g, res.witness).a_f
    return Dispatch(res, used, attempts, a_f)
