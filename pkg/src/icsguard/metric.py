"""Cheapest-disruption metric over protected dependency graphs.

The question answered here: what is the least cost an attacker pays to
stop the target, when stopping an atomic node requires both attacking the
node and overcoming every protective measure instance covering it?

The pipeline: build the target's operability formula, widen each atomic
variable with its covering measure instances, negate, translate to CNF,
and hand the falsification costs to the exact weighted MaxSAT engine.
Decoding then reads a concrete attack back out of the optimum model.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

from .errors import AnalysisError
from .formulas import build_formula, evaluate, expand_formula, tseitin_cnf, Not
from .maxsat import InconsistentOptimum, OptimumResult, WeightedInstance, solve_wpmaxsat
from .model import Cost, DependencyGraph, Model, ZERO_COST


class TargetIndestructible(AnalysisError):
    """No attack of finite cost can disrupt the target."""


@dataclass(frozen=True)
class Solution:
    """A cheapest disruption: which atoms to attack, which measure
    instances that forces the attacker through, and the price of each."""

    atoms: tuple[str, ...]
    instances: tuple[str, ...]
    atom_cost: Cost
    instance_cost: Cost
    total_cost: Cost
    cnf_vars: int
    cnf_clauses: int
    sat_calls: int
    cores: int
    encode_ms: float = 0.0
    solve_ms: float = 0.0

    def summary(self) -> str:
        atoms = ", ".join(self.atoms) if self.atoms else "(none)"
        insts = ", ".join(self.instances) if self.instances else "(none)"
        return (
            f"cost {self.total_cost.to_display()}"
            f" = atoms {self.atom_cost.to_display()} [{atoms}]"
            f" + instances {self.instance_cost.to_display()} [{insts}]"
        )


def _is_disrupted(root, atom_ids: frozenset[str], attacked: set[str]) -> bool:
    """The target stops exactly when its operability formula goes false."""
    return not evaluate(root, atom_ids - attacked)


def _encode(model: Model):
    """Negated widened operability formula as a weighted CNF.

    Soft clause weights are the falsification costs in thousandths; an
    infinite cost becomes a hard unit keeping the variable true.
    """
    plain = build_formula(model)
    widened = expand_formula(plain, model)
    cnf = tseitin_cnf(Not(widened))

    atom_ids = frozenset(model.graph.atomic_ids())
    hard: list[list[int]] = [list(c) for c in cnf.clauses]
    soft: list[tuple[int, int]] = []
    for token in cnf.tokens:
        cost = (
            model.node_cost(token)
            if token in atom_ids
            else model.measure_by_id(token).cost
        )
        var = cnf.index_of[token]
        if cost.millis is None:
            hard.append([var])  # beyond any budget: never falsified
        elif cost.millis:
            soft.append((var, cost.millis))

    instance = WeightedInstance(
        num_vars=cnf.num_vars,
        hard=tuple(tuple(c) for c in hard),
        soft=tuple(soft),
    )
    return plain, cnf, atom_ids, instance


def build_wcnf(model: Model) -> tuple[WeightedInstance, tuple[str, ...]]:
    """Weighted CNF whose optimum cost equals the cheapest disruption.

    Returns the instance and the token each leading variable stands for:
    variable i+1 is tokens[i]; auxiliary variables follow unnamed.
    """
    _, cnf, _, instance = _encode(model)
    return instance, cnf.tokens


def compute_metric(model: Model, deadline: float | None = None) -> Solution:
    """Exact minimum disruption cost for the model's target.

    Raises TargetIndestructible when even unbounded spending cannot stop
    the target, and SolveTimeout past the deadline.
    """

    started = time.perf_counter()
    plain, cnf, atom_ids, instance = _encode(model)
    encoded = time.perf_counter()
    best = solve_wpmaxsat(instance, deadline=deadline)
    solved = time.perf_counter()
    if best is None:
        raise TargetIndestructible(
            f"target {model.target!r} cannot be disrupted at finite cost"
        )

    solution = _decode(
        model, plain, cnf, best, atom_ids,
        encode_ms=(encoded - started) * 1000.0,
        solve_ms=(solved - encoded) * 1000.0,
    )
    problems = solution_problems(model, solution)
    if problems:
        raise InconsistentOptimum("; ".join(problems))
    return solution


def _decode(
    model: Model,
    plain,
    cnf,
    best: OptimumResult,
    atom_ids: frozenset[str],
    encode_ms: float,
    solve_ms: float,
) -> Solution:
    """Read a minimal attack out of the optimum assignment.

    Zero-cost variables are free for the solver to falsify, so the raw
    model may contain gratuitous attacks; keep only atoms whose whole
    protected group is down, then prune to an inclusion-minimal set.
    """

    present = set(cnf.tokens)

    def falsified(token: str) -> bool:
        return token in present and not best.is_true(cnf.index_of[token])

    attacked = [
        n for n in model.graph.node_ids()
        if n in atom_ids
        and falsified(n)
        and all(falsified(s.id) for s in model.instances_protecting(n))
    ]

    chosen = set(attacked)
    if not _is_disrupted(plain, atom_ids, chosen):
        raise InconsistentOptimum("optimum model does not disrupt the target")
    changed = True
    while changed:
        changed = False
        for n in list(attacked):
            if n not in chosen:
                continue
            chosen.discard(n)
            if _is_disrupted(plain, atom_ids, chosen):
                changed = True
            else:
                chosen.add(n)

    atoms = tuple(n for n in model.graph.node_ids() if n in chosen)
    seen: set[str] = set()
    instances: list[str] = []
    for inst in model.measures:
        if inst.id in seen:
            continue
        if any(n in chosen for n in inst.range):
            seen.add(inst.id)
            instances.append(inst.id)

    atom_cost = sum((model.node_cost(n) for n in atoms), ZERO_COST)
    instance_cost = sum(
        (model.measure_by_id(s).cost for s in instances), ZERO_COST
    )
    total = atom_cost + instance_cost
    if total.millis != best.cost:
        raise InconsistentOptimum(
            f"decoded attack costs {total.millis}, optimum proves {best.cost}"
        )

    return Solution(
        atoms=atoms,
        instances=tuple(instances),
        atom_cost=atom_cost,
        instance_cost=instance_cost,
        total_cost=total,
        cnf_vars=cnf.num_vars,
        cnf_clauses=len(cnf.clauses),
        sat_calls=best.sat_calls,
        cores=best.cores,
        encode_ms=encode_ms,
        solve_ms=solve_ms,
    )


def solution_problems(model: Model, solution: Solution) -> list[str]:
    """Independent re-check of a reported solution.  Returns a list of
    discrepancies, empty when everything holds.

    Disruption is confirmed along both semantic routes: the operability
    formula must go false, and deletion propagation must reach the target
    (unless the attack is the target alone).  Disagreement between the two
    is itself a defect worth surfacing.
    """

    problems: list[str] = []
    atom_ids = frozenset(model.graph.atomic_ids())
    for n in solution.atoms:
        if n not in atom_ids:
            problems.append(f"attacked node {n!r} is not an atomic node")
            return problems
    plain = build_formula(model)
    attacked = set(solution.atoms)
    if not _is_disrupted(plain, atom_ids, attacked):
        problems.append("attack set does not falsify the target's formula")
    reduced = remove_propagate(model.graph, attacked)
    if attacked != {model.target} and model.target in reduced.node_ids():
        problems.append("deletion propagation does not reach the target")

    expected: list[str] = []
    seen: set[str] = set()
    for inst in model.measures:
        if inst.id in seen:
            continue
        if any(n in solution.atoms for n in inst.range):
            seen.add(inst.id)
            expected.append(inst.id)
    if tuple(expected) != solution.instances:
        problems.append(
            f"instances should be {expected}, reported {list(solution.instances)}"
        )

    atom_cost = sum((model.node_cost(n) for n in solution.atoms), ZERO_COST)
    instance_cost = sum(
        (model.measure_by_id(s).cost for s in solution.instances), ZERO_COST
    )
    if atom_cost != solution.atom_cost:
        problems.append("atom cost does not re-add")
    if instance_cost != solution.instance_cost:
        problems.append("instance cost does not re-add")
    if atom_cost + instance_cost != solution.total_cost:
        problems.append("total cost does not re-add")
    return problems


def verify_solution(model: Model, solution: Solution) -> bool:
    """True when the solution disrupts the target and its costs re-add."""
    return not solution_problems(model, solution)


def remove_propagate(
    graph: DependencyGraph, removed: set[str] | frozenset[str]
) -> DependencyGraph:
    """The graph left after deleting `removed` and propagating the loss:
    an AND junction or an atomic node fails with any input lost, an OR
    junction only with all of them.  Runs to a fixpoint; edges touching a
    deleted node go with it."""

    lost = propagate_loss(graph, removed)
    nodes = tuple(n for n in graph.nodes if n.id not in lost)
    edges = tuple(
        (a, b) for a, b in graph.edges if a not in lost and b not in lost
    )
    return DependencyGraph(nodes=nodes, edges=edges)


def propagate_loss(
    graph: DependencyGraph, removed: set[str] | frozenset[str]
) -> frozenset[str]:
    """Every node deleted by remove_propagate, as a set."""

    preds = {n: graph.predecessors(n) for n in graph.node_ids()}
    lost = set()
    for n in removed:
        if n not in preds:
            raise KeyError(f"unknown node {n!r}")
        lost.add(n)
    or_missing = {
        n: len(preds[n])
        for n in graph.node_ids()
        if graph.kind_of(n).value == "or"
    }
    queue = deque(lost)
    while queue:
        n = queue.popleft()
        for succ in graph.successors(n):
            if succ in lost:
                continue
            if succ in or_missing:
                or_missing[succ] -= 1
                if or_missing[succ]:
                    continue
            lost.add(succ)
            queue.append(succ)
    return frozenset(lost)


def wcc_count(graph: DependencyGraph) -> int:
    """Weakly connected components: edge direction ignored, no nodes means
    zero components."""

    alive = graph.node_ids()
    if not alive:
        return 0
    neighbours: dict[str, list[str]] = {n: [] for n in alive}
    for a, b in graph.edges:
        neighbours[a].append(b)
        neighbours[b].append(a)
    seen: set[str] = set()
    parts = 0
    for start in alive:
        if start in seen:
            continue
        parts += 1
        queue = deque([start])
        seen.add(start)
        while queue:
            n = queue.popleft()
            for m in neighbours[n]:
                if m not in seen:
                    seen.add(m)
                    queue.append(m)
    return parts
