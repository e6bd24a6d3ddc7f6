"""The overlap-aware disruption metric end to end on small models."""

from __future__ import annotations

import time
from dataclasses import replace
from itertools import chain, combinations

import pytest
from hypothesis import given, settings

from icsguard.formulas import build_formula, evaluate, expand_formula, variables
from icsguard.maxsat import WeightedInstance
from icsguard.metric import (
    Solution,
    TargetIndestructible,
    build_wcnf,
    compute_metric,
    propagate_loss,
    remove_propagate,
    solution_problems,
    verify_solution,
    wcc_count,
)
from icsguard.model import (
    Cost,
    DependencyGraph,
    MeasureInstance,
    Model,
    Node,
    NodeKind,
)
from icsguard.modelio import load_model
from icsguard.sat import SolveTimeout

from conftest import FIXTURES, generated_models


def _load(name):
    return load_model(FIXTURES / name)


# ----------------------------------------------------------------------
# Known optima


def test_case1_optimum():
    sol = compute_metric(_load("case1.model"))
    assert set(sol.atoms) == {"a", "c"}
    assert sol.instances == ()
    assert sol.total_cost == Cost.finite(6)
    assert sol.atom_cost == Cost.finite(6)
    assert sol.instance_cost == Cost.finite(0)
    assert sol.total_cost.to_display() == "6"


def test_case2_optimum():
    sol = compute_metric(_load("case2.model"))
    assert set(sol.atoms) == {"a", "c"}
    assert set(sol.instances) == {"s1", "s3"}
    assert sol.total_cost == Cost.finite(7)
    # Atoms cost 1 each; s1 costs 3 and s3 costs 2.
    assert sol.atom_cost == Cost.finite(2)
    assert sol.instance_cost == Cost.finite(5)


def test_water_network_base_optimum():
    sol = compute_metric(_load("wtn-base.model"))
    assert set(sol.atoms) == {"a1"}
    assert set(sol.instances) == {"F1-2", "B1-1", "A3-1"}
    assert sol.total_cost == Cost.finite(6)


def test_water_network_extended_optimum():
    sol = compute_metric(_load("wtn-extended.model"))
    assert set(sol.atoms) == {"a1", "s2"}
    assert set(sol.instances) == {"F1-2", "B1-1", "A3-1", "F1-1", "B2-1"}
    assert sol.total_cost == Cost.finite(15)


def test_fixture_solutions_verify():
    for name in ("case1.model", "case2.model", "wtn-base.model", "wtn-extended.model"):
        model = _load(name)
        sol = compute_metric(model)
        assert verify_solution(model, sol), solution_problems(model, sol)
        assert sol.cnf_vars > 0 and sol.cnf_clauses > 0
        assert sol.sat_calls >= 1


def test_splitting_a_shared_instance_raises_the_cost():
    # s1 covers both a and c.  Splitting it into two single-node instances
    # at the same price removes the overlap discount: the cheapest attack
    # moves to b, paying its dedicated protection in full.
    model = _load("case2.model")
    split = tuple(
        chain.from_iterable(
            (
                (
                    MeasureInstance(id="s1a", cost=m.cost, range=("a",), type=m.type),
                    MeasureInstance(id="s1b", cost=m.cost, range=("c",), type=m.type),
                )
                if m.id == "s1"
                else (m,)
            )
            for m in model.measures
        )
    )
    changed = replace(model, measures=split)

    from icsguard.oracle import cheapest_disruption_exhaustive

    reference = cheapest_disruption_exhaustive(changed)
    assert reference.total_cost_millis == 8000

    sol = compute_metric(changed)
    assert sol.total_cost == Cost(millis=8000)
    assert sol.total_cost > compute_metric(model).total_cost
    assert set(sol.atoms) == {"b"}
    assert set(sol.instances) == {"s2"}


@pytest.mark.parametrize("k", [2, 5, 1000])
def test_cost_scaling_invariance(k):
    model = _load("case2.model")
    scaled = replace(
        model,
        node_costs={
            n: Cost(millis=c.millis * k) for n, c in model.node_costs.items()
        },
        measures=tuple(
            replace(
                m,
                cost=m.cost if m.cost.is_infinite else Cost(millis=m.cost.millis * k),
            )
            for m in model.measures
        ),
    )
    base = compute_metric(model)
    sol = compute_metric(scaled)
    assert sol.total_cost.millis == base.total_cost.millis * k
    assert set(sol.atoms) == set(base.atoms)
    assert set(sol.instances) == set(base.instances)


def test_indestructible_target():
    model = Model(
        graph=DependencyGraph(nodes=(Node("t", NodeKind.SENSOR),), edges=()),
        target="t",
        node_costs={"t": Cost.infinite()},
    )
    with pytest.raises(TargetIndestructible):
        compute_metric(model)


def test_infinite_instance_is_never_picked():
    # c1 itself is cheap but s5 guards it at infinite cost, so the attack
    # must go through the tree instead of hitting the target directly.
    model = _load("case2.model")
    sol = compute_metric(model)
    assert "s5" not in sol.instances
    assert "c1" not in sol.atoms


def test_deadline_expired():
    with pytest.raises(SolveTimeout):
        compute_metric(_load("wtn-extended.model"), deadline=time.monotonic() - 1.0)


# ----------------------------------------------------------------------
# WCNF encoding shape


def test_build_wcnf_shape():
    model = _load("case2.model")
    instance, tokens = build_wcnf(model)
    assert isinstance(instance, WeightedInstance)
    # Leading variables are the named ones, in formula-variable order.
    f = expand_formula(build_formula(model), model)
    assert tokens[: len(variables(f))] == variables(f)
    idx = {t: i + 1 for i, t in enumerate(tokens)}
    # s5 is infinitely priced: a hard unit pins it, no soft entry.
    assert (idx["s5"],) in instance.hard
    assert all(abs(lit) != idx["s5"] for lit, _ in instance.soft)
    # Finite prices appear as soft weights in thousandths.
    soft = {abs(lit): w for lit, w in instance.soft}
    assert soft[idx["a"]] == 1000
    assert soft[idx["s1"]] == 3000
    assert soft[idx["s3"]] == 2000


def test_build_wcnf_drops_zero_cost():
    model = _load("case1.model")
    free = replace(
        model,
        node_costs={
            **model.node_costs,
            "b": Cost(millis=0),
        },
    )
    instance, tokens = build_wcnf(free)
    idx = {t: i + 1 for i, t in enumerate(tokens)}
    assert all(abs(lit) != idx["b"] for lit, _ in instance.soft)
    # And the metric then treats b as free to attack.
    sol = compute_metric(free)
    assert set(sol.atoms) == {"b"}
    assert sol.total_cost == Cost(millis=0)


# ----------------------------------------------------------------------
# Verification helpers


def _manual_solution(atoms, instances, atom_cost, instance_cost):
    return Solution(
        atoms=tuple(atoms),
        instances=tuple(instances),
        atom_cost=atom_cost,
        instance_cost=instance_cost,
        total_cost=atom_cost + instance_cost,
        cnf_vars=0,
        cnf_clauses=0,
        sat_calls=0,
        cores=0,
    )


def test_verify_accepts_published_answer():
    model = _load("case2.model")
    sol = _manual_solution(
        ("a", "c"), ("s1", "s3"), Cost.finite(2), Cost.finite(5)
    )
    assert verify_solution(model, sol)


def test_verify_accepts_suboptimal_but_consistent():
    # Verification checks internal consistency, not optimality.
    model = _load("case1.model")
    sol = _manual_solution(("b",), (), Cost.finite(7), Cost.finite(0))
    assert verify_solution(model, sol)


def test_verify_rejects_no_disruption():
    model = _load("case1.model")
    sol = _manual_solution((), (), Cost.finite(0), Cost.finite(0))
    problems = solution_problems(model, sol)
    assert problems and not verify_solution(model, sol)


def test_problems_name_each_defect():
    model = _load("case2.model")
    # Attacking a without paying for its covering instances.
    missing_instances = _manual_solution(
        ("a", "c"), ("s1",), Cost.finite(2), Cost.finite(3)
    )
    assert any("s3" in p for p in solution_problems(model, missing_instances))
    # A connector is not attackable.
    connector = _manual_solution(("or1",), (), Cost.finite(0), Cost.finite(0))
    assert solution_problems(model, connector)
    # Wrong arithmetic is caught.
    bad_cost = _manual_solution(
        ("a", "c"), ("s1", "s3"), Cost.finite(2), Cost.finite(99)
    )
    assert solution_problems(model, bad_cost)
    # Removing only b's hyperedge... removing nothing that reaches the
    # target is caught as non-disruptive.
    useless = _manual_solution(("a",), ("s1", "s3"), Cost.finite(1), Cost.finite(5))
    assert solution_problems(model, useless)


def test_attacking_target_directly_verifies():
    model = _load("case1.model")
    # c1 has infinite cost, so swap in a finite price first.
    cheap = replace(
        model, node_costs={**model.node_costs, "c1": Cost.finite(1)}
    )
    sol = compute_metric(cheap)
    assert set(sol.atoms) == {"c1"}
    assert sol.total_cost == Cost.finite(1)
    assert verify_solution(cheap, sol)


# ----------------------------------------------------------------------
# Removal propagation and connectivity


def test_remove_propagate_case1():
    graph = _load("case1.model").graph
    after = remove_propagate(graph, {"a", "c"})
    assert set(after.node_ids()) == {"b"}
    assert after.edges == ()
    after_b = remove_propagate(graph, {"b"})
    assert set(after_b.node_ids()) == {"a", "c"}
    untouched = remove_propagate(graph, set())
    assert untouched.node_ids() == graph.node_ids()
    assert untouched.edges == graph.edges


def test_or_junction_survives_partial_loss():
    graph = _load("case1.model").graph
    # Killing only and1 leaves or1 alive through and2.
    lost = propagate_loss(graph, {"a"})
    assert "and1" in lost
    assert "or1" not in lost
    assert lost == {"a", "and1"}


def test_propagate_loss_unknown_node():
    graph = _load("case1.model").graph
    with pytest.raises(KeyError):
        propagate_loss(graph, {"nope"})


def test_wcc_count():
    assert wcc_count(DependencyGraph(nodes=(), edges=())) == 0
    assert wcc_count(_load("case1.model").graph) == 1
    two = DependencyGraph(
        nodes=(
            Node("a", NodeKind.SENSOR),
            Node("b", NodeKind.AGENT),
            Node("c", NodeKind.SENSOR),
            Node("d", NodeKind.AGENT),
        ),
        edges=(("a", "b"), ("c", "d")),
    )
    assert wcc_count(two) == 2
    # Direction does not matter for weak connectivity.
    assert wcc_count(remove_propagate(_load("case1.model").graph, {"b"})) == 2


# ----------------------------------------------------------------------
# The formula route and the removal route agree


def _all_subsets(items):
    for r in range(len(items) + 1):
        yield from combinations(items, r)


@settings(max_examples=25)
@given(generated_models(max_size=8, max_measures=0))
def test_formula_false_iff_removal_kills_target(model):
    f = build_formula(model)
    atoms = list(variables(f))
    graph = model.graph
    for subset in _all_subsets(atoms):
        removed = set(subset)
        alive = set(atoms) - removed
        formula_dead = not evaluate(f, alive)
        lost = propagate_loss(graph, removed)
        assert formula_dead == (model.target in lost), (subset, model)
