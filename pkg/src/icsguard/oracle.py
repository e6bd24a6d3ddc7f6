"""Exhaustive reference answer for the disruption metric.

Enumerates every subset of atomic nodes, prices it together with the
measure instances it must overcome, and keeps the cheapest subset that
stops the target.  Deliberately independent of the CNF pipeline: target
operability is recomputed here by direct graph traversal, so agreement
between this module and the optimised path checks both.

Exponential by construction; guarded by an atom-count ceiling.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .metric import TargetIndestructible
from .model import Model, NodeKind, ZERO_COST, validate_model, InvalidModel


class OracleTooLarge(InputError):
    """The model has too many atomic nodes for exhaustive search."""


@dataclass(frozen=True)
class OracleResult:
    atoms: tuple[str, ...]
    instances: tuple[str, ...]
    total_cost_millis: int


def _target_operational(model: Model, attacked: frozenset[str]) -> bool:
    graph = model.graph
    memo: dict[str, bool] = {}
    stack: list[tuple[str, bool]] = [(model.target, False)]
    while stack:
        n, ready = stack.pop()
        if ready:
            preds = [memo[p] for p in graph.predecessors(n)]
            kind = graph.kind_of(n)
            if kind is NodeKind.OR:
                memo[n] = any(preds)
            elif kind is NodeKind.AND:
                memo[n] = all(preds)
            else:
                memo[n] = n not in attacked and all(preds)
            continue
        if n in memo:
            continue
        stack.append((n, True))
        for p in graph.predecessors(n):
            if p not in memo:
                stack.append((p, False))
    return memo[model.target]


def cheapest_disruption_exhaustive(
    model: Model, max_atoms: int = 20
) -> OracleResult:
    """Cheapest attack by brute force.  Ties break toward the subset
    earliest in node declaration order.

    Raises TargetIndestructible when no finite-cost attack disrupts the
    target, and OracleTooLarge past the atom ceiling."""

    violations = validate_model(model)
    if violations:
        raise InvalidModel(violations)

    atoms = list(model.graph.atomic_ids())
    if len(atoms) > max_atoms:
        raise OracleTooLarge(
            f"{len(atoms)} atomic nodes exceed the exhaustive limit of {max_atoms}"
        )

    atom_cost = [model.node_cost(n) for n in atoms]
    covering = [tuple(s.id for s in model.instances_protecting(n)) for n in atoms]
    instance_cost = {s.id: s.cost for s in model.measures}
    instance_order = {s.id: i for i, s in enumerate(model.measures)}

    best_cost: int | None = None
    best_pick: tuple[int, ...] | None = None
    for mask in range(1 << len(atoms)):
        pick = tuple(i for i in range(len(atoms)) if mask >> i & 1)
        total = ZERO_COST
        for i in pick:
            total = total + atom_cost[i]
        if total.millis is None:
            continue
        needed: set[str] = set()
        for i in pick:
            needed.update(covering[i])
        for s in needed:
            total = total + instance_cost[s]
        if total.millis is None:
            continue
        if best_cost is not None and (
            total.millis > best_cost
            or (total.millis == best_cost and best_pick is not None and pick >= best_pick)
        ):
            continue
        if _target_operational(model, frozenset(atoms[i] for i in pick)):
            continue
        best_cost = total.millis
        best_pick = pick

    if best_cost is None or best_pick is None:
        raise TargetIndestructible(
            f"target {model.target!r} cannot be disrupted at finite cost"
        )
    chosen_atoms = tuple(atoms[i] for i in best_pick)
    needed = {s for i in best_pick for s in covering[i]}
    chosen_instances = tuple(sorted(needed, key=instance_order.__getitem__))
    return OracleResult(
        atoms=chosen_atoms,
        instances=chosen_instances,
        total_cost_millis=best_cost,
    )
