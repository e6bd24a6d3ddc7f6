"""Core domain model: dependency graphs, costs, security measures, validation.

A model couples an AND/OR dependency graph with attacker costs.  Atomic nodes
(sensors, actuators, agents) are things an attacker can compromise; connector
nodes express how a node's inputs combine.  An edge (a, b) means b depends on
a.  Security measures protect sets of atomic nodes and carry their own bypass
cost; one instance may cover several nodes, in which case bypassing it once
bypasses it everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping

from .errors import InputError


class NodeKind(str, Enum):
    SENSOR = "sensor"
    ACTUATOR = "actuator"
    AGENT = "agent"
    AND = "and"
    OR = "or"

    @property
    def is_connector(self) -> bool:
        return self in (NodeKind.AND, NodeKind.OR)

    @property
    def is_atomic(self) -> bool:
        return not self.is_connector


ATOMIC_KINDS = (NodeKind.SENSOR, NodeKind.ACTUATOR, NodeKind.AGENT)


@dataclass(frozen=True)
class Cost:
    """A non-negative attacker cost: finite with at most three fractional
    digits, or infinite.

    Stored in integer thousandths so that arithmetic and solver weights stay
    exact.  None encodes infinity, which orders after every finite value.
    """

    millis: int | None = 0

    def __post_init__(self) -> None:
        if self.millis is None:
            return
        if not isinstance(self.millis, int) or isinstance(self.millis, bool):
            raise ValueError(f"cost thousandths must be an int, got {self.millis!r}")
        if self.millis < 0:
            raise ValueError(f"cost must be non-negative, got {self.millis / 1000}")

    def _key(self) -> tuple[int, int]:
        return (1, 0) if self.millis is None else (0, self.millis)

    def __lt__(self, other: "Cost") -> bool:
        if not isinstance(other, Cost):
            return NotImplemented
        return self._key() < other._key()

    def __le__(self, other: "Cost") -> bool:
        if not isinstance(other, Cost):
            return NotImplemented
        return self._key() <= other._key()

    def __gt__(self, other: "Cost") -> bool:
        if not isinstance(other, Cost):
            return NotImplemented
        return self._key() > other._key()

    def __ge__(self, other: "Cost") -> bool:
        if not isinstance(other, Cost):
            return NotImplemented
        return self._key() >= other._key()

    @classmethod
    def finite(cls, value: int | float | str | Decimal) -> "Cost":
        if isinstance(value, bool):
            raise ValueError("cost must be a number")
        try:
            dec = value if isinstance(value, Decimal) else Decimal(str(value))
        except InvalidOperation as exc:
            raise ValueError(f"not a valid cost: {value!r}") from exc
        if not dec.is_finite():
            raise ValueError(f"not a finite cost: {value!r}")
        scaled = dec.scaleb(3)
        if scaled != scaled.to_integral_value():
            raise ValueError(f"cost {value!r} has more than three fractional digits")
        return cls(millis=int(scaled))

    @classmethod
    def infinite(cls) -> "Cost":
        return cls(millis=None)

    @classmethod
    def parse(cls, raw: object) -> "Cost":
        """Parse a cost as it appears in a model file: a number or "inf"."""
        if isinstance(raw, str):
            if raw.strip().lower() == "inf":
                return cls.infinite()
            raise ValueError(f'cost string must be "inf", got {raw!r}')
        if isinstance(raw, (int, float, Decimal)) and not isinstance(raw, bool):
            return cls.finite(raw)
        raise ValueError(f"cost must be a number or \"inf\", got {raw!r}")

    @property
    def is_infinite(self) -> bool:
        return self.millis is None

    @property
    def is_zero(self) -> bool:
        return self.millis == 0

    def __add__(self, other: "Cost") -> "Cost":
        if not isinstance(other, Cost):
            return NotImplemented
        if self.is_infinite or other.is_infinite:
            return Cost.infinite()
        return Cost(millis=self.millis + other.millis)

    @classmethod
    def total(cls, costs: Iterable["Cost"]) -> "Cost":
        out = cls(millis=0)
        for c in costs:
            out = out + c
        return out

    def to_display(self) -> str:
        if self.is_infinite:
            return "inf"
        whole, frac = divmod(self.millis, 1000)
        if frac == 0:
            return str(whole)
        return f"{whole}.{frac:03d}".rstrip("0")

    def to_json(self) -> object:
        """Value for serialization: "inf", an int, or a float."""
        if self.is_infinite:
            return "inf"
        if self.millis % 1000 == 0:
            return self.millis // 1000
        # Three decimal digits survive a float round trip exactly at these
        # magnitudes, and json renders the shortest repr.
        return self.millis / 1000

    def __str__(self) -> str:
        return self.to_display()


ZERO_COST = Cost(millis=0)


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind


@dataclass(frozen=True)
class DependencyGraph:
    """Directed AND/OR dependency graph.

    Declaration order of nodes and edges is meaningful: it fixes traversal
    order everywhere downstream, so equal inputs give identical outputs.
    Lookups never raise on malformed graphs; validate_model reports defects.
    """

    nodes: tuple[Node, ...]
    edges: tuple[tuple[str, str], ...]

    @cached_property
    def _kinds(self) -> dict[str, NodeKind]:
        return {n.id: n.kind for n in self.nodes}

    @cached_property
    def _preds(self) -> dict[str, tuple[str, ...]]:
        acc: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for src, dst in self.edges:
            if dst in acc and src in self._kinds:
                acc[dst].append(src)
        return {k: tuple(v) for k, v in acc.items()}

    @cached_property
    def _succs(self) -> dict[str, tuple[str, ...]]:
        acc: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for src, dst in self.edges:
            if src in acc and dst in self._kinds:
                acc[src].append(dst)
        return {k: tuple(v) for k, v in acc.items()}

    def has_node(self, node_id: str) -> bool:
        return node_id in self._kinds

    def kind_of(self, node_id: str) -> NodeKind | None:
        return self._kinds.get(node_id)

    def predecessors(self, node_id: str) -> tuple[str, ...]:
        return self._preds.get(node_id, ())

    def successors(self, node_id: str) -> tuple[str, ...]:
        return self._succs.get(node_id, ())

    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    def atomic_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes if n.kind.is_atomic)

    def connector_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes if n.kind.is_connector)


@dataclass(frozen=True)
class MeasureInstance:
    """One deployed security measure protecting a set of atomic nodes."""

    id: str
    cost: Cost
    range: tuple[str, ...]
    type: str | None = None


@dataclass(frozen=True)
class Model:
    graph: DependencyGraph
    target: str
    node_costs: Mapping[str, Cost] = field(default_factory=dict)
    measures: tuple[MeasureInstance, ...] = ()

    def node_cost(self, node_id: str) -> Cost:
        return self.node_costs.get(node_id, ZERO_COST)

    @cached_property
    def _protectors(self) -> dict[str, tuple[MeasureInstance, ...]]:
        acc: dict[str, list[MeasureInstance]] = {}
        for inst in self.measures:
            for node_id in inst.range:
                acc.setdefault(node_id, []).append(inst)
        return {k: tuple(v) for k, v in acc.items()}

    def instances_protecting(self, node_id: str) -> tuple[MeasureInstance, ...]:
        return self._protectors.get(node_id, ())

    def measure_by_id(self, instance_id: str) -> MeasureInstance | None:
        for inst in self.measures:
            if inst.id == instance_id:
                return inst
        return None

    def atomic_ids(self) -> tuple[str, ...]:
        return self.graph.atomic_ids()


@dataclass(frozen=True)
class Violation:
    """One named model defect.  kind is a stable machine-readable tag."""

    kind: str
    detail: str
    subjects: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


class InvalidModel(InputError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        lines = "; ".join(str(v) for v in violations)
        super().__init__(f"invalid model: {lines}")


def _find_cycle(graph: DependencyGraph) -> list[str] | None:
    """Return one directed cycle as a node sequence (first == last), if any."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {nid: WHITE for nid in graph.node_ids()}
    parent: dict[str, str | None] = {}
    for root in graph.node_ids():
        if color[root] != WHITE:
            continue
        stack: list[tuple[str, int]] = [(root, 0)]
        parent[root] = None
        while stack:
            node, idx = stack.pop()
            if idx == 0:
                color[node] = GRAY
            succs = graph.successors(node)
            if idx < len(succs):
                stack.append((node, idx + 1))
                nxt = succs[idx]
                if color[nxt] == GRAY:
                    # Unwind the gray chain from node back to nxt.
                    cycle = [node]
                    cur = node
                    while cur != nxt:
                        cur = parent[cur]  # type: ignore[assignment]
                        cycle.append(cur)
                    cycle.reverse()
                    cycle.append(cycle[0])
                    return cycle
                if color[nxt] == WHITE:
                    parent[nxt] = node
                    stack.append((nxt, 0))
            else:
                color[node] = BLACK
    return None


def validate_model(model: Model) -> list[Violation]:
    """Check every structural rule; return all violations found (empty = valid).

    Total: no input model raises, every defect maps to a named violation.
    """
    out: list[Violation] = []
    graph = model.graph

    seen_ids: set[str] = set()
    for node in graph.nodes:
        if not node.id:
            out.append(Violation("empty-node-id", "a node has an empty id"))
        elif node.id in seen_ids:
            out.append(
                Violation(
                    "duplicate-node-id",
                    f"node id {node.id!r} declared more than once",
                    (node.id,),
                )
            )
        seen_ids.add(node.id)

    seen_edges: set[tuple[str, str]] = set()
    for src, dst in graph.edges:
        for endpoint in (src, dst):
            if endpoint not in seen_ids:
                out.append(
                    Violation(
                        "unknown-edge-endpoint",
                        f"edge ({src!r}, {dst!r}) references unknown node {endpoint!r}",
                        (endpoint,),
                    )
                )
        if (src, dst) in seen_edges:
            out.append(
                Violation(
                    "duplicate-edge",
                    f"edge ({src!r}, {dst!r}) declared more than once",
                    (src, dst),
                )
            )
        seen_edges.add((src, dst))

    cycle = _find_cycle(graph)
    if cycle is not None:
        out.append(
            Violation(
                "cyclic-dependency",
                "dependency cycle: " + " -> ".join(cycle),
                tuple(cycle),
            )
        )

    for node in graph.nodes:
        if node.kind.is_connector and not graph.predecessors(node.id):
            out.append(
                Violation(
                    "connector-without-input",
                    f"connector {node.id!r} has no incoming edge",
                    (node.id,),
                )
            )

    target_kind = graph.kind_of(model.target)
    if target_kind is None:
        out.append(
            Violation(
                "unknown-target",
                f"target {model.target!r} is not a node of the graph",
                (model.target,),
            )
        )
    elif not target_kind.is_atomic:
        out.append(
            Violation(
                "target-not-atomic",
                f"target {model.target!r} is a connector, not an atomic node",
                (model.target,),
            )
        )

    for node_id in model.node_costs:
        kind = graph.kind_of(node_id)
        if kind is None:
            out.append(
                Violation(
                    "cost-for-unknown-node",
                    f"cost given for unknown node {node_id!r}",
                    (node_id,),
                )
            )
        elif kind.is_connector:
            out.append(
                Violation(
                    "cost-on-connector",
                    f"connector {node_id!r} cannot carry an attacker cost",
                    (node_id,),
                )
            )

    seen_measures: set[str] = set()
    for inst in model.measures:
        if not inst.id:
            out.append(Violation("empty-measure-id", "a measure has an empty id"))
        elif inst.id in seen_measures:
            out.append(
                Violation(
                    "duplicate-measure-id",
                    f"measure id {inst.id!r} declared more than once",
                    (inst.id,),
                )
            )
        seen_measures.add(inst.id)
        if not inst.range:
            out.append(
                Violation(
                    "empty-measure-range",
                    f"measure {inst.id!r} protects nothing",
                    (inst.id,),
                )
            )
        for node_id in inst.range:
            kind = graph.kind_of(node_id)
            if kind is None:
                out.append(
                    Violation(
                        "unknown-node-in-range",
                        f"measure {inst.id!r} protects unknown node {node_id!r}",
                        (inst.id, node_id),
                    )
                )
            elif kind.is_connector:
                out.append(
                    Violation(
                        "connector-in-range",
                        f"measure {inst.id!r} protects connector {node_id!r}; "
                        "only atomic nodes can be protected",
                        (inst.id, node_id),
                    )
                )

    return out


@dataclass(frozen=True)
class Hyperedge:
    """An atomic node together with every measure instance protecting it.

    Compromising the node means defeating all members, so the members set is
    the unit the cost metric charges for.
    """

    node: str
    members: tuple[str, ...]  # node id first, then instance ids in declaration order


def build_hyperedges(model: Model) -> tuple[Hyperedge, ...]:
    """One hyperedge per atomic node, in node declaration order.

    Raises InvalidModel if the model does not validate.
    """
    violations = validate_model(model)
    if violations:
        raise InvalidModel(violations)
    out = []
    for node_id in model.graph.atomic_ids():
        instance_ids = tuple(inst.id for inst in model.instances_protecting(node_id))
        out.append(Hyperedge(node=node_id, members=(node_id,) + instance_ids))
    return tuple(out)


class RatingOutOfRange(InputError):
    pass


VALID_RATING_VALUES = (1, 2, 3)


def measure_cost_from_ratings(f1: int, f2: int, f3: int) -> Cost:
    """Cost of a measure type as the product of its three ratings.

    Each rating grades one bypass dimension on the 1..3 scale; the product is
    the attacker cost of defeating one instance of the measure type.
    """
    for name, value in (("f1", f1), ("f2", f2), ("f3", f3)):
        if value not in VALID_RATING_VALUES:
            raise RatingOutOfRange(
                f"rating {name} must be one of {VALID_RATING_VALUES}, got {value!r}"
            )
    return Cost(millis=f1 * f2 * f3 * 1000)
