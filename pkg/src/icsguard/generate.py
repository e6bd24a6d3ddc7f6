"""Pseudo-random model generation: AND/OR graphs and measure assignment.

Graphs grow backwards from a single target node.  A frontier of expandable
nodes receives freshly created predecessors whose kind is drawn from a
compositional distribution over atomic/AND/OR percentages; growth stops once
the node count reaches the requested size.  Measure assignment then walks
the atomic nodes a configured number of rounds, either extending the
previously used instance or minting a fresh one per node.

Every random draw comes from a single SplitMix64 stream, so a configuration
and a seed fully determine the output on any platform.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

from .errors import InputError
from .model import Cost, DependencyGraph, MeasureInstance, Model, Node, NodeKind

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """splitmix64 sequence generator (Steele, Lea, Flood's constants).

    All arithmetic is modulo 2**64 with fixed multipliers, so a given seed
    reproduces the identical stream on every platform and Python build.
    """

    GAMMA = 0x9E3779B97F4A7C15
    MIX1 = 0xBF58476D1CE4E5B9
    MIX2 = 0x94D049BB133111EB

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + self.GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * self.MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * self.MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound), rejection-sampled to avoid bias."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            raw = self.next_u64()
            if raw < limit:
                return raw % bound

    def next_float(self) -> float:
        """Uniform float in [0, 1) with the full 53-bit mantissa."""
        return (self.next_u64() >> 11) * 2.0**-53


@dataclass(frozen=True)
class GenConfig:
    """Shape of a generated graph.

    composition gives the percentage of atomic, AND, and OR nodes drawn
    while expanding; branching bounds how many children a connector takes.
    """

    size: int
    composition: tuple[int, int, int] = (60, 20, 20)
    seed: int = 1
    branching: tuple[int, int] = (2, 3)

    def __post_init__(self) -> None:
        if self.size < 1:
            raise InputError(f"graph size must be at least 1, got {self.size}")
        parts = self.composition
        if len(parts) != 3 or any(
            not isinstance(c, int) or isinstance(c, bool) or c < 0 for c in parts
        ):
            raise InputError(
                f"composition must be three non-negative integers, got {parts!r}"
            )
        if sum(parts) != 100:
            raise InputError(
                f"composition percentages must sum to 100, got {sum(parts)}"
            )
        low, high = self.branching
        if not (isinstance(low, int) and isinstance(high, int) and 2 <= low <= high):
            raise InputError(
                f"branching range must satisfy 2 <= min <= max, got {self.branching!r}"
            )


def generate_graph(cfg: GenConfig) -> Model:
    """Build a pseudo-random valid model: one target, no measures, unit costs.

    The target is created first; a FIFO frontier then receives predecessors
    (one for an atomic node, branching-many for a connector) whose kinds are
    drawn per the composition, until the node count reaches cfg.size.  The
    final count may overshoot by at most the connector arity of the last
    expansion.  Connectors still waiting in the frontier at that point are
    wired to existing input-less atomic nodes, which cannot introduce a
    cycle; fresh sensors are minted only if too few such nodes exist.
    """
    rng = SplitMix64(cfg.seed)
    atomic_pct, and_pct, _ = cfg.composition
    min_children, max_children = cfg.branching

    # Node i is named f"n{i}"; the target is n0.
    kinds: list[NodeKind] = [NodeKind.ACTUATOR]
    pred_count = [0]
    edges: list[tuple[int, int]] = []
    frontier: deque[int] = deque([0])

    def draw_kind() -> NodeKind:
        roll = rng.next_below(100)
        if roll < atomic_pct:
            return NodeKind.AGENT
        if roll < atomic_pct + and_pct:
            return NodeKind.AND
        return NodeKind.OR

    def add_child(kind: NodeKind, parent: int) -> int:
        child = len(kinds)
        kinds.append(kind)
        pred_count.append(0)
        edges.append((child, parent))
        pred_count[parent] += 1
        return child

    while len(kinds) < cfg.size:
        node = frontier.popleft()
        if kinds[node].is_atomic:
            arity = 1
        else:
            arity = min_children + rng.next_below(max_children - min_children + 1)
        for _ in range(arity):
            frontier.append(add_child(draw_kind(), node))

    pending = [node for node in frontier if kinds[node].is_connector]
    if pending:
        sources = [
            i for i, kind in enumerate(kinds) if kind.is_atomic and pred_count[i] == 0
        ]
        while len(sources) < min_children:
            extra = len(kinds)
            kinds.append(NodeKind.SENSOR)
            pred_count.append(0)
            sources.append(extra)
        for offset, node in enumerate(pending):
            for j in range(min_children):
                src = sources[(offset + j) % len(sources)]
                edges.append((src, node))
                pred_count[node] += 1

    def final_kind(index: int) -> NodeKind:
        kind = kinds[index]
        if index == 0 or kind.is_connector:
            return kind
        # Atomic texture: input-less nodes read the world, the rest compute.
        return NodeKind.AGENT if pred_count[index] else NodeKind.SENSOR

    nodes = tuple(Node(f"n{i}", final_kind(i)) for i in range(len(kinds)))
    graph = DependencyGraph(
        nodes=nodes,
        edges=tuple((f"n{a}", f"n{b}") for a, b in edges),
    )
    unit = Cost.finite(1)
    return Model(
        graph=graph,
        target="n0",
        node_costs={n.id: unit for n in nodes if n.kind.is_atomic},
    )


@dataclass(frozen=True)
class FixedCost:
    """Sampler that prices every minted instance the same."""

    value: int = 1

    def __post_init__(self) -> None:
        if not isinstance(self.value, int) or isinstance(self.value, bool) or self.value < 0:
            raise InputError(f"fixed cost must be a non-negative integer, got {self.value!r}")

    def draw(self, rng: SplitMix64) -> Cost:
        return Cost.finite(self.value)


@dataclass(frozen=True)
class UniformCostRange:
    """Sampler drawing integer costs uniformly from [low, high]."""

    low: int
    high: int

    def __post_init__(self) -> None:
        ok = (
            isinstance(self.low, int)
            and isinstance(self.high, int)
            and 0 <= self.low <= self.high
        )
        if not ok:
            raise InputError(
                f"cost range must satisfy 0 <= low <= high, got {self.low!r}..{self.high!r}"
            )

    def draw(self, rng: SplitMix64) -> Cost:
        return Cost.finite(self.low + rng.next_below(self.high - self.low + 1))


CostSampler = FixedCost | UniformCostRange


@dataclass(frozen=True)
class AssignConfig:
    """How measure instances are spread over a graph's atomic nodes.

    measures_per_node rounds are run independently; within a round each
    atomic node (declaration order) extends the previous node's instance
    with probability overlap_probability, else mints a fresh one.
    """

    measures_per_node: int
    overlap_probability: float
    cost_sampler: CostSampler = FixedCost(1)
    seed: int = 1

    def __post_init__(self) -> None:
        if self.measures_per_node < 0:
            raise InputError(
                f"measures per node must be non-negative, got {self.measures_per_node}"
            )
        if not 0.0 <= self.overlap_probability <= 1.0:
            raise InputError(
                f"overlap probability must lie in [0, 1], got {self.overlap_probability}"
            )


def assign_measures(model: Model, cfg: AssignConfig) -> Model:
    """Attach generated measure instances to a model's atomic nodes.

    Instance m{r}_{k} is the k-th instance minted in round r.  The first
    node of a round always mints; later nodes reuse the instance covering
    the previous node with probability cfg.overlap_probability.  A fresh
    instance draws its cost from cfg.cost_sampler at mint time.
    """
    rng = SplitMix64(cfg.seed)
    atoms = model.graph.atomic_ids()
    minted: list[tuple[str, Cost, list[str]]] = []
    for round_no in range(1, cfg.measures_per_node + 1):
        fresh = 0
        current: tuple[str, Cost, list[str]] | None = None
        for atom in atoms:
            if current is not None and rng.next_float() < cfg.overlap_probability:
                current[2].append(atom)
                continue
            fresh += 1
            current = (
                f"m{round_no}_{fresh}",
                cfg.cost_sampler.draw(rng),
                [atom],
            )
            minted.append(current)
    new_instances = tuple(
        MeasureInstance(id=mid, cost=cost, range=tuple(covered))
        for mid, cost, covered in minted
    )
    return replace(model, measures=model.measures + new_instances)
