"""Model files, WCNF export, DOT export.

The on-disk model is a single JSON object:

    {
      "nodes":    [{"id": "a", "kind": "sensor", "cost": 3}, ...],
      "edges":    [["a", "and1"], ...],
      "measures": [{"id": "s1", "type": "F1", "cost": 3, "range": ["a","c"]}, ...],
      "target":   "c1"
    }

Kinds are sensor | actuator | agent | and | or.  Costs are numbers with at
most three decimal digits, or the string "inf"; a node without a cost key
costs 0.  "measures" may be omitted when empty.  Writing is canonical:
nodes, measures, and ranges sort by id, edges by endpoint pair, so a file
that has been written once rewrites byte-identically.
"""

from __future__ import annotations

import json
import warnings
from decimal import Decimal
from pathlib import Path
from typing import Sequence

from .errors import InputError
from .maxsat import WeightedInstance
from .metric import Solution
from .model import (
    Cost,
    DependencyGraph,
    InvalidModel,
    MeasureInstance,
    Model,
    Node,
    NodeKind,
    validate_model,
)


class ModelSyntaxError(InputError):
    """The document is not valid JSON."""


class ModelSchemaError(InputError):
    """The document is JSON but not a model: wrong shape, missing or
    unknown fields, bad value types."""


class ModelFormatWarning(UserWarning):
    """Lenient parsing noticed something strict mode would reject."""


_KINDS = {k.value: k for k in NodeKind}
_NODE_KEYS = {"id", "kind", "cost"}
_MEASURE_KEYS = {"id", "type", "cost", "range"}
_TOP_KEYS = {"nodes", "edges", "measures", "target"}


def load_model(path: str | Path, strict: bool = True) -> Model:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_model(text, strict=strict)


def parse_model(text: str, strict: bool = True) -> Model:
    """Parse and validate a model document.

    Strict mode rejects unknown fields; lenient mode warns and ignores
    them.  Floats parse through Decimal so three-digit costs survive
    exactly.  Raises ModelSyntaxError, ModelSchemaError, or InvalidModel.
    """

    def complain(message: str) -> None:
        if strict:
            raise ModelSchemaError(message)
        warnings.warn(message, ModelFormatWarning, stacklevel=3)

    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(
            f"line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc

    if not isinstance(doc, dict):
        raise ModelSchemaError("top level must be an object")
    for key in doc:
        if key not in _TOP_KEYS:
            complain(f"unknown top-level field {key!r}")

    raw_nodes = _expect_list(doc, "nodes")
    nodes: list[Node] = []
    costs: dict[str, Cost] = {}
    for i, item in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        if not isinstance(item, dict):
            raise ModelSchemaError(f"{where} must be an object")
        for key in item:
            if key not in _NODE_KEYS:
                complain(f"{where}: unknown field {key!r}")
        node_id = _expect_str(item, "id", where)
        kind_token = _expect_str(item, "kind", where)
        kind = _KINDS.get(kind_token)
        if kind is None:
            raise ModelSchemaError(
                f"{where}.kind: {kind_token!r} is not one of {sorted(_KINDS)}"
            )
        nodes.append(Node(id=node_id, kind=kind))
        if "cost" in item:
            try:
                costs[node_id] = Cost.parse(item["cost"])
            except ValueError as exc:
                raise ModelSchemaError(f"{where}.cost: {exc}") from exc

    raw_edges = _expect_list(doc, "edges", default=[])
    edges: list[tuple[str, str]] = []
    for i, item in enumerate(raw_edges):
        where = f"edges[{i}]"
        if (
            not isinstance(item, list)
            or len(item) != 2
            or not all(isinstance(x, str) for x in item)
        ):
            raise ModelSchemaError(f"{where} must be a [from, to] pair of ids")
        edges.append((item[0], item[1]))

    raw_measures = _expect_list(doc, "measures", default=[])
    measures: list[MeasureInstance] = []
    for i, item in enumerate(raw_measures):
        where = f"measures[{i}]"
        if not isinstance(item, dict):
            raise ModelSchemaError(f"{where} must be an object")
        for key in item:
            if key not in _MEASURE_KEYS:
                complain(f"{where}: unknown field {key!r}")
        mid = _expect_str(item, "id", where)
        mtype = None
        if "type" in item:
            mtype = _expect_str(item, "type", where)
        if "cost" not in item:
            raise ModelSchemaError(f"{where}.cost is required")
        try:
            mcost = Cost.parse(item["cost"])
        except ValueError as exc:
            raise ModelSchemaError(f"{where}.cost: {exc}") from exc
        rng = item.get("range")
        if (
            not isinstance(rng, list)
            or not all(isinstance(x, str) for x in rng)
        ):
            raise ModelSchemaError(f"{where}.range must be a list of node ids")
        measures.append(
            MeasureInstance(id=mid, cost=mcost, range=tuple(rng), type=mtype)
        )

    if "target" not in doc:
        raise ModelSchemaError("target is required")
    target = doc["target"]
    if not isinstance(target, str):
        raise ModelSchemaError("target must be a node id string")

    model = Model(
        graph=DependencyGraph(nodes=tuple(nodes), edges=tuple(edges)),
        target=target,
        node_costs=costs,
        measures=tuple(measures),
    )
    violations = validate_model(model)
    if violations:
        raise InvalidModel(violations)
    return model


def _expect_list(doc: dict, key: str, default: list | None = None) -> list:
    if key not in doc:
        if default is None:
            raise ModelSchemaError(f"{key} is required")
        return default
    value = doc[key]
    if not isinstance(value, list):
        raise ModelSchemaError(f"{key} must be a list")
    return value


def _expect_str(item: dict, key: str, where: str) -> str:
    if key not in item:
        raise ModelSchemaError(f"{where}.{key} is required")
    value = item[key]
    if not isinstance(value, str):
        raise ModelSchemaError(f"{where}.{key} must be a string")
    return value


def write_model(model: Model) -> str:
    """Canonical document for a model: sorted, two-space indent, trailing
    newline.  parse_model(write_model(m)) equals m for models whose
    declarations are already in canonical order, and rewriting any parsed
    model is byte-stable."""

    nodes = []
    for node in sorted(model.graph.nodes, key=lambda n: n.id):
        entry: dict[str, object] = {"id": node.id, "kind": node.kind.value}
        cost = model.node_cost(node.id)
        if not cost.is_zero:
            entry["cost"] = cost.to_json()
        nodes.append(entry)
    edges = [list(e) for e in sorted(model.graph.edges)]
    measures = []
    for inst in sorted(model.measures, key=lambda m: m.id):
        entry = {"id": inst.id}
        if inst.type is not None:
            entry["type"] = inst.type
        entry["cost"] = inst.cost.to_json()
        entry["range"] = sorted(inst.range)
        measures.append(entry)
    doc: dict[str, object] = {"nodes": nodes, "edges": edges}
    if measures:
        doc["measures"] = measures
    doc["target"] = model.target
    return json.dumps(doc, indent=2) + "\n"


def save_model(model: Model, path: str | Path) -> None:
    Path(path).write_text(write_model(model), encoding="utf-8")


def export_wcnf(
    instance: WeightedInstance,
    tokens: Sequence[str] | None = None,
) -> str:
    """Classic weighted-partial CNF text.

    Header is `p wcnf <vars> <clauses> <top>` with top = 1 + total soft
    weight; hard clauses carry weight top.  When tokens are given, a
    comment block maps variable indices to them.
    """

    soft = [(lit, w) for lit, w in instance.soft if w]
    top = 1 + sum(w for _, w in soft)
    lines: list[str] = []
    if tokens:
        for i, token in enumerate(tokens, start=1):
            lines.append(f"c var {i} = {token}")
    lines.append(f"p wcnf {instance.num_vars} {len(instance.hard) + len(soft)} {top}")
    for clause in instance.hard:
        lines.append(" ".join(str(l) for l in (top, *clause, 0)))
    for lit, w in soft:
        lines.append(f"{w} {lit} 0")
    return "\n".join(lines) + "\n"


def _dot_quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(model: Model, solution: Solution | None = None) -> str:
    """Graphviz rendering: atomic nodes as boxes, connectors as labelled
    wedges, measure instances dashed and tied to the nodes they protect.
    With a solution, the critical nodes and instances are filled in."""

    hot_nodes = set(solution.atoms) if solution else set()
    hot_measures = set(solution.instances) if solution else set()
    lines = ["digraph model {", "  rankdir=LR;"]
    for node in model.graph.nodes:
        attrs: list[str] = []
        if node.kind.is_connector:
            attrs.append("shape=invtriangle")
            attrs.append(f'label="{node.kind.value.upper()}"')
        else:
            attrs.append("shape=box")
        if node.id == model.target:
            attrs.append("peripheries=2")
        if node.id in hot_nodes:
            attrs.append("style=filled")
            attrs.append("fillcolor=orange")
        lines.append(f"  {_dot_quote(node.id)} [{', '.join(attrs)}];")
    for inst in model.measures:
        attrs = ["shape=ellipse", f'label="{inst.id}"']
        if inst.id in hot_measures:
            attrs.append('style="dashed,filled"')
            attrs.append("fillcolor=orange")
        else:
            attrs.append("style=dashed")
        lines.append(f"  {_dot_quote(inst.id)} [{', '.join(attrs)}];")
    for a, b in model.graph.edges:
        lines.append(f"  {_dot_quote(a)} -> {_dot_quote(b)};")
    for inst in model.measures:
        for n in inst.range:
            lines.append(
                f"  {_dot_quote(inst.id)} -> {_dot_quote(n)} [style=dashed, dir=none];"
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
