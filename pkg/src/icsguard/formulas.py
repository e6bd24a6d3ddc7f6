"""Satisfiability formulas over dependency graphs.

build_formula turns a graph into the condition "the target still works":
an atomic node works if it is uncompromised and all of its inputs work; an
AND connector needs all inputs, an OR connector needs at least one.  Shared
subgraphs become shared subformula objects, so the result is a DAG, not a
tree.  expand_formula folds security measures in by widening each protected
node variable into a disjunction with its protecting instances.  tseitin_cnf
translates the (possibly negated) DAG to CNF with one auxiliary variable per
materialized gate.

All traversals are iterative; graph depth routinely exceeds the interpreter
recursion limit.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .model import Model, NodeKind, Violation, InvalidModel, validate_model


@dataclass(frozen=True, eq=False, repr=False)
class Formula:
    """Base class. Equality is object identity: structural comparison of
    shared DAGs can blow up exponentially, so it is deliberately unavailable.
    Use formula_text/flatten on small formulas in tests instead."""

    __slots__ = ()


@dataclass(frozen=True, eq=False, repr=False)
class Var(Formula):
    __slots__ = ("token",)
    token: str

    def __repr__(self) -> str:
        return f"Var({self.token!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Not(Formula):
    __slots__ = ("child",)
    child: Formula

    def __repr__(self) -> str:
        return "<Not>"


@dataclass(frozen=True, eq=False, repr=False)
class And(Formula):
    __slots__ = ("children",)
    children: tuple[Formula, ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise ValueError("And needs at least one child")

    def __repr__(self) -> str:
        return f"<And n={len(self.children)}>"


@dataclass(frozen=True, eq=False, repr=False)
class Or(Formula):
    __slots__ = ("children",)
    children: tuple[Formula, ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise ValueError("Or needs at least one child")

    def __repr__(self) -> str:
        return f"<Or n={len(self.children)}>"


def _children(node: Formula) -> tuple[Formula, ...]:
    if isinstance(node, Not):
        return (node.child,)
    if isinstance(node, (And, Or)):
        return node.children
    return ()


def iter_unique_postorder(root: Formula) -> list[Formula]:
    """Every DAG node exactly once, children before parents."""
    out: list[Formula] = []
    seen: set[int] = set()
    stack: list[tuple[Formula, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            out.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for child in reversed(_children(node)):
            if id(child) not in seen:
                stack.append((child, False))
    return out


def variables(root: Formula) -> tuple[str, ...]:
    """Distinct variable tokens in first-appearance (postorder) order."""
    out: list[str] = []
    seen: set[str] = set()
    for node in iter_unique_postorder(root):
        if isinstance(node, Var) and node.token not in seen:
            seen.add(node.token)
            out.append(node.token)
    return tuple(out)


def formula_size(root: Formula) -> int:
    """Number of distinct DAG nodes."""
    return len(iter_unique_postorder(root))


def evaluate(root: Formula, true_vars: frozenset[str] | set[str]) -> bool:
    """Truth value with the given variables true and all others false."""
    value: dict[int, bool] = {}
    for node in iter_unique_postorder(root):
        if isinstance(node, Var):
            value[id(node)] = node.token in true_vars
        elif isinstance(node, Not):
            value[id(node)] = not value[id(node.child)]
        elif isinstance(node, And):
            value[id(node)] = all(value[id(c)] for c in node.children)
        else:
            value[id(node)] = any(value[id(c)] for c in node.children)
    return value[id(root)]


def flatten(root: Formula) -> Formula:
    """Copy with nested same-operator children merged and single-child gates
    collapsed.  Display and test helper: the result is a tree, so only use it
    on small formulas."""
    rebuilt: dict[int, Formula] = {}
    for node in iter_unique_postorder(root):
        if isinstance(node, Var):
            rebuilt[id(node)] = node
        elif isinstance(node, Not):
            rebuilt[id(node)] = Not(rebuilt[id(node.child)])
        else:
            op = type(node)
            merged: list[Formula] = []
            for child in node.children:
                flat = rebuilt[id(child)]
                if isinstance(flat, op):
                    merged.extend(flat.children)  # type: ignore[attr-defined]
                else:
                    merged.append(flat)
            rebuilt[id(node)] = merged[0] if len(merged) == 1 else op(tuple(merged))
    return rebuilt[id(root)]


def formula_text(root: Formula) -> str:
    """Structural rendering: (a & b), (a | b), !a.  Mirrors the DAG shape, so
    flatten first when comparing against associativity-normalized strings."""
    text: dict[int, str] = {}
    for node in iter_unique_postorder(root):
        if isinstance(node, Var):
            text[id(node)] = node.token
        elif isinstance(node, Not):
            text[id(node)] = "!" + text[id(node.child)]
        else:
            sep = " & " if isinstance(node, And) else " | "
            inner = sep.join(text[id(c)] for c in node.children)
            text[id(node)] = inner if len(node.children) == 1 else f"({inner})"
    return text[id(root)]


def build_formula(model: Model, target: str | None = None) -> Formula:
    """Condition for the target atomic node to remain functional.

    For atomic v with predecessors p1..pk the condition is
    v & cond(p1) & ... & cond(pk); AND connectors conjoin their inputs, OR
    connectors disjoin them.  Children follow edge declaration order, and a
    node shared by several dependents contributes one shared subformula.
    Nodes that cannot reach the target take no part in the result.
    """
    violations = validate_model(model)
    if violations:
        raise InvalidModel(violations)
    graph = model.graph
    if target is None:
        target = model.target
    kind = graph.kind_of(target)
    if kind is None:
        raise InvalidModel(
            [Violation("unknown-target", f"target {target!r} is not a node of the graph", (target,))]
        )
    if not kind.is_atomic:
        raise InvalidModel(
            [Violation("target-not-atomic", f"target {target!r} is a connector", (target,))]
        )

    node_vars: dict[str, Var] = {}

    def var_of(node_id: str) -> Var:
        v = node_vars.get(node_id)
        if v is None:
            v = Var(node_id)
            node_vars[node_id] = v
        return v

    memo: dict[str, Formula] = {}
    stack: list[tuple[str, bool]] = [(target, False)]
    while stack:
        node_id, ready = stack.pop()
        if not ready:
            if node_id in memo:
                continue
            stack.append((node_id, True))
            for pred in graph.predecessors(node_id):
                if pred not in memo:
                    stack.append((pred, False))
            continue
        if node_id in memo:
            continue
        parts = [memo[p] for p in graph.predecessors(node_id)]
        node_kind = graph.kind_of(node_id)
        if node_kind is not None and node_kind.is_atomic:
            me = var_of(node_id)
            memo[node_id] = me if not parts else And((me, *parts))
        elif node_kind is NodeKind.AND:
            memo[node_id] = And(tuple(parts))
        else:
            memo[node_id] = Or(tuple(parts))
    return memo[target]


def expand_formula(root: Formula, model: Model) -> Formula:
    """Fold overlapping security measures into the formula.

    Every variable of a protected atomic node n becomes
    (n | s1 | ... | sk) over the instances protecting n, in measure
    declaration order.  Instance variables are shared objects, so one
    instance protecting several nodes appears as a single variable.
    Unprotected variables and connectors pass through unchanged.
    """
    instance_vars: dict[str, Var] = {}
    rebuilt: dict[int, Formula] = {}
    for node in iter_unique_postorder(root):
        if isinstance(node, Var):
            protectors = model.instances_protecting(node.token)
            if protectors:
                ors: list[Formula] = [node]
                for inst in protectors:
                    iv = instance_vars.get(inst.id)
                    if iv is None:
                        iv = Var(inst.id)
                        instance_vars[inst.id] = iv
                    ors.append(iv)
                rebuilt[id(node)] = Or(tuple(ors))
            else:
                rebuilt[id(node)] = node
        elif isinstance(node, Not):
            child = rebuilt[id(node.child)]
            rebuilt[id(node)] = node if child is node.child else Not(child)
        else:
            parts = tuple(rebuilt[id(c)] for c in node.children)
            if all(a is b for a, b in zip(parts, node.children)):
                rebuilt[id(node)] = node
            else:
                rebuilt[id(node)] = type(node)(parts)
    return rebuilt[id(root)]


@dataclass
class CnfFormula:
    """CNF with a variable table.

    Variables 1..len(tokens) carry the original tokens in first-appearance
    order; higher indices are Tseitin auxiliaries.
    """

    clauses: list[list[int]]
    num_vars: int
    tokens: tuple[str, ...]

    @property
    def index_of(self) -> dict[str, int]:
        cached = getattr(self, "_index_of", None)
        if cached is None:
            cached = {tok: i + 1 for i, tok in enumerate(self.tokens)}
            self._index_of = cached
        return cached

    def token_of(self, var: int) -> str | None:
        return self.tokens[var - 1] if 1 <= var <= len(self.tokens) else None

    @property
    def aux_count(self) -> int:
        return self.num_vars - len(self.tokens)


def tseitin_cnf(root: Formula) -> CnfFormula:
    """Equisatisfiable CNF via the biconditional Tseitin transformation.

    Each materialized gate g gets an auxiliary variable a with clauses for
    a <-> g.  Negations fold into literal signs.  Two structural savings are
    applied before encoding: a gate referenced only by a same-operator parent
    is fused into that parent (the pair is one gate of the flattened formula),
    and single-literal gates pass their literal through.  Shared subformulas
    keep a single auxiliary.  A final unit clause asserts the root.
    """
    order = iter_unique_postorder(root)

    # A gate referenced exactly once, by a parent of the same operator, fuses
    # into that parent.  refcount and the sole parent's type decide it.
    refs: dict[int, int] = {}
    sole_parent_op: dict[int, type | None] = {}
    for node in order:
        for child in _children(node):
            n = refs.get(id(child), 0) + 1
            refs[id(child)] = n
            sole_parent_op[id(child)] = type(node) if n == 1 else None

    fuses: set[int] = set()
    for node in order:
        if isinstance(node, (And, Or)) and sole_parent_op.get(id(node)) is type(node):
            fuses.add(id(node))

    tokens: list[str] = []
    index: dict[str, int] = {}
    for node in order:
        if isinstance(node, Var) and node.token not in index:
            tokens.append(node.token)
            index[node.token] = len(tokens)

    num_vars = len(tokens)
    clauses: list[list[int]] = []
    lit_of: dict[int, int] = {}
    fused_lits: dict[int, list[int]] = {}

    for node in order:
        if isinstance(node, Var):
            lit_of[id(node)] = index[node.token]
            continue
        if isinstance(node, Not):
            lit_of[id(node)] = -lit_of[id(node.child)]
            continue
        op = type(node)
        lits: list[int] = []
        seen: set[int] = set()
        for child in node.children:
            if id(child) in fuses and type(child) is op:
                sub: list[int] | tuple[int, ...] = fused_lits.pop(id(child))
            else:
                sub = (lit_of[id(child)],)
            for lit in sub:
                if lit not in seen:
                    seen.add(lit)
                    lits.append(lit)
        if id(node) in fuses:
            fused_lits[id(node)] = lits
            continue
        if len(lits) == 1:
            lit_of[id(node)] = lits[0]
            continue
        num_vars += 1
        aux = num_vars
        if isinstance(node, And):
            big = [aux]
            for lit in lits:
                clauses.append([-aux, lit])
                big.append(-lit)
            clauses.append(big)
        else:
            big = [-aux]
            for lit in lits:
                clauses.append([aux, -lit])
                big.append(lit)
            clauses.append(big)
        lit_of[id(node)] = aux

    clauses.append([lit_of[id(root)]])
    return CnfFormula(clauses=clauses, num_vars=num_vars, tokens=tuple(tokens))
