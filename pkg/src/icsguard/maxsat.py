"""Exact weighted partial MaxSAT via core-guided search.

The solver minimises the total weight of falsified soft literals subject to
the hard clauses.  It runs the OLL scheme: solve under the assumption that
every active soft literal holds; each unsatisfiable core pays its minimum
member weight into a lower bound and is relaxed through a cardinality
counter whose "at least two violated" output becomes a new soft literal.
The first satisfiable call proves the lower bound tight.

Weights are non-negative integers.  Callers with fractional costs scale
them to integers first; exact arithmetic here is what makes the optimum
trustworthy.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import IcsguardError
from .sat import Solver


class InconsistentOptimum(IcsguardError):
    """Internal consistency check failed: the model found at the end of the
    search does not cost exactly the proven lower bound."""


@dataclass(frozen=True)
class WeightedInstance:
    """Hard clauses plus weighted soft literals over variables 1..num_vars.

    A soft entry (lit, w) asks for ``lit`` to be true and charges w when it
    is false.  Entries with weight zero are permitted and ignored; repeated
    literals accumulate their weights.
    """

    num_vars: int
    hard: tuple[tuple[int, ...], ...]
    soft: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        for clause in self.hard:
            for lit in clause:
                self._check_lit(lit)
        for lit, w in self.soft:
            self._check_lit(lit)
            if not isinstance(w, int) or w < 0:
                raise ValueError(f"soft weight must be a non-negative int, got {w!r}")

    def _check_lit(self, lit: int) -> None:
        if not isinstance(lit, int) or lit == 0 or abs(lit) > self.num_vars:
            raise ValueError(f"literal {lit!r} out of range for {self.num_vars} vars")

    @property
    def total_soft_weight(self) -> int:
        return sum(w for _, w in self.soft)


@dataclass(frozen=True)
class OptimumResult:
    """Outcome of an exact minimisation run."""

    cost: int
    model: tuple[bool, ...]  # model[v-1] is the value of variable v
    cores: int
    sat_calls: int

    def is_true(self, lit: int) -> bool:
        v = self.model[abs(lit) - 1]
        return v if lit > 0 else not v


class _Totalizer:
    """Bounded incremental totalizer: unary counter of true input literals.

    output(k) is a variable forced true whenever at least k inputs are true
    (one-directional; sufficient for core relaxation).  Outputs materialise
    lazily so bounds extend as later cores demand, without re-encoding.
    """

    __slots__ = ("solver", "_tree",)

    def __init__(self, solver: Solver, lits: list[int]):
        if not lits:
            raise ValueError("totalizer needs at least one input literal")
        self.solver = solver
        # Bottom-up balanced merge.  Node: [outs, left, right, size].
        nodes: list[list] = [[[lit], None, None, 1] for lit in lits]
        while len(nodes) > 1:
            merged = []
            for i in range(0, len(nodes) - 1, 2):
                left, right = nodes[i], nodes[i + 1]
                merged.append([[], left, right, left[3] + right[3]])
            if len(nodes) % 2:
                merged.append(nodes[-1])
            nodes = merged
        self._tree = nodes[0]

    @property
    def size(self) -> int:
        return self._tree[3]

    def output(self, k: int):
        """Variable meaning "at least k inputs are true", or None if k
        exceeds the input count."""
        if k <= 0:
            raise ValueError("totalizer bound must be positive")
        if k > self._tree[3]:
            return None
        self._extend(self._tree, k)
        return self._tree[0][k - 1]

    def _extend(self, node: list, k: int) -> None:
        outs, left, right, size = node
        k = min(k, size)
        if len(outs) >= k or left is None:
            return
        self._extend(left, k)
        self._extend(right, k)
        solver = self.solver
        louts, routs = left[0], right[0]
        nl, nr = left[3], right[3]
        while len(outs) < k:
            m = len(outs) + 1
            out = solver.new_var()
            lo = max(0, m - nr)
            hi = min(nl, m)
            for a in range(lo, hi + 1):
                b = m - a
                if a and b:
                    solver.add_clause([-louts[a - 1], -routs[b - 1], out])
                elif a:
                    solver.add_clause([-louts[a - 1], out])
                else:
                    solver.add_clause([-routs[b - 1], out])
            if m > 1:
                # Unary monotonicity: counting to m implies counting to m-1.
                solver.add_clause([-out, outs[m - 2]])
            outs.append(out)


@dataclass
class _SumGuard:
    """Active bound on one core's violation counter."""

    totalizer: _Totalizer
    bound: int  # the guarded assumption says: fewer than `bound` violations


def solve_wpmaxsat(
    instance: WeightedInstance,
    deadline: float | None = None,
) -> OptimumResult | None:
    """Minimise falsified soft weight.  Returns None when the hard clauses
    alone are unsatisfiable.  Raises SolveTimeout past the deadline."""

    solver = Solver(instance.num_vars)
    for clause in instance.hard:
        solver.add_clause(clause)

    weight: dict[int, int] = {}
    for lit, w in instance.soft:
        if w:
            weight[lit] = weight.get(lit, 0) + w

    sat_calls = 1
    if not solver.solve((), deadline=deadline):
        return None

    lower_bound = 0
    cores = 0
    # Permanent registry: counter-output assumption literal -> its counter
    # and bound.  Entries outlive weight exhaustion because a spent output
    # can reappear in a later core and must extend from its own bound.
    guards: dict[int, _SumGuard] = {}

    while True:
        # Heavier literals first: cores then surface where the cost is, which
        # keeps the bound growing in large steps.  Ties break on the literal
        # so runs are reproducible.
        assumptions = sorted(weight, key=lambda l: (-weight[l], abs(l), l < 0))
        sat_calls += 1
        if solver.solve(assumptions, deadline=deadline):
            model = tuple(solver.value(v) == 1 for v in range(1, instance.num_vars + 1))
            found = sum(
                w for lit, w in instance.soft
                if not (model[abs(lit) - 1] if lit > 0 else not model[abs(lit) - 1])
            )
            if found != lower_bound:
                raise InconsistentOptimum(
                    f"model costs {found}, proven bound is {lower_bound}"
                )
            return OptimumResult(
                cost=lower_bound, model=model, cores=cores, sat_calls=sat_calls,
            )

        core = solver.core()
        if not core:
            # Hard clauses became unsatisfiable through learned units.
            return None
        cores += 1
        wmin = min(weight[lit] for lit in core)
        lower_bound += wmin

        relaxed: list[_SumGuard] = []
        for lit in core:
            weight[lit] -= wmin
            if not weight[lit]:
                del weight[lit]
            guard = guards.get(lit)
            if guard is not None:
                relaxed.append(guard)

        if len(core) == 1:
            # A unit core is simply unachievable: freeze the literal.
            solver.add_clause([-core[0]])
        else:
            counter = _Totalizer(solver, [-lit for lit in core])
            relaxed.append(_SumGuard(counter, 1))

        # Each counter that took part pays for one more violation; guard the
        # next count with a fresh soft literal at the core's weight.
        for guard in relaxed:
            nxt = guard.bound + 1
            out = guard.totalizer.output(nxt)
            if out is None:
                continue  # counter saturated, nothing left to guard
            weight[-out] = weight.get(-out, 0) + wmin
            guards[-out] = _SumGuard(guard.totalizer, nxt)


def enumerate_optima(
    instance: WeightedInstance,
    deadline: float | None = None,
) -> tuple[int, list[frozenset[int]]] | None:
    """All optimum-cost sets of falsified soft literals, for small instances.

    Returns (cost, sets) where each set holds the distinct soft literals
    falsified, or None when the hard clauses are unsatisfiable.  Exponential
    in the soft count; intended for cross-checks and tie inspection.
    """

    best = solve_wpmaxsat(instance, deadline=deadline)
    if best is None:
        return None

    merged: dict[int, int] = {}
    for lit, w in instance.soft:
        if w:
            merged[lit] = merged.get(lit, 0) + w
    lits = sorted(merged, key=lambda l: (abs(l), l < 0))

    solver = Solver(instance.num_vars)
    for clause in instance.hard:
        solver.add_clause(clause)

    found: list[frozenset[int]] = []
    falsified: list[int] = []

    def walk(i: int, spent: int) -> None:
        if spent > best.cost:
            return
        if i == len(lits):
            if spent != best.cost:
                return
            chosen = set(falsified)
            assumptions = [-l if l in chosen else l for l in lits]
            if solver.solve(assumptions, deadline=deadline):
                found.append(frozenset(falsified))
            return
        falsified.append(lits[i])
        walk(i + 1, spent + merged[lits[i]])
        falsified.pop()
        walk(i + 1, spent)

    walk(0, 0)
    return best.cost, found
