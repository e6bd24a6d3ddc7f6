"""Complete SAT core: conflict-driven clause learning with watched literals.

Incremental interface in the MiniSat tradition: clauses may be added between
solve calls, solving accepts a list of assumption literals, and after an
unsatisfiable answer the solver reports the subset of assumptions that caused
it (the core).  Everything is deterministic: no randomized decisions, ties in
the activity order break on variable index.

Literals are nonzero ints, variables 1..num_vars.  Internally, truth values
and watch lists are literal-indexed arrays laid out so that negative literals
index from the back (Python's negative indexing), avoiding sign branches in
the propagation loop.
"""

from __future__ import annotations

import time
from heapq import heapify, heappush, heappop
from typing import Iterable, Sequence

from .errors import AnalysisError


class SolveTimeout(AnalysisError):
    """Raised when a solve call exceeds its deadline."""


def _luby(i: int) -> int:
    """Luby restart sequence, 1-indexed: 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ..."""
    # bit_length gives the smallest k with 2**k - 1 >= i; if i is not
    # exactly 2**k - 1 it sits in the tail, which repeats the prefix.
    k = i.bit_length()
    while (1 << k) - 1 != i:
        i -= (1 << (k - 1)) - 1
        k = i.bit_length()
    return 1 << (k - 1)


class Solver:
    RESTART_BASE = 128
    _VAR_DECAY = 0.95

    def __init__(self, num_vars: int = 0):
        self.num_vars = 0
        self._cap = 0
        self.ok = True
        # Literal-indexed (negative literals wrap): truth value in {-1, 0, 1}
        # and watch lists.  Sized by capacity; see ensure_vars.
        self.val: list[int] = [0]
        self.watches: list[list[list[int]]] = [[]]
        # Variable-indexed state.
        self.level: list[int] = [0]
        self.reason: list[list[int] | None] = [None]
        self.saved_phase: bytearray = bytearray([1])
        self.activity: list[float] = [0.0]
        self._seen: bytearray = bytearray(1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self._var_inc = 1.0
        self._heap: list[tuple[float, int]] = []
        self.hard: list[list[int]] = []
        self.learnts: list[list[int]] = []
        self.decisions = 0
        self.conflicts = 0
        self.propagations = 0
        self._core: list[int] = []
        if num_vars:
            self.ensure_vars(num_vars)

    # ------------------------------------------------------------------
    # Variables

    def ensure_vars(self, n: int) -> None:
        if n <= self.num_vars:
            return
        if n > self._cap:
            # The literal-indexed arrays rely on Python's negative indexing,
            # so their length fixes the wrap point.  Grow capacity
            # geometrically to keep incremental new_var calls linear overall.
            cap = max(n, 2 * self._cap, 16)
            old_vals = self.val
            old_watch = self.watches
            old_n = self.num_vars
            self.val = [0] * (2 * cap + 1)
            self.watches = [[] for _ in range(2 * cap + 1)]
            for lit in range(-old_n, old_n + 1):
                if lit == 0:
                    continue
                self.val[lit] = old_vals[lit]
                self.watches[lit] = old_watch[lit]
            self._cap = cap
        grow = n - self.num_vars
        self.level.extend([0] * grow)
        self.reason.extend([None] * grow)
        self.saved_phase.extend(b"\x01" * grow)
        self.activity.extend([0.0] * grow)
        self._seen.extend(b"\x00" * grow)
        for v in range(self.num_vars + 1, n + 1):
            heappush(self._heap, (0.0, v))
        self.num_vars = n

    def new_var(self) -> int:
        self.ensure_vars(self.num_vars + 1)
        return self.num_vars

    # ------------------------------------------------------------------
    # Clause management

    def add_clause(self, lits: Iterable[int]) -> bool:
        """Add a clause at the top level.  Returns False once the clause set
        is unsatisfiable without assumptions."""
        if not self.ok:
            return False
        if self.trail_lim:
            self._cancel_until(0)
        out: list[int] = []
        seen: set[int] = set()
        val = self.val
        for lit in lits:
            if lit in seen:
                continue
            if -lit in seen:
                return True  # tautology
            if val[lit] == 1:
                return True  # satisfied at top level
            if val[lit] == -1:
                continue  # falsified at top level, drop literal
            seen.add(lit)
            out.append(lit)
        if not out:
            self.ok = False
            return False
        if len(out) == 1:
            self._assign(out[0], None)
            if self._propagate() is not None:
                self.ok = False
                return False
            return True
        self.hard.append(out)
        self.watches[out[0]].append(out)
        self.watches[out[1]].append(out)
        return True

    # ------------------------------------------------------------------
    # Assignment primitives

    def _assign(self, lit: int, reason: list[int] | None) -> None:
        self.val[lit] = 1
        self.val[-lit] = -1
        v = lit if lit > 0 else -lit
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _cancel_until(self, target: int) -> None:
        if len(self.trail_lim) <= target:
            return
        lim = self.trail_lim[target]
        val = self.val
        heap = self._heap
        activity = self.activity
        for idx in range(len(self.trail) - 1, lim - 1, -1):
            lit = self.trail[idx]
            val[lit] = 0
            val[-lit] = 0
            v = lit if lit > 0 else -lit
            self.saved_phase[v] = 1 if lit > 0 else 0
            self.reason[v] = None
            heappush(heap, (-activity[v], v))
        del self.trail[lim:]
        del self.trail_lim[target:]
        self.qhead = lim

    def _propagate(self) -> list[int] | None:
        """Unit propagation; returns the conflicting clause or None."""
        val = self.val
        watches = self.watches
        trail = self.trail
        qhead = self.qhead
        props = 0
        while qhead < len(trail):
            p = trail[qhead]
            qhead += 1
            ws = watches[-p]
            i = 0
            j = 0
            end = len(ws)
            lvl = len(self.trail_lim)
            reason = self.reason
            level = self.level
            while i < end:
                c = ws[i]
                i += 1
                if c[0] == -p:
                    c[0] = c[1]
                    c[1] = -p
                first = c[0]
                if val[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                n = len(c)
                k = 2
                moved = False
                while k < n:
                    lk = c[k]
                    if val[lk] != -1:
                        c[1] = lk
                        c[k] = -p
                        watches[lk].append(c)
                        moved = True
                        break
                    k += 1
                if moved:
                    continue
                ws[j] = c
                j += 1
                if val[first] == -1:
                    while i < end:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    self.qhead = len(trail)
                    self.propagations += props
                    return c
                # unit
                val[first] = 1
                val[-first] = -1
                v = first if first > 0 else -first
                level[v] = lvl
                reason[v] = c
                trail.append(first)
                props += 1
            del ws[j:]
        self.qhead = qhead
        self.propagations += props
        return None

    # ------------------------------------------------------------------
    # Conflict analysis

    def _bump(self, v: int) -> None:
        self.activity[v] += self._var_inc
        if self.activity[v] > 1e100:
            inv = 1e-100
            for u in range(1, self.num_vars + 1):
                self.activity[u] *= inv
            self._var_inc *= inv
            # Heap entries hold stale keys after rescale; rebuild.
            self._heap = [(-self.activity[u], u) for u in range(1, self.num_vars + 1) if self.val[u] == 0]
            heapify(self._heap)

    def _analyze(self, confl: list[int]) -> tuple[list[int], int]:
        """First-UIP learning.  Returns (learnt clause, backtrack level); the
        asserting literal sits at learnt[0], a deepest tail literal at [1]."""
        seen = self._seen
        level = self.level
        reason = self.reason
        trail = self.trail
        cur = len(self.trail_lim)
        learnt: list[int] = []
        counter = 0
        p = 0
        c: list[int] | None = confl
        index = len(trail)
        while True:
            assert c is not None
            start = 1 if p else 0
            for t in range(start, len(c)):
                q = c[t]
                v = q if q > 0 else -q
                if not seen[v] and level[v] > 0:
                    seen[v] = 1
                    self._bump(v)
                    if level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while True:
                index -= 1
                if seen[trail[index] if trail[index] > 0 else -trail[index]]:
                    break
            p = trail[index]
            v = p if p > 0 else -p
            c = reason[v]
            seen[v] = 0
            counter -= 1
            if counter == 0:
                break
        learnt.insert(0, -p)
        for q in learnt[1:]:
            seen[q if q > 0 else -q] = 0
        if len(learnt) == 1:
            return learnt, 0
        # Move a maximum-level tail literal into the second watch slot.
        best = 1
        for t in range(2, len(learnt)):
            if level[abs(learnt[t])] > level[abs(learnt[best])]:
                best = t
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    def _analyze_final(self, p: int) -> list[int]:
        """Assumptions responsible for forcing ~p; includes p itself."""
        core = [p]
        if not self.trail_lim:
            return core
        seen = self._seen
        vp = p if p > 0 else -p
        seen[vp] = 1
        bottom = self.trail_lim[0]
        for idx in range(len(self.trail) - 1, bottom - 1, -1):
            lit = self.trail[idx]
            v = lit if lit > 0 else -lit
            if not seen[v]:
                continue
            r = self.reason[v]
            if r is None:
                # A decision in the chain is an assumption; when ~p was itself
                # an earlier assumption it shares p's variable, so no vp test.
                core.append(lit)
            else:
                for q in r:
                    u = q if q > 0 else -q
                    if self.level[u] > 0:
                        seen[u] = 1
            seen[v] = 0
        seen[vp] = 0
        return core

    # ------------------------------------------------------------------
    # Search

    def _pick_branch_var(self) -> int:
        heap = self._heap
        val = self.val
        while heap:
            _, v = heappop(heap)
            if val[v] == 0:
                return v
        for v in range(1, self.num_vars + 1):
            if val[v] == 0:
                return v
        return 0

    def _reduce_learnts(self) -> None:
        """Drop the older half of long, unlocked learnt clauses and rebuild
        the watch lists."""
        locked = set()
        for v in range(1, self.num_vars + 1):
            r = self.reason[v]
            if r is not None:
                locked.add(id(r))
        keep_from = len(self.learnts) // 2
        survivors = []
        for idx, c in enumerate(self.learnts):
            if len(c) <= 2 or idx >= keep_from or id(c) in locked:
                survivors.append(c)
        self.learnts = survivors
        for lst in self.watches:
            del lst[:]
        for c in self.hard:
            self.watches[c[0]].append(c)
            self.watches[c[1]].append(c)
        for c in self.learnts:
            self.watches[c[0]].append(c)
            self.watches[c[1]].append(c)

    def solve(self, assumptions: Sequence[int] = (), deadline: float | None = None) -> bool:
        """Decide satisfiability under the given assumptions.

        True: a model is available via value()/model().  False: with empty
        assumptions the clause set itself is unsatisfiable; otherwise core()
        names a subset of assumptions that cannot hold together.
        """
        self._core = []
        if not self.ok:
            return False
        # Checked on entry as well as inside the loop: callers that issue many
        # short solves would otherwise never observe an expired deadline.
        if deadline is not None and time.monotonic() > deadline:
            raise SolveTimeout("solve exceeded its deadline")
        self._cancel_until(0)
        if self._propagate() is not None:
            self.ok = False
            return False
        for a in assumptions:
            if a == 0 or abs(a) > self.num_vars:
                raise ValueError(f"assumption literal out of range: {a}")

        conflicts_left = self.RESTART_BASE * _luby(1)
        restart_no = 1
        check_counter = 0
        max_learnts = max(4000, len(self.hard) // 2)

        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                check_counter += 1
                if check_counter >= 1024:
                    check_counter = 0
                    if deadline is not None and time.monotonic() > deadline:
                        self._cancel_until(0)
                        raise SolveTimeout("solve exceeded its deadline")
                if not self.trail_lim:
                    self.ok = False
                    return False
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._assign(learnt[0], None)
                else:
                    self.learnts.append(learnt)
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self._assign(learnt[0], learnt)
                self._var_inc /= self._VAR_DECAY
                conflicts_left -= 1
                if len(self.learnts) > max_learnts:
                    self._reduce_learnts()
                    max_learnts = int(max_learnts * 1.3)
                continue
            if conflicts_left <= 0:
                # Restart search decisions, keep the assumption prefix.
                restart_no += 1
                conflicts_left = self.RESTART_BASE * _luby(restart_no)
                self._cancel_until(min(len(self.trail_lim), len(assumptions)))
                continue
            dl = len(self.trail_lim)
            if dl < len(assumptions):
                p = assumptions[dl]
                if self.val[p] == 1:
                    self.trail_lim.append(len(self.trail))
                    continue
                if self.val[p] == -1:
                    self._core = self._analyze_final(p)
                    self._cancel_until(0)
                    return False
                self.trail_lim.append(len(self.trail))
                self._assign(p, None)
                continue
            v = self._pick_branch_var()
            if v == 0:
                return True  # all variables assigned, no conflict: model
            self.decisions += 1
            check_counter += 1
            if check_counter >= 1024:
                check_counter = 0
                if deadline is not None and time.monotonic() > deadline:
                    self._cancel_until(0)
                    raise SolveTimeout("solve exceeded its deadline")
            self.trail_lim.append(len(self.trail))
            self._assign(v if self.saved_phase[v] else -v, None)

    # ------------------------------------------------------------------
    # Results

    def value(self, lit: int) -> bool:
        return self.val[lit] == 1

    def model(self) -> list[bool]:
        """Truth of variables 1..num_vars, index 0 unused."""
        return [False] + [self.val[v] == 1 for v in range(1, self.num_vars + 1)]

    def core(self) -> list[int]:
        """Failed assumptions from the last unsatisfiable solve."""
        return list(self._core)
