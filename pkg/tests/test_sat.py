"""CDCL solver checked against truth-table oracles built with numpy."""

from __future__ import annotations

import itertools
import random
import time

import numpy as np
import pytest

from icsguard.errors import AnalysisError
from icsguard.sat import Solver, SolveTimeout, _luby


def brute_force_sat(clauses: list[list[int]], num_vars: int) -> np.ndarray:
    """Boolean vector over all 2**num_vars assignments: row satisfies all clauses.

    Row r assigns var i the bit (r >> (i - 1)) & 1.
    """
    rows = np.arange(1 << num_vars, dtype=np.uint32)
    ok = np.ones(rows.shape, dtype=bool)
    for clause in clauses:
        sat = np.zeros(rows.shape, dtype=bool)
        for lit in clause:
            col = ((rows >> (abs(lit) - 1)) & 1).astype(bool)
            sat |= col if lit > 0 else ~col
        ok &= sat
    return ok


def random_3cnf(rng: random.Random, num_vars: int, num_clauses: int) -> list[list[int]]:
    clauses = []
    for _ in range(num_clauses):
        vs = rng.sample(range(1, num_vars + 1), 3)
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return clauses


def pigeonhole(holes: int) -> Solver:
    # holes+1 pigeons into holes: always unsatisfiable, restart-heavy.
    pigeons = holes + 1

    def v(p: int, h: int) -> int:
        return p * holes + h + 1

    s = Solver(pigeons * holes)
    for p in range(pigeons):
        s.add_clause([v(p, h) for h in range(holes)])
    for h in range(holes):
        for p1, p2 in itertools.combinations(range(pigeons), 2):
            s.add_clause([-v(p1, h), -v(p2, h)])
    return s


def test_luby_sequence_prefix():
    got = [_luby(i) for i in range(1, 32)]
    assert got == [
        1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8,
        1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8, 16,
    ]


def test_single_unit():
    s = Solver(1)
    assert s.add_clause([1])
    assert s.solve()
    assert s.value(1) is True
    assert s.value(-1) is False


def test_contradictory_units():
    s = Solver(1)
    assert s.add_clause([1])
    assert s.add_clause([-1]) is False
    assert s.solve() is False


def test_tautology_and_duplicates_are_harmless():
    s = Solver(2)
    assert s.add_clause([1, -1])
    assert s.add_clause([2, 2])
    assert s.solve()
    assert s.value(2)


def test_new_var_and_ensure_vars():
    s = Solver()
    a = s.new_var()
    b = s.new_var()
    assert (a, b) == (1, 2)
    s.ensure_vars(10)
    assert s.num_vars == 10
    s.add_clause([10])
    assert s.solve() and s.value(10)


def test_random_3cnf_against_truth_table():
    sat_seen = unsat_seen = 0
    for seed in range(25):
        rng = random.Random(seed)
        clauses = random_3cnf(rng, 16, 68)
        expected = bool(brute_force_sat(clauses, 16).any())
        s = Solver(16)
        for c in clauses:
            s.add_clause(c)
        got = s.solve()
        assert got == expected, f"seed {seed}"
        if got:
            sat_seen += 1
            model = s.model()
            for c in clauses:
                assert any(model[abs(l)] == (l > 0) for l in c)
        else:
            unsat_seen += 1
    # The clause ratio sits near the phase transition, so both answers occur.
    assert sat_seen and unsat_seen


def test_solver_is_deterministic():
    rng = random.Random(7)
    clauses = random_3cnf(rng, 16, 60)

    def run():
        s = Solver(16)
        for c in clauses:
            s.add_clause(c)
        ok = s.solve()
        return ok, s.model()

    assert run() == run()


def test_pigeonhole_unsat():
    assert pigeonhole(6).solve() is False


def test_model_counting_incremental():
    for seed in range(8):
        rng = random.Random(seed)
        clauses = random_3cnf(rng, 8, 20)
        expected = int(brute_force_sat(clauses, 8).sum())
        s = Solver(8)
        ok = True
        for c in clauses:
            ok = s.add_clause(c) and ok
        count = 0
        while ok and s.solve():
            count += 1
            model = s.model()
            blocking = [-v if model[v] else v for v in range(1, 9)]
            ok = s.add_clause(blocking)
        assert count == expected, f"seed {seed}"


def test_assumption_core_subset_and_unsat():
    rng = random.Random(3)
    clauses = random_3cnf(rng, 12, 40)
    s = Solver(12)
    for c in clauses:
        s.add_clause(c)
    assert s.solve()
    # This instance has an all-positive clause, so all-false must conflict.
    assumptions = [-v for v in range(1, 13)]
    assert s.solve(assumptions) is False
    core = s.core()
    assert core
    assert set(core) <= set(assumptions)
    # The core alone must still be contradictory.
    assert s.solve(core) is False
    # And solving without assumptions still works afterwards.
    assert s.solve() is True


def test_complementary_assumptions_core():
    s = Solver(2)
    s.add_clause([1, 2])
    assert s.solve([1, -1]) is False
    assert set(s.core()) == {1, -1}


def test_core_drives_incremental_relaxation():
    # Max-sat by hand: drop one core literal at a time until satisfiable.
    s = Solver(3)
    s.add_clause([-1, -2])
    s.add_clause([-2, -3])
    s.add_clause([-1, -3])
    wanted = [1, 2, 3]
    while not s.solve(wanted):
        core = s.core()
        assert core and set(core) <= set(wanted)
        wanted.remove(core[0])
    # At most one of the three can hold.
    assert len(wanted) == 1


def test_assumption_validation():
    s = Solver(2)
    s.add_clause([1, 2])
    with pytest.raises(ValueError):
        s.solve([0])
    with pytest.raises(ValueError):
        s.solve([3])
    with pytest.raises(ValueError):
        s.solve([-99])


def test_deadline_raises_analysis_error():
    s = pigeonhole(6)
    with pytest.raises(SolveTimeout):
        s.solve(deadline=time.monotonic() - 1.0)
    assert issubclass(SolveTimeout, AnalysisError)


def test_deadline_far_future_is_harmless():
    s = Solver(2)
    s.add_clause([1, -2])
    assert s.solve(deadline=time.monotonic() + 3600)


def test_unsat_sticks_after_empty_clause():
    s = Solver(2)
    s.add_clause([1])
    assert s.add_clause([-1]) is False
    assert s.add_clause([2]) is False
    assert s.solve() is False
