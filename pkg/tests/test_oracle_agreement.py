"""The solver pipeline and the exhaustive reference must agree on cost.

Sets may differ when equally cheap optima exist, so agreement is on the
total, with the solver answer additionally required to self-verify.
"""

from __future__ import annotations

import pytest
from hypothesis import given, settings

from icsguard.metric import TargetIndestructible, compute_metric, verify_solution
from icsguard.oracle import cheapest_disruption_exhaustive

from conftest import generated_models


@settings(max_examples=80)
@given(generated_models(max_size=9, max_measures=3))
def test_costs_agree(model):
    try:
        reference = cheapest_disruption_exhaustive(model)
    except TargetIndestructible:
        with pytest.raises(TargetIndestructible):
            compute_metric(model)
        return
    sol = compute_metric(model)
    assert sol.total_cost.millis == reference.total_cost_millis
    assert verify_solution(model, sol)


@settings(max_examples=40)
@given(generated_models(max_size=9, max_measures=2, allow_zero=False, allow_infinite=False))
def test_unique_finite_costs_agree(model):
    # With strictly positive finite prices both routes always answer.
    reference = cheapest_disruption_exhaustive(model)
    sol = compute_metric(model)
    assert sol.total_cost.millis == reference.total_cost_millis
    assert verify_solution(model, sol)
