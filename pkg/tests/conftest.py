"""Shared fixtures and model strategies for the test suite."""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from icsguard import (
    AssignConfig,
    Cost,
    GenConfig,
    Model,
    assign_measures,
    generate_graph,
)

# Deterministic profile: the suite doubles as an acceptance gate, so runs
# must not flake on example choice or on solver timing.
settings.register_profile(
    "gate",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("gate")

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

FIXTURE_NAMES = ("case1.model", "case2.model", "wtn-base.model", "wtn-extended.model")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


COMPOSITIONS = ((60, 20, 20), (100, 0, 0), (40, 30, 30), (50, 50, 0), (50, 0, 50))


@st.composite
def generated_models(
    draw,
    max_size: int = 12,
    max_measures: int = 3,
    allow_infinite: bool = True,
    allow_zero: bool = True,
) -> Model:
    """A valid model from the package generator with repriced costs.

    The generator guarantees structure (acyclic, connected to the target);
    repricing with zero and infinite values exercises the cost corner cases
    the generator's unit costs never reach.
    """
    size = draw(st.integers(min_value=1, max_value=max_size))
    comp = draw(st.sampled_from(COMPOSITIONS))
    seed = draw(st.integers(min_value=0, max_value=2**32))
    model = generate_graph(GenConfig(size=size, composition=comp, seed=seed))
    x = draw(st.integers(min_value=0, max_value=max_measures))
    if x:
        p = draw(st.sampled_from([0.0, 0.3, 0.7, 1.0]))
        model = assign_measures(
            model,
            AssignConfig(measures_per_node=x, overlap_probability=p, seed=seed + 1),
        )

    finite_values = [0, 1, 2, 3] if allow_zero else [1, 2, 3]
    choices = finite_values + (["inf"] if allow_infinite else [])

    def a_cost() -> Cost:
        v = draw(st.sampled_from(choices))
        return Cost.infinite() if v == "inf" else Cost.finite(v)

    node_costs = {n: a_cost() for n in model.graph.atomic_ids()}
    measures = tuple(replace(m, cost=a_cost()) for m in model.measures)
    return replace(model, node_costs=node_costs, measures=measures)
