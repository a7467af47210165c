"""Shared fixtures: small, fast search runs reused across test modules."""

import pytest

from confluence.confsearch import ExhaustionPolicy, RunConfig, run


@pytest.fixture(scope="session")
def small_run():
    """A complete order-2/order-3 run at delta 0.1, small enough for reuse."""
    return run(RunConfig(
        base_pair=(2, 3),
        delta_schedule={2: 0.1, 3: 0.1},
        budgets={3: 2000},
        max_order=3,
        base_mode="run",
        base_n_max=300,
        policy=ExhaustionPolicy(kind="abort"),
    ))


@pytest.fixture(scope="session")
def small_config_text():
    """Canonical config file text matching the ``small_run`` fixture."""
    return (
        "confluence-config v1\n"
        "pair: 2,3\n"
        "max_order: 3\n"
        "base_mode: run\n"
        "base_n_max: 300\n"
        "policy: abort\n"
        "delta.2: 0.1\n"
        "delta.3: 0.1\n"
        "budget.3: 2000\n"
    )
