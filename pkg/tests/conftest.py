import math

import pytest

from bridgeinspect.geometry import bundled_bridge
from bridgeinspect.planner import plan_bridge


@pytest.fixture(scope="session")
def viaduct():
    return bundled_bridge("viaduct")


@pytest.fixture(scope="session")
def short_span():
    return bundled_bridge("short_span")


@pytest.fixture(scope="session")
def viaduct_plan(viaduct):
    plan, inst = plan_bridge(viaduct)
    return plan, inst


FACING = math.pi / 2  # vehicle on the -y side looking at the faces


@pytest.fixture(scope="session")
def viaduct_mission(viaduct, viaduct_plan):
    """Full mission on the viaduct with the bundled mission config (2 cm range noise)."""
    from bridgeinspect.config import default_mission
    from bridgeinspect.sim import run_mission

    cfg = default_mission()
    return run_mission(viaduct, viaduct_plan[0], cfg), cfg
