import math

import pytest

from agent_helper.enums import AgentId
from data.models.location import AnchorLayout, DistanceVector
from data.models.radio import NoiseConfig
from scenario import builtin_scenarios


def exact_vector(agent: AgentId, x: float, y: float, layout: AnchorLayout, t: float = 0.0) -> DistanceVector:
    """Noiseless distances from (x, y) to the layout's anchors."""
    d = [math.hypot(x - ax, y - ay) for ax, ay in layout.anchors]
    return DistanceVector(agent, t, *d)


@pytest.fixture
def layout() -> AnchorLayout:
    return AnchorLayout()


@pytest.fixture
def noiseless_scenarios():
    return builtin_scenarios(NoiseConfig(sigma_db=0.0, seed=1))


@pytest.fixture
def exact():
    return exact_vector
