import hypothesis
import numpy as np
import pytest

from svip import projections

hypothesis.settings.register_profile(
    "svip", max_examples=50, deadline=None,
    suppress_health_check=[hypothesis.HealthCheck.too_slow],
)
hypothesis.settings.load_profile("svip")


@pytest.fixture(scope="session", autouse=True)
def warm_projection_kernel():
    # first call pays the JIT compile; keep it out of timed tests
    poly = projections.Polyhedron.from_halfspaces(
        [projections.HalfSpace(np.array([1.0, 0.0]), 0.0)]
    )
    projections.project_polyhedron(poly, np.array([1.0, 1.0]))
