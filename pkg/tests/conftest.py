import numpy as np
import pytest
from hypothesis import strategies as st

from qslice.integrate import QuadratureRules
from qslice.quatcore import Quaternion, SliceAxis

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)
quaternions = st.builds(Quaternion, finite, finite, finite, finite)
unit_vectors = (st.tuples(finite, finite, finite)
                .filter(lambda v: np.linalg.norm(v) > 1e-3)
                .map(SliceAxis.from_vector))


@pytest.fixture(scope="session")
def small_rules():
    return QuadratureRules.default("exponential", radial_order=20, theta_order=32,
                                   hemisphere=(8, 16))


@pytest.fixture(scope="session")
def rules():
    return QuadratureRules.default("exponential")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_axis(rng) -> SliceAxis:
    return SliceAxis.from_vector(rng.normal(size=3))
