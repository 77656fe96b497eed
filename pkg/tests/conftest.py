import random

import pytest
from hypothesis import settings, strategies as st

from visroute.instance import random_instance

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@st.composite
def instances(draw, n_min=3, n_max=14, densities=(0.0, 0.3, 0.7, 1.0)):
    n = draw(st.integers(n_min, n_max))
    seed = draw(st.integers(0, 2**32 - 1))
    density = draw(st.sampled_from(densities))
    return random_instance(n, seed=seed, density=density, grid=1000)


@pytest.fixture
def rng():
    return random.Random(12345)


def exact_det(rows):
    """Determinant over the rationals by Gaussian elimination."""
    from fractions import Fraction

    m = [[Fraction(v) for v in row] for row in rows]
    n, det = len(m), Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if m[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            m[i], m[piv] = m[piv], m[i]
            det = -det
        det *= m[i][i]
        for r in range(i + 1, n):
            f = m[r][i] / m[i][i]
            m[r] = [x - f * y for x, y in zip(m[r], m[i])]
    return det
