import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pmpublic.qalgebra import random_pure_state


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def haar_states():
    g = np.random.default_rng(7)
    return [random_pure_state(g) for _ in range(100)]


def random_mixed_state(g: np.random.Generator, rank: int = 4) -> np.ndarray:
    m = g.standard_normal((4, rank)) + 1j * g.standard_normal((4, rank))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def _to_state(parts):
    re, im = parts
    m = re + 1j * im
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


_entries = st.floats(-1, 1, allow_nan=False, width=64)

#: Arbitrary density matrices of any rank, for property tests.
density_matrices = st.tuples(
    arrays(np.float64, (4, 4), elements=_entries),
    arrays(np.float64, (4, 4), elements=_entries),
).filter(lambda p: np.linalg.norm(p[0]) + np.linalg.norm(p[1]) > 0.1).map(_to_state)
