import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from cfqkd._jit import njit
from cfqkd.montecarlo.rng import DRAWS_PER_PULSE, stream_key, uniform, uniform_array, uniform_reference


@njit
def _numba_draws(key, pulses, draw):
    out = np.empty(pulses.size)
    for i in range(pulses.size):
        out[i] = uniform(key, pulses[i], draw)
    return out


# first call compiles the helper, so no per-example deadline
@settings(deadline=None)
@given(
    st.integers(min_value=-(2**70), max_value=2**70),
    st.lists(st.integers(min_value=0, max_value=2**40), min_size=1, max_size=20),
    st.integers(min_value=0, max_value=DRAWS_PER_PULSE - 1),
)
def test_three_implementations_agree(seed, pulses, draw):
    key = stream_key(seed)
    idx = np.array(pulses, dtype=np.uint64)
    ref = np.array([uniform_reference(int(key), p, draw) for p in pulses])
    np.testing.assert_array_equal(uniform_array(key, idx, draw), ref)
    np.testing.assert_array_equal(_numba_draws(key, idx, draw), ref)


def test_uniformity_and_range():
    u = uniform_array(stream_key(3), np.arange(200_000, dtype=np.uint64), 0)
    assert u.min() >= 0.0 and u.max() < 1.0
    counts, _ = np.histogram(u, bins=20, range=(0, 1))
    expected = u.size / 20
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < 50  # 19 dof, p ~ 1e-4


def test_seeds_and_draws_are_distinct():
    idx = np.arange(1000, dtype=np.uint64)
    a = uniform_array(stream_key(1), idx, 0)
    assert not np.array_equal(a, uniform_array(stream_key(2), idx, 0))
    assert not np.array_equal(a, uniform_array(stream_key(1), idx, 1))
    assert abs(np.corrcoef(a, uniform_array(stream_key(1), idx, 1))[0, 1]) < 0.1
