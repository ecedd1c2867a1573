from hypothesis import given, strategies as st

from fireprop.rng import MASK64, SplitMix64, derive_seed, mix64


def test_splitmix_reference_output():
    assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF


def test_stream_formula():
    g = SplitMix64(12345)
    for k in range(5):
        assert g.next_u64() == mix64(12345 + (k + 1) * 0x9E3779B97F4A7C15)


@given(st.integers(0, MASK64), st.integers(1, 10**12))
def test_below_in_range(seed, bound):
    g = SplitMix64(seed)
    for _ in range(10):
        assert 0 <= g.below(bound) < bound


def test_below_uniform_small_bound():
    g = SplitMix64(7)
    counts = [0] * 3
    for _ in range(30000):
        counts[g.below(3)] += 1
    assert all(abs(c - 10000) < 400 for c in counts)


def test_derive_seed_no_collisions():
    seeds = {derive_seed(1, e, r) for e in range(50) for r in range(2000)}
    assert len(seeds) == 100000


def test_derive_seed_deterministic():
    assert derive_seed(3, 1, 2) == derive_seed(3, 1, 2)
    assert derive_seed(3, 1, 2) != derive_seed(3, 2, 1)
