import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from d2dunderlay.channel import (InterferenceTerm, LinkGain, MIN_DISTANCE_M, path_gain,
                                 received_power, sample_fading, sinr)
from d2dunderlay.geometry import rng_stream


def test_fading_moments():
    x = sample_fading(rng_stream(1), 1_000_000)
    assert x.mean() == pytest.approx(1.0, rel=5e-3)
    assert np.mean(x >= 1.0) == pytest.approx(math.exp(-1), abs=2e-3)
    assert np.mean(x >= 0.0) == 1.0


def test_received_power_examples():
    assert received_power(1.0, LinkGain(1.0, 1.0, 4.0)) == 1.0
    assert received_power(1e-4, LinkGain(1.0, 50.0, 4.0)) == pytest.approx(1.6e-11, rel=1e-12)
    assert received_power(0.0, LinkGain(1.0, 50.0, 4.0)) == 0.0


def test_zero_distance_rejected_and_small_distance_clamped():
    with pytest.raises(ValueError):
        LinkGain(1.0, 0.0, 4.0)
    assert LinkGain(1.0, 1e-6, 4.0).value == MIN_DISTANCE_M ** -4
    assert path_gain(1.0, 0.0, 4.0) == MIN_DISTANCE_M ** -4


def test_sinr_examples():
    g = LinkGain(1.0, 10.0, 4.0)
    assert sinr(InterferenceTerm(1.0, g), [InterferenceTerm(1.0, g)], 0.0) == 1.0
    noise = 10 ** (-112.4 / 10) / 1000
    sig = InterferenceTerm(1e-12, LinkGain(1.0, 1.0, 4.0))
    assert sinr(sig, [], noise) == pytest.approx(173.78, rel=1e-4)
    assert sinr(InterferenceTerm(0.0, g), [], noise) == 0.0
    with pytest.raises(ZeroDivisionError):
        sinr(sig, [], 0.0)


powers = st.floats(1e-9, 1.0)
gains = st.builds(LinkGain, st.floats(1e-3, 10.0), st.floats(1.0, 500.0), st.just(4.0))


@given(powers, gains, st.lists(st.tuples(powers, gains), min_size=1, max_size=5),
       st.floats(0.0, 1e-12), st.floats(1e-3, 1e3))
def test_sinr_scale_invariant(p, g, ints, noise, c):
    terms = [InterferenceTerm(q, h) for q, h in ints]
    base = sinr(InterferenceTerm(p, g), terms, noise)
    scaled = sinr(InterferenceTerm(p * c, g), [InterferenceTerm(t.tx_power_w * c, t.gain)
                                               for t in terms], noise * c)
    assert scaled == pytest.approx(base, rel=1e-9)


@given(powers, gains, st.lists(st.tuples(powers, gains), min_size=1, max_size=5),
       st.floats(1e-15, 1e-12), st.floats(1.01, 10.0))
def test_sinr_monotone_in_interference_and_noise(p, g, ints, noise, c):
    terms = [InterferenceTerm(q, h) for q, h in ints]
    base = sinr(InterferenceTerm(p, g), terms, noise)
    louder = [InterferenceTerm(terms[0].tx_power_w * c, terms[0].gain)] + terms[1:]
    assert sinr(InterferenceTerm(p, g), louder, noise) <= base
    assert sinr(InterferenceTerm(p, g), terms, noise * c) <= base
