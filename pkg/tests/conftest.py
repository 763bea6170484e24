import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dispersed.piecewise import Affine, Constant, make_piecewise

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@st.composite
def piecewise_fns(draw, domain=(0.0, 1.0), max_pieces=6, affine=True, lo_val=-3.0, hi_val=3.0):
    """Random piecewise function on ``domain`` with well-separated breakpoints."""
    lo, hi = domain
    k = draw(st.integers(0, max_pieces - 1))
    cuts = draw(st.lists(st.integers(1, 999), min_size=k, max_size=k, unique=True))
    bps = [lo + (hi - lo) * c / 1000.0 for c in sorted(cuts)]
    vals = st.floats(lo_val, hi_val, allow_nan=False)
    pieces = []
    for _ in range(k + 1):
        if affine and draw(st.booleans()):
            pieces.append(Affine(draw(vals), draw(vals)))
        else:
            pieces.append(Constant(draw(vals)))
    return make_piecewise(domain, bps, pieces)
