import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from relucalc import Network  # noqa: E402

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_net(rng, widths):
    layers = [
        (rng.uniform(-2, 2, size=(widths[k], widths[k - 1])), rng.uniform(-1, 1, size=widths[k]))
        for k in range(1, len(widths))
    ]
    return Network.from_arrays(layers)


@st.composite
def widths(draw, min_len=1, max_len=4, max_width=4, first=None, last=None):
    n = draw(st.integers(min_len, max_len))
    ws = [draw(st.integers(1, max_width)) for _ in range(n + 1)]
    if first is not None:
        ws[0] = first
    if last is not None:
        ws[-1] = last
    return ws


@st.composite
def networks(draw, **kw):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_net(np.random.default_rng(seed), draw(widths(**kw)))


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
