import os
import random

import pytest


@pytest.fixture
def rng():
    """Deterministic RNG; override with MUMFORD_SEED for soak runs."""
    seed = int(os.environ.get("MUMFORD_SEED", "20260816"))
    return random.Random(seed)
