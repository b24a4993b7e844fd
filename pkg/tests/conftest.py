import json
from pathlib import Path

import numpy as np
import pytest

from motorparams import circuit

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def goldens():
    return json.loads((DATA / "goldens.json").read_text())


def random_feasible(rng, n, floor=1e-3):
    """Feasible parameter sets from the initial envelope, all entries >= ``floor``."""
    out = []
    while len(out) < n:
        x = np.maximum(circuit.sample_uniform(rng, circuit.INIT_RANGES, 4 * n), floor)
        out.extend(x[circuit.feasible_mask(x)])
    return np.array(out[:n])
