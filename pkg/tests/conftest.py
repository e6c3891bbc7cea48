from pathlib import Path

import numpy as np
import pytest

from cyberadequacy.fleet import Fleet, GeneratorUnit, LoadProfile

REPO = Path(__file__).resolve().parent.parent
SCENARIOS = REPO / "scenarios"
FLEETS = REPO / "fleets"


def make_fleet(units, exposed=False):
    """``units`` is a list of (capacity, q) pairs."""
    return Fleet(tuple(GeneratorUnit(f"u{i}", c, q, exposed) for i, (c, q) in enumerate(units)))


def flat_profile(mw):
    return LoadProfile(np.full(8760, float(mw)))


@pytest.fixture
def one_unit():
    return make_fleet([(100, 0.05)])


@pytest.fixture
def two_units():
    return make_fleet([(100, 0.1), (100, 0.1)])
