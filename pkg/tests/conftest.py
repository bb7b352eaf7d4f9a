import json
import os

import pytest

from fracmin.quadrature import QuadConfig

_ANCHOR_PATH = os.path.join(os.path.dirname(__file__), "_anchors", "anchors.json")


@pytest.fixture(scope="session")
def anchors():
    with open(_ANCHOR_PATH, "r", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def cfg():
    return QuadConfig(rel_tol=1e-8, seed=0)


@pytest.fixture(scope="session")
def cfg_fast():
    return QuadConfig(rel_tol=1e-6, seed=0)
