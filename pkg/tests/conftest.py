from __future__ import annotations

import sys
from pathlib import Path

import pytest


@pytest.fixture(scope="session", autouse=True)
def _add_repo_root_to_syspath() -> None:
    """Make the local package importable when running tests from `tests/`.

    Some PyTest invocations end up with `tests/` as the import root. Ensure the
    repo root is on `sys.path` so `import shadowtorus` works.
    """

    root = Path(__file__).resolve().parents[1]
    root_str = str(root)
    if root_str not in sys.path:
        sys.path.insert(0, root_str)


@pytest.fixture(scope="session")
def small_grid():
    from shadowtorus.sampling import GridSpec

    return GridSpec(base_n=4, support_n=5, face_n=16, interior_n=32)


@pytest.fixture(scope="session")
def linear_system():
    from shadowtorus.systems import make_cat_system

    return make_cat_system("linear")


@pytest.fixture(scope="session")
def lewowicz_system():
    from shadowtorus.systems import make_cat_system

    return make_cat_system("lewowicz_smooth", r=0.05)


@pytest.fixture(scope="session")
def piecewise_system():
    from shadowtorus.systems import make_cat_system

    return make_cat_system("piecewise_homeo", r=0.05)


@pytest.fixture(scope="session")
def linear_chain(linear_system, small_grid):
    from shadowtorus.rect import LyapPair
    from shadowtorus.wazewski import derive_parameter_chain

    pair = LyapPair(frame=linear_system.frame)
    return derive_parameter_chain(linear_system, pair, 0.05, small_grid)
