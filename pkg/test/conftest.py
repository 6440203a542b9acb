from functools import lru_cache
from typing import Optional

import pytest

from bpbv_engine.bvring import BVRing, filtration_truncation
from bpbv_engine.fgl import FormalGroupLaw, build_fgl, default_truncation


@lru_cache(maxsize=None)
def cached_law(p: int, n: int, flavor: str = "hazewinkel", D: Optional[int] = None, N: int = 6) -> FormalGroupLaw:
    D = default_truncation(p, 1, n) if D is None else D
    return build_fgl(p, n, flavor, D, N)


@lru_cache(maxsize=None)
def cached_bvring(p: int, m: int, n: int, flavor: str = "hazewinkel", filtration: bool = False) -> BVRing:
    D = filtration_truncation(p, m, n) if filtration else default_truncation(p, m, n)
    return BVRing(cached_law(p, n, flavor, D), m)


@pytest.fixture(scope="session")
def law_for():
    return cached_law


@pytest.fixture(scope="session")
def bvring_for():
    return cached_bvring
