import random

import pytest

from hibersched.catalog import BillingConfig, Catalog, VmType, default_catalog
from hibersched.workload import make_job


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture
def tiny_catalog():
    """Two types: a fast 2-core spot type and a slow single-core one."""
    return Catalog((
        VmType("fast", 2, 8.0, 1.00, 0.30, 0.5),
        VmType("slow", 1, 4.0, 0.20, 0.05, 1.0),
    ), BillingConfig())


def random_small_job(seed, n_max=12, dur=(20, 240), mem=(0.5, 6.0), name=None):
    rnd = random.Random(seed)
    n = rnd.randint(3, n_max)
    rows = [(f"t{i:02d}", rnd.randint(*dur), round(rnd.uniform(*mem), 2)) for i in range(n)]
    return make_job(name or f"small{seed}", rows)
